//! Alternating least squares for the coupled model.
//!
//! Each sweep equilibrates factor column scales (a model-preserving
//! rescale), then solves the exact least-squares subproblem for each
//! tensor-mode factor (stacking the unfolded tensor with any side matrices
//! coupled to that mode) and finally for each side factor. Unmasked data
//! only.

use super::linalg::pinv_gram;
use super::{FitResult, Init, StopConfig, StopReason};
use crate::coupled::{objective, CoupledDataset};
use crate::tensor::{khatri_rao_complement, matricize, Matrix};
use crate::{CmtfError, Result};

/// Identifies which factor a sweep step is updating.
#[derive(Clone, Copy)]
enum Block {
    TensorMode(usize),
    Side(usize),
}

pub fn cmtf_als(
    data: &CoupledDataset,
    rank: usize,
    init: &Init,
    stop: &StopConfig,
) -> Result<FitResult> {
    if data.mask.is_some() {
        return Err(CmtfError::InvalidArgument(
            "alternating least squares requires fully observed data".into(),
        ));
    }
    let mut model = init.resolve(data, rank);
    let order = data.tensor.order();

    // unfoldings never change; build them once
    let unfoldings: Vec<Matrix> = (0..order)
        .map(|i| matricize(&data.tensor, i))
        .collect::<Result<_>>()?;
    // side matrices grouped by the mode they couple to
    let sides_on: Vec<Vec<usize>> = (0..order)
        .map(|i| {
            data.sides
                .iter()
                .enumerate()
                .filter(|(_, (mode, _))| *mode == i)
                .map(|(m, _)| m)
                .collect()
        })
        .collect();

    let mut func_evals = 0usize;
    let mut fx = {
        func_evals += 1;
        objective(data, &model)?
    };
    let mut objective_trace = vec![fx];
    let mut iterations = 0usize;
    let mut stop_reason = StopReason::MaxIterations;

    while iterations < stop.max_iterations {
        let f_old = fx;
        // Rescale for conditioning without moving the model: per component,
        // equalize the column norms of the tensor factors at their geometric
        // mean and compensate each side factor column inversely. Both the
        // CP part and every A V^T product are preserved exactly, so each
        // sweep remains pure coordinate descent and the trace stays
        // monotone. (Rescaling to unit norms without compensating would
        // change the side residuals and shift the sweep's fixed points off
        // the minimizers.)
        for r in 0..rank {
            let norms: Vec<f64> = model
                .tensor_factors
                .iter()
                .map(|f| f.col_norm(r))
                .collect();
            if norms.iter().any(|&n| n == 0.0) {
                continue;
            }
            let geo = (norms.iter().map(|n| n.ln()).sum::<f64>() / order as f64).exp();
            for (f, &n) in model.tensor_factors.iter_mut().zip(&norms) {
                f.scale_col(r, geo / n);
            }
            for (m, (mode, _)) in data.sides.iter().enumerate() {
                model.side_factors[m].scale_col(r, norms[*mode] / geo);
            }
        }

        // Each block update is the exact least-squares solution and cannot
        // increase the objective in exact arithmetic, but the Gram
        // pseudo-inverse truncates near-zero eigenvalues, and on badly
        // conditioned (typically overfactored) iterates the truncated solve
        // can land above the previous iterate. Keeping the old block in
        // that case preserves monotone coordinate descent and is a no-op
        // whenever the solve is trustworthy.
        let accept =
            |model: &mut crate::coupled::CmtfModel, fx: &mut f64, func_evals: &mut usize, which: Block, candidate: Matrix| -> Result<()> {
                let slot = match which {
                    Block::TensorMode(i) => &mut model.tensor_factors[i],
                    Block::Side(m) => &mut model.side_factors[m],
                };
                let old = std::mem::replace(slot, candidate);
                *func_evals += 1;
                let f_new = objective(data, model)?;
                if f_new <= *fx {
                    *fx = f_new;
                } else {
                    let slot = match which {
                        Block::TensorMode(i) => &mut model.tensor_factors[i],
                        Block::Side(m) => &mut model.side_factors[m],
                    };
                    *slot = old;
                }
                Ok(())
            };

        for i in 0..order {
            // normal equations for min ||[X_(i)  Y...] - A [Kr  V...]^T||:
            // A = (X_(i) Kr + sum Y_m V_m) (Gamma_i + sum V_m^T V_m)^+
            let mut gram = Matrix::from_fn(rank, rank, |_, _| 1.0);
            for (n, f) in model.tensor_factors.iter().enumerate() {
                if n != i {
                    gram = gram.hadamard(&f.gram());
                }
            }
            let kr = khatri_rao_complement(&model.tensor_factors, i)?;
            let mut cross = unfoldings[i].dot(&kr);
            for &m in &sides_on[i] {
                let v = &model.side_factors[m];
                gram = gram.add(&v.gram());
                cross = cross.add(&data.sides[m].1.dot(v));
            }
            let candidate = cross.dot(&pinv_gram(&gram));
            accept(&mut model, &mut fx, &mut func_evals, Block::TensorMode(i), candidate)?;
        }

        for (m, (mode, y)) in data.sides.iter().enumerate() {
            // min ||Y - A V^T|| over V
            let a = &model.tensor_factors[*mode];
            let candidate = y.t_dot(a).dot(&pinv_gram(&a.gram()));
            accept(&mut model, &mut fx, &mut func_evals, Block::Side(m), candidate)?;
        }

        iterations += 1;
        objective_trace.push(fx);
        if (fx - f_old).abs() / f_old.abs().max(f64::MIN_POSITIVE) <= stop.rel_func_tol {
            stop_reason = StopReason::RelFuncTol;
            break;
        }
    }

    Ok(FitResult {
        model,
        objective_trace,
        grad_norm_trace: Vec::new(),
        stop_reason,
        iterations,
        func_evals,
    })
}
