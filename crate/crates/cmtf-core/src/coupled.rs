//! The coupled matrix-tensor objective and its exact gradient.
//!
//! A model couples an R-component CP factorization of one dense tensor with
//! rank-R factorizations of any number of side matrices, each sharing the
//! factor matrix of one tensor mode:
//!
//! f = 1/2 ||X - [[A^(0),...,A^(N-1)]]||^2 + 1/2 Σ_m ||Y_m - A^(n_m) V_m^T||^2
//!
//! With a binary mask W on the tensor, the first term becomes
//! 1/2 ||W ∘ (X - [[...]])||^2 and missing entries carry no residual.
//!
//! Everything here is exposed as a function-and-gradient oracle over a flat
//! parameter vector so any first-order method can drive it.

use crate::tensor::{
    hadamard, khatri_rao_complement, kruskal_to_full, matricize, DenseTensor, Matrix,
};
use crate::{CmtfError, Result};
use rand::Rng;
use rand_distr::StandardNormal;

/// Shape of a coupled problem: tensor dimensions, component count, and one
/// (mode, width) entry per side matrix. Multiple side matrices may couple to
/// the same mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingSpec {
    pub shape: Vec<usize>,
    pub rank: usize,
    pub sides: Vec<SideSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideSpec {
    /// Tensor mode the side matrix shares its row factor with.
    pub mode: usize,
    /// Column count of the side matrix.
    pub width: usize,
}

impl CouplingSpec {
    pub fn new(shape: Vec<usize>, rank: usize, sides: Vec<SideSpec>) -> Result<Self> {
        if rank == 0 || shape.is_empty() || shape.iter().any(|&s| s == 0) {
            return Err(CmtfError::InvalidArgument(
                "rank and tensor dimensions must be positive".into(),
            ));
        }
        for s in &sides {
            if s.mode >= shape.len() {
                return Err(CmtfError::InvalidArgument(format!(
                    "side coupled to mode {} of an order-{} tensor",
                    s.mode,
                    shape.len()
                )));
            }
        }
        Ok(CouplingSpec { shape, rank, sides })
    }

    /// Total parameter count P = R (Σ_n I_n + Σ_m M_m).
    pub fn param_len(&self) -> usize {
        let dims: usize = self.shape.iter().sum::<usize>()
            + self.sides.iter().map(|s| s.width).sum::<usize>();
        self.rank * dims
    }
}

/// The full variable set: one factor matrix per tensor mode plus one per
/// side matrix, all sharing the column count R.
#[derive(Debug, Clone, PartialEq)]
pub struct CmtfModel {
    pub tensor_factors: Vec<Matrix>,
    pub side_factors: Vec<Matrix>,
}

impl CmtfModel {
    pub fn rank(&self) -> usize {
        self.tensor_factors[0].cols()
    }

    /// Standard-normal random model for a given spec.
    pub fn random(spec: &CouplingSpec, rng: &mut impl Rng) -> Self {
        let mut draw = |rows: usize| {
            Matrix::from_fn(rows, spec.rank, |_, _| rng.sample(StandardNormal))
        };
        let tensor_factors = spec.shape.iter().map(|&d| draw(d)).collect();
        let side_factors = spec.sides.iter().map(|s| draw(s.width)).collect();
        CmtfModel {
            tensor_factors,
            side_factors,
        }
    }

    /// Stacks vec(A^(0)), ..., vec(A^(N-1)), then vec(V_m) for each side, in
    /// the same order the gradient uses.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for f in self.tensor_factors.iter().chain(&self.side_factors) {
            out.extend_from_slice(f.data());
        }
        out
    }

    pub fn unflatten(v: &[f64], spec: &CouplingSpec) -> Result<Self> {
        if v.len() != spec.param_len() {
            return Err(CmtfError::ShapeMismatch(format!(
                "parameter vector length {} but spec needs {}",
                v.len(),
                spec.param_len()
            )));
        }
        let mut offset = 0;
        let mut take = |rows: usize| {
            let len = rows * spec.rank;
            let m = Matrix::from_data(rows, spec.rank, v[offset..offset + len].to_vec()).unwrap();
            offset += len;
            m
        };
        let tensor_factors = spec.shape.iter().map(|&d| take(d)).collect();
        let side_factors = spec.sides.iter().map(|s| take(s.width)).collect();
        Ok(CmtfModel {
            tensor_factors,
            side_factors,
        })
    }

    /// The full tensor the CP part of the model generates.
    pub fn reconstruct_tensor(&self) -> DenseTensor {
        kruskal_to_full(&self.tensor_factors, None).expect("consistent factors")
    }
}

/// One tensor (optionally masked) coupled with side matrices, each tagged
/// with the tensor mode it shares.
#[derive(Debug, Clone)]
pub struct CoupledDataset {
    pub tensor: DenseTensor,
    /// Binary indicator of known entries: 1 known, 0 missing.
    pub mask: Option<DenseTensor>,
    pub sides: Vec<(usize, Matrix)>,
}

impl CoupledDataset {
    pub fn new(
        tensor: DenseTensor,
        mask: Option<DenseTensor>,
        sides: Vec<(usize, Matrix)>,
    ) -> Result<Self> {
        if let Some(w) = &mask {
            if w.shape() != tensor.shape() {
                return Err(CmtfError::ShapeMismatch(
                    "mask shape differs from tensor shape".into(),
                ));
            }
            if w.data().iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(CmtfError::InvalidArgument(
                    "mask entries must be 0 or 1".into(),
                ));
            }
        }
        for (mode, y) in &sides {
            if *mode >= tensor.order() {
                return Err(CmtfError::InvalidArgument(format!(
                    "side coupled to mode {} of an order-{} tensor",
                    mode,
                    tensor.order()
                )));
            }
            if y.rows() != tensor.shape()[*mode] {
                return Err(CmtfError::ShapeMismatch(format!(
                    "side matrix on mode {} has {} rows, tensor dimension is {}",
                    mode,
                    y.rows(),
                    tensor.shape()[*mode]
                )));
            }
        }
        Ok(CoupledDataset {
            tensor,
            mask,
            sides,
        })
    }

    pub fn spec(&self, rank: usize) -> CouplingSpec {
        CouplingSpec {
            shape: self.tensor.shape().to_vec(),
            rank,
            sides: self
                .sides
                .iter()
                .map(|(mode, y)| SideSpec {
                    mode: *mode,
                    width: y.cols(),
                })
                .collect(),
        }
    }

    fn check_model(&self, model: &CmtfModel) -> Result<()> {
        if model.tensor_factors.len() != self.tensor.order()
            || model.side_factors.len() != self.sides.len()
        {
            return Err(CmtfError::ShapeMismatch(
                "model factor count differs from dataset".into(),
            ));
        }
        let rank = model.rank();
        for (f, &dim) in model.tensor_factors.iter().zip(self.tensor.shape()) {
            if f.rows() != dim || f.cols() != rank {
                return Err(CmtfError::ShapeMismatch(
                    "tensor factor dimensions differ from dataset".into(),
                ));
            }
        }
        for (v, (_, y)) in model.side_factors.iter().zip(&self.sides) {
            if v.rows() != y.cols() || v.cols() != rank {
                return Err(CmtfError::ShapeMismatch(
                    "side factor dimensions differ from dataset".into(),
                ));
            }
        }
        Ok(())
    }
}

/// f(model) for the dataset.
pub fn objective(data: &CoupledDataset, model: &CmtfModel) -> Result<f64> {
    evaluate(data, model, false).map(|(f, _)| f)
}

/// ∇f(model), stacked in flatten order.
pub fn gradient(data: &CoupledDataset, model: &CmtfModel) -> Result<Vec<f64>> {
    evaluate(data, model, true).map(|(_, g)| g.unwrap())
}

/// Objective and gradient in one pass, sharing residual work.
pub fn objective_and_gradient(data: &CoupledDataset, model: &CmtfModel) -> Result<(f64, Vec<f64>)> {
    evaluate(data, model, true).map(|(f, g)| (f, g.unwrap()))
}

fn evaluate(
    data: &CoupledDataset,
    model: &CmtfModel,
    want_grad: bool,
) -> Result<(f64, Option<Vec<f64>>)> {
    data.check_model(model)?;
    let order = data.tensor.order();
    let factors = &model.tensor_factors;

    let mut tensor_partials: Vec<Option<Matrix>> = vec![None; order];
    let mut side_partials: Vec<Matrix> = Vec::with_capacity(data.sides.len());

    let f1 = if let Some(mask) = &data.mask {
        // Masked residual must be materialized: W ∘ (Z - X).
        let z = kruskal_to_full(factors, None)?;
        let diff = DenseTensor::from_data(
            data.tensor.shape(),
            z.data()
                .iter()
                .zip(data.tensor.data())
                .map(|(zv, xv)| zv - xv)
                .collect(),
        )?;
        let masked = hadamard(mask, &diff)?;
        let f1 = 0.5 * masked.norm().powi(2);
        if want_grad {
            for i in 0..order {
                let unf = matricize(&masked, i)?;
                let kr = khatri_rao_complement(factors, i)?;
                tensor_partials[i] = Some(unf.dot(&kr));
            }
        }
        f1
    } else {
        // Unmasked: work through Gram matrices, never materializing Z.
        let grams: Vec<Matrix> = factors.iter().map(|f| f.gram()).collect();
        let rank = model.rank();
        let mut gamma_all = Matrix::from_fn(rank, rank, |_, _| 1.0);
        for g in &grams {
            gamma_all = gamma_all.hadamard(g);
        }
        let z_sq: f64 = gamma_all.data().iter().sum();

        let mttkrp0 = matricize(&data.tensor, 0)?.dot(&khatri_rao_complement(factors, 0)?);
        let xz: f64 = mttkrp0
            .data()
            .iter()
            .zip(factors[0].data())
            .map(|(m, a)| m * a)
            .sum();
        let x_sq = data.tensor.norm().powi(2);
        let f1 = 0.5 * (x_sq - 2.0 * xz + z_sq);

        if want_grad {
            for i in 0..order {
                let mut gamma_i = Matrix::from_fn(rank, rank, |_, _| 1.0);
                for (n, g) in grams.iter().enumerate() {
                    if n != i {
                        gamma_i = gamma_i.hadamard(g);
                    }
                }
                let mttkrp = if i == 0 {
                    mttkrp0.clone()
                } else {
                    matricize(&data.tensor, i)?.dot(&khatri_rao_complement(factors, i)?)
                };
                tensor_partials[i] = Some(factors[i].dot(&gamma_i).sub(&mttkrp));
            }
        }
        f1
    };

    let mut f2 = 0.0;
    for (m, (mode, y)) in data.sides.iter().enumerate() {
        let v = &model.side_factors[m];
        let a = &model.tensor_factors[*mode];
        let residual = y.sub(&a.dot_t(v));
        f2 += 0.5 * residual.norm().powi(2);
        if want_grad {
            // dA^(n) += A V^T V - Y V = -(Y - A V^T) V
            let part = tensor_partials[*mode].as_mut().unwrap();
            *part = part.sub(&residual.dot(v));
            // dV = V A^T A - Y^T A = -(Y - A V^T)^T A
            let mut dv = residual.t_dot(a);
            dv.scale(-1.0);
            side_partials.push(dv);
        }
    }

    let grad = if want_grad {
        let mut g = Vec::with_capacity(model.flatten().len());
        for p in tensor_partials {
            g.extend_from_slice(p.unwrap().data());
        }
        for p in side_partials {
            g.extend_from_slice(p.data());
        }
        Some(g)
    } else {
        None
    };

    Ok((f1 + f2, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::kruskal_to_full;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_model(spec: &CouplingSpec, seed: u64) -> CmtfModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CmtfModel::random(spec, &mut rng)
    }

    fn exact_dataset(spec: &CouplingSpec, seed: u64) -> (CoupledDataset, CmtfModel) {
        let truth = random_model(spec, seed);
        let tensor = truth.reconstruct_tensor();
        let sides = spec
            .sides
            .iter()
            .enumerate()
            .map(|(m, s)| {
                (
                    s.mode,
                    truth.tensor_factors[s.mode].dot_t(&truth.side_factors[m]),
                )
            })
            .collect();
        (CoupledDataset::new(tensor, None, sides).unwrap(), truth)
    }

    #[test]
    fn param_len_formula() {
        let spec =
            CouplingSpec::new(vec![2, 2, 2], 1, vec![SideSpec { mode: 0, width: 2 }]).unwrap();
        assert_eq!(spec.param_len(), 8);
        let spec =
            CouplingSpec::new(vec![3, 4, 5], 2, vec![SideSpec { mode: 1, width: 7 }]).unwrap();
        assert_eq!(spec.param_len(), 2 * (3 + 4 + 5 + 7));
    }

    #[test]
    fn flatten_unflatten_round_trip() {
        let spec = CouplingSpec::new(
            vec![3, 2, 4],
            3,
            vec![
                SideSpec { mode: 0, width: 5 },
                SideSpec { mode: 2, width: 2 },
            ],
        )
        .unwrap();
        let model = random_model(&spec, 7);
        let v = model.flatten();
        assert_eq!(v.len(), spec.param_len());
        let back = CmtfModel::unflatten(&v, &spec).unwrap();
        assert_eq!(back, model);
        assert!(CmtfModel::unflatten(&v[1..], &spec).is_err());
    }

    #[test]
    fn objective_zero_at_exact_solution() {
        let spec =
            CouplingSpec::new(vec![3, 4, 2], 2, vec![SideSpec { mode: 0, width: 3 }]).unwrap();
        let (data, truth) = exact_dataset(&spec, 3);
        let f = objective(&data, &truth).unwrap();
        assert!(f.abs() < 1e-10, "f = {}", f);
        let g = gradient(&data, &truth).unwrap();
        let ginf = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(ginf < 1e-10, "grad inf norm = {}", ginf);
    }

    #[test]
    fn objective_of_zero_model_is_half_data_norms() {
        let spec =
            CouplingSpec::new(vec![2, 3, 2], 2, vec![SideSpec { mode: 1, width: 4 }]).unwrap();
        let (data, _) = exact_dataset(&spec, 9);
        let zero = CmtfModel {
            tensor_factors: data
                .tensor
                .shape()
                .iter()
                .map(|&d| Matrix::zeros(d, 2))
                .collect(),
            side_factors: vec![Matrix::zeros(4, 2)],
        };
        let f = objective(&data, &zero).unwrap();
        let expected =
            0.5 * (data.tensor.norm().powi(2) + data.sides[0].1.norm().powi(2));
        assert!((f - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn objective_matches_elementwise_oracle() {
        // hand-built rank-1 model on a 2x2x2 instance with one side matrix
        let spec =
            CouplingSpec::new(vec![2, 2, 2], 1, vec![SideSpec { mode: 0, width: 2 }]).unwrap();
        let (data, _) = exact_dataset(&spec, 17);
        let model = random_model(&spec, 99);
        let f = objective(&data, &model).unwrap();

        let z = kruskal_to_full(&model.tensor_factors, None).unwrap();
        let mut oracle = 0.0;
        for (xv, zv) in data.tensor.data().iter().zip(z.data()) {
            oracle += 0.5 * (xv - zv).powi(2);
        }
        let y = &data.sides[0].1;
        let yhat = model.tensor_factors[0].dot_t(&model.side_factors[0]);
        for (yv, hv) in y.data().iter().zip(yhat.data()) {
            oracle += 0.5 * (yv - hv).powi(2);
        }
        assert!((f - oracle).abs() / oracle.max(1.0) < 1e-12);
    }

    fn finite_difference(data: &CoupledDataset, spec: &CouplingSpec, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; theta.len()];
        let mut point = theta.to_vec();
        for i in 0..theta.len() {
            let h = 1e-6 * (1.0 + theta[i].abs());
            point[i] = theta[i] + h;
            let fp = objective(data, &CmtfModel::unflatten(&point, spec).unwrap()).unwrap();
            point[i] = theta[i] - h;
            let fm = objective(data, &CmtfModel::unflatten(&point, spec).unwrap()).unwrap();
            point[i] = theta[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        g
    }

    fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
        analytic
            .iter()
            .zip(numeric)
            .map(|(a, n)| (a - n).abs() / (1.0 + a.abs().max(n.abs())))
            .fold(0.0f64, f64::max)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // random instances over orders, side layouts, and masks
        let layouts: Vec<(Vec<usize>, usize, Vec<SideSpec>, bool)> = vec![
            (vec![4, 3, 2], 2, vec![SideSpec { mode: 0, width: 3 }], false),
            (vec![4, 3, 2], 2, vec![SideSpec { mode: 0, width: 3 }], true),
            (vec![3, 3, 3], 3, vec![], false),
            (vec![3, 3, 3], 1, vec![], true),
            (
                vec![2, 4, 3],
                2,
                vec![
                    SideSpec { mode: 1, width: 2 },
                    SideSpec { mode: 2, width: 4 },
                ],
                false,
            ),
            (
                vec![5, 2, 2],
                2,
                vec![
                    SideSpec { mode: 0, width: 2 },
                    SideSpec { mode: 0, width: 5 },
                ],
                true,
            ),
            (vec![6, 2], 2, vec![SideSpec { mode: 0, width: 3 }], false),
        ];
        for (li, (shape, rank, sides, masked)) in layouts.into_iter().enumerate() {
            let spec = CouplingSpec::new(shape.clone(), rank, sides).unwrap();
            let (mut data, _) = exact_dataset(&spec, 100 + li as u64);
            // perturb the data so we are not at a stationary point
            let mut rng = ChaCha8Rng::seed_from_u64(200 + li as u64);
            for v in data.tensor.data_mut() {
                *v += 0.3 * rng.sample::<f64, _>(StandardNormal);
            }
            if masked {
                let mask_data: Vec<f64> = (0..data.tensor.len())
                    .map(|_| if rng.gen_bool(0.7) { 1.0 } else { 0.0 })
                    .collect();
                data.mask =
                    Some(DenseTensor::from_data(data.tensor.shape(), mask_data).unwrap());
            }
            let model = random_model(&spec, 300 + li as u64);
            let theta = model.flatten();
            let analytic = gradient(&data, &model).unwrap();
            let numeric = finite_difference(&data, &spec, &theta);
            let err = max_rel_err(&analytic, &numeric);
            assert!(err <= 1e-6, "layout {}: max rel err {}", li, err);
        }
    }

    #[test]
    fn all_ones_mask_equals_unmasked_gradient() {
        let spec =
            CouplingSpec::new(vec![3, 2, 4], 2, vec![SideSpec { mode: 2, width: 3 }]).unwrap();
        let (mut data, _) = exact_dataset(&spec, 5);
        let model = random_model(&spec, 55);
        let f_plain = objective(&data, &model).unwrap();
        let g_plain = gradient(&data, &model).unwrap();
        data.mask = Some(
            DenseTensor::from_data(data.tensor.shape(), vec![1.0; data.tensor.len()]).unwrap(),
        );
        let f_masked = objective(&data, &model).unwrap();
        let g_masked = gradient(&data, &model).unwrap();
        assert!((f_plain - f_masked).abs() / f_plain < 1e-12);
        for (a, b) in g_plain.iter().zip(&g_masked) {
            assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn all_zeros_mask_leaves_only_side_terms() {
        let spec =
            CouplingSpec::new(vec![3, 2, 4], 2, vec![SideSpec { mode: 0, width: 3 }]).unwrap();
        let (mut data, _) = exact_dataset(&spec, 6);
        let model = random_model(&spec, 66);
        data.mask = Some(DenseTensor::zeros(data.tensor.shape()));
        let f = objective(&data, &model).unwrap();
        let y = &data.sides[0].1;
        let yhat = model.tensor_factors[0].dot_t(&model.side_factors[0]);
        let expected = 0.5 * y.sub(&yhat).norm().powi(2);
        assert!((f - expected).abs() / expected < 1e-12);
        // partials for uncoupled tensor modes are exactly zero
        let g = gradient(&data, &model).unwrap();
        let spec_sizes: Vec<usize> = vec![3 * 2, 2 * 2, 4 * 2];
        let mode1 = &g[spec_sizes[0]..spec_sizes[0] + spec_sizes[1]];
        let mode2 = &g[spec_sizes[0] + spec_sizes[1]..spec_sizes[0] + spec_sizes[1] + spec_sizes[2]];
        assert!(mode1.iter().chain(mode2).all(|&v| v == 0.0));
    }

    #[test]
    fn fused_call_matches_separate_calls() {
        let spec =
            CouplingSpec::new(vec![2, 3, 2], 2, vec![SideSpec { mode: 1, width: 4 }]).unwrap();
        let (mut data, _) = exact_dataset(&spec, 8);
        let model = random_model(&spec, 88);
        let (f, g) = objective_and_gradient(&data, &model).unwrap();
        assert_eq!(f, objective(&data, &model).unwrap());
        assert_eq!(g, gradient(&data, &model).unwrap());
        // masked variant too
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mask_data: Vec<f64> = (0..data.tensor.len())
            .map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 })
            .collect();
        data.mask = Some(DenseTensor::from_data(data.tensor.shape(), mask_data).unwrap());
        let (f, g) = objective_and_gradient(&data, &model).unwrap();
        assert_eq!(f, objective(&data, &model).unwrap());
        assert_eq!(g, gradient(&data, &model).unwrap());
    }

    #[test]
    fn objective_invariant_under_component_permutation() {
        let spec =
            CouplingSpec::new(vec![3, 2, 2], 3, vec![SideSpec { mode: 0, width: 4 }]).unwrap();
        let (data, _) = exact_dataset(&spec, 10);
        let model = random_model(&spec, 110);
        let f = objective(&data, &model).unwrap();
        let perm = [2usize, 0, 1];
        let permute = |m: &Matrix| {
            let mut out = Matrix::zeros(m.rows(), m.cols());
            for (new_c, &old_c) in perm.iter().enumerate() {
                out.col_mut(new_c).copy_from_slice(m.col(old_c));
            }
            out
        };
        let permuted = CmtfModel {
            tensor_factors: model.tensor_factors.iter().map(&permute).collect(),
            side_factors: model.side_factors.iter().map(&permute).collect(),
        };
        let fp = objective(&data, &permuted).unwrap();
        assert!((f - fp).abs() / f < 1e-12);
    }

    #[test]
    fn scale_indeterminacy_of_tensor_term() {
        // no sides, so f is the tensor term alone
        let spec = CouplingSpec::new(vec![3, 4, 2], 2, vec![]).unwrap();
        let (data, _) = exact_dataset(&spec, 12);
        let model = random_model(&spec, 112);
        let f = objective(&data, &model).unwrap();
        let s = 3.7;
        let mut scaled = model.clone();
        scaled.tensor_factors[0].scale_col(1, s);
        scaled.tensor_factors[1].scale_col(1, 1.0 / s);
        let fs = objective(&data, &scaled).unwrap();
        assert!((f - fs).abs() / f < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let spec =
            CouplingSpec::new(vec![3, 2, 2], 2, vec![SideSpec { mode: 0, width: 4 }]).unwrap();
        let (data, _) = exact_dataset(&spec, 14);
        let wrong_spec =
            CouplingSpec::new(vec![4, 2, 2], 2, vec![SideSpec { mode: 0, width: 4 }]).unwrap();
        let model = random_model(&wrong_spec, 1);
        assert!(objective(&data, &model).is_err());
        assert!(gradient(&data, &model).is_err());
    }

    #[test]
    fn dataset_validation() {
        let t = DenseTensor::zeros(&[2, 3, 2]);
        // bad mask shape
        assert!(
            CoupledDataset::new(t.clone(), Some(DenseTensor::zeros(&[2, 3, 3])), vec![]).is_err()
        );
        // non-binary mask
        let w = DenseTensor::from_data(&[2, 3, 2], vec![0.5; 12]).unwrap();
        assert!(CoupledDataset::new(t.clone(), Some(w), vec![]).is_err());
        // side rows mismatch
        assert!(CoupledDataset::new(t.clone(), None, vec![(1, Matrix::zeros(2, 4))]).is_err());
        // side mode out of range
        assert!(CoupledDataset::new(t, None, vec![(3, Matrix::zeros(2, 4))]).is_err());
    }
}
