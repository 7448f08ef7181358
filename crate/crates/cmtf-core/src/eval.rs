//! Scoring: factor match score, success thresholding, tensor completion
//! score, and the paired t-test used for the accuracy tables.

use crate::coupled::CmtfModel;
use crate::tensor::{kruskal_to_full, DenseTensor, Matrix};
use crate::{CmtfError, Result};
use itertools::Itertools;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// A model in normalized form: every factor column has unit two-norm and
/// the scales live in explicit per-component weights. `weights[r]` is the
/// aggregate ξ_r = λ_r + Σ_m α_{m,r} where λ_r collects the tensor-factor
/// column norms and α_{m,r} the norms of side pair m (shared column times
/// side column).
#[derive(Debug, Clone)]
pub struct WeightedKruskal {
    pub tensor_factors: Vec<Matrix>,
    pub side_factors: Vec<Matrix>,
    /// Tensor mode each side factor couples to.
    pub side_modes: Vec<usize>,
    pub lambdas: Vec<f64>,
    /// One weight vector per side matrix.
    pub alphas: Vec<Vec<f64>>,
    /// ξ_r aggregates.
    pub weights: Vec<f64>,
}

impl WeightedKruskal {
    pub fn rank(&self) -> usize {
        self.tensor_factors[0].cols()
    }

    /// All factor matrices in a fixed order: tensor modes, then sides.
    pub fn factor_matrices(&self) -> impl Iterator<Item = &Matrix> {
        self.tensor_factors.iter().chain(self.side_factors.iter())
    }

    /// Rebuilds the tensor this normalized model represents.
    pub fn reconstruct_tensor(&self) -> DenseTensor {
        kruskal_to_full(&self.tensor_factors, Some(&self.lambdas)).expect("consistent factors")
    }

    /// Rebuilds side matrix `m`: A diag(α_m) V^T with A the shared factor.
    pub fn reconstruct_side(&self, m: usize) -> Matrix {
        let a = &self.tensor_factors[self.side_modes[m]];
        let mut scaled = a.clone();
        for (r, &w) in self.alphas[m].iter().enumerate() {
            scaled.scale_col(r, w);
        }
        scaled.dot_t(&self.side_factors[m])
    }
}

/// Normalizes every factor column to unit norm, collecting the scales into
/// per-component weights, and canonicalizes signs: each column of the first
/// tensor factor gets a nonnegative leading entry, with the compensating
/// flip pushed into the last tensor factor (and into any side factor whose
/// shared column flipped, so all products are preserved).
pub fn normalize_model(model: &CmtfModel, side_modes: &[usize]) -> Result<WeightedKruskal> {
    if side_modes.len() != model.side_factors.len() {
        return Err(CmtfError::InvalidArgument(
            "one coupling mode required per side factor".into(),
        ));
    }
    let rank = model.rank();
    let order = model.tensor_factors.len();

    let mut tensor_factors = model.tensor_factors.clone();
    let mut side_factors = model.side_factors.clone();
    let mut tensor_norms = vec![vec![0.0; rank]; order];
    for (n, f) in tensor_factors.iter_mut().enumerate() {
        for r in 0..rank {
            let nn = f.col_norm(r);
            if nn == 0.0 {
                return Err(CmtfError::InvalidArgument(format!(
                    "zero column {} in tensor factor {}",
                    r, n
                )));
            }
            f.scale_col(r, 1.0 / nn);
            tensor_norms[n][r] = nn;
        }
    }
    let mut side_norms = vec![vec![0.0; rank]; side_factors.len()];
    for (m, v) in side_factors.iter_mut().enumerate() {
        for r in 0..rank {
            let nn = v.col_norm(r);
            if nn == 0.0 {
                return Err(CmtfError::InvalidArgument(format!(
                    "zero column {} in side factor {}",
                    r, m
                )));
            }
            v.scale_col(r, 1.0 / nn);
            side_norms[m][r] = nn;
        }
    }

    if order >= 2 {
        for r in 0..rank {
            if tensor_factors[0][(0, r)] < 0.0 {
                tensor_factors[0].scale_col(r, -1.0);
                tensor_factors[order - 1].scale_col(r, -1.0);
                for (m, &mode) in side_modes.iter().enumerate() {
                    if mode == 0 || mode == order - 1 {
                        side_factors[m].scale_col(r, -1.0);
                    }
                }
            }
        }
    }

    let lambdas: Vec<f64> = (0..rank)
        .map(|r| tensor_norms.iter().map(|n| n[r]).product())
        .collect();
    let alphas: Vec<Vec<f64>> = side_modes
        .iter()
        .enumerate()
        .map(|(m, &mode)| {
            (0..rank)
                .map(|r| tensor_norms[mode][r] * side_norms[m][r])
                .collect()
        })
        .collect();
    let weights: Vec<f64> = (0..rank)
        .map(|r| lambdas[r] + alphas.iter().map(|a| a[r]).sum::<f64>())
        .collect();

    Ok(WeightedKruskal {
        tensor_factors,
        side_factors,
        side_modes: side_modes.to_vec(),
        lambdas,
        alphas,
        weights,
    })
}

/// How each true component was matched.
#[derive(Debug, Clone)]
pub struct FmsReport {
    /// min over per_component scores.
    pub score: f64,
    /// (matched estimate index, component score) per true component.
    pub per_component: Vec<(usize, f64)>,
}

/// Factor match score: per matched pair, the weight agreement times the
/// absolute product of column dot products across all factor matrices; the
/// overall score is the minimum over true components, maximized over
/// injective assignments of true components into estimated ones (extra
/// estimated components are ignored).
pub fn fms(truth: &WeightedKruskal, estimate: &WeightedKruskal) -> Result<FmsReport> {
    fms_impl(truth, estimate, false)
}

/// FMS variant that drops the weight-agreement term, requiring only the
/// column products to match.
pub fn fms_relaxed(truth: &WeightedKruskal, estimate: &WeightedKruskal) -> Result<FmsReport> {
    fms_impl(truth, estimate, true)
}

fn fms_impl(truth: &WeightedKruskal, estimate: &WeightedKruskal, relaxed: bool) -> Result<FmsReport> {
    let t_mats: Vec<&Matrix> = truth.factor_matrices().collect();
    let e_mats: Vec<&Matrix> = estimate.factor_matrices().collect();
    if t_mats.len() != e_mats.len() {
        return Err(CmtfError::ShapeMismatch(
            "factor matrix counts differ".into(),
        ));
    }
    for (t, e) in t_mats.iter().zip(&e_mats) {
        if t.rows() != e.rows() {
            return Err(CmtfError::ShapeMismatch(
                "factor matrix row dimensions differ".into(),
            ));
        }
    }
    let r_true = truth.rank();
    let r_est = estimate.rank();
    if r_est < r_true {
        return Err(CmtfError::InvalidArgument(
            "estimate rank below truth rank".into(),
        ));
    }
    if r_est > 6 {
        return Err(CmtfError::InvalidArgument(
            "exhaustive component matching supports rank up to 6".into(),
        ));
    }

    // pairwise component scores
    let mut pair = vec![vec![0.0; r_est]; r_true];
    for (r, row) in pair.iter_mut().enumerate() {
        for (rh, cell) in row.iter_mut().enumerate() {
            let mut prod = 1.0;
            for (t, e) in t_mats.iter().zip(&e_mats) {
                let dot: f64 = t.col(r).iter().zip(e.col(rh)).map(|(a, b)| a * b).sum();
                prod *= dot;
            }
            let congruence = prod.abs();
            *cell = if relaxed {
                congruence
            } else {
                let (w, wh) = (truth.weights[r], estimate.weights[rh]);
                (1.0 - (w - wh).abs() / w.max(wh)) * congruence
            };
        }
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for assignment in (0..r_est).permutations(r_true) {
        let score = assignment
            .iter()
            .enumerate()
            .map(|(r, &rh)| pair[r][rh])
            .fold(f64::INFINITY, f64::min);
        if best.as_ref().map_or(true, |(b, _)| score > *b) {
            best = Some((score, assignment));
        }
    }
    let (score, assignment) = best.expect("rank >= 1");
    Ok(FmsReport {
        score,
        per_component: assignment
            .iter()
            .enumerate()
            .map(|(r, &rh)| (rh, pair[r][rh]))
            .collect(),
    })
}

/// Recovery success: score above the (0.99)^N threshold, N the number of
/// factor matrices.
pub fn success(score: f64, num_factor_matrices: usize) -> bool {
    assert!(num_factor_matrices >= 1);
    score > 0.99f64.powi(num_factor_matrices as i32)
}

/// Tensor completion score: relative error over the missing entries only,
/// ||(1-W) ∘ (X - X̂)|| / ||(1-W) ∘ X||.
pub fn tcs(original: &DenseTensor, mask: &DenseTensor, reconstructed: &DenseTensor) -> Result<f64> {
    if original.shape() != mask.shape() || original.shape() != reconstructed.shape() {
        return Err(CmtfError::ShapeMismatch("tcs shapes differ".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut any_missing = false;
    for ((&x, &w), &xh) in original
        .data()
        .iter()
        .zip(mask.data())
        .zip(reconstructed.data())
    {
        if w != 0.0 && w != 1.0 {
            return Err(CmtfError::InvalidArgument(
                "mask entries must be 0 or 1".into(),
            ));
        }
        if w == 0.0 {
            any_missing = true;
            num += (x - xh) * (x - xh);
            den += x * x;
        }
    }
    if !any_missing {
        return Err(CmtfError::InvalidArgument(
            "completion score needs at least one missing entry".into(),
        ));
    }
    Ok((num / den).sqrt())
}

/// Two-sided paired t-test on a - b.
#[derive(Debug, Clone, Copy)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    /// Zero-variance differences handled by convention (p=1 if all zero,
    /// p=0 otherwise).
    pub degenerate: bool,
}

pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(CmtfError::InvalidArgument(
            "paired t-test needs two equal-length samples of size >= 2".into(),
        ));
    }
    let n = a.len() as f64;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Ok(if mean == 0.0 {
            TTest {
                t: 0.0,
                p: 1.0,
                degenerate: true,
            }
        } else {
            TTest {
                t: f64::INFINITY * mean.signum(),
                p: 0.0,
                degenerate: true,
            }
        });
    }
    let t = mean / (var.sqrt() / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).expect("valid dof");
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok(TTest {
        t,
        p,
        degenerate: false,
    })
}
