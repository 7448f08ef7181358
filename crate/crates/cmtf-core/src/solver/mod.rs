//! Fitting algorithms: all-at-once nonlinear conjugate gradient (CMTF-OPT,
//! with masked data handled transparently as CMTF-WOPT) and alternating
//! least squares (CMTF-ALS), plus the dense least-squares and truncated-SVD
//! helpers they need.

mod als;
mod linalg;
mod ncg;

pub use als::cmtf_als;
pub use linalg::{least_squares_solve, pinv_gram, truncated_svd};
pub use ncg::{cmtf_opt, minimize, NcgOutcome};

use crate::coupled::{CmtfModel, CoupledDataset};
use crate::tensor::{hadamard, matricize, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stopping rules shared by both solvers. The gradient-norm rule applies the
/// tolerance to ||grad||_2 / P and is used by the all-at-once solver only.
#[derive(Debug, Clone)]
pub struct StopConfig {
    pub rel_func_tol: f64,
    pub max_iterations: usize,
    pub max_func_evals: usize,
    pub grad_norm_tol: f64,
}

impl StopConfig {
    pub fn opt_default() -> Self {
        StopConfig {
            rel_func_tol: 1e-8,
            max_iterations: 1_000,
            max_func_evals: 10_000,
            grad_norm_tol: 1e-8,
        }
    }

    pub fn als_default() -> Self {
        StopConfig {
            rel_func_tol: 1e-8,
            max_iterations: 10_000,
            max_func_evals: usize::MAX,
            grad_norm_tol: 0.0,
        }
    }
}

/// Strong-Wolfe line search parameters.
#[derive(Debug, Clone)]
pub struct LineSearchConfig {
    pub sufficient_decrease: f64,
    pub curvature: f64,
    pub max_trials: usize,
    pub initial_step: f64,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        LineSearchConfig {
            sufficient_decrease: 1e-4,
            curvature: 1e-2,
            max_trials: 20,
            initial_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    RelFuncTol,
    MaxIterations,
    MaxFuncEvals,
    GradNormTol,
    LineSearchFailure,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StopReason::RelFuncTol => "rel-func-tol",
            StopReason::MaxIterations => "max-iterations",
            StopReason::MaxFuncEvals => "max-func-evals",
            StopReason::GradNormTol => "grad-norm-tol",
            StopReason::LineSearchFailure => "line-search-failure",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for StopReason {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rel-func-tol" => Ok(StopReason::RelFuncTol),
            "max-iterations" => Ok(StopReason::MaxIterations),
            "max-func-evals" => Ok(StopReason::MaxFuncEvals),
            "grad-norm-tol" => Ok(StopReason::GradNormTol),
            "line-search-failure" => Ok(StopReason::LineSearchFailure),
            other => Err(format!("unknown stop reason {:?}", other)),
        }
    }
}

/// Outcome of a fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: CmtfModel,
    pub objective_trace: Vec<f64>,
    pub grad_norm_trace: Vec<f64>,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub func_evals: usize,
}

impl FitResult {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("nonempty trace")
    }
}

/// Starting point for a fit: an explicit model, a seed for a random
/// standard-normal initialization, or the leading singular vectors of each
/// data unfolding (`Svd`). The `Svd` init is deterministic given the data;
/// its seed only pads extra columns when the rank exceeds what a singular
/// value decomposition of the data can supply.
#[derive(Debug, Clone)]
pub enum Init {
    Model(CmtfModel),
    Seed(u64),
    Svd(u64),
}

impl Init {
    pub(crate) fn resolve(&self, data: &CoupledDataset, rank: usize) -> CmtfModel {
        match self {
            Init::Model(m) => m.clone(),
            Init::Seed(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                CmtfModel::random(&data.spec(rank), &mut rng)
            }
            Init::Svd(pad_seed) => svd_init(data, rank, *pad_seed),
        }
    }
}

/// First `rank` singular vectors of `m` (left, or right if `right` is set),
/// padded with standard-normal columns past min(rows, cols).
fn svd_basis(m: &Matrix, rank: usize, right: bool, rng: &mut ChaCha8Rng) -> Matrix {
    let k = rank.min(m.rows().min(m.cols()));
    let (u, _s, v) = linalg::truncated_svd(m, k).expect("k is within range");
    let basis = if right { v } else { u };
    let rows = basis.rows();
    let mut out = Matrix::zeros(rows, rank);
    for c in 0..k {
        out.col_mut(c).copy_from_slice(basis.col(c));
    }
    for c in k..rank {
        for r in 0..rows {
            out.col_mut(c)[r] = rng.sample(StandardNormal);
        }
    }
    out
}

fn svd_init(data: &CoupledDataset, rank: usize, pad_seed: u64) -> CmtfModel {
    let mut rng = ChaCha8Rng::seed_from_u64(pad_seed);
    // missing entries contribute zeros to the unfoldings
    let x = match &data.mask {
        Some(w) => hadamard(&data.tensor, w).expect("mask shape checked"),
        None => data.tensor.clone(),
    };
    let tensor_factors = (0..x.order())
        .map(|mode| {
            // augment the unfolding with any matrices coupled to this mode
            let unfolding = matricize(&x, mode).expect("mode in range");
            let extra: usize = data
                .sides
                .iter()
                .filter(|(m, _)| *m == mode)
                .map(|(_, y)| y.cols())
                .sum();
            let mut aug = Matrix::zeros(unfolding.rows(), unfolding.cols() + extra);
            let mut at = 0;
            for src in std::iter::once(&unfolding)
                .chain(data.sides.iter().filter(|(m, _)| *m == mode).map(|(_, y)| y))
            {
                for c in 0..src.cols() {
                    aug.col_mut(at).copy_from_slice(src.col(c));
                    at += 1;
                }
            }
            svd_basis(&aug, rank, false, &mut rng)
        })
        .collect();
    let side_factors = data
        .sides
        .iter()
        .map(|(_, y)| svd_basis(y, rank, true, &mut rng))
        .collect();
    CmtfModel {
        tensor_factors,
        side_factors,
    }
}
