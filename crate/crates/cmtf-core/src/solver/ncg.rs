//! Nonlinear conjugate gradient with Hestenes-Stiefel direction updates and
//! a strong-Wolfe line search. Drives the coupled function-and-gradient
//! oracle for CMTF-OPT; masked datasets go through the same path (the
//! weighted objective already ignores missing entries).

use super::{FitResult, Init, LineSearchConfig, StopConfig, StopReason};
use crate::coupled::{objective_and_gradient, CmtfModel, CoupledDataset};
use crate::Result;

/// Raw optimizer outcome over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct NcgOutcome {
    pub x: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub grad_norm_trace: Vec<f64>,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub func_evals: usize,
}

/// Iterations between forced steepest-descent restarts.
const RESTART_INTERVAL: usize = 20;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Hestenes-Stiefel mixing coefficient with a guard against a vanishing
/// denominator (returns 0, i.e. a steepest-descent reset).
pub(crate) fn hestenes_stiefel_beta(g_new: &[f64], g_old: &[f64], d: &[f64]) -> f64 {
    let y: Vec<f64> = g_new.iter().zip(g_old).map(|(a, b)| a - b).collect();
    let denom = dot(d, &y);
    if denom.abs() <= f64::EPSILON * norm(d) * norm(&y) || denom == 0.0 {
        return 0.0;
    }
    dot(g_new, &y) / denom
}

struct LinePoint {
    alpha: f64,
    f: f64,
    dphi: f64,
}

fn cubic_step(lo: &LinePoint, hi: &LinePoint) -> f64 {
    let (a1, f1, g1) = (lo.alpha, lo.f, lo.dphi);
    let (a2, f2, g2) = (hi.alpha, hi.f, hi.dphi);
    let d1 = g1 + g2 - 3.0 * (f1 - f2) / (a1 - a2);
    let disc = d1 * d1 - g1 * g2;
    let (amin, amax) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
    if disc >= 0.0 {
        let d2 = disc.sqrt();
        let cand = if a1 <= a2 {
            a2 - (a2 - a1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
        } else {
            a1 - (a1 - a2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2))
        };
        if cand.is_finite() {
            // keep strictly interior so the bracket always shrinks
            let margin = 0.1 * (amax - amin);
            return cand.clamp(amin + margin, amax - margin);
        }
    }
    0.5 * (amin + amax)
}

/// Strong-Wolfe search along `d`. `phi` evaluates the objective at a step
/// and returns (f, gradient). Returns the accepted step or None when the
/// trial budget runs out.
fn wolfe_search<F>(
    mut phi: F,
    f0: f64,
    dphi0: f64,
    d: &[f64],
    cfg: &LineSearchConfig,
) -> Option<(f64, f64, Vec<f64>)>
where
    F: FnMut(f64) -> (f64, Vec<f64>),
{
    let c1 = cfg.sufficient_decrease;
    let c2 = cfg.curvature;
    let mut trials = 0usize;
    let mut eval = |alpha: f64, trials: &mut usize| {
        *trials += 1;
        let (f, g) = phi(alpha);
        let dphi = dot(&g, d);
        (f, g, dphi)
    };

    let mut prev = LinePoint {
        alpha: 0.0,
        f: f0,
        dphi: dphi0,
    };
    let mut alpha = cfg.initial_step;
    let mut bracket: Option<(LinePoint, LinePoint)> = None;
    while trials < cfg.max_trials {
        let (f_a, g_a, dphi_a) = eval(alpha, &mut trials);
        let cur = LinePoint {
            alpha,
            f: f_a,
            dphi: dphi_a,
        };
        if f_a > f0 + c1 * alpha * dphi0 || (trials > 1 && f_a >= prev.f) {
            bracket = Some((prev, cur));
            break;
        }
        if dphi_a.abs() <= -c2 * dphi0 {
            return Some((alpha, f_a, g_a));
        }
        if dphi_a >= 0.0 {
            bracket = Some((cur, prev));
            break;
        }
        prev = cur;
        alpha *= 2.0;
    }
    let (mut lo, mut hi) = bracket?;

    // zoom phase: shrink [lo, hi] until a strong-Wolfe point appears
    while trials < cfg.max_trials {
        if (hi.alpha - lo.alpha).abs() <= 1e-16 * lo.alpha.abs().max(1.0) {
            return None;
        }
        let alpha_j = cubic_step(&lo, &hi);
        let (f_j, g_j, dphi_j) = eval(alpha_j, &mut trials);
        let cur = LinePoint {
            alpha: alpha_j,
            f: f_j,
            dphi: dphi_j,
        };
        if f_j > f0 + c1 * alpha_j * dphi0 || f_j >= lo.f {
            hi = cur;
        } else {
            if dphi_j.abs() <= -c2 * dphi0 {
                return Some((alpha_j, f_j, g_j));
            }
            if dphi_j * (hi.alpha - lo.alpha) >= 0.0 {
                hi = LinePoint {
                    alpha: lo.alpha,
                    f: lo.f,
                    dphi: lo.dphi,
                };
            }
            lo = cur;
        }
    }
    None
}

/// Minimizes a smooth function given a fused value-and-gradient oracle.
/// Deterministic given (oracle, x0, configs).
pub fn minimize<F>(
    mut oracle: F,
    x0: Vec<f64>,
    stop: &StopConfig,
    ls: &LineSearchConfig,
) -> NcgOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let p = x0.len();
    let mut func_evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        oracle(x)
    };

    let mut x = x0;
    let (mut fx, mut gx) = eval(&x, &mut func_evals);
    let mut objective_trace = vec![fx];
    let mut grad_norm_trace = vec![norm(&gx)];
    let mut direction: Vec<f64> = gx.iter().map(|v| -v).collect();
    let mut iterations = 0usize;
    let mut stop_reason = None;

    if norm(&gx) / p as f64 <= stop.grad_norm_tol {
        stop_reason = Some(StopReason::GradNormTol);
    }

    while stop_reason.is_none() {
        if iterations >= stop.max_iterations {
            stop_reason = Some(StopReason::MaxIterations);
            break;
        }
        // periodic restart and non-descent guard; the short fixed cadence
        // damps conjugate-direction drift on nearly flat component-swap
        // valleys, which matters far more here than n-step CG theory
        let restart_due = iterations > 0 && iterations % RESTART_INTERVAL == 0;
        if restart_due || dot(&direction, &gx) >= 0.0 {
            direction = gx.iter().map(|v| -v).collect();
        }

        let mut accepted = None;
        for attempt in 0..2 {
            let dphi0 = dot(&direction, &gx);
            let phi = |alpha: f64| {
                let trial: Vec<f64> = x
                    .iter()
                    .zip(&direction)
                    .map(|(xi, di)| xi + alpha * di)
                    .collect();
                eval(&trial, &mut func_evals)
            };
            if let Some(hit) = wolfe_search(phi, fx, dphi0, &direction, ls) {
                accepted = Some(hit);
                break;
            }
            if attempt == 0 {
                // retry once from steepest descent
                direction = gx.iter().map(|v| -v).collect();
            }
        }
        let Some((alpha, f_new, g_new)) = accepted else {
            stop_reason = Some(StopReason::LineSearchFailure);
            break;
        };

        for (xi, di) in x.iter_mut().zip(&direction) {
            *xi += alpha * di;
        }
        iterations += 1;
        let f_old = fx;
        let g_old = std::mem::replace(&mut gx, g_new);
        fx = f_new;
        objective_trace.push(fx);
        grad_norm_trace.push(norm(&gx));

        let rel_change = (fx - f_old).abs() / f_old.abs().max(f64::MIN_POSITIVE);
        if rel_change <= stop.rel_func_tol {
            stop_reason = Some(StopReason::RelFuncTol);
        } else if norm(&gx) / p as f64 <= stop.grad_norm_tol {
            stop_reason = Some(StopReason::GradNormTol);
        } else if func_evals >= stop.max_func_evals {
            stop_reason = Some(StopReason::MaxFuncEvals);
        } else {
            let beta = hestenes_stiefel_beta(&gx, &g_old, &direction);
            for (di, gi) in direction.iter_mut().zip(&gx) {
                *di = -gi + beta * *di;
            }
        }
    }

    NcgOutcome {
        x,
        objective_trace,
        grad_norm_trace,
        stop_reason: stop_reason.unwrap(),
        iterations,
        func_evals,
    }
}

/// All-at-once CMTF fit (CMTF-OPT; CMTF-WOPT when the dataset is masked).
pub fn cmtf_opt(
    data: &CoupledDataset,
    rank: usize,
    init: &Init,
    stop: &StopConfig,
    ls: &LineSearchConfig,
) -> Result<FitResult> {
    let spec = data.spec(rank);
    let model0 = init.resolve(data, rank);
    // surface dimension mismatches before the optimizer loop
    let x0 = model0.flatten();
    objective_and_gradient(data, &model0)?;

    let outcome = minimize(
        |x| {
            let m = CmtfModel::unflatten(x, &spec).expect("length fixed");
            objective_and_gradient(data, &m).expect("validated dimensions")
        },
        x0,
        stop,
        ls,
    );
    Ok(FitResult {
        model: CmtfModel::unflatten(&outcome.x, &spec)?,
        objective_trace: outcome.objective_trace,
        grad_norm_trace: outcome.grad_norm_trace,
        stop_reason: outcome.stop_reason,
        iterations: outcome.iterations,
        func_evals: outcome.func_evals,
    })
}
