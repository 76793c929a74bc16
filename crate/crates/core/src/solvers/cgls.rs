use super::{check_rhs, Method, RegularizationConfig, SolveReport, SolveStatus};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Relative size of `Aᵀr` at which the normal equations count as solved.
const CONVERGED: f64 = 1e-12;

/// Hestenes–Stiefel conjugate gradients on the normal equations, started
/// from `f₀ = 0`. Iterate `k` minimizes `‖A f − D‖` over the Krylov space
/// `span{AᵀD, (AᵀA)AᵀD, …, (AᵀA)^{k−1}AᵀD}`.
///
/// With `sigma_est`, iteration stops at the first `k` with
/// `‖A f_k − D‖ ≤ τ σ √M`. `objective_history` holds `‖A f_k − D‖` for
/// `k = 0, 1, …`.
pub fn solve_cgls(
    a: &DMatrix<f64>,
    d: &[f64],
    cfg: &RegularizationConfig,
    sigma_est: Option<f64>,
) -> Result<SolveReport> {
    let dv = check_rhs(a, d)?;
    if cfg.cgls_max_iters == 0 {
        return Err(Error::arg("cgls_max_iters must be at least 1"));
    }
    let bound = sigma_est.map(|s| cfg.discrepancy_tau * s * (a.nrows() as f64).sqrt());

    let mut f = DVector::zeros(a.ncols());
    let mut r = dv.clone();
    let mut s = a.tr_mul(&r);
    let mut p = s.clone();
    let mut gamma = s.norm_squared();
    let gamma0 = gamma;
    let mut history = vec![r.norm()];
    let mut status = SolveStatus::IterationBudget;
    let mut iterations = 0;

    if bound.is_some_and(|b| history[0] <= b) {
        status = SolveStatus::Discrepancy;
    } else if gamma0 == 0.0 {
        status = SolveStatus::Converged;
    } else {
        for _ in 0..cfg.cgls_max_iters {
            let q = a * &p;
            let delta = q.norm_squared();
            if delta == 0.0 {
                status = SolveStatus::Breakdown;
                break;
            }
            let step = gamma / delta;
            f.axpy(step, &p, 1.0);
            r.axpy(-step, &q, 1.0);
            iterations += 1;
            history.push(r.norm());
            if bound.is_some_and(|b| history[iterations] <= b) {
                status = SolveStatus::Discrepancy;
                break;
            }
            s = a.tr_mul(&r);
            let next = s.norm_squared();
            if next <= CONVERGED * CONVERGED * gamma0 {
                status = SolveStatus::Converged;
                break;
            }
            let beta = next / gamma;
            gamma = next;
            p *= beta;
            p += &s;
        }
    }
    Ok(SolveReport {
        method: Method::Cgls,
        alpha: None,
        residual_norm: history[iterations],
        solution: f.as_slice().to_vec(),
        objective_history: history,
        iterations,
        status,
    })
}
