//! Regularized solution of `A f = D`.

mod cgls;
mod discrepancy;
mod tikhonov;
mod tv;

pub use cgls::solve_cgls;
pub use discrepancy::{log_spaced, select_alpha_discrepancy};
pub use tikhonov::{solve_tikhonov, TikhonovSolver};
pub use tv::{solve_tv, tv_objective};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::{fmt, str::FromStr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tikhonov,
    Tv,
    Cgls,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Tikhonov, Method::Tv, Method::Cgls];

    pub fn name(self) -> &'static str {
        match self {
            Method::Tikhonov => "tikhonov",
            Method::Tv => "tv",
            Method::Cgls => "cgls",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tikhonov" => Ok(Method::Tikhonov),
            "tv" => Ok(Method::Tv),
            "cgls" => Ok(Method::Cgls),
            other => Err(Error::arg(format!("unknown method `{other}` (expected tikhonov, tv or cgls)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularizationConfig {
    /// Penalty weight for Tikhonov and TV.
    pub alpha: f64,
    /// `ε` in the smoothed absolute value `sqrt(t² + ε²)`.
    pub tv_smoothing: f64,
    pub tv_max_iters: usize,
    /// Relative change `‖f_{k+1} − f_k‖ / ‖f_k‖` below which TV stops.
    pub tv_tol: f64,
    pub cgls_max_iters: usize,
    /// `τ` in the discrepancy bound `‖A f − D‖ ≤ τ σ √M`.
    pub discrepancy_tau: f64,
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-6,
            tv_smoothing: 1e-6,
            tv_max_iters: 200,
            tv_tol: 1e-6,
            cgls_max_iters: 50,
            discrepancy_tau: 1.0,
        }
    }
}

impl RegularizationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("tv_smoothing", self.tv_smoothing),
            ("tv_tol", self.tv_tol),
            ("discrepancy_tau", self.discrepancy_tau),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::arg(format!("{name} must be positive, got {v}")));
            }
        }
        if self.tv_max_iters == 0 {
            return Err(Error::arg("tv_max_iters must be at least 1"));
        }
        if self.cgls_max_iters == 0 {
            return Err(Error::arg("cgls_max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// Iteration budget reached; the best iterate is returned.
    MaxIterations,
    /// Stopped by the discrepancy principle.
    Discrepancy,
    /// CGLS used its whole iteration budget, which is its regularization.
    IterationBudget,
    /// A search direction of zero norm appeared.
    Breakdown,
}

impl SolveStatus {
    /// True when the caller should be warned.
    pub fn is_flagged(self) -> bool {
        matches!(self, SolveStatus::MaxIterations | SolveStatus::Breakdown)
    }

    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max_iterations",
            SolveStatus::Discrepancy => "discrepancy",
            SolveStatus::IterationBudget => "iteration_budget",
            SolveStatus::Breakdown => "breakdown",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: Method,
    pub alpha: Option<f64>,
    pub solution: Vec<f64>,
    /// Objective per iteration for TV, residual norm per iteration for
    /// CGLS, the single final objective for Tikhonov.
    pub objective_history: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl SolveReport {
    /// `key = value` text record.
    pub fn to_record(&self, solution_file: &str) -> String {
        let alpha = self.alpha.map_or_else(|| "none".to_string(), |a| format!("{a:e}"));
        let last = self.objective_history.last().copied().unwrap_or(f64::NAN);
        format!(
            "method = {}\nalpha = {alpha}\niterations = {}\nstatus = {}\nresidual_norm = {:e}\nfinal_objective = {last:e}\nsolution = {solution_file}\n",
            self.method,
            self.iterations,
            self.status.name(),
            self.residual_norm,
        )
    }
}

pub fn solve(
    method: Method,
    a: &DMatrix<f64>,
    d: &[f64],
    spacing: f64,
    cfg: &RegularizationConfig,
    sigma: Option<f64>,
) -> Result<SolveReport> {
    match method {
        Method::Tikhonov => solve_tikhonov(a, d, cfg.alpha),
        Method::Tv => solve_tv(a, d, cfg.alpha, spacing, cfg),
        Method::Cgls => solve_cgls(a, d, cfg, sigma),
    }
}

pub(crate) fn check_rhs(a: &DMatrix<f64>, d: &[f64]) -> Result<DVector<f64>> {
    if d.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: d.len(),
        });
    }
    Ok(DVector::from_column_slice(d))
}

pub(crate) fn residual_norm(a: &DMatrix<f64>, f: &DVector<f64>, d: &DVector<f64>) -> f64 {
    (a * f - d).norm()
}
