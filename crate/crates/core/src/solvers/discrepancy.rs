use super::{Method, RegularizationConfig, TikhonovSolver};
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// `count` values from `10^lo_exp` to `10^hi_exp`, evenly spaced in the
/// exponent.
pub fn log_spaced(lo_exp: f64, hi_exp: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![10f64.powf(lo_exp)];
    }
    (0..count)
        .map(|i| 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / (count - 1) as f64))
        .collect()
}

/// Largest `α` in `alpha_grid` whose solution satisfies
/// `‖A f − D‖ ≤ τ σ √M`; when none does, the `α` whose residual is closest
/// to the bound.
pub fn select_alpha_discrepancy(
    method: Method,
    a: &DMatrix<f64>,
    d: &[f64],
    sigma: f64,
    alpha_grid: &[f64],
    spacing: f64,
    cfg: &RegularizationConfig,
) -> Result<f64> {
    if alpha_grid.is_empty() || alpha_grid.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::arg("alpha grid must be non-empty and positive"));
    }
    if !(sigma > 0.0) {
        return Err(Error::arg("sigma must be positive"));
    }
    let bound = cfg.discrepancy_tau * sigma * (a.nrows() as f64).sqrt();
    let mut best_ok: Option<f64> = None;
    let mut closest = (f64::INFINITY, alpha_grid[0]);
    for &alpha in alpha_grid {
        let residual = match method {
            Method::Tikhonov => TikhonovSolver::new(a, alpha)?.solve(d)?.residual_norm,
            Method::Tv => super::solve_tv(a, d, alpha, spacing, cfg)?.residual_norm,
            Method::Cgls => {
                return Err(Error::arg("cgls is regularized by its iteration count, not by alpha"));
            }
        };
        if residual <= bound && best_ok.is_none_or(|b| alpha > b) {
            best_ok = Some(alpha);
        }
        let gap = (residual - bound).abs();
        if gap < closest.0 {
            closest = (gap, alpha);
        }
    }
    Ok(best_ok.unwrap_or(closest.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem() -> (DMatrix<f64>, Vec<f64>) {
        let a = DMatrix::from_fn(15, 10, |i, j| (-(i as f64 + 1.0) * (j as f64 + 1.0) / 40.0).exp());
        let d = (0..15).map(|i| 1.0 / (1.0 + i as f64)).collect();
        (a, d)
    }

    #[test]
    fn huge_noise_picks_largest_alpha() {
        let (a, d) = problem();
        let grid = log_spaced(-8.0, 0.0, 9);
        let cfg = RegularizationConfig::default();
        let alpha = select_alpha_discrepancy(Method::Tikhonov, &a, &d, 1e3, &grid, 0.1, &cfg).unwrap();
        assert_eq!(alpha, 1.0);
    }

    #[test]
    fn tiny_noise_picks_closest_gap() {
        let (a, d) = problem();
        let grid = log_spaced(-8.0, 0.0, 9);
        let cfg = RegularizationConfig::default();
        let alpha = select_alpha_discrepancy(Method::Tikhonov, &a, &d, 1e-16, &grid, 0.1, &cfg).unwrap();
        let residuals: Vec<f64> = grid
            .iter()
            .map(|&al| TikhonovSolver::new(&a, al).unwrap().solve(&d).unwrap().residual_norm)
            .collect();
        let bound = 1e-16 * 15f64.sqrt();
        let argmin = (0..grid.len())
            .min_by(|&i, &j| (residuals[i] - bound).abs().total_cmp(&(residuals[j] - bound).abs()))
            .unwrap();
        assert_eq!(alpha, grid[argmin]);
    }

    #[test]
    fn grid_helpers_and_errors() {
        let g = log_spaced(-2.0, 1.0, 4);
        assert_eq!(g.len(), 4);
        assert!((g[0] - 0.01).abs() < 1e-16 && (g[3] - 10.0).abs() < 1e-12);
        let (a, d) = problem();
        let cfg = RegularizationConfig::default();
        assert!(select_alpha_discrepancy(Method::Tikhonov, &a, &d, 1.0, &[], 0.1, &cfg).is_err());
        assert!(select_alpha_discrepancy(Method::Cgls, &a, &d, 1.0, &[1.0], 0.1, &cfg).is_err());
    }
}
