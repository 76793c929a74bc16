use super::{check_rhs, residual_norm, Method, SolveReport, SolveStatus};
use crate::error::{Error, Result};
use nalgebra::{linalg::QR, DMatrix, DVector, Dyn};

/// Minimizer of `‖A f − D‖² + α ‖f‖²` through a Householder QR of the
/// stacked matrix `[A; √α I]`. The factorization depends only on `A` and
/// `α`, so one solver serves any number of right-hand sides.
pub struct TikhonovSolver {
    a: DMatrix<f64>,
    qr: QR<f64, Dyn, Dyn>,
    alpha: f64,
}

impl TikhonovSolver {
    pub fn new(a: &DMatrix<f64>, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::arg(format!("alpha must be positive, got {alpha}")));
        }
        let (m, n) = a.shape();
        let mut stacked = DMatrix::zeros(m + n, n);
        stacked.view_mut((0, 0), (m, n)).copy_from(a);
        let root = alpha.sqrt();
        for k in 0..n {
            stacked[(m + k, k)] = root;
        }
        Ok(Self {
            a: a.clone(),
            qr: stacked.qr(),
            alpha,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn solve(&self, d: &[f64]) -> Result<SolveReport> {
        let dv = check_rhs(&self.a, d)?;
        let (m, n) = self.a.shape();
        let mut rhs = DVector::zeros(m + n);
        rhs.rows_mut(0, m).copy_from(&dv);
        self.qr.q_tr_mul(&mut rhs);
        let r = self.qr.r();
        let f = r
            .solve_upper_triangular(&rhs.rows(0, n).into_owned())
            .ok_or_else(|| Error::Numeric("singular triangular factor in Tikhonov solve".into()))?;
        let res = residual_norm(&self.a, &f, &dv);
        let objective = res * res + self.alpha * f.norm_squared();
        Ok(SolveReport {
            method: Method::Tikhonov,
            alpha: Some(self.alpha),
            solution: f.as_slice().to_vec(),
            objective_history: vec![objective],
            residual_norm: res,
            iterations: 1,
            status: SolveStatus::Converged,
        })
    }
}

pub fn solve_tikhonov(a: &DMatrix<f64>, d: &[f64], alpha: f64) -> Result<SolveReport> {
    check_rhs(a, d)?;
    TikhonovSolver::new(a, alpha)?.solve(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_closed_form() {
        let a = DMatrix::from_element(1, 1, 1.0);
        let r = solve_tikhonov(&a, &[1.0], 1.0).unwrap();
        assert!((r.solution[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identity_closed_form() {
        let a = DMatrix::identity(2, 2);
        let r = solve_tikhonov(&a, &[2.0, 4.0], 1.0).unwrap();
        assert!((r.solution[0] - 1.0).abs() < 1e-14);
        assert!((r.solution[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn heavy_penalty_kills_solution() {
        let a = DMatrix::from_fn(4, 3, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let d = [1.0, -2.0, 0.5, 3.0];
        let r = solve_tikhonov(&a, &d, 1e12).unwrap();
        let f = DVector::from_column_slice(&r.solution);
        assert!(f.norm() < 1e-9 * DVector::from_column_slice(&d).norm());
    }

    #[test]
    fn normal_equations_hold() {
        let a = DMatrix::from_fn(30, 40, |i, j| ((i * 7 + j * 3) as f64 * 0.37).sin() / (1.0 + j as f64));
        let d: Vec<f64> = (0..30).map(|i| (i as f64 * 0.2).cos()).collect();
        let alpha = 1e-3;
        let r = solve_tikhonov(&a, &d, alpha).unwrap();
        let f = DVector::from_column_slice(&r.solution);
        let dv = DVector::from_column_slice(&d);
        let atd = a.transpose() * &dv;
        let lhs = a.transpose() * (&a * &f) + alpha * &f;
        assert!((lhs - &atd).norm() < 1e-8 * atd.norm());
    }

    #[test]
    fn rejects_bad_input() {
        let a = DMatrix::identity(2, 2);
        assert!(solve_tikhonov(&a, &[1.0], 1.0).is_err());
        assert!(solve_tikhonov(&a, &[1.0, 1.0], 0.0).is_err());
    }
}
