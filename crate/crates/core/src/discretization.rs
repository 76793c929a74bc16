//! The theory matrix `A[j, k] = ∫ λ_j^{p(x)} φ_k(x) dx` and the linear
//! system `A f = D`.

use crate::{
    attenuation::AttenuationExponent,
    basis::HatBasis,
    error::{Error, Result},
    measurement::lambda_pow,
    parallel::Execution,
    quadrature::{merge_breakpoints, simpson_piecewise},
};
use nalgebra::{DMatrix, DVector};
use std::io::Write;

/// Panel pairs per piece of hat support when none is configured.
pub const DEFAULT_ASSEMBLY_PANELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyConfig {
    pub panels_per_piece: usize,
    pub execution: Execution,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        Self {
            panels_per_piece: DEFAULT_ASSEMBLY_PANELS,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryMatrix {
    entries: DMatrix<f64>,
    lambdas: Vec<f64>,
    basis: HatBasis,
}

impl TheoryMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn basis(&self) -> &HatBasis {
        &self.basis
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                found: f.len(),
            });
        }
        let v = &self.entries * DVector::from_column_slice(f);
        Ok(v.as_slice().to_vec())
    }

    /// Row-major CSV, one matrix row per line, `{:e}` formatting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for j in 0..self.rows() {
            let row: Vec<String> = (0..self.cols()).map(|k| format!("{:e}", self.entries[(j, k)])).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn build_theory_matrix(
    p: &AttenuationExponent,
    lambdas: &[f64],
    basis: &HatBasis,
    config: AssemblyConfig,
) -> Result<TheoryMatrix> {
    if p.interval() != basis.interval() {
        return Err(Error::arg("attenuation exponent and basis live on different intervals"));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::arg(format!("lambda {l} not in (0, 1)")));
    }
    if config.panels_per_piece == 0 {
        return Err(Error::arg("panels_per_piece must be positive"));
    }
    let mut kinks = p.breakpoints();
    kinks.sort_by(f64::total_cmp);
    let supports: Vec<Vec<f64>> = (0..basis.len())
        .map(|k| {
            let s = basis.support(k);
            let (lo, hi) = (s[0], s[s.len() - 1]);
            let inner = kinks.iter().copied().filter(|x| *x > lo && *x < hi);
            merge_breakpoints(lo, hi, s[1..s.len() - 1].iter().copied().chain(inner))
        })
        .collect();

    let rows = config.execution.map(lambdas.len(), |j| -> Result<Vec<f64>> {
        let lambda = lambdas[j];
        (0..basis.len())
            .map(|k| {
                let hat = |x: f64| basis.eval_hat(k, x).unwrap_or(0.0);
                simpson_piecewise(|x| lambda_pow(lambda, p.eval(x)) * hat(x), &supports[k], config.panels_per_piece)
            })
            .collect()
    });
    let mut entries = DMatrix::zeros(lambdas.len(), basis.len());
    for (j, row) in rows.into_iter().enumerate() {
        for (k, v) in row?.into_iter().enumerate() {
            entries[(j, k)] = v;
        }
    }
    Ok(TheoryMatrix {
        entries,
        lambdas: lambdas.to_vec(),
        basis: basis.clone(),
    })
}

/// `λ_j = lo + j (hi - lo) / (M + 1)` for `j = 1..=M`.
pub fn uniform_lambdas(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo >= 0.0 && hi <= 1.0 && lo < hi) {
        return Err(Error::arg(format!("lambda interval ({lo}, {hi}) must satisfy 0 <= lo < hi <= 1")));
    }
    if count == 0 {
        return Err(Error::arg("need at least one measurement"));
    }
    let step = (hi - lo) / (count + 1) as f64;
    Ok((1..=count).map(|j| lo + j as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{basis::Interval, measurement::forward_data, profile::Profile};

    fn exponent(profile: Profile) -> AttenuationExponent {
        AttenuationExponent::from_profile(Interval::unit(), profile).unwrap()
    }

    #[test]
    fn zero_exponent_rows_are_hat_masses() {
        let basis = HatBasis::new(Interval::unit(), 11).unwrap();
        let a = build_theory_matrix(&exponent(Profile::constant(0.0)), &[0.3, 0.7], &basis, Default::default()).unwrap();
        let h = basis.spacing();
        for j in 0..2 {
            assert!((a.entries()[(j, 0)] - h / 2.0).abs() < 1e-15);
            assert!((a.entries()[(j, 10)] - h / 2.0).abs() < 1e-15);
            for k in 1..10 {
                assert!((a.entries()[(j, k)] - h).abs() < 1e-15);
            }
        }
        let ones = a.apply(&[1.0; 11]).unwrap();
        assert!(ones.iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert_eq!(a.apply(&[0.0; 11]).unwrap(), vec![0.0, 0.0]);
        assert!(a.apply(&[0.0; 3]).is_err());
    }

    #[test]
    fn row_sums_match_forward_model() {
        let p = exponent(Profile::identity());
        let basis = HatBasis::new(Interval::unit(), 400).unwrap();
        let lambdas = uniform_lambdas(0.0, 1.0, 30).unwrap();
        let a = build_theory_matrix(&p, &lambdas, &basis, Default::default()).unwrap();
        let sums = a.apply(&vec![1.0; 400]).unwrap();
        for (l, s) in lambdas.iter().zip(&sums) {
            let exact = (l - 1.0) / l.ln();
            assert!((s - exact).abs() < 1e-8);
            let fd = forward_data(&p, &|_: f64| 1.0, *l, 64).unwrap();
            assert!((s - fd).abs() < 1e-8);
        }
        let half = build_theory_matrix(&p, &[0.5], &basis, Default::default()).unwrap();
        assert!((half.apply(&vec![1.0; 400]).unwrap()[0] - 0.721348).abs() < 1e-6);
    }

    #[test]
    fn paper_scale_dimensions() {
        let basis = HatBasis::new(Interval::unit(), 400).unwrap();
        let lambdas = uniform_lambdas(0.0, 1.0, 300).unwrap();
        let a = build_theory_matrix(&exponent(Profile::identity()), &lambdas, &basis, Default::default()).unwrap();
        assert_eq!((a.rows(), a.cols()), (300, 400));
        assert!(a.entries().iter().all(|v| *v > 0.0));
    }

    #[test]
    fn serial_and_parallel_assembly_are_identical() {
        let basis = HatBasis::new(Interval::unit(), 64).unwrap();
        let lambdas = uniform_lambdas(0.1, 0.9, 40).unwrap();
        let p = exponent(Profile::Exp { scale: 1.0, rate: 1.0, offset: -1.0 });
        let seq = AssemblyConfig { execution: Execution::Sequential, ..Default::default() };
        let par = AssemblyConfig { execution: Execution::Parallel, ..Default::default() };
        let a = build_theory_matrix(&p, &lambdas, &basis, seq).unwrap();
        let b = build_theory_matrix(&p, &lambdas, &basis, par).unwrap();
        assert_eq!(a.entries().as_slice(), b.entries().as_slice());
    }

    #[test]
    fn columns_are_monotone_in_lambda() {
        let basis = HatBasis::new(Interval::unit(), 50).unwrap();
        let lambdas = uniform_lambdas(0.0, 1.0, 25).unwrap();
        let p = exponent(Profile::Exp { scale: 1.0, rate: 1.0, offset: -1.0 });
        let a = build_theory_matrix(&p, &lambdas, &basis, Default::default()).unwrap();
        for k in 0..basis.len() {
            for j in 1..lambdas.len() {
                assert!(a.entries()[(j, k)] >= a.entries()[(j - 1, k)]);
            }
        }
    }

    #[test]
    fn uniform_lambda_grids() {
        assert_eq!(uniform_lambdas(0.0, 1.0, 1).unwrap(), vec![0.5]);
        assert_eq!(uniform_lambdas(0.0, 1.0, 3).unwrap(), vec![0.25, 0.5, 0.75]);
        let l = uniform_lambdas(0.4, 0.5, 300).unwrap();
        assert_eq!(l.len(), 300);
        assert!(l.iter().all(|x| *x > 0.4 && *x < 0.5));
        assert!(uniform_lambdas(0.5, 0.5, 3).is_err());
        assert!(uniform_lambdas(0.0, 1.2, 3).is_err());
        assert!(uniform_lambdas(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn interval_mismatch() {
        let basis = HatBasis::new(Interval::new(0.0, 2.0).unwrap(), 5).unwrap();
        assert!(build_theory_matrix(&exponent(Profile::identity()), &[0.5], &basis, Default::default()).is_err());
    }

    #[test]
    fn csv_export_round_trips() {
        let basis = HatBasis::new(Interval::unit(), 4).unwrap();
        let a = build_theory_matrix(&exponent(Profile::identity()), &[0.3, 0.6], &basis, Default::default()).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed: Vec<f64> = text.lines().flat_map(|l| l.split(',')).map(|s| s.parse().unwrap()).collect();
        let mut expected = Vec::new();
        for j in 0..2 {
            for k in 0..4 {
                expected.push(a.entries()[(j, k)]);
            }
        }
        assert_eq!(parsed, expected);
    }
}
