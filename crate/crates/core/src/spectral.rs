//! Conversion of raw spectral intensities `M(ω)` into `D(λ)` data under the
//! factorized model `μ = α(ω) β(x)`, `f = ε(ω) ρ(x)`.

use crate::{
    error::{Error, Result},
    measurement::MeasurementSet,
};

type SpectralFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

const RIGHT_INVERSE_TOL: f64 = 1e-10;

pub struct SpectralModel {
    alpha: SpectralFn,
    epsilon: SpectralFn,
}

impl SpectralModel {
    pub fn new(
        alpha: impl Fn(f64) -> f64 + Send + Sync + 'static,
        epsilon: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            alpha: Box::new(alpha),
            epsilon: Box::new(epsilon),
        }
    }

    pub fn alpha(&self, omega: f64) -> f64 {
        (self.alpha)(omega)
    }

    pub fn epsilon(&self, omega: f64) -> f64 {
        (self.epsilon)(omega)
    }

    /// `φ(ω) = exp(-α(ω))`.
    pub fn phi(&self, omega: f64) -> f64 {
        (-self.alpha(omega)).exp()
    }
}

/// Maps `(ω_j, M(ω_j))` pairs to `(λ_j, D_j) = (e^{-α(ω_j)}, M(ω_j)/ε(ω_j))`,
/// sorted by `λ`. `eta` must be a right inverse of `φ` at every supplied
/// frequency.
pub fn preprocess_measurement<E: Fn(f64) -> f64>(
    model: &SpectralModel,
    eta: E,
    raw: &[(f64, f64)],
) -> Result<MeasurementSet> {
    let mut pairs = Vec::with_capacity(raw.len());
    for &(omega, intensity) in raw {
        let alpha = model.alpha(omega);
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::ModelInconsistency(format!(
                "alpha({omega}) = {alpha} is not positive"
            )));
        }
        let lambda = (-alpha).exp();
        let back = model.phi(eta(lambda));
        if !((back - lambda).abs() <= RIGHT_INVERSE_TOL) {
            return Err(Error::ModelInconsistency(format!(
                "phi(eta({lambda})) = {back}: eta is not a right inverse of phi"
            )));
        }
        let eps = model.epsilon(omega);
        if eps == 0.0 {
            return Err(Error::DivisionByZero(format!("epsilon({omega}) = 0")));
        }
        pairs.push((lambda, intensity / eps));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (lambdas, values) = pairs.into_iter().unzip();
    MeasurementSet::new(lambdas, values, 0.0, None)
}
