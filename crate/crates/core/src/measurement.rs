//! Measurement sets and the continuous forward model
//! `D(λ) = ∫_a^b λ^{p(x)} ρ(x) dx`.

use crate::{
    attenuation::AttenuationExponent,
    error::{Error, Result},
    noise::GaussianNoise,
    profile::Density,
    quadrature::{merge_breakpoints, simpson_piecewise},
};

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    lambdas: Vec<f64>,
    values: Vec<f64>,
    sigma: f64,
    seed: Option<u64>,
}

impl MeasurementSet {
    pub fn new(lambdas: Vec<f64>, values: Vec<f64>, sigma: f64, seed: Option<u64>) -> Result<Self> {
        if lambdas.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: lambdas.len(),
                found: values.len(),
            });
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(Error::arg(format!("lambda {l} not in (0, 1)")));
        }
        if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::arg("lambdas must be strictly increasing"));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::arg(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("measurement values must be finite"));
        }
        Ok(Self {
            lambdas,
            values,
            sigma,
            seed,
        })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// `λ^p` as `exp(p ln λ)`, with `λ = 1` mapped to exactly one.
#[inline]
pub fn lambda_pow(lambda: f64, p: f64) -> f64 {
    if lambda == 1.0 {
        1.0
    } else {
        (p * lambda.ln()).exp()
    }
}

/// Simpson approximation of `∫ λ^{p(x)} ρ(x) dx` with `n_panels` panel
/// pairs on every piece between consecutive breakpoints of `p` and `rho`.
pub fn forward_data<D: Density + ?Sized>(
    p: &AttenuationExponent,
    rho: &D,
    lambda: f64,
    n_panels: usize,
) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::arg(format!("lambda must lie in (0, 1], got {lambda}")));
    }
    let iv = p.interval();
    let pts = merge_breakpoints(iv.a(), iv.b(), p.breakpoints().into_iter().chain(rho.breakpoints()));
    let ln = lambda.ln();
    if lambda == 1.0 {
        simpson_piecewise(|x| rho.value(x), &pts, n_panels)
    } else {
        simpson_piecewise(|x| (p.eval(x) * ln).exp() * rho.value(x), &pts, n_panels)
    }
}

/// Exact-model data plus white Gaussian noise with
/// `σ = noise_fraction · max_j |D_j|`.
///
/// The data is integrated from `rho0` directly and never passes through a
/// theory matrix.
pub fn simulate_measurements<D: Density + ?Sized>(
    p: &AttenuationExponent,
    rho0: &D,
    lambdas: &[f64],
    noise_fraction: f64,
    seed: u64,
    n_panels: usize,
) -> Result<MeasurementSet> {
    if lambdas.is_empty() {
        return Err(Error::arg("no measurement frequencies given"));
    }
    if !(noise_fraction >= 0.0 && noise_fraction.is_finite()) {
        return Err(Error::arg(format!("noise fraction must be >= 0, got {noise_fraction}")));
    }
    let clean = lambdas
        .iter()
        .map(|&l| forward_data(p, rho0, l, n_panels))
        .collect::<Result<Vec<_>>>()?;
    let peak = clean.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sigma = noise_fraction * peak;
    let (values, seed) = if sigma > 0.0 {
        let mut noise = GaussianNoise::new(seed);
        (clean.iter().map(|v| v + sigma * noise.standard_normal()).collect(), Some(seed))
    } else {
        (clean, None)
    };
    MeasurementSet::new(lambdas.to_vec(), values, sigma, seed)
}
