//! The interval, the hat basis on it, and piecewise-linear densities.

use crate::{
    error::{Error, Result},
    profile::Density,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::arg(format!("interval needs finite a < b, got ({a}, {b})")));
        }
        Ok(Self { a, b })
    }

    pub fn unit() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// `n + 1` equispaced nodes including both endpoints; the last node is
    /// exactly `b`.
    pub fn uniform_nodes(&self, n_cells: usize) -> Vec<f64> {
        let h = self.length() / n_cells as f64;
        let mut nodes: Vec<f64> = (0..=n_cells).map(|i| self.a + i as f64 * h).collect();
        nodes[n_cells] = self.b;
        nodes
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.a, i.b]
    }
}

/// Hat functions on `N` uniform nodes `x_0 = a < … < x_{N-1} = b`.
///
/// Indices are zero-based. The two boundary hats are half-hats, so the
/// basis is a partition of unity on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HatBasis {
    interval: Interval,
    nodes: Vec<f64>,
    spacing: f64,
}

impl HatBasis {
    pub fn new(interval: Interval, n_nodes: usize) -> Result<Self> {
        if n_nodes < 2 {
            return Err(Error::arg("hat basis needs at least two nodes"));
        }
        Ok(Self {
            interval,
            nodes: interval.uniform_nodes(n_nodes - 1),
            spacing: interval.length() / (n_nodes - 1) as f64,
        })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Support of hat `k` as the list of its breakpoints (two for boundary
    /// hats, three for interior ones).
    pub fn support(&self, k: usize) -> Vec<f64> {
        let lo = k.saturating_sub(1);
        let hi = (k + 1).min(self.len() - 1);
        self.nodes[lo..=hi].to_vec()
    }

    pub fn eval_hat(&self, k: usize, x: f64) -> Result<f64> {
        let n = self.len();
        if k >= n {
            return Err(Error::arg(format!("hat index {k} out of range 0..{n}")));
        }
        Ok(self.hat_unchecked(k, x))
    }

    fn hat_unchecked(&self, k: usize, x: f64) -> f64 {
        let xk = self.nodes[k];
        if k + 1 < self.len() {
            let next = self.nodes[k + 1];
            if x >= xk && x <= next {
                return (next - x) / (next - xk);
            }
        } else if x == xk {
            return 1.0;
        }
        if k > 0 {
            let prev = self.nodes[k - 1];
            if x >= prev && x < xk {
                return (x - prev) / (xk - prev);
            }
        }
        0.0
    }

    /// Index `i` of the cell `[x_i, x_{i+1}]` containing `x` (clamped).
    pub(crate) fn cell_of(&self, x: f64) -> usize {
        let t = ((x - self.interval.a) / self.spacing).floor();
        (t.max(0.0) as usize).min(self.len() - 2)
    }

    /// Node values of `f`.
    pub fn sample<D: Density + ?Sized>(&self, f: &D) -> Vec<f64> {
        self.nodes.iter().map(|&x| f.value(x)).collect()
    }
}

/// `ρ(x) = Σ_k f_k φ_k(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    basis: HatBasis,
    coeffs: Vec<f64>,
}

impl DensityField {
    pub fn new(basis: HatBasis, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: coeffs.len(),
            });
        }
        Ok(Self { basis, coeffs })
    }

    pub fn interpolate<D: Density + ?Sized>(basis: HatBasis, f: &D) -> Self {
        let coeffs = basis.sample(f);
        Self { basis, coeffs }
    }

    pub fn basis(&self) -> &HatBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.basis.interval.contains(x) {
            return Err(Error::arg(format!("x = {x} outside the basis interval")));
        }
        Ok(self.eval_clamped(x))
    }

    fn eval_clamped(&self, x: f64) -> f64 {
        let i = self.basis.cell_of(x);
        let x0 = self.basis.nodes[i];
        let x1 = self.basis.nodes[i + 1];
        let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        self.coeffs[i] * (1.0 - t) + self.coeffs[i + 1] * t
    }
}

impl Density for DensityField {
    fn value(&self, x: f64) -> f64 {
        self.eval_clamped(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.basis.nodes.clone()
    }
}
