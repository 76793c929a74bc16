//! Composite Simpson integration.
//!
//! Every integral in the crate, both the exact-model data and the theory
//! matrix entries, goes through [`simpson_piecewise`] so that kinks of the
//! integrand can be placed on panel boundaries.

use crate::error::{Error, Result};

/// Paper-scale default: the data integrals use `2n + 1` points with `n = 64`.
pub const DEFAULT_DATA_PANELS: usize = 64;

/// A composite Simpson rule on `2n + 1` equispaced points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureRule {
    n_panels: usize,
}

impl QuadratureRule {
    pub fn new(n_panels: usize) -> Result<Self> {
        if n_panels == 0 {
            return Err(Error::arg("quadrature rule needs at least one panel pair"));
        }
        Ok(Self { n_panels })
    }

    pub fn n_panels(&self) -> usize {
        self.n_panels
    }

    pub fn n_points(&self) -> usize {
        2 * self.n_panels + 1
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        simpson(f, a, b, self.n_panels)
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self {
            n_panels: DEFAULT_DATA_PANELS,
        }
    }
}

fn sample<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { x, value: v })
    }
}

/// Composite Simpson value of `f` over `[a, b]` using `2 * n_panels`
/// subintervals (`2 * n_panels + 1` abscissae).
///
/// Samples are accumulated left to right, so the result is a deterministic
/// function of the inputs.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n_panels: usize) -> Result<f64> {
    simpson_impl(&f, a, b, n_panels, false)
}

fn simpson_impl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n_panels: usize, inward: bool) -> Result<f64> {
    if n_panels == 0 {
        return Err(Error::arg("n_panels must be positive"));
    }
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::arg(format!("invalid integration range [{a}, {b}]")));
    }
    let m = 2 * n_panels;
    let h = (b - a) / m as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..m {
        let x = a + i as f64 * h;
        let v = sample(f, x)?;
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    let ends = if inward {
        sample(f, a.next_up())? + sample(f, b.next_down())?
    } else {
        sample(f, a)? + sample(f, b)?
    };
    Ok(h / 3.0 * (ends + 4.0 * odd + 2.0 * even))
}

/// Sum of [`simpson`] over each consecutive pair of `breakpoints`.
///
/// The two end samples of every piece are taken one ulp inside the piece,
/// so a jump sitting on a breakpoint contributes its one-sided limits.
pub fn simpson_piecewise<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    n_panels_per_piece: usize,
) -> Result<f64> {
    if breakpoints.len() < 2 {
        return Err(Error::arg("need at least two breakpoints"));
    }
    if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::arg("breakpoints must be strictly increasing"));
    }
    let mut total = 0.0;
    for w in breakpoints.windows(2) {
        total += simpson_impl(&f, w[0], w[1], n_panels_per_piece, true)?;
    }
    Ok(total)
}

/// Sorted, deduplicated breakpoints of `[a, b]` with the given interior
/// points inserted. Points outside `(a, b)` are dropped, as are points closer
/// than a relative `1e-12` to a neighbour.
pub fn merge_breakpoints(a: f64, b: f64, interior: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let tol = 1e-12 * (b - a);
    let mut pts: Vec<f64> = interior
        .into_iter()
        .filter(|x| x.is_finite() && *x > a + tol && *x < b - tol)
        .collect();
    pts.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.push(a);
    for x in pts {
        if x - out[out.len() - 1] > tol {
            out.push(x);
        }
    }
    out.push(b);
    out
}
