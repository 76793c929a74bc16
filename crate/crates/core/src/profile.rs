//! Closed-form scalar functions on the line, and the [`Density`] trait used
//! wherever a source density or an attenuation exponent is evaluated.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Anything that can be evaluated pointwise and integrated.
///
/// `breakpoints` lists points where the function has a jump or a kink; the
/// quadrature inserts them as panel boundaries.
pub trait Density: Sync {
    fn value(&self, x: f64) -> f64;

    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64 + Sync> Density for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// `Σ c_i ρ_i`, with the union of the terms' breakpoints.
pub struct LinearCombination<'a> {
    terms: Vec<(f64, &'a dyn Density)>,
}

impl<'a> LinearCombination<'a> {
    pub fn new(terms: Vec<(f64, &'a dyn Density)>) -> Self {
        Self { terms }
    }

    pub fn sum(a: &'a dyn Density, b: &'a dyn Density) -> Self {
        Self::new(vec![(1.0, a), (1.0, b)])
    }
}

impl Density for LinearCombination<'_> {
    fn value(&self, x: f64) -> f64 {
        self.terms.iter().map(|(c, d)| c * d.value(x)).sum()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.terms.iter().flat_map(|(_, d)| d.breakpoints()).collect()
    }
}

/// A serializable closed-form function.
///
/// `Piecewise` pieces are left-open and right-closed: piece `i` covers
/// `(breakpoints[i-1], breakpoints[i]]`, the first piece everything up to
/// `breakpoints[0]` and the last everything beyond the final breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `Σ coeffs[i] x^i`.
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// `scale · exp(rate · x) + offset`.
    Exp {
        scale: f64,
        rate: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `amplitude · sin(π · frequency · x + phase) + offset`.
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `value` on the open interval `(lo, hi)`, zero elsewhere.
    Indicator {
        lo: f64,
        hi: f64,
        value: f64,
    },
    Piecewise {
        breakpoints: Vec<f64>,
        pieces: Vec<Profile>,
    },
    Sum {
        terms: Vec<Profile>,
    },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn identity() -> Self {
        Profile::Polynomial {
            coeffs: vec![0.0, 1.0],
        }
    }

    pub fn linear(intercept: f64, slope: f64) -> Self {
        Profile::Polynomial {
            coeffs: vec![intercept, slope],
        }
    }

    pub fn sine(amplitude: f64, frequency: f64, offset: f64) -> Self {
        Profile::Sine {
            amplitude,
            frequency,
            phase: 0.0,
            offset,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            Profile::Exp {
                scale,
                rate,
                offset,
            } => scale * (rate * x).exp() + offset,
            Profile::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => amplitude * (PI * frequency * x + phase).sin() + offset,
            Profile::Indicator { lo, hi, value } => {
                if x > *lo && x < *hi {
                    *value
                } else {
                    0.0
                }
            }
            Profile::Piecewise {
                breakpoints,
                pieces,
            } => pieces[piece_index(breakpoints, x)].eval(x),
            Profile::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
        }
    }

    /// True when the function is identically constant.
    pub fn is_constant(&self) -> bool {
        match self {
            Profile::Constant { .. } => true,
            Profile::Polynomial { coeffs } => coeffs.iter().skip(1).all(|c| *c == 0.0),
            Profile::Exp { scale, rate, .. } => *scale == 0.0 || *rate == 0.0,
            Profile::Sine {
                amplitude,
                frequency,
                ..
            } => *amplitude == 0.0 || *frequency == 0.0,
            Profile::Indicator { value, .. } => *value == 0.0,
            Profile::Piecewise { pieces, .. } => {
                pieces.iter().all(Profile::is_constant) && {
                    let first = pieces[0].eval(0.0);
                    pieces.iter().all(|p| p.eval(0.0) == first)
                }
            }
            Profile::Sum { terms } => terms.iter().all(Profile::is_constant),
        }
    }

    /// Locations of jumps or kinks.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Profile::Indicator { lo, hi, .. } => vec![*lo, *hi],
            Profile::Piecewise {
                breakpoints,
                pieces,
            } => breakpoints
                .iter()
                .copied()
                .chain(pieces.iter().flat_map(Profile::kinks))
                .collect(),
            Profile::Sum { terms } => terms.iter().flat_map(Profile::kinks).collect(),
            _ => Vec::new(),
        }
    }

    /// Structural validation: piecewise breakpoints sorted with one more
    /// piece than breakpoints, indicator bounds ordered, finite parameters.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Profile::Piecewise {
                breakpoints,
                pieces,
            } => {
                if pieces.len() != breakpoints.len() + 1 {
                    return Err(format!(
                        "piecewise profile needs {} pieces for {} breakpoints, got {}",
                        breakpoints.len() + 1,
                        breakpoints.len(),
                        pieces.len()
                    ));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err("piecewise breakpoints must be strictly increasing".into());
                }
                pieces.iter().try_for_each(Profile::validate)
            }
            Profile::Indicator { lo, hi, .. } if !(lo < hi) => {
                Err(format!("indicator needs lo < hi, got ({lo}, {hi})"))
            }
            Profile::Polynomial { coeffs } if coeffs.is_empty() => {
                Err("polynomial needs at least one coefficient".into())
            }
            Profile::Sum { terms } => terms.iter().try_for_each(Profile::validate),
            _ => Ok(()),
        }
    }
}

pub(crate) fn piece_index(breakpoints: &[f64], x: f64) -> usize {
    // number of breakpoints strictly below x
    breakpoints.partition_point(|b| *b < x)
}

impl Density for Profile {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.kinks()
    }
}
