//! The integrated attenuation `p(x) = ∫_a^x β(y) dy`.

use crate::{
    basis::Interval,
    error::{Error, Result},
    profile::{piece_index, Density, Profile},
    quadrature,
};

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// `segments[i]` is active on `(edges[i], edges[i + 1]]`; `edges` runs
    /// from `a` to `b`.
    ClosedFormSegments {
        edges: Vec<f64>,
        segments: Vec<Profile>,
    },
    /// Values on a uniform grid of `values.len()` points from `a` to `b`,
    /// interpolated linearly in between.
    DenseSamples { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationExponent {
    interval: Interval,
    repr: Representation,
}

impl AttenuationExponent {
    /// One closed-form segment per piece of a `Piecewise` profile, or a
    /// single segment otherwise.
    pub fn from_profile(interval: Interval, profile: Profile) -> Result<Self> {
        profile.validate().map_err(Error::InvalidArgument)?;
        let (a, b) = (interval.a(), interval.b());
        let (mut edges, mut segments) = (vec![a], Vec::new());
        match profile {
            Profile::Piecewise {
                breakpoints,
                pieces,
            } => {
                for (i, piece) in pieces.into_iter().enumerate() {
                    let hi = breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
                    let lo = if i == 0 { f64::NEG_INFINITY } else { breakpoints[i - 1] };
                    if hi <= a || lo >= b {
                        continue;
                    }
                    if hi < b {
                        edges.push(hi);
                    }
                    segments.push(piece);
                }
            }
            other => segments.push(other),
        }
        edges.push(b);
        Self::from_segments(interval, edges, segments)
    }

    pub fn from_segments(interval: Interval, edges: Vec<f64>, segments: Vec<Profile>) -> Result<Self> {
        if edges.len() != segments.len() + 1 || segments.is_empty() {
            return Err(Error::arg("segment edges must number one more than segments"));
        }
        if edges[0] != interval.a() || edges[edges.len() - 1] != interval.b() {
            return Err(Error::arg("segment edges must start at a and end at b"));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::arg("segment edges must be strictly increasing"));
        }
        let p = Self {
            interval,
            repr: Representation::ClosedFormSegments { edges, segments },
        };
        p.check_finite()?;
        Ok(p)
    }

    pub fn from_samples(interval: Interval, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::arg("dense samples need at least two values"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            let x = interval.uniform_nodes(values.len() - 1)[i];
            return Err(Error::NonFinite { x, value: values[i] });
        }
        Ok(Self {
            interval,
            repr: Representation::DenseSamples { values },
        })
    }

    fn check_finite(&self) -> Result<()> {
        for x in self.interval.uniform_nodes(256) {
            let v = self.eval(x);
            if !v.is_finite() {
                return Err(Error::NonFinite { x, value: v });
            }
        }
        Ok(())
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.repr {
            Representation::ClosedFormSegments { edges, segments } => {
                let inner = &edges[1..edges.len() - 1];
                segments[piece_index(inner, x)].eval(x)
            }
            Representation::DenseSamples { values } => {
                let n = values.len() - 1;
                let h = self.interval.length() / n as f64;
                let t = (x - self.interval.a()) / h;
                let i = (t.floor().max(0.0) as usize).min(n - 1);
                let s = (t - i as f64).clamp(0.0, 1.0);
                values[i] * (1.0 - s) + values[i + 1] * s
            }
        }
    }

    /// Interior points where `p` may jump or kink. Dense samples report none:
    /// their interpolation kinks are left to the panel resolution.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.repr {
            Representation::ClosedFormSegments { edges, segments } => edges[1..edges.len() - 1]
                .iter()
                .copied()
                .chain(segments.iter().flat_map(Profile::kinks))
                .collect(),
            Representation::DenseSamples { .. } => Vec::new(),
        }
    }

    /// Largest minus smallest sampled value.
    pub fn range(&self) -> f64 {
        let (lo, hi) = self
            .interval
            .uniform_nodes(1024)
            .into_iter()
            .map(|x| self.eval(x))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        hi - lo
    }
}

impl Density for AttenuationExponent {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        AttenuationExponent::breakpoints(self)
    }
}

/// Cumulative integral of `beta` on a uniform grid of `resolution` points.
pub fn attenuation_to_p<F: Fn(f64) -> f64>(
    beta: F,
    interval: Interval,
    resolution: usize,
) -> Result<AttenuationExponent> {
    if resolution < 2 {
        return Err(Error::arg("resolution must be at least 2"));
    }
    let nodes = interval.uniform_nodes(resolution - 1);
    let mut values = Vec::with_capacity(resolution);
    let mut acc = 0.0;
    values.push(acc);
    for w in nodes.windows(2) {
        acc += quadrature::simpson(&beta, w[0], w[1], 2)?;
        values.push(acc);
    }
    AttenuationExponent::from_samples(interval, values)
}
