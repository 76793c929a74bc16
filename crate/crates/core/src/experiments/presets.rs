//! The shipped experiments. Penalty weights are frozen here; see
//! `select_alpha_discrepancy` for how to pick new ones.

use super::{defaults, ExperimentSpec, IntervalChoice, LimitedDataStudy, SolverChoice};
use crate::basis::Interval;
use crate::profile::Profile;
use crate::solvers::{Method, RegularizationConfig};

pub const EXPERIMENT_NAMES: [&str; 4] = ["example1", "example2", "plateau", "limited-data"];

const TIKHONOV_ALPHA: f64 = 1e-6;
const TV_ALPHA: f64 = 1e-4;
/// Smoothing of `|f'|` in TV; gradients of the shipped sources are O(1),
/// so jumps stay sharp while lagged diffusivity converges in tens of steps.
const TV_SMOOTHING: f64 = 1.0;
/// The CGLS residual levels off just above `σ√M` after four or five steps
/// on these kernels, so the budget, not the discrepancy bound, decides.
const CGLS_ITERATIONS: usize = 5;
/// The plateau example needs up to ~2200 steps on some noise draws.
const TV_ITERATIONS: usize = 3000;

fn regularization() -> RegularizationConfig {
    RegularizationConfig {
        alpha: TIKHONOV_ALPHA,
        tv_smoothing: TV_SMOOTHING,
        cgls_max_iters: CGLS_ITERATIONS,
        tv_max_iters: TV_ITERATIONS,
        ..RegularizationConfig::default()
    }
}

fn all_methods() -> Vec<SolverChoice> {
    vec![
        SolverChoice::new(Method::Tikhonov, Some(TIKHONOV_ALPHA)),
        SolverChoice::new(Method::Tv, Some(TV_ALPHA)),
        SolverChoice::new(Method::Cgls, None),
    ]
}

fn base(name: &str, p: Profile, rho0: Profile) -> ExperimentSpec {
    ExperimentSpec {
        name: name.to_string(),
        interval: Interval::unit(),
        p,
        rho0,
        measurements: defaults::measurements(),
        nodes: defaults::nodes(),
        lambda_range: defaults::lambda_range(),
        noise_fraction: defaults::noise_fraction(),
        methods: all_methods(),
        regularization: regularization(),
        repeats: 1,
        base_seed: 2015,
        data_panels: defaults::data_panels(),
        assembly_panels: defaults::assembly_panels(),
    }
}

/// `p(x) = x`, `ρ₀ = sin(πx)`.
pub fn example1() -> ExperimentSpec {
    base("example1", Profile::identity(), Profile::sine(1.0, 1.0, 0.0))
}

/// `p(x) = x`, `ρ₀ = 0.3` on `(0.3, 0.6)` and zero elsewhere.
pub fn example2() -> ExperimentSpec {
    base(
        "example2",
        Profile::identity(),
        Profile::Indicator {
            lo: 0.3,
            hi: 0.6,
            value: 0.3,
        },
    )
}

/// `p` rises with slope 5/3, except on `(0.2, 0.4]` and `(0.6, 0.8]` where
/// it stays at 1/3 and 2/3; `ρ₀ = sin(πx)`.
pub fn plateau() -> ExperimentSpec {
    let p = Profile::Piecewise {
        breakpoints: vec![0.2, 0.4, 0.6, 0.8],
        pieces: vec![
            Profile::linear(0.0, 5.0 / 3.0),
            Profile::constant(1.0 / 3.0),
            Profile::linear(-1.0 / 3.0, 5.0 / 3.0),
            Profile::constant(2.0 / 3.0),
            Profile::linear(-2.0 / 3.0, 5.0 / 3.0),
        ],
    };
    base("plateau", p, Profile::sine(1.0, 1.0, 0.0))
}

/// `p = eˣ − 1`, `ρ₀ = 0.5 − 0.5 sin(2πx)`, Tikhonov, 100 noise draws
/// on each of four shrinking frequency windows.
pub fn limited_data() -> LimitedDataStudy {
    let mut spec = base(
        "limited-data",
        Profile::Exp {
            scale: 1.0,
            rate: 1.0,
            offset: -1.0,
        },
        Profile::sine(-0.5, 2.0, 0.5),
    );
    spec.methods = vec![SolverChoice::new(Method::Tikhonov, Some(TIKHONOV_ALPHA))];
    spec.repeats = 100;
    LimitedDataStudy {
        base: spec,
        intervals: [[0.0, 1.0], [0.2, 0.8], [0.3, 0.6], [0.4, 0.5]]
            .into_iter()
            .map(|range| IntervalChoice { range, alpha: None })
            .collect(),
    }
}
