//! One-dimensional multispectral source recovery.
//!
//! Data `D(λ) = ∫_a^b λ^{p(x)} ρ(x) dx` is observed for `λ` in a subset of
//! `(0, 1)`; `p` is the integrated attenuation of a known medium and `ρ` the
//! unknown source. The crate provides
//!
//! - the exact forward model and noisy simulation ([`measurement`]),
//! - Simpson quadrature ([`quadrature`]) and hat-basis discretization into a
//!   theory matrix ([`discretization`]),
//! - Tikhonov, total variation and CGLS inversion ([`solvers`]),
//! - the levelset-averaging projection `P` that describes what the data can
//!   determine: `D(ρ₁) = D(ρ₂)` exactly when `Pρ₁ = Pρ₂` ([`projection`]),
//! - scripted numerical studies ([`experiments`]).
//!
//! Data-parallel loops (matrix rows, repeated runs) go through
//! [`parallel::Execution`]; the `parallel` feature (default) backs them with
//! rayon.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attenuation;
pub mod basis;
pub mod discretization;
pub mod error;
pub mod experiments;
pub mod measurement;
pub mod noise;
pub mod parallel;
pub mod profile;
pub mod projection;
pub mod quadrature;
pub mod solvers;
pub mod spectral;

pub use attenuation::{attenuation_to_p, AttenuationExponent};
pub use basis::{DensityField, HatBasis, Interval};
pub use discretization::{build_theory_matrix, uniform_lambdas, AssemblyConfig, TheoryMatrix};
pub use error::{Error, Result};
pub use experiments::{run_example, run_limited_data_study, run_plateau_study, ExperimentReport, ExperimentSpec};
pub use measurement::{forward_data, simulate_measurements, MeasurementSet};
pub use parallel::Execution;
pub use profile::{Density, LinearCombination, Profile};
pub use projection::{
    conditional_expectation_oracle, data_invariance_gap, levelset_perturbation, partition_levelsets, project,
    LevelsetPartition, ProjectedDensity,
};
pub use solvers::{Method, RegularizationConfig, SolveReport, SolveStatus};
pub use spectral::{preprocess_measurement, SpectralModel};
