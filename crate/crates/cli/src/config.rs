//! TOML run configuration.
//!
//! Every section is optional and every field overrides the named preset
//! (`preset = "example1"` unless the `experiment` command names another).
//! Unknown keys are rejected.
//!
//! ```toml
//! schema_version = 1
//! preset = "example1"
//! seed = 2015
//! output_dir = "out"
//!
//! [problem]
//! interval = [0.0, 1.0]
//! p = { kind = "polynomial", coeffs = [0.0, 1.0] }
//! rho0 = { kind = "sine", amplitude = 1.0, frequency = 1.0 }
//! measurements = 300
//! nodes = 400
//! lambda_range = [0.0, 1.0]
//! noise_fraction = 0.005
//! repeats = 1
//!
//! [solver]
//! methods = [{ method = "tikhonov", alpha = 1e-6 }]
//! [solver.regularization]
//! tv_smoothing = 1e-2
//!
//! [quadrature]
//! data_panels = 64
//! assembly_panels = 8
//!
//! [projection]
//! grid_resolution = 1000
//! samples = 1001
//!
//! [[intervals]]          # limited-data windows
//! range = [0.0, 1.0]
//! ```

use multispec::experiments::{self, IntervalChoice, LimitedDataStudy, SolverChoice};
use multispec::solvers::RegularizationConfig;
use multispec::{ExperimentSpec, Interval, Profile};
use serde::Deserialize;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub projection: ProjectionSection,
    pub intervals: Option<Vec<IntervalChoice>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: Option<String>,
    pub interval: Option<Interval>,
    pub p: Option<Profile>,
    pub rho0: Option<Profile>,
    pub measurements: Option<usize>,
    pub nodes: Option<usize>,
    pub lambda_range: Option<[f64; 2]>,
    pub noise_fraction: Option<f64>,
    pub repeats: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub methods: Option<Vec<SolverChoice>>,
    #[serde(default)]
    pub regularization: RegularizationSection,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizationSection {
    pub alpha: Option<f64>,
    pub tv_smoothing: Option<f64>,
    pub tv_max_iters: Option<usize>,
    pub tv_tol: Option<f64>,
    pub cgls_max_iters: Option<usize>,
    pub discrepancy_tau: Option<f64>,
}

impl RegularizationSection {
    pub fn apply(&self, cfg: &mut RegularizationConfig) {
        set(&mut cfg.alpha, self.alpha);
        set(&mut cfg.tv_smoothing, self.tv_smoothing);
        set(&mut cfg.tv_max_iters, self.tv_max_iters);
        set(&mut cfg.tv_tol, self.tv_tol);
        set(&mut cfg.cgls_max_iters, self.cgls_max_iters);
        set(&mut cfg.discrepancy_tau, self.discrepancy_tau);
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub data_panels: Option<usize>,
    pub assembly_panels: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionSection {
    /// Grid cells used to resolve the monotone parts of `p` (default 1000).
    pub grid_resolution: Option<usize>,
    /// Plateau tolerance; defaults depend on the representation of `p`.
    pub eps_p: Option<f64>,
    /// Number of uniform output abscissae (default 1001).
    pub samples: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum Preset {
    Single(ExperimentSpec),
    Study(LimitedDataStudy),
}

pub fn preset(name: &str) -> Option<Preset> {
    Some(match name {
        "example1" => Preset::Single(experiments::example1()),
        "example2" => Preset::Single(experiments::example2()),
        "plateau" => Preset::Single(experiments::plateau()),
        "limited-data" => Preset::Study(experiments::limited_data()),
        _ => return None,
    })
}

impl RunConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| format!("{}: {e}", origin.display()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "{}: unsupported schema_version {} (expected {SCHEMA_VERSION})",
                origin.display(),
                cfg.schema_version
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path).map_err(LoadError::Invalid)
    }

    /// The preset named by the config, or `fallback`.
    pub fn base(&self, fallback: &str) -> Result<Preset, String> {
        let name = self.preset.as_deref().unwrap_or(fallback);
        preset(name).ok_or_else(|| format!("unknown preset {name:?}; valid: {}", experiments::EXPERIMENT_NAMES.join(", ")))
    }

    pub fn apply(&self, spec: &mut ExperimentSpec) {
        let pr = &self.problem;
        set(&mut spec.name, pr.name.clone());
        set(&mut spec.interval, pr.interval);
        set(&mut spec.p, pr.p.clone());
        set(&mut spec.rho0, pr.rho0.clone());
        set(&mut spec.measurements, pr.measurements);
        set(&mut spec.nodes, pr.nodes);
        set(&mut spec.lambda_range, pr.lambda_range);
        set(&mut spec.noise_fraction, pr.noise_fraction);
        set(&mut spec.repeats, pr.repeats);
        set(&mut spec.methods, self.solver.methods.clone());
        self.solver.regularization.apply(&mut spec.regularization);
        set(&mut spec.data_panels, self.quadrature.data_panels);
        set(&mut spec.assembly_panels, self.quadrature.assembly_panels);
        set(&mut spec.base_seed, self.seed);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Debug)]
pub enum LoadError {
    Io(String),
    Invalid(String),
}
