//! Scripted numerical studies: single examples with several solvers, the
//! plateau study, and repeated limited-data runs with error statistics.
//!
//! Every run draws its noise from `derive_seed(base_seed, run_index)`, so
//! results are independent of how runs are scheduled across threads.

mod limited;
mod output;
mod presets;

pub use limited::{run_limited_data_study, IntervalChoice, IntervalRow, LimitedDataStudy, LimitedDataTable};
pub use output::{write_limited_data_report, write_report, SvgPlot};
pub use presets::{example1, example2, limited_data, plateau, EXPERIMENT_NAMES};

use crate::attenuation::AttenuationExponent;
use crate::basis::{DensityField, HatBasis, Interval};
use crate::discretization::{build_theory_matrix, uniform_lambdas, AssemblyConfig, DEFAULT_ASSEMBLY_PANELS};
use crate::error::{Error, Result};
use crate::measurement::simulate_measurements;
use crate::noise::derive_seed;
use crate::parallel::Execution;
use crate::profile::Profile;
use crate::projection::{cell_average, default_eps, partition_levelsets, project, LevelsetPartition};
use crate::quadrature::DEFAULT_DATA_PANELS;
use crate::solvers::{solve_cgls, solve_tv, Method, RegularizationConfig, SolveStatus, TikhonovSolver};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverChoice {
    pub method: Method,
    /// Overrides `RegularizationConfig::alpha` for this method.
    #[serde(default)]
    pub alpha: Option<f64>,
}

impl SolverChoice {
    pub fn new(method: Method, alpha: Option<f64>) -> Self {
        Self { method, alpha }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default = "Interval::unit")]
    pub interval: Interval,
    pub p: Profile,
    pub rho0: Profile,
    /// Number of measurement frequencies `M`.
    #[serde(default = "defaults::measurements")]
    pub measurements: usize,
    /// Number of hat-basis nodes `N`.
    #[serde(default = "defaults::nodes")]
    pub nodes: usize,
    #[serde(default = "defaults::lambda_range")]
    pub lambda_range: [f64; 2],
    #[serde(default = "defaults::noise_fraction")]
    pub noise_fraction: f64,
    pub methods: Vec<SolverChoice>,
    #[serde(default)]
    pub regularization: RegularizationConfig,
    #[serde(default = "defaults::repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Simpson panel pairs for the exact-model data.
    #[serde(default = "defaults::data_panels")]
    pub data_panels: usize,
    /// Simpson panel pairs per smooth piece of a theory-matrix entry.
    #[serde(default = "defaults::assembly_panels")]
    pub assembly_panels: usize,
}

pub(crate) mod defaults {
    use super::*;
    pub fn measurements() -> usize {
        300
    }
    pub fn nodes() -> usize {
        400
    }
    pub fn lambda_range() -> [f64; 2] {
        [0.0, 1.0]
    }
    pub fn noise_fraction() -> f64 {
        0.005
    }
    pub fn repeats() -> usize {
        1
    }
    pub fn data_panels() -> usize {
        DEFAULT_DATA_PANELS
    }
    pub fn assembly_panels() -> usize {
        DEFAULT_ASSEMBLY_PANELS
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.measurements == 0 || self.repeats == 0 {
            return Err(Error::arg("measurements and repeats must be at least 1"));
        }
        if self.nodes < 2 {
            return Err(Error::arg("at least two basis nodes are needed"));
        }
        let [lo, hi] = self.lambda_range;
        if !(lo >= 0.0 && hi <= 1.0 && lo < hi) {
            return Err(Error::arg(format!("lambda range ({lo}, {hi}) must lie in (0, 1)")));
        }
        if !(self.noise_fraction >= 0.0 && self.noise_fraction.is_finite()) {
            return Err(Error::arg("noise_fraction must be >= 0"));
        }
        if self.methods.is_empty() {
            return Err(Error::arg("no solver methods requested"));
        }
        if self.data_panels == 0 || self.assembly_panels == 0 {
            return Err(Error::arg("panel counts must be positive"));
        }
        self.p.validate().map_err(Error::InvalidArgument)?;
        self.rho0.validate().map_err(Error::InvalidArgument)?;
        self.regularization.validate()?;
        for choice in &self.methods {
            if let Some(a) = choice.alpha {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::arg(format!("alpha for {} must be positive", choice.method)));
                }
            }
        }
        Ok(())
    }

    pub fn effective_alpha(&self, choice: &SolverChoice) -> Option<f64> {
        match choice.method {
            Method::Cgls => None,
            _ => Some(choice.alpha.unwrap_or(self.regularization.alpha)),
        }
    }

    pub fn exponent(&self) -> Result<AttenuationExponent> {
        AttenuationExponent::from_profile(self.interval, self.p.clone())
    }

    pub fn basis(&self) -> Result<HatBasis> {
        HatBasis::new(self.interval, self.nodes)
    }

    pub fn lambdas(&self) -> Result<Vec<f64>> {
        uniform_lambdas(self.lambda_range[0], self.lambda_range[1], self.measurements)
    }
}

/// `‖f − r₀‖₂ / ‖r₀‖₂` with `r₀` the source sampled at the basis nodes.
pub fn relative_error(f: &[f64], rho0: &Profile, basis: &HatBasis) -> Result<f64> {
    if f.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: f.len(),
        });
    }
    let r0 = basis.sample(rho0);
    let norm = r0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::arg("relative error against a zero source"));
    }
    let diff = f.iter().zip(&r0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(diff / norm)
}

/// `(mean, variance)` with the population variance `Σ(e − mean)² / n`,
/// summed in index order.
pub fn mean_variance(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub method: Method,
    pub alpha: Option<f64>,
    pub relative_error: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub solution: Vec<f64>,
    /// Solution averages over the plateau cells, in partition order.
    pub plateau_averages: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub index: usize,
    pub seed: Option<u64>,
    pub sigma: f64,
    pub methods: Vec<MethodRun>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub alpha: Option<f64>,
    pub mean_relative_error: f64,
    pub variance: f64,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateauRow {
    pub cell: usize,
    pub pieces: Vec<(f64, f64)>,
    pub p_value: f64,
    /// Average of `ρ₀` over the cell.
    pub projected: f64,
    /// Per requested method, the solution's cell average, averaged over runs.
    pub solution_averages: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub nodes: Vec<f64>,
    pub rho0: Vec<f64>,
    /// `Pρ₀` at the nodes, for the plateau study.
    pub projected: Option<Vec<f64>>,
    pub runs: Vec<RunRecord>,
    pub summaries: Vec<MethodSummary>,
    pub plateaus: Vec<PlateauRow>,
    pub partition: Option<LevelsetPartition>,
}

impl ExperimentReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    /// Per-run errors of `method`, in run order.
    pub fn errors(&self, method: Method) -> Vec<f64> {
        self.runs
            .iter()
            .flat_map(|r| r.methods.iter().filter(|m| m.method == method).map(|m| m.relative_error))
            .collect()
    }
}

/// A theory matrix plus whatever per-method state survives across runs.
pub(crate) struct PreparedSolvers {
    a: DMatrix<f64>,
    spacing: f64,
    tikhonov: Vec<Option<TikhonovSolver>>,
}

impl PreparedSolvers {
    pub(crate) fn new(a: DMatrix<f64>, spacing: f64, spec: &ExperimentSpec) -> Result<Self> {
        let tikhonov = spec
            .methods
            .iter()
            .map(|c| match c.method {
                Method::Tikhonov => TikhonovSolver::new(&a, spec.effective_alpha(c).unwrap()).map(Some),
                _ => Ok(None),
            })
            .collect::<Result<_>>()?;
        Ok(Self { a, spacing, tikhonov })
    }

    pub(crate) fn solve(&self, spec: &ExperimentSpec, i: usize, d: &[f64], sigma: f64) -> Result<crate::solvers::SolveReport> {
        let choice = &spec.methods[i];
        match choice.method {
            Method::Tikhonov => self.tikhonov[i].as_ref().unwrap().solve(d),
            Method::Tv => solve_tv(&self.a, d, spec.effective_alpha(choice).unwrap(), self.spacing, &spec.regularization),
            Method::Cgls => solve_cgls(&self.a, d, &spec.regularization, (sigma > 0.0).then_some(sigma)),
        }
    }
}

/// Simulate, assemble independently of the simulation, and solve with each
/// requested method, `repeats` times.
pub fn run_example(spec: &ExperimentSpec, execution: Execution) -> Result<ExperimentReport> {
    run(spec, execution, false)
}

/// [`run_example`] plus the levelset partition of `p`, `Pρ₀`, and each
/// solver's averages over the plateau cells.
pub fn run_plateau_study(spec: &ExperimentSpec, execution: Execution) -> Result<ExperimentReport> {
    run(spec, execution, true)
}

fn run(spec: &ExperimentSpec, execution: Execution, with_projection: bool) -> Result<ExperimentReport> {
    spec.validate()?;
    let p = spec.exponent()?;
    let basis = spec.basis()?;
    let lambdas = spec.lambdas()?;
    let assembly = AssemblyConfig {
        panels_per_piece: spec.assembly_panels,
        execution,
    };
    let partition = if with_projection {
        let part = partition_levelsets(&p, spec.nodes - 1, default_eps(&p))?;
        if part.plateau_cells().next().is_none() {
            return Err(Error::arg("the plateau study needs a p with constant pieces"));
        }
        Some(part)
    } else {
        None
    };
    let plateau_ids: Vec<usize> = partition
        .as_ref()
        .map(|part| part.plateau_cells().map(|(i, _)| i).collect())
        .unwrap_or_default();
    let matrix = build_theory_matrix(&p, &lambdas, &basis, assembly)?;
    let solvers = PreparedSolvers::new(matrix.entries().clone(), basis.spacing(), spec)?;

    let runs = execution.map(spec.repeats, |index| -> Result<RunRecord> {
        let seed = derive_seed(spec.base_seed, index as u64);
        let data = simulate_measurements(&p, &spec.rho0, &lambdas, spec.noise_fraction, seed, spec.data_panels)?;
        let mut methods = Vec::with_capacity(spec.methods.len());
        for (i, choice) in spec.methods.iter().enumerate() {
            let report = solvers.solve(spec, i, data.values(), data.sigma())?;
            let plateau_averages = match &partition {
                Some(part) => {
                    let field = DensityField::new(basis.clone(), report.solution.clone())?;
                    plateau_ids
                        .iter()
                        .map(|&c| cell_average(part, c, &field))
                        .collect::<Result<_>>()?
                }
                None => Vec::new(),
            };
            methods.push(MethodRun {
                method: choice.method,
                alpha: spec.effective_alpha(choice),
                relative_error: relative_error(&report.solution, &spec.rho0, &basis)?,
                residual_norm: report.residual_norm,
                iterations: report.iterations,
                status: report.status,
                solution: report.solution,
                plateau_averages,
            });
        }
        Ok(RunRecord {
            index,
            seed: data.seed(),
            sigma: data.sigma(),
            methods,
        })
    });
    let runs: Vec<RunRecord> = runs.into_iter().collect::<Result<_>>()?;

    let summaries = spec
        .methods
        .iter()
        .enumerate()
        .map(|(i, choice)| {
            let errors: Vec<f64> = runs.iter().map(|r| r.methods[i].relative_error).collect();
            let (mean, variance) = mean_variance(&errors);
            MethodSummary {
                method: choice.method,
                alpha: spec.effective_alpha(choice),
                mean_relative_error: mean,
                variance,
                flagged: runs.iter().filter(|r| r.methods[i].status.is_flagged()).count(),
            }
        })
        .collect();

    let (projected, plateaus) = match &partition {
        Some(part) => {
            let proj = project(&spec.rho0, part)?;
            let cells = part.cells();
            let rows = plateau_ids
                .iter()
                .enumerate()
                .map(|(j, &c)| PlateauRow {
                    cell: c,
                    pieces: cells[c].pieces.clone(),
                    p_value: cells[c].p_value,
                    projected: proj.cell_averages()[c].unwrap(),
                    solution_averages: (0..spec.methods.len())
                        .map(|i| {
                            let vals: Vec<f64> = runs.iter().map(|r| r.methods[i].plateau_averages[j]).collect();
                            mean_variance(&vals).0
                        })
                        .collect(),
                })
                .collect();
            (Some(proj.sample(basis.nodes())), rows)
        }
        None => (None, Vec::new()),
    };

    Ok(ExperimentReport {
        name: spec.name.clone(),
        nodes: basis.nodes().to_vec(),
        rho0: basis.sample(&spec.rho0),
        projected,
        runs,
        summaries,
        plateaus,
        partition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_scalings() {
        let basis = HatBasis::new(Interval::unit(), 11).unwrap();
        let rho0 = Profile::sine(1.0, 1.0, 0.0);
        let r0 = basis.sample(&rho0);
        assert_eq!(relative_error(&r0, &rho0, &basis).unwrap(), 0.0);
        assert_eq!(relative_error(&[0.0; 11], &rho0, &basis).unwrap(), 1.0);
        let doubled: Vec<f64> = r0.iter().map(|v| 2.0 * v).collect();
        assert!((relative_error(&doubled, &rho0, &basis).unwrap() - 1.0).abs() < 1e-15);
        assert!(relative_error(&r0, &Profile::constant(0.0), &basis).is_err());
        assert!(relative_error(&r0[..5], &rho0, &basis).is_err());
    }

    #[test]
    fn mean_variance_small() {
        assert_eq!(mean_variance(&[1.0, 3.0]), (2.0, 1.0));
        assert_eq!(mean_variance(&[5.0]), (5.0, 0.0));
    }

    #[test]
    fn small_example_is_deterministic() {
        let mut spec = example1();
        spec.measurements = 40;
        spec.nodes = 30;
        spec.repeats = 3;
        spec.methods = vec![SolverChoice::new(Method::Tikhonov, Some(1e-6)), SolverChoice::new(Method::Cgls, None)];
        let a = run_example(&spec, Execution::Parallel).unwrap();
        let b = run_example(&spec, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.runs.len(), 3);
        assert_ne!(a.runs[0].seed, a.runs[1].seed);
        let errs = a.errors(Method::Tikhonov);
        assert_eq!(mean_variance(&errs).0, a.summary(Method::Tikhonov).unwrap().mean_relative_error);
    }

    #[test]
    fn invalid_specs() {
        let mut spec = example1();
        spec.methods.clear();
        assert!(run_example(&spec, Execution::Sequential).is_err());
        let mut spec = example1();
        spec.lambda_range = [0.5, 0.4];
        assert!(spec.validate().is_err());
        let spec = example1();
        assert!(run_plateau_study(&spec, Execution::Sequential).is_err());
    }
}
