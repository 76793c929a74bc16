//! Command-line driver: simulate data, invert it, project a source onto
//! what the data can determine, and run the shipped experiments.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 I/O failure,
//! 4 a solver stopped without converging (outputs are still written).

pub mod config;
pub mod measurements;

use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{LoadError, Preset, RunConfig};
use multispec::experiments::{self, write_limited_data_report, write_report, LimitedDataStudy, SolverChoice};
use multispec::projection::default_eps;
use multispec::solvers::{solve, Method};
use multispec::{
    build_theory_matrix, partition_levelsets, project, simulate_measurements, AssemblyConfig,
    ExperimentSpec, Execution,
};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "multispec", version, about = "Multispectral source recovery")]
pub struct Cli {
    /// Worker threads for assembly and repeated runs (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write noisy synthetic data to `measurements.csv`.
    Simulate(Common),
    /// Solve for the source from `measurements.csv`.
    Invert {
        #[arg(long)]
        measurements: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write `projection.csv` (x, rho, Prho) and `partition.csv`.
    Project(Common),
    /// Run a shipped experiment into a report directory.
    Experiment {
        name: ExperimentName,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentName {
    Example1,
    Example2,
    Plateau,
    LimitedData,
}

impl ExperimentName {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Example1 => "example1",
            ExperimentName::Example2 => "example2",
            ExperimentName::Plateau => "plateau",
            ExperimentName::LimitedData => "limited-data",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default: `output_dir` from the config, else `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Solve with this method only.
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Penalty weight for Tikhonov and TV.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Noise standard deviation as a fraction of `max |D|`.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Iteration budget for TV and CGLS.
    #[arg(long)]
    pub max_iters: Option<usize>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    Solver(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
            Failure::Solver(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Solver(m) => m,
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io(m) => Failure::Io(m),
            LoadError::Invalid(m) => Failure::Usage(m),
        }
    }
}

impl From<multispec::Error> for Failure {
    fn from(e: multispec::Error) -> Self {
        match e {
            multispec::Error::Numeric(_) => Failure::Solver(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(io_err(path))
}

/// What a successful command produced; `flagged` asks for exit code 4.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub flagged: Vec<String>,
}

pub fn run(cli: Cli) -> Result<Outcome, Failure> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Simulate(c) => cmd_simulate(&c),
        Command::Invert { measurements, common } => cmd_invert(&measurements, &common),
        Command::Project(c) => cmd_project(&c),
        Command::Experiment { name, common } => cmd_experiment(name, &common),
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) -> Result<(), Failure> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    // A second call in the same process (tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(threads: Option<usize>) -> Result<(), Failure> {
    match threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        _ => Ok(()),
    }
}

struct Loaded {
    config: RunConfig,
    preset: Preset,
}

fn load(common: &Common, fallback: &str) -> Result<Loaded, Failure> {
    let config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig {
            schema_version: config::SCHEMA_VERSION,
            ..Default::default()
        },
    };
    let preset = config.base(fallback).map_err(Failure::Usage)?;
    Ok(Loaded { config, preset })
}

/// Config, then flags, on top of `spec`.
fn apply_overrides(spec: &mut ExperimentSpec, config: &RunConfig, common: &Common) -> Result<(), Failure> {
    config.apply(spec);
    if let Some(seed) = common.seed {
        spec.base_seed = seed;
    }
    if let Some(noise) = common.noise {
        spec.noise_fraction = noise;
    }
    if let Some(n) = common.max_iters {
        if n == 0 {
            return Err(Failure::Usage("--max-iters must be at least 1".into()));
        }
        spec.regularization.tv_max_iters = n;
        spec.regularization.cgls_max_iters = n;
    }
    if let Some(method) = common.method {
        let kept = spec.methods.iter().copied().find(|c| c.method == method);
        spec.methods = vec![kept.unwrap_or(SolverChoice::new(method, None))];
    }
    if let Some(alpha) = common.alpha {
        spec.regularization.alpha = alpha;
        for c in &mut spec.methods {
            c.alpha = None;
        }
    }
    spec.validate()?;
    Ok(())
}

fn single_spec(loaded: &Loaded) -> ExperimentSpec {
    match &loaded.preset {
        Preset::Single(spec) => spec.clone(),
        Preset::Study(study) => study.base.clone(),
    }
}

fn out_dir(common: &Common, config: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = common
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    Ok(dir)
}

/// The data of run 0 of the equivalent experiment.
pub fn cmd_simulate(common: &Common) -> Result<Outcome, Failure> {
    let loaded = load(common, "example1")?;
    let mut spec = single_spec(&loaded);
    apply_overrides(&mut spec, &loaded.config, common)?;
    let p = spec.exponent()?;
    let lambdas = spec.lambdas()?;
    let seed = multispec::noise::derive_seed(spec.base_seed, 0);
    let set = simulate_measurements(&p, &spec.rho0, &lambdas, spec.noise_fraction, seed, spec.data_panels)?;
    let dir = out_dir(common, &loaded.config)?;
    let path = dir.join("measurements.csv");
    write(&path, &measurements::render(&set, spec.base_seed))?;
    Ok(Outcome {
        written: vec![path],
        flagged: vec![],
    })
}

pub fn cmd_invert(measurements_path: &Path, common: &Common) -> Result<Outcome, Failure> {
    let loaded = load(common, "example1")?;
    let mut spec = single_spec(&loaded);
    apply_overrides(&mut spec, &loaded.config, common)?;
    let text = fs::read_to_string(measurements_path).map_err(io_err(measurements_path))?;
    let data = measurements::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", measurements_path.display())))?;

    let p = spec.exponent()?;
    let basis = spec.basis()?;
    let assembly = AssemblyConfig {
        panels_per_piece: spec.assembly_panels,
        execution: Execution::Parallel,
    };
    let matrix = build_theory_matrix(&p, data.lambdas(), &basis, assembly)?;
    let choice = spec.methods[0];
    let mut cfg = spec.regularization;
    if let Some(alpha) = spec.effective_alpha(&choice) {
        cfg.alpha = alpha;
    }
    let sigma = (data.sigma() > 0.0).then_some(data.sigma());
    let report = solve(choice.method, matrix.entries(), data.values(), basis.spacing(), &cfg, sigma)?;

    let dir = out_dir(common, &loaded.config)?;
    let mut s = String::from("x,f\n");
    for (x, f) in basis.nodes().iter().zip(&report.solution) {
        let _ = writeln!(s, "{x:e},{f:e}");
    }
    let solution = dir.join("solution.csv");
    write(&solution, &s)?;
    let mut record = report.to_record("solution.csv");
    if let Ok(err) = experiments::relative_error(&report.solution, &spec.rho0, &basis) {
        let _ = writeln!(record, "relative_error_vs_rho0 = {err:e}");
    }
    let report_path = dir.join("solve_report.txt");
    write(&report_path, &record)?;
    let flagged = if report.status.is_flagged() {
        vec![format!("{} stopped with status {}", report.method, report.status.name())]
    } else {
        vec![]
    };
    Ok(Outcome {
        written: vec![solution, report_path],
        flagged,
    })
}

pub fn cmd_project(common: &Common) -> Result<Outcome, Failure> {
    let loaded = load(common, "plateau")?;
    let mut spec = single_spec(&loaded);
    apply_overrides(&mut spec, &loaded.config, common)?;
    let section = &loaded.config.projection;
    let resolution = section.grid_resolution.unwrap_or(1000);
    let samples = section.samples.unwrap_or(1001);
    if resolution == 0 || samples < 2 {
        return Err(Failure::Usage("projection needs grid_resolution >= 1 and samples >= 2".into()));
    }
    let p = spec.exponent()?;
    let eps = section.eps_p.unwrap_or_else(|| default_eps(&p));
    let partition = partition_levelsets(&p, resolution, eps)?;
    let projected = project(&spec.rho0, &partition)?;
    let xs = spec.interval.uniform_nodes(samples - 1);

    let dir = out_dir(common, &loaded.config)?;
    let mut s = String::from("x,rho,Prho\n");
    for &x in &xs {
        let _ = writeln!(s, "{x:e},{:e},{:e}", spec.rho0.eval(x), projected.eval(x));
    }
    let proj_path = dir.join("projection.csv");
    write(&proj_path, &s)?;
    let part_path = dir.join("partition.csv");
    let mut buf = Vec::new();
    partition.write_csv(&mut buf).map_err(io_err(&part_path))?;
    fs::write(&part_path, buf).map_err(io_err(&part_path))?;
    Ok(Outcome {
        written: vec![proj_path, part_path],
        flagged: vec![],
    })
}

pub fn cmd_experiment(name: ExperimentName, common: &Common) -> Result<Outcome, Failure> {
    let loaded = load(common, name.as_str())?;
    let preset = config::preset(name.as_str()).expect("every experiment name has a preset");
    let dir = out_dir(common, &loaded.config)?;
    let execution = Execution::Parallel;
    let mut flagged = Vec::new();
    match preset {
        Preset::Single(mut spec) => {
            apply_overrides(&mut spec, &loaded.config, common)?;
            let report = if name == ExperimentName::Plateau {
                experiments::run_plateau_study(&spec, execution)?
            } else {
                experiments::run_example(&spec, execution)?
            };
            write_report(&report, &dir).map_err(io_err(&dir))?;
            for s in report.summaries.iter().filter(|s| s.flagged > 0) {
                flagged.push(format!("{}: {} of {} runs did not converge", s.method, s.flagged, report.runs.len()));
            }
        }
        Preset::Study(study) => {
            let mut base = study.base.clone();
            apply_overrides(&mut base, &loaded.config, common)?;
            let mut intervals = loaded.config.intervals.clone().unwrap_or(study.intervals);
            if common.alpha.is_some() {
                for i in &mut intervals {
                    i.alpha = None;
                }
            }
            let study = LimitedDataStudy { base, intervals };
            let table = experiments::run_limited_data_study(&study, execution)?;
            write_limited_data_report(&table, &study.base.name, &dir).map_err(io_err(&dir))?;
        }
    }
    Ok(Outcome {
        written: vec![dir],
        flagged,
    })
}
