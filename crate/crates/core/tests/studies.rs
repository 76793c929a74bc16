use multispec::experiments::*;
use multispec::noise::derive_seed;
use multispec::solvers::{log_spaced, select_alpha_discrepancy, solve_tikhonov};
use multispec::*;

fn only(spec: &mut ExperimentSpec, choices: &[(Method, Option<f64>)]) {
    spec.methods = choices.iter().map(|&(m, a)| SolverChoice::new(m, a)).collect();
}

/// Largest deviation of any method's mean plateau average from `Pρ₀`.
fn plateau_deviations(report: &ExperimentReport) -> Vec<f64> {
    (0..report.summaries.len())
        .map(|i| {
            report
                .plateaus
                .iter()
                .map(|row| (row.solution_averages[i] - row.projected).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

#[test]
fn example1_tikhonov_error() {
    let mut spec = example1();
    only(&mut spec, &[(Method::Tikhonov, None)]);
    let report = run_example(&spec, Execution::Parallel).unwrap();
    let err = report.summary(Method::Tikhonov).unwrap().mean_relative_error;
    assert!(err < 0.15, "{err}");
}

#[test]
fn noiseless_example1_is_recovered() {
    let mut spec = example1();
    spec.noise_fraction = 0.0;
    spec.regularization.cgls_max_iters = 200;
    only(&mut spec, &[(Method::Tikhonov, Some(1e-10)), (Method::Cgls, None)]);
    let report = run_example(&spec, Execution::Parallel).unwrap();
    assert_eq!(report.runs[0].sigma, 0.0);
    for s in &report.summaries {
        assert!(s.mean_relative_error < 0.02, "{}: {}", s.method, s.mean_relative_error);
    }
}

#[test]
fn discrepancy_choice_meets_bound_on_example1() {
    let spec = example1();
    let (p, basis, lambdas) = (spec.exponent().unwrap(), spec.basis().unwrap(), spec.lambdas().unwrap());
    let a = build_theory_matrix(&p, &lambdas, &basis, AssemblyConfig::default()).unwrap();
    let data = simulate_measurements(&p, &spec.rho0, &lambdas, 0.005, derive_seed(spec.base_seed, 0), 64).unwrap();
    let grid = log_spaced(-8.0, 0.0, 33);
    let alpha = select_alpha_discrepancy(
        Method::Tikhonov,
        a.entries(),
        data.values(),
        data.sigma(),
        &grid,
        basis.spacing(),
        &spec.regularization,
    )
    .unwrap();
    let report = solve_tikhonov(a.entries(), data.values(), alpha).unwrap();
    let bound = data.sigma() * (lambdas.len() as f64).sqrt();
    assert!(report.residual_norm <= bound);
    let err = relative_error(&report.solution, &spec.rho0, &basis).unwrap();
    assert!(err < 0.2, "alpha {alpha:e}: {err}");
}

#[test]
fn noiseless_solutions_are_forced_onto_plateau_averages() {
    let mut spec = plateau();
    spec.noise_fraction = 0.0;
    spec.regularization.cgls_max_iters = 200;
    only(
        &mut spec,
        &[(Method::Tikhonov, Some(1e-10)), (Method::Tv, Some(1e-7)), (Method::Cgls, None)],
    );
    let report = run_plateau_study(&spec, Execution::Parallel).unwrap();
    assert_eq!(report.plateaus.len(), 2);
    for (s, dev) in report.summaries.iter().zip(plateau_deviations(&report)) {
        assert!(dev < 0.05, "{}: {dev}", s.method);
    }
}

#[test]
fn noisy_solutions_average_to_plateau_values() {
    let mut spec = plateau();
    spec.repeats = 10;
    let report = run_plateau_study(&spec, Execution::Parallel).unwrap();
    for (s, dev) in report.summaries.iter().zip(plateau_deviations(&report)) {
        assert!(dev < 0.1, "{}: {dev}", s.method);
    }
}

#[test]
fn limited_data_study_is_schedule_independent() {
    let mut study = limited_data();
    study.base.repeats = 3;
    study.base.measurements = 60;
    study.base.nodes = 80;
    let seq = run_limited_data_study(&study, Execution::Sequential).unwrap();
    let par = run_limited_data_study(&study, Execution::Parallel).unwrap();
    assert_eq!(seq.rows, par.rows);
    assert_eq!(seq.rows.len(), 4);
    // common random numbers: run i uses the same stream on every window
    for report in &seq.reports {
        let seeds: Vec<_> = report.runs.iter().map(|r| r.seed).collect();
        let expected: Vec<_> = (0..3).map(|i| Some(derive_seed(study.base.base_seed, i))).collect();
        assert_eq!(seeds, expected);
    }
}
