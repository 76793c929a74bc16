use multispec::experiments::example1;
use multispec::forward_data;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn multispec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multispec")).args(args).output().unwrap()
}

fn run_ok(args: &[&str]) {
    let out = multispec(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Data rows of a csv file, header and `#` lines skipped.
fn rows(file: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(file)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn report_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in report"))
        .parse()
        .unwrap()
}

#[test]
fn simulate_without_noise_is_the_exact_model() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    run_ok(&["simulate", "--noise", "0", "--out", path(&out)]);
    let spec = example1();
    let p = spec.exponent().unwrap();
    let rows = rows(&out.join("measurements.csv"));
    assert_eq!(rows.len(), spec.measurements);
    for r in &rows {
        let (lambda, d): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        assert_eq!(d, forward_data(&p, &spec.rho0, lambda, spec.data_panels).unwrap());
        assert_eq!(r[2].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn simulate_is_reproducible_and_scales_sigma() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok(&["simulate", "--seed", "5", "--out", path(&a)]);
    run_ok(&["simulate", "--seed", "5", "--out", path(&b)]);
    let text = fs::read_to_string(a.join("measurements.csv")).unwrap();
    assert_eq!(text, fs::read_to_string(b.join("measurements.csv")).unwrap());

    let spec = example1();
    let p = spec.exponent().unwrap();
    let peak = spec
        .lambdas()
        .unwrap()
        .iter()
        .map(|&l| forward_data(&p, &spec.rho0, l, spec.data_panels).unwrap().abs())
        .fold(0.0, f64::max);
    let sigma: f64 = text.lines().next().unwrap().strip_prefix("# sigma=").unwrap().parse().unwrap();
    assert!((sigma - 0.005 * peak).abs() < 1e-15 * peak);
    assert!(text.contains("# seed=5\n"));
}

#[test]
fn invert_recovers_example1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    run_ok(&["simulate", "--out", path(&out)]);
    let data = out.join("measurements.csv");
    run_ok(&["invert", "--measurements", path(&data), "--method", "tikhonov", "--out", path(&out)]);
    let report = fs::read_to_string(out.join("solve_report.txt")).unwrap();
    assert!(report.contains("status = converged"));
    let err = report_value(&report, "relative_error_vs_rho0");
    assert!(err < 0.15, "relative error {err}");
    assert_eq!(rows(&out.join("solution.csv")).len(), example1().nodes);
}

#[test]
fn invalid_arguments_exit_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path(tmp.path());
    let cases: [&[&str]; 4] = [
        &["experiment", "example1", "--method", "cgls", "--max-iters", "0", "--out", out],
        &["experiment", "example9", "--out", out],
        &["simulate", "--method", "newton", "--out", out],
        &["simulate", "--threads", "0", "--out", out],
    ];
    for args in cases {
        assert_eq!(multispec(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unreadable_inputs_exit_with_io_code() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.csv");
    let out = multispec(&["invert", "--measurements", path(&missing), "--out", path(tmp.path())]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_config_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "schema_version = 1\n[problem]\nrepeat = 3\n").unwrap();
    let out = multispec(&["simulate", "--config", path(&cfg), "--out", path(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3") && stderr.contains("bad.toml"), "{stderr}");
}

#[test]
fn projection_of_odd_source_under_even_exponent_vanishes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("even.toml");
    fs::write(
        &cfg,
        "schema_version = 1\n[problem]\ninterval = [-1.0, 1.0]\n\
         p = { kind = \"polynomial\", coeffs = [0.0, 0.0, 1.0] }\n\
         rho0 = { kind = \"polynomial\", coeffs = [0.0, 1.0] }\n",
    )
    .unwrap();
    let out = tmp.path().join("proj");
    run_ok(&["project", "--config", path(&cfg), "--out", path(&out)]);
    let rows = rows(&out.join("projection.csv"));
    assert_eq!(rows.len(), 1001);
    for r in &rows[1..rows.len() - 1] {
        let prho: f64 = r[2].parse().unwrap();
        assert!(prho.abs() < 1e-9, "x = {}: P rho = {prho}", r[0]);
    }
}

#[test]
fn projection_under_increasing_exponent_is_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("inc.toml");
    fs::write(&cfg, "schema_version = 1\npreset = \"example1\"\n").unwrap();
    let out = tmp.path().join("proj");
    run_ok(&["project", "--config", path(&cfg), "--out", path(&out)]);
    for r in rows(&out.join("projection.csv")) {
        let (rho, prho): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((rho - prho).abs() < 1e-12);
    }
}

#[test]
fn plateau_projection_averages_the_source() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("proj");
    run_ok(&["project", "--out", path(&out)]);
    let expected = 5.0 / (2.0 * std::f64::consts::PI);
    let mut on_plateau = 0;
    for r in rows(&out.join("projection.csv")) {
        let x: f64 = r[0].parse().unwrap();
        let prho: f64 = r[2].parse().unwrap();
        if (x > 0.2 && x < 0.4) || (x > 0.6 && x < 0.8) {
            assert!((prho - expected).abs() < 1e-6, "x = {x}: {prho}");
            on_plateau += 1;
        }
    }
    assert!(on_plateau > 300);
    let partition = fs::read_to_string(out.join("partition.csv")).unwrap();
    assert_eq!(partition.matches("plateau").count(), 2);
}

#[test]
fn limited_data_table_has_one_row_per_window() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("few.toml");
    fs::write(&cfg, "schema_version = 1\n[problem]\nrepeats = 8\n").unwrap();
    let out = tmp.path().join("ld");
    run_ok(&["experiment", "limited-data", "--config", path(&cfg), "--out", path(&out)]);
    let rows = rows(&out.join("report.csv"));
    assert_eq!(rows.len(), 4);
    let means: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
    assert!(rows.iter().all(|r| r[4] == "8"));
    assert!(out.join("fig_limited_data.svg").exists());
}

#[test]
fn plateau_figure_overlays_projection_and_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("pl");
    run_ok(&["experiment", "plateau", "--method", "tikhonov", "--out", path(&out)]);
    let svg = fs::read_to_string(out.join("fig_plateau.svg")).unwrap();
    for label in ["rho0", "P rho0", "tikhonov"] {
        assert!(svg.contains(label), "missing {label}");
    }
    assert!(out.join("partition.csv").exists() && out.join("runs/run_0.csv").exists());
    let plateaus = rows(&out.join("plateaus.csv"));
    assert_eq!(plateaus.len(), 2);
}

#[test]
fn noiseless_cgls_recovers_example1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cg");
    run_ok(&[
        "experiment", "example1", "--noise", "0", "--method", "cgls", "--max-iters", "200", "--out", path(&out),
    ]);
    let rows = rows(&out.join("report.csv"));
    let err: f64 = rows[0][3].parse().unwrap();
    assert!(err < 0.02, "relative error {err}");
}
