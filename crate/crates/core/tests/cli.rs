use std::path::Path;
use std::process::{Command, Output};

use epochsa::cli::table;

const MINIMAL: &str = "\
[problem]
kind = least_squares
d = 4
B = 2
a = 0.3
seed = 1

[solver]
algorithm = fasa
alpha = 2

[experiment]
budget_grid = [16, 64, 256]
trials = 100
";

fn epochsa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epochsa"))
        .args(args)
        .env_remove("EPOCHSA_THREADS")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_minimal_config_writes_one_row_per_budget() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "min.cfg", MINIMAL);
    let out = epochsa(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = table::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r.budget).collect::<Vec<_>>(), vec![16, 64, 256]);
    assert!(rows.iter().all(|r| r.algorithm == "fasa" && r.trials == 100 && r.satisfied));
}

#[test]
fn flags_override_config_and_outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("epochs.svg");
    let text = format!("{MINIMAL}\n[output]\nsvg = {}\n", svg.display());
    let cfg = write(dir.path(), "c.cfg", &text);
    let csv = dir.path().join("r.csv");
    let out = epochsa(&[
        "run",
        "--config",
        &cfg,
        "--out",
        csv.to_str().unwrap(),
        "--trials",
        "7",
        "--seed",
        "99",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let rows = table::parse(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.trials == 7));
    let plot = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(plot.matches("<polyline").count(), 1);

    let again = dir.path().join("r2.csv");
    epochsa(&["run", "--config", &cfg, "--out", again.to_str().unwrap(), "--trials", "7", "--seed", "99"]);
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", MINIMAL);
    let a = epochsa(&["run", "--config", &cfg, "--trials", "10"]);
    let b = Command::new(env!("CARGO_BIN_EXE_epochsa"))
        .args(["run", "--config", &cfg, "--trials", "10"])
        .env("EPOCHSA_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_epochsa"))
        .args(["run", "--config", &cfg])
        .env("EPOCHSA_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", &MINIMAL.replace("alpha = 2", "alpha = 1"));
    let out = epochsa(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("α > 1 is some constant"), "{err}");
    assert!(out.stdout.is_empty());

    assert_eq!(epochsa(&["run"]).status.code(), Some(1));
    assert_eq!(epochsa(&["run", "--config", "/nonexistent/x.cfg"]).status.code(), Some(1));
    assert_eq!(epochsa(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(epochsa(&["--help"]).status.code(), Some(0));
}

#[test]
fn corrupted_smoothness_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", &format!("{MINIMAL}\n[certificate]\nL = 1\n"));
    let out = epochsa(&["check-assumptions", "--config", &cfg, "--trials", "2000"]);
    assert_eq!(out.status.code(), Some(2));
    let report = String::from_utf8(out.stdout).unwrap();
    let line = report.lines().find(|l| l.starts_with("smooth-gradients,")).unwrap();
    assert!(line.ends_with(",false"), "{line}");

    let honest = write(dir.path(), "h.cfg", MINIMAL);
    let out = epochsa(&["check-assumptions", "--config", &honest, "--trials", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let report = String::from_utf8(out.stdout).unwrap();
    assert_eq!(report.lines().count(), 9);
    assert!(report.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn violated_bound_exits_two() {
    // G far below the true gradient bound makes the Epoch-GD bound tiny
    let text = MINIMAL.replace("algorithm = fasa\nalpha = 2", "algorithm = epoch_gd\nw0 = boundary")
        + "\n[certificate]\nG = 0.001\n";
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", &text);
    let out = epochsa(&["run", "--config", &cfg, "--trials", "20"]);
    assert_eq!(out.status.code(), Some(2));
    let rows = table::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(rows.iter().any(|r| !r.satisfied));
}

fn three_row_csv(dir: &Path) -> String {
    let rows: Vec<table::ResultRow> = [(16, 0.5), (64, 0.03), (256, 0.002)]
        .iter()
        .map(|&(t, m)| table::ResultRow {
            algorithm: "fasa".into(),
            budget: t,
            trials: 10,
            mean_excess: m,
            std_error: m / 10.0,
            theoretical_rhs: 1.0,
            satisfied: true,
            k_dagger: 1,
            gradients_consumed: t,
        })
        .collect();
    write(dir, "rows.csv", &table::emit(&rows))
}

#[test]
fn plot_renders_one_polyline_per_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let csv = three_row_csv(dir.path());
    let out = epochsa(&["plot", "--input", &csv]);
    assert_eq!(out.status.code(), Some(0));
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert!(svg.contains(r#"data-series="fasa""#));
}

#[test]
fn fit_rate_reports_slope() {
    let dir = tempfile::tempdir().unwrap();
    let csv = three_row_csv(dir.path());
    let out = epochsa(&["fit-rate", "--input", &csv]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("algorithm,points,dropped,slope,intercept,r_squared"));
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[0], "fasa");
    let slope: f64 = fields[3].parse().unwrap();
    assert!(slope < -1.5 && slope > -2.5, "{slope}");

    let short = write(dir.path(), "short.csv", &table::emit(&[]));
    assert_eq!(epochsa(&["fit-rate", "--input", &short]).status.code(), Some(0));
    assert_eq!(epochsa(&["fit-rate", "--input", "/nonexistent.csv"]).status.code(), Some(1));
}
