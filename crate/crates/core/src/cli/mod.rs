//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 a bound or
//! assumption check failed, 3 internal error. Results go to stdout or the
//! `--out` file; diagnostics go to stderr.

pub mod config;
pub mod svg;
pub mod table;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::harness::{fit_rate, governing_bound, monotonicity_flags, run_trials, ExperimentPlan, ExperimentResults};
use crate::problems::{check_assumptions, StochasticObjective};
use crate::rng;

pub use config::{parse_config, ConfigError, ConfigFile};
pub use table::ResultRow;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "EPOCHSA_THREADS";

const ASSUMPTION_STREAM: u64 = 0xA55;

#[derive(Parser, Debug)]
#[command(name = "epochsa", version, about = "Epoch-based stochastic approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured trial count
    #[arg(long)]
    trials: Option<usize>,
    /// Overrides the configured base seed
    #[arg(long)]
    seed: Option<u64>,
    /// Input CSV for fit-rate and plot
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the configured experiment and write one CSV row per budget
    Run(Common),
    /// Check the problem's assumptions and certificate by random sampling
    CheckAssumptions(Common),
    /// Fit log-log convergence slopes to a results CSV
    FitRate(Common),
    /// Render a results CSV as a log-log SVG plot
    Plot(Common),
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

type Outcome = std::result::Result<i32, Failure>;

struct Io<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Io<'_> {
    fn note(&mut self, msg: impl AsRef<str>) {
        let _ = writeln!(self.stderr, "{}", msg.as_ref());
    }

    /// Writes `content` to `path`, or to stdout.
    fn emit(&mut self, path: Option<&Path>, content: &str) -> std::result::Result<(), Failure> {
        match path {
            Some(p) => fs::write(p, content).map_err(|e| Failure::Internal(format!("writing {}: {e}", p.display()))),
            None => self
                .stdout
                .write_all(content.as_bytes())
                .map_err(|e| Failure::Internal(format!("writing stdout: {e}"))),
        }
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run_command<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let mut io = Io { stdout, stderr };
    let outcome = match &cli.command {
        Command::Run(c) => cmd_run(c, &mut io),
        Command::CheckAssumptions(c) => cmd_check(c, &mut io),
        Command::FitRate(c) => cmd_fit(c, &mut io),
        Command::Plot(c) => cmd_plot(c, &mut io),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            io.note(format!("error: {msg}"));
            EXIT_USAGE
        }
        Err(Failure::Internal(msg)) => {
            io.note(format!("internal error: {msg}"));
            EXIT_INTERNAL
        }
    }
}

fn load_config(common: &Common) -> std::result::Result<ConfigFile, Failure> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Failure::Usage("--config is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))?;
    let mut config = parse_config(&text).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| format!("{}: {e}", path.display())).collect();
        Failure::Usage(lines.join("\n"))
    })?;
    if let Some(t) = common.trials {
        if t == 0 {
            return Err(Failure::Usage("--trials must be at least 1".into()));
        }
        config.experiment.trials = t;
    }
    if let Some(s) = common.seed {
        config.experiment.base_seed = s;
    }
    Ok(config)
}

fn threads_from_env() -> std::result::Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

/// One CSV row per budget, with the governing bound's verdict.
pub fn result_rows(plan: &ExperimentPlan, results: &ExperimentResults) -> crate::Result<Vec<ResultRow>> {
    results
        .budgets
        .iter()
        .map(|b| {
            let report = governing_bound(plan, results, b)?;
            Ok(ResultRow {
                algorithm: plan.solver.algorithm.name().to_string(),
                budget: b.budget,
                trials: b.trials.len(),
                mean_excess: report.empirical_mean,
                std_error: report.std_error,
                theoretical_rhs: report.theoretical_rhs,
                satisfied: report.satisfied,
                k_dagger: b.k_dagger(),
                gradients_consumed: b.gradients_consumed(),
            })
        })
        .collect()
}

/// Semi-log plot of mean excess at each epoch boundary for the largest
/// budget.
pub fn epoch_plot(plan: &ExperimentPlan, results: &ExperimentResults) -> crate::Result<String> {
    let last = results.budgets.last().ok_or(Error::EmptyAverage)?;
    let points = last
        .epoch_excess()?
        .iter()
        .enumerate()
        .map(|(k, s)| (k as f64, s.mean))
        .collect();
    let title = format!("excess risk per epoch, T = {}", last.budget);
    Ok(svg::render(
        &[svg::Series {
            name: plan.solver.algorithm.name().to_string(),
            points,
        }],
        &svg::Axes {
            title: &title,
            x_label: "epoch",
            y_label: "mean excess risk",
            x_scale: svg::Scale::Linear,
            y_scale: svg::Scale::Log10,
        },
    ))
}

fn cmd_run(common: &Common, io: &mut Io<'_>) -> Outcome {
    let config = load_config(common)?;
    let threads = threads_from_env()?;
    let plan = config.plan(threads).map_err(|e| Failure::Usage(e.to_string()))?;
    let verbosity = config.output.verbosity;
    if verbosity > 0 {
        let c = plan.problem.certificate();
        io.note(format!(
            "{}: L = {}, lambda = {}, kappa = {}, G = {}, F* = {}",
            plan.solver.algorithm, c.smoothness, c.strong_convexity, c.condition_number, c.grad_bound, c.min_risk
        ));
    }
    let results = run_trials(&plan)?;
    let rows = result_rows(&plan, &results)?;

    let csv_path = common.out.clone().or(config.output.csv.clone());
    io.emit(csv_path.as_deref(), &table::emit(&rows))?;
    if let Some(svg_path) = &config.output.svg {
        io.emit(Some(svg_path), &epoch_plot(&plan, &results)?)?;
    }

    for budget in monotonicity_flags(&results)? {
        io.note(format!("warning: mean excess increased at T = {budget}"));
    }
    for b in results.budgets.iter().filter(|b| b.degenerate()) {
        io.note(format!("warning: budget T = {} is too small for the schedule", b.budget));
    }
    let failed: Vec<&ResultRow> = rows.iter().filter(|r| !r.satisfied).collect();
    for r in &failed {
        io.note(format!(
            "bound violated at T = {}: mean {} - 3*se {} > rhs {}",
            r.budget, r.mean_excess, r.std_error, r.theoretical_rhs
        ));
    }
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_check(common: &Common, io: &mut Io<'_>) -> Outcome {
    let config = load_config(common)?;
    let spec = config.build_problem().map_err(|e| Failure::Usage(e.to_string()))?;
    let checks = common.trials.unwrap_or(10_000);
    let seed = common.seed.unwrap_or(config.experiment.base_seed);
    let mut stream = rng::stream(seed, &[ASSUMPTION_STREAM]);
    let results = check_assumptions(&spec, checks, &mut stream)?;

    let mut out = String::from("assumption,trials,failures,worst_violation,passed\n");
    for r in &results {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.kind,
            r.trials,
            r.failures,
            table::format_float(r.worst_violation),
            r.passed()
        ));
    }
    io.emit(common.out.as_deref(), &out)?;
    let failed: Vec<_> = results.iter().filter(|r| !r.passed()).collect();
    for r in &failed {
        io.note(format!("{} failed in {} of {} checks", r.kind, r.failures, r.trials));
    }
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn load_rows(common: &Common) -> std::result::Result<Vec<ResultRow>, Failure> {
    let path = match (&common.input, &common.config) {
        (Some(p), _) => p.clone(),
        (None, Some(_)) => load_config(common)?
            .output
            .csv
            .ok_or_else(|| Failure::Usage("config has no [output] csv and --input is absent".into()))?,
        (None, None) => return Err(Failure::Usage("--input or --config is required".into())),
    };
    let text = fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))?;
    table::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Rows grouped by algorithm, in order of first appearance.
fn by_algorithm(rows: &[ResultRow]) -> Vec<(String, Vec<&ResultRow>)> {
    let mut groups: Vec<(String, Vec<&ResultRow>)> = Vec::new();
    for r in rows {
        match groups.iter_mut().find(|(name, _)| *name == r.algorithm) {
            Some((_, g)) => g.push(r),
            None => groups.push((r.algorithm.clone(), vec![r])),
        }
    }
    groups
}

fn cmd_fit(common: &Common, io: &mut Io<'_>) -> Outcome {
    let rows = load_rows(common)?;
    let mut out = String::from("algorithm,points,dropped,slope,intercept,r_squared\n");
    for (name, group) in by_algorithm(&rows) {
        let budgets: Vec<f64> = group.iter().map(|r| r.budget as f64).collect();
        let means: Vec<f64> = group.iter().map(|r| r.mean_excess).collect();
        let fit = fit_rate(&budgets, &means).map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
        for t in &fit.dropped {
            io.note(format!("{name}: dropped T = {t} with nonpositive mean excess"));
        }
        out.push_str(&format!(
            "{name},{},{},{},{},{}\n",
            fit.log_budgets.len(),
            fit.dropped.len(),
            table::format_float(fit.slope),
            table::format_float(fit.intercept),
            table::format_float(fit.r_squared)
        ));
    }
    io.emit(common.out.as_deref(), &out)?;
    Ok(EXIT_OK)
}

/// Log-log plot of mean excess against budget, one series per algorithm.
pub fn budget_plot(rows: &[ResultRow]) -> String {
    let series: Vec<svg::Series> = by_algorithm(rows)
        .into_iter()
        .map(|(name, group)| svg::Series {
            name,
            points: group.iter().map(|r| (r.budget as f64, r.mean_excess)).collect(),
        })
        .collect();
    svg::render(
        &series,
        &svg::Axes {
            title: "mean excess risk against budget",
            x_label: "T (stochastic gradients)",
            y_label: "mean excess risk",
            x_scale: svg::Scale::Log10,
            y_scale: svg::Scale::Log10,
        },
    )
}

fn cmd_plot(common: &Common, io: &mut Io<'_>) -> Outcome {
    let rows = load_rows(common)?;
    io.emit(common.out.as_deref(), &budget_plot(&rows))?;
    Ok(EXIT_OK)
}
