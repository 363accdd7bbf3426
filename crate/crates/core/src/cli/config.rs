//! Sectioned `key = value` experiment configuration.
//!
//! ```text
//! [problem]
//! kind = least_squares      # or logistic
//! d = 4
//! D = 1, 1, 1, 1            # least squares scale; a single value is broadcast
//! B = 2
//! a = 0.3                   # least squares noise half-width
//! mu = 0.05                 # logistic ridge
//! seed = 1
//!
//! [solver]
//! algorithm = fasa          # epoch_gd, fasa, epoch_gd_f or fixed_sgd
//! alpha = 2
//! w0 = center               # center, optimum or boundary
//!
//! [experiment]
//! budget_grid = 16, 64, 256
//! trials = 100
//! base_seed = 0
//!
//! [output]
//! csv = results.csv
//! svg = epochs.svg
//! verbosity = 1
//!
//! [certificate]             # optional overrides of L, lambda, G
//! L = 2
//! ```

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use crate::harness::ExperimentPlan;
use crate::problems::{ProblemParams, ProblemSpec, StochasticObjective};
use crate::solvers::{Algorithm, SolverConfig, StartPoint};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgorithmName {
    EpochGd,
    Fasa,
    EpochGdF,
    FixedSgd,
}

/// Solver section; Epoch-GD's first step defaults to `1/λ` and is resolved
/// once the certificate is known.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverSection {
    pub algorithm: AlgorithmName,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub first_step: Option<f64>,
    pub first_length: usize,
    pub projection: bool,
    pub start: StartPoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSection {
    pub budget_grid: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub verbosity: u8,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct CertificateOverrides {
    pub smoothness: Option<f64>,
    pub strong_convexity: Option<f64>,
    pub grad_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigFile {
    pub problem: ProblemParams,
    pub solver: SolverSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
    pub certificate: CertificateOverrides,
}

const SECTIONS: [(&str, &[&str]); 5] = [
    ("problem", &["kind", "d", "D", "B", "a", "mu", "seed"]),
    (
        "solver",
        &["algorithm", "alpha", "beta", "gamma", "eta1", "T1", "projection", "w0"],
    ),
    ("experiment", &["budget_grid", "trials", "base_seed"]),
    ("output", &["csv", "svg", "verbosity"]),
    ("certificate", &["L", "lambda", "G"]),
];

struct Entry {
    line: usize,
    value: String,
}

/// Per-section raw values, consumed as they are read.
struct Raw {
    sections: HashMap<&'static str, HashMap<&'static str, Entry>>,
    errors: Vec<ConfigError>,
}

impl Raw {
    fn error(&mut self, line: Option<usize>, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            message: message.into(),
        });
    }

    fn take(&mut self, section: &'static str, key: &'static str) -> Option<Entry> {
        self.sections.get_mut(section).and_then(|s| s.remove(key))
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.sections.get(section).is_some_and(|s| s.contains_key(key))
    }

    fn parsed<T>(
        &mut self,
        section: &'static str,
        key: &'static str,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Option<T> {
        let entry = self.take(section, key)?;
        match parse(&entry.value) {
            Ok(v) => Some(v),
            Err(msg) => {
                self.error(Some(entry.line), format!("[{section}] {key}: {msg}"));
                None
            }
        }
    }

    fn required<T>(
        &mut self,
        section: &'static str,
        key: &'static str,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Option<T> {
        if !self.has(section, key) {
            self.error(None, format!("[{section}] missing required key `{key}`"));
            return None;
        }
        self.parsed(section, key, parse)
    }

    /// Reports a key that the chosen variant does not read.
    fn reject(&mut self, section: &'static str, key: &'static str, context: &str) {
        if let Some(entry) = self.take(section, key) {
            self.error(Some(entry.line), format!("[{section}] {key} does not apply to {context}"));
        }
    }
}

fn positive_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected a number, got `{s}`"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn nonnegative_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected a number, got `{s}`"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be nonnegative, got {v}"))
    }
}

fn positive_int(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("expected a positive integer, got `{s}`")),
    }
}

fn seed(s: &str) -> Result<u64, String> {
    s.parse().map_err(|_| format!("expected an unsigned integer, got `{s}`"))
}

fn boolean(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got `{s}`")),
    }
}

/// Comma-separated list, optionally in brackets.
fn list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let inner = s.trim();
    let inner = inner
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .unwrap_or(inner);
    if inner.trim().is_empty() {
        return Err("empty list".into());
    }
    inner.split(',').map(|p| item(p.trim())).collect()
}

pub fn parse_alpha(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected a number, got `{s}`"))?;
    if v > 1.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("α > 1 is some constant; got {v}"))
    }
}

fn parse_beta(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected a number, got `{s}`"))?;
    if v > 1.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("β > 1 is required; got {v}"))
    }
}

fn tokenize(text: &str) -> Raw {
    let mut raw = Raw {
        sections: HashMap::new(),
        errors: Vec::new(),
    };
    let mut current: Option<(&'static str, &'static [&'static str])> = None;
    for (idx, line) in text.lines().enumerate() {
        let n = idx + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim();
            match SECTIONS.iter().find(|(s, _)| *s == name) {
                Some(&(s, keys)) => {
                    if raw.sections.contains_key(s) {
                        raw.error(Some(n), format!("duplicate section [{s}]"));
                    }
                    raw.sections.entry(s).or_default();
                    current = Some((s, keys));
                }
                None => {
                    raw.error(Some(n), format!("unknown section [{name}]"));
                    current = None;
                }
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            raw.error(Some(n), format!("expected `key = value`, got `{line}`"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some((section, keys)) = current else {
            raw.error(Some(n), format!("key `{key}` outside a known section"));
            continue;
        };
        let Some(&key) = keys.iter().find(|k| **k == key) else {
            raw.error(Some(n), format!("unknown key `{key}` in [{section}]"));
            continue;
        };
        let entries = raw.sections.entry(section).or_default();
        if let Some(prev) = entries.get(key) {
            let first = prev.line;
            raw.error(
                Some(n),
                format!("duplicate key `{key}` in [{section}], first set on line {first}"),
            );
            continue;
        }
        entries.insert(
            key,
            Entry {
                line: n,
                value: value.to_string(),
            },
        );
    }
    raw
}

fn parse_problem(raw: &mut Raw) -> Option<ProblemParams> {
    let kind = raw.required("problem", "kind", |s| match s {
        "least_squares" | "logistic" => Ok(s.to_string()),
        _ => Err(format!("expected least_squares or logistic, got `{s}`")),
    });
    let dim = raw.required("problem", "d", positive_int);
    let radius = raw.required("problem", "B", positive_real);
    let seed = raw.required("problem", "seed", seed);
    match kind.as_deref() {
        Some("least_squares") => {
            raw.reject("problem", "mu", "least_squares");
            let scale = raw.parsed("problem", "D", |s| list(s, positive_real));
            let noise = raw.required("problem", "a", nonnegative_real);
            let dim = dim?;
            let scale = match scale {
                None => vec![1.0; dim],
                Some(s) if s.len() == 1 => vec![s[0]; dim],
                Some(s) if s.len() == dim => s,
                Some(s) => {
                    raw.error(None, format!("[problem] D has {} entries but d = {dim}", s.len()));
                    return None;
                }
            };
            Some(ProblemParams::LeastSquares {
                dim,
                scale,
                radius: radius?,
                noise_halfwidth: noise?,
                seed: seed?,
            })
        }
        Some(_) => {
            raw.reject("problem", "D", "logistic");
            raw.reject("problem", "a", "logistic");
            let mu = raw.required("problem", "mu", positive_real);
            Some(ProblemParams::Logistic {
                dim: dim?,
                radius: radius?,
                regularization: mu?,
                seed: seed?,
            })
        }
        None => None,
    }
}

fn parse_solver(raw: &mut Raw) -> Option<SolverSection> {
    let algorithm = raw.required("solver", "algorithm", |s| match s {
        "epoch_gd" => Ok(AlgorithmName::EpochGd),
        "fasa" => Ok(AlgorithmName::Fasa),
        "epoch_gd_f" => Ok(AlgorithmName::EpochGdF),
        "fixed_sgd" => Ok(AlgorithmName::FixedSgd),
        _ => Err(format!("expected epoch_gd, fasa, epoch_gd_f or fixed_sgd, got `{s}`")),
    });
    let start = raw
        .parsed("solver", "w0", |s| s.parse::<StartPoint>().map_err(|e| e.to_string()))
        .unwrap_or_default();
    let algorithm = algorithm?;
    let name = match algorithm {
        AlgorithmName::EpochGd => "epoch_gd",
        AlgorithmName::Fasa => "fasa",
        AlgorithmName::EpochGdF => "epoch_gd_f",
        AlgorithmName::FixedSgd => "fixed_sgd",
    };
    let mut section = SolverSection {
        algorithm,
        alpha: None,
        beta: None,
        gamma: None,
        first_step: None,
        first_length: 4,
        projection: true,
        start,
    };
    let uses = |key: &str| match key {
        "alpha" => algorithm == AlgorithmName::Fasa,
        "beta" => algorithm == AlgorithmName::EpochGdF,
        "gamma" | "projection" => algorithm == AlgorithmName::FixedSgd,
        "eta1" | "T1" => algorithm == AlgorithmName::EpochGd,
        _ => true,
    };
    for key in ["alpha", "beta", "gamma", "projection", "eta1", "T1"] {
        if !uses(key) {
            raw.reject("solver", key, name);
        }
    }
    let mut ok = true;
    match algorithm {
        AlgorithmName::Fasa => {
            section.alpha = raw.required("solver", "alpha", parse_alpha);
            ok &= section.alpha.is_some();
        }
        AlgorithmName::EpochGdF => {
            section.beta = raw.required("solver", "beta", parse_beta);
            ok &= section.beta.is_some();
        }
        AlgorithmName::FixedSgd => {
            section.gamma = raw.required("solver", "gamma", positive_real);
            ok &= section.gamma.is_some();
            if raw.has("solver", "projection") {
                match raw.parsed("solver", "projection", boolean) {
                    Some(p) => section.projection = p,
                    None => ok = false,
                }
            }
        }
        AlgorithmName::EpochGd => {
            if raw.has("solver", "eta1") {
                section.first_step = raw.parsed("solver", "eta1", positive_real);
                ok &= section.first_step.is_some();
            }
            if raw.has("solver", "T1") {
                match raw.parsed("solver", "T1", positive_int) {
                    Some(t) => section.first_length = t,
                    None => ok = false,
                }
            }
        }
    }
    ok.then_some(section)
}

fn parse_experiment(raw: &mut Raw) -> Option<ExperimentSection> {
    let grid = raw.required("experiment", "budget_grid", |s| {
        let grid = list(s, positive_int)?;
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err("must be strictly increasing".into());
        }
        Ok(grid)
    });
    let trials = raw.required("experiment", "trials", positive_int);
    let base_seed = if raw.has("experiment", "base_seed") {
        raw.parsed("experiment", "base_seed", seed)?
    } else {
        0
    };
    Some(ExperimentSection {
        budget_grid: grid?,
        trials: trials?,
        base_seed,
    })
}

fn parse_output(raw: &mut Raw) -> OutputSection {
    OutputSection {
        csv: raw.parsed("output", "csv", |s| Ok(PathBuf::from(s))),
        svg: raw.parsed("output", "svg", |s| Ok(PathBuf::from(s))),
        verbosity: raw
            .parsed("output", "verbosity", |s| {
                s.parse::<u8>().map_err(|_| format!("expected 0, 1 or 2, got `{s}`"))
            })
            .unwrap_or(0),
    }
}

fn parse_certificate(raw: &mut Raw) -> CertificateOverrides {
    CertificateOverrides {
        smoothness: raw.parsed("certificate", "L", positive_real),
        strong_convexity: raw.parsed("certificate", "lambda", positive_real),
        grad_bound: raw.parsed("certificate", "G", positive_real),
    }
}

/// Parses and validates a whole config, collecting every error.
pub fn parse_config(text: &str) -> Result<ConfigFile, Vec<ConfigError>> {
    let mut raw = tokenize(text);
    let problem = parse_problem(&mut raw);
    let solver = parse_solver(&mut raw);
    let experiment = parse_experiment(&mut raw);
    let output = parse_output(&mut raw);
    let certificate = parse_certificate(&mut raw);
    match (problem, solver, experiment) {
        (Some(problem), Some(solver), Some(experiment)) if raw.errors.is_empty() => Ok(ConfigFile {
            problem,
            solver,
            experiment,
            output,
            certificate,
        }),
        _ => {
            let mut errors = raw.errors;
            if errors.is_empty() {
                errors.push(ConfigError {
                    line: None,
                    message: "invalid configuration".into(),
                });
            }
            Err(errors)
        }
    }
}

impl ConfigFile {
    /// Builds the problem instance with any certificate overrides applied.
    pub fn build_problem(&self) -> crate::Result<ProblemSpec> {
        let spec = self.problem.build()?;
        let c = &self.certificate;
        if c.smoothness.is_none() && c.strong_convexity.is_none() && c.grad_bound.is_none() {
            return Ok(spec);
        }
        let cert = spec
            .certificate()
            .with_overrides(c.smoothness, c.strong_convexity, c.grad_bound)?;
        Ok(spec.with_certificate(cert))
    }

    /// Resolves the solver against the problem's certificate.
    pub fn algorithm(&self, problem: &ProblemSpec) -> crate::Result<Algorithm> {
        let s = &self.solver;
        let cert = problem.certificate();
        // fields were checked present during parsing
        Ok(match s.algorithm {
            AlgorithmName::EpochGd => Algorithm::EpochGd {
                first_step: s.first_step.unwrap_or(1.0 / cert.strong_convexity),
                first_length: s.first_length,
            },
            AlgorithmName::Fasa => Algorithm::Fasa {
                alpha: s.alpha.unwrap_or(2.0),
            },
            AlgorithmName::EpochGdF => Algorithm::EpochGdF {
                beta: s.beta.unwrap_or(2.0),
            },
            AlgorithmName::FixedSgd => {
                let gamma = s.gamma.unwrap_or(0.0);
                if !(gamma < 1.0 / cert.strong_convexity) {
                    return Err(crate::Error::invalid(
                        "gamma",
                        format!("must be below 1/λ = {}, got {gamma}", 1.0 / cert.strong_convexity),
                    ));
                }
                Algorithm::FixedSgd {
                    gamma,
                    constrained: s.projection,
                }
            }
        })
    }

    pub fn plan(&self, threads: Option<usize>) -> crate::Result<ExperimentPlan> {
        let problem = self.build_problem()?;
        let algorithm = self.algorithm(&problem)?;
        let solver = SolverConfig {
            algorithm,
            start: self.solver.start.clone(),
        };
        solver.start.resolve(&problem)?;
        Ok(ExperimentPlan {
            problem,
            solver,
            budget_grid: self.experiment.budget_grid.clone(),
            trials: self.experiment.trials,
            base_seed: self.experiment.base_seed,
            threads,
            record_epochs: true,
        })
    }
}
