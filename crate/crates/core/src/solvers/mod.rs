//! Projected SGD epochs and the epoch-based algorithms built on them.
//!
//! Every solver consumes a [`StochasticObjective`] and an exclusively owned
//! random stream, so a solve is fully determined by its inputs.

mod epoch;
mod fixed_step;
mod schedule;

pub use epoch::{epoch_gd, epoch_gd_f, fasa, sgd_epoch};
pub use fixed_step::fixed_step_sgd;
pub use schedule::{check_alpha, epoch_length, fasa_second_phase, fixed_epoch_parameters, EpochSchedule};

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::problems::{ProblemSpec, StochasticObjective};

/// One executed epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    /// 1 or 2 for the two FASA phases, 1 otherwise.
    pub phase: u8,
    pub step_size: f64,
    pub length: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveTrace {
    /// Starting point followed by the iterate handed off after each epoch.
    pub epoch_boundary_iterates: Vec<Vector>,
    pub epochs: Vec<EpochRecord>,
    pub gradients_consumed: usize,
    pub final_iterate: Vector,
    /// Set when the budget was too small for the schedule to run.
    pub degenerate: bool,
}

impl SolveTrace {
    fn start(w0: Vector) -> Self {
        SolveTrace {
            epoch_boundary_iterates: vec![w0.clone()],
            epochs: Vec::new(),
            gradients_consumed: 0,
            final_iterate: w0,
            degenerate: false,
        }
    }

    fn push_epoch(&mut self, record: EpochRecord, output: Vector) {
        self.gradients_consumed += record.length;
        self.epochs.push(record);
        self.epoch_boundary_iterates.push(output.clone());
        self.final_iterate = output;
    }

    /// Epochs run in the last phase; `k†` of the governing bound.
    pub fn k_dagger(&self) -> usize {
        let last = self.epochs.last().map_or(1, |e| e.phase);
        self.epochs.iter().filter(|e| e.phase == last).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Algorithm {
    EpochGd { first_step: f64, first_length: usize },
    Fasa { alpha: f64 },
    EpochGdF { beta: f64 },
    FixedSgd { gamma: f64, constrained: bool },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::EpochGd { .. } => "epoch_gd",
            Algorithm::Fasa { .. } => "fasa",
            Algorithm::EpochGdF { .. } => "epoch_gd_f",
            Algorithm::FixedSgd { .. } => "fixed_sgd",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a solve starts.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum StartPoint {
    #[default]
    Center,
    Optimum,
    /// Boundary point farthest from the optimum.
    Boundary,
    Point(Vector),
}

impl StartPoint {
    pub fn resolve(&self, spec: &ProblemSpec) -> Result<Vector> {
        let domain = spec.domain();
        let w0 = match self {
            StartPoint::Center => domain.center().clone(),
            StartPoint::Optimum => spec.optimum().clone(),
            StartPoint::Boundary => {
                let away = domain.center().sub(spec.optimum())?;
                if away.norm() > 0.0 {
                    domain.boundary_point(&away)?
                } else {
                    domain.boundary_point(&Vector::basis(domain.dim(), 0))?
                }
            }
            StartPoint::Point(w) => w.clone(),
        };
        domain.ensure_contains(&w0)?;
        Ok(w0)
    }
}

impl FromStr for StartPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "center" => Ok(StartPoint::Center),
            "optimum" => Ok(StartPoint::Optimum),
            "boundary" => Ok(StartPoint::Boundary),
            other => Err(Error::invalid(
                "start",
                format!("expected center, optimum or boundary, got `{other}`"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub start: StartPoint,
}

/// Runs `algorithm` with budget `budget` from `w0`.
pub fn solve<O, R>(objective: &O, rng: &mut R, algorithm: &Algorithm, budget: usize, w0: &Vector) -> Result<SolveTrace>
where
    O: StochasticObjective,
    R: Rng + ?Sized,
{
    let cert = objective.certificate();
    match *algorithm {
        Algorithm::EpochGd {
            first_step,
            first_length,
        } => epoch_gd(objective, rng, first_step, first_length, budget, w0),
        Algorithm::Fasa { alpha } => fasa(
            objective,
            rng,
            cert.smoothness,
            cert.strong_convexity,
            budget,
            alpha,
            w0,
        ),
        Algorithm::EpochGdF { beta } => epoch_gd_f(objective, rng, beta, budget, w0),
        Algorithm::FixedSgd { gamma, constrained } => fixed_step_sgd(objective, rng, gamma, budget, w0, constrained),
    }
}

/// Budget `16βκ⌈log₂(F₀/ε)⌉` for reaching `ε + 2F*/β` with Epoch-GD-F, where
/// `β = max(1, 4F*/ε)` and `F₀` is an estimate of the initial excess risk.
pub fn iteration_complexity_ours(kappa: f64, min_risk: f64, epsilon: f64, initial_gap: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    if !(initial_gap > 0.0) {
        return Err(Error::invalid("initial_gap", format!("must be positive, got {initial_gap}")));
    }
    let beta = f64::max(1.0, 4.0 * min_risk / epsilon);
    let epochs = (initial_gap / epsilon).log2().ceil().max(1.0);
    Ok(16.0 * beta * kappa * epochs)
}
