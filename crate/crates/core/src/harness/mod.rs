//! Monte-Carlo experiments: repeated independent solves, aggregation of the
//! excess risk, and comparison against the theoretical bounds.

mod bounds;
mod fit;

pub use bounds::{
    appendix_distance_rhs, appendix_risk_constrained_rhs, appendix_risk_unconstrained_rhs, check_bound,
    corollary1_rhs, epoch_gd_base_rhs, theorem1_rhs, theorem2_rhs, Bound, BoundReport, TheoremKind,
};
pub use fit::{epoch_decay_fit, fit_rate, ols, DecayFit, RateFit};

use rand::SeedableRng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{squared_distance, Vector};
use crate::problems::{ProblemSpec, StochasticObjective};
use crate::rng::{derive_seed, TrialRng};
use crate::solvers::{solve, Algorithm, SolverConfig};

#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub problem: ProblemSpec,
    pub solver: SolverConfig,
    /// Strictly increasing gradient budgets.
    pub budget_grid: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Also evaluate the excess risk at every epoch boundary.
    pub record_epochs: bool,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.budget_grid.is_empty() {
            return Err(Error::invalid("budget_grid", "must not be empty"));
        }
        if self.budget_grid[0] == 0 {
            return Err(Error::invalid("budget_grid", "budgets must be positive"));
        }
        if self.budget_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("budget_grid", "must be strictly increasing"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads", "must be at least 1"));
        }
        Ok(())
    }

    fn unconstrained(&self) -> bool {
        matches!(
            self.solver.algorithm,
            Algorithm::FixedSgd {
                constrained: false,
                ..
            }
        )
    }

    /// Excess risk of `w`; unconstrained iterates are evaluated off-domain.
    fn excess(&self, w: &Vector) -> Result<f64> {
        let risk = if self.unconstrained() {
            self.problem.risk_extended(w)?.value
        } else {
            self.problem.expected_risk(w)?
        };
        Ok(risk - self.problem.certificate().min_risk)
    }
}

/// Seed of trial `trial` at budget `budget`.
pub fn trial_seed(base_seed: u64, budget: usize, trial: usize) -> u64 {
    derive_seed(base_seed, &[budget as u64, trial as u64])
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub budget: usize,
    pub trial: usize,
    pub seed: u64,
    /// `F(w_final) − F*`.
    pub excess: f64,
    /// `‖w_final − w*‖²`.
    pub sq_distance: f64,
    /// Excess risk at each epoch boundary, starting point first; empty
    /// unless the plan records epochs.
    pub epoch_excess: Vec<f64>,
    pub gradients_consumed: usize,
    pub k_dagger: usize,
    pub degenerate: bool,
}

/// Mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

pub fn summarize(samples: &[f64]) -> Result<Summary> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::EmptyAverage);
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let std_error = if n < 2 {
        0.0
    } else {
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (nf - 1.0);
        (var / nf).sqrt()
    };
    Ok(Summary { mean, std_error, n })
}

/// All trials at one budget, ordered by trial index.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetResults {
    pub budget: usize,
    pub trials: Vec<TrialResult>,
}

impl BudgetResults {
    pub fn excess(&self) -> Result<Summary> {
        summarize(&self.trials.iter().map(|t| t.excess).collect::<Vec<_>>())
    }

    pub fn sq_distance(&self) -> Result<Summary> {
        summarize(&self.trials.iter().map(|t| t.sq_distance).collect::<Vec<_>>())
    }

    /// Per-epoch summaries of the boundary excess; index 0 is the start.
    pub fn epoch_excess(&self) -> Result<Vec<Summary>> {
        let epochs = self.trials.iter().map(|t| t.epoch_excess.len()).min().unwrap_or(0);
        (0..epochs)
            .map(|k| summarize(&self.trials.iter().map(|t| t.epoch_excess[k]).collect::<Vec<_>>()))
            .collect()
    }

    /// `k†` of the first trial; the schedule does not depend on the seed.
    pub fn k_dagger(&self) -> usize {
        self.trials.first().map_or(0, |t| t.k_dagger)
    }

    pub fn gradients_consumed(&self) -> usize {
        self.trials.first().map_or(0, |t| t.gradients_consumed)
    }

    pub fn degenerate(&self) -> bool {
        self.trials.iter().any(|t| t.degenerate)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResults {
    pub start: Vector,
    /// `F(w₀)`, evaluated exactly at the start point.
    pub initial_risk: f64,
    pub budgets: Vec<BudgetResults>,
}

fn run_one(plan: &ExperimentPlan, w0: &Vector, budget: usize, trial: usize) -> Result<TrialResult> {
    let seed = trial_seed(plan.base_seed, budget, trial);
    let mut rng = TrialRng::seed_from_u64(seed);
    let trace = solve(&plan.problem, &mut rng, &plan.solver.algorithm, budget, w0)?;
    let epoch_excess = if plan.record_epochs {
        trace
            .epoch_boundary_iterates
            .iter()
            .map(|w| plan.excess(w))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(TrialResult {
        budget,
        trial,
        seed,
        excess: plan.excess(&trace.final_iterate)?,
        sq_distance: squared_distance(&trace.final_iterate, plan.problem.optimum())?,
        epoch_excess,
        gradients_consumed: trace.gradients_consumed,
        k_dagger: trace.k_dagger(),
        degenerate: trace.degenerate,
    })
}

/// Runs every `(budget, trial)` pair of the plan in parallel.
///
/// Results are reduced in index order, so the output does not depend on
/// the thread count. The first failing trial aborts the experiment.
pub fn run_trials(plan: &ExperimentPlan) -> Result<ExperimentResults> {
    plan.validate()?;
    let w0 = plan.solver.start.resolve(&plan.problem)?;
    let initial_risk = plan.problem.expected_risk(&w0)?;
    let jobs: Vec<(usize, usize)> = plan
        .budget_grid
        .iter()
        .flat_map(|&b| (0..plan.trials).map(move |j| (b, j)))
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = plan.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::invalid("threads", e.to_string()))?;
    let outcomes: Vec<Result<TrialResult>> =
        pool.install(|| jobs.par_iter().map(|&(b, j)| run_one(plan, &w0, b, j)).collect());

    let mut flat = outcomes.into_iter().collect::<Result<Vec<_>>>()?.into_iter();
    let budgets = plan
        .budget_grid
        .iter()
        .map(|&budget| BudgetResults {
            budget,
            trials: flat.by_ref().take(plan.trials).collect(),
        })
        .collect();
    Ok(ExperimentResults {
        start: w0,
        initial_risk,
        budgets,
    })
}

/// The bound that governs the plan's algorithm at one budget.
///
/// Epoch-GD uses `32G²/(λT)`, FASA its `α` bound (the `α = 2` form when it
/// applies), Epoch-GD-F its plateau bound with the run's `k†` and `F(w₀)`,
/// and fixed-step SGD
/// the risk form of the distance recursion. Fixed-step bounds whose step
/// preconditions fail are reported out of regime.
pub fn governing_bound(
    plan: &ExperimentPlan,
    results: &ExperimentResults,
    at: &BudgetResults,
) -> Result<BoundReport> {
    let cert = plan.problem.certificate();
    let (g, lam, l, kappa, fstar) = (
        cert.grad_bound,
        cert.strong_convexity,
        cert.smoothness,
        cert.condition_number,
        cert.min_risk,
    );
    let t = at.budget;
    let (theorem, rhs) = match plan.solver.algorithm {
        Algorithm::EpochGd { .. } => (TheoremKind::EpochGdBase, Bound::unconditional(epoch_gd_base_rhs(g, lam, t))),
        Algorithm::Fasa { alpha } if alpha == 2.0 => (TheoremKind::Cor1, corollary1_rhs(g, lam, kappa, fstar, t)),
        Algorithm::Fasa { alpha } => (TheoremKind::Thm1, theorem1_rhs(g, lam, kappa, fstar, t, alpha)?),
        Algorithm::EpochGdF { beta } => (
            TheoremKind::Thm2,
            Bound::unconditional(theorem2_rhs(results.initial_risk, fstar, beta, at.k_dagger())),
        ),
        Algorithm::FixedSgd { gamma, constrained } => {
            let d0 = squared_distance(&results.start, plan.problem.optimum())?;
            let value = if constrained {
                let grad_norm = plan.problem.expected_grad(plan.problem.optimum())?.norm();
                appendix_risk_constrained_rhs(gamma, lam, l, fstar, t, d0, grad_norm)
            } else {
                appendix_risk_unconstrained_rhs(gamma, lam, l, fstar, t, d0)
            };
            let theorem = if constrained {
                TheoremKind::AppendixRiskConstrained
            } else {
                TheoremKind::AppendixRiskUnconstrained
            };
            let bound = match value {
                Ok(v) => Bound::unconditional(v),
                Err(_) => Bound {
                    value: f64::INFINITY,
                    in_regime: false,
                },
            };
            (theorem, bound)
        }
    };
    Ok(check_bound(theorem, t, &at.excess()?, rhs, cert))
}

/// Checks `E‖w_T − w*‖²` against the distance recursion. Only meaningful
/// for fixed-step SGD plans.
pub fn distance_bound(plan: &ExperimentPlan, results: &ExperimentResults, at: &BudgetResults) -> Result<BoundReport> {
    let Algorithm::FixedSgd { gamma, .. } = plan.solver.algorithm else {
        return Err(Error::invalid("algorithm", "distance bound applies to fixed_sgd only"));
    };
    let cert = plan.problem.certificate();
    let d0 = squared_distance(&results.start, plan.problem.optimum())?;
    let rhs = appendix_distance_rhs(
        gamma,
        cert.strong_convexity,
        cert.smoothness,
        cert.min_risk,
        at.budget,
        d0,
    )?;
    Ok(check_bound(
        TheoremKind::AppendixDist,
        at.budget,
        &at.sq_distance()?,
        Bound::unconditional(rhs),
        cert,
    ))
}

/// Budgets whose mean excess rose above the previous budget's by more than
/// three combined standard errors.
pub fn monotonicity_flags(results: &ExperimentResults) -> Result<Vec<usize>> {
    let mut flagged = Vec::new();
    for pair in results.budgets.windows(2) {
        let (a, b) = (pair[0].excess()?, pair[1].excess()?);
        let slack = 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        if b.mean > a.mean + slack {
            flagged.push(pair[1].budget);
        }
    }
    Ok(flagged)
}

#[cfg(test)]
mod tests;
