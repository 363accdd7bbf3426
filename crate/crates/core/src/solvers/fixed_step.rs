use rand::Rng;

use super::{EpochRecord, SolveTrace};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::problems::{Loss, StochasticObjective};

/// Plain SGD with constant step `gamma < 1/λ`, projected iff `constrained`.
/// Returns the last iterate `w_T`.
pub fn fixed_step_sgd<O, R>(
    objective: &O,
    rng: &mut R,
    gamma: f64,
    budget: usize,
    w0: &Vector,
    constrained: bool,
) -> Result<SolveTrace>
where
    O: StochasticObjective,
    R: Rng + ?Sized,
{
    let lambda = objective.certificate().strong_convexity;
    if !(gamma > 0.0 && gamma < 1.0 / lambda) {
        return Err(Error::invalid(
            "gamma",
            format!("step size must lie in (0, 1/λ) = (0, {}), got {gamma}", 1.0 / lambda),
        ));
    }
    if budget == 0 {
        return Err(Error::invalid("budget", "must be at least 1"));
    }
    let domain = objective.domain();
    domain.ensure_contains(w0)?;
    let mut trace = SolveTrace::start(w0.clone());
    let mut w = w0.clone();
    for _ in 0..budget {
        let g = objective.sample(rng).grad(&w)?;
        w.add_scaled(-gamma, &g)?;
        if constrained {
            w = domain.project(&w)?;
        } else if !w.is_finite() {
            return Err(Error::NonFinite("unconstrained SGD iterate"));
        }
    }
    trace.push_epoch(
        EpochRecord {
            phase: 1,
            step_size: gamma,
            length: budget,
        },
        w,
    );
    Ok(trace)
}
