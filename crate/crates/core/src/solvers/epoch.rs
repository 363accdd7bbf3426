use rand::Rng;

use super::schedule::{check_beta, fasa_second_phase, fixed_epoch_parameters, EpochSchedule};
use super::{EpochRecord, SolveTrace};
use crate::error::{Error, Result};
use crate::linalg::{RunningAverage, Vector};
use crate::problems::{Loss, StochasticObjective};

/// `steps` projected SGD updates `w_{t+1} = Π[w_t − η∇f_t(w_t)]` from `w1`,
/// returning the average of `w_1, …, w_steps`.
///
/// The final update is still performed, so exactly `steps` losses are drawn.
pub fn sgd_epoch<O, R>(objective: &O, rng: &mut R, w1: &Vector, eta: f64, steps: usize) -> Result<Vector>
where
    O: StochasticObjective,
    R: Rng + ?Sized,
{
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid("eta", format!("must be positive, got {eta}")));
    }
    if steps == 0 {
        return Err(Error::invalid("steps", "must be at least 1"));
    }
    let domain = objective.domain();
    domain.ensure_contains(w1)?;
    let mut w = w1.clone();
    let mut average = RunningAverage::new(w.dim());
    for _ in 0..steps {
        average.push(&w)?;
        let g = objective.sample(rng).grad(&w)?;
        w.add_scaled(-eta, &g)?;
        w = domain.project(&w)?;
    }
    average.into_mean()
}

fn run_schedule<O, R>(objective: &O, rng: &mut R, schedule: &EpochSchedule, phase: u8, trace: &mut SolveTrace) -> Result<()>
where
    O: StochasticObjective,
    R: Rng + ?Sized,
{
    let mut w = trace.final_iterate.clone();
    for (step_size, length) in schedule.epochs() {
        w = sgd_epoch(objective, rng, &w, step_size, length)?;
        trace.push_epoch(
            EpochRecord {
                phase,
                step_size,
                length,
            },
            w.clone(),
        );
    }
    Ok(())
}

/// Epoch gradient descent: epochs of doubling length and halving step size,
/// each restarted from the previous epoch's average.
///
/// A budget below `first_length` runs nothing and returns `w0` flagged
/// degenerate.
pub fn epoch_gd<O, R>(
    objective: &O,
    rng: &mut R,
    first_step: f64,
    first_length: usize,
    budget: usize,
    w0: &Vector,
) -> Result<SolveTrace>
where
    O: StochasticObjective,
    R: Rng + ?Sized,
{
    let schedule = EpochSchedule::new(first_step, first_length, budget)?;
    objective.domain().ensure_contains(w0)?;
    let mut trace = SolveTrace::start(w0.clone());
    run_schedule(objective, rng, &schedule, 1, &mut trace)?;
    trace.degenerate = trace.epochs.is_empty();
    Ok(trace)
}

/// FASA: Epoch-GD with `(1/λ, 4, ⌊T/2⌋)` from `w_bar`, then Epoch-GD with
/// `(1/(4L), ⌈2^{α+3}κ⌉, ⌊T/2⌋)` from the first phase's output.
///
/// The trace is flagged degenerate if either phase runs no epoch, which
/// happens when `⌊T/2⌋ < ⌈2^{α+3}κ⌉`.
pub fn fasa<O, R>(
    objective: &O,
    rng: &mut R,
    smoothness: f64,
    strong_convexity: f64,
    budget: usize,
    alpha: f64,
    w_bar: &Vector,
) -> Result<SolveTrace>
where
    O: StochasticObjective,
    R: Rng + ?Sized,
{
    if !(smoothness > 0.0 && strong_convexity > 0.0) {
        return Err(Error::invalid("smoothness", "L and λ must be positive"));
    }
    let (second_step, second_length) = fasa_second_phase(smoothness, strong_convexity, alpha)?;
    objective.domain().ensure_contains(w_bar)?;
    let half = budget / 2;
    let first = EpochSchedule::new(1.0 / strong_convexity, 4, half)?;
    let second = EpochSchedule::new(second_step, second_length, half)?;

    let mut trace = SolveTrace::start(w_bar.clone());
    run_schedule(objective, rng, &first, 1, &mut trace)?;
    let first_ran = !trace.epochs.is_empty();
    run_schedule(objective, rng, &second, 2, &mut trace)?;
    let second_ran = trace.epochs.iter().any(|e| e.phase == 2);
    trace.degenerate = !(first_ran && second_ran);
    Ok(trace)
}

/// Epoch-GD with fixed step `η = 1/(4βL)` and fixed epoch length
/// `T′ = ⌈16βκ⌉`, running `⌊T/T′⌋` epochs.
pub fn epoch_gd_f<O, R>(objective: &O, rng: &mut R, beta: f64, budget: usize, w0: &Vector) -> Result<SolveTrace>
where
    O: StochasticObjective,
    R: Rng + ?Sized,
{
    check_beta(beta)?;
    let cert = objective.certificate();
    let (step_size, length) = fixed_epoch_parameters(cert.smoothness, cert.strong_convexity, beta)?;
    objective.domain().ensure_contains(w0)?;
    let mut trace = SolveTrace::start(w0.clone());
    let mut w = w0.clone();
    for _ in 0..budget / length {
        w = sgd_epoch(objective, rng, &w, step_size, length)?;
        trace.push_epoch(
            EpochRecord {
                phase: 1,
                step_size,
                length,
            },
            w.clone(),
        );
    }
    trace.degenerate = trace.epochs.is_empty();
    Ok(trace)
}
