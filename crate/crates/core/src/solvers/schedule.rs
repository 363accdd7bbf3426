use crate::error::{Error, Result};

/// Epoch-GD schedule: `T_{k+1} = 2T_k`, `η_{k+1} = η_k/2`, and epoch `k`
/// runs only while `Σ_{i≤k} T_i ≤ T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochSchedule {
    pub first_step: f64,
    pub first_length: usize,
    pub budget: usize,
}

impl EpochSchedule {
    pub fn new(first_step: f64, first_length: usize, budget: usize) -> Result<Self> {
        if !(first_step > 0.0 && first_step.is_finite()) {
            return Err(Error::invalid("eta1", format!("must be positive, got {first_step}")));
        }
        if first_length == 0 {
            return Err(Error::invalid("t1", "first epoch must have at least one step"));
        }
        Ok(EpochSchedule {
            first_step,
            first_length,
            budget,
        })
    }

    /// `(η_k, T_k)` for every epoch that fits in the budget.
    pub fn epochs(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        let mut used = 0usize;
        let mut step = self.first_step;
        let mut length = self.first_length;
        std::iter::from_fn(move || {
            let total = used.checked_add(length)?;
            if total > self.budget {
                return None;
            }
            let epoch = (step, length);
            used = total;
            step /= 2.0;
            length = length.saturating_mul(2);
            Some(epoch)
        })
    }

    /// Number of completed epochs `k†`, the largest `k` with `T₁(2ᵏ − 1) ≤ T`.
    pub fn completed_epochs(&self) -> usize {
        self.epochs().count()
    }

    /// `T₁(2^{k†} − 1)`.
    pub fn gradients(&self) -> usize {
        self.epochs().map(|(_, len)| len).sum()
    }
}

/// Rounds an epoch length up to an integer, treating values within a relative
/// `1e-9` of an integer as that integer so that `κ = L/λ` rounding noise
/// cannot add a step.
pub fn epoch_length(raw: f64) -> Result<usize> {
    if !(raw > 0.0 && raw.is_finite()) {
        return Err(Error::invalid("epoch length", format!("must be positive, got {raw}")));
    }
    let nearest = raw.round();
    let len = if (raw - nearest).abs() <= 1e-9 * raw {
        nearest
    } else {
        raw.ceil()
    };
    Ok((len as usize).max(1))
}

/// Second-phase parameters of FASA: `η₁ = 1/(4L)`, `T₁ = ⌈2^{α+3}κ⌉`.
pub fn fasa_second_phase(smoothness: f64, strong_convexity: f64, alpha: f64) -> Result<(f64, usize)> {
    check_alpha(alpha)?;
    let kappa = smoothness / strong_convexity;
    Ok((
        1.0 / (4.0 * smoothness),
        epoch_length(2f64.powf(alpha + 3.0) * kappa)?,
    ))
}

/// Epoch-GD-F parameters: `η = 1/(4βL)`, `T′ = ⌈16βκ⌉`.
pub fn fixed_epoch_parameters(smoothness: f64, strong_convexity: f64, beta: f64) -> Result<(f64, usize)> {
    check_beta(beta)?;
    let kappa = smoothness / strong_convexity;
    Ok((1.0 / (4.0 * beta * smoothness), epoch_length(16.0 * beta * kappa)?))
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::invalid(
            "alpha",
            format!("α > 1 is some constant; got {alpha}"),
        ));
    }
    Ok(())
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", format!("β > 1 is some constant; got {beta}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `⌊log₂(T/(2T₁) + 1)⌋`: epochs in a call with budget `T/2`.
    fn closed_form_half_budget(total: usize, first: usize) -> usize {
        ((total as f64 / (2.0 * first as f64)) + 1.0).log2().floor() as usize
    }

    #[test]
    fn doubling_epochs_fit_budget() {
        let s = EpochSchedule::new(1.0, 4, 56).unwrap();
        let lens: Vec<usize> = s.epochs().map(|(_, l)| l).collect();
        assert_eq!(lens, vec![4, 8, 16]);
        assert_eq!(s.gradients(), 28);
        assert_eq!(s.completed_epochs(), 3);
        assert_eq!(EpochSchedule::new(1.0, 4, 28).unwrap().completed_epochs(), 3);
        assert_eq!(EpochSchedule::new(1.0, 4, 59).unwrap().completed_epochs(), 3);
        assert_eq!(EpochSchedule::new(1.0, 4, 60).unwrap().completed_epochs(), 4);
        assert_eq!(EpochSchedule::new(1.0, 4, 3).unwrap().completed_epochs(), 0);
    }

    #[test]
    fn step_sizes_halve_and_lengths_double() {
        let s = EpochSchedule::new(0.5, 3, 10_000).unwrap();
        let epochs: Vec<_> = s.epochs().collect();
        for pair in epochs.windows(2) {
            assert_eq!(pair[1].0, pair[0].0 / 2.0);
            assert_eq!(pair[1].1, pair[0].1 * 2);
        }
    }

    #[test]
    fn counting_matches_closed_form() {
        assert_eq!(closed_form_half_budget(56, 4), 3);
        for first in [1usize, 3, 4, 7, 128] {
            for total in 0..5_000usize {
                let counted = EpochSchedule::new(1.0, first, total / 2).unwrap().completed_epochs();
                assert_eq!(counted, closed_form_half_budget(total, first), "T={total} T1={first}");
            }
        }
    }

    #[test]
    fn fasa_parameters() {
        let (eta, t1) = fasa_second_phase(2.0, 0.5, 2.0).unwrap();
        assert_eq!(eta, 1.0 / 8.0);
        assert_eq!(t1, 128);
        assert!(fasa_second_phase(2.0, 0.5, 1.0).unwrap_err().to_string().contains("α > 1"));
    }

    #[test]
    fn fixed_epoch_parameter_values() {
        let (eta, len) = fixed_epoch_parameters(2.0, 0.5, 2.0).unwrap();
        assert_eq!(eta, 1.0 / 16.0);
        assert_eq!(len, 128);
        assert!(fixed_epoch_parameters(2.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn epoch_length_rounding() {
        assert_eq!(epoch_length(128.0).unwrap(), 128);
        assert_eq!(epoch_length(128.000_000_000_01).unwrap(), 128);
        assert_eq!(epoch_length(127.2).unwrap(), 128);
        assert_eq!(epoch_length(0.3).unwrap(), 1);
        assert!(epoch_length(0.0).is_err());
    }
}
