//! Randomised verification of a problem's certificate.

use std::fmt;

use rand::Rng;

use super::{Loss, ProblemSpec, StochasticObjective};
use crate::error::Result;
use crate::linalg::{squared_distance, Vector, DOMAIN_TOLERANCE};

/// Relative slack for the Lipschitz and gradient-bound checks.
pub const RELATIVE_SLACK: f64 = 1e-9;
/// Absolute slack for the self-bounding and strong-convexity checks.
pub const ABSOLUTE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AssumptionKind {
    Nonnegative,
    SmoothGradients,
    BoundedGradients,
    SelfBounding,
    StrongConvexity,
    ProjectionIdempotent,
    ProjectionNonexpansive,
    ProjectionMembership,
}

impl AssumptionKind {
    pub const ALL: [AssumptionKind; 8] = [
        AssumptionKind::Nonnegative,
        AssumptionKind::SmoothGradients,
        AssumptionKind::BoundedGradients,
        AssumptionKind::SelfBounding,
        AssumptionKind::StrongConvexity,
        AssumptionKind::ProjectionIdempotent,
        AssumptionKind::ProjectionNonexpansive,
        AssumptionKind::ProjectionMembership,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AssumptionKind::Nonnegative => "nonnegative",
            AssumptionKind::SmoothGradients => "smooth-gradients",
            AssumptionKind::BoundedGradients => "bounded-gradients",
            AssumptionKind::SelfBounding => "self-bounding",
            AssumptionKind::StrongConvexity => "strong-convexity",
            AssumptionKind::ProjectionIdempotent => "projection-idempotent",
            AssumptionKind::ProjectionNonexpansive => "projection-nonexpansive",
            AssumptionKind::ProjectionMembership => "projection-membership",
        }
    }
}

impl fmt::Display for AssumptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one randomised property check.
#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionCheck {
    pub kind: AssumptionKind,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed `lhs − rhs`; negative means every trial had margin.
    pub worst_violation: f64,
}

impl AssumptionCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Tally {
    kind: AssumptionKind,
    trials: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new(kind: AssumptionKind) -> Self {
        Tally {
            kind,
            trials: 0,
            failures: 0,
            worst: f64::NEG_INFINITY,
        }
    }

    /// Records `lhs ≤ rhs`.
    fn record(&mut self, lhs: f64, rhs: f64) {
        self.trials += 1;
        let gap = lhs - rhs;
        if !(gap <= 0.0) {
            self.failures += 1;
        }
        if gap > self.worst || gap.is_nan() {
            self.worst = gap;
        }
    }

    fn finish(self) -> AssumptionCheck {
        AssumptionCheck {
            kind: self.kind,
            trials: self.trials,
            failures: self.failures,
            worst_violation: self.worst,
        }
    }
}

/// A feasible point: uniform in the ball, or on its boundary one time in four.
fn feasible_point<R: Rng + ?Sized>(spec: &ProblemSpec, rng: &mut R) -> Vector {
    let domain = spec.domain();
    if rng.random_bool(0.25) {
        let dir = Vector::random_unit(domain.dim(), rng);
        domain.boundary_point(&dir).expect("unit direction")
    } else {
        domain.sample_uniform(rng)
    }
}

/// Runs `trials` randomised checks of every assumption against the
/// problem's certificate and returns one record per [`AssumptionKind`].
///
/// The strong-convexity check evaluates `F` exactly for least squares. For
/// logistic problems it carries three standard errors of the difference
/// between the pool risk at the optimum and the estimated `F*`.
pub fn check_assumptions<R: Rng + ?Sized>(
    spec: &ProblemSpec,
    trials: usize,
    rng: &mut R,
) -> Result<Vec<AssumptionCheck>> {
    let cert = spec.certificate().clone();
    let domain = spec.domain().clone();

    let mut nonneg = Tally::new(AssumptionKind::Nonnegative);
    let mut smooth = Tally::new(AssumptionKind::SmoothGradients);
    let mut bounded = Tally::new(AssumptionKind::BoundedGradients);
    let mut self_bounding = Tally::new(AssumptionKind::SelfBounding);
    for _ in 0..trials {
        let f = spec.sample(rng);
        let w = feasible_point(spec, rng);
        let w2 = feasible_point(spec, rng);
        let value = f.value(&w)?;
        let g = f.grad(&w)?;
        let g2 = f.grad(&w2)?;

        nonneg.record(0.0, value);
        smooth.record(
            g.sub(&g2)?.norm(),
            cert.smoothness * squared_distance(&w, &w2)?.sqrt() * (1.0 + RELATIVE_SLACK),
        );
        bounded.record(g.norm(), cert.grad_bound * (1.0 + RELATIVE_SLACK));
        self_bounding.record(g.norm_squared(), 4.0 * cert.smoothness * value + ABSOLUTE_SLACK);
    }

    let mut strong = Tally::new(AssumptionKind::StrongConvexity);
    let mc_slack = if cert.min_risk_exact {
        0.0
    } else {
        let at_opt = spec.expected_risk_estimate(spec.optimum())?;
        3.0 * (at_opt.std_error.powi(2) + cert.min_risk_std_error.powi(2)).sqrt()
    };
    for _ in 0..trials {
        let w = feasible_point(spec, rng);
        let excess = spec.expected_risk(&w)? - cert.min_risk;
        let dist = squared_distance(&w, spec.optimum())?;
        strong.record(
            0.5 * cert.strong_convexity * dist,
            excess + ABSOLUTE_SLACK + mc_slack,
        );
    }

    let mut idempotent = Tally::new(AssumptionKind::ProjectionIdempotent);
    let mut nonexpansive = Tally::new(AssumptionKind::ProjectionNonexpansive);
    let mut membership = Tally::new(AssumptionKind::ProjectionMembership);
    let wide = crate::linalg::BallDomain::new(domain.center().clone(), 3.0 * domain.radius())?;
    for _ in 0..trials {
        let a = wide.sample_uniform(rng);
        let b = wide.sample_uniform(rng);
        let pa = domain.project(&a)?;
        let pb = domain.project(&b)?;
        let ppa = domain.project(&pa)?;
        idempotent.record(squared_distance(&pa, &ppa)?.sqrt(), DOMAIN_TOLERANCE);
        nonexpansive.record(
            squared_distance(&pa, &pb)?.sqrt(),
            squared_distance(&a, &b)?.sqrt() + DOMAIN_TOLERANCE,
        );
        membership.record(domain.distance_from_center(&pa)?, domain.radius() + DOMAIN_TOLERANCE);
    }

    Ok(vec![
        nonneg.finish(),
        smooth.finish(),
        bounded.finish(),
        self_bounding.finish(),
        strong.finish(),
        idempotent.finish(),
        nonexpansive.finish(),
        membership.finish(),
    ])
}
