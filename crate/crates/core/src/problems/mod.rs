//! Synthetic stochastic objectives with certified constants.
//!
//! Every problem here draws random nonnegative smooth losses `f ~ P` and can
//! evaluate the expected risk `F(w) = E f(w)` either exactly (least squares)
//! or over a fixed evaluation pool (logistic regression), so that the excess
//! risk `F(w) − F*` is a computable test quantity.

mod assumptions;
mod pool;

pub use assumptions::{check_assumptions, AssumptionCheck, AssumptionKind};

use pool::EvalPool;

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{BallDomain, Vector};
use crate::rng;

/// Label sharpness of the logistic generative model.
pub const LOGISTIC_SHARPNESS: f64 = 4.0;
/// Size of the fixed pool that defines the logistic expected risk.
pub const LOGISTIC_POOL_SIZE: usize = 100_000;
/// Fresh draws used to estimate the logistic minimal risk.
pub const LOGISTIC_MIN_RISK_DRAWS: usize = 1_000_000;

const TAG_OPTIMUM: u64 = 1;
const TAG_POOL: u64 = 2;
const TAG_MIN_RISK: u64 = 3;

/// A single random loss function.
pub trait Loss {
    fn value(&self, w: &Vector) -> Result<f64>;
    fn grad(&self, w: &Vector) -> Result<Vector>;
}

/// A distribution over random losses, together with its domain and constants.
pub trait StochasticObjective {
    type Loss: Loss;

    fn domain(&self) -> &BallDomain;
    fn certificate(&self) -> &ConstantsCertificate;
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Loss;
}

/// Constants certified for a problem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsCertificate {
    /// Almost-sure smoothness `L` of every sampled loss.
    pub smoothness: f64,
    /// Strong-convexity modulus `λ` of the expected risk.
    pub strong_convexity: f64,
    /// `κ = L/λ`.
    pub condition_number: f64,
    /// Almost-sure bound `G` on the gradient norm over the domain.
    pub grad_bound: f64,
    /// Minimal risk `F*`.
    pub min_risk: f64,
    pub min_risk_exact: bool,
    /// Standard error of `min_risk`; zero when exact.
    pub min_risk_std_error: f64,
}

impl ConstantsCertificate {
    pub fn new(
        smoothness: f64,
        strong_convexity: f64,
        grad_bound: f64,
        min_risk: f64,
        min_risk_exact: bool,
        min_risk_std_error: f64,
    ) -> Result<Self> {
        for (name, value) in [
            ("smoothness", smoothness),
            ("strong_convexity", strong_convexity),
            ("grad_bound", grad_bound),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        if !(min_risk >= 0.0 && min_risk.is_finite()) {
            return Err(Error::invalid("min_risk", format!("must be nonnegative, got {min_risk}")));
        }
        let condition_number = smoothness / strong_convexity;
        if condition_number < 1.0 {
            return Err(Error::invalid(
                "strong_convexity",
                format!("condition number {condition_number} is below 1"),
            ));
        }
        Ok(ConstantsCertificate {
            smoothness,
            strong_convexity,
            condition_number,
            grad_bound,
            min_risk,
            min_risk_exact,
            min_risk_std_error,
        })
    }

    /// Same certificate with some constants replaced; `κ` is recomputed.
    pub fn with_overrides(
        &self,
        smoothness: Option<f64>,
        strong_convexity: Option<f64>,
        grad_bound: Option<f64>,
    ) -> Result<Self> {
        Self::new(
            smoothness.unwrap_or(self.smoothness),
            strong_convexity.unwrap_or(self.strong_convexity),
            grad_bound.unwrap_or(self.grad_bound),
            self.min_risk,
            self.min_risk_exact,
            self.min_risk_std_error,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    LeastSquares,
    Logistic,
}

/// Generator inputs; enough to rebuild a [`ProblemSpec`] bit-exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemParams {
    LeastSquares {
        dim: usize,
        scale: Vec<f64>,
        radius: f64,
        noise_halfwidth: f64,
        seed: u64,
    },
    Logistic {
        dim: usize,
        radius: f64,
        regularization: f64,
        seed: u64,
    },
}

impl ProblemParams {
    pub fn build(&self) -> Result<ProblemSpec> {
        match self {
            ProblemParams::LeastSquares {
                dim,
                scale,
                radius,
                noise_halfwidth,
                seed,
            } => make_least_squares(*dim, scale, *radius, *noise_halfwidth, *seed),
            ProblemParams::Logistic {
                dim,
                radius,
                regularization,
                seed,
            } => make_logistic(*dim, *radius, *regularization, *seed),
        }
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemParams::LeastSquares { .. } => ProblemKind::LeastSquares,
            ProblemParams::Logistic { .. } => ProblemKind::Logistic,
        }
    }
}

#[derive(Clone, Debug)]
enum Model {
    LeastSquares {
        scale: Vector,
        noise_halfwidth: f64,
    },
    Logistic {
        regularization: f64,
        latent: Vector,
        pool: Arc<EvalPool>,
    },
}

/// A stochastic optimization instance with its certified constants.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    params: ProblemParams,
    domain: BallDomain,
    optimum: Vector,
    certificate: ConstantsCertificate,
    model: Model,
}

/// Expected risk together with its Monte-Carlo standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Least squares `f(w) = (xᵀw − y)²` with `x = diag(D)·z`, `z` uniform on the
/// unit sphere and `y = xᵀw* + ε`, `ε ~ U[−a, a]`.
pub fn make_least_squares(
    dim: usize,
    scale: &[f64],
    radius: f64,
    noise_halfwidth: f64,
    seed: u64,
) -> Result<ProblemSpec> {
    if dim == 0 {
        return Err(Error::invalid("dim", "must be at least 1"));
    }
    if scale.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: scale.len(),
        });
    }
    if let Some(bad) = scale.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(Error::invalid("scale", format!("entries must be positive, got {bad}")));
    }
    if !(noise_halfwidth >= 0.0 && noise_halfwidth.is_finite()) {
        return Err(Error::invalid(
            "noise_halfwidth",
            format!("must be nonnegative, got {noise_halfwidth}"),
        ));
    }
    let domain = BallDomain::centered(dim, radius)?;
    let optimum = Vector::random_unit(dim, &mut rng::stream(seed, &[TAG_OPTIMUM])).scale(radius / 2.0);

    let max_scale = scale.iter().copied().fold(0.0, f64::max);
    let min_scale = scale.iter().copied().fold(f64::INFINITY, f64::min);
    let label_bound = max_scale * optimum.norm() + noise_halfwidth;
    let certificate = ConstantsCertificate::new(
        2.0 * max_scale * max_scale,
        2.0 * min_scale * min_scale / dim as f64,
        2.0 * max_scale * (max_scale * domain.max_norm() + label_bound),
        noise_halfwidth * noise_halfwidth / 3.0,
        true,
        0.0,
    )?;

    Ok(ProblemSpec {
        params: ProblemParams::LeastSquares {
            dim,
            scale: scale.to_vec(),
            radius,
            noise_halfwidth,
            seed,
        },
        domain,
        optimum,
        certificate,
        model: Model::LeastSquares {
            scale: Vector::new(scale.to_vec())?,
            noise_halfwidth,
        },
    })
}

/// Ridge-regularised logistic regression
/// `f(w) = log(1 + exp(−y·xᵀw)) + (μ/2)‖w‖²` with `x` uniform on the unit
/// sphere and `P(y = +1 | x) = sigmoid(s·xᵀw_latent)`.
///
/// The expected risk is the mean over a fixed seed-determined pool of
/// [`LOGISTIC_POOL_SIZE`] draws; the optimum is the pool risk's constrained
/// minimiser and `F*` is re-estimated on [`LOGISTIC_MIN_RISK_DRAWS`] fresh
/// draws.
pub fn make_logistic(dim: usize, radius: f64, regularization: f64, seed: u64) -> Result<ProblemSpec> {
    if dim == 0 {
        return Err(Error::invalid("dim", "must be at least 1"));
    }
    if !(regularization > 0.0 && regularization.is_finite()) {
        return Err(Error::invalid(
            "regularization",
            format!("must be positive, got {regularization}"),
        ));
    }
    let domain = BallDomain::centered(dim, radius)?;
    let latent = Vector::random_unit(dim, &mut rng::stream(seed, &[TAG_OPTIMUM])).scale(radius / 2.0);
    let pool = EvalPool::draw(dim, &latent, LOGISTIC_POOL_SIZE, &mut rng::stream(seed, &[TAG_POOL]));

    let smoothness = 0.25 + regularization;
    let optimum = minimise_pool_risk(&pool, &domain, regularization, smoothness)?;

    let mut fresh = rng::stream(seed, &[TAG_MIN_RISK]);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..LOGISTIC_MIN_RISK_DRAWS {
        let (x, y) = draw_logistic_pair(&latent, &mut fresh);
        let v = logistic_value(&x, y, regularization, &optimum);
        sum += v;
        sum_sq += v * v;
    }
    let (min_risk, min_risk_se) = mean_and_std_error(sum, sum_sq, LOGISTIC_MIN_RISK_DRAWS);

    let certificate = ConstantsCertificate::new(
        smoothness,
        regularization,
        1.0 + regularization * domain.max_norm(),
        min_risk,
        false,
        min_risk_se,
    )?;

    Ok(ProblemSpec {
        params: ProblemParams::Logistic {
            dim,
            radius,
            regularization,
            seed,
        },
        domain,
        optimum,
        certificate,
        model: Model::Logistic {
            regularization,
            latent,
            pool: Arc::new(pool),
        },
    })
}

/// Projected gradient descent with step `1/L` on the pool risk.
fn minimise_pool_risk(
    pool: &EvalPool,
    domain: &BallDomain,
    regularization: f64,
    smoothness: f64,
) -> Result<Vector> {
    let mut w = domain.center().clone();
    for _ in 0..10_000 {
        let g = pool.grad(&w, regularization);
        let mut next = w.clone();
        next.add_scaled(-1.0 / smoothness, &g)?;
        let next = domain.project(&next)?;
        let moved = crate::linalg::squared_distance(&next, &w)?.sqrt();
        w = next;
        if moved < 1e-14 {
            break;
        }
    }
    Ok(w)
}

impl ProblemSpec {
    pub fn kind(&self) -> ProblemKind {
        self.params.kind()
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn optimum(&self) -> &Vector {
        &self.optimum
    }

    /// Latent parameter of the logistic label model.
    pub fn latent(&self) -> Option<&Vector> {
        match &self.model {
            Model::Logistic { latent, .. } => Some(latent),
            Model::LeastSquares { .. } => None,
        }
    }

    /// Replaces the certificate, e.g. to test that a wrong constant is caught.
    pub fn with_certificate(mut self, certificate: ConstantsCertificate) -> Self {
        self.certificate = certificate;
        self
    }

    /// `F(w)`; errors outside the domain.
    pub fn expected_risk(&self, w: &Vector) -> Result<f64> {
        Ok(self.expected_risk_estimate(w)?.value)
    }

    pub fn expected_risk_estimate(&self, w: &Vector) -> Result<RiskEstimate> {
        self.domain.ensure_contains(w)?;
        self.risk_extended(w)
    }

    /// The expected risk formula evaluated anywhere in space. Used for
    /// unconstrained iterates, which may leave the domain.
    pub fn risk_extended(&self, w: &Vector) -> Result<RiskEstimate> {
        w.check_dim(self.dim())?;
        match &self.model {
            Model::LeastSquares { scale, .. } => {
                let dim = self.dim() as f64;
                let quad: f64 = w
                    .as_slice()
                    .iter()
                    .zip(self.optimum.as_slice())
                    .zip(scale.as_slice())
                    .map(|((wi, oi), si)| si * si * (wi - oi) * (wi - oi))
                    .sum::<f64>()
                    / dim;
                Ok(RiskEstimate {
                    value: quad + self.certificate.min_risk,
                    std_error: 0.0,
                })
            }
            Model::Logistic {
                regularization, pool, ..
            } => {
                let (value, std_error) = pool.risk(w, *regularization);
                Ok(RiskEstimate { value, std_error })
            }
        }
    }

    /// `F(w) − F*`.
    pub fn excess_risk(&self, w: &Vector) -> Result<f64> {
        Ok(self.expected_risk(w)? - self.certificate.min_risk)
    }

    /// `∇F(w)`: closed form for least squares, pool mean for logistic.
    pub fn expected_grad(&self, w: &Vector) -> Result<Vector> {
        w.check_dim(self.dim())?;
        match &self.model {
            Model::LeastSquares { scale, .. } => {
                let dim = self.dim() as f64;
                Vector::new(
                    w.as_slice()
                        .iter()
                        .zip(self.optimum.as_slice())
                        .zip(scale.as_slice())
                        .map(|((wi, oi), si)| 2.0 * si * si * (wi - oi) / dim)
                        .collect(),
                )
            }
            Model::Logistic {
                regularization, pool, ..
            } => Ok(pool.grad(w, *regularization)),
        }
    }
}

impl StochasticObjective for ProblemSpec {
    type Loss = SampledLoss;

    fn domain(&self) -> &BallDomain {
        &self.domain
    }

    fn certificate(&self) -> &ConstantsCertificate {
        &self.certificate
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SampledLoss {
        match &self.model {
            Model::LeastSquares {
                scale,
                noise_halfwidth,
            } => {
                let z = Vector::random_unit(self.dim(), rng);
                let x = Vector::new(
                    z.as_slice()
                        .iter()
                        .zip(scale.as_slice())
                        .map(|(zi, si)| zi * si)
                        .collect(),
                )
                .expect("finite instance");
                let u: f64 = rng.random();
                let noise = noise_halfwidth * (2.0 * u - 1.0);
                let y = dot(x.as_slice(), self.optimum.as_slice()) + noise;
                SampledLoss::LeastSquares { x, y }
            }
            Model::Logistic {
                regularization, latent, ..
            } => {
                let (x, y) = draw_logistic_pair(latent, rng);
                SampledLoss::Logistic {
                    x,
                    y,
                    regularization: *regularization,
                }
            }
        }
    }
}

/// One draw `f ~ P`.
#[derive(Clone, Debug, PartialEq)]
pub enum SampledLoss {
    /// `(xᵀw − y)²`
    LeastSquares { x: Vector, y: f64 },
    /// `log(1 + exp(−y·xᵀw)) + (μ/2)‖w‖²`, `y ∈ {−1, +1}`
    Logistic { x: Vector, y: f64, regularization: f64 },
}

impl Loss for SampledLoss {
    fn value(&self, w: &Vector) -> Result<f64> {
        match self {
            SampledLoss::LeastSquares { x, y } => {
                let r = x.dot(w)? - y;
                Ok(r * r)
            }
            SampledLoss::Logistic { x, y, regularization } => {
                w.check_dim(x.dim())?;
                Ok(logistic_value(x, *y, *regularization, w))
            }
        }
    }

    fn grad(&self, w: &Vector) -> Result<Vector> {
        match self {
            SampledLoss::LeastSquares { x, y } => {
                let r = x.dot(w)? - y;
                Ok(x.scale(2.0 * r))
            }
            SampledLoss::Logistic { x, y, regularization } => {
                let margin = y * x.dot(w)?;
                let mut g = x.scale(-y * sigmoid(-margin));
                g.add_scaled(*regularization, w)?;
                Ok(g)
            }
        }
    }
}

/// Sample variance of the stochastic gradient with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Unbiased estimate of `E‖g − E g‖²` at `w` from `n` fresh draws.
pub fn estimate_grad_variance<O, R>(objective: &O, w: &Vector, n: usize, rng: &mut R) -> Result<VarianceEstimate>
where
    O: StochasticObjective,
    R: Rng + ?Sized,
{
    if n < 2 {
        return Err(Error::invalid("n", format!("need at least 2 draws, got {n}")));
    }
    objective.domain().ensure_contains(w)?;
    let grads = (0..n)
        .map(|_| objective.sample(rng).grad(w))
        .collect::<Result<Vec<_>>>()?;
    let mut mean = crate::linalg::RunningAverage::new(w.dim());
    for g in &grads {
        mean.push(g)?;
    }
    let mean = mean.into_mean()?;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for g in &grads {
        let s = crate::linalg::squared_distance(g, &mean)?;
        sum += s;
        sum_sq += s * s;
    }
    let (mean_dev, se_dev) = mean_and_std_error(sum, sum_sq, n);
    let correction = n as f64 / (n - 1) as f64;
    Ok(VarianceEstimate {
        value: mean_dev * correction,
        std_error: se_dev * correction,
        samples: n,
    })
}

fn draw_logistic_pair<R: Rng + ?Sized>(latent: &Vector, rng: &mut R) -> (Vector, f64) {
    let x = Vector::random_unit(latent.dim(), rng);
    let p = sigmoid(LOGISTIC_SHARPNESS * dot(x.as_slice(), latent.as_slice()));
    let u: f64 = rng.random();
    let y = if u < p { 1.0 } else { -1.0 };
    (x, y)
}

fn logistic_value(x: &Vector, y: f64, regularization: f64, w: &Vector) -> f64 {
    let margin = y * dot(x.as_slice(), w.as_slice());
    softplus(-margin) + 0.5 * regularization * w.norm_squared()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log(1 + exp(z))` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn mean_and_std_error(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}
