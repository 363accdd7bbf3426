//! Fixed evaluation pool defining the logistic expected risk.

use rand::Rng;

use super::{dot, draw_logistic_pair, mean_and_std_error, sigmoid, softplus};
use crate::linalg::Vector;

/// Angular harmonics kept by the planar expansion.
const HARMONICS: usize = 64;
/// Quadrature nodes on the circle; twice [`HARMONICS`] so aliasing starts at
/// the first discarded harmonic.
const NODES: usize = 2 * HARMONICS;
/// Largest `‖w‖` served by the planar expansion. The coefficients of
/// `ψ ↦ softplus(−r·cos ψ)` decay like `exp(−n·asinh(π/r))`, which is below
/// `1e-20` at `n = HARMONICS` for `r ≤ 4`.
const PLANAR_RADIUS: f64 = 4.0;

/// Draws stored as signed instances `z = y·x`, since every pool quantity
/// depends on `(x, y)` only through `z`.
#[derive(Debug)]
pub(super) struct EvalPool {
    dim: usize,
    signed: Vec<f64>,
    planar: Option<Planar>,
}

/// In the plane every `z` is a unit vector `(cos θ, sin θ)`, so
/// `mean_i g(zᵢᵀw) = Σ_n b_n(‖w‖)·mean_i cos(n(θᵢ − φ))` where `b_n` are the
/// cosine coefficients of `ψ ↦ g(‖w‖ cos ψ)` and `φ` is the angle of `w`.
/// The pool enters only through its angular moments, so a risk evaluation
/// costs [`NODES`] loss evaluations instead of one per draw.
#[derive(Debug)]
struct Planar {
    /// `(mean cos nθ, mean sin nθ)` over the pool.
    moments: Vec<(f64, f64)>,
    /// `cos ψ_j` at the quadrature nodes.
    node_cos: Vec<f64>,
    /// `cos(n·ψ_j)`, row-major in `n`.
    basis: Vec<f64>,
}

impl Planar {
    fn new(signed: &[f64]) -> Self {
        let n = signed.len() / 2;
        let mut moments = vec![(0.0, 0.0); HARMONICS];
        for z in signed.chunks_exact(2) {
            let norm = z[0].hypot(z[1]);
            let (c1, s1) = (z[0] / norm, z[1] / norm);
            let (mut c, mut s) = (1.0, 0.0);
            for m in moments.iter_mut() {
                m.0 += c;
                m.1 += s;
                (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
            }
        }
        for m in moments.iter_mut() {
            m.0 /= n as f64;
            m.1 /= n as f64;
        }
        let psi = |j: usize| 2.0 * std::f64::consts::PI * j as f64 / NODES as f64;
        let node_cos = (0..NODES).map(|j| psi(j).cos()).collect();
        let basis = (0..HARMONICS)
            .flat_map(|h| (0..NODES).map(move |j| (h as f64 * psi(j)).cos()))
            .collect();
        Planar {
            moments,
            node_cos,
            basis,
        }
    }

    /// Pool means of `v` and `v²` where `v = softplus(−zᵀw) + ridge`.
    fn moments_of_loss(&self, w: &[f64], ridge: f64) -> (f64, f64) {
        let r = w[0].hypot(w[1]);
        let phi = w[1].atan2(w[0]);
        let samples: Vec<(f64, f64)> = self
            .node_cos
            .iter()
            .map(|c| {
                let v = softplus(-r * c) + ridge;
                (v, v * v)
            })
            .collect();
        let (mut mean, mut mean_sq) = (0.0, 0.0);
        for (h, (&(cm, sm), row)) in self.moments.iter().zip(self.basis.chunks_exact(NODES)).enumerate() {
            let (mut b, mut b2) = (0.0, 0.0);
            for (&(v, v2), &basis) in samples.iter().zip(row) {
                b += v * basis;
                b2 += v2 * basis;
            }
            let weight = if h == 0 { 1.0 } else { 2.0 } / NODES as f64;
            let hf = h as f64;
            let angular = cm * (hf * phi).cos() + sm * (hf * phi).sin();
            mean += weight * b * angular;
            mean_sq += weight * b2 * angular;
        }
        (mean, mean_sq)
    }
}

impl EvalPool {
    pub(super) fn draw<R: Rng + ?Sized>(dim: usize, latent: &Vector, size: usize, rng: &mut R) -> Self {
        let mut signed = Vec::with_capacity(dim * size);
        for _ in 0..size {
            let (x, y) = draw_logistic_pair(latent, rng);
            signed.extend(x.as_slice().iter().map(|xi| y * xi));
        }
        let planar = (dim == 2).then(|| Planar::new(&signed));
        EvalPool { dim, signed, planar }
    }

    fn len(&self) -> usize {
        self.signed.len() / self.dim
    }

    /// Mean and standard error of the loss over the pool.
    pub(super) fn risk(&self, w: &Vector, regularization: f64) -> (f64, f64) {
        match &self.planar {
            Some(planar) if w.norm() <= PLANAR_RADIUS => {
                let ridge = 0.5 * regularization * w.norm_squared();
                let (mean, mean_sq) = planar.moments_of_loss(w.as_slice(), ridge);
                let n = self.len() as f64;
                let var = ((mean_sq - mean * mean) * n / (n - 1.0)).max(0.0);
                (mean, (var / n).sqrt())
            }
            _ => self.risk_direct(w, regularization),
        }
    }

    /// Term-by-term pool mean.
    pub(super) fn risk_direct(&self, w: &Vector, regularization: f64) -> (f64, f64) {
        let ridge = 0.5 * regularization * w.norm_squared();
        let ws = w.as_slice();
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for z in self.signed.chunks_exact(self.dim) {
            let v = softplus(-dot(z, ws)) + ridge;
            sum += v;
            sum_sq += v * v;
        }
        mean_and_std_error(sum, sum_sq, self.len())
    }

    pub(super) fn grad(&self, w: &Vector, regularization: f64) -> Vector {
        let ws = w.as_slice();
        let mut g = vec![0.0; self.dim];
        for z in self.signed.chunks_exact(self.dim) {
            let coeff = -sigmoid(-dot(z, ws));
            for (gi, zi) in g.iter_mut().zip(z) {
                *gi += coeff * zi;
            }
        }
        let n = self.len() as f64;
        let mut out = Vector::new(g.into_iter().map(|v| v / n).collect()).expect("finite pool gradient");
        out.add_scaled(regularization, w).expect("matching dimensions");
        out
    }
}
