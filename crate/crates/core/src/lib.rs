//! Epoch-based stochastic approximation for smooth and strongly convex
//! stochastic objectives.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense vectors, the Euclidean ball domain and its projection.
//! * [`problems`]: synthetic stochastic oracles with certified constants
//!   (smoothness, strong convexity, gradient bound, minimal risk).
//! * [`solvers`]: projected SGD epochs, Epoch-GD, FASA, Epoch-GD-F and a
//!   fixed-step SGD baseline.
//! * [`harness`]: Monte-Carlo trials, theoretical risk bounds and rate fits.
//! * [`cli`]: configuration files, CSV tables and SVG plots.

pub mod cli;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod problems;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{BallDomain, Vector};
pub use problems::{ConstantsCertificate, ProblemSpec, SampledLoss};
