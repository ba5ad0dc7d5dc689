//! Binary correlated-source models and their exact statistics.
//!
//! Four models of `N` correlated equiprobable bits are supported (parallel,
//! serial and mixed BSC networks driven by a hidden common bit, and a
//! GF(2) linear model `A X = Z`). For each one the crate evaluates the joint
//! PMF, the covariance matrix, the joint entropy with its bounds and
//! asymptotic rate, and the subset conditional entropies that describe the
//! achievable region of orthogonal multiple access with correlated sources.

pub mod config;
pub mod entropy;
mod enumerate;
pub mod error;
pub mod gf2;
pub mod model;
pub mod moments;
pub mod region;

pub use config::{Tolerances, DEFAULT_ENUMERATION_CAP, TOLERANCES};
pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector};
pub use model::{cascade_flip_prob, ModelKind, ModelSpec, ModelTemplate, SourceRealization};
