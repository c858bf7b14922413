//! Numerical toolkit for quantum doubly stochastic (QDS) maps on
//! finite-dimensional matrix algebras: channel representations and
//! certification, induced Schatten p→p norms, spectral majorization with
//! constructive channel realization, entropy monotonicity, perturbation
//! stability, and finite-rank tail scans.
//!
//! Conventions, fixed crate-wide:
//! - Kraus action `Φ(x) = Σ Aᵢ x Aᵢ†`; trace-preserving ⇔ `Σ Aᵢ†Aᵢ = 1`,
//!   unital ⇔ `Σ AᵢAᵢ† = 1`.
//! - Column-stacking vectorization, so `superop(Φ) = Σ conj(Aᵢ) ⊗ Aᵢ`.
//! - Unnormalized Choi matrix `Σᵢⱼ Eᵢⱼ ⊗ Φ(Eᵢⱼ)` with trace = dim for a
//!   trace-preserving map.
//! - Entropies in nats; norms are Schatten norms of the singular values.

pub mod channels;
pub mod entropy;
pub mod error;
pub mod majorization;
pub mod matcore;
pub mod norms;
pub mod perturbation;
pub mod rng;
pub mod tol;
pub mod truncation;

pub use error::{QdsError, Result};
pub use tol::Tolerances;

/// Version string embedded in every CLI report.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
