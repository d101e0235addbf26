//! Spectral-Galerkin simulation of stochastic nonlinear Schrödinger equations
//!
//! ```text
//! du = iΔu dt + iλ|u|^{2σ}u dt − ½αu dt + g(u) dW,   u(0) = Ψ
//! ```
//!
//! with additive (`g = 1`) or multiplicative (`g(u) = iu`) Q-Wiener noise on
//! the Dirichlet interval `(0, π)` or the torus `[0, 2π)^d`, `d ∈ {1, 2}`.

pub mod basis;
pub mod config;
pub mod error;
pub mod field;
pub mod functionals;
pub mod experiments;
pub mod harness;
pub mod output;
pub mod noise;
pub mod rates;
pub mod schemes;
pub mod tails;

pub use basis::{Direction, DomainKind, Grid, SpectralBasis};
pub use error::{Error, Result};
pub use field::{Field, NormKind};
pub use functionals::DiagnosticsRow;
pub use noise::{aggregate_increments, sample_increment, Covariance, IncrementPlan, NoiseKind, NoiseModel};
pub use schemes::{SchemeConfig, SchemeId, Stepper};
