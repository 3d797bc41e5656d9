//! Weak-minimum tests for the simplest problem of the calculus of variations.
//!
//! Given an integrand `F(x, y, y′)`, an extremal `y(x)` and boundary conditions
//! (both ends fixed, or one end fixed and the other free with `y′ = 0`),
//! optionally with an integral constraint `∫ G dx = ℓ`, this crate decides
//! whether the second variation
//!
//! ```text
//! δ²J[h] = R h² |_a^b + ∫_a^b (P h′² + Q h²) dx
//! ```
//!
//! is positive definite over admissible variations. The primary route
//! integrates the Jacobi accessory equation `−(P u′)′ + Q u = 0` (and, with a
//! constraint, `−(P v′)′ + Q v = T` together with the moments `m = ∫ uT`,
//! `n = ∫ vT`) and looks for the first zero of `u` or of `Δ = m v − n u`
//! past `a`. The [`oracle`] module checks the same question independently by
//! discretizing the quadratic form with hat functions.
//!
//! [`catenary`] carries the two hanging-chain reference problems with closed
//! forms for every quantity involved.

pub mod accessory;
pub mod catenary;
pub mod conjugate;
mod error;
pub mod expression;
mod ode;
pub mod oracle;
pub mod problem;

pub use error::{Error, Result};
