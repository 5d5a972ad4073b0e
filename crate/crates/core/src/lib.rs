//! Spectral analysis of linear neutral delay systems
//!
//! ```text
//! ż(t) = A₋₁ ż(t−1) + ∫₋₁⁰ A₂(θ) ż(t+θ) dθ + ∫₋₁⁰ A₃(θ) z(t+θ) dθ + B u(t)
//! ```
//!
//! with matrix-polynomial kernels `A₂`, `A₃` on `[−1, 0]`. The crate covers the
//! characteristic matrix `Δ(λ)` and its adjoint, root localization by the
//! argument principle, eigenvectors of the state operator and its adjoint,
//! the explicit resolvent, Pontryagin-type criteria for quasipolynomials,
//! the stability trichotomy driven by the unit-circle spectrum of `A₋₁`,
//! a method-of-steps simulator, and regular-stabilizability checks.
//!
//! Everything here is `no_std` + `alloc`; file formats, CLI and parallel
//! drivers live in the `neutral` companion crate.
#![no_std]
// float methods resolve inherently once the test harness links std
#![cfg_attr(test, allow(unused_imports))]
// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classify;
pub mod contour;
pub mod eigen;
mod error;
pub mod fixtures;
pub mod linalg;
pub mod model;
pub mod pontryagin;
pub mod quad;
pub mod sim;
pub mod spectrum;
pub mod stabilize;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
pub use model::{MatrixPolynomial, NeutralSystem, StateSegment};
