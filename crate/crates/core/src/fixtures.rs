//! Reference systems used by tests, the CLI self-test and the acceptance suite.

use alloc::vec;

use crate::linalg::{c, identity, CMat, ZERO};
use crate::model::{MatrixPolynomial, NeutralSystem};

fn real(n: usize, m: usize, entries: &[f64]) -> CMat {
    CMat::from_row_slice(n, m, &entries.iter().map(|&x| c(x, 0.0)).collect::<alloc::vec::Vec<_>>())
}

/// `ż(t) = −ż(t−1) + A₀z(t)` with `A₀ = [[−b, s], [0, −b]]`; `det Δ(λ) = (λ + λe^{−λ} + b)²`.
///
/// For `s = 0` every root carries two eigenvectors; for `s ≠ 0` each root has a
/// Jordan chain of length two.
pub fn dilemma_system(b: f64, s: f64) -> NeutralSystem {
    let a0 = real(2, 2, &[-b, s, 0.0, -b]);
    NeutralSystem::with_a0(-identity(2), &a0, CMat::zeros(2, 0)).expect("valid fixture")
}

/// [`dilemma_system`] with input matrix `B = (0, 1)ᵀ`.
pub fn dilemma_system_controlled(b: f64, s: f64) -> NeutralSystem {
    dilemma_system(b, s).with_b(real(2, 1, &[0.0, 1.0])).expect("valid fixture")
}

/// `ż = −z` written through the lift: `A₋₁ = 0`, `A₀ = −1`; single root `λ = −1`.
pub fn scalar_decay() -> NeutralSystem {
    NeutralSystem::with_a0(CMat::zeros(1, 1), &real(1, 1, &[-1.0]), CMat::zeros(1, 0)).expect("valid fixture")
}

/// `ż(t) = ż(t−1) − z(t)`: `σ₁ = {1}`, roots `λ(1 − e^{−λ}) = −1` approach `2πik` from the left.
pub fn scalar_neutral() -> NeutralSystem {
    NeutralSystem::with_a0(identity(1), &real(1, 1, &[-1.0]), CMat::zeros(1, 0)).expect("valid fixture")
}

/// `ż(t) = A₋₁ż(t−1)` only: roots are `0` and `ln μ + 2πik` exactly.
pub fn pure_difference(a_minus1: CMat) -> NeutralSystem {
    NeutralSystem::uncontrolled(a_minus1, MatrixPolynomial::zero(), MatrixPolynomial::zero()).expect("valid fixture")
}

/// Mixed retarded-neutral system with singular `A₋₁ = diag(−1, 0)`.
pub fn mixed_singular() -> NeutralSystem {
    let a_m1 = real(2, 2, &[-1.0, 0.0, 0.0, 0.0]);
    let a0 = real(2, 2, &[-1.0, 0.5, 0.0, -2.0]);
    NeutralSystem::with_a0(a_m1, &a0, CMat::zeros(2, 0)).expect("valid fixture")
}

/// A system with a polynomial kernel of degree 2 and complex coefficients.
pub fn polynomial_kernel() -> NeutralSystem {
    let a_m1 = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), ZERO, c(0.1, 0.2), c(-0.3, 0.0)]);
    let a2 = MatrixPolynomial::new(vec![
        real(2, 2, &[-0.5, 0.1, 0.0, -0.4]),
        real(2, 2, &[0.2, 0.0, 0.1, 0.0]),
        real(2, 2, &[0.0, 0.3, 0.0, 0.1]),
    ]);
    let a3 = MatrixPolynomial::new(vec![real(2, 2, &[-1.0, 0.0, 0.2, -1.5]), real(2, 2, &[0.1, 0.0, 0.0, 0.2])]);
    NeutralSystem::uncontrolled(a_m1, a2, a3).expect("valid fixture")
}
