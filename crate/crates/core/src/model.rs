//! System definition and the characteristic matrices `Δ(λ)`, `Δ*(λ)`, `Δ′(λ)`.

use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;

use crate::linalg::{identity, is_finite_mat, is_finite_vec, CMat, CVec, C64};
use crate::quad::{cumulative_fourth_order_vec, cumulative_trapezoid_vec, exp_poly_integrals, trapezoid_vec};
use crate::{Error, Result};

/// Highest kernel degree accepted by [`NeutralSystem::new`].
pub const MAX_DEGREE: usize = 8;

/// Largest supported state dimension.
pub const MAX_DIM: usize = 32;

/// `A(θ) = Σⱼ Cⱼ θʲ` on `θ ∈ [−1, 0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolynomial {
    coeffs: Vec<CMat>,
}

impl MatrixPolynomial {
    /// Coefficients in ascending powers of θ. An empty list is the zero kernel.
    pub fn new(coeffs: Vec<CMat>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c0: CMat) -> Self {
        Self { coeffs: alloc::vec![c0] }
    }

    pub fn coeffs(&self) -> &[CMat] {
        &self.coeffs
    }

    /// Degree of the coefficient list (`0` for the zero kernel).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|z| z.norm() == 0.0))
    }

    pub fn eval(&self, theta: f64, n: usize) -> CMat {
        let mut acc = CMat::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = acc * C64::new(theta, 0.0) + c;
        }
        acc
    }

    /// Conjugate-transposed coefficients.
    pub fn adjoint(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.adjoint()).collect() }
    }

    /// `Σⱼ Cⱼ wⱼ`.
    fn weighted(&self, w: &[C64], n: usize) -> CMat {
        let mut acc = CMat::zeros(n, n);
        for (c, &wj) in self.coeffs.iter().zip(w) {
            acc += c * wj;
        }
        acc
    }

    /// `Σⱼ Cⱼ w_{j+1}`, i.e. the same integrals against `θ A(θ)`.
    fn weighted_shift(&self, w: &[C64], n: usize) -> CMat {
        let mut acc = CMat::zeros(n, n);
        for (c, &wj) in self.coeffs.iter().zip(&w[1..]) {
            acc += c * wj;
        }
        acc
    }
}

/// `ż(t) = A₋₁ż(t−1) + ∫A₂(θ)ż(t+θ)dθ + ∫A₃(θ)z(t+θ)dθ + Bu(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NeutralSystem {
    n: usize,
    a_minus1: CMat,
    a2: MatrixPolynomial,
    a3: MatrixPolynomial,
    b: CMat,
}

impl NeutralSystem {
    pub fn new(a_minus1: CMat, a2: MatrixPolynomial, a3: MatrixPolynomial, b: CMat) -> Result<Self> {
        let n = a_minus1.nrows();
        if n == 0 || n > MAX_DIM {
            return Err(Error::InvalidInput(format!("dimension n = {n} outside 1..={MAX_DIM}")));
        }
        if a_minus1.ncols() != n {
            return Err(Error::DimensionMismatch { context: "A₋₁ columns", expected: n, found: a_minus1.ncols() });
        }
        for (name, poly) in [("A₂", &a2), ("A₃", &a3)] {
            if poly.degree() > MAX_DEGREE {
                return Err(Error::DegreeTooLarge { degree: poly.degree(), max: MAX_DEGREE });
            }
            for c in poly.coeffs() {
                if c.nrows() != n || c.ncols() != n {
                    let found = if c.nrows() != n { c.nrows() } else { c.ncols() };
                    return Err(Error::DimensionMismatch { context: name_ctx(name), expected: n, found });
                }
                if !is_finite_mat(c) {
                    return Err(Error::NonFinite(name_ctx(name)));
                }
            }
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch { context: "B rows", expected: n, found: b.nrows() });
        }
        if !is_finite_mat(&a_minus1) {
            return Err(Error::NonFinite("A₋₁"));
        }
        if !is_finite_mat(&b) {
            return Err(Error::NonFinite("B"));
        }
        Ok(Self { n, a_minus1, a2, a3, b })
    }

    /// Uncontrolled system (`p = 0`).
    pub fn uncontrolled(a_minus1: CMat, a2: MatrixPolynomial, a3: MatrixPolynomial) -> Result<Self> {
        let n = a_minus1.nrows();
        Self::new(a_minus1, a2, a3, CMat::zeros(n, 0))
    }

    /// `ż(t) = A₋₁ż(t−1) + A₀z(t) + Bu` through [`lift_pointwise_delay`].
    pub fn with_a0(a_minus1: CMat, a0: &CMat, b: CMat) -> Result<Self> {
        let (a2, a3) = lift_pointwise_delay(a0)?;
        Self::new(a_minus1, a2, a3, b)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.b.ncols()
    }

    pub fn a_minus1(&self) -> &CMat {
        &self.a_minus1
    }

    pub fn a2(&self) -> &MatrixPolynomial {
        &self.a2
    }

    pub fn a3(&self) -> &MatrixPolynomial {
        &self.a3
    }

    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn with_b(&self, b: CMat) -> Result<Self> {
        Self::new(self.a_minus1.clone(), self.a2.clone(), self.a3.clone(), b)
    }

    /// The system built from conjugate-transposed coefficients (input matrix dropped).
    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            a_minus1: self.a_minus1.adjoint(),
            a2: self.a2.adjoint(),
            a3: self.a3.adjoint(),
            b: CMat::zeros(self.n, 0),
        }
    }

    fn max_power(&self) -> usize {
        self.a2.coeffs.len().max(self.a3.coeffs.len()) + 1
    }
}

fn name_ctx(name: &str) -> &'static str {
    if name == "A₂" {
        "A₂ coefficient"
    } else {
        "A₃ coefficient"
    }
}

/// `Δ(λ) = −λI + λe^{−λ}A₋₁ + λ∫e^{λs}A₂(s)ds + ∫e^{λs}A₃(s)ds`.
pub fn char_matrix(sys: &NeutralSystem, lambda: C64) -> CMat {
    let n = sys.n;
    let w = exp_poly_integrals(lambda, sys.max_power());
    let e = (-lambda).exp();
    let mut m = identity(n) * (-lambda);
    m += &sys.a_minus1 * (lambda * e);
    m += sys.a2.weighted(&w, n) * lambda;
    m += sys.a3.weighted(&w, n);
    m
}

/// `Δ*(λ)`: the characteristic matrix of the conjugate-transposed coefficients.
pub fn char_matrix_adjoint(sys: &NeutralSystem, lambda: C64) -> CMat {
    char_matrix(&sys.adjoint(), lambda)
}

/// `Δ′(λ) = −I + (e^{−λ} − λe^{−λ})A₋₁ + ∫e^{λs}(A₂(s) + sλA₂(s) + sA₃(s))ds`.
pub fn char_matrix_derivative(sys: &NeutralSystem, lambda: C64) -> CMat {
    let n = sys.n;
    let w = exp_poly_integrals(lambda, sys.max_power());
    let e = (-lambda).exp();
    let mut m = -identity(n);
    m += &sys.a_minus1 * (e - lambda * e);
    m += sys.a2.weighted(&w, n);
    m += sys.a2.weighted_shift(&w, n) * lambda;
    m += sys.a3.weighted_shift(&w, n);
    m
}

/// Both `Δ(λ)` and `Δ′(λ)` from one set of exponential integrals.
pub fn char_matrix_with_derivative(sys: &NeutralSystem, lambda: C64) -> (CMat, CMat) {
    let n = sys.n;
    let w = exp_poly_integrals(lambda, sys.max_power());
    let e = (-lambda).exp();
    let a2w = sys.a2.weighted(&w, n);
    let mut d = identity(n) * (-lambda);
    d += &sys.a_minus1 * (lambda * e);
    d += &a2w * lambda;
    d += sys.a3.weighted(&w, n);
    let mut dp = -identity(n);
    dp += &sys.a_minus1 * (e - lambda * e);
    dp += a2w;
    dp += sys.a2.weighted_shift(&w, n) * lambda;
    dp += sys.a3.weighted_shift(&w, n);
    (d, dp)
}

/// `A₂(θ) = (θ+1)A₀`, `A₃(θ) = A₀`.
///
/// Integrating by parts, `∫(θ+1)A₀ż(t+θ)dθ + ∫A₀z(t+θ)dθ = A₀z(t)`, so the lifted
/// system carries the pointwise term `A₀z(t)` and `Δ(λ) = −λI + λe^{−λ}A₋₁ + A₀`.
pub fn lift_pointwise_delay(a0: &CMat) -> Result<(MatrixPolynomial, MatrixPolynomial)> {
    if a0.nrows() != a0.ncols() {
        return Err(Error::DimensionMismatch { context: "A₀ columns", expected: a0.nrows(), found: a0.ncols() });
    }
    Ok((MatrixPolynomial::new(alloc::vec![a0.clone(), a0.clone()]), MatrixPolynomial::constant(a0.clone())))
}

/// An element `(y, z(·))` of `ℂⁿ × L₂(−1, 0; ℂⁿ)` with `z` sampled at `θᵢ = −1 + i/M`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSegment {
    pub y: CVec,
    pub z: Vec<CVec>,
}

impl StateSegment {
    pub const MIN_INTERVALS: usize = 8;

    pub fn new(y: CVec, z: Vec<CVec>) -> Result<Self> {
        let n = y.len();
        if z.len() < Self::MIN_INTERVALS + 1 {
            return Err(Error::InvalidInput(format!(
                "segment needs at least {} grid intervals, got {}",
                Self::MIN_INTERVALS,
                z.len().saturating_sub(1)
            )));
        }
        if let Some(bad) = z.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { context: "segment sample", expected: n, found: bad.len() });
        }
        if !is_finite_vec(&y) || !z.iter().all(is_finite_vec) {
            return Err(Error::NonFinite("state segment"));
        }
        Ok(Self { y, z })
    }

    /// Samples `f` on the grid with `m` intervals.
    pub fn from_fn<F: Fn(f64) -> CVec>(y: CVec, m: usize, f: F) -> Result<Self> {
        let z = grid(m).map(f).collect();
        Self::new(y, z)
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self { y: CVec::zeros(n), z: alloc::vec![CVec::zeros(n); m + 1] }
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of grid intervals `M`.
    pub fn intervals(&self) -> usize {
        self.z.len() - 1
    }

    pub fn step(&self) -> f64 {
        1.0 / self.intervals() as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        theta(i, self.intervals())
    }

    pub fn scale(&self, a: C64) -> Self {
        Self { y: &self.y * a, z: self.z.iter().map(|v| v * a).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { y: &self.y + &other.y, z: self.z.iter().zip(&other.z).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// `√(|y|² + ∫|z|²)` with the trapezoid rule.
    pub fn norm(&self) -> f64 {
        let h = self.step();
        let sq: Vec<C64> = self.z.iter().map(|v| C64::new(v.norm_squared(), 0.0)).collect();
        Float::sqrt(self.y.norm_squared() + crate::quad::trapezoid(&sq, h).re)
    }
}

pub fn theta(i: usize, m: usize) -> f64 {
    -1.0 + i as f64 / m as f64
}

/// `θᵢ = −1 + i/M` for `i = 0..=M`.
pub fn grid(m: usize) -> impl Iterator<Item = f64> {
    (0..=m).map(move |i| theta(i, m))
}

/// Quadrature rule used for the integrals over `[−1, 0]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Rule {
    Trapezoid,
    FourthOrder,
}

impl Rule {
    fn cumulative(self, values: &[CVec], h: f64) -> Vec<CVec> {
        match self {
            Rule::Trapezoid => cumulative_trapezoid_vec(values, h),
            Rule::FourthOrder => cumulative_fourth_order_vec(values, h),
        }
    }

    fn total(self, values: &[CVec], h: f64) -> CVec {
        match self {
            Rule::Trapezoid => trapezoid_vec(values, h),
            Rule::FourthOrder => self.cumulative(values, h).pop().expect("non-empty grid"),
        }
    }
}

/// `J(θ) = ∫₀^θ e^{−λs} ξ(s) ds` on the grid.
pub(crate) fn inner_integral(xi: &[CVec], lambda: C64, h: f64, rule: Rule) -> Vec<CVec> {
    let m = xi.len() - 1;
    let weighted: Vec<CVec> = xi.iter().enumerate().map(|(i, v)| v * (-lambda * theta(i, m)).exp()).collect();
    let cum = rule.cumulative(&weighted, h);
    let total = cum[m].clone();
    cum.into_iter().map(|c| c - &total).collect()
}

/// `D(z, ξ, λ) = z + λe^{−λ}A₋₁∫e^{−λθ}ξ − ∫A₂ξ − ∫e^{λθ}[λA₂(θ) + A₃(θ)] J(θ) dθ`
/// with trapezoid quadrature.
pub fn d_vector(sys: &NeutralSystem, g: &StateSegment, lambda: C64) -> Result<CVec> {
    d_vector_with(sys, g, lambda, Rule::Trapezoid)
}

pub(crate) fn d_vector_with(sys: &NeutralSystem, g: &StateSegment, lambda: C64, rule: Rule) -> Result<CVec> {
    let n = sys.n;
    if g.n() != n {
        return Err(Error::DimensionMismatch { context: "d_vector segment", expected: n, found: g.n() });
    }
    let m = g.intervals();
    let h = g.step();
    let j = inner_integral(&g.z, lambda, h, rule);
    // ∫₋₁⁰ e^{−λθ}ξ = J(−1) · (−1)
    let int_exp_xi = -&j[0];
    let mut a2_xi = Vec::with_capacity(m + 1);
    let mut kernel_j = Vec::with_capacity(m + 1);
    for (i, (xi, ji)) in g.z.iter().zip(&j).enumerate() {
        let th = theta(i, m);
        let a2 = sys.a2.eval(th, n);
        let a3 = sys.a3.eval(th, n);
        a2_xi.push(&a2 * xi);
        kernel_j.push((a2 * lambda + a3) * ji * (lambda * th).exp());
    }
    let mut d = g.y.clone();
    d += &sys.a_minus1 * int_exp_xi * (lambda * (-lambda).exp());
    d -= rule.total(&a2_xi, h);
    d -= rule.total(&kernel_j, h);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, det, ZERO};
    use proptest::prelude::*;

    fn example(b: f64, s: f64) -> NeutralSystem {
        let a_m1 = -identity(2);
        let a0 = CMat::from_row_slice(2, 2, &[c(-b, 0.0), c(s, 0.0), ZERO, c(-b, 0.0)]);
        NeutralSystem::with_a0(a_m1, &a0, CMat::zeros(2, 0)).unwrap()
    }

    fn random_system(seed: u64) -> NeutralSystem {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = |n| CMat::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let a_m1 = m(3);
        let a2 = MatrixPolynomial::new(alloc::vec![m(3), m(3), m(3)]);
        let a3 = MatrixPolynomial::new(alloc::vec![m(3), m(3)]);
        NeutralSystem::uncontrolled(a_m1, a2, a3).unwrap()
    }

    #[test]
    fn example_at_i_pi_is_minus_identity() {
        let d = char_matrix(&example(1.0, 0.0), c(0.0, core::f64::consts::PI));
        assert!((d - (-identity(2))).norm() < 1e-12);
    }

    #[test]
    fn trivial_systems() {
        let z =
            NeutralSystem::uncontrolled(CMat::zeros(2, 2), MatrixPolynomial::zero(), MatrixPolynomial::zero()).unwrap();
        let l = c(0.3, -2.0);
        assert!((char_matrix(&z, l) + identity(2) * l).norm() < 1e-14);
        assert!((char_matrix_adjoint(&z, l) + identity(2) * l).norm() < 1e-14);
        assert!((char_matrix_derivative(&z, l) + identity(2)).norm() < 1e-14);

        let one = NeutralSystem::uncontrolled(identity(1), MatrixPolynomial::zero(), MatrixPolynomial::zero()).unwrap();
        let l = c(0.0, 2.0 * core::f64::consts::PI);
        assert!(char_matrix(&one, l).norm() < 1e-14);
        assert!((char_matrix_derivative(&one, l)[(0, 0)] - c(0.0, -2.0 * core::f64::consts::PI)).norm() < 1e-13);
    }

    #[test]
    fn lifted_kernels() {
        let (a2, a3) = lift_pointwise_delay(&CMat::zeros(2, 2)).unwrap();
        assert!(a2.is_zero() && a3.is_zero());
        let a0 = CMat::from_row_slice(2, 2, &[c(-1.0, 0.0), ONE_C, ZERO, c(-1.0, 0.0)]);
        let (a2, a3) = lift_pointwise_delay(&a0).unwrap();
        assert_eq!(a2.coeffs(), &[a0.clone(), a0.clone()]);
        assert_eq!(a3.coeffs(), &[a0]);
    }

    const ONE_C: C64 = C64::new(1.0, 0.0);

    #[test]
    fn lifted_char_matrix_matches_pointwise_form() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a0 = CMat::from_row_slice(2, 2, &[c(-1.0, 0.0), ONE_C, ZERO, c(-1.0, 0.0)]);
        let a_m1 = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), ZERO, c(0.2, 0.1), c(-1.0, 0.0)]);
        let sys = NeutralSystem::with_a0(a_m1.clone(), &a0, CMat::zeros(2, 0)).unwrap();
        for _ in 0..20 {
            let l = c(rng.random_range(-5.0..5.0), rng.random_range(-50.0..50.0));
            let want = identity(2) * (-l) + &a_m1 * (l * (-l).exp()) + &a0;
            let got = char_matrix(&sys, l);
            assert!((got - &want).norm() <= 1e-10 * want.norm().max(1.0));
        }
    }

    #[test]
    fn adjoint_determinant_on_lattice() {
        let sys = example(1.0, 1.0);
        for k in -5i32..5 {
            let l = c(-0.01, core::f64::consts::PI * (2 * k + 1) as f64);
            let a = det(&char_matrix_adjoint(&sys, l.conj()));
            let b = det(&char_matrix(&sys, l)).conj();
            assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let bad =
            NeutralSystem::uncontrolled(identity(2), MatrixPolynomial::constant(identity(3)), MatrixPolynomial::zero());
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
        let deep = MatrixPolynomial::new(alloc::vec![identity(2); 10]);
        assert!(matches!(
            NeutralSystem::uncontrolled(identity(2), deep, MatrixPolynomial::zero()),
            Err(Error::DegreeTooLarge { degree: 9, max: 8 })
        ));
        let mut nan = identity(2);
        nan[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(
            NeutralSystem::uncontrolled(nan, MatrixPolynomial::zero(), MatrixPolynomial::zero()),
            Err(Error::NonFinite(_))
        ));
        assert!(StateSegment::new(CVec::zeros(2), alloc::vec![CVec::zeros(2); 5]).is_err());
    }

    #[test]
    fn d_vector_closed_forms() {
        let sys = example(1.0, 1.0);
        let z = CVec::from_vec(alloc::vec![c(1.0, 2.0), c(-0.5, 0.0)]);
        let seg = StateSegment::new(z.clone(), alloc::vec![CVec::zeros(2); 65]).unwrap();
        assert!((d_vector(&sys, &seg, c(0.7, 3.0)).unwrap() - z).norm() < 1e-15);

        let a_m1 = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), ONE_C, ZERO, c(-1.0, 0.0)]);
        let plain =
            NeutralSystem::uncontrolled(a_m1.clone(), MatrixPolynomial::zero(), MatrixPolynomial::zero()).unwrap();
        let cst = CVec::from_vec(alloc::vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let seg = StateSegment::new(CVec::zeros(2), alloc::vec![cst.clone(); 1025]).unwrap();
        let e = core::f64::consts::E;
        let want = &a_m1 * &cst * c((e - 1.0) / e, 0.0);
        let got = d_vector(&plain, &seg, ONE_C).unwrap();
        assert!((got - want).norm() < 1e-6);
    }

    fn smooth_segment(m: usize, phase: f64) -> StateSegment {
        StateSegment::from_fn(CVec::from_vec(alloc::vec![c(0.3, -0.1), c(1.0, 0.5)]), m, |t| {
            CVec::from_vec(alloc::vec![c((3.0 * t + phase).cos(), t * t), c((t - phase).exp(), (2.0 * t).sin())])
        })
        .unwrap()
    }

    #[test]
    fn d_vector_grid_refinement() {
        let sys = example(1.0, 1.0);
        let l = c(-0.2, 7.0);
        let coarse = d_vector(&sys, &smooth_segment(256, 0.4), l).unwrap();
        let fine = d_vector(&sys, &smooth_segment(1024, 0.4), l).unwrap();
        assert!((&coarse - &fine).norm() / fine.norm() < 1e-3);
    }

    #[test]
    fn d_vector_is_linear() {
        let sys = random_system(3);
        let sys = NeutralSystem::uncontrolled(
            sys.a_minus1().view((0, 0), (2, 2)).into_owned(),
            MatrixPolynomial::new(sys.a2().coeffs().iter().map(|c| c.view((0, 0), (2, 2)).into_owned()).collect()),
            MatrixPolynomial::new(sys.a3().coeffs().iter().map(|c| c.view((0, 0), (2, 2)).into_owned()).collect()),
        )
        .unwrap();
        let (g1, g2) = (smooth_segment(64, 0.1), smooth_segment(64, 1.3));
        let (a, b) = (c(0.7, -1.2), c(-2.0, 0.4));
        let l = c(0.5, 4.0);
        let lhs = d_vector(&sys, &g1.scale(a).add(&g2.scale(b)), l).unwrap();
        let rhs = d_vector(&sys, &g1, l).unwrap() * a + d_vector(&sys, &g2, l).unwrap() * b;
        assert!((lhs - rhs).norm() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn adjoint_identity(seed in 0u64..1000, re in -5.0f64..5.0, im in -50.0f64..50.0) {
            let sys = random_system(seed);
            let l = c(re, im);
            let lhs = char_matrix(&sys, l).adjoint();
            let rhs = char_matrix_adjoint(&sys, l.conj());
            prop_assert!((lhs - rhs).norm() <= 1e-12 * char_matrix(&sys, l).norm().max(1.0));
        }

        #[test]
        fn derivative_matches_finite_difference(seed in 0u64..1000, r in 0.0f64..50.0, arg in 0.0f64..6.0) {
            let sys = random_system(seed);
            let l = c(r * arg.cos(), r * arg.sin());
            let h = 1e-6;
            let fd = (char_matrix(&sys, l + h) - char_matrix(&sys, l - h)) / c(2.0 * h, 0.0);
            let an = char_matrix_derivative(&sys, l);
            prop_assert!((&fd - &an).norm() <= 1e-6 * an.norm().max(1.0), "fd {} an {}", fd, an);
            let (_, dp) = char_matrix_with_derivative(&sys, l);
            prop_assert!((dp - an).norm() < 1e-12 * fd.norm().max(1.0));
        }
    }
}
