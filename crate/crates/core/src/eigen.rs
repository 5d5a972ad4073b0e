//! Eigenvectors of the state operator and its adjoint, the `M₂` pairing,
//! and the explicit resolvent.

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::{condition_estimate_1, inner, kernel_basis_scaled, norm, CMat, CVec, C64};
use crate::model::{
    char_matrix, char_matrix_adjoint, char_matrix_derivative, d_vector_with, inner_integral, theta, NeutralSystem,
    Rule, StateSegment,
};
use crate::quad::{cumulative_fourth_order_vec, trapezoid};
use crate::spectrum::{term_scale, RootRecord, KERNEL_TOL};
use crate::{Error, Result};

/// Largest `‖Δ(λ)x‖` accepted for a kernel vector.
pub const KERNEL_RESIDUAL_TOL: f64 = 1e-6;
/// Condition estimate above which the resolvent refuses to solve.
pub const MAX_CONDITION: f64 = 1e12;
/// Relative size of the `Ker Δ*(λ̄₀)` component of `D` still counted as zero.
pub const IMAGE_TOL: f64 = 1e-6;
/// `‖D‖` relative to `‖g‖ · scale(λ₀)` below which `D` is taken to be zero.
pub const ZERO_D_TOL: f64 = 1e-9;

pub use crate::linalg::kernel_basis;

/// `(λ, x, y, φ, ψ)` with `x ∈ Ker Δ(λ)`, `y ∈ Ker Δ*(λ̄)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub lambda: C64,
    pub x: CVec,
    pub y: CVec,
    pub phi: StateSegment,
    pub psi: StateSegment,
}

impl EigenPair {
    /// `ψ̂ = ψ / λ̄`, the scaling under which both families stay bounded.
    pub fn psi_hat(&self) -> StateSegment {
        self.psi.scale(C64::new(1.0, 0.0) / self.lambda.conj())
    }

    /// `−⟨Δ′(λ)x, y⟩`.
    pub fn pairing(&self, sys: &NeutralSystem) -> C64 {
        pairing_formula(sys, self.lambda, &self.x, &self.y)
    }
}

fn check_unit(v: &CVec, what: &str) -> Result<()> {
    let n = norm(v);
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput(format!("{what} must have unit norm, got {n:.3e}")));
    }
    Ok(())
}

fn check_dim(sys: &NeutralSystem, v: &CVec, context: &'static str) -> Result<()> {
    if v.len() != sys.n() {
        return Err(Error::DimensionMismatch { context, expected: sys.n(), found: v.len() });
    }
    Ok(())
}

fn check_grid(m: usize) -> Result<()> {
    if m < StateSegment::MIN_INTERVALS {
        return Err(Error::InvalidInput(format!("grid needs at least {} intervals", StateSegment::MIN_INTERVALS)));
    }
    Ok(())
}

/// `φ = ((I − e^{−λ}A₋₁)x, e^{λθ}x)`.
pub fn eigenvector(sys: &NeutralSystem, lambda: C64, x: &CVec, m: usize) -> Result<StateSegment> {
    check_dim(sys, x, "eigenvector x")?;
    check_grid(m)?;
    let residual = norm(&(char_matrix(sys, lambda) * x));
    if residual >= KERNEL_RESIDUAL_TOL * norm(x).max(f64::MIN_POSITIVE) {
        return Err(Error::KernelMismatch { residual });
    }
    let y = x - sys.a_minus1() * x * (-lambda).exp();
    let z = (0..=m).map(|i| x * (lambda * theta(i, m)).exp()).collect();
    Ok(StateSegment { y, z })
}

/// `ψ = (y, [λ̄e^{−λ̄θ} − A₂*(θ) + e^{−λ̄θ}∫₀^θ e^{λ̄s}(A₃*(s) + λ̄A₂*(s))ds] y)`.
///
/// `lambda_bar` is the eigenvalue of the adjoint operator, i.e. the conjugate of
/// the root `λ`; `y` must be a unit vector of `Ker Δ*(λ̄)`. The running
/// integral uses the fourth-order rule.
pub fn adjoint_eigenvector(sys: &NeutralSystem, lambda_bar: C64, y: &CVec, m: usize) -> Result<StateSegment> {
    check_dim(sys, y, "adjoint eigenvector y")?;
    check_unit(y, "adjoint kernel vector")?;
    check_grid(m)?;
    let residual = norm(&(char_matrix_adjoint(sys, lambda_bar) * y));
    if residual >= KERNEL_RESIDUAL_TOL {
        return Err(Error::KernelMismatch { residual });
    }
    let n = sys.n();
    let adj = sys.adjoint();
    let h = 1.0 / m as f64;
    let a2: Vec<CMat> = (0..=m).map(|i| adj.a2().eval(theta(i, m), n)).collect();
    let integrand: Vec<CVec> = (0..=m)
        .map(|i| {
            let th = theta(i, m);
            (adj.a3().eval(th, n) + &a2[i] * lambda_bar) * y * (lambda_bar * th).exp()
        })
        .collect();
    let cum = cumulative_fourth_order_vec(&integrand, h);
    let at_zero = cum[m].clone();
    let z = (0..=m)
        .map(|i| {
            let th = theta(i, m);
            let e = (-lambda_bar * th).exp();
            y * (lambda_bar * e) - &a2[i] * y + (&cum[i] - &at_zero) * e
        })
        .collect();
    Ok(StateSegment { y: y.clone(), z })
}

/// `⟨g₁, g₂⟩ = ⟨y₁, y₂⟩ + ∫⟨z₁(θ), z₂(θ)⟩dθ` (trapezoid), conjugate-linear in `g₂`.
pub fn m2_inner_product(g1: &StateSegment, g2: &StateSegment) -> Result<C64> {
    if g1.n() != g2.n() {
        return Err(Error::DimensionMismatch { context: "inner product dimension", expected: g1.n(), found: g2.n() });
    }
    if g1.intervals() != g2.intervals() {
        return Err(Error::DimensionMismatch {
            context: "inner product grid",
            expected: g1.intervals(),
            found: g2.intervals(),
        });
    }
    let pts: Vec<C64> = g1.z.iter().zip(&g2.z).map(|(a, b)| inner(a, b)).collect();
    Ok(inner(&g1.y, &g2.y) + trapezoid(&pts, g1.step()))
}

/// `−⟨Δ′(λ₀)x, y⟩`, the exact value of `⟨φ(λ₀), ψ(λ̄₀)⟩`.
pub fn pairing_formula(sys: &NeutralSystem, lambda0: C64, x: &CVec, y: &CVec) -> C64 {
    -inner(&(char_matrix_derivative(sys, lambda0) * x), y)
}

/// Orthonormal basis of `Ker Δ(λ)` at a root, with the root-scaled tolerance.
pub fn root_kernel(sys: &NeutralSystem, lambda: C64) -> Vec<CVec> {
    kernel_basis_scaled(&char_matrix(sys, lambda), KERNEL_TOL, term_scale(sys, lambda))
}

/// Orthonormal basis of `Ker Δ*(λ̄)` at a root `λ`.
pub fn root_adjoint_kernel(sys: &NeutralSystem, lambda: C64) -> Vec<CVec> {
    let lb = lambda.conj();
    kernel_basis_scaled(&char_matrix_adjoint(sys, lb), KERNEL_TOL, term_scale(sys, lambda))
}

/// Kernel bases of `Δ(λ)` and `Δ*(λ̄)` rotated so that `⟨Δ′x_i, y_j⟩ = 0` for `i ≠ j`.
///
/// With `G = Yᴴ Δ′ X = UΣVᴴ`, the pairs `(XV, YU)` diagonalize the pairing.
pub fn biorthogonal_kernels(sys: &NeutralSystem, lambda: C64) -> Result<(Vec<CVec>, Vec<CVec>)> {
    let xs = root_kernel(sys, lambda);
    let ys = root_adjoint_kernel(sys, lambda);
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::KernelMismatch {
            residual: crate::linalg::singular_values(&char_matrix(sys, lambda)).last().copied().unwrap_or(0.0),
        });
    }
    if xs.len() == 1 && ys.len() == 1 {
        return Ok((xs, ys));
    }
    let n = sys.n();
    let xm = CMat::from_columns(&xs);
    let ym = CMat::from_columns(&ys);
    let dp = char_matrix_derivative(sys, lambda);
    let g = ym.adjoint() * dp * &xm;
    let svd = g.svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let x2 = xm * v_t.adjoint();
    let y2 = ym * u;
    let cols = |m: CMat| -> Vec<CVec> {
        (0..m.ncols())
            .map(|j| {
                let c: CVec = m.column(j).into_owned();
                debug_assert_eq!(c.len(), n);
                crate::linalg::normalize_phase(&c)
            })
            .collect()
    };
    // phase-normalizing x and y separately keeps the pairing matrix diagonal
    Ok((cols(x2), cols(y2)))
}

/// Eigenpairs of one root on a grid of `m` intervals, biorthogonalized when semisimple.
pub fn eigenpairs(sys: &NeutralSystem, lambda: C64, m: usize) -> Result<Vec<EigenPair>> {
    let (xs, ys) = biorthogonal_kernels(sys, lambda)?;
    xs.iter()
        .zip(&ys)
        .map(|(x, y)| {
            Ok(EigenPair {
                lambda,
                x: x.clone(),
                y: y.clone(),
                phi: eigenvector(sys, lambda, x, m)?,
                psi: adjoint_eigenvector(sys, lambda.conj(), y, m)?,
            })
        })
        .collect()
}

/// `(A − λI)⁻¹g` for `g = (z, ξ)`:
///
/// ```text
/// y-part: e^{−λ}A₋₁∫₋₁⁰e^{−λs}ξ(s)ds + (I − e^{−λ}A₋₁)c
/// θ-part: ∫₀^θ e^{λ(θ−s)}ξ(s)ds + e^{λθ}c,      c = Δ(λ)⁻¹D(z, ξ, λ)
/// ```
///
/// The integrals over `[−1, 0]` use a fourth-order rule.
/// The usual resolvent `(λI − A)⁻¹` is the negative of this.
pub fn resolvent_apply(sys: &NeutralSystem, lambda: C64, g: &StateSegment) -> Result<StateSegment> {
    if g.n() != sys.n() {
        return Err(Error::DimensionMismatch { context: "resolvent segment", expected: sys.n(), found: g.n() });
    }
    let delta = char_matrix(sys, lambda);
    let condition = condition_estimate_1(&delta);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::NearSingular { condition });
    }
    let d = d_vector_with(sys, g, lambda, Rule::FourthOrder)?;
    let c = delta.lu().solve(&d).ok_or(Error::NearSingular { condition: f64::INFINITY })?;
    let m = g.intervals();
    let j = inner_integral(&g.z, lambda, g.step(), Rule::FourthOrder);
    let e = (-lambda).exp();
    let a = sys.a_minus1();
    let int_exp_xi = -&j[0];
    let y = a * int_exp_xi * e + &c - a * &c * e;
    let z = (0..=m).map(|i| (&j[i] + &c) * (lambda * theta(i, m)).exp()).collect();
    Ok(StateSegment { y, z })
}

/// The standard resolvent `R(λ) = (λI − A)⁻¹`.
pub fn resolvent(sys: &NeutralSystem, lambda: C64, g: &StateSegment) -> Result<StateSegment> {
    Ok(resolvent_apply(sys, lambda, g)?.scale(C64::new(-1.0, 0.0)))
}

/// `‖y − (z(0) − A₋₁z(−1))‖`, the violation of the domain relation.
pub fn domain_defect(sys: &NeutralSystem, s: &StateSegment) -> f64 {
    let m = s.intervals();
    norm(&(&s.y - (&s.z[m] - sys.a_minus1() * &s.z[0])))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairingBounds {
    pub min: f64,
    pub max: f64,
    /// `(λ, |(1/λ)⟨Δ′(λ)x, y⟩|)` per kernel pair.
    pub values: Vec<(C64, f64)>,
}

/// `|(1/λ)⟨Δ′(λ)x, y⟩|` over the given roots with unit `x`, `y`.
///
/// Semisimple roots contribute one value per biorthogonal kernel pair; roots
/// whose kernel is smaller than their algebraic multiplicity are rejected.
pub fn pairing_bound_scan(sys: &NeutralSystem, roots: &[RootRecord]) -> Result<PairingBounds> {
    if roots.is_empty() {
        return Err(Error::EmptyInput("Λ₁ roots for the pairing scan"));
    }
    let mut values = Vec::new();
    for r in roots {
        if r.geo_mult != r.alg_mult {
            return Err(Error::InvalidInput(format!(
                "root {} is not semisimple (geo {} < alg {})",
                r.lambda, r.geo_mult, r.alg_mult
            )));
        }
        let (xs, ys) = biorthogonal_kernels(sys, r.lambda)?;
        let dp = char_matrix_derivative(sys, r.lambda);
        for (x, y) in xs.iter().zip(&ys) {
            let v = inner(&(&dp * x), y) / r.lambda;
            values.push((r.lambda, v.norm()));
        }
    }
    let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let max = values.iter().map(|v| v.1).fold(0.0, f64::max);
    Ok(PairingBounds { min, max, values })
}

/// Whether `D(z, ξ, λ₀)` lies in `Im Δ(λ₀)`, i.e. has no component along `Ker Δ*(λ̄₀)`.
///
/// `D` is integrated with the fourth-order rule. A `D` below
/// `ZERO_D_TOL · ‖g‖ · scale(λ₀)` is the zero vector up to quadrature error and
/// counts as a member; this matters when `Δ(λ₀) = 0` and the image is trivial.
pub fn image_membership_check(sys: &NeutralSystem, g: &StateSegment, root: &RootRecord) -> Result<bool> {
    let d = d_vector_with(sys, g, root.lambda, Rule::FourthOrder)?;
    let dn = norm(&d);
    if dn <= ZERO_D_TOL * g.norm() * term_scale(sys, root.lambda) {
        return Ok(true);
    }
    let ys = root_adjoint_kernel(sys, root.lambda);
    let mut comp = CVec::zeros(sys.n());
    for y in &ys {
        comp += y * inner(&d, y);
    }
    Ok(norm(&comp) < IMAGE_TOL * dn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{dilemma_system, polynomial_kernel, pure_difference};
    use crate::linalg::{c, identity, ONE, ZERO};
    use crate::model::MatrixPolynomial;
    use crate::spectrum::refine_root;
    use alloc::vec;
    use core::f64::consts::PI;

    fn e1() -> CVec {
        CVec::from_vec(vec![ONE, ZERO])
    }

    fn smooth(n: usize, m: usize, phase: f64) -> StateSegment {
        StateSegment::from_fn(CVec::from_fn(n, |i, _| c(0.3 + i as f64, -0.2 * phase)), m, |t| {
            CVec::from_fn(n, |i, _| c((2.0 * t + phase + i as f64).cos(), (t * (1.0 + i as f64) - phase).sin()))
        })
        .unwrap()
    }

    #[test]
    fn kernel_of_jordan_root_is_e1() {
        let sys = dilemma_system(1.0, 1.0);
        let r = refine_root(&sys, c(0.0, PI)).unwrap();
        let k = root_kernel(&sys, r.lambda);
        assert_eq!(k.len(), 1);
        assert!((&k[0] - e1()).norm() < 1e-8);
        let ky = root_adjoint_kernel(&sys, r.lambda);
        assert_eq!(ky.len(), 1);
        assert!(ky[0][0].norm() < 1e-8);
        // Jordan case: the pairing vanishes
        assert!(pairing_formula(&sys, r.lambda, &k[0], &ky[0]).norm() < 1e-8);
    }

    #[test]
    fn eigenvector_closed_forms() {
        let sys = dilemma_system(1.0, 0.0);
        let l = refine_root(&sys, c(0.0, 3.0 * PI)).unwrap().lambda;
        let phi = eigenvector(&sys, l, &e1(), 64).unwrap();
        assert!((phi.y[0] - (1.0 + (-l).exp())).norm() < 1e-14);
        assert!(phi.y[1].norm() == 0.0);
        for i in [0, 17, 64] {
            assert!((phi.z[i][0] - (l * theta(i, 64)).exp()).norm() < 1e-14);
        }
        assert!(domain_defect(&sys, &phi) < 1e-13);

        let retarded =
            NeutralSystem::uncontrolled(CMat::zeros(1, 1), MatrixPolynomial::zero(), MatrixPolynomial::zero()).unwrap();
        let x = CVec::from_vec(vec![ONE]);
        let phi0 = eigenvector(&retarded, ZERO, &x, 16).unwrap();
        assert_eq!(phi0.y, x);
        assert!(phi0.z.iter().all(|v| *v == x));
        assert!(matches!(eigenvector(&sys, c(0.3, 0.0), &e1(), 16), Err(Error::KernelMismatch { .. })));
    }

    #[test]
    fn adjoint_eigenvector_special_case() {
        let mu = c(-1.0, 0.0);
        let sys = pure_difference(identity(2) * mu);
        let l = c(0.0, 5.0 * PI);
        let y = e1();
        let psi = adjoint_eigenvector(&sys, l.conj(), &y, 32).unwrap();
        for i in 0..=32 {
            let want = &y * (l.conj() * (-l.conj() * theta(i, 32)).exp());
            assert!((&psi.z[i] - want).norm() < 1e-12);
        }
        assert!(adjoint_eigenvector(&sys, l.conj(), &CVec::zeros(2), 32).is_err());
    }

    #[test]
    fn psi_norm_grows_on_the_pure_difference_case() {
        let sys = pure_difference(-identity(2));
        let mut last = 0.0;
        for k in 0..30 {
            let l = c(0.0, PI * (2 * k + 1) as f64);
            let psi = adjoint_eigenvector(&sys, l.conj(), &e1(), 256).unwrap();
            let nrm = psi.norm();
            assert!(nrm > last);
            last = nrm;
        }
    }

    #[test]
    fn inner_product_basics() {
        let y_only = StateSegment::new(e1(), vec![CVec::zeros(2); 9]).unwrap();
        assert!((m2_inner_product(&y_only, &y_only).unwrap() - 1.0).norm() < 1e-15);
        let z_only = StateSegment::new(CVec::zeros(2), vec![e1(); 9]).unwrap();
        assert!((m2_inner_product(&z_only, &z_only).unwrap() - 1.0).norm() < 1e-15);
        let other = StateSegment::new(CVec::zeros(2), vec![e1(); 17]).unwrap();
        assert!(m2_inner_product(&z_only, &other).is_err());
    }

    #[test]
    fn pairing_formula_trivial() {
        let sys = pure_difference(CMat::zeros(2, 2));
        let x = CVec::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let y = CVec::from_vec(vec![c(0.0, 1.0), ZERO]);
        assert!((pairing_formula(&sys, c(1.0, 2.0), &x, &y) - inner(&x, &y)).norm() < 1e-15);
    }

    #[test]
    fn pairing_matches_quadrature_with_grid_refinement() {
        let sys = polynomial_kernel();
        let r = refine_root(&sys, c(-1.0, 0.5)).unwrap_or_else(|_| refine_root(&sys, c(-0.5, 6.0)).unwrap());
        let mut errs = Vec::new();
        for m in [256, 1024] {
            let pairs = eigenpairs(&sys, r.lambda, m).unwrap();
            let p = &pairs[0];
            let exact = p.pairing(&sys);
            let quad = m2_inner_product(&p.phi, &p.psi).unwrap();
            errs.push((quad - exact).norm() / exact.norm());
        }
        assert!(errs[0] < 1e-3, "{errs:?}");
        assert!(errs[1] < 1e-4, "{errs:?}");
    }

    #[test]
    fn distinct_roots_are_orthogonal() {
        let sys = dilemma_system(1.0, 0.0);
        let a = refine_root(&sys, c(0.0, PI)).unwrap().lambda;
        let b = refine_root(&sys, c(0.0, 5.0 * PI)).unwrap().lambda;
        let pa = eigenpairs(&sys, a, 1024).unwrap();
        let pb = eigenpairs(&sys, b, 1024).unwrap();
        for p in &pa {
            for q in &pb {
                let v = m2_inner_product(&p.phi, &q.psi).unwrap();
                assert!(v.norm() < 1e-3 * p.phi.norm() * q.psi.norm(), "{v}");
            }
        }
        // within a semisimple root the pairs are biorthogonal
        let v = pairing_formula(&sys, a, &pa[0].x, &pa[1].y);
        assert!(v.norm() < 1e-10);
    }

    #[test]
    fn resolvent_of_zero_and_domain() {
        let sys = dilemma_system(1.0, 1.0);
        let z = StateSegment::zeros(2, 64);
        let r = resolvent_apply(&sys, c(1.0, 0.0), &z).unwrap();
        assert!(r.norm() == 0.0);
        let g = smooth(2, 128, 0.3);
        let r = resolvent_apply(&sys, c(0.5, 2.0), &g).unwrap();
        assert!(domain_defect(&sys, &r) < 1e-12 * r.norm());
    }

    #[test]
    fn resolvent_inverts_the_operator() {
        // apply (A − λ) to the output with second-order differences; defect is O(h²)
        let sys = polynomial_kernel();
        let n = sys.n();
        let l = c(0.7, -1.3);
        let mut defects = Vec::new();
        for m in [256usize, 512] {
            let g = smooth(n, m, 0.9);
            let x = resolvent_apply(&sys, l, &g).unwrap();
            let h = 1.0 / m as f64;
            let dz: Vec<CVec> = (0..=m)
                .map(|i| {
                    if i == 0 {
                        (&x.z[1] * c(4.0, 0.0) - &x.z[2] - &x.z[0] * c(3.0, 0.0)) / c(2.0 * h, 0.0)
                    } else if i == m {
                        (&x.z[m] * c(3.0, 0.0) - &x.z[m - 1] * c(4.0, 0.0) + &x.z[m - 2]) / c(2.0 * h, 0.0)
                    } else {
                        (&x.z[i + 1] - &x.z[i - 1]) / c(2.0 * h, 0.0)
                    }
                })
                .collect();
            let a2dz: Vec<CVec> = (0..=m).map(|i| sys.a2().eval(theta(i, m), n) * &dz[i]).collect();
            let a3z: Vec<CVec> = (0..=m).map(|i| sys.a3().eval(theta(i, m), n) * &x.z[i]).collect();
            let top = crate::quad::trapezoid_vec(&a2dz, h) + crate::quad::trapezoid_vec(&a3z, h) - &x.y * l - &g.y;
            let fun: f64 = (0..=m).map(|i| norm(&(&dz[i] - &x.z[i] * l - &g.z[i]))).fold(0.0, f64::max);
            defects.push(norm(&top).max(fun) / x.norm());
        }
        assert!(defects[1] < 1e-4, "{defects:?}");
        assert!(defects[1] < 0.3 * defects[0], "{defects:?}");
    }

    #[test]
    fn resolvent_identity_at_one_and_two_plus_i() {
        let sys = dilemma_system(1.0, 1.0);
        let (l, mu) = (c(1.0, 0.0), c(2.0, 1.0));
        let g = smooth(2, 512, 0.2);
        let rl = resolvent(&sys, l, &g).unwrap();
        let rm = resolvent(&sys, mu, &g).unwrap();
        let lhs = rl.sub(&rm);
        let rhs = resolvent(&sys, l, &rm).unwrap().scale(mu - l);
        let rel = lhs.sub(&rhs).norm() / lhs.norm();
        assert!(rel < 1e-6, "relative defect {rel:e}");
        // the formula as written, (A − λ)⁻¹, obeys the identity with the opposite sign
        let pl = resolvent_apply(&sys, l, &g).unwrap();
        let pm = resolvent_apply(&sys, mu, &g).unwrap();
        let rhs = resolvent_apply(&sys, l, &pm).unwrap().scale(l - mu);
        assert!(pl.sub(&pm).sub(&rhs).norm() / lhs.norm() < 1e-6);
    }

    #[test]
    fn resolvent_rejects_roots() {
        let sys = dilemma_system(1.0, 1.0);
        let r = refine_root(&sys, c(0.0, PI)).unwrap();
        assert!(matches!(resolvent_apply(&sys, r.lambda, &smooth(2, 64, 0.0)), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn pairing_bounds() {
        assert!(matches!(pairing_bound_scan(&dilemma_system(1.0, 0.0), &[]), Err(Error::EmptyInput(_))));
        let mu = c(0.6, 0.8);
        let sys = pure_difference(identity(2) * mu);
        let roots: Vec<RootRecord> =
            (1..6).map(|k| refine_root(&sys, c(0.0, mu.arg() + 2.0 * PI * (10 * k) as f64)).unwrap()).collect();
        let b = pairing_bound_scan(&sys, &roots).unwrap();
        for (l, v) in &b.values {
            // Δ′(λ) = −λI on these roots
            assert!((v - 1.0).abs() < 1e-9, "{l}: {v}");
        }
        assert_eq!(b.values.len(), 10);
        assert!((b.max - 1.0).abs() < 1e-9 && (b.min - 1.0).abs() < 1e-9);
    }

    fn accurate_inner(a: &StateSegment, b: &StateSegment) -> C64 {
        let pts: Vec<CVec> = a.z.iter().zip(&b.z).map(|(u, v)| CVec::from_element(1, inner(u, v))).collect();
        inner(&a.y, &b.y) + crate::quad::cumulative_fourth_order_vec(&pts, a.step())[a.intervals()][0]
    }

    #[test]
    fn image_membership() {
        for s in [0.0, 1.0] {
            let sys = dilemma_system(1.0, s);
            let r0 = refine_root(&sys, c(0.0, PI)).unwrap();
            let l1 = refine_root(&sys, c(0.0, 3.0 * PI)).unwrap().lambda;
            let m = 1024;
            let phi1 = eigenvector(&sys, l1, &e1(), m).unwrap();
            assert!(image_membership_check(&sys, &phi1, &r0).unwrap(), "s = {s}");
            let y0 = &root_adjoint_kernel(&sys, r0.lambda)[0];
            let psi0 = adjoint_eigenvector(&sys, r0.lambda.conj(), y0, m).unwrap();
            assert!(!image_membership_check(&sys, &psi0, &r0).unwrap(), "s = {s}");
            let mut g = smooth(2, m, 0.4);
            assert!(!image_membership_check(&sys, &g, &r0).unwrap(), "s = {s}");
            // Gram–Schmidt against every adjoint eigenvector of the root
            let psis: Vec<StateSegment> = root_adjoint_kernel(&sys, r0.lambda)
                .iter()
                .map(|y| adjoint_eigenvector(&sys, r0.lambda.conj(), y, m).unwrap())
                .collect();
            let gram = CMat::from_fn(psis.len(), psis.len(), |i, j| accurate_inner(&psis[j], &psis[i]));
            let rhs = CVec::from_fn(psis.len(), |i, _| accurate_inner(&g, &psis[i]));
            let coef = gram.lu().solve(&rhs).unwrap();
            for (p, a) in psis.iter().zip(coef.iter()) {
                g = g.sub(&p.scale(*a));
            }
            for p in &psis {
                assert!(accurate_inner(&g, p).norm() < 1e-12);
            }
            assert!(image_membership_check(&sys, &g, &r0).unwrap(), "s = {s}");
        }
    }

    fn lattice_root(sys: &NeutralSystem, k: i64) -> C64 {
        refine_root(sys, c(0.0, PI * (2 * k + 1) as f64)).unwrap().lambda
    }

    #[test]
    fn biorthogonality_on_the_grid() {
        let sys = dilemma_system(1.0, 0.0);
        let mut worst = [0.0f64; 2];
        for (slot, m) in [512usize, 1024].into_iter().enumerate() {
            let pairs: Vec<EigenPair> =
                (0..4).flat_map(|k| eigenpairs(&sys, lattice_root(&sys, k), m).unwrap()).collect();
            for (i, p) in pairs.iter().enumerate() {
                for (j, q) in pairs.iter().enumerate() {
                    let v = m2_inner_product(&p.phi, &q.psi).unwrap();
                    let scale = p.phi.norm() * q.psi.norm();
                    let err = if i == j { (v - p.pairing(&sys)).norm() } else { v.norm() };
                    worst[slot] = worst[slot].max(err / scale);
                }
            }
        }
        assert!(worst[0] < 5e-3, "{worst:?}");
        // second order in the grid step
        assert!(worst[1] < 0.3 * worst[0], "{worst:?}");
    }

    #[test]
    fn eigenvector_families_stay_bounded() {
        let sys = dilemma_system(1.0, 0.0);
        let m = 4096;
        let size = |k: i64| {
            let l = lattice_root(&sys, k);
            let p = &eigenpairs(&sys, l, m).unwrap()[0];
            (p.phi.norm(), p.psi_hat().norm(), p.psi.norm())
        };
        let (mut near, mut far) = ([0.0f64; 2], [0.0f64; 2]);
        let mut psi_norms = Vec::new();
        for k in 5..=20 {
            let (a, b, raw) = size(k);
            near = [near[0].max(a), near[1].max(b)];
            psi_norms.push(raw);
        }
        for k in [40, 80, 120, 160, 200] {
            let (a, b, raw) = size(k);
            far = [far[0].max(a), far[1].max(b)];
            psi_norms.push(raw);
        }
        assert!(far[0] <= 2.0 * near[0] && far[1] <= 2.0 * near[1], "{near:?} {far:?}");
        assert!(psi_norms.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn pairing_ratio_on_the_example() {
        let sys = dilemma_system(1.0, 0.0);
        let roots: Vec<RootRecord> =
            (10..=200).step_by(10).map(|k| refine_root(&sys, c(0.0, PI * (2 * k + 1) as f64)).unwrap()).collect();
        let b = pairing_bound_scan(&sys, &roots).unwrap();
        assert!(b.min > 0.0 && b.max / b.min < 10.0, "{b:?}");
        let jordan = dilemma_system(1.0, 1.0);
        let r = refine_root(&jordan, c(0.0, PI)).unwrap();
        assert!(pairing_bound_scan(&jordan, &[r]).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn resolvent_identity_off_the_spectrum(
            lr in 0.2f64..3.0, li in -20.0f64..20.0, mr in 0.2f64..3.0, mi in -20.0f64..20.0, phase in 0.0f64..6.0
        ) {
            let sys = polynomial_kernel();
            let (l, mu) = (c(lr, li), c(mr, mi));
            proptest::prop_assume!((l - mu).norm() > 0.1);
            let g = smooth(2, 512, phase);
            let rl = resolvent(&sys, l, &g).unwrap();
            let rm = resolvent(&sys, mu, &g).unwrap();
            let lhs = rl.sub(&rm);
            let rhs = resolvent(&sys, l, &rm).unwrap().scale(mu - l);
            proptest::prop_assert!(lhs.sub(&rhs).norm() <= 1e-6 * lhs.norm());
        }
    }
}
