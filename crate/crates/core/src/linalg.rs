//! Dense complex linear algebra helpers on top of `nalgebra`.
//!
//! Matrices here are small (n ≤ 32), so every routine works on owned
//! `DMatrix` values and favours clarity over reuse of workspaces.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_traits::Float;

pub use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn is_finite_mat(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_finite_vec(v: &CVec) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Conjugate transpose.
pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint()
}

/// `⟨u, v⟩ = Σ uᵢ conj(vᵢ)`: linear in the first slot, conjugate-linear in the second.
pub fn inner(u: &CVec, v: &CVec) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm(v: &CVec) -> f64 {
    Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn norm1(m: &CMat) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn frobenius(m: &CMat) -> f64 {
    Float::sqrt(m.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    s
}

/// Numerical rank with threshold `tol · σ_max`.
pub fn rank(m: &CMat, tol: f64) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > tol * smax).count()
}

/// Orthonormal basis of the numerical kernel of a square matrix.
///
/// A right singular vector belongs to the kernel when its singular value is
/// at most `tol · max(σ_max, scale)`. Passing `scale = 0` gives the purely
/// relative test; a positive `scale` lets callers supply the natural magnitude
/// of a matrix whose entries all cancel (e.g. `Δ(λ)` at a semisimple root).
pub fn kernel_basis_scaled(m: &CMat, tol: f64, scale: f64) -> Vec<CVec> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let threshold = tol * smax.max(scale);
    let mut out = Vec::new();
    // thin SVD of a square matrix returns n singular values
    for (i, &s) in sv.iter().enumerate() {
        if s <= threshold {
            let v: CVec = v_t.row(i).adjoint().into_owned();
            out.push(normalize_phase(&v));
        }
    }
    // a wide matrix (more columns than rows) also has the unreported directions
    if v_t.nrows() < n {
        let extra = complete_null_space(&v_t);
        out.extend(extra.into_iter().map(|v| normalize_phase(&v)));
    }
    out
}

/// Kernel basis with the relative threshold `σᵢ ≤ tol · σ_max`.
pub fn kernel_basis(m: &CMat, tol: f64) -> Vec<CVec> {
    kernel_basis_scaled(m, tol, 0.0)
}

fn complete_null_space(v_t: &CMat) -> Vec<CVec> {
    // Gram-Schmidt the standard basis against the rows of v_t.
    let n = v_t.ncols();
    let mut basis: Vec<CVec> = (0..v_t.nrows()).map(|i| v_t.row(i).adjoint().into_owned()).collect();
    let start = basis.len();
    for j in 0..n {
        let mut e = CVec::zeros(n);
        e[j] = ONE;
        for b in &basis {
            let p = inner(&e, b);
            e -= b * p;
        }
        let nn = norm(&e);
        if nn > 1e-8 {
            basis.push(e / C64::new(nn, 0.0));
        }
        if basis.len() == n {
            break;
        }
    }
    basis.split_off(start)
}

/// Rotates a vector so its first significant component is real and positive.
pub fn normalize_phase(v: &CVec) -> CVec {
    let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if vmax == 0.0 {
        return v.clone();
    }
    match v.iter().find(|z| z.norm() > 1e-8 * vmax) {
        Some(z) => {
            let phase = z.conj() / z.norm();
            v * phase
        }
        None => v.clone(),
    }
}

pub fn unit(v: &CVec) -> Option<CVec> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        None
    } else {
        Some(v / C64::new(n, 0.0))
    }
}

/// Determinant via partial-pivoting LU.
pub fn det(m: &CMat) -> C64 {
    if m.nrows() == 0 {
        return ONE;
    }
    m.clone().lu().determinant()
}

/// Solves `m x = b`; `None` when a pivot vanishes.
pub fn solve(m: &CMat, b: &CVec) -> Option<CVec> {
    m.clone().lu().solve(b)
}

pub fn solve_mat(m: &CMat, b: &CMat) -> Option<CMat> {
    m.clone().lu().solve(b)
}

/// 1-norm condition estimate `‖m‖₁ · est(‖m⁻¹‖₁)` by Hager's power iteration.
///
/// Returns `f64::INFINITY` when the factorization has a zero pivot.
pub fn condition_estimate_1(m: &CMat) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 1.0;
    }
    let lu = m.clone().lu();
    let lu_h = m.adjoint().lu();
    let mut x = CVec::from_element(n, C64::new(1.0 / n as f64, 0.0));
    let mut est = 0.0;
    for _ in 0..5 {
        let y = match lu.solve(&x) {
            Some(y) => y,
            None => return f64::INFINITY,
        };
        est = y.iter().map(|z| z.norm()).sum::<f64>();
        let xi = y.map(|z| if z.norm() == 0.0 { ONE } else { z / z.norm() });
        let z = match lu_h.solve(&xi) {
            Some(z) => z,
            None => return f64::INFINITY,
        };
        let (jmax, zmax) =
            z.iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        let ztx = inner(&x, &z).re;
        if zmax <= ztx {
            break;
        }
        x = CVec::zeros(n);
        x[jmax] = ONE;
    }
    if !est.is_finite() {
        return f64::INFINITY;
    }
    norm1(m) * est
}

/// Eigenvalues of a general complex matrix via complex Schur form.
pub fn eigenvalues(m: &CMat) -> Option<Vec<C64>> {
    let n = m.nrows();
    if n == 0 {
        return Some(Vec::new());
    }
    let schur = m.clone().try_schur(1e-15, 10_000)?;
    let (_, t) = schur.unpack();
    Some((0..n).map(|i| t[(i, i)]).collect())
}

/// Eigenvalues of a small dense complex matrix, returned sorted by (Re, Im).
pub fn eigenvalues_sorted(m: &CMat) -> Option<Vec<C64>> {
    let mut ev = eigenvalues(m)?;
    ev.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(core::cmp::Ordering::Equal))
    });
    Some(ev)
}
