//! Exponential-polynomial integrals and grid quadrature.

use crate::linalg::{CVec, C64};
use alloc::vec;
use alloc::vec::Vec;

/// Largest power handled by [`exp_poly_integral`].
pub const MAX_POWER: usize = 16;

const SERIES_RADIUS: f64 = 1e-3;
const SERIES_TERMS: usize = 20;

/// `Iⱼ(λ) = ∫₋₁⁰ e^{λs} sʲ ds`.
///
/// Powers above [`MAX_POWER`] are evaluated the same way but are outside the
/// tested range.
pub fn exp_poly_integral(lambda: C64, j: usize) -> C64 {
    exp_poly_integrals(lambda, j)[j]
}

/// `[I₀(λ), …, I_J(λ)]` in one pass.
///
/// Near the origin a 20-term Taylor series is used. Elsewhere `I₀` is closed
/// form and `Iⱼ` follows the upward recurrence `Iⱼ = (−(−1)ʲe^{−λ} − j Iⱼ₋₁)/λ`
/// while `|λ| ≥ j`; for `|λ| < j` the recurrence amplifies rounding by `j/|λ|`
/// per step, so the convergent series
/// `Iⱼ = (−1)ʲ e^{−λ} Σₖ λᵏ / ((j+1)(j+2)⋯(j+k+1))` is summed instead.
pub fn exp_poly_integrals(lambda: C64, max_j: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); max_j + 1];
    let r = lambda.norm();
    if r <= SERIES_RADIUS {
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = taylor(lambda, j);
        }
        return out;
    }
    let e = (-lambda).exp();
    out[0] = (C64::new(1.0, 0.0) - e) / lambda;
    for j in 1..=max_j {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        out[j] = if r >= j as f64 {
            (-e * sign - out[j - 1] * j as f64) / lambda
        } else {
            gamma_series(lambda, j, e) * sign
        };
    }
    out
}

fn taylor(lambda: C64, j: usize) -> C64 {
    // ∫₋₁⁰ s^{j+k} ds = (−1)^{j+k}/(j+k+1)
    let mut sum = C64::new(0.0, 0.0);
    let mut pow = C64::new(1.0, 0.0);
    let mut fact = 1.0;
    for k in 0..SERIES_TERMS {
        if k > 0 {
            pow *= lambda;
            fact *= k as f64;
        }
        let sign = if (j + k).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += pow * (sign / ((j + k + 1) as f64 * fact));
    }
    sum
}

fn gamma_series(lambda: C64, j: usize, e: C64) -> C64 {
    let mut term = C64::new(1.0 / (j + 1) as f64, 0.0);
    let mut sum = term;
    for k in 1..400 {
        term = term * lambda / (j + k + 1) as f64;
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
    }
    e * sum
}

/// Composite trapezoid over equispaced samples.
pub fn trapezoid(values: &[C64], h: f64) -> C64 {
    match values.len() {
        0 | 1 => C64::new(0.0, 0.0),
        len => {
            let inner: C64 = values[1..len - 1].iter().sum();
            (inner + (values[0] + values[len - 1]) * 0.5) * h
        }
    }
}

/// Running integral `∫_{x₀}^{xᵢ} f` for every node, by trapezoid.
pub fn cumulative_trapezoid(values: &[C64], h: f64) -> Vec<C64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = C64::new(0.0, 0.0);
    out.push(acc);
    for w in values.windows(2) {
        acc += (w[0] + w[1]) * (0.5 * h);
        out.push(acc);
    }
    out
}

/// Composite trapezoid over vector samples.
pub fn trapezoid_vec(values: &[CVec], h: f64) -> CVec {
    let n = values.first().map_or(0, |v| v.len());
    let mut acc = CVec::zeros(n);
    let len = values.len();
    if len < 2 {
        return acc;
    }
    for (i, v) in values.iter().enumerate() {
        let w = if i == 0 || i == len - 1 { 0.5 * h } else { h };
        acc.axpy(C64::new(w, 0.0), v, C64::new(1.0, 0.0));
    }
    acc
}

/// Running integral over vector samples, by trapezoid.
pub fn cumulative_trapezoid_vec(values: &[CVec], h: f64) -> Vec<CVec> {
    let n = values.first().map_or(0, |v| v.len());
    let mut out = Vec::with_capacity(values.len());
    let mut acc = CVec::zeros(n);
    out.push(acc.clone());
    let half = C64::new(0.5 * h, 0.0);
    for w in values.windows(2) {
        acc.axpy(half, &w[0], C64::new(1.0, 0.0));
        acc.axpy(half, &w[1], C64::new(1.0, 0.0));
        out.push(acc.clone());
    }
    out
}

/// Running integral with fourth-order accuracy on a uniform grid.
///
/// Interior panels use the cubic through the four nearest nodes,
/// `h/24 (−f₋₁ + 13f₀ + 13f₁ − f₂)`; the two end panels use the one-sided cubic
/// `h/24 (9f₀ + 19f₁ − 5f₂ + f₃)`. Grids with fewer than four nodes fall back
/// to the trapezoid rule.
pub fn cumulative_fourth_order_vec(values: &[CVec], h: f64) -> Vec<CVec> {
    let len = values.len();
    if len < 4 {
        return cumulative_trapezoid_vec(values, h);
    }
    let n = values[0].len();
    let w = |c: f64| C64::new(c * h / 24.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(len);
    let mut acc = CVec::zeros(n);
    out.push(acc.clone());
    for i in 0..len - 1 {
        let (idx, coef): ([usize; 4], [f64; 4]) = if i == 0 {
            ([0, 1, 2, 3], [9.0, 19.0, -5.0, 1.0])
        } else if i == len - 2 {
            ([len - 1, len - 2, len - 3, len - 4], [9.0, 19.0, -5.0, 1.0])
        } else {
            ([i - 1, i, i + 1, i + 2], [-1.0, 13.0, 13.0, -1.0])
        };
        for (k, cf) in idx.iter().zip(coef) {
            acc.axpy(w(cf), &values[*k], one);
        }
        out.push(acc.clone());
    }
    out
}

/// Adaptive Simpson quadrature of a complex function on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, tol: f64) -> C64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 24)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    fa: C64,
    fm: C64,
    fb: C64,
    whole: C64,
    tol: f64,
    depth: u32,
) -> C64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
    let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
    let diff = left + right - whole;
    if depth == 0 || diff.norm() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Float;
    use proptest::prelude::*;

    #[test]
    fn fourth_order_running_integral() {
        // ∫₀ᵗ e^{is} ds = (e^{it} − 1)/i
        let mut errs = alloc::vec::Vec::new();
        for m in [32usize, 64] {
            let h = 2.0 / m as f64;
            let vals: alloc::vec::Vec<CVec> =
                (0..=m).map(|i| CVec::from_element(1, C64::new(0.0, i as f64 * h).exp())).collect();
            let cum = cumulative_fourth_order_vec(&vals, h);
            let err = (0..=m)
                .map(|i| (cum[i][0] - (C64::new(0.0, i as f64 * h).exp() - 1.0) / C64::new(0.0, 1.0)).norm())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[0] < 1e-6, "{errs:?}");
        assert!(errs[1] < errs[0] / 12.0, "{errs:?}");
        let cubic: alloc::vec::Vec<CVec> =
            (0..=5).map(|i| CVec::from_element(1, C64::new(Float::powi(i as f64 * 0.2, 3), 0.0))).collect();
        let cum = cumulative_fourth_order_vec(&cubic, 0.2);
        assert!((cum[5][0].re - 0.25).abs() < 1e-14);
    }

    fn oracle(lambda: C64, j: usize) -> C64 {
        let peak = Float::exp(-lambda.re).max(1.0);
        adaptive_simpson(&|s: f64| (lambda * s).exp() * Float::powi(s, j as i32), -1.0, 0.0, 1e-15 * peak)
    }

    #[test]
    fn closed_forms() {
        assert!((exp_poly_integral(C64::new(0.0, 0.0), 0) - 1.0).norm() < 1e-15);
        let v = exp_poly_integral(C64::new(1.0, 0.0), 0);
        assert!((v.re - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((exp_poly_integral(C64::new(0.0, 0.0), 3) + 0.25).norm() < 1e-15);
    }

    #[test]
    fn matches_simpson_at_two_plus_three_i() {
        let l = C64::new(2.0, 3.0);
        let diff = (exp_poly_integral(l, 3) - oracle(l, 3)).norm();
        assert!(diff < 1e-12, "diff {diff}");
    }

    #[test]
    fn continuous_across_series_switch() {
        // dIⱼ/dλ = Iⱼ₊₁, so the jump across the switch minus its first-order part is O(δ²)
        for j in 0..MAX_POWER {
            for dir in [C64::new(1.0, 0.0), C64::new(0.6, 0.8), C64::new(-1.0, 0.0)] {
                let (lo, hi) = (dir * (1e-3 - 1e-6), dir * (1e-3 + 1e-6));
                let a = exp_poly_integral(lo, j);
                let b = exp_poly_integral(hi, j);
                let slope = exp_poly_integral(dir * 1e-3, j + 1);
                let jump = (b - a - slope * (hi - lo)).norm();
                assert!(jump < 1e-10, "j={j} jump {jump}");
            }
        }
    }

    #[test]
    fn branches_agree_at_the_switch() {
        for j in 0..=MAX_POWER {
            for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-0.6, 0.8)] {
                for r in [1e-3 - 1e-6, 1e-3 + 1e-6] {
                    let l = dir * r;
                    let series = taylor(l, j);
                    let e = (-l).exp();
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let other = if j == 0 { (1.0 - e) / l } else { gamma_series(l, j, e) * sign };
                    assert!((series - other).norm() < 1e-10, "j={j} r={r}");
                }
            }
        }
    }

    #[test]
    fn small_lambda_high_power_is_accurate() {
        // the plain recurrence loses every digit here
        let l = C64::new(0.3, -0.2);
        for j in [8, 12, 16] {
            let rel = (exp_poly_integral(l, j) - oracle(l, j)).norm() / oracle(l, j).norm();
            assert!(rel < 1e-12, "j={j} rel {rel}");
        }
    }

    #[test]
    fn cumulative_trapezoid_is_exact_for_linear() {
        let h = 0.1;
        let vals: Vec<C64> = (0..=10).map(|i| C64::new(i as f64 * h, 0.0)).collect();
        let cum = cumulative_trapezoid(&vals, h);
        assert!((cum[10].re - 0.5).abs() < 1e-14);
        assert!((trapezoid(&vals, h) - cum[10]).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn matches_quadrature(re in -20.0f64..20.0, im in -60.0f64..60.0, j in 0usize..=16) {
            let l = C64::new(re, im);
            let want = oracle(l, j);
            let got = exp_poly_integral(l, j);
            let scale = want.norm().max(1e-3);
            prop_assert!((got - want).norm() / scale < 1e-9, "λ={l} j={j} got={got} want={want}");
        }
    }
}
