//! Zero location for quasipolynomials `H(z) = Σ a_mn z^m e^{nz}` through the
//! real and imaginary parts of `H(iy)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::contour::{winding_rect_guarded, Rect};
use crate::linalg::C64;
use crate::{Error, Result};

/// Widest interval [`real_zeros`] accepts.
pub const MAX_SCAN_WIDTH: f64 = 1e4;
/// Bisection stops once the bracket is this narrow.
pub const BISECTION_TOL: f64 = 1e-12;
/// Zeros closer than this (or nearer than this to a zero of the other function) break alternation.
pub const MIN_GAP: f64 = 1e-9;
/// A zero nearer than this to a window end makes the window unusable.
pub const ENDPOINT_CLEARANCE: f64 = 1e-6;
/// Window sizes used by [`lhp_certificate`].
pub const CERTIFICATE_K: [u32; 2] = [4, 8];

const TOUCH_TOL: f64 = 1e-10;
const EPS_GRID: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct QuasiPolynomial {
    terms: Vec<(u32, u32, C64)>,
}

impl QuasiPolynomial {
    pub fn new(terms: Vec<(u32, u32, C64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptyInput("quasipolynomial terms"));
        }
        let mut seen = BTreeMap::new();
        for &(m, n, a) in &terms {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::NonFinite("quasipolynomial coefficient"));
            }
            if seen.insert((m, n), ()).is_some() {
                return Err(Error::InvalidInput(format!("duplicate term z^{m} e^{{{n}z}}")));
            }
        }
        Ok(Self { terms })
    }

    /// Real-coefficient constructor.
    pub fn real(terms: &[(u32, u32, f64)]) -> Result<Self> {
        Self::new(terms.iter().map(|&(m, n, a)| (m, n, C64::new(a, 0.0))).collect())
    }

    pub fn terms(&self) -> &[(u32, u32, C64)] {
        &self.terms
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.terms.iter().map(|&(m, n, a)| a * z.powu(m) * (z * n as f64).exp()).sum()
    }

    pub fn derivative(&self, z: C64) -> C64 {
        self.terms
            .iter()
            .map(|&(m, n, a)| {
                let e = (z * n as f64).exp();
                let lower = if m == 0 { C64::new(0.0, 0.0) } else { z.powu(m - 1) * m as f64 };
                a * e * (lower + z.powu(m) * n as f64)
            })
            .sum()
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.2.im == 0.0)
    }
}

/// `(r, s)` of the term `a_rs z^r e^{sz}`, `a_rs ≠ 0`, with `r ≥ m` and `s ≥ n` for every term.
pub fn principal_term(qp: &QuasiPolynomial) -> Option<(u32, u32)> {
    let live = || qp.terms.iter().filter(|t| t.2 != C64::new(0.0, 0.0));
    let r = live().map(|t| t.0).max()?;
    let s = live().map(|t| t.1).max()?;
    live().any(|t| t.0 == r && t.1 == s).then_some((r, s))
}

/// `Σ y^p (α cos qy + β sin qy)` with real coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrigPolynomial {
    terms: BTreeMap<(u32, u32), (f64, f64)>,
}

impl TrigPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Adds `y^p (α cos qy + β sin qy)`.
    pub fn add_term(&mut self, p: u32, q: u32, alpha: f64, beta: f64) {
        let e = self.terms.entry((p, q)).or_insert((0.0, 0.0));
        e.0 += alpha;
        // sin 0y vanishes
        if q != 0 {
            e.1 += beta;
        }
        if e.0 == 0.0 && e.1 == 0.0 {
            self.terms.remove(&(p, q));
        }
    }

    pub fn from_terms(terms: &[(u32, u32, f64, f64)]) -> Self {
        let mut t = Self::zero();
        for &(p, q, a, b) in terms {
            t.add_term(p, q, a, b);
        }
        t
    }

    /// `(p, q, α, β)` in ascending `(p, q)`.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64, f64)> + '_ {
        self.terms.iter().map(|(&(p, q), &(a, b))| (p, q, a, b))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_frequency(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(p, q), &(a, b))| {
                let (s, c) = (q as f64 * y).sin_cos();
                y.powi(p as i32) * (a * c + b * s)
            })
            .sum()
    }

    /// Analytic continuation to complex arguments.
    pub fn eval_complex(&self, w: C64) -> C64 {
        self.terms
            .iter()
            .map(|(&(p, q), &(a, b))| {
                let qw = w * q as f64;
                w.powu(p) * (qw.cos() * a + qw.sin() * b)
            })
            .sum()
    }

    /// `Σ |y|^p (|α| + |β|)`, the size against which a value counts as zero.
    pub fn magnitude(&self, y: f64) -> f64 {
        self.terms.iter().map(|(&(p, _), &(a, b))| y.abs().powi(p as i32) * (a.abs() + b.abs())).sum()
    }

    pub fn derivative(&self) -> Self {
        let mut d = Self::zero();
        for (&(p, q), &(a, b)) in &self.terms {
            if p > 0 {
                d.add_term(p - 1, q, p as f64 * a, p as f64 * b);
            }
            if q > 0 {
                let qf = q as f64;
                d.add_term(p, q, qf * b, -qf * a);
            }
        }
        d
    }
}

/// `H(iy) = F(y) + iG(y)` by substituting `i^m` and `e^{iny} = cos ny + i sin ny`.
pub fn split_fg(qp: &QuasiPolynomial) -> Result<(TrigPolynomial, TrigPolynomial)> {
    if !qp.is_real() {
        return Err(Error::ComplexCoefficients);
    }
    let mut f = TrigPolynomial::zero();
    let mut g = TrigPolynomial::zero();
    for &(m, n, a) in &qp.terms {
        let a = a.re;
        // i^m = u + iv
        let (u, v) = match m % 4 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        };
        f.add_term(m, n, a * u, -a * v);
        g.add_term(m, n, a * v, a * u);
    }
    Ok((f, g))
}

/// Zeros of a trigonometric polynomial on a closed interval.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZeroSet {
    /// All zeros found, ascending; multiple zeros appear once.
    pub zeros: Vec<f64>,
    /// Zeros judged to be multiple.
    pub multiple: Vec<f64>,
}

impl ZeroSet {
    pub fn count(&self) -> usize {
        self.zeros.len()
    }

    pub fn has_multiple(&self) -> bool {
        !self.multiple.is_empty()
    }
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    while b - a > BISECTION_TOL {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn scan_step(tp: &TrigPolynomial) -> f64 {
    match tp.max_frequency() {
        0 => 0.01,
        q => 0.01f64.min(PI / (8.0 * q as f64)),
    }
}

/// Zeros of `tp` on `[lo, hi]` by a sign-change scan and bisection.
///
/// Zeros of even multiplicity do not change sign; they are found as zeros of
/// the derivative where `|tp|` is negligible against [`TrigPolynomial::magnitude`],
/// and flagged as multiple together with any sign change where the derivative
/// also vanishes.
pub fn real_zeros(tp: &TrigPolynomial, lo: f64, hi: f64) -> Result<ZeroSet> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidInput(format!("bad scan interval [{lo}, {hi}]")));
    }
    if hi - lo > MAX_SCAN_WIDTH {
        return Err(Error::InvalidInput(format!("scan interval wider than {MAX_SCAN_WIDTH}")));
    }
    if tp.is_zero() {
        return Err(Error::InvalidInput("identically zero trigonometric polynomial".into()));
    }
    let d = tp.derivative();
    let f = |y: f64| tp.eval(y);
    let tiny = |y: f64, v: f64| v.abs() <= TOUCH_TOL * tp.magnitude(y).max(f64::MIN_POSITIVE);
    let is_multiple = |y: f64| {
        let dm = d.magnitude(y).max(tp.magnitude(y)).max(f64::MIN_POSITIVE);
        d.eval(y).abs() <= 1e-7 * dm
    };
    let steps = ((hi - lo) / scan_step(tp)).ceil().max(1.0) as usize;
    let at = |i: usize| if i == steps { hi } else { lo + (hi - lo) * i as f64 / steps as f64 };
    let mut out = ZeroSet::default();
    let push = |out: &mut ZeroSet, y: f64, multiple: bool| {
        if out.zeros.last().is_some_and(|&z| (y - z).abs() <= 10.0 * BISECTION_TOL) {
            if multiple && !out.multiple.last().is_some_and(|&z| (y - z).abs() <= 10.0 * BISECTION_TOL) {
                out.multiple.push(y);
            }
            return;
        }
        out.zeros.push(y);
        if multiple {
            out.multiple.push(y);
        }
    };
    let mut ya = at(0);
    let mut fa = f(ya);
    let mut da = d.eval(ya);
    if fa == 0.0 {
        push(&mut out, ya, is_multiple(ya));
    }
    for i in 1..=steps {
        let yb = at(i);
        let fb = f(yb);
        let db = d.eval(yb);
        if fb == 0.0 {
            push(&mut out, yb, is_multiple(yb));
        } else if fa != 0.0 && (fa > 0.0) != (fb > 0.0) {
            let z = bisect(&f, ya, yb);
            push(&mut out, z, is_multiple(z));
        } else if fa != 0.0 && da != 0.0 && db != 0.0 && (da > 0.0) != (db > 0.0) {
            // a turning point without a sign change: an even zero if |f| vanishes there
            let c = bisect(&|y| d.eval(y), ya, yb);
            if tiny(c, f(c)) {
                push(&mut out, c, true);
            }
        }
        ya = yb;
        fa = fb;
        da = db;
    }
    Ok(out)
}

/// Outcome of the counting law on one window.
#[derive(Clone, Debug, PartialEq)]
pub enum CountVerdict {
    Holds {
        count: usize,
    },
    Fails {
        count: usize,
        expected: usize,
    },
    /// A multiple zero was flagged; the count is not meaningful.
    Inconclusive {
        multiple: Vec<f64>,
    },
}

impl CountVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, CountVerdict::Holds { .. })
    }
}

/// The window `[−2πk + ε, 2πk + ε]`.
pub fn count_window(k: u32, eps: f64) -> (f64, f64) {
    let w = 2.0 * PI * k as f64;
    (-w + eps, w + eps)
}

/// Whether `tp` has exactly `4ks + r` real zeros on `[−2πk + ε, 2πk + ε]`.
pub fn count_check(tp: &TrigPolynomial, r: u32, s: u32, k: u32, eps: f64) -> Result<CountVerdict> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("counting window needs k ≥ 2, got {k}")));
    }
    let (lo, hi) = count_window(k, eps);
    let zs = real_zeros(tp, lo, hi)?;
    if zs.has_multiple() {
        return Ok(CountVerdict::Inconclusive { multiple: zs.multiple });
    }
    let expected = (4 * k * s + r) as usize;
    Ok(if zs.count() == expected {
        CountVerdict::Holds { count: expected }
    } else {
        CountVerdict::Fails { count: zs.count(), expected }
    })
}

/// Candidate shifts `ε = (π/2)·i/64`, `i = 1..64`, with no zero within
/// [`ENDPOINT_CLEARANCE`] of either window end.
pub fn admissible_epsilons(tp: &TrigPolynomial, k: u32) -> Vec<f64> {
    (1..EPS_GRID)
        .map(|i| 0.5 * PI * i as f64 / EPS_GRID as f64)
        .filter(|&eps| {
            let (lo, hi) = count_window(k, eps);
            [lo, hi]
                .iter()
                .all(|&e| real_zeros(tp, e - ENDPOINT_CLEARANCE, e + ENDPOINT_CLEARANCE).is_ok_and(|z| z.count() == 0))
        })
        .collect()
}

/// The counting law with some admissible `ε`: the first shift for which the
/// count matches, else the verdict at the first admissible shift.
pub fn count_check_some_eps(tp: &TrigPolynomial, r: u32, s: u32, k: u32) -> Result<(CountVerdict, f64)> {
    let mut first = None;
    for eps in admissible_epsilons(tp, k) {
        let v = count_check(tp, r, s, k, eps)?;
        if v.holds() {
            return Ok((v, eps));
        }
        first.get_or_insert((v, eps));
    }
    first.ok_or_else(|| Error::InvalidInput(format!("no admissible window shift for k = {k}")))
}

/// Zeros of `f` and `g` on `[lo, hi]` are simple, strictly interleaved and at least [`MIN_GAP`] apart.
pub fn alternation_check(f: &TrigPolynomial, g: &TrigPolynomial, lo: f64, hi: f64) -> Result<bool> {
    let zf = real_zeros(f, lo, hi)?;
    let zg = real_zeros(g, lo, hi)?;
    if zf.has_multiple() || zg.has_multiple() {
        return Ok(false);
    }
    let mut merged: Vec<(f64, bool)> =
        zf.zeros.iter().map(|&y| (y, true)).chain(zg.zeros.iter().map(|&y| (y, false))).collect();
    merged.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(merged.windows(2).all(|w| w[0].1 != w[1].1 && w[1].0 - w[0].0 > MIN_GAP))
}

/// Zeros of the analytic continuation of `tp` inside `[lo, hi] × [−height, height]`.
pub fn complex_zero_count(tp: &TrigPolynomial, lo: f64, hi: f64, height: f64) -> Result<i64> {
    let d = tp.derivative();
    let fg = |w: C64| {
        let v = tp.eval_complex(w);
        (v, d.eval_complex(w) / v)
    };
    Ok(winding_rect_guarded(&fg, &Rect::new(lo, hi, -height, height))?.count)
}

/// Which half of `H(iy) = F + iG` carried the certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Zeros of `F`, sign of `G F′ < 0`.
    F,
    /// Zeros of `G`, sign of `G′ F > 0`.
    G,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// Every zero in the largest window passed the sign test.
    Window {
        route: Route,
        k: Vec<u32>,
        eps: Vec<f64>,
        zeros: usize,
        min_margin: f64,
    },
    /// `G′F − GF′ ≤ 0` at a real zero `y0`.
    SignViolation {
        route: Route,
        y0: f64,
        value: f64,
    },
    /// The analytic continuation has zeros off the real line.
    OffAxisZeros {
        route: Route,
        window: (f64, f64),
        complex: i64,
        real: usize,
    },
    /// `H` has zeros in the probe rectangle of the closed right half-plane.
    RightHalfPlaneZeros {
        rect: Rect,
        count: i64,
    },
    NoPrincipalTerm,
    ComplexCoefficients,
    /// Neither `F` nor `G` shows the counting law.
    NoRealZeroEvidence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub witness: Witness,
}

/// Rectangle of the right half-plane searched when the criterion does not apply.
pub const RHP_PROBE: Rect = Rect { re_min: 1e-3, re_max: 4.0, im_min: -50.0, im_max: 50.0 };

fn rhp_probe(qp: &QuasiPolynomial) -> Option<Certificate> {
    let fg = |z: C64| {
        let v = qp.eval(z);
        (v, qp.derivative(z) / v)
    };
    match winding_rect_guarded(&fg, &RHP_PROBE) {
        Ok(w) if w.count > 0 => Some(Certificate {
            verdict: Verdict::Refuted,
            witness: Witness::RightHalfPlaneZeros { rect: RHP_PROBE, count: w.count },
        }),
        _ => None,
    }
}

fn inconclusive(qp: &QuasiPolynomial, witness: Witness) -> Certificate {
    rhp_probe(qp).unwrap_or(Certificate { verdict: Verdict::Inconclusive, witness })
}

/// Evidence that every zero of `H` lies in the open left half-plane.
///
/// For the route through `F` (then `G`): the counting law on the windows
/// `k ∈ {4, 8}` together with a winding count on `[window] × [−1, 1]` serve as
/// evidence that the zeros are real; then the sign of `G′F − GF′` is checked at
/// every zero of the larger window. A negative sign or off-axis zeros refute
/// stability, since both are excluded when all zeros lie to the left. The
/// certificate is finite-window evidence, not a proof.
pub fn lhp_certificate(qp: &QuasiPolynomial) -> Certificate {
    let Some((r, s)) = principal_term(qp) else {
        return inconclusive(qp, Witness::NoPrincipalTerm);
    };
    let Ok((f, g)) = split_fg(qp) else {
        return inconclusive(qp, Witness::ComplexCoefficients);
    };
    let (df, dg) = (f.derivative(), g.derivative());
    for route in [Route::F, Route::G] {
        let tp = if route == Route::F { &f } else { &g };
        if tp.is_zero() {
            continue;
        }
        let mut eps_used = Vec::new();
        for &k in &CERTIFICATE_K {
            match count_check_some_eps(tp, r, s, k) {
                Ok((v, eps)) if v.holds() => eps_used.push(eps),
                _ => break,
            }
        }
        let k_big = CERTIFICATE_K[CERTIFICATE_K.len() - 1];
        let eps_big = match eps_used.last() {
            Some(&e) if eps_used.len() == CERTIFICATE_K.len() => e,
            _ => {
                // no counting law: look for zeros that left the real line
                let (lo, hi) = count_window(CERTIFICATE_K[0], 0.25 * PI);
                if let (Ok(real), Ok(complex)) = (real_zeros(tp, lo, hi), complex_zero_count(tp, lo, hi, 1.0)) {
                    if !real.has_multiple() && complex > real.count() as i64 {
                        return Certificate {
                            verdict: Verdict::Refuted,
                            witness: Witness::OffAxisZeros { route, window: (lo, hi), complex, real: real.count() },
                        };
                    }
                }
                continue;
            }
        };
        let (lo, hi) = count_window(k_big, eps_big);
        let Ok(zs) = real_zeros(tp, lo, hi) else { continue };
        match complex_zero_count(tp, lo, hi, 1.0) {
            Ok(c) if c == zs.count() as i64 => {}
            Ok(c) => {
                return Certificate {
                    verdict: Verdict::Refuted,
                    witness: Witness::OffAxisZeros { route, window: (lo, hi), complex: c, real: zs.count() },
                }
            }
            Err(_) => continue,
        }
        let mut min_margin = f64::INFINITY;
        for &y0 in &zs.zeros {
            let value = match route {
                Route::F => -g.eval(y0) * df.eval(y0),
                Route::G => dg.eval(y0) * f.eval(y0),
            };
            let scale = f.magnitude(y0).max(1.0) * g.magnitude(y0).max(1.0);
            let margin = value / scale;
            if margin < -TOUCH_TOL {
                return Certificate { verdict: Verdict::Refuted, witness: Witness::SignViolation { route, y0, value } };
            }
            min_margin = min_margin.min(margin);
        }
        if min_margin > TOUCH_TOL {
            return Certificate {
                verdict: Verdict::Certified,
                witness: Witness::Window {
                    route,
                    k: CERTIFICATE_K.to_vec(),
                    eps: eps_used,
                    zeros: zs.count(),
                    min_margin,
                },
            };
        }
    }
    inconclusive(qp, Witness::NoRealZeroEvidence)
}

/// `H(z) = z e^z + z + b e^z`, the characteristic quasipolynomial of the two-dimensional example.
pub fn example_quasipolynomial(b: f64) -> QuasiPolynomial {
    QuasiPolynomial::real(&[(1, 1, 1.0), (1, 0, 1.0), (0, 1, b)]).expect("valid terms")
}
