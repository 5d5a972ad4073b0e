//! Characteristic roots: asymptotic seeds, argument-principle counting,
//! Newton refinement and the Λ₀/Λ₁/Λ₂ partition.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::contour::{max_on_circle, winding_circle_guarded, winding_rect_guarded, Rect};
use crate::linalg::{det, eigenvalues, kernel_basis_scaled, C64};
use crate::model::{char_matrix, char_matrix_with_derivative, NeutralSystem};
use crate::{Error, Result};

/// `| |μ| − 1 | < UNIT_CIRCLE_TOL` puts an eigenvalue of `A₋₁` on the unit circle.
pub const UNIT_CIRCLE_TOL: f64 = 1e-9;
/// Roots with `Re λ ≥ −ON_AXIS_TOL` count as on the imaginary axis.
pub const ON_AXIS_TOL: f64 = 1e-9;
/// Largest window area accepted by [`locate_window_roots`].
pub const MAX_WINDOW_AREA: f64 = 1e4;
/// Radius of the circle giving `alg_mult` and the residual scale.
pub const MULT_RADIUS: f64 = 1e-4;
/// Relative kernel tolerance for `geo_mult`.
pub const KERNEL_TOL: f64 = 1e-8;
/// Required `|det Δ(λ)| / scale` after refinement.
pub const RESIDUAL_TOL: f64 = 1e-9;

const NEWTON_ITERS: usize = 50;
const LEAF_SIZE: f64 = 2.0;
const SPLIT_FRACTIONS: [f64; 7] = [0.5037, 0.5731, 0.4087, 0.6771, 0.3403, 0.7913, 0.2289];

/// Membership of a root in the circle around `λ̃ₘᵏ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeTag {
    /// Index of the distinct nonzero eigenvalue `μₘ` of `A₋₁`.
    pub m: usize,
    pub k: i64,
    /// Whether `μₘ ∈ σ₁`.
    pub on_unit_circle: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootRecord {
    pub lambda: C64,
    /// `|det Δ(λ)|`.
    pub residual: f64,
    /// `max |det Δ|` on the circle of radius [`MULT_RADIUS`].
    pub scale: f64,
    pub alg_mult: usize,
    pub geo_mult: usize,
    pub lattice: Option<LatticeTag>,
}

impl RootRecord {
    pub fn relative_residual(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            self.residual
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralWindow {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    /// Strip half-width for the partition.
    pub epsilon: f64,
    /// Lattice truncation used for tagging.
    pub k_max: usize,
}

impl SpectralWindow {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64, epsilon: f64, k_max: usize) -> Result<Self> {
        let w = Self { re_min, re_max, im_min, im_max, epsilon, k_max };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max, self.epsilon].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("spectral window"));
        }
        if !(self.re_min < self.re_max && self.im_min < self.im_max) {
            return Err(Error::InvalidInput(format!(
                "empty window [{}, {}]×[{}, {}]",
                self.re_min, self.re_max, self.im_min, self.im_max
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidInput(format!("epsilon {} outside (0, 1)", self.epsilon)));
        }
        let area = self.rect().width() * self.rect().height();
        if area > MAX_WINDOW_AREA {
            return Err(Error::InvalidInput(format!("window area {area:.1} exceeds {MAX_WINDOW_AREA}")));
        }
        Ok(())
    }

    pub fn rect(&self) -> Rect {
        Rect::new(self.re_min, self.re_max, self.im_min, self.im_max)
    }
}

/// A distinct eigenvalue of `A₋₁` with its algebraic multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenCluster {
    pub mu: C64,
    pub mult: usize,
}

/// Eigenvalues of `a` grouped into clusters.
///
/// Defective eigenvalues split by roughly `√ε·‖A‖` under rounding, so the
/// clustering radius is `1e-6·max(1, ‖A‖)` and each cluster is reported by its mean.
pub fn eigen_clusters(a: &crate::CMat) -> Result<Vec<EigenCluster>> {
    let ev = eigenvalues(a).ok_or(Error::EigensolveFailure)?;
    let tol = 1e-6 * crate::linalg::frobenius(a).max(1.0);
    let mut groups: Vec<(C64, Vec<C64>)> = Vec::new();
    for z in ev {
        match groups.iter_mut().find(|(c, _)| (*c - z).norm() < tol) {
            Some((c, members)) => {
                members.push(z);
                *c = members.iter().sum::<C64>() / members.len() as f64;
            }
            None => groups.push((z, alloc::vec![z])),
        }
    }
    let mut out: Vec<EigenCluster> =
        groups.into_iter().map(|(c, members)| EigenCluster { mu: c, mult: members.len() }).collect();
    out.sort_by(|a, b| cmp_complex(a.mu, b.mu));
    Ok(out)
}

pub fn on_unit_circle(mu: C64) -> bool {
    (mu.norm() - 1.0).abs() < UNIT_CIRCLE_TOL
}

fn cmp_complex(a: C64, b: C64) -> core::cmp::Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(core::cmp::Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(core::cmp::Ordering::Equal))
}

/// One `λ̃ₘᵏ = ln|μₘ| + i(arg μₘ + 2πk)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Seed {
    pub m: usize,
    pub k: i64,
    pub mu: C64,
    pub lambda: C64,
}

impl Seed {
    pub fn tag(&self) -> LatticeTag {
        LatticeTag { m: self.m, k: self.k, on_unit_circle: on_unit_circle(self.mu) }
    }
}

/// Zero eigenvalues of `A₋₁` are skipped (their chains recede to `Re λ → −∞`).
pub fn asymptotic_seeds(sys: &NeutralSystem, k_max: usize) -> Result<Vec<Seed>> {
    if k_max < 1 {
        return Err(Error::InvalidInput("k_max must be at least 1".into()));
    }
    let clusters = eigen_clusters(sys.a_minus1())?;
    let zero_tol = 1e-12 * crate::linalg::frobenius(sys.a_minus1()).max(1.0);
    let mut seeds = Vec::new();
    for (m, cl) in clusters.iter().filter(|c| c.mu.norm() > zero_tol).enumerate() {
        for k in -(k_max as i64)..=(k_max as i64) {
            let lambda = C64::new(cl.mu.norm().ln(), cl.mu.arg() + 2.0 * PI * k as f64);
            seeds.push(Seed { m, k, mu: cl.mu, lambda });
        }
    }
    Ok(seeds)
}

/// `λ ↦ det Δ(λ)`.
pub fn det_fn(sys: &NeutralSystem) -> impl Fn(C64) -> C64 + '_ {
    move |l| det(&char_matrix(sys, l))
}

/// `λ ↦ (det Δ(λ), tr(Δ(λ)⁻¹Δ′(λ)))`, the determinant and its logarithmic derivative.
pub fn det_log_derivative(sys: &NeutralSystem) -> impl Fn(C64) -> (C64, C64) + '_ {
    move |l| {
        let (d, dp) = char_matrix_with_derivative(sys, l);
        let lu = d.lu();
        let det = lu.determinant();
        let g = lu.solve(&dp).map_or(C64::new(f64::INFINITY, 0.0), |x| x.trace());
        (det, g)
    }
}

/// Number of roots of `det Δ` inside the circle, with multiplicity.
pub fn winding_number(sys: &NeutralSystem, center: C64, radius: f64) -> Result<i64> {
    Ok(winding_circle_guarded(&det_log_derivative(sys), center, radius)?.count)
}

pub fn winding_number_rect(sys: &NeutralSystem, rect: &Rect) -> Result<i64> {
    Ok(winding_rect_guarded(&det_log_derivative(sys), rect)?.count)
}

/// `det Δ / (det Δ)′ = 1 / tr(Δ⁻¹Δ′)`; zero when `Δ` is exactly singular.
fn newton_step(sys: &NeutralSystem, lambda: C64) -> Option<C64> {
    let (d, dp) = char_matrix_with_derivative(sys, lambda);
    match d.lu().solve(&dp) {
        Some(x) => {
            let tr = x.trace();
            if tr.norm() == 0.0 || !tr.re.is_finite() || !tr.im.is_finite() {
                None
            } else {
                Some(C64::new(1.0, 0.0) / tr)
            }
        }
        None => Some(C64::new(0.0, 0.0)),
    }
}

fn plain_newton(sys: &NeutralSystem, start: C64, iters: usize) -> Option<C64> {
    let mut l = start;
    for _ in 0..iters {
        let step = newton_step(sys, l)?;
        l -= step;
        if !l.re.is_finite() || !l.im.is_finite() {
            return None;
        }
        if step.norm() < 1e-9 * (1.0 + l.norm()) {
            return Some(l);
        }
    }
    None
}

/// Multiplicity-aware Newton, keeping the iterate with the smallest `|det|`.
fn polish(sys: &NeutralSystem, start: C64, m: usize) -> C64 {
    let f = det_fn(sys);
    let mut l = start;
    let mut best = (f(l).norm(), l);
    for _ in 0..30 {
        let step = match newton_step(sys, l) {
            Some(s) => s * m as f64,
            None => break,
        };
        if step.norm() == 0.0 {
            break;
        }
        l -= step;
        let r = f(l).norm();
        if !r.is_finite() {
            break;
        }
        if r < best.0 {
            best = (r, l);
        }
        if step.norm() < 1e-15 * (1.0 + l.norm()) {
            break;
        }
    }
    best.1
}

fn local_count(sys: &NeutralSystem, lambda: C64, radius: f64) -> Result<(usize, f64)> {
    let f = det_log_derivative(sys);
    let mut last = None;
    for factor in [1.0, 1.37, 0.71, 1.93, 0.53] {
        match winding_circle_guarded(&f, lambda, radius * factor) {
            Ok(w) => return Ok((w.count.max(0) as usize, w.max_abs)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or(Error::NoConvergence("multiplicity circle".into())))
}

/// Natural size of the terms of `Δ(λ)`; entries of `Δ` at a root cancel against this.
pub(crate) fn term_scale(sys: &NeutralSystem, lambda: C64) -> f64 {
    let n = sys.n() as f64;
    let e = (-lambda).exp().norm();
    let a2 = sys.a2().coeffs().iter().map(crate::linalg::frobenius).sum::<f64>();
    let a3 = sys.a3().coeffs().iter().map(crate::linalg::frobenius).sum::<f64>();
    let spread = e.max(1.0);
    lambda.norm() * n.sqrt()
        + lambda.norm() * e * crate::linalg::frobenius(sys.a_minus1())
        + (lambda.norm() * a2 + a3) * spread
}

/// Kernel dimension of `Δ(λ)` at a refined root.
pub fn geometric_multiplicity(sys: &NeutralSystem, lambda: C64) -> usize {
    kernel_basis_scaled(&char_matrix(sys, lambda), KERNEL_TOL, term_scale(sys, lambda)).len()
}

fn finish(sys: &NeutralSystem, lambda: C64) -> Result<RootRecord> {
    let f = det_fn(sys);
    for radius in [MULT_RADIUS, 1e-6] {
        let (m, scale) = match local_count(sys, lambda, radius) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if m == 0 {
            continue;
        }
        let l = polish(sys, lambda, m);
        let residual = f(l).norm();
        let scale = scale.max(max_on_circle(&f, l, radius, 64));
        if residual < RESIDUAL_TOL * scale {
            let (alg, scale) = match local_count(sys, l, radius) {
                Ok((a, s)) if a > 0 => (a, s),
                _ => (m, scale),
            };
            let geo = geometric_multiplicity(sys, l).clamp(1, alg);
            return Ok(RootRecord { lambda: l, residual, scale, alg_mult: alg, geo_mult: geo, lattice: None });
        }
    }
    Err(Error::NoConvergence(format!("residual test failed near {lambda}")))
}

/// Newton refinement of a root from `seed`, with quadrisection fallback.
pub fn refine_root(sys: &NeutralSystem, seed: C64) -> Result<RootRecord> {
    if let Some(l) = plain_newton(sys, seed, NEWTON_ITERS) {
        if let Ok(rec) = finish(sys, l) {
            return Ok(rec);
        }
    }
    let l = quadrisection(sys, seed)?;
    let l = plain_newton(sys, l, NEWTON_ITERS).unwrap_or(l);
    finish(sys, l)
}

fn quadrisection(sys: &NeutralSystem, seed: C64) -> Result<C64> {
    let f = det_log_derivative(sys);
    let mut square = None;
    'outer: for half in [0.5, 1.0, 2.0] {
        for jitter in [1.0, 1.0137, 0.9871] {
            let h = half * jitter;
            let r = Rect::new(seed.re - h, seed.re + h, seed.im - h, seed.im + h);
            if let Ok(w) = winding_rect_guarded(&f, &r) {
                if w.count > 0 {
                    square = Some(r);
                    break 'outer;
                }
                break;
            }
        }
    }
    let mut rect = square.ok_or_else(|| Error::NoConvergence(format!("no root within 2 of {seed}")))?;
    for _ in 0..40 {
        let mut next = None;
        'split: for (dx, dy) in [(0.0, 0.0), (0.013, 0.017), (-0.021, 0.011), (0.031, -0.027)] {
            let cx = rect.center().re + dx * rect.width();
            let cy = rect.center().im + dy * rect.height();
            let quads = [
                Rect::new(rect.re_min, cx, rect.im_min, cy),
                Rect::new(cx, rect.re_max, rect.im_min, cy),
                Rect::new(rect.re_min, cx, cy, rect.im_max),
                Rect::new(cx, rect.re_max, cy, rect.im_max),
            ];
            for q in quads {
                match winding_rect_guarded(&f, &q) {
                    Ok(w) if w.count > 0 => {
                        next = Some(q);
                        break 'split;
                    }
                    Ok(_) => {}
                    Err(_) => continue 'split,
                }
            }
        }
        rect = next.ok_or_else(|| Error::NoConvergence(format!("quadrisection stalled near {}", rect.center())))?;
        if rect.width() < 1e-3 {
            if let Some(l) = plain_newton(sys, rect.center(), NEWTON_ITERS) {
                if (l - rect.center()).norm() < 2.0 * rect.width() {
                    return Ok(l);
                }
            }
        }
    }
    Ok(rect.center())
}

/// Every root inside the window, each once, sorted by `(Re, Im)`.
///
/// Roots lying in a seeded circle of radius [`tag_radius`] carry a lattice tag.
pub fn locate_window_roots(sys: &NeutralSystem, window: &SpectralWindow) -> Result<Vec<RootRecord>> {
    window.validate()?;
    let mut roots = locate_rect_roots(sys, &window.rect())?;
    tag_roots(sys, &mut roots, window.k_max)?;
    Ok(roots)
}

/// Untagged roots inside `rect`, sorted by `(Re, Im)`.
pub fn locate_rect_roots(sys: &NeutralSystem, rect: &Rect) -> Result<Vec<RootRecord>> {
    let f = det_log_derivative(sys);
    let pad = 1e-3 * rect.width().min(rect.height()).min(1.0);
    let mut outer = None;
    let mut last_err = None;
    for attempt in 0..=5 {
        let r = rect.inflate(pad * attempt as f64 * 1.37);
        match winding_rect_guarded(&f, &r) {
            Ok(w) => {
                outer = Some((r, w.count));
                break;
            }
            Err(e) => last_err = Some(e),
        }
    }
    let (r, count) = match outer {
        Some(v) => v,
        None => return Err(last_err.unwrap_or(Error::NoConvergence("outer contour".into()))),
    };
    let mut roots = Vec::new();
    subdivide(sys, &r, count, &mut roots)?;
    roots.retain(|rec| rect.contains(rec.lambda));
    sort_and_dedup(&mut roots);
    Ok(roots)
}

pub fn sort_and_dedup(roots: &mut Vec<RootRecord>) {
    roots.sort_by(|a, b| cmp_complex(a.lambda, b.lambda));
    roots.dedup_by(|a, b| (a.lambda - b.lambda).norm() < 1e-8 * (1.0 + a.lambda.norm()));
}

fn subdivide(sys: &NeutralSystem, rect: &Rect, count: i64, out: &mut Vec<RootRecord>) -> Result<()> {
    if count <= 0 {
        return Ok(());
    }
    let size = rect.width().max(rect.height());
    if size <= LEAF_SIZE {
        if let Some(l) = plain_newton(sys, rect.center(), NEWTON_ITERS) {
            if rect.contains(l) {
                if let Ok(rec) = finish(sys, l) {
                    if rect.contains(rec.lambda) && rec.alg_mult as i64 == count {
                        out.push(rec);
                        return Ok(());
                    }
                }
            }
        }
    }
    if size < 1e-9 {
        return Err(Error::NoConvergence(format!("cluster of {count} roots near {}", rect.center())));
    }
    let f = det_log_derivative(sys);
    let mut last_err = None;
    for frac in SPLIT_FRACTIONS {
        let (a, b) = rect.split(frac);
        let (ca, cb) = match (winding_rect_guarded(&f, &a), winding_rect_guarded(&f, &b)) {
            (Ok(wa), Ok(wb)) => (wa.count, wb.count),
            (Err(e), _) | (_, Err(e)) => {
                last_err = Some(e);
                continue;
            }
        };
        if ca + cb != count || ca < 0 || cb < 0 {
            last_err = Some(Error::WindingNotIntegral((ca + cb) as f64));
            continue;
        }
        subdivide(sys, &a, ca, out)?;
        subdivide(sys, &b, cb, out)?;
        return Ok(());
    }
    Err(last_err.unwrap_or(Error::NoConvergence("rectangle split".into())))
}

/// Splits a window into `parts` vertical strips of equal height for parallel search.
pub fn split_window(window: &SpectralWindow, parts: usize) -> Vec<Rect> {
    let parts = parts.max(1);
    let h = (window.im_max - window.im_min) / parts as f64;
    (0..parts)
        .map(|i| {
            let lo = window.im_min + h * i as f64;
            let hi = if i + 1 == parts { window.im_max } else { lo + h };
            Rect::new(window.re_min, window.re_max, lo, hi)
        })
        .collect()
}

/// A third of the smallest distance between distinct seeds.
pub fn tag_radius(seeds: &[Seed]) -> f64 {
    let mut d = f64::INFINITY;
    for (i, a) in seeds.iter().enumerate() {
        for b in &seeds[i + 1..] {
            d = d.min((a.lambda - b.lambda).norm());
        }
    }
    if d.is_finite() {
        d / 3.0
    } else {
        2.0 * PI / 3.0
    }
}

/// Attaches lattice tags from the seeds with `|k| ≤ k_max`.
pub fn tag_roots(sys: &NeutralSystem, roots: &mut [RootRecord], k_max: usize) -> Result<()> {
    let seeds = asymptotic_seeds(sys, k_max.max(1))?;
    let r = tag_radius(&seeds);
    for rec in roots.iter_mut() {
        rec.lattice = seeds
            .iter()
            .map(|s| (s, (s.lambda - rec.lambda).norm()))
            .filter(|(_, d)| *d < r)
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal))
            .map(|(s, _)| s.tag());
    }
    Ok(())
}

/// Roots refined from every seed with `|k| ≤ k_max`, tagged with their seed.
pub fn lattice_roots(sys: &NeutralSystem, k_max: usize, unit_circle_only: bool) -> Result<Vec<(Seed, RootRecord)>> {
    let seeds = asymptotic_seeds(sys, k_max)?;
    seeds
        .into_iter()
        .filter(|s| !unit_circle_only || on_unit_circle(s.mu))
        .map(|s| {
            let mut rec = refine_root(sys, s.lambda)?;
            rec.lattice = Some(s.tag());
            Ok((s, rec))
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Partition {
    pub l0: Vec<RootRecord>,
    pub l1: Vec<RootRecord>,
    pub l2: Vec<RootRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionClass {
    L0,
    L1,
    L2,
}

impl PartitionClass {
    pub fn label(&self) -> &'static str {
        match self {
            PartitionClass::L0 => "L0",
            PartitionClass::L1 => "L1",
            PartitionClass::L2 => "L2",
        }
    }
}

/// `Re λ ≤ −ε` → Λ₀; strip roots tagged to a unit-circle `μ` → Λ₁; the rest,
/// including on-axis roots and untagged strip roots, → Λ₂.
pub fn classify_root(rec: &RootRecord, epsilon: f64) -> PartitionClass {
    let re = rec.lambda.re;
    if re <= -epsilon {
        PartitionClass::L0
    } else if re < -ON_AXIS_TOL && rec.lattice.is_some_and(|t| t.on_unit_circle) {
        PartitionClass::L1
    } else {
        PartitionClass::L2
    }
}

pub fn spectral_partition(roots: &[RootRecord], epsilon: f64) -> Result<Partition> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon {epsilon} must be positive")));
    }
    let mut p = Partition::default();
    for rec in roots {
        match classify_root(rec, epsilon) {
            PartitionClass::L0 => p.l0.push(rec.clone()),
            PartitionClass::L1 => p.l1.push(rec.clone()),
            PartitionClass::L2 => p.l2.push(rec.clone()),
        }
    }
    Ok(p)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadiiReport {
    /// `r_k = max_m |λₘᵏ − λ̃ₘᵏ|` over `μₘ ∈ σ₁`, for `k = 0..=k_max`.
    pub radii: Vec<f64>,
    /// The same for the mirrored chain `k ↦ −k−1`.
    pub radii_mirror: Vec<f64>,
    /// `S_K = Σ_{k≤K} (r_k² + r̄_k²)` over both chains.
    pub partial_sums: Vec<f64>,
    /// Smallest `k₀` with both radius sequences non-increasing on `[k₀, k_max]`.
    pub decreasing_from: usize,
    /// `max |S_K − S_L|` over `K, L` in the last half of the range.
    pub cauchy_gap: f64,
    /// Least-squares slope of `ln r_k` against `ln k` over the last half.
    pub decay_exponent: f64,
    pub summable_evidence: bool,
}

/// Tolerance on the partial-sum spread for [`RadiiReport::summable_evidence`].
pub const CAUCHY_TOL: f64 = 1e-6;

pub fn radii_summability_check(sys: &NeutralSystem, k_max: usize) -> Result<RadiiReport> {
    if k_max < 2 {
        return Err(Error::InsufficientData("radii need k_max ≥ 2"));
    }
    let seeds: Vec<Seed> = asymptotic_seeds(sys, k_max + 1)?.into_iter().filter(|s| on_unit_circle(s.mu)).collect();
    if seeds.is_empty() {
        return Err(Error::InvalidInput("σ₁ is empty; no root chains approach the imaginary axis".into()));
    }
    let mut radii = alloc::vec![0.0f64; k_max + 1];
    let mut mirror = alloc::vec![0.0f64; k_max + 1];
    for s in &seeds {
        let (slot, k) = if s.k >= 0 { (&mut radii, s.k as usize) } else { (&mut mirror, (-s.k - 1) as usize) };
        if k > k_max {
            continue;
        }
        let rec = refine_root(sys, s.lambda)?;
        slot[k] = slot[k].max((rec.lambda - s.lambda).norm());
    }
    Ok(summarize_radii(radii, mirror))
}

fn decreasing_from(r: &[f64]) -> usize {
    let mut k = r.len() - 1;
    while k > 0 && r[k - 1] >= r[k] {
        k -= 1;
    }
    k
}

pub fn summarize_radii(radii: Vec<f64>, radii_mirror: Vec<f64>) -> RadiiReport {
    let k_max = radii.len() - 1;
    let mut partial_sums = Vec::with_capacity(radii.len());
    let mut acc = 0.0;
    for (r, q) in radii.iter().zip(&radii_mirror) {
        acc += r * r + q * q;
        partial_sums.push(acc);
    }
    let from = decreasing_from(&radii).max(decreasing_from(&radii_mirror));
    let half = k_max / 2;
    let tail = &partial_sums[half..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let cauchy_gap = hi - lo;
    let decay_exponent = log_log_slope(&radii, half.max(1));
    let summable_evidence = from <= half && cauchy_gap < CAUCHY_TOL;
    RadiiReport {
        radii,
        radii_mirror,
        partial_sums,
        decreasing_from: from,
        cauchy_gap,
        decay_exponent,
        summable_evidence,
    }
}

fn log_log_slope(r: &[f64], from: usize) -> f64 {
    let pts: Vec<(f64, f64)> =
        (from..r.len()).filter(|&k| k > 0 && r[k] > 0.0).map(|k| ((k as f64).ln(), r[k].ln())).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
