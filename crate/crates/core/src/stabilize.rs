//! Hypotheses for stabilization by regular feedback, input scalarization,
//! target selection for the root chains and modal placement of the finite
//! unstable part.

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::classify::{delay_matrix_structure, sigma1_of};
use crate::eigen::{biorthogonal_kernels, pairing_formula, root_adjoint_kernel};
use crate::linalg::{
    adjoint, eigenvalues, frobenius, identity, inner, kernel_basis, norm, singular_values, CMat, CVec, C64,
};
use crate::model::{char_matrix, NeutralSystem};
use crate::spectrum::{
    locate_window_roots, refine_root, spectral_partition, term_scale, RootRecord, Seed, SpectralWindow, ON_AXIS_TOL,
    UNIT_CIRCLE_TOL,
};
use crate::{Error, Result};

/// Relative singular-value threshold for the rank tests.
pub const RANK_TOL: f64 = 1e-8;
/// Default `|Im λ|` above which condition (3) is checked through condition (4).
pub const DEFAULT_M_CUT: f64 = 50.0;
/// Number of random draws tried by [`scalarize_input`].
pub const SCALARIZE_DRAWS: usize = 64;
/// Base margin for `|⟨b, y⟩| / ‖b‖`.
pub const SCALARIZE_MARGIN: f64 = 1e-6;
/// Closed-loop eigenvalues must match the targets to this distance.
pub const PLACEMENT_TOL: f64 = 1e-6;
/// Relative radius below which a root is taken to sit on its lattice point.
pub const ZERO_RADIUS: f64 = 1e-12;
/// Largest finite unstable part handled by [`finite_pole_placement`].
pub const MAX_FINITE_PART: usize = 20;

/// Numerical rank of `[M  B]` with each block scaled to unit Frobenius norm.
///
/// Scaling the blocks separately makes the test independent of the units of `B`.
pub fn block_rank(m: &CMat, b: &CMat) -> usize {
    let n = m.nrows();
    let scale = |x: &CMat| {
        let f = frobenius(x);
        if f > 0.0 {
            x / C64::new(f, 0.0)
        } else {
            x.clone()
        }
    };
    let mut block = CMat::zeros(n, m.ncols() + b.ncols());
    block.view_mut((0, 0), (n, m.ncols())).copy_from(&scale(m));
    block.view_mut((0, m.ncols()), (n, b.ncols())).copy_from(&scale(b));
    let sv = singular_values(&block);
    let smax = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
}

/// `rank [Δ(λ)  B]`.
pub fn rank_delta_b(sys: &NeutralSystem, lambda: C64, b: &CMat) -> usize {
    block_rank(&char_matrix(sys, lambda), b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Condition3Entry {
    pub root: RootRecord,
    pub rank: usize,
    pub pass: bool,
    /// Set when the root lies beyond the cut and the test was done through condition (4) at this `μ`.
    pub via_condition4: Option<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Condition4Entry {
    pub mu: C64,
    pub rank: usize,
    pub pass: bool,
}

/// `rank [Δ(λ) B] = n` for every root with `Re λ ≥ −1e-9` in the window.
///
/// Lattice roots with `|Im λ| > m_cut` are checked through `rank [μI − A₋₁  B]`
/// at their `μ`, since only finitely many of the relations are independent.
pub fn check_condition3(sys: &NeutralSystem, window: &SpectralWindow, m_cut: f64) -> Result<Vec<Condition3Entry>> {
    if sys.p() == 0 {
        return Err(Error::InvalidInput("condition (3) needs an input matrix with p ≥ 1".into()));
    }
    let n = sys.n();
    let roots = locate_window_roots(sys, window)?;
    let mus: Vec<C64> = crate::spectrum::eigen_clusters(sys.a_minus1())?.iter().map(|c| c.mu).collect();
    let nonzero: Vec<C64> = mus.into_iter().filter(|m| m.norm() > 1e-12).collect();
    Ok(roots
        .into_iter()
        .filter(|r| r.lambda.re >= -ON_AXIS_TOL)
        .map(|root| {
            let far = root.lambda.im.abs() > m_cut;
            let via = match root.lattice {
                Some(tag) if far => nonzero.get(tag.m).copied(),
                _ => None,
            };
            let rank = match via {
                Some(mu) => block_rank(&(identity(n) * mu - sys.a_minus1()), sys.b()),
                None => rank_delta_b(sys, root.lambda, sys.b()),
            };
            Condition3Entry { root, rank, pass: rank == n, via_condition4: via }
        })
        .collect())
}

/// `rank [μI − A₋₁  B] = n` for every `μ ∈ σ₁`.
pub fn check_condition4(a_minus1: &CMat, b: &CMat) -> Result<Vec<Condition4Entry>> {
    let n = a_minus1.nrows();
    if b.nrows() != n {
        return Err(Error::DimensionMismatch { context: "B rows", expected: n, found: b.nrows() });
    }
    let s1 = sigma1_of(&delay_matrix_structure(a_minus1)?, UNIT_CIRCLE_TOL);
    Ok(s1
        .into_iter()
        .map(|e| {
            let rank = block_rank(&(identity(n) * e.mu - a_minus1), b);
            Condition4Entry { mu: e.mu, rank, pass: rank == n }
        })
        .collect())
}

/// Vectors `b = Bc` must avoid: `(y, margin)` with `|⟨b, y⟩| > margin·‖b‖` required.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EigenData {
    pub constraints: Vec<(CVec, f64)>,
}

impl EigenData {
    /// Adjoint eigenvectors of `A₋₁` for `μ ∈ σ₁` and kernel vectors of `Δ*(λ̄)`
    /// at the given roots, the latter weighted by `1/(|k| + 1)`.
    pub fn collect(sys: &NeutralSystem, roots: &[RootRecord]) -> Result<Self> {
        let n = sys.n();
        let mut constraints = Vec::new();
        for e in sigma1_of(&delay_matrix_structure(sys.a_minus1())?, UNIT_CIRCLE_TOL) {
            let shifted = adjoint(&(identity(n) * e.mu - sys.a_minus1()));
            for y in kernel_basis(&shifted, RANK_TOL) {
                constraints.push((y, SCALARIZE_MARGIN));
            }
        }
        for r in roots {
            let k = r.lattice.map_or(0, |t| t.k.unsigned_abs());
            for y in root_adjoint_kernel(sys, r.lambda) {
                constraints.push((y, SCALARIZE_MARGIN / (k as f64 + 1.0)));
            }
        }
        Ok(Self { constraints })
    }

    /// `min |⟨b, y⟩| / (‖b‖·margin)`; at least 1 means every constraint holds.
    pub fn worst_ratio(&self, b: &CVec) -> f64 {
        let nb = norm(b);
        if nb == 0.0 {
            return 0.0;
        }
        self.constraints
            .iter()
            .map(|(y, margin)| inner(b, y).norm() / (nb * norm(y) * margin))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn satisfied_by(&self, b: &CVec) -> bool {
        self.worst_ratio(b) > 1.0
    }
}

/// A coefficient vector `c` such that `b = Bc` is not orthogonal to any of the constraint vectors.
///
/// Tries `e₁` first, then standard normal draws from a ChaCha stream seeded with `seed`.
pub fn scalarize_input(b: &CMat, data: &EigenData, seed: u64) -> Result<CVec> {
    let p = b.ncols();
    if p == 0 {
        return Err(Error::InvalidInput("no input columns to scalarize".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for draw in 0..SCALARIZE_DRAWS {
        let c = if draw == 0 {
            CVec::from_fn(p, |i, _| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0))
        } else {
            CVec::from_fn(p, |_, _| C64::new(StandardNormal.sample(&mut rng), 0.0))
        };
        let ratio = data.worst_ratio(&(b * &c));
        if ratio > 1.0 {
            return Ok(c);
        }
        worst = worst.max(ratio);
    }
    Err(Error::ScalarizationFailed { worst_margin: worst })
}

/// `k·|⟨(b, 0), ψ̃⟩|` along one chain, with `ψ̃` normalized by `⟨φ, ψ̃⟩ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingAsymptotics {
    /// `(m, k, value)`.
    pub values: Vec<(usize, i64, f64)>,
    /// The last quarter of each chain stays within 25% of its median.
    pub plateau: bool,
}

/// `k·|⟨(b, 0), ψ̃ₘᵏ⟩|` for `μₘ ∈ σ₁` and `k` in `ks`.
///
/// For a semisimple root the value is `k·(Σⱼ |⟨b, yⱼ⟩ / pⱼ|²)^{1/2}` over a
/// biorthogonal kernel basis, with `pⱼ = −⟨Δ′xⱼ, yⱼ⟩`; this is the size of
/// the projection of `b` onto the root subspace and does not depend on the basis.
pub fn pairing_asymptotics_check(sys: &NeutralSystem, b: &CVec, ks: &[i64]) -> Result<PairingAsymptotics> {
    if b.len() != sys.n() {
        return Err(Error::DimensionMismatch { context: "pairing input vector", expected: sys.n(), found: b.len() });
    }
    let s1 = sigma1_of(&delay_matrix_structure(sys.a_minus1())?, UNIT_CIRCLE_TOL);
    let mut values = Vec::new();
    let mut plateau = !s1.is_empty() && !ks.is_empty();
    for (m, e) in s1.iter().enumerate() {
        let mut chain = Vec::new();
        for &k in ks {
            let seed =
                Seed { m, k, mu: e.mu, lambda: C64::new(0.0, e.mu.arg() + 2.0 * core::f64::consts::PI * k as f64) };
            let root = refine_root(sys, seed.lambda)?;
            let (xs, ys) = biorthogonal_kernels(sys, root.lambda)?;
            let mut sq = 0.0;
            for (x, y) in xs.iter().zip(&ys) {
                let p = pairing_formula(sys, root.lambda, x, y);
                if p.norm() <= RANK_TOL * term_scale(sys, root.lambda) {
                    return Err(Error::InvalidInput(format!("root {} has a Jordan chain", root.lambda)));
                }
                sq += (inner(b, y) / p).norm_sqr();
            }
            let v = k.unsigned_abs() as f64 * sq.sqrt();
            chain.push(v);
            values.push((m, k, v));
        }
        let tail_start = chain.len() - chain.len().div_ceil(4);
        let mut tail: Vec<f64> = chain[tail_start..].to_vec();
        tail.sort_by(f64::total_cmp);
        let median = tail[tail.len() / 2];
        plateau &= median > 0.0 && tail.iter().all(|v| (v - median).abs() < 0.25 * median);
    }
    Ok(PairingAsymptotics { values, plateau })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Target {
    pub m: usize,
    pub k: i64,
    pub lattice: C64,
    pub radius: f64,
    pub target: C64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RejectedTarget {
    pub m: usize,
    pub k: i64,
    pub lattice: C64,
    pub radius: f64,
    pub reason: &'static str,
}

/// `λ̂ = λ̃ − margin·r`, accepted when `Re λ̂ < 0` and `r > 0`.
pub fn target_for(
    m: usize,
    k: i64,
    lattice: C64,
    radius: f64,
    margin: f64,
) -> core::result::Result<Target, RejectedTarget> {
    let reject = |reason| RejectedTarget { m, k, lattice, radius, reason };
    if !(radius > ZERO_RADIUS * (1.0 + lattice.norm())) {
        return Err(reject("root circle has zero radius"));
    }
    let target = lattice - margin * radius;
    if target.re >= 0.0 {
        return Err(reject("shifted target not in the open left half-plane"));
    }
    Ok(Target { m, k, lattice, radius, target })
}

/// Targets for the `Λ₁` chains, radii measured as `|λₘᵏ − λ̃ₘᵏ|`.
pub fn assignment_targets(l1: &[(Seed, RootRecord)], margin: f64) -> Result<(Vec<Target>, Vec<RejectedTarget>)> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::InvalidInput(format!("margin {margin} outside (0, 1)")));
    }
    let mut ok = Vec::new();
    let mut rejected = Vec::new();
    for (seed, root) in l1 {
        match target_for(seed.m, seed.k, seed.lambda, (root.lambda - seed.lambda).norm(), margin) {
            Ok(t) => ok.push(t),
            Err(r) => rejected.push(r),
        }
    }
    Ok((ok, rejected))
}

/// Gain row `k` with `σ(diag(λ) − βk) = targets`, for distinct `λᵢ` and nonzero `βᵢ`.
///
/// In modal coordinates the closed-loop characteristic polynomial is
/// `Π(s − λᵢ)·(1 + Σ βᵢkᵢ/(s − λᵢ))`, so `kⱼ = Π(λⱼ − tᵢ) / (βⱼ Π_{i≠j}(λⱼ − λᵢ))`.
pub fn modal_placement(lambdas: &[C64], beta: &[C64], targets: &[C64]) -> Result<CVec> {
    let n = lambdas.len();
    if beta.len() != n || targets.len() != n {
        return Err(Error::DimensionMismatch { context: "modal placement sizes", expected: n, found: targets.len() });
    }
    let mut k = CVec::zeros(n);
    for j in 0..n {
        if beta[j].norm() == 0.0 {
            return Err(Error::InvalidInput(format!("mode {} is not reached by the input", lambdas[j])));
        }
        let mut num = C64::new(1.0, 0.0);
        let mut den = beta[j];
        for i in 0..n {
            num *= lambdas[j] - targets[i];
            if i != j {
                let d = lambdas[j] - lambdas[i];
                if d.norm() < 1e-12 * (1.0 + lambdas[j].norm()) {
                    return Err(Error::InvalidInput("repeated mode: not controllable from one input".into()));
                }
                den *= d;
            }
        }
        k[j] = num / den;
    }
    let closed = CMat::from_diagonal(&CVec::from_column_slice(lambdas)) - CVec::from_column_slice(beta) * k.transpose();
    let eig = eigenvalues(&closed).ok_or(Error::EigensolveFailure)?;
    let deviation = match_deviation(&eig, targets);
    if !(deviation <= PLACEMENT_TOL) {
        return Err(Error::PlacementFailed { deviation });
    }
    Ok(k)
}

/// Largest distance in a greedy nearest matching of `a` onto `b`.
pub fn match_deviation(a: &[C64], b: &[C64]) -> f64 {
    let mut left: Vec<C64> = b.to_vec();
    let mut worst: f64 = 0.0;
    for x in a {
        let Some((i, d)) = left.iter().enumerate().map(|(i, y)| (i, (x - y).norm())).min_by(|p, q| p.1.total_cmp(&q.1))
        else {
            return f64::INFINITY;
        };
        worst = worst.max(d);
        left.swap_remove(i);
    }
    if left.is_empty() {
        worst
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    pub lambdas: Vec<C64>,
    /// `βᵢ = ⟨b, yᵢ⟩ / pᵢ`, the scalar input's weight on each mode.
    pub beta: Vec<C64>,
    /// Scalarizing coefficients, `b = Bc`.
    pub c: CVec,
    /// Modal gain row: `u = −c·(k·a)` for modal coordinates `a`.
    pub modal_gain: CVec,
    /// `p × N` gain `c·kᵀ` from modal coordinates to the input.
    pub gain: CMat,
    pub closed_loop: Vec<C64>,
}

/// Modal state feedback moving the finite unstable roots to `targets`.
pub fn finite_pole_placement(sys: &NeutralSystem, l2: &[RootRecord], targets: &[C64], seed: u64) -> Result<Placement> {
    let p = sys.p();
    if l2.len() > MAX_FINITE_PART {
        return Err(Error::InvalidInput(format!("{} finite roots exceed {MAX_FINITE_PART}", l2.len())));
    }
    if targets.len() != l2.len() {
        return Err(Error::DimensionMismatch {
            context: "placement targets",
            expected: l2.len(),
            found: targets.len(),
        });
    }
    if let Some(t) = targets.iter().find(|t| !(t.re < 0.0)) {
        return Err(Error::InvalidInput(format!("target {t} not in the open left half-plane")));
    }
    if l2.is_empty() {
        return Ok(Placement {
            lambdas: Vec::new(),
            beta: Vec::new(),
            c: CVec::zeros(p),
            modal_gain: CVec::zeros(0),
            gain: CMat::zeros(p, 0),
            closed_loop: Vec::new(),
        });
    }
    if p == 0 {
        return Err(Error::InvalidInput("placement needs an input matrix".into()));
    }
    for r in l2 {
        if rank_delta_b(sys, r.lambda, sys.b()) != sys.n() {
            return Err(Error::InvalidInput(format!("root {} is not controllable: rank [Δ B] < n", r.lambda)));
        }
        if r.geo_mult != 1 || r.alg_mult != 1 {
            return Err(Error::InvalidInput(format!("root {} is not simple", r.lambda)));
        }
    }
    let data = EigenData::collect(sys, l2)?;
    let c = scalarize_input(sys.b(), &EigenData { constraints: data.constraints }, seed)?;
    let b = sys.b() * &c;
    let mut lambdas = Vec::new();
    let mut beta = Vec::new();
    for r in l2 {
        let (xs, ys) = biorthogonal_kernels(sys, r.lambda)?;
        let pair = pairing_formula(sys, r.lambda, &xs[0], &ys[0]);
        lambdas.push(r.lambda);
        beta.push(inner(&b, &ys[0]) / pair);
    }
    let k = modal_placement(&lambdas, &beta, targets)?;
    let closed =
        CMat::from_diagonal(&CVec::from_column_slice(&lambdas)) - CVec::from_column_slice(&beta) * k.transpose();
    let closed_loop = eigenvalues(&closed).ok_or(Error::EigensolveFailure)?;
    let gain = &c * k.transpose();
    Ok(Placement { lambdas, beta, c, modal_gain: k, gain, closed_loop })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilizeOptions {
    pub m_cut: f64,
    pub margin: f64,
    pub seed: u64,
}

impl Default for StabilizeOptions {
    fn default() -> Self {
        Self { m_cut: DEFAULT_M_CUT, margin: 0.5, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilizabilityReport {
    /// Every eigenvalue of `A₋₁` has `|μ| ≤ 1`.
    pub cond1: bool,
    /// Every `μ ∈ σ₁` is simple.
    pub cond2: bool,
    pub cond3: Vec<Condition3Entry>,
    pub cond4: Vec<Condition4Entry>,
    pub scalarization: Option<CVec>,
    pub targets: Vec<Target>,
    pub rejected_targets: Vec<RejectedTarget>,
    pub finite_gain: Option<Placement>,
    pub overall_pass: bool,
}

/// Target for a finite root: reflected across the imaginary axis and moved a further `ε` left.
pub fn reflected_target(lambda: C64, epsilon: f64) -> C64 {
    C64::new(-(lambda.re.abs() + epsilon), lambda.im)
}

/// Checks the four conditions on the window and, when they hold, scalarizes the
/// input, selects chain targets and places the finite unstable roots.
///
/// The infinite-dimensional feedback kernels themselves are not synthesized.
pub fn stabilizability_report(
    sys: &NeutralSystem,
    window: &SpectralWindow,
    opts: &StabilizeOptions,
) -> Result<StabilizabilityReport> {
    let structure = delay_matrix_structure(sys.a_minus1())?;
    let cond1 = structure.iter().all(|e| e.mu.norm() <= 1.0 + UNIT_CIRCLE_TOL);
    let s1 = sigma1_of(&structure, UNIT_CIRCLE_TOL);
    let cond2 = s1.iter().all(|e| e.is_simple());
    let cond3 = check_condition3(sys, window, opts.m_cut)?;
    let cond4 = check_condition4(sys.a_minus1(), sys.b())?;
    let overall_pass = cond1 && cond2 && cond3.iter().all(|e| e.pass) && cond4.iter().all(|e| e.pass);
    let mut report = StabilizabilityReport {
        cond1,
        cond2,
        cond3,
        cond4,
        scalarization: None,
        targets: Vec::new(),
        rejected_targets: Vec::new(),
        finite_gain: None,
        overall_pass,
    };
    if !overall_pass {
        return Ok(report);
    }
    let unstable: Vec<RootRecord> = report.cond3.iter().map(|e| e.root.clone()).collect();
    let data = EigenData::collect(sys, &unstable)?;
    report.scalarization = Some(scalarize_input(sys.b(), &data, opts.seed)?);

    let roots = locate_window_roots(sys, window)?;
    let partition = spectral_partition(&roots, window.epsilon)?;
    let seeds = crate::spectrum::asymptotic_seeds(sys, window.k_max.max(1))?;
    let l1: Vec<(Seed, RootRecord)> = partition
        .l1
        .iter()
        .filter_map(|r| {
            let tag = r.lattice?;
            seeds.iter().find(|s| s.m == tag.m && s.k == tag.k).map(|s| (*s, r.clone()))
        })
        .collect();
    let (targets, rejected) = assignment_targets(&l1, opts.margin)?;
    report.targets = targets;
    report.rejected_targets = rejected;

    let finite: Vec<RootRecord> = partition.l2.into_iter().filter(|r| r.lambda.re >= -ON_AXIS_TOL).collect();
    if !finite.is_empty() && finite.len() <= MAX_FINITE_PART {
        let t: Vec<C64> = finite.iter().map(|r| reflected_target(r.lambda, window.epsilon)).collect();
        report.finite_gain = finite_pole_placement(sys, &finite, &t, opts.seed).ok();
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{dilemma_system, dilemma_system_controlled, pure_difference, scalar_decay};
    use crate::linalg::{c, ONE, ZERO};
    use crate::spectrum::lattice_roots;
    use alloc::vec;
    use core::f64::consts::PI;

    fn real(r: usize, cols: usize, entries: &[f64]) -> CMat {
        CMat::from_row_slice(r, cols, &entries.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
    }

    fn col(entries: &[f64]) -> CMat {
        real(entries.len(), 1, entries)
    }

    #[test]
    fn condition4_examples() {
        let i2 = identity(2);
        let r = check_condition4(&(-&i2), &i2).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].pass && r[0].rank == 2);
        let r = check_condition4(&(-&i2), &col(&[1.0, 0.0])).unwrap();
        assert!(!r[0].pass && r[0].rank == 1);
        let r = check_condition4(&real(2, 2, &[-1.0, 0.0, 0.0, 0.5]), &col(&[1.0, 1.0])).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].mu + 1.0).norm() < 1e-12);
        assert!(r[0].pass);
        assert!(check_condition4(&i2, &col(&[1.0])).is_err());
    }

    #[test]
    fn rank_at_the_example_roots() {
        for s in [1.0, 2.0] {
            let base = dilemma_system(1.0, s);
            for k in [0, 3, 7] {
                let l = refine_root(&base, c(0.0, PI * (2 * k + 1) as f64)).unwrap().lambda;
                // Δ(λ) = [[0, s], [0, 0]] up to rounding: Im Δ = span e₁
                let d = char_matrix(&base, l);
                assert!(d[(0, 0)].norm() < 1e-9 && d[(1, 1)].norm() < 1e-9 && d[(1, 0)].norm() == 0.0);
                assert_eq!(rank_delta_b(&base, l, &col(&[1.0, 0.0])), 1);
                assert_eq!(rank_delta_b(&base, l, &col(&[0.0, 1.0])), 2);
                assert_eq!(rank_delta_b(&base, l, &col(&[0.3, 1.0])), 2);
                assert_eq!(rank_delta_b(&base, l, &CMat::zeros(2, 1)), 1);
            }
        }
    }

    #[test]
    fn rank_is_scale_invariant() {
        let sys = dilemma_system(1.0, 1.0);
        let l = refine_root(&sys, c(0.0, 5.0 * PI)).unwrap().lambda;
        for b in [col(&[1.0, 0.0]), col(&[0.0, 1.0]), col(&[1.0, 1e-4])] {
            let base = rank_delta_b(&sys, l, &b);
            for f in [1e3, 1e-3] {
                assert_eq!(rank_delta_b(&sys, l, &(&b * c(f, 0.0))), base);
            }
        }
    }

    #[test]
    fn condition3_cases() {
        let w = SpectralWindow::new(-3.0, 1.0, -10.0, 10.0, 0.05, 4).unwrap();
        let stable = scalar_decay().with_b(col(&[1.0])).unwrap();
        assert!(check_condition3(&stable, &w).unwrap().is_empty());
        assert!(check_condition3(&scalar_decay(), &w).is_err());
        // ż = z + bu: root 1 needs b ≠ 0
        let unstable = NeutralSystem::with_a0(CMat::zeros(1, 1), &real(1, 1, &[1.0]), col(&[2.0])).unwrap();
        let r = check_condition3(&unstable, &w).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].pass && (r[0].root.lambda - 1.0).norm() < 1e-9);
        let blocked = unstable.with_b(CMat::zeros(1, 1)).unwrap();
        assert!(check_condition3(&blocked, &w).unwrap().iter().all(|e| !e.pass));
    }

    fn check_condition3(sys: &NeutralSystem, w: &SpectralWindow) -> Result<Vec<Condition3Entry>> {
        super::check_condition3(sys, w, DEFAULT_M_CUT)
    }

    #[test]
    fn far_roots_use_condition4() {
        // ż = 1.1ż(t−1) + 0.2z: roots near ln 1.1 + 2πik
        let sys = NeutralSystem::with_a0(real(1, 1, &[1.1]), &real(1, 1, &[0.2]), col(&[1.0])).unwrap();
        let w = SpectralWindow::new(-1.0, 1.0, 40.0, 70.0, 0.05, 12).unwrap();
        let r = super::check_condition3(&sys, &w, 50.0).unwrap();
        assert!(!r.is_empty());
        for e in &r {
            assert_eq!(e.via_condition4.is_some(), e.root.lambda.im > 50.0, "{e:?}");
            assert!(e.pass);
        }
    }

    #[test]
    fn scalarization() {
        let p1 = NeutralSystem::with_a0(-identity(2), &CMat::zeros(2, 2), col(&[1.0, 1.0])).unwrap();
        let data = EigenData::collect(&p1, &[]).unwrap();
        assert_eq!(data.constraints.len(), 2);
        assert_eq!(scalarize_input(p1.b(), &data, 7).unwrap(), CVec::from_element(1, ONE));
        let bad = p1.with_b(col(&[1.0, 0.0])).unwrap();
        assert!(matches!(scalarize_input(bad.b(), &data, 7), Err(Error::ScalarizationFailed { .. })));

        // B = I₂: e₁ is orthogonal to y = e₂, a random draw is not
        let i2 = identity(2);
        let cvec = scalarize_input(&i2, &data, 3).unwrap();
        assert!(cvec[0].norm() > 0.0 && cvec[1].norm() > 0.0);
        assert!(data.satisfied_by(&(&i2 * &cvec)));

        // two identical columns: Im B is the line through (1, 1)
        let twin = real(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let cvec = scalarize_input(&twin, &data, 3).unwrap();
        assert!(data.satisfied_by(&(&twin * &cvec)));
    }

    #[test]
    fn scalarization_is_seeded_and_verified() {
        let sys = dilemma_system(1.0, 0.0).with_b(identity(2)).unwrap();
        let data = EigenData::collect(&sys, &[]).unwrap();
        for seed in 0..10 {
            let a = scalarize_input(sys.b(), &data, seed).unwrap();
            assert_eq!(a, scalarize_input(sys.b(), &data, seed).unwrap());
            assert!(data.satisfied_by(&(sys.b() * &a)));
        }
    }

    #[test]
    fn pairing_asymptotics() {
        // A₂ = A₃ = 0, A₋₁ = −I: Δ′ = −λI at the roots, value k/|λ| → 1/(2π)
        let sys = pure_difference(-identity(2));
        let e1 = CVec::from_vec(vec![ONE, ZERO]);
        let ks: Vec<i64> = (1..=40).collect();
        let r = pairing_asymptotics_check(&sys, &e1, &ks).unwrap();
        for &(_, k, v) in &r.values {
            let closed = k as f64 / (PI * (2 * k + 1) as f64);
            assert!((v - closed).abs() < 1e-9, "{k}: {v} vs {closed}");
        }
        assert!(r.plateau);
        let zero = pairing_asymptotics_check(&sys, &CVec::zeros(2), &ks).unwrap();
        assert!(zero.values.iter().all(|v| v.2 == 0.0) && !zero.plateau);

        let ex = dilemma_system(1.0, 0.0);
        let ks: Vec<i64> = (20..=200).step_by(20).collect();
        let r = pairing_asymptotics_check(&ex, &e1, &ks).unwrap();
        assert!(r.plateau, "{:?}", r.values);
        assert!(pairing_asymptotics_check(&dilemma_system(1.0, 1.0), &e1, &[20]).is_err());
    }

    #[test]
    fn targets() {
        let t = target_for(0, 3, c(0.0, 7.0 * PI), 0.1, 0.5).unwrap();
        assert!((t.target - c(-0.05, 7.0 * PI)).norm() < 1e-15);
        assert!(target_for(0, 3, c(0.0, 7.0 * PI), 0.0, 0.5).is_err());
        assert!(assignment_targets(&[], 1.5).is_err());

        let sys = dilemma_system(1.0, 0.0);
        let l1 = lattice_roots(&sys, 12, true).unwrap();
        let (ok, rejected) = assignment_targets(&l1, 0.5).unwrap();
        assert!(rejected.is_empty());
        assert_eq!(ok.len(), l1.len());
        for t in ok {
            assert!(t.target.re < 0.0 && (t.target - t.lattice).norm() < t.radius);
        }
        // the pure difference system has its roots exactly on the lattice
        let flat = lattice_roots(&pure_difference(-identity(1)), 3, true).unwrap();
        let (ok, rejected) = assignment_targets(&flat, 0.5).unwrap();
        assert!(ok.is_empty() && rejected.len() == flat.len());
    }

    #[test]
    fn modal_examples() {
        let k = modal_placement(&[c(0.5, 0.0)], &[ONE], &[c(-1.0, 0.0)]).unwrap();
        assert!((k[0] - 1.5).norm() < 1e-15);
        let lambdas = [c(0.3, 0.0), c(0.7, 0.0)];
        let targets = [c(-0.5, 0.0), c(-0.6, 0.0)];
        let k = modal_placement(&lambdas, &[ONE, c(0.4, -0.2)], &targets).unwrap();
        // oracle: characteristic polynomial of the closed loop via trace and determinant
        let a = CMat::from_row_slice(
            2,
            2,
            &[lambdas[0] - k[0], -k[1], -c(0.4, -0.2) * k[0], lambdas[1] - c(0.4, -0.2) * k[1]],
        );
        let (tr, det) = (a.trace(), a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]);
        assert!((tr - (targets[0] + targets[1])).norm() < 1e-12);
        assert!((det - targets[0] * targets[1]).norm() < 1e-12);
        assert!(modal_placement(&lambdas, &[ONE, ZERO], &targets).is_err());
        assert!(modal_placement(&[ONE, ONE], &[ONE, ONE], &targets).is_err());
    }

    #[test]
    fn placement_on_a_retarded_system() {
        // ż = diag(0.3, 0.7)z + Bu: modes e₁, e₂ with pairing 1, so β = b
        let sys =
            NeutralSystem::with_a0(CMat::zeros(2, 2), &real(2, 2, &[0.3, 0.0, 0.0, 0.7]), col(&[1.0, 2.0])).unwrap();
        let l2: Vec<RootRecord> = [0.3, 0.7].iter().map(|&x| refine_root(&sys, c(x + 0.01, 0.0)).unwrap()).collect();
        let targets = [c(-0.5, 0.0), c(-0.6, 0.0)];
        let p = finite_pole_placement(&sys, &l2, &targets, 0).unwrap();
        assert!((p.beta[0] - 1.0).norm() < 1e-9 && (p.beta[1] - 2.0).norm() < 1e-9);
        assert!(match_deviation(&p.closed_loop, &targets) < PLACEMENT_TOL);
        // the same gain closes the ODE loop u = −K z
        let closed = real(2, 2, &[0.3, 0.0, 0.0, 0.7]) - sys.b() * p.gain.clone();
        let eig = eigenvalues(&closed).unwrap();
        assert!(match_deviation(&eig, &targets) < 1e-9);

        let empty = finite_pole_placement(&sys, &[], &[], 0).unwrap();
        assert_eq!(empty.gain.ncols(), 0);
        assert!(finite_pole_placement(&sys, &l2, &[c(0.1, 0.0), c(-1.0, 0.0)], 0).is_err());
    }

    #[test]
    fn report_on_the_example() {
        let w = SpectralWindow::new(-3.0, 1.0, -10.0 * PI, 10.0 * PI, 0.05, 6).unwrap();
        let r = stabilizability_report(&dilemma_system_controlled(1.0, 1.0), &w, &StabilizeOptions::default()).unwrap();
        assert!(r.cond1 && !r.cond2 && r.cond3.is_empty());
        assert!(!r.cond4[0].pass);
        assert!(!r.overall_pass && r.scalarization.is_none());

        // σ₁ = {−1} simple, B reaches both directions
        let a = real(2, 2, &[-1.0, 0.0, 0.0, 0.5]);
        let sys = NeutralSystem::with_a0(a, &real(2, 2, &[0.4, 0.0, 0.0, -1.0]), col(&[1.0, 1.0])).unwrap();
        let r = stabilizability_report(&sys, &w, &StabilizeOptions::default()).unwrap();
        assert!(r.overall_pass, "{r:?}");
        assert!(r.scalarization.is_some());
        if let Some(p) = &r.finite_gain {
            assert!(p.closed_loop.iter().all(|z| z.re < 0.0));
        }
        assert!(r.targets.iter().all(|t| t.target.re < 0.0));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn rank_ignores_input_units(k in 0i64..30, b0 in -2.0f64..2.0, b1 in -2.0f64..2.0, e in -3i32..=3) {
            let sys = dilemma_system(1.0, 1.0);
            let l = refine_root(&sys, c(0.0, PI * (2 * k + 1) as f64)).unwrap().lambda;
            let b = col(&[b0, b1]);
            let f = c(10f64.powi(e), 0.0);
            proptest::prop_assert_eq!(rank_delta_b(&sys, l, &b), rank_delta_b(&sys, l, &(&b * f)));
        }

        #[test]
        fn targets_move_into_the_disc(im in -500.0f64..500.0, r in 1e-6f64..1.0, margin in 0.01f64..0.99) {
            let t = target_for(0, 0, c(0.0, im), r, margin).unwrap();
            proptest::prop_assert!(t.target.re < 0.0);
            proptest::prop_assert!((t.target - t.lattice).norm() < r);
        }
    }
}
