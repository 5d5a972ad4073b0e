//! The acceptance suite: one check per criterion, each returning a pass/fail line.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use neutral_core::eigen::{domain_defect, eigenpairs, m2_inner_product, pairing_bound_scan, resolvent, EigenPair};
use neutral_core::fixtures::{dilemma_system, scalar_decay};
use neutral_core::linalg::{c, identity, CMat, CVec, ONE, ZERO};
use neutral_core::pontryagin::{
    alternation_check, count_check_some_eps, count_window, example_quasipolynomial, lhp_certificate, principal_term,
    real_zeros, split_fg, Verdict as LhpVerdict,
};
use neutral_core::sim::{chain_history, growth_verdict, simulate, GrowthKind, History};
use neutral_core::spectrum::{locate_window_roots, radii_summability_check, refine_root, RootRecord, SpectralWindow};
use neutral_core::stabilize::{
    check_condition4, finite_pole_placement, match_deviation, modal_placement, scalarize_input, EigenData,
    PLACEMENT_TOL,
};
use neutral_core::{NeutralSystem, StateSegment, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Criteria that are implemented as specified but cannot pass at the specified scale.
pub const KNOWN_UNATTAINABLE: &[u8] = &[3];

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "LHP roots of the example"),
    (2, "zero-count law"),
    (3, "root-lattice radii"),
    (4, "biorthogonality"),
    (5, "pairing bound"),
    (6, "resolvent contract"),
    (7, "stability dilemma"),
    (8, "multiplicity split"),
    (9, "exclusion identity"),
    (10, "stabilizability rank logic"),
    (11, "simulator order"),
];

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CriterionResult {
    /// Report line without timing, so repeated runs compare byte for byte.
    pub fn line(&self) -> String {
        format!("{:>2}  {}  {:<28} {}", self.id, if self.pass { "PASS" } else { "FAIL" }, self.title, self.detail)
    }
}

type Check = Result<(bool, String), String>;

/// The example's scalar factor `−λ − λe^{−λ} − b`; its zeros solve `λe^λ + λ + be^λ = 0`.
pub fn example_scalar(b: f64) -> NeutralSystem {
    let a0 = CMat::from_element(1, 1, c(-b, 0.0));
    NeutralSystem::with_a0(-identity(1), &a0, CMat::zeros(1, 0)).expect("valid system")
}

pub fn example_window() -> SpectralWindow {
    SpectralWindow::new(-3.0, 1.0, -40.0 * PI, 40.0 * PI, 0.05, 21).expect("valid window")
}

fn lattice_root(sys: &NeutralSystem, k: i64) -> Result<C64, String> {
    refine_root(sys, c(0.0, PI * (2 * k + 1) as f64)).map(|r| r.lambda).map_err(|e| e.to_string())
}

fn criterion1() -> Check {
    let mut pass = true;
    let mut parts = Vec::new();
    for b in [0.5, 1.0, 2.0] {
        let start = Instant::now();
        let roots = locate_window_roots(&example_scalar(b), &example_window()).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let max_re = roots.iter().map(|r| r.lambda.re).fold(f64::NEG_INFINITY, f64::max);
        let max_res = roots.iter().map(|r| r.residual).fold(0.0, f64::max);
        let cert = lhp_certificate(&example_quasipolynomial(b));
        let ok = !roots.is_empty()
            && max_re < -1e-6
            && max_res < 1e-9
            && elapsed < Duration::from_secs(30)
            && cert.verdict == LhpVerdict::Certified;
        pass &= ok;
        parts.push(format!(
            "b={b}: {} roots, max Re {max_re:.3e}, max residual {max_res:.1e}, certificate {:?}",
            roots.len(),
            cert.verdict
        ));
    }
    Ok((pass, parts.join("; ")))
}

fn criterion2() -> Check {
    let qp = example_quasipolynomial(1.0);
    let (f, g) = split_fg(&qp).map_err(|e| e.to_string())?;
    let (r, s) = principal_term(&qp).ok_or("no principal term")?;
    let df = f.derivative();
    let mut pass = true;
    let mut counts = Vec::new();
    for k in [2u32, 3, 4, 6] {
        let (verdict, eps) = count_check_some_eps(&f, r, s, k).map_err(|e| e.to_string())?;
        let (lo, hi) = count_window(k, eps);
        let zs = real_zeros(&f, lo, hi).map_err(|e| e.to_string())?;
        let alternates = alternation_check(&f, &g, lo, hi).map_err(|e| e.to_string())?;
        let signs = zs.zeros.iter().all(|&y| -g.eval(y) * df.eval(y) > 0.0);
        pass &= verdict.holds() && zs.count() == (4 * k + 1) as usize && alternates && signs;
        counts.push(format!("k={k}: {} zeros (expected {})", zs.count(), 4 * k + 1));
    }
    Ok((pass, counts.join(", ")))
}

fn criterion3() -> Check {
    let r = radii_summability_check(&dilemma_system(1.0, 0.0), 100).map_err(|e| e.to_string())?;
    let pass = r.decreasing_from <= 20 && r.cauchy_gap < 1e-6;
    Ok((
        pass,
        format!(
            "decreasing from k={}, Cauchy gap {:.2e} (needs < 1e-6), decay exponent {:.3}",
            r.decreasing_from, r.cauchy_gap, r.decay_exponent
        ),
    ))
}

fn worst_biorthogonality(sys: &NeutralSystem, roots: &[C64], m: usize) -> Result<f64, String> {
    let pairs: Vec<EigenPair> = roots
        .iter()
        .map(|&l| eigenpairs(sys, l, m))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?
        .into_iter()
        .flatten()
        .collect();
    let mut worst: f64 = 0.0;
    for (i, p) in pairs.iter().enumerate() {
        for (j, q) in pairs.iter().enumerate() {
            let v = m2_inner_product(&p.phi, &q.psi).map_err(|e| e.to_string())?;
            let err = if i == j { (v - p.pairing(sys)).norm() } else { v.norm() };
            worst = worst.max(err / (p.phi.norm() * q.psi.norm()));
        }
    }
    Ok(worst)
}

fn criterion4() -> Check {
    let sys = dilemma_system(1.0, 0.0);
    let roots: Vec<C64> = (0..5).map(|k| lattice_root(&sys, k)).collect::<Result<_, _>>()?;
    let coarse = worst_biorthogonality(&sys, &roots, 512)?;
    let fine = worst_biorthogonality(&sys, &roots, 1024)?;
    Ok((
        coarse < 5e-3 && fine <= 0.5 * coarse,
        format!("10 pairs, worst relative defect {coarse:.2e} at M=512, {fine:.2e} at M=1024"),
    ))
}

fn criterion5() -> Check {
    let sys = dilemma_system(1.0, 0.0);
    let roots: Vec<RootRecord> = (10..=200)
        .map(|k| refine_root(&sys, c(0.0, PI * (2 * k + 1) as f64)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let b = pairing_bound_scan(&sys, &roots).map_err(|e| e.to_string())?;
    let ratio = b.max / b.min;
    Ok((ratio < 10.0 && b.min > 1e-2, format!("min {:.4}, max {:.4}, ratio {ratio:.3}", b.min, b.max)))
}

fn criterion6(seed: u64) -> Check {
    let sys = dilemma_system(1.0, 0.0);
    let m = 512;
    let g = StateSegment::from_fn(CVec::from_vec(vec![c(0.4, -0.1), c(-0.2, 0.3)]), m, |t| {
        CVec::from_vec(vec![c((2.0 * t).cos(), t.sin()), c((t + 0.5).sin(), (3.0 * t).cos())])
    })
    .map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut domain: f64 = 0.0;
    for _ in 0..5 {
        let mut draw = || c(rng.random_range(0.2..3.0), rng.random_range(-20.0..20.0));
        let (l, mu) = (draw(), draw());
        let rl = resolvent(&sys, l, &g).map_err(|e| e.to_string())?;
        let rm = resolvent(&sys, mu, &g).map_err(|e| e.to_string())?;
        let lhs = rl.sub(&rm);
        let rhs = resolvent(&sys, l, &rm).map_err(|e| e.to_string())?.scale(mu - l);
        worst = worst.max(lhs.sub(&rhs).norm() / lhs.norm());
        domain = domain.max(domain_defect(&sys, &rl) / rl.norm());
    }
    Ok((
        worst < 1e-6 && domain < 1e-10,
        format!("5 pairs, worst identity defect {worst:.2e}, domain defect {domain:.1e}"),
    ))
}

fn criterion7() -> Check {
    let m = 256;
    let start = Instant::now();
    let s1 = dilemma_system(1.0, 1.0);
    let lambda = lattice_root(&s1, 5)?;
    let history = chain_history(lambda, &CVec::from_vec(vec![ONE, ZERO]), &CVec::from_vec(vec![ZERO, ONE]), m)
        .map_err(|e| e.to_string())?;
    let verdict = |sys: &NeutralSystem| -> Result<_, String> {
        let tr = simulate(sys, &history, 60.0, m).map_err(|e| e.to_string())?;
        growth_verdict(&tr.norm_trace, 20.0).map_err(|e| e.to_string())
    };
    let g0 = verdict(&dilemma_system(1.0, 0.0))?;
    let g1 = verdict(&s1)?;
    let elapsed = start.elapsed();
    let pass = matches!(g0.kind, GrowthKind::Bounded | GrowthKind::Decaying)
        && g1.kind == GrowthKind::Growing
        && g1.linear_slope > 0.0
        && g1.r_squared > 0.9
        && elapsed < Duration::from_secs(20);
    Ok((
        pass,
        format!(
            "s=0 {}, s=1 {} (slope {:.3}, R² {:.4})",
            g0.kind.label(),
            g1.kind.label(),
            g1.linear_slope,
            g1.r_squared
        ),
    ))
}

fn criterion8() -> Check {
    let s0 = dilemma_system(1.0, 0.0);
    let s1 = dilemma_system(1.0, 1.0);
    let mut pass = true;
    let mut worst_gap: f64 = 0.0;
    for k in [0i64, 1, 3, 7, 15] {
        let seed = c(0.0, PI * (2 * k + 1) as f64);
        let r0 = refine_root(&s0, seed).map_err(|e| e.to_string())?;
        let r1 = refine_root(&s1, seed).map_err(|e| e.to_string())?;
        worst_gap = worst_gap.max((r0.lambda - r1.lambda).norm());
        pass &= r0.geo_mult == 2 && r1.geo_mult == 1 && r0.alg_mult == 2 && r1.alg_mult == 2;
    }
    pass &= worst_gap < 1e-9;
    Ok((pass, format!("5 roots, dim Ker 2 vs 1, multiplicity 2, root gap {worst_gap:.1e}")))
}

fn criterion9() -> Check {
    // e^{2λ} + 3e^{λ} + 1 = 0 from λ = e^λ + 1 and the characteristic equation with b = 1
    let sq5 = 5f64.sqrt();
    let (w_minus, w_plus) = ((-3.0 - sq5) / 2.0, (-3.0 + sq5) / 2.0);
    let quadratic = [w_minus, w_plus].iter().all(|w| (w * w + 3.0 * w + 1.0).abs() < 1e-12);
    let re_minus = w_minus.abs().ln();
    let lambda_plus = w_plus + 1.0;
    let algebra = quadratic && re_minus > 0.0 && (lambda_plus - (sq5 - 1.0) / 2.0).abs() < 1e-15 && lambda_plus > 0.0;
    let roots = locate_window_roots(&example_scalar(1.0), &example_window()).map_err(|e| e.to_string())?;
    let min = roots
        .iter()
        .map(|r| (1.0 + (-r.lambda).exp() - r.lambda * (-r.lambda).exp()).norm())
        .fold(f64::INFINITY, f64::min);
    Ok((
        algebra && !roots.is_empty() && min > 1e-6,
        format!(
            "Re ln w₋ = {re_minus:.4}, λ₊ = {lambda_plus:.4}; min |1 + e^-λ − λe^-λ| over {} roots = {min:.3}",
            roots.len()
        ),
    ))
}

fn real(rows: usize, cols: usize, entries: &[f64]) -> CMat {
    CMat::from_row_slice(rows, cols, &entries.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
}

fn criterion10(seed: u64) -> Check {
    let fixtures = [
        (real(2, 2, &[-1.0, 0.0, 0.0, -1.0]), identity(2), true),
        (real(2, 2, &[-1.0, 0.0, 0.0, -1.0]), real(2, 1, &[1.0, 0.0]), false),
        (real(2, 2, &[-1.0, 0.0, 0.0, 0.5]), real(2, 1, &[1.0, 1.0]), true),
        (real(2, 2, &[-1.0, 1.0, 0.0, -1.0]), real(2, 1, &[1.0, 0.0]), false),
        (real(2, 2, &[-1.0, 1.0, 0.0, -1.0]), real(2, 1, &[0.0, 1.0]), true),
        (real(2, 2, &[0.0, -1.0, 1.0, 0.0]), real(2, 1, &[1.0, 0.0]), true),
    ];
    let mut classified = 0;
    let mut scalarized = 0;
    let mut attempts = 0;
    for (a, b, expected) in &fixtures {
        let pass = check_condition4(a, b).map_err(|e| e.to_string())?.iter().all(|e| e.pass);
        classified += usize::from(pass == *expected);
        if pass {
            let sys = NeutralSystem::with_a0(a.clone(), &CMat::zeros(2, 2), b.clone()).map_err(|e| e.to_string())?;
            let data = EigenData::collect(&sys, &[]).map_err(|e| e.to_string())?;
            for s in 0..10 {
                attempts += 1;
                if let Ok(cv) = scalarize_input(b, &data, seed.wrapping_add(s)) {
                    scalarized += usize::from(data.satisfied_by(&(b * cv)));
                }
            }
        }
    }

    let mut worst: f64 = 0.0;
    let synthetic: [(&[C64], &[C64], &[C64]); 3] = [
        (&[c(0.5, 0.0)], &[ONE], &[c(-1.0, 0.0)]),
        (&[c(0.3, 0.0), c(0.7, 0.0)], &[ONE, c(0.4, -0.2)], &[c(-0.5, 0.0), c(-0.6, 0.0)]),
        (
            &[c(0.2, 1.0), c(0.2, -1.0), c(0.0, 3.0)],
            &[ONE, c(0.0, 1.0), c(2.0, 0.5)],
            &[c(-1.0, 1.0), c(-1.0, -1.0), c(-0.5, 3.0)],
        ),
    ];
    for (lambdas, beta, targets) in synthetic {
        let k = modal_placement(lambdas, beta, targets).map_err(|e| e.to_string())?;
        let closed =
            CMat::from_diagonal(&CVec::from_column_slice(lambdas)) - CVec::from_column_slice(beta) * k.transpose();
        let eig = neutral_core::linalg::eigenvalues(&closed).ok_or("eigensolve failed")?;
        worst = worst.max(match_deviation(&eig, targets));
    }
    let ode = NeutralSystem::with_a0(CMat::zeros(2, 2), &real(2, 2, &[0.3, 0.0, 0.0, 0.7]), real(2, 1, &[1.0, 2.0]))
        .map_err(|e| e.to_string())?;
    let l2: Vec<RootRecord> = [0.3, 0.7]
        .iter()
        .map(|&x| refine_root(&ode, c(x + 0.01, 0.0)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let targets = [c(-0.5, 0.0), c(-0.6, 0.0)];
    let p = finite_pole_placement(&ode, &l2, &targets, seed).map_err(|e| e.to_string())?;
    worst = worst.max(match_deviation(&p.closed_loop, &targets));
    let pass = classified == fixtures.len() && scalarized == attempts && worst < PLACEMENT_TOL;
    Ok((
        pass,
        format!(
            "{classified}/{} fixtures classified, {scalarized}/{attempts} scalarizations, placement deviation {worst:.1e}",
            fixtures.len()
        ),
    ))
}

fn criterion11() -> Check {
    let err = |m: usize| -> Result<f64, String> {
        let h = History::from_fn(
            m,
            |t| CVec::from_element(1, c((-t).exp(), 0.0)),
            |t| CVec::from_element(1, c(-(-t).exp(), 0.0)),
        )
        .map_err(|e| e.to_string())?;
        let tr = simulate(&scalar_decay(), &h, 5.0, m).map_err(|e| e.to_string())?;
        Ok((tr.z.last().ok_or("empty trajectory")?[0] - (-5.0f64).exp()).norm())
    };
    let (e64, e128, e256) = (err(64)?, err(128)?, err(256)?);
    let (f1, f2) = (e64 / e128, e128 / e256);
    Ok((f1 >= 3.0 && f2 >= 3.0, format!("errors {e64:.2e}, {e128:.2e}, {e256:.2e}; factors {f1:.2}, {f2:.2}")))
}

pub fn run_criterion(id: u8, seed: u64) -> CriterionResult {
    let title = CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1);
    let start = Instant::now();
    let outcome = match id {
        1 => criterion1(),
        2 => criterion2(),
        3 => criterion3(),
        4 => criterion4(),
        5 => criterion5(),
        6 => criterion6(seed),
        7 => criterion7(),
        8 => criterion8(),
        9 => criterion9(),
        10 => criterion10(seed),
        11 => criterion11(),
        _ => Err(format!("no criterion {id}")),
    };
    let (pass, detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult { id, title, pass, detail, elapsed: start.elapsed() }
}

/// All criteria, in parallel on the current rayon pool, reported in order.
pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    CRITERIA.par_iter().map(|&(id, _)| run_criterion(id, seed)).collect()
}

pub fn table(results: &[CriterionResult]) -> String {
    let mut out = String::new();
    for r in results {
        let _ = writeln!(out, "{}", r.line());
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let _ = writeln!(out, "{passed}/{} criteria pass", results.len());
    out
}
