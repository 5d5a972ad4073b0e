//! Stability classification from the structure of `A₋₁` on the unit circle
//! and the roots found in a window.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{frobenius, identity, kernel_basis_scaled, CMat, C64};
use crate::model::NeutralSystem;
use crate::spectrum::{
    eigen_clusters, locate_window_roots, spectral_partition, RootRecord, SpectralWindow, ON_AXIS_TOL, UNIT_CIRCLE_TOL,
};
use crate::{Error, Result};

/// Default strip half-width for "no roots with `Re λ ≥ −ε`".
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Relative rank tolerance for the geometric multiplicity of an eigenvalue of `A₋₁`.
pub const RANK_TOL: f64 = 1e-8;

/// A distinct eigenvalue of `A₋₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayEigenvalue {
    pub mu: C64,
    pub alg_mult: usize,
    pub geo_mult: usize,
}

impl DelayEigenvalue {
    pub fn is_simple(&self) -> bool {
        self.alg_mult == 1
    }

    pub fn has_jordan_block(&self) -> bool {
        self.geo_mult < self.alg_mult
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NecessaryCondition {
    /// No root with `Re λ ≥ 0` in the window.
    Holds(SpectralWindow),
    Violated(RootRecord),
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    StronglyStable,
    Unstable,
    DilemmaCaseIII,
    ExponentiallyStableEvidence,
    Inconclusive,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::StronglyStable => "StronglyStable",
            Verdict::Unstable => "Unstable",
            Verdict::DilemmaCaseIII => "DilemmaCaseIII",
            Verdict::ExponentiallyStableEvidence => "ExponentiallyStableEvidence",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which branch of the trichotomy on `σ₁` applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// Every `μ ∈ σ₁` is simple.
    SimpleOnCircle,
    /// Some `μ ∈ σ₁` has a Jordan block.
    JordanOnCircle,
    /// Some `μ ∈ σ₁` is multiple, none has a Jordan block.
    SemisimpleMultiple,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub structure: Vec<DelayEigenvalue>,
    pub sigma1: Vec<DelayEigenvalue>,
    pub necessary_condition: NecessaryCondition,
    pub case: Option<Case>,
    pub verdict: Verdict,
    /// `max Re λ` over the roots found, `−∞` if none.
    pub spectral_abscissa_window: f64,
    pub window: SpectralWindow,
    pub roots: Vec<RootRecord>,
    pub notes: Vec<String>,
}

/// Distinct eigenvalues of `A₋₁` with algebraic and geometric multiplicities.
pub fn delay_matrix_structure(a_minus1: &CMat) -> Result<Vec<DelayEigenvalue>> {
    let n = a_minus1.nrows();
    if n != a_minus1.ncols() {
        return Err(Error::DimensionMismatch { context: "A₋₁ columns", expected: n, found: a_minus1.ncols() });
    }
    let scale = frobenius(a_minus1);
    Ok(eigen_clusters(a_minus1)?
        .into_iter()
        .map(|c| {
            let shifted = a_minus1 - identity(n) * c.mu;
            let geo = kernel_basis_scaled(&shifted, RANK_TOL, scale).len().clamp(1, c.mult);
            DelayEigenvalue { mu: c.mu, alg_mult: c.mult, geo_mult: geo }
        })
        .collect())
}

/// Entries with `||μ| − 1| < tol`.
pub fn sigma1_of(structure: &[DelayEigenvalue], tol: f64) -> Vec<DelayEigenvalue> {
    structure.iter().copied().filter(|e| (e.mu.norm() - 1.0).abs() < tol).collect()
}

/// The trichotomy branch on `σ₁`, `None` when `σ₁` is empty.
pub fn trichotomy_case(sigma1: &[DelayEigenvalue]) -> Option<Case> {
    if sigma1.is_empty() {
        None
    } else if sigma1.iter().all(DelayEigenvalue::is_simple) {
        Some(Case::SimpleOnCircle)
    } else if sigma1.iter().any(DelayEigenvalue::has_jordan_block) {
        Some(Case::JordanOnCircle)
    } else {
        Some(Case::SemisimpleMultiple)
    }
}

pub const NOTE_EIGENVECTORS_ONLY: &str =
    "eigenvectors only: every Λ₁ root has as many eigenvectors as its multiplicity";
pub const NOTE_ROOT_VECTORS: &str = "root vectors present: some Λ₁ root has fewer eigenvectors than its multiplicity";

/// Stability verdict on the evidence window.
///
/// Spectrum failures do not propagate: they yield `Inconclusive` with the
/// error in the notes.
pub fn classify_system(sys: &NeutralSystem, window: &SpectralWindow) -> Result<ClassificationReport> {
    window.validate()?;
    let structure = delay_matrix_structure(sys.a_minus1())?;
    let sigma1 = sigma1_of(&structure, UNIT_CIRCLE_TOL);
    let case = trichotomy_case(&sigma1);
    let mut report = ClassificationReport {
        structure,
        sigma1,
        necessary_condition: NecessaryCondition::Unknown,
        case,
        verdict: Verdict::Inconclusive,
        spectral_abscissa_window: f64::NEG_INFINITY,
        window: *window,
        roots: Vec::new(),
        notes: Vec::new(),
    };
    let roots = match locate_window_roots(sys, window) {
        Ok(r) => r,
        Err(e) => {
            report.notes.push(format!("root search failed: {e}"));
            return Ok(report);
        }
    };
    report.spectral_abscissa_window = roots.iter().map(|r| r.lambda.re).fold(f64::NEG_INFINITY, f64::max);
    report.roots = roots;

    if let Some(bad) = report.roots.iter().find(|r| r.lambda.re >= -ON_AXIS_TOL) {
        report.necessary_condition = NecessaryCondition::Violated(bad.clone());
        report.verdict = Verdict::Unstable;
        report.notes.push(format!("root {} violates Re λ < 0", bad.lambda));
        return Ok(report);
    }
    report.necessary_condition = NecessaryCondition::Holds(*window);
    let near_axis = report.roots.iter().filter(|r| r.lambda.re >= -window.epsilon).count();

    report.verdict = match case {
        None if near_axis == 0 => Verdict::ExponentiallyStableEvidence,
        None => {
            report.notes.push(format!("σ₁ empty but {near_axis} roots with Re λ ≥ −ε"));
            Verdict::Inconclusive
        }
        Some(Case::SimpleOnCircle) => {
            report.notes.push("σ₁ simple: strongly stable on the evidence window".into());
            Verdict::StronglyStable
        }
        Some(Case::JordanOnCircle) => {
            report.notes.push("Jordan block of A₋₁ on the unit circle".into());
            Verdict::Unstable
        }
        Some(Case::SemisimpleMultiple) => {
            let l1 = spectral_partition(&report.roots, window.epsilon)?.l1;
            if l1.is_empty() {
                report.notes.push("no Λ₁ roots in the window".into());
            } else if l1.iter().all(|r| r.geo_mult == r.alg_mult) {
                report.notes.push(NOTE_EIGENVECTORS_ONLY.into());
            } else {
                report.notes.push(NOTE_ROOT_VECTORS.into());
            }
            Verdict::DilemmaCaseIII
        }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{dilemma_system, mixed_singular, pure_difference, scalar_decay, scalar_neutral};
    use crate::linalg::{c, ZERO};
    use crate::pontryagin::{lhp_certificate, QuasiPolynomial, Verdict as Lhp};
    use alloc::vec;
    use core::f64::consts::PI;

    fn real(n: usize, entries: &[f64]) -> CMat {
        CMat::from_row_slice(n, n, &entries.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
    }

    fn window(re_min: f64, re_max: f64, im: f64, k_max: usize) -> SpectralWindow {
        SpectralWindow::new(re_min, re_max, -im, im, DEFAULT_EPSILON, k_max).unwrap()
    }

    #[test]
    fn structures() {
        let s = delay_matrix_structure(&(-identity(2))).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0].mu + 1.0).norm() < 1e-12);
        assert_eq!((s[0].alg_mult, s[0].geo_mult), (2, 2));
        let s = delay_matrix_structure(&real(2, &[-1.0, 1.0, 0.0, -1.0])).unwrap();
        assert_eq!((s[0].alg_mult, s[0].geo_mult), (2, 1));
        let s = delay_matrix_structure(&CMat::zeros(2, 2)).unwrap();
        assert_eq!(s, vec![DelayEigenvalue { mu: ZERO, alg_mult: 2, geo_mult: 2 }]);
        assert!(delay_matrix_structure(&CMat::zeros(2, 3)).is_err());
    }

    #[test]
    fn sigma1_selection() {
        let e = |mu: C64| DelayEigenvalue { mu, alg_mult: 1, geo_mult: 1 };
        let minus = DelayEigenvalue { mu: c(-1.0, 0.0), alg_mult: 2, geo_mult: 2 };
        assert_eq!(sigma1_of(&[minus], 1e-9), vec![minus]);
        assert!(sigma1_of(&[e(c(0.5, 0.0))], 1e-9).is_empty());
        let rot = C64::from_polar(1.0, PI / 4.0);
        assert_eq!(sigma1_of(&[e(rot), e(c(2.0, 0.0))], 1e-9), vec![e(rot)]);
    }

    #[test]
    fn dilemma_pair() {
        let w = window(-3.0, 0.5, 40.0 * PI, 25);
        let r0 = classify_system(&dilemma_system(1.0, 0.0), &w).unwrap();
        let r1 = classify_system(&dilemma_system(1.0, 1.0), &w).unwrap();
        for (r, note) in [(&r0, NOTE_EIGENVECTORS_ONLY), (&r1, NOTE_ROOT_VECTORS)] {
            assert_eq!(r.verdict, Verdict::DilemmaCaseIII);
            assert_eq!(r.case, Some(Case::SemisimpleMultiple));
            assert!(matches!(r.necessary_condition, NecessaryCondition::Holds(_)));
            assert!(r.notes.iter().any(|n| n == note), "{:?}", r.notes);
            assert!(r.spectral_abscissa_window < 0.0);
        }
        // the same spectrum with different eigenvector counts
        assert_eq!(r0.roots.len(), r1.roots.len());
        for (a, b) in r0.roots.iter().zip(&r1.roots) {
            assert!((a.lambda - b.lambda).norm() < 1e-9);
            assert_eq!(a.alg_mult, b.alg_mult);
            assert_eq!((a.geo_mult, b.geo_mult), (2, 1));
        }
    }

    #[test]
    fn scalar_neutral_is_strongly_stable() {
        let r = classify_system(&scalar_neutral(), &window(-3.0, 0.5, 20.0 * PI, 12)).unwrap();
        assert_eq!(r.verdict, Verdict::StronglyStable);
        assert_eq!(r.case, Some(Case::SimpleOnCircle));
        // oracle: −λ + λe^{−λ} − 1 = 0 ⇔ λe^λ − λ + e^λ = 0, certified through F and G
        let h = QuasiPolynomial::real(&[(1, 1, 1.0), (1, 0, -1.0), (0, 1, 1.0)]).unwrap();
        assert_eq!(lhp_certificate(&h).verdict, Lhp::Certified);
    }

    #[test]
    fn scalar_decay_is_exponentially_stable() {
        let r = classify_system(&scalar_decay(), &window(-3.0, 1.0, 10.0, 5)).unwrap();
        assert_eq!(r.verdict, Verdict::ExponentiallyStableEvidence);
        assert!((r.spectral_abscissa_window + 1.0).abs() < 1e-9);
        assert!(r.case.is_none());
    }

    #[test]
    fn right_half_plane_root_is_unstable() {
        // ż = ż(t−1)/2 + z: a real root with λ(1 − e^{−λ}/2) = 1
        let sys = NeutralSystem::with_a0(real(1, &[0.5]), &real(1, &[1.0]), CMat::zeros(1, 0)).unwrap();
        let r = classify_system(&sys, &window(-2.0, 3.0, 10.0, 5)).unwrap();
        assert_eq!(r.verdict, Verdict::Unstable);
        assert!(matches!(r.necessary_condition, NecessaryCondition::Violated(ref root) if root.lambda.re > 0.0));
    }

    #[test]
    fn jordan_block_on_the_circle() {
        let a = real(2, &[-1.0, 1.0, 0.0, -1.0]);
        let a0 = real(2, &[-1.0, 0.0, 0.0, -1.0]);
        let sys = NeutralSystem::with_a0(a, &a0, CMat::zeros(2, 0)).unwrap();
        let r = classify_system(&sys, &window(-3.0, 0.5, 10.0 * PI, 6)).unwrap();
        assert_eq!(r.case, Some(Case::JordanOnCircle));
        assert_eq!(r.verdict, Verdict::Unstable, "{:?}", r.notes);
    }

    #[test]
    fn exactly_one_branch() {
        let systems = [
            dilemma_system(1.0, 0.0),
            dilemma_system(2.0, 1.0),
            scalar_neutral(),
            mixed_singular(),
            pure_difference(real(2, &[0.5, 0.0, 0.0, -0.3])),
        ];
        for sys in systems {
            let s = delay_matrix_structure(sys.a_minus1()).unwrap();
            let s1 = sigma1_of(&s, UNIT_CIRCLE_TOL);
            let flags = [
                s1.iter().all(DelayEigenvalue::is_simple),
                s1.iter().any(DelayEigenvalue::has_jordan_block),
                !s1.iter().all(DelayEigenvalue::is_simple) && !s1.iter().any(DelayEigenvalue::has_jordan_block),
            ];
            if s1.is_empty() {
                assert!(trichotomy_case(&s1).is_none());
            } else {
                assert_eq!(flags.iter().filter(|f| **f).count(), 1);
            }
        }
    }

    #[test]
    fn enlarging_the_window_keeps_the_verdict() {
        let sys = scalar_neutral();
        let small = classify_system(&sys, &window(-2.0, 0.5, 10.0 * PI, 6)).unwrap();
        let large = classify_system(&sys, &window(-3.0, 0.5, 30.0 * PI, 16)).unwrap();
        assert_eq!(small.verdict, large.verdict);
        assert!(large.roots.len() > small.roots.len());
        let decay = scalar_decay();
        let a = classify_system(&decay, &window(-2.0, 0.5, 5.0, 4)).unwrap();
        let b = classify_system(&decay, &window(-3.0, 1.0, 50.0, 4)).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.roots.len(), b.roots.len());
    }

    #[test]
    fn invalid_window() {
        let w = SpectralWindow { re_min: 1.0, re_max: 0.0, im_min: -1.0, im_max: 1.0, epsilon: 0.05, k_max: 2 };
        assert!(classify_system(&scalar_decay(), &w).is_err());
    }
}
