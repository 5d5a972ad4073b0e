//! Method-of-steps integration on the grid `h = 1/M` and growth diagnostics.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::{condition_estimate_1, identity, is_finite_vec, norm, CMat, CVec, C64};
use crate::model::{theta, NeutralSystem};
use crate::{Error, Result};

/// Relative mismatch between `ż(0⁻)` and the equation's `ż(0⁺)` that triggers a warning.
pub const COMPATIBILITY_TOL: f64 = 1e-3;
/// Largest condition number accepted for `I − (h/2)A₂(0)`.
pub const MAX_STEP_CONDITION: f64 = 1e12;
/// Spacing of the norm trace.
pub const TRACE_SPACING: f64 = 0.5;

/// `z` and `ż` on `θᵢ = −1 + i/M`.
#[derive(Clone, Debug, PartialEq)]
pub struct History {
    pub z: Vec<CVec>,
    pub dz: Vec<CVec>,
}

impl History {
    pub fn new(z: Vec<CVec>, dz: Vec<CVec>) -> Result<Self> {
        if z.len() != dz.len() {
            return Err(Error::DimensionMismatch { context: "history ż samples", expected: z.len(), found: dz.len() });
        }
        if z.len() < 9 {
            return Err(Error::InvalidInput("history needs at least 8 intervals".into()));
        }
        let n = z[0].len();
        for v in z.iter().chain(&dz) {
            if v.len() != n {
                return Err(Error::DimensionMismatch { context: "history component", expected: n, found: v.len() });
            }
            if !is_finite_vec(v) {
                return Err(Error::NonFinite("history"));
            }
        }
        Ok(Self { z, dz })
    }

    pub fn from_fn<F, D>(m: usize, z: F, dz: D) -> Result<Self>
    where
        F: Fn(f64) -> CVec,
        D: Fn(f64) -> CVec,
    {
        Self::new((0..=m).map(|i| z(theta(i, m))).collect(), (0..=m).map(|i| dz(theta(i, m))).collect())
    }

    pub fn n(&self) -> usize {
        self.z[0].len()
    }

    pub fn intervals(&self) -> usize {
        self.z.len() - 1
    }

    pub fn scale(&self, a: C64) -> Self {
        Self { z: self.z.iter().map(|v| v * a).collect(), dz: self.dz.iter().map(|v| v * a).collect() }
    }
}

/// `z(θ) = e^{λθ}(x₂ + θx₁)`, the state of a Jordan chain `Δ(λ)x₁ = 0`, `Δ(λ)x₂ = −Δ′(λ)x₁`.
///
/// Along such a chain the solution is `e^{λt}(x₂ + tx₁)`; with `Re λ` close to
/// zero it grows linearly over long stretches. For a system without the chain
/// the same history serves as a matched comparison input.
pub fn chain_history(lambda: C64, x1: &CVec, x2: &CVec, m: usize) -> Result<History> {
    History::from_fn(
        m,
        |t| (x2 + x1 * C64::new(t, 0.0)) * (lambda * t).exp(),
        |t| ((x2 + x1 * C64::new(t, 0.0)) * lambda + x1) * (lambda * t).exp(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub h: f64,
    pub m: usize,
    pub a_minus1: CMat,
    /// `z(tⱼ)` at `tⱼ = −1 + jh`, history included.
    pub z: Vec<CVec>,
    /// Left limits `ż(tⱼ⁻)`.
    pub dz_minus: Vec<CVec>,
    /// Right limits `ż(tⱼ⁺)`; they differ from the left limits at integer times.
    pub dz_plus: Vec<CVec>,
    pub norm_trace: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn time(&self, j: usize) -> f64 {
        -1.0 + j as f64 * self.h
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.z.len() - 1)
    }

    /// Grid index of time `t`, rounded to the nearest node.
    pub fn index(&self, t: f64) -> usize {
        ((t + 1.0) * self.m as f64).round() as usize
    }

    pub fn z_at(&self, t: f64) -> &CVec {
        &self.z[self.index(t)]
    }
}

struct Stepper<'a> {
    m: usize,
    h: f64,
    a_minus1: &'a CMat,
    a2: Vec<CMat>,
    a3: Vec<CMat>,
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Stepper<'_> {
    /// `A₋₁ż(t−1⁻)` plus every quadrature term that does not involve the node `J` itself.
    fn known_part(&self, tr: &Trajectory, j: usize) -> CVec {
        let (m, h) = (self.m, self.h);
        let base = j - m;
        let mut q = self.a_minus1 * &tr.dz_minus[base];
        q += &self.a2[0] * &tr.dz_plus[base] * C64::new(0.5 * h, 0.0);
        q += &self.a3[0] * &tr.z[base] * C64::new(0.5 * h, 0.0);
        for i in 1..m {
            let avg = (&tr.dz_minus[base + i] + &tr.dz_plus[base + i]) * C64::new(0.5 * h, 0.0);
            q += &self.a2[i] * avg;
            q += &self.a3[i] * &tr.z[base + i] * C64::new(h, 0.0);
        }
        q
    }

    /// `ż(t_J⁻)` from `(I − (h/2)A₂(0))ż = known + (h/2)A₃(0)z(t_J)`.
    fn solve(&self, known: &CVec, z_new: &CVec) -> CVec {
        let rhs = known + &self.a3[self.m] * z_new * C64::new(0.5 * self.h, 0.0);
        self.lu.solve(&rhs).expect("factorization checked at construction")
    }

    fn jump(&self, tr: &Trajectory, j: usize) -> CVec {
        self.a_minus1 * (&tr.dz_plus[j - self.m] - &tr.dz_minus[j - self.m])
    }
}

/// Integrates from the history on `[−1, 0]` to `t_end`.
///
/// At each node the trapezoid rule over the stored unit interval gives the
/// distributed terms; the `θ = 0` endpoint of the `A₂` integral contains the
/// unknown `ż(tₙ)` and is moved to the left-hand side. `z` advances by the
/// trapezoid rule, predicted with `ż(tₙ⁺)` and corrected once.
pub fn simulate(sys: &NeutralSystem, initial: &History, t_end: f64, m: usize) -> Result<Trajectory> {
    let n = sys.n();
    if initial.n() != n {
        return Err(Error::DimensionMismatch { context: "history dimension", expected: n, found: initial.n() });
    }
    if initial.intervals() != m {
        return Err(Error::DimensionMismatch { context: "history grid", expected: m, found: initial.intervals() });
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidInput(format!("final time {t_end} must be positive")));
    }
    let h = 1.0 / m as f64;
    let a2: Vec<CMat> = (0..=m).map(|i| sys.a2().eval(theta(i, m), n)).collect();
    let a3: Vec<CMat> = (0..=m).map(|i| sys.a3().eval(theta(i, m), n)).collect();
    let step_matrix = identity(n) - &a2[m] * C64::new(0.5 * h, 0.0);
    let condition = condition_estimate_1(&step_matrix);
    if !(condition <= MAX_STEP_CONDITION) {
        return Err(Error::SingularStep);
    }
    let stepper = Stepper { m, h, a_minus1: sys.a_minus1(), a2, a3, lu: step_matrix.lu() };
    let steps = (t_end * m as f64).round() as usize;
    let mut tr = Trajectory {
        h,
        m,
        a_minus1: sys.a_minus1().clone(),
        z: Vec::with_capacity(m + 1 + steps),
        dz_minus: Vec::with_capacity(m + 1 + steps),
        dz_plus: Vec::with_capacity(m + 1 + steps),
        norm_trace: Vec::new(),
        warnings: Vec::new(),
    };
    tr.z.extend(initial.z.iter().cloned());
    tr.dz_minus.extend(initial.dz.iter().cloned());
    tr.dz_plus.extend(initial.dz.iter().cloned());

    // ż(0⁺) from the equation, with ż(0⁻) from the history at the θ = 0 endpoint
    let known = stepper.known_part(&tr, m);
    let d0 = &tr.dz_minus[m];
    let d0_plus =
        known + &stepper.a2[m] * d0 * C64::new(0.5 * h, 0.0) + &stepper.a3[m] * &tr.z[m] * C64::new(0.5 * h, 0.0);
    let mismatch = norm(&(&d0_plus - d0));
    if mismatch > COMPATIBILITY_TOL * (1.0 + norm(d0)) {
        tr.warnings.push(format!("history derivative at 0 differs from the equation by {mismatch:.3e}"));
    }
    tr.dz_plus[m] = d0_plus;

    for step in 0..steps {
        let j = m + step;
        let known = stepper.known_part(&tr, j + 1);
        let zp = &tr.z[j] + &tr.dz_plus[j] * C64::new(h, 0.0);
        let dp = stepper.solve(&known, &zp);
        let zc = &tr.z[j] + (&tr.dz_plus[j] + &dp) * C64::new(0.5 * h, 0.0);
        let dm = stepper.solve(&known, &zc);
        if !(is_finite_vec(&zc) && is_finite_vec(&dm)) {
            return Err(Error::NonFiniteState { time: tr.time(j + 1) });
        }
        tr.z.push(zc);
        tr.dz_minus.push(dm.clone());
        tr.dz_plus.push(dm);
        let jump = stepper.jump(&tr, j + 1);
        tr.dz_plus[j + 1] += jump;
    }
    tr.norm_trace = m2_norm_trace(&tr);
    Ok(tr)
}

/// `‖x(t)‖ = (‖z(t) − A₋₁z(t−1)‖² + ∫₋₁⁰‖z(t+θ)‖²dθ)^{1/2}` at `t = 0, 0.5, 1, …`.
pub fn m2_norm_trace(traj: &Trajectory) -> Vec<(f64, f64)> {
    let m = traj.m;
    let h = traj.h;
    let mut out = Vec::new();
    let mut t = 0.0;
    while t <= traj.final_time() + 1e-9 {
        let j = traj.index(t);
        let y = &traj.z[j] - &traj.a_minus1 * &traj.z[j - m];
        let sq: Vec<f64> = (0..=m).map(|i| traj.z[j - m + i].norm_squared()).collect();
        let integral = h * (sq.iter().sum::<f64>() - 0.5 * (sq[0] + sq[m]));
        out.push((t, (y.norm_squared() + integral).sqrt()));
        t += TRACE_SPACING;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthKind {
    Decaying,
    Bounded,
    Growing,
}

impl GrowthKind {
    pub fn label(&self) -> &'static str {
        match self {
            GrowthKind::Decaying => "Decaying",
            GrowthKind::Bounded => "Bounded",
            GrowthKind::Growing => "Growing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Growth {
    pub kind: GrowthKind,
    /// Slope of the least-squares line through the norms.
    pub linear_slope: f64,
    pub r_squared: f64,
    /// Slope of the least-squares line through the log-norms.
    pub log_slope: f64,
}

/// Minimum coefficient of determination for a linear growth verdict.
pub const GROWTH_R2: f64 = 0.9;
/// Linear slope, relative to the initial norm, above which the trace grows.
pub const GROWTH_SLOPE: f64 = 1e-2;
/// Log-slope below which the trace decays.
pub const DECAY_LOG_SLOPE: f64 = -1e-3;

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 0.0 };
    (slope, r2)
}

/// Fits the trace on `[t_split, T]`.
///
/// Growing: linear slope above `1e-2 · ‖x(0)‖` per unit time with `R² > 0.9`.
/// Decaying: log-slope below `−1e-3`. Otherwise bounded.
pub fn growth_verdict(trace: &[(f64, f64)], t_split: f64) -> Result<Growth> {
    let t_end = trace.last().map(|p| p.0).ok_or(Error::InsufficientData("empty norm trace"))?;
    if !(t_split > 0.0) || t_end < 3.0 * t_split - 1e-9 {
        return Err(Error::InsufficientData("norm trace must span three times the split time"));
    }
    let tail: Vec<(f64, f64)> = trace.iter().copied().filter(|p| p.0 >= t_split - 1e-9).collect();
    if tail.len() < 3 {
        return Err(Error::InsufficientData("fewer than three samples after the split"));
    }
    let initial = trace[0].1;
    let (linear_slope, r_squared) = least_squares(&tail);
    let logs: Vec<(f64, f64)> = tail.iter().map(|&(t, v)| (t, v.max(f64::MIN_POSITIVE).ln())).collect();
    let (log_slope, _) = least_squares(&logs);
    let kind = if linear_slope > GROWTH_SLOPE * initial && r_squared > GROWTH_R2 {
        GrowthKind::Growing
    } else if log_slope < DECAY_LOG_SLOPE {
        GrowthKind::Decaying
    } else {
        GrowthKind::Bounded
    };
    Ok(Growth { kind, linear_slope, r_squared, log_slope })
}
