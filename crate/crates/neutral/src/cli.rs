//! Subcommands and the exit-code contract: 0 success, 2 for a failing or
//! unstable verdict, 1 for errors.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use neutral_core::classify::{classify_system, Verdict as ClassVerdict, NOTE_EIGENVECTORS_ONLY, NOTE_ROOT_VECTORS};
use neutral_core::linalg::{c, CVec, ONE, ZERO};
use neutral_core::pontryagin::{lhp_certificate, QuasiPolynomial, Verdict as LhpVerdict, Witness};
use neutral_core::sim::{chain_history, growth_verdict, simulate, GrowthKind, History};
use neutral_core::spectrum::{classify_root, locate_window_roots, refine_root, SpectralWindow};
use neutral_core::stabilize::{stabilizability_report, StabilizeOptions, DEFAULT_M_CUT};
use neutral_core::{NeutralSystem, C64};

use crate::acceptance;
use crate::output::{cnum, num, ArtifactDir, Header};
use crate::sysfile::{load_system, parse_system};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Parser, Debug, Clone)]
#[command(name = "neutral", version, about = "Spectral analysis and stabilizability of linear neutral delay systems")]
pub struct Cli {
    /// Directory for CSV and report artifacts; nothing is written without it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized steps (input scalarization, random test points).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for parallel sections; 0 lets the pool decide.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct WindowArgs {
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub re_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub re_max: f64,
    /// Half-height of the window; the window is symmetric unless --im-min is given.
    #[arg(long, default_value_t = 40.0 * PI)]
    pub im_max: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub im_min: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Largest lattice index used to tag roots.
    #[arg(long, default_value_t = 21)]
    pub k_max: usize,
}

impl WindowArgs {
    pub fn window(&self) -> Result<SpectralWindow, String> {
        let im_min = self.im_min.unwrap_or(-self.im_max);
        SpectralWindow::new(self.re_min, self.re_max, im_min, self.im_max, self.epsilon, self.k_max)
            .map_err(|e| format!("window: {e}"))
    }

    fn echo(&self) -> String {
        format!(
            "re_min={} re_max={} im_min={} im_max={} epsilon={} k_max={}",
            self.re_min,
            self.re_max,
            self.im_min.unwrap_or(-self.im_max),
            self.im_max,
            self.epsilon,
            self.k_max
        )
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistoryKind {
    /// `z(θ) = e₁`, `ż(θ) = 0`.
    Constant,
    /// `z(θ) = e^{λθ}(x₂ + θx₁)` at the root refined from --lambda.
    Chain,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Roots of det Δ in a window, with multiplicities and lattice tags.
    Spectrum {
        system: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Stability verdict from the unit-circle spectrum of A₋₁ and the roots in a window.
    Classify {
        system: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Method-of-steps simulation and growth verdict of the state norm.
    Simulate {
        system: PathBuf,
        /// Grid intervals per unit delay.
        #[arg(long, default_value_t = 256)]
        m: usize,
        #[arg(long, default_value_t = 60.0)]
        t_end: f64,
        #[arg(long, value_enum, default_value_t = HistoryKind::Constant)]
        history: HistoryKind,
        /// Seed `re,im` for the chain history root.
        #[arg(long, default_value = "0,34.5575", allow_hyphen_values = true)]
        lambda: String,
        /// Start of the fitting interval, default t_end/3.
        #[arg(long)]
        t_split: Option<f64>,
    },
    /// Left half-plane certificate for a real quasipolynomial Σ a·z^m·e^{nz}.
    Pontryagin {
        /// Terms `m,n,a` separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        terms: String,
    },
    /// Rank conditions, input scalarization, chain targets and finite pole placement.
    Stabilize {
        system: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 0.5)]
        margin: f64,
        #[arg(long, default_value_t = DEFAULT_M_CUT)]
        m_cut: f64,
    },
    /// Runs the acceptance suite and parses every fixture file.
    Selftest {
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    /// The one-line verdict, or the full table for `selftest`.
    pub message: String,
}

impl Outcome {
    fn ok(message: String) -> Self {
        Self { code: EXIT_OK, message }
    }

    fn verdict(pass: bool, message: String) -> Self {
        Self { code: if pass { EXIT_OK } else { EXIT_FAIL }, message }
    }

    fn error(message: String) -> Self {
        Self { code: EXIT_ERROR, message: format!("error: {message}") }
    }
}

pub fn default_fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn config_echo(cli: &Cli) -> String {
    let cmd = match &cli.command {
        Command::Spectrum { system, window } => {
            format!("command=spectrum system={} {}", system.display(), window.echo())
        }
        Command::Classify { system, window } => {
            format!("command=classify system={} {}", system.display(), window.echo())
        }
        Command::Simulate { system, m, t_end, history, lambda, t_split } => format!(
            "command=simulate system={} m={m} t_end={t_end} history={history:?} lambda={lambda} t_split={}",
            system.display(),
            t_split.unwrap_or(t_end / 3.0)
        ),
        Command::Pontryagin { terms } => format!("command=pontryagin terms=\"{terms}\""),
        Command::Stabilize { system, window, margin, m_cut } => {
            format!("command=stabilize system={} {} margin={margin} m_cut={m_cut}", system.display(), window.echo())
        }
        Command::Selftest { fixtures, only } => format!(
            "command=selftest fixtures={} only={only:?}",
            fixtures.as_deref().map_or("default".to_string(), |p| p.display().to_string())
        ),
    };
    format!("{cmd} jobs={}", cli.jobs)
}

/// Runs one parsed command on a pool capped at `--jobs` threads.
pub fn run(cli: &Cli) -> Outcome {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => return Outcome::error(format!("thread pool: {e}")),
    };
    pool.install(|| match dispatch(cli) {
        Ok(o) => o,
        Err(e) => Outcome::error(e),
    })
}

fn artifacts(cli: &Cli) -> Result<Option<ArtifactDir>, String> {
    cli.out
        .as_deref()
        .map(|d| {
            ArtifactDir::create(d, Header::new(cli.seed, &config_echo(cli)))
                .map_err(|e| format!("{}: {e}", d.display()))
        })
        .transpose()
}

fn io<T>(r: std::io::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("write: {e}"))
}

fn load(path: &Path) -> Result<NeutralSystem, String> {
    load_system(path).map_err(|e| e.to_string())
}

fn dispatch(cli: &Cli) -> Result<Outcome, String> {
    let out = artifacts(cli)?;
    match &cli.command {
        Command::Spectrum { system, window } => spectrum(&load(system)?, &window.window()?, out.as_ref()),
        Command::Classify { system, window } => classify(&load(system)?, &window.window()?, out.as_ref()),
        Command::Simulate { system, m, t_end, history, lambda, t_split } => {
            let sys = load(system)?;
            simulate_cmd(&sys, *m, *t_end, *history, lambda, t_split.unwrap_or(t_end / 3.0), out.as_ref())
        }
        Command::Pontryagin { terms } => pontryagin(terms, out.as_ref()),
        Command::Stabilize { system, window, margin, m_cut } => {
            let opts = StabilizeOptions { m_cut: *m_cut, margin: *margin, seed: cli.seed };
            stabilize(&load(system)?, &window.window()?, &opts, out.as_ref())
        }
        Command::Selftest { fixtures, only } => {
            let dir = fixtures.clone().unwrap_or_else(default_fixtures);
            selftest(&dir, only, cli.seed, out.as_ref())
        }
    }
}

fn root_rows(roots: &[neutral_core::spectrum::RootRecord], epsilon: f64) -> Vec<Vec<String>> {
    roots
        .iter()
        .map(|r| {
            let [re, im] = cnum(r.lambda);
            let (m, k) = r.lattice.map_or((String::new(), String::new()), |t| (t.m.to_string(), t.k.to_string()));
            vec![
                re,
                im,
                num(r.residual),
                r.alg_mult.to_string(),
                r.geo_mult.to_string(),
                m,
                k,
                classify_root(r, epsilon).label().to_string(),
            ]
        })
        .collect()
}

const ROOT_COLUMNS: [&str; 8] = ["re", "im", "residual", "alg_mult", "geo_mult", "m", "k", "class"];

fn spectrum(sys: &NeutralSystem, window: &SpectralWindow, out: Option<&ArtifactDir>) -> Result<Outcome, String> {
    let roots = locate_window_roots(sys, window).map_err(|e| format!("spectrum: {e}"))?;
    if let Some(o) = out {
        io(o.csv("roots.csv", &ROOT_COLUMNS, &root_rows(&roots, window.epsilon)))?;
    }
    let abscissa = roots.iter().map(|r| r.lambda.re).fold(f64::NEG_INFINITY, f64::max);
    let count: usize = roots.iter().map(|r| r.alg_mult).sum();
    Ok(Outcome::ok(format!("{} distinct roots ({count} with multiplicity), max Re {abscissa:.6e}", roots.len())))
}

pub fn classify_line(verdict: ClassVerdict, notes: &[String]) -> String {
    let tag = if notes.iter().any(|n| n == NOTE_EIGENVECTORS_ONLY) {
        " (eigenvectors only)"
    } else if notes.iter().any(|n| n == NOTE_ROOT_VECTORS) {
        " (root vectors present)"
    } else {
        ""
    };
    format!("{}{tag}", verdict.label())
}

fn classify(sys: &NeutralSystem, window: &SpectralWindow, out: Option<&ArtifactDir>) -> Result<Outcome, String> {
    let r = classify_system(sys, window).map_err(|e| format!("classify: {e}"))?;
    if let Some(o) = out {
        io(o.csv("roots.csv", &ROOT_COLUMNS, &root_rows(&r.roots, window.epsilon)))?;
        let mut body = String::new();
        let _ = writeln!(body, "verdict {}", r.verdict);
        let _ = writeln!(body, "case {:?}", r.case);
        let _ = writeln!(body, "spectral_abscissa_window {}", num(r.spectral_abscissa_window));
        for e in &r.structure {
            let _ = writeln!(
                body,
                "delay_eigenvalue {} {} alg={} geo={}",
                num(e.mu.re),
                num(e.mu.im),
                e.alg_mult,
                e.geo_mult
            );
        }
        for n in &r.notes {
            let _ = writeln!(body, "note {n}");
        }
        io(o.text("report.txt", &body))?;
    }
    Ok(Outcome::verdict(r.verdict != ClassVerdict::Unstable, classify_line(r.verdict, &r.notes)))
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [re, im] = parts.as_slice() else {
        return Err(format!("expected re,im, got {s:?}"));
    };
    let p = |x: &str| x.parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok(c(p(re)?, p(im)?))
}

fn simulate_cmd(
    sys: &NeutralSystem,
    m: usize,
    t_end: f64,
    kind: HistoryKind,
    lambda: &str,
    t_split: f64,
    out: Option<&ArtifactDir>,
) -> Result<Outcome, String> {
    let n = sys.n();
    let e = |i: usize| CVec::from_fn(n, |j, _| if j == i { ONE } else { ZERO });
    let history = match kind {
        HistoryKind::Constant => History::from_fn(m, |_| e(0), |_| CVec::zeros(n)),
        HistoryKind::Chain => {
            let seed = parse_complex(lambda)?;
            let root = refine_root(sys, seed).map_err(|e| format!("spectrum: {e}"))?;
            let (x1, x2) = if n >= 2 { (e(0), e(1)) } else { (CVec::zeros(1), e(0)) };
            chain_history(root.lambda, &x1, &x2, m)
        }
    }
    .map_err(|e| format!("sim: {e}"))?;
    let tr = simulate(sys, &history, t_end, m).map_err(|e| format!("sim: {e}"))?;
    let g = growth_verdict(&tr.norm_trace, t_split).map_err(|e| format!("sim: {e}"))?;
    if let Some(o) = out {
        let rows: Vec<Vec<String>> = tr.norm_trace.iter().map(|&(t, v)| vec![num(t), num(v)]).collect();
        io(o.csv("norm_trace.csv", &["t", "norm"], &rows))?;
        let mut body = format!(
            "growth {}\nlinear_slope {}\nr_squared {}\nlog_slope {}\n",
            g.kind.label(),
            num(g.linear_slope),
            num(g.r_squared),
            num(g.log_slope)
        );
        for w in &tr.warnings {
            let _ = writeln!(body, "warning {w}");
        }
        io(o.text("report.txt", &body))?;
    }
    Ok(Outcome::verdict(
        g.kind != GrowthKind::Growing,
        format!(
            "{} (slope {:.4e}, R² {:.4}, log slope {:.4e})",
            g.kind.label(),
            g.linear_slope,
            g.r_squared,
            g.log_slope
        ),
    ))
}

pub fn parse_terms(text: &str) -> Result<QuasiPolynomial, String> {
    let mut terms = Vec::new();
    for (i, t) in text.split(';').map(str::trim).filter(|t| !t.is_empty()).enumerate() {
        let f: Vec<&str> = t.split(',').map(str::trim).collect();
        let [m, n, a] = f.as_slice() else {
            return Err(format!("term {}: expected m,n,a, got {t:?}", i + 1));
        };
        let m: u32 = m.parse().map_err(|e| format!("term {}: power {m:?}: {e}", i + 1))?;
        let n: u32 = n.parse().map_err(|e| format!("term {}: exponent {n:?}: {e}", i + 1))?;
        let a: f64 = a.parse().map_err(|e| format!("term {}: coefficient {a:?}: {e}", i + 1))?;
        terms.push((m, n, a));
    }
    QuasiPolynomial::real(&terms).map_err(|e| format!("pontryagin: {e}"))
}

pub fn certificate_line(verdict: LhpVerdict, witness: &Witness) -> String {
    match (verdict, witness) {
        (LhpVerdict::Certified, Witness::Window { k, .. }) => {
            format!("Certified LHP (window k={})", k.iter().max().copied().unwrap_or(0))
        }
        (LhpVerdict::Certified, w) => format!("Certified LHP ({w:?})"),
        (LhpVerdict::Refuted, Witness::SignViolation { y0, .. }) => {
            format!("Refuted (sign condition fails at y={y0:.6})")
        }
        (LhpVerdict::Refuted, Witness::OffAxisZeros { complex, real, .. }) => {
            format!("Refuted ({complex} zeros of the continuation, {real} on the real line)")
        }
        (LhpVerdict::Refuted, Witness::RightHalfPlaneZeros { count, .. }) => {
            format!("Refuted ({count} zeros in the right half-plane probe)")
        }
        (v, w) => format!("{v:?} ({w:?})"),
    }
}

fn pontryagin(terms: &str, out: Option<&ArtifactDir>) -> Result<Outcome, String> {
    let qp = parse_terms(terms)?;
    let cert = lhp_certificate(&qp);
    let line = certificate_line(cert.verdict, &cert.witness);
    if let Some(o) = out {
        io(o.text("certificate.txt", &format!("verdict {:?}\nwitness {:?}\n", cert.verdict, cert.witness)))?;
    }
    Ok(Outcome::verdict(cert.verdict != LhpVerdict::Refuted, line))
}

fn stabilize(
    sys: &NeutralSystem,
    window: &SpectralWindow,
    opts: &StabilizeOptions,
    out: Option<&ArtifactDir>,
) -> Result<Outcome, String> {
    let r = stabilizability_report(sys, window, opts).map_err(|e| format!("stabilize: {e}"))?;
    let cond3 = r.cond3.iter().all(|e| e.pass);
    let cond4 = r.cond4.iter().all(|e| e.pass);
    if let Some(o) = out {
        let mut rows: Vec<Vec<String>> = Vec::new();
        for e in &r.cond3 {
            let [re, im] = cnum(e.root.lambda);
            rows.push(vec!["3".into(), re, im, e.rank.to_string(), e.pass.to_string()]);
        }
        for e in &r.cond4 {
            let [re, im] = cnum(e.mu);
            rows.push(vec!["4".into(), re, im, e.rank.to_string(), e.pass.to_string()]);
        }
        io(o.csv("conditions.csv", &["condition", "re", "im", "rank", "pass"], &rows))?;
        let rows: Vec<Vec<String>> = r
            .targets
            .iter()
            .map(|t| {
                let [lr, li] = cnum(t.lattice);
                let [tr, ti] = cnum(t.target);
                vec![t.m.to_string(), t.k.to_string(), lr, li, num(t.radius), tr, ti]
            })
            .collect();
        io(o.csv("targets.csv", &["m", "k", "lattice_re", "lattice_im", "radius", "target_re", "target_im"], &rows))?;
        let mut body =
            format!("cond1 {}\ncond2 {}\ncond3 {cond3}\ncond4 {cond4}\noverall {}\n", r.cond1, r.cond2, r.overall_pass);
        if let Some(cv) = &r.scalarization {
            let entries: Vec<String> = cv.iter().map(|z| format!("{}{:+}i", num(z.re), z.im)).collect();
            let _ = writeln!(body, "scalarization {}", entries.join(" "));
        }
        for t in &r.rejected_targets {
            let _ = writeln!(body, "rejected_target m={} k={} {}", t.m, t.k, t.reason);
        }
        if let Some(p) = &r.finite_gain {
            for z in &p.closed_loop {
                let _ = writeln!(body, "closed_loop {} {}", num(z.re), num(z.im));
            }
        }
        io(o.text("report.txt", &body))?;
    }
    let failed: Vec<&str> = [(r.cond1, "1"), (r.cond2, "2"), (cond3, "3"), (cond4, "4")]
        .iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, n)| *n)
        .collect();
    let line = if failed.is_empty() {
        format!("stabilizable: conditions 1-4 hold, {} chain targets", r.targets.len())
    } else {
        format!("not stabilizable: condition {} fails", failed.join(", "))
    };
    Ok(Outcome::verdict(r.overall_pass, line))
}

/// One line per fixture file, sorted by name.
pub fn fixture_lines(dir: &Path) -> Result<Vec<String>, String> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "sys"))
        .collect();
    paths.sort();
    Ok(paths
        .iter()
        .map(|p| {
            let name = p.file_name().map_or(String::new(), |n| n.to_string_lossy().into_owned());
            match std::fs::read_to_string(p)
                .map_err(|e| e.to_string())
                .and_then(|s| parse_system(&s).map_err(|e| e.to_string()))
            {
                Ok(sys) => format!("fixture {name}: parsed n={} p={}", sys.n(), sys.p()),
                Err(e) => format!("fixture {name}: parse failure: {e}"),
            }
        })
        .collect())
}

fn selftest(fixtures: &Path, only: &[u8], seed: u64, out: Option<&ArtifactDir>) -> Result<Outcome, String> {
    let results: Vec<acceptance::CriterionResult> = if only.is_empty() {
        acceptance::run_all(seed)
    } else {
        only.iter().map(|&id| acceptance::run_criterion(id, seed)).collect()
    };
    let mut body = acceptance::table(&results);
    for l in fixture_lines(fixtures)? {
        let _ = writeln!(body, "{l}");
    }
    if let Some(o) = out {
        io(o.text("selftest.txt", &body))?;
    }
    let all = results.iter().all(|r| r.pass);
    Ok(Outcome::verdict(all, body.trim_end().to_string()))
}
