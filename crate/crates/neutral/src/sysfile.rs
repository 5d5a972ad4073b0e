//! System definition files.
//!
//! TOML with these keys:
//!
//! ```toml
//! n = 2                      # state dimension
//! p = 1                      # input dimension, default 0
//! a_minus1 = [[-1, 0], [0, -1]]
//! a0 = [[-1, 1], [0, -1]]    # optional pointwise term A₀z(t)
//! a2 = [ [[0, 0], [0, 0]] ]  # optional, coefficients of θ⁰, θ¹, …
//! a3 = [ ]                   # optional, same layout
//! b = [[0], [1]]             # n × p, required when p > 0
//! ```
//!
//! Matrices are arrays of rows. An entry is a number or an `[re, im]` pair.

use std::fmt;
use std::path::Path;

use neutral_core::model::lift_pointwise_delay;
use neutral_core::{linalg::c, CMat, MatrixPolynomial, NeutralSystem, C64};
use serde::Deserialize;
use toml::{Spanned, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    n: Spanned<i64>,
    p: Option<Spanned<i64>>,
    a_minus1: Spanned<Value>,
    a0: Option<Spanned<Value>>,
    a2: Option<Spanned<Value>>,
    a3: Option<Spanned<Value>>,
    b: Option<Spanned<Value>>,
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn line(&self, offset: usize) -> usize {
        self.src[..offset.min(self.src.len())].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err<T>(&self, span: std::ops::Range<usize>, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: Some(self.line(span.start)), message: message.into() })
    }

    fn entry(&self, v: &Value, span: std::ops::Range<usize>, what: &str) -> Result<C64, ParseError> {
        let num = |x: &Value| match x {
            Value::Integer(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            _ => None,
        };
        let z = match v {
            Value::Array(pair) if pair.len() == 2 => match (num(&pair[0]), num(&pair[1])) {
                (Some(re), Some(im)) => c(re, im),
                _ => return self.err(span, format!("{what}: entry must be a number or [re, im]")),
            },
            other => match num(other) {
                Some(re) => c(re, 0.0),
                None => return self.err(span, format!("{what}: entry must be a number or [re, im]")),
            },
        };
        if !(z.re.is_finite() && z.im.is_finite()) {
            return self.err(span, format!("{what}: non-finite entry"));
        }
        Ok(z)
    }

    fn matrix(
        &self,
        v: &Value,
        span: std::ops::Range<usize>,
        rows: usize,
        cols: usize,
        what: &str,
    ) -> Result<CMat, ParseError> {
        let Value::Array(rs) = v else {
            return self.err(span, format!("{what}: expected an array of rows"));
        };
        if rs.len() != rows {
            return self.err(span, format!("{what}: {} rows, expected {rows}", rs.len()));
        }
        let mut m = CMat::zeros(rows, cols);
        for (i, r) in rs.iter().enumerate() {
            let Value::Array(es) = r else {
                return self.err(span, format!("{what}: row {} is not an array", i + 1));
            };
            if es.len() != cols {
                return self.err(span, format!("{what}: row {} has {} entries, expected {cols}", i + 1, es.len()));
            }
            for (j, e) in es.iter().enumerate() {
                m[(i, j)] = self.entry(e, span.clone(), what)?;
            }
        }
        Ok(m)
    }

    fn polynomial(&self, v: &Spanned<Value>, n: usize, what: &str) -> Result<Vec<CMat>, ParseError> {
        let span = v.span();
        let Value::Array(cs) = v.get_ref() else {
            return self.err(span, format!("{what}: expected a list of coefficient matrices"));
        };
        cs.iter()
            .enumerate()
            .map(|(d, m)| self.matrix(m, span.clone(), n, n, &format!("{what} coefficient θ^{d}")))
            .collect()
    }
}

fn add_coeffs(a: Vec<CMat>, b: &[CMat]) -> Vec<CMat> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x + y,
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        })
        .collect()
}

pub fn parse_system(src: &str) -> Result<NeutralSystem, ParseError> {
    let raw: RawSystem = toml::from_str(src).map_err(|e| {
        let line = e.span().map(|s| Ctx { src }.line(s.start));
        ParseError { line, message: e.message().trim().to_string() }
    })?;
    let ctx = Ctx { src };
    let n = *raw.n.get_ref();
    if !(1..=neutral_core::model::MAX_DIM as i64).contains(&n) {
        return ctx.err(raw.n.span(), format!("n = {n} outside 1..={}", neutral_core::model::MAX_DIM));
    }
    let n = n as usize;
    let p = match &raw.p {
        Some(p) if *p.get_ref() < 0 => return ctx.err(p.span(), "p must be non-negative"),
        Some(p) => *p.get_ref() as usize,
        None => 0,
    };
    let a_m1 = ctx.matrix(raw.a_minus1.get_ref(), raw.a_minus1.span(), n, n, "a_minus1")?;
    let mut a2 = match &raw.a2 {
        Some(v) => ctx.polynomial(v, n, "a2")?,
        None => Vec::new(),
    };
    let mut a3 = match &raw.a3 {
        Some(v) => ctx.polynomial(v, n, "a3")?,
        None => Vec::new(),
    };
    if let Some(v) = &raw.a0 {
        let a0 = ctx.matrix(v.get_ref(), v.span(), n, n, "a0")?;
        let (l2, l3) = lift_pointwise_delay(&a0)
            .map_err(|e| ParseError { line: Some(ctx.line(v.span().start)), message: e.to_string() })?;
        a2 = add_coeffs(a2, l2.coeffs());
        a3 = add_coeffs(a3, l3.coeffs());
    }
    let b = match (&raw.b, p) {
        (Some(v), _) => ctx.matrix(v.get_ref(), v.span(), n, p, "b")?,
        (None, 0) => CMat::zeros(n, 0),
        (None, _) => return ctx.err(raw.p.as_ref().map_or(0..0, |s| s.span()), "p > 0 needs an input matrix b"),
    };
    NeutralSystem::new(a_m1, MatrixPolynomial::new(a2), MatrixPolynomial::new(a3), b)
        .map_err(|e| ParseError { line: None, message: format!("model: {e}") })
}

#[derive(Debug)]
pub enum LoadError {
    NotFound(String),
    Io(String, std::io::Error),
    Parse(String, ParseError),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::NotFound(p) => write!(f, "{p}: file not found"),
            LoadError::Io(p, e) => write!(f, "{p}: {e}"),
            LoadError::Parse(p, e) => write!(f, "{p}: {e}"),
        }
    }
}

impl std::error::Error for LoadError {}

pub fn load_system(path: &Path) -> Result<NeutralSystem, LoadError> {
    let shown = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => LoadError::NotFound(shown.clone()),
        _ => LoadError::Io(shown.clone(), e),
    })?;
    parse_system(&src).map_err(|e| LoadError::Parse(shown, e))
}
