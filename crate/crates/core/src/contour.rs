//! Argument-principle winding numbers for analytic functions on circles and rectangles.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::linalg::C64;
use crate::{Error, Result};

/// Initial number of contour samples.
pub const MIN_SAMPLES: usize = 512;
/// `min|f| < CLOSE_RATIO · max|f|` on the contour means a zero sits on or next to it.
pub const CLOSE_RATIO: f64 = 1e-10;

const PHASE_STEP_LIMIT: f64 = PI / 2.0;

/// Axis-aligned rectangle `[re_min, re_max] × [im_min, im_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self { re_min, re_max, im_min, im_max }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn center(&self) -> C64 {
        C64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Grows every side by `d`.
    pub fn inflate(&self, d: f64) -> Self {
        Self::new(self.re_min - d, self.re_max + d, self.im_min - d, self.im_max + d)
    }

    /// Splits along the longer side at `re_min + frac·width` (or the imaginary analogue).
    pub fn split(&self, frac: f64) -> (Rect, Rect) {
        if self.width() >= self.height() {
            let x = self.re_min + frac * self.width();
            (Rect { re_max: x, ..*self }, Rect { re_min: x, ..*self })
        } else {
            let y = self.im_min + frac * self.height();
            (Rect { im_max: y, ..*self }, Rect { im_min: y, ..*self })
        }
    }

    fn point(&self, t: f64) -> C64 {
        // counter-clockwise, arc-length parametrized, t ∈ [0, 1)
        let (w, h) = (self.width(), self.height());
        let s = t * 2.0 * (w + h);
        if s < w {
            C64::new(self.re_min + s, self.im_min)
        } else if s < w + h {
            C64::new(self.re_max, self.im_min + (s - w))
        } else if s < 2.0 * w + h {
            C64::new(self.re_max - (s - w - h), self.im_max)
        } else {
            C64::new(self.re_min, self.im_max - (s - 2.0 * w - h))
        }
    }
}

/// Outcome of a contour evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Winding {
    pub count: i64,
    pub min_abs: f64,
    pub max_abs: f64,
    pub samples: usize,
}

/// Largest number of samples [`winding_guarded`] may place.
pub const MAX_GUARDED_SAMPLES: usize = 1 << 20;

/// Winding number from samples of `(f, f′/f)` with local refinement.
///
/// Starts from [`MIN_SAMPLES`] uniform points and bisects any segment whose
/// phase increment reaches π/2 or whose length times `|f′/f|` at either end
/// reaches π/2. The second guard forces refinement next to a zero sitting
/// close to the contour, where a multiple zero could otherwise rotate the
/// phase by a full turn between two samples unnoticed.
pub fn winding_guarded<F, P>(fg: &F, path: &P, length: f64) -> Result<Winding>
where
    F: Fn(C64) -> (C64, C64),
    P: Fn(f64) -> C64,
{
    let eval = |t: f64| -> Result<(C64, C64)> {
        let (v, g) = fg(path(t));
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite("contour sample"));
        }
        Ok((v, g))
    };
    let mut samples = MIN_SAMPLES;
    let mut min_abs = f64::INFINITY;
    let mut max_abs: f64 = 0.0;
    let mut total = 0.0;
    let first = eval(0.0)?;
    let mut prev = (0.0, first);
    let mut stack: Vec<(f64, (C64, C64), u32)> = Vec::new();
    for i in (1..=MIN_SAMPLES).rev() {
        let t = i as f64 / MIN_SAMPLES as f64;
        let v = if i == MIN_SAMPLES { first } else { eval(t)? };
        stack.push((t, v, 0));
    }
    while let Some((tb, vb, depth)) = stack.pop() {
        let (ta, va) = prev;
        let (fa, ga) = va;
        let (fb, gb) = vb;
        for f in [fa, fb] {
            min_abs = min_abs.min(f.norm());
            max_abs = max_abs.max(f.norm());
        }
        let d = (fb / fa).arg();
        let seg = length * (tb - ta);
        let guard = seg * ga.norm().max(gb.norm());
        let singular = fa.norm() == 0.0 || fb.norm() == 0.0 || !guard.is_finite();
        if singular {
            return Err(Error::ContourTooClose { min_abs: 0.0, max_abs });
        }
        if d.abs() < PHASE_STEP_LIMIT && guard < PHASE_STEP_LIMIT {
            total += d;
            prev = (tb, vb);
            continue;
        }
        if depth >= 48 || samples >= MAX_GUARDED_SAMPLES {
            return Err(Error::ContourTooClose { min_abs, max_abs });
        }
        let tm = 0.5 * (ta + tb);
        let vm = eval(tm)?;
        samples += 1;
        stack.push((tb, vb, depth + 1));
        stack.push((tm, vm, depth + 1));
    }
    if min_abs < CLOSE_RATIO * max_abs || max_abs == 0.0 {
        return Err(Error::ContourTooClose { min_abs, max_abs });
    }
    let w = total / (2.0 * PI);
    let count = w.round();
    if (w - count).abs() > 1e-3 {
        return Err(Error::WindingNotIntegral(w));
    }
    Ok(Winding { count: count as i64, min_abs, max_abs, samples })
}

pub fn winding_circle_guarded<F: Fn(C64) -> (C64, C64)>(fg: &F, center: C64, radius: f64) -> Result<Winding> {
    winding_guarded(fg, &|t: f64| center + C64::from_polar(radius, 2.0 * PI * t), 2.0 * PI * radius)
}

pub fn winding_rect_guarded<F: Fn(C64) -> (C64, C64)>(fg: &F, rect: &Rect) -> Result<Winding> {
    winding_guarded(fg, &|t: f64| rect.point(t), 2.0 * (rect.width() + rect.height()))
}

/// `max |f|` over `samples` points of a circle.
pub fn max_on_circle<F: Fn(C64) -> C64>(f: &F, center: C64, radius: f64, samples: usize) -> f64 {
    (0..samples)
        .map(|i| f(center + C64::from_polar(radius, 2.0 * PI * i as f64 / samples as f64)).norm())
        .fold(0.0, f64::max)
}
