//! Winding numbers of a function along polygonal contours.

use crate::error::{Error, Result};
use crate::scalar::{Complex, Scaled};
use std::f64::consts::PI;

const MAX_DEPTH: u32 = 48;

/// Total change of `arg f` along the segment `[a, b]`, divided by `2 pi`.
///
/// Consecutive samples are accepted once `|f(b)/f(a) - 1| <= 0.5`, which keeps
/// each increment below `pi/6` and rules out a skipped turn of a locally
/// linear `f`. A zero on the segment is reported as a contour error.
pub fn segment_turns<F: Fn(Complex) -> Result<Scaled>>(f: &F, a: Complex, b: Complex, initial: usize) -> Result<f64> {
    let n = initial.max(1);
    let mut total = 0.0;
    let mut za = a;
    let mut fa = f(a)?;
    for j in 1..=n {
        let zb = a + (b - a) * (j as f64 / n as f64);
        let fb = f(zb)?;
        total += refine(f, za, fa, zb, fb, 0)?;
        za = zb;
        fa = fb;
    }
    Ok(total / (2.0 * PI))
}

fn ratio(fa: &Scaled, fb: &Scaled) -> Complex {
    (fb.mant / fa.mant) * (fb.log - fa.log).exp()
}

fn refine<F: Fn(Complex) -> Result<Scaled>>(f: &F, za: Complex, fa: Scaled, zb: Complex, fb: Scaled, depth: u32) -> Result<f64> {
    if fa.is_zero() || fb.is_zero() {
        return Err(Error::Contour(if fa.is_zero() { za } else { zb }));
    }
    let w = ratio(&fa, &fb);
    if (w - 1.0).norm() <= 0.5 {
        return Ok(w.arg());
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Contour(0.5 * (za + zb)));
    }
    let zm = 0.5 * (za + zb);
    let fm = f(zm)?;
    Ok(refine(f, za, fa, zm, fm, depth + 1)? + refine(f, zm, fm, zb, fb, depth + 1)?)
}

/// Winding number of `f` around the closed polygon `vertices` (counterclockwise
/// counts zeros minus poles inside). Fails unless the accumulated turns are
/// within `1e-3` of an integer.
pub fn winding<F: Fn(Complex) -> Result<Scaled>>(f: &F, vertices: &[Complex], samples_per_unit: f64) -> Result<i64> {
    let mut turns = 0.0;
    for i in 0..vertices.len() {
        let (a, b) = (vertices[i], vertices[(i + 1) % vertices.len()]);
        let n = ((b - a).norm() * samples_per_unit).ceil() as usize;
        turns += segment_turns(f, a, b, n)?;
    }
    let w = turns.round();
    if (turns - w).abs() > 1e-3 {
        return Err(Error::Tolerance(format!("winding number {turns} is not an integer")));
    }
    Ok(w as i64)
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn vertices(&self) -> [Complex; 4] {
        [
            Complex::new(self.x0, self.y0),
            Complex::new(self.x1, self.y0),
            Complex::new(self.x1, self.y1),
            Complex::new(self.x0, self.y1),
        ]
    }

    pub fn contains(&self, z: Complex) -> bool {
        z.re >= self.x0 && z.re < self.x1 && z.im >= self.y0 && z.im < self.y1
    }

    pub fn center(&self) -> Complex {
        Complex::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn quarters(&self) -> [Rect; 4] {
        let (xm, ym) = (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1));
        [
            Rect { x0: self.x0, x1: xm, y0: self.y0, y1: ym },
            Rect { x0: xm, x1: self.x1, y0: self.y0, y1: ym },
            Rect { x0: self.x0, x1: xm, y0: ym, y1: self.y1 },
            Rect { x0: xm, x1: self.x1, y0: ym, y1: self.y1 },
        ]
    }

    pub fn width(&self) -> f64 {
        (self.x1 - self.x0).max(self.y1 - self.y0)
    }
}

impl std::fmt::Display for Rect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]x[{}, {}]", self.x0, self.x1, self.y0, self.y1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_zeros_and_poles() {
        let f = |z: Complex| {
            Ok(Scaled::new(
                (z - Complex::new(0.3, 0.1)) * (z + Complex::new(0.2, 0.4)).powi(2) / (z - Complex::new(0.0, 0.6)),
            ))
        };
        let r = Rect { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 };
        assert_eq!(winding(&f, &r.vertices(), 4.0).unwrap(), 2);
        let r = Rect { x0: -1.0, x1: 1.0, y0: 0.0, y1: 1.0 };
        assert_eq!(winding(&f, &r.vertices(), 4.0).unwrap(), 0);
    }

    #[test]
    fn fast_exponential_phase() {
        // e^{100 i z} has no zeros but turns many times along the real axis
        let f = |z: Complex| Ok(Scaled::exp(Complex::new(0.0, 100.0) * z));
        let r = Rect { x0: 0.0, x1: 3.0, y0: -1.0, y1: 1.0 };
        assert_eq!(winding(&f, &r.vertices(), 1.0).unwrap(), 0);
    }
}
