//! Complex error function and its large-argument series.

use super::faddeeva::faddeeva_w;
use crate::error::{Error, Result};
use crate::scalar::{Complex, I};
use std::f64::consts::{FRAC_2_SQRT_PI, FRAC_PI_2, FRAC_PI_4, PI};

const MACLAURIN_RADIUS: f64 = 0.5;

fn erf_maclaurin(z: Complex) -> Complex {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term = -term * z2 / n;
        let t = term / (2.0 * n + 1.0);
        sum += t;
        if t.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

/// `exp(-z^2) * w` without intermediate overflow where the product is finite.
fn exp_neg_sq_times(z: Complex, w: Complex) -> Complex {
    let e = -z * z;
    if e.re < 700.0 {
        e.exp() * w
    } else {
        (e + w.ln()).exp()
    }
}

/// `erf(z)` for finite complex `z`.
pub fn erf(z: Complex) -> Complex {
    if z.norm() < MACLAURIN_RADIUS {
        return erf_maclaurin(z);
    }
    if z.re < 0.0 {
        return -erf(-z);
    }
    Complex::new(1.0, 0.0) - exp_neg_sq_times(z, faddeeva_w(I * z))
}

/// `erfc(z) = 1 - erf(z)`.
pub fn erfc(z: Complex) -> Complex {
    if z.norm() < MACLAURIN_RADIUS {
        return Complex::new(1.0, 0.0) - erf_maclaurin(z);
    }
    if z.re >= 0.0 {
        exp_neg_sq_times(z, faddeeva_w(I * z))
    } else {
        Complex::new(2.0, 0.0) - exp_neg_sq_times(z, faddeeva_w(-I * z))
    }
}

/// Which sign of `z` the large-argument series is expanded about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Truncated asymptotic series together with a bound on its error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncated {
    pub value: Complex,
    pub bound: f64,
}

/// `erf(z) ~ s - exp(-z^2)/sqrt(pi) * sum_{k<=m} (-1)^k (1/2)_k / (s z)^(2k+1)`
/// with `s = +-1`, valid for `|ph(s z)| < 3pi/4`.
///
/// The bound is the first omitted term times a sector factor: 1 up to
/// `|ph| = pi/4`, `csc(2|ph|)` beyond, capped near the Stokes line at
/// `ph = pi/2`, where the jump of 2 in `erfc` is added as well.
pub fn erf_asymptotic(z: Complex, m: usize, branch: Branch) -> Result<Truncated> {
    let s = branch.sign();
    let sz = s * z;
    let phase = sz.arg().abs();
    if phase >= 3.0 * PI / 4.0 || z == Complex::new(0.0, 0.0) {
        return Err(Error::Sector {
            branch: if s > 0.0 { '+' } else { '-' },
            phase,
        });
    }
    let inv2 = (sz * sz).inv();
    let mut term = sz.inv();
    let mut sum = term;
    for k in 1..=m {
        term = -term * inv2 * (k as f64 - 0.5);
        sum += term;
    }
    let pref = (-z * z).exp() / PI.sqrt();
    let value = Complex::new(s, 0.0) - pref * sum;

    let next = term.norm() * inv2.norm() * (m as f64 + 0.5);
    let cap = 1.0 + (PI * (m as f64 + 2.0) / 2.0).sqrt();
    let factor = if phase <= FRAC_PI_4 {
        1.0
    } else if phase < FRAC_PI_2 {
        (1.0 / (2.0 * phase).sin()).min(cap)
    } else {
        cap
    };
    let stokes = if phase > 3.0 * PI / 8.0 { 2.0 } else { 0.0 };
    Ok(Truncated {
        value,
        bound: pref.norm() * next * factor + stokes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn examples() {
        assert_eq!(erf(c(0.0, 0.0)), c(0.0, 0.0));
        assert!((erf(c(1.0, 0.0)).re - 0.8427007929497149).abs() < 1e-15);
        let e = erf(c(0.0, 2.0));
        assert!(e.re.abs() < 1e-15);
        assert!((e.im - 18.564802414575552).abs() < 1e-13);
    }

    #[test]
    fn symmetries() {
        for &(x, y) in &[(0.3, 0.2), (1.5, -2.0), (-2.5, 0.7), (4.0, 4.0)] {
            let z = c(x, y);
            assert!((erf(-z) + erf(z)).norm() <= 1e-15 * erf(z).norm());
            assert!((erf(z.conj()) - erf(z).conj()).norm() <= 1e-15 * erf(z).norm());
        }
    }

    #[test]
    fn erfc_complements() {
        for &(x, y) in &[(0.3, 0.2), (1.5, -2.0), (-2.5, 0.7), (0.1, 3.0)] {
            let z = c(x, y);
            let d = erfc(z) + erf(z) - c(1.0, 0.0);
            assert!(d.norm() < 1e-13 * (1.0 + erf(z).norm()));
        }
        // far tail: no cancellation
        let t = erfc(c(10.0, 0.0)).re;
        assert!((t - 2.088487583762545e-45).abs() < 1e-58);
    }

    #[test]
    fn huge_arguments_do_not_fail() {
        for &(x, y) in &[(1e6, 0.0), (0.0, 1e6), (7e5, 7e5), (-1e6, 3.0)] {
            let e = erf(c(x, y));
            assert!(!e.re.is_nan() && !e.im.is_nan(), "erf({x},{y}) = {e}");
        }
        assert_eq!(erf(c(1e6, 0.0)), c(1.0, 0.0));
    }

    #[test]
    fn asymptotic_examples() {
        let a = erf_asymptotic(c(5.0, 0.0), 3, Branch::Plus).unwrap();
        assert!((a.value - erf(c(5.0, 0.0))).norm() < 1e-12);
        let b = erf_asymptotic(c(0.1, 0.0), 3, Branch::Plus).unwrap();
        assert!(b.bound > 0.1);
        let z = c(3.0, 1.0);
        let lead = erf_asymptotic(z, 0, Branch::Plus).unwrap().value;
        let classic = c(1.0, 0.0) - (-z * z).exp() / (PI.sqrt() * z);
        assert!((lead - classic).norm() < 1e-15);
        assert!(matches!(
            erf_asymptotic(c(-1.0, 0.1), 2, Branch::Plus),
            Err(Error::Sector { .. })
        ));
        assert!(erf_asymptotic(c(-4.0, 0.1), 2, Branch::Minus).is_ok());
    }
}
