//! Gauss hypergeometric series for real `0 <= z < 1` and its `c`-derivative.

use crate::error::{Error, Result};
use crate::scalar::{Complex, Context};

const MAX_TERMS: usize = 200_000;

/// Partial sums of `2F1(a, b; c; z)` and of its derivative in `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Series {
    pub value: Complex,
    /// `d/dc 2F1(a, b; c; z)`.
    pub dc: Complex,
    /// Sum of term moduli; `eps * abs_sum` is the rounding floor of `value`.
    pub abs_sum: f64,
    pub terms: usize,
}

/// `(a)_n`.
pub fn pochhammer(a: Complex, n: u32) -> Complex {
    (0..n).fold(Complex::new(1.0, 0.0), |p, j| p * (a + j as f64))
}

/// Nonpositive integer `-m` that `c` sits on, if any.
pub fn pole_index(c: Complex, ctx: &Context) -> Option<u32> {
    if c.re > 0.5 {
        return None;
    }
    let m = (-c.re).round();
    let d = (c + m).norm();
    if d <= ctx.tol() * (1.0 + m) {
        Some(m as u32)
    } else {
        None
    }
}

fn check(z: f64, c: Complex, ctx: &Context) -> Result<()> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::Domain(format!("2F1 needs 0 <= z < 1, got {z}")));
    }
    if let Some(m) = pole_index(c, ctx) {
        return Err(Error::HypergeometricPole(m));
    }
    Ok(())
}

/// Sum the series and, when `with_dc`, the term-wise `c`-derivative
/// `d T_n/dc = -T_n sum_{j<n} 1/(c+j)`.
fn sum(a: Complex, b: Complex, c: Complex, z: f64, with_dc: bool, ctx: &Context) -> Result<Series> {
    check(z, c, ctx)?;
    let one = Complex::new(1.0, 0.0);
    let mut term = one;
    let mut value = one;
    let mut dc = Complex::new(0.0, 0.0);
    let mut harmonic = Complex::new(0.0, 0.0);
    let mut abs_sum = 1.0;
    if z == 0.0 {
        return Ok(Series { value, dc, abs_sum, terms: 1 });
    }
    let (na, nb) = (a.norm(), b.norm());
    let n_min = (-c.re).max(0.0).ceil() as usize + 1;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        harmonic += (c + nf).inv();
        term = term * (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        value += term;
        let tn = term.norm();
        abs_sum += tn;
        if with_dc {
            dc -= term * harmonic;
        }
        if term == Complex::new(0.0, 0.0) {
            return Ok(Series { value, dc, abs_sum, terms: n + 2 });
        }
        let m = nf + 1.0;
        if (n + 1) < n_min || m + c.re <= 0.0 {
            continue;
        }
        // ratio bound for all later terms
        let q = (z * (m + na) * (m + nb) / ((m + c.re) * (m + 1.0))).max(z);
        if q >= 1.0 {
            continue;
        }
        let mut tail = tn * q / (1.0 - q);
        if with_dc {
            tail *= 1.0 + harmonic.norm() + 1.0 / (1.0 - q);
        }
        let target = 1e-17 * abs_sum + 1e-2 * ctx.tol() * value.norm().min(abs_sum);
        if tail <= target {
            return Ok(Series { value, dc, abs_sum, terms: n + 2 });
        }
    }
    Err(Error::Tolerance(format!(
        "2F1({a}, {b}; {c}; {z}) series did not converge in {MAX_TERMS} terms"
    )))
}

/// `2F1(a, b; c; z)` by the defining series.
pub fn hyp2f1(a: Complex, b: Complex, c: Complex, z: f64, ctx: &Context) -> Result<Complex> {
    Ok(sum(a, b, c, z, false, ctx)?.value)
}

/// `d/dc 2F1(a, b; c; z)`, term by term.
pub fn hyp2f1_dc(a: Complex, b: Complex, c: Complex, z: f64, ctx: &Context) -> Result<Complex> {
    Ok(sum(a, b, c, z, true, ctx)?.dc)
}

/// Value, `c`-derivative and conditioning data in one pass.
pub fn hyp2f1_series(a: Complex, b: Complex, c: Complex, z: f64, ctx: &Context) -> Result<Series> {
    sum(a, b, c, z, true, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn examples() {
        let ctx = Context::default();
        assert_eq!(hyp2f1(c(0.3, 1.0), c(2.0, -1.0), c(1.5, 0.5), 0.0, &ctx).unwrap(), c(1.0, 0.0));
        let v = hyp2f1(c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), 0.5, &ctx).unwrap();
        assert!((v.re - 1.3862943611198906).abs() < 1e-15 && v.im == 0.0);
        assert_eq!(hyp2f1_dc(c(1.0, 2.0), c(1.0, 0.0), c(2.0, 0.0), 0.0, &ctx).unwrap(), c(0.0, 0.0));
        assert_eq!(hyp2f1_dc(c(0.0, 0.0), c(1.0, 3.0), c(2.0, 1.0), 0.6, &ctx).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn eckart_parameters() {
        // 2F1(1/2-7i, 1/2+7i; 1+2i(0.3+0.1i); 0.7), high-precision reference
        let ctx = Context::default();
        let v = hyp2f1(c(0.5, -7.0), c(0.5, 7.0), c(0.8, 0.6), 0.7, &ctx).unwrap();
        let r = c(-66232.06729493703, -206347.06427480492);
        assert!((v - r).norm() < 1e-12 * r.norm(), "{v}");
    }

    #[test]
    fn pole_is_reported() {
        let ctx = Context::default();
        assert_eq!(
            hyp2f1(c(1.0, 0.0), c(1.0, 0.0), c(-3.0, 1e-17), 0.5, &ctx),
            Err(Error::HypergeometricPole(3))
        );
        assert!(hyp2f1(c(1.0, 0.0), c(1.0, 0.0), c(-3.0, 1e-6), 0.5, &ctx).is_ok());
    }

    #[test]
    fn large_negative_c_is_summed_past_the_dip() {
        // terms shrink, then grow near n = -Re c before the tail sets in
        let ctx = Context::default();
        let (a, b, cc) = (c(0.5, -7.0), c(0.5, 7.0), c(-105.4, -40.9));
        let s = hyp2f1_series(a, b, cc, 0.7310585786300049, &ctx).unwrap();
        assert!(s.terms > 106);
    }

    #[test]
    fn dc_matches_central_difference() {
        let ctx = Context::default();
        let (a, b, cc) = (c(0.5, -7.0), c(0.5, 7.0), c(1.4, -3.0));
        let h = 1e-6;
        let fd = (hyp2f1(a, b, cc + h, 0.5, &ctx).unwrap() - hyp2f1(a, b, cc - h, 0.5, &ctx).unwrap())
            / (2.0 * h);
        let d = hyp2f1_dc(a, b, cc, 0.5, &ctx).unwrap();
        assert!((d - fd).norm() < 1e-6 * d.norm());
    }
}
