//! Moshinsky-type kernel
//! `M(k, r, beta) = int dp/(i pi) exp(-beta p^2 + i r p)/(p - k)`
//! and its closed form `exp(ikr - beta k^2) [sgn(Im k) + erf((r + 2ik beta)/(2 sqrt(beta)))]`.

use crate::error::{Error, Result};
use crate::quad::{integrate_breaks, Quad};
use crate::scalar::{Complex, Scaled, I};
use crate::specfun::erfcx;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoshArgs {
    pub k: Complex,
    pub r: f64,
    pub beta: Complex,
}

impl MoshArgs {
    pub fn new(k: Complex, r: f64, beta: Complex) -> Self {
        MoshArgs { k, r, beta }
    }
}

/// The closed form split as `coef * exp + alg`, where `exp = e^{ikr - beta k^2}`
/// is kept log-scaled, `coef = sgn(Im k) + nu` and
/// `alg = -nu e^{-r^2/(4 beta)} erfcx(nu w)` with `nu = sign(Re w)`, so that
/// `|alg| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoshParts {
    pub nu: f64,
    pub coef: f64,
    pub exp: Scaled,
    pub alg: Complex,
    /// `alg - l(beta)/k` evaluated without cancellation, see [`tail_coefficient`].
    pub alg_reduced: Complex,
}

impl MoshParts {
    pub fn value(&self) -> Complex {
        if self.coef == 0.0 {
            self.alg
        } else {
            self.exp.scale(Complex::new(self.coef, 0.0)).value() + self.alg
        }
    }
}

/// `sgn(Im k)`, zero on the real axis.
pub fn sgn_im(k: Complex) -> f64 {
    if k.im > 0.0 {
        1.0
    } else if k.im < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Leading large-`beta` behaviour `M ~ l(beta)/k`,
/// `l(beta) = i e^{-r^2/(4 beta)} / sqrt(pi beta)`.
pub fn tail_coefficient(r: f64, beta: Complex) -> Complex {
    I * (-r * r / (4.0 * beta)).exp() / (PI * beta).sqrt()
}

/// `erfcx(x) - 1/(sqrt(pi) x)` for `Re x >= 0`.
fn erfcx_reduced(x: Complex) -> Complex {
    let sqrt_pi = PI.sqrt();
    if x.norm() < 6.0 {
        return erfcx(x) - 1.0 / (sqrt_pi * x);
    }
    let inv2 = (x * x).inv();
    let mut term = Complex::new(1.0, 0.0);
    let mut sum = Complex::new(0.0, 0.0);
    for m in 1..60 {
        term = -term * inv2 * (m as f64 - 0.5);
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum / (sqrt_pi * x)
}

/// Closed form in split representation. Valid for any `k` (real `k` gives the
/// principal value) and `Re beta >= 0`, `beta != 0`.
pub fn mosh_parts(k: Complex, r: f64, beta: Complex) -> Result<MoshParts> {
    if beta.re < 0.0 || beta == Complex::new(0.0, 0.0) {
        return Err(Error::Domain(format!("Moshinsky kernel needs Re beta >= 0, beta != 0, got {beta}")));
    }
    let sb = beta.sqrt();
    let w = (r + 2.0 * I * k * beta) / (2.0 * sb);
    let nu = if w.re >= 0.0 { 1.0 } else { -1.0 };
    let x = nu * w;
    let gauss = (-r * r / (4.0 * beta)).exp();
    let alg = -nu * gauss * erfcx(x);
    let alg_reduced = if k == Complex::new(0.0, 0.0) {
        Complex::new(f64::NAN, f64::NAN)
    } else {
        // -nu e^{-s}[erfcx(x) - 1/(sqrt(pi) x)] + e^{-s} r / (2 sqrt(pi) i k beta w)
        let mut v = -nu * gauss * erfcx_reduced(x);
        if r != 0.0 {
            v += gauss * r / (2.0 * PI.sqrt() * I * k * beta * w);
        }
        v
    };
    Ok(MoshParts {
        nu,
        coef: sgn_im(k) + nu,
        exp: Scaled::exp(I * k * r - beta * k * k),
        alg,
        alg_reduced,
    })
}

/// `M(k, r, beta)` in closed form.
pub fn mosh(args: MoshArgs) -> Result<Complex> {
    let MoshArgs { k, r, beta } = args;
    if k.im.abs() <= 1e-14 * k.norm().max(1.0) {
        return Err(Error::Contour(k));
    }
    Ok(mosh_parts(k, r, beta)?.value())
}

/// Sector rule for the large-time series: `nu = -1` for
/// `ph(k) in [-pi/4, 3pi/4)`, `+1` otherwise.
pub fn sector_nu(k: Complex) -> f64 {
    let ph = k.arg();
    if (-PI / 4.0..3.0 * PI / 4.0).contains(&ph) {
        -1.0
    } else {
        1.0
    }
}

/// Two-term large-`t` form
/// `e^{ikr - beta k^2}(sgn(Im k) + nu) - e^{-r^2/(4beta)}/(sqrt(pi) w) (1 - 1/(2 w^2))`.
pub fn mosh_asymptotic(args: MoshArgs, nu: f64) -> Result<Complex> {
    let MoshArgs { k, r, beta } = args;
    if nu != 1.0 && nu != -1.0 {
        return Err(Error::Domain(format!("nu must be +-1, got {nu}")));
    }
    if beta.re < 0.0 || beta == Complex::new(0.0, 0.0) {
        return Err(Error::Domain(format!("Moshinsky kernel needs Re beta >= 0, beta != 0, got {beta}")));
    }
    let w = (r + 2.0 * I * k * beta) / (2.0 * beta.sqrt());
    let coef = sgn_im(k) + nu;
    let first = if coef == 0.0 {
        Complex::new(0.0, 0.0)
    } else {
        coef * (I * k * r - beta * k * k).exp()
    };
    let gauss = (-r * r / (4.0 * beta)).exp();
    Ok(first - gauss / (PI.sqrt() * w) * (1.0 - 0.5 / (w * w)))
}

/// The defining integral by adaptive quadrature, truncated where
/// `|e^{-beta p^2}| < 1e-20`.
pub fn mosh_quadrature(args: MoshArgs, tol: f64) -> Result<Quad> {
    let MoshArgs { k, r, beta } = args;
    if k.im == 0.0 {
        return Err(Error::Contour(k));
    }
    if beta.re <= 0.0 {
        return Err(Error::Domain("quadrature oracle needs Re beta > 0".into()));
    }
    let p_max = (20.0 * 10f64.ln() / beta.re).sqrt();
    let mut breaks = vec![-p_max, p_max];
    // one panel per oscillation of the Gaussian phase and of e^{irp}
    let w_osc = beta.im.abs();
    if w_osc > 0.0 {
        let m_max = (w_osc * p_max * p_max / (2.0 * PI)).floor() as usize;
        for m in 1..=m_max {
            let p = (2.0 * PI * m as f64 / w_osc).sqrt();
            breaks.push(p);
            breaks.push(-p);
        }
    }
    if r > 0.0 {
        let n = (r * p_max / PI).floor() as usize;
        for m in 1..=n.min(20_000) {
            let p = PI * m as f64 / r;
            breaks.push(p);
            breaks.push(-p);
        }
    }
    for d in [-1.0, -0.25, 0.0, 0.25, 1.0] {
        let p = k.re + d * k.im.abs();
        if p.abs() < p_max {
            breaks.push(p);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let f = |p: f64| (-beta * p * p + I * r * p).exp() / ((p - k) * I * PI);
    integrate_breaks(f, &breaks, tol * 1e-3, tol, 400_000)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn example_value() {
        // e^{1} [1 + erf(-1)] = e erfc(1)
        let m = mosh(MoshArgs::new(c(0.0, 1.0), 0.0, c(1.0, 0.0))).unwrap();
        assert!((m - c(0.42758357615580700, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(mosh(MoshArgs::new(c(2.0, 0.0), 0.0, c(1.0, 0.0))), Err(Error::Contour(_))));
        assert!(matches!(mosh(MoshArgs::new(c(2.0, 1.0), 0.0, c(0.0, 0.0))), Err(Error::Domain(_))));
    }

    #[test]
    fn reduced_tail_matches_direct_difference() {
        for &(k, r, b) in &[(c(1.0, -0.3), 0.5, c(1.0, 5.0)), (c(-2.0, -1.0), 2.0, c(0.5, 40.0)), (c(3.0, 0.0), 0.0, c(0.0, 9.0))] {
            let p = mosh_parts(k, r, b).unwrap();
            let direct = p.alg - tail_coefficient(r, b) / k;
            assert!((p.alg_reduced - direct).norm() < 1e-12 * direct.norm().max(1e-3), "{k} {r} {b}");
        }
    }

    #[test]
    fn huge_exponent_is_fused() {
        let k = c(900.0, -500.0);
        let m = mosh(MoshArgs::new(k, 0.5, c(0.0, 1e6))).unwrap();
        assert!(m.re.is_finite() && m.im.is_finite());
    }
    #[test]
    fn closed_form_matches_quadrature() {
        let ks = [c(1.0, 1.0), c(-2.0, 0.5), c(-0.7, -1.5), c(3.0, -0.4), c(0.3, 4.0)];
        let rs = [0.0, 0.5, 2.0];
        let betas = [c(1.0, 0.0), c(1.0, 10.0), c(0.1, 100.0)];
        for &k in &ks {
            for &r in &rs {
                for &b in &betas {
                    let a = MoshArgs::new(k, r, b);
                    let m = mosh(a).unwrap();
                    let q = mosh_quadrature(a, 1e-12).unwrap();
                    assert!((m - q.value).norm() <= 1e-10 * m.norm(), "{k} {r} {b}: {m} vs {}", q.value);
                }
            }
        }
    }

    #[test]
    fn spec_rows() {
        let a = MoshArgs::new(c(0.0, 10.0), 1.0, c(0.5, 0.0));
        let m = mosh(a).unwrap();
        assert!((m - mosh_quadrature(a, 1e-12).unwrap().value).norm() < 1e-10 * m.norm());
        let q = mosh_quadrature(MoshArgs::new(c(0.0, 1.0), 0.0, c(2.0, 0.0)), 1e-13).unwrap();
        assert!(q.value.im.abs() < 1e-12);
    }

    #[test]
    fn asymptotic_error_shrinks_with_time() {
        let k = c(3.7, -0.25);
        let mut last = f64::INFINITY;
        for t in [1e2, 1e3, 1e4] {
            let a = MoshArgs::new(k, 0.5, c(1.25, t));
            let m = mosh(a).unwrap();
            let e = (m - mosh_asymptotic(a, sector_nu(k)).unwrap()).norm() / m.norm();
            assert!(e < last);
            last = e;
            if t == 1e3 {
                assert!(e < 1e-3);
            }
        }
    }

    // conj M(k, r, beta) = M(-conj k, r, conj beta), from p -> -p in the integral
    proptest::proptest! {
        #[test]
        fn reflection_symmetry(kr in -5.0..5.0f64, ki in 0.05..5.0f64, sign in proptest::bool::ANY,
                                r in 0.0..3.0f64, g in 0.0..2.0f64, t in -50.0..50.0f64) {
            let k = c(kr, if sign { ki } else { -ki });
            let b = c(g, t);
            if b.norm() > 1e-3 {
                let m = mosh(MoshArgs::new(k, r, b)).unwrap();
                let mc = mosh(MoshArgs::new(-k.conj(), r, b.conj())).unwrap();
                proptest::prop_assert!((mc - m.conj()).norm() <= 1e-12 * m.norm().max(1.0));
            }
        }
    }
}
