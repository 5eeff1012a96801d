use super::{JostValue, PotentialModel};
use crate::error::{Error, Result};
use crate::quad::integrate_real;
use crate::scalar::{Complex, Context, I};
use crate::specfun::{hyp2f1, hyp2f1_series, pole_index};
use std::f64::consts::PI;

/// Eckart barrier `V(r) = A e^{r-rho} / (1 + e^{r-rho})^2` with
/// `f(k, r) = e^{ikr} 2F1(1/2 - i delta, 1/2 + i delta; 1 - 2ik; 1/(1 + e^{r-rho}))`,
/// `delta = sqrt(A - 1/4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EckartModel {
    pub a: f64,
    pub rho: f64,
    pub delta: Complex,
    pub ctx: Context,
    moment: f64,
}

impl EckartModel {
    pub fn new(a: f64, rho: f64, ctx: Context) -> Result<Self> {
        if !a.is_finite() || !rho.is_finite() || a < 0.0 {
            return Err(Error::Domain(format!("Eckart needs finite A >= 0 and rho, got A = {a}, rho = {rho}")));
        }
        let delta = Complex::new(a - 0.25, 0.0).sqrt();
        let mut m = EckartModel { a, rho, delta, ctx, moment: 0.0 };
        let end = m.rho.max(0.0) + 80.0;
        m.moment = integrate_real(|r| r * m.v(r), 0.0, end, 1e-14, 1e-12)?;
        Ok(m)
    }

    /// Barrier of the worked example: `A = 49.25`, `rho = 1`.
    pub fn standard() -> Self {
        EckartModel::new(49.25, 1.0, Context::default()).expect("valid parameters")
    }

    /// `1/(1 + e^{r - rho})`.
    pub fn z(&self, r: f64) -> f64 {
        let x = r - self.rho;
        if x > 0.0 {
            let e = (-x).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + x.exp())
        }
    }

    fn ab(&self) -> (Complex, Complex) {
        (0.5 - I * self.delta, 0.5 + I * self.delta)
    }
}

impl PotentialModel for EckartModel {
    fn v(&self, r: f64) -> f64 {
        let x = -(r - self.rho).abs();
        let e = x.exp();
        self.a * e / ((1.0 + e) * (1.0 + e))
    }

    fn reduced(&self, k: Complex, r: f64) -> Result<JostValue> {
        let (a, b) = self.ab();
        let s = hyp2f1_series(a, b, 1.0 - 2.0 * I * k, self.z(r), &self.ctx)?;
        Ok(JostValue { phi: s.value, dphi: -2.0 * I * s.dc })
    }

    fn range_moment(&self) -> f64 {
        self.moment
    }

    fn v_max(&self) -> f64 {
        self.v(self.rho.max(0.0))
    }

    fn support(&self, eps: f64) -> f64 {
        // A r e^{-(r - rho)} < eps
        let mut r = self.rho.max(1.0);
        while self.a * r * (-(r - self.rho)).exp() >= eps && r < 200.0 {
            r += 0.25;
        }
        r
    }

    /// `|2F1(.; z)| <= sum |T_n(z_0)|` for `0 < z <= z_0`, all powers being positive.
    fn phi_bound(&self, k: Complex) -> f64 {
        let (a, b) = self.ab();
        hyp2f1_series(a, b, 1.0 - 2.0 * I * k, self.z(0.0), &self.ctx)
            .map(|s| s.abs_sum)
            .unwrap_or(f64::INFINITY)
    }

    fn name(&self) -> String {
        format!("eckart(A={}, rho={})", self.a, self.rho)
    }

    /// At `1 - 2ik = -m` numerator and denominator share the pole and the ratio
    /// tends to `e^{ikr} (z_r/z_0)^{m+1} 2F1(a+m+1, b+m+1; m+2; z_r) / 2F1(..; z_0)`.
    fn f_ratio(&self, k: Complex, r: f64) -> Result<Complex> {
        let c = 1.0 - 2.0 * I * k;
        let (a, b) = self.ab();
        let plane = (I * k * r).exp();
        if let Some(m) = pole_index(c, &self.ctx) {
            let s = (m + 1) as f64;
            let (zr, z0) = (self.z(r), self.z(0.0));
            let den = hyp2f1(a + s, b + s, Complex::new(s + 1.0, 0.0), z0, &self.ctx)?;
            if den == Complex::new(0.0, 0.0) {
                return Err(Error::NearResonance(k));
            }
            let num = hyp2f1(a + s, b + s, Complex::new(s + 1.0, 0.0), zr, &self.ctx)?;
            return Ok(plane * (zr / z0).powf(s) * num / den);
        }
        let p0 = hyp2f1(a, b, c, self.z(0.0), &self.ctx)?;
        if p0 == Complex::new(0.0, 0.0) {
            return Err(Error::NearResonance(k));
        }
        Ok(plane * hyp2f1(a, b, c, self.z(r), &self.ctx)? / p0)
    }

    fn jost_poles(&self, kmax: f64) -> Vec<Complex> {
        (1..)
            .map(|n| Complex::new(0.0, -(n as f64) / 2.0))
            .take_while(|k| k.norm() <= kmax)
            .collect()
    }

    /// `k_n = (n - 1/4 + (i/2pi) ln(e^{pi delta} + e^{-pi delta})) / (i + rho/pi)`.
    fn resonance_seeds(&self, kmax: f64) -> Vec<Complex> {
        let d = self.delta;
        // ln(e^{pi d} + e^{-pi d}) = pi d + ln(1 + e^{-2 pi d})
        let lg = PI * d + (1.0 + (-2.0 * PI * d).exp()).ln();
        let shift = I / (2.0 * PI) * lg;
        let den = I + self.rho / PI;
        (1..)
            .map(|n| (n as f64 - 0.25 + shift) / den)
            .take_while(|k| k.norm() <= 1.05 * kmax)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn delta_and_limits() {
        let m = EckartModel::standard();
        assert_eq!(m.delta, c(7.0, 0.0));
        let k = c(1.3, -0.2);
        let far = m.reduced(k, 60.0).unwrap().phi;
        assert!((far - 1.0).norm() < 1e-20f64.max(1e-15));
        assert!((m.v(1.0) - 49.25 / 4.0).abs() < 1e-14);
    }

    #[test]
    fn conjugation() {
        let m = EckartModel::standard();
        for &(k, r) in &[(c(1.3, -0.2), 0.0), (c(-4.0, 0.7), 1.5), (c(0.2, -2.3), 3.0)] {
            let a = m.f(k, r).unwrap().conj();
            let b = m.f(-k.conj(), r).unwrap();
            assert!((a - b).norm() < 1e-10 * a.norm());
        }
    }

    #[test]
    fn derivative_matches_difference() {
        let m = EckartModel::standard();
        let (k, r, h) = (c(2.0, -0.6), 0.8, 1e-6);
        let fd = (m.f(k + h, r).unwrap() - m.f(k - h, r).unwrap()) / (2.0 * h);
        let d = m.dk_f(k, r).unwrap();
        assert!((d - fd).norm() < 1e-7 * d.norm());
    }

    #[test]
    fn ratio_is_continuous_across_jost_pole() {
        let m = EckartModel::standard();
        let k0 = c(0.0, -0.5);
        assert!(matches!(m.f(k0, 0.3), Err(Error::HypergeometricPole(0))));
        let center = m.f_ratio(k0, 0.3).unwrap();
        // mean value over a circle equals the center for an analytic function
        let n = 32;
        let mean: Complex = (0..n)
            .map(|j| {
                let k = k0 + Complex::from_polar(1e-3, 2.0 * PI * j as f64 / n as f64);
                m.f_ratio(k, 0.3).unwrap()
            })
            .sum::<Complex>()
            / n as f64;
        assert!((mean - center).norm() < 1e-6 * center.norm());
        assert_eq!(m.f_ratio(c(1.0, -0.3), 0.0).unwrap(), c(1.0, 0.0));
    }
}
