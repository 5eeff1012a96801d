//! Late-time quantities: `psi(r,t) -> psi_inf(r) t^{-3/2}`, the onset time of
//! algebraic decay and `S(t) -> coefficient / t^3`.

use crate::error::{Error, Result};
use crate::jost::{regular_solution, PotentialModel};
use crate::scalar::{Complex, I};
use crate::specfun::lambert_w_m1;
use crate::spectral::{coefficient_c_prime, coefficient_c_unchecked, InitialState};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// `psi_inf(r)` with the inputs it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiInf {
    pub value: Complex,
    pub c0: Complex,
    /// `C(0)` vanished to working precision; `value` is zero and the decay is
    /// faster than `t^{-3/2}`.
    pub c0_vanishes: bool,
}

fn c0_of(model: &dyn PotentialModel, state: &dyn InitialState) -> (Complex, f64) {
    let c = coefficient_c_unchecked(model, state, Complex::new(0.0, 0.0));
    let noise = (c.rel_error + 1e3 * f64::EPSILON * 10f64.powf(c.digits_lost)) * 10.0;
    (c.value.value(), noise)
}

fn f00(model: &dyn PotentialModel) -> Result<Complex> {
    let f = model.f0(Complex::new(0.0, 0.0))?;
    if f.norm() <= 1e-12 {
        return Err(Error::ZeroEnergyResonance);
    }
    Ok(f)
}

/// `psi_inf(r) = -C(0)/(2 sqrt(i pi)) d/dk[f(k,r)/f(k,0)]_{k=0}`.
///
/// The derivative equals `i u(0,r)/f(0,0)^2`; `u(0, r)` comes from the
/// regular-solution march, which avoids the cancellation between
/// `ir f(0,r)/f(0,0)` and the derivative of the reduced ratio.
pub fn psi_inf(model: &dyn PotentialModel, state: &dyn InitialState, r: f64) -> Result<PsiInf> {
    let f0 = f00(model)?;
    let (c0, noise) = c0_of(model, state);
    let scale = crate::spectral::coefficient_c_unchecked(model, state, Complex::new(0.0, 0.0)).r_cut;
    if c0.norm() <= noise.max(1e-13) * scale.max(1.0) {
        return Ok(PsiInf { value: Complex::new(0.0, 0.0), c0, c0_vanishes: true });
    }
    let (u0, _) = regular_solution(model, Complex::new(0.0, 0.0), r)?;
    let d = I * u0 / (f0 * f0);
    Ok(PsiInf { value: -c0 / (2.0 * (I * PI).sqrt()) * d, c0, c0_vanishes: false })
}

/// `psi_inf(r)` with the `k`-derivative taken by an `n`-point central
/// difference on the circle `|k| = radius` (for `n = 2` and a real stencil this
/// is the ordinary central difference).
pub fn psi_inf_fd(model: &dyn PotentialModel, state: &dyn InitialState, r: f64, radius: f64, n: usize) -> Result<Complex> {
    f00(model)?;
    let (c0, _) = c0_of(model, state);
    let mut d = Complex::new(0.0, 0.0);
    for j in 0..n {
        let w = Complex::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / n as f64);
        d += model.f_ratio(radius * w, r)? / w;
    }
    d /= n as f64 * radius;
    Ok(-c0 / (2.0 * (I * PI).sqrt()) * d)
}

/// Amplitude of the slowest resonance term, `|psi| ~ A e^{-lambda t}`:
/// `A = 2 |k0 C(k0) f(k0, r) / d/dk f(k, 0)|_{k0}` (the factor 2 is
/// `|sgn(Im k0) + nu|` of the kernel).
pub fn exp_amplitude(model: &dyn PotentialModel, state: &dyn InitialState, k0: Complex, r: f64) -> Result<f64> {
    let c = coefficient_c_unchecked(model, state, k0).value.value();
    let fr = model.f(k0, r)?;
    let d = model.dk_f0(k0)?;
    Ok(2.0 * (k0 * c * fr / d).norm())
}

/// Crossover of `a_exp e^{-lambda t}` and `psi_inf t^{-3/2}`:
/// `t = -(3/(2 lambda)) W_{-1}(-(2 lambda/3) (psi_inf/a_exp)^{2/3})`.
pub fn t_alg_from(lambda: f64, a_exp: f64, psi_inf: f64) -> Result<f64> {
    if !(lambda > 0.0 && a_exp > 0.0 && psi_inf > 0.0) {
        return Err(Error::Domain(format!(
            "crossover needs positive rate and amplitudes, got {lambda}, {a_exp}, {psi_inf}"
        )));
    }
    let x = -(2.0 * lambda / 3.0) * (psi_inf / a_exp).powf(2.0 / 3.0);
    if x < -(-1f64).exp() {
        return Err(Error::NoCrossover(x));
    }
    Ok(-1.5 / lambda * lambert_w_m1(x)?)
}

/// `t_alg` at radius `r` for the resonance `k0`.
pub fn t_alg(model: &dyn PotentialModel, state: &dyn InitialState, r: f64, k0: Complex) -> Result<f64> {
    let p = psi_inf(model, state, r)?;
    if p.c0_vanishes {
        return Err(Error::VanishingC0);
    }
    let lambda = (k0 * k0).im.abs();
    t_alg_from(lambda, exp_amplitude(model, state, k0, r)?, p.value.norm())
}

/// `|C(0) C'(0)|^2 / (4 pi f(0,0)^4)`.
pub fn survival_coefficient(model: &dyn PotentialModel, state: &dyn InitialState) -> Result<f64> {
    let f0 = f00(model)?;
    let (c0, _) = c0_of(model, state);
    let cp = if state.is_real() {
        c0
    } else {
        coefficient_c_prime(model, state, Complex::new(0.0, 0.0), &Default::default())?.value.value()
    };
    Ok((c0 * cp).norm_sqr() / (4.0 * PI * f0.norm_sqr().powi(2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticsReport {
    pub r: f64,
    pub k0: Complex,
    /// `|Im k0^2|`.
    pub lambda: f64,
    pub psi_inf: Complex,
    pub a_exp: f64,
    /// `None` when `C(0) = 0` or the curves do not cross.
    pub t_alg: Option<f64>,
    pub s_coefficient: f64,
    pub c0_vanishes: bool,
}

impl AsymptoticsReport {
    pub fn new(model: &dyn PotentialModel, state: &dyn InitialState, r: f64, k0: Complex) -> Result<Self> {
        let p = psi_inf(model, state, r)?;
        let lambda = (k0 * k0).im.abs();
        let a_exp = exp_amplitude(model, state, k0, r)?;
        let t_alg = if p.c0_vanishes { None } else { t_alg_from(lambda, a_exp, p.value.norm()).ok() };
        Ok(AsymptoticsReport {
            r,
            k0,
            lambda,
            psi_inf: p.value,
            a_exp,
            t_alg,
            s_coefficient: survival_coefficient(model, state)?,
            c0_vanishes: p.c0_vanishes,
        })
    }

    fn fields(&self, digits: usize) -> Vec<(&'static str, String)> {
        let e = |x: f64| format!("{:.*e}", digits.saturating_sub(1), x);
        vec![
            ("r", e(self.r)),
            ("re_k0", e(self.k0.re)),
            ("im_k0", e(self.k0.im)),
            ("lambda", e(self.lambda)),
            ("re_psi_inf", e(self.psi_inf.re)),
            ("im_psi_inf", e(self.psi_inf.im)),
            ("abs_psi_inf", e(self.psi_inf.norm())),
            ("a_exp", e(self.a_exp)),
            ("t_alg", self.t_alg.map_or("nan".into(), e)),
            ("s_coefficient", e(self.s_coefficient)),
            ("c0_vanishes", self.c0_vanishes.to_string()),
        ]
    }

    /// `key = value` lines.
    pub fn to_key_value(&self, digits: usize) -> String {
        let mut s = String::new();
        for (k, v) in self.fields(digits) {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Header and one data row.
    pub fn to_csv(&self, digits: usize) -> String {
        let f = self.fields(digits);
        let head: Vec<&str> = f.iter().map(|p| p.0).collect();
        let row: Vec<String> = f.into_iter().map(|p| p.1).collect();
        format!("{}\n{}\n", head.join(","), row.join(","))
    }
}

/// Least-squares line `y = a + b x`; returns `(a, b)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Crossover of the exponential and algebraic asymptotes fitted to `|psi(t)|`:
/// `ln|psi| = ln A - lambda t` on `exp_window`, `|psi| t^{3/2} = P` on
/// `alg_window`.
pub fn empirical_crossover(t: &[f64], abs_psi: &[f64], exp_window: (f64, f64), alg_window: (f64, f64)) -> Result<f64> {
    let pick = |w: (f64, f64)| -> (Vec<f64>, Vec<f64>) {
        t.iter().zip(abs_psi).filter(|(t, _)| **t >= w.0 && **t <= w.1).map(|(t, p)| (*t, *p)).unzip()
    };
    let (te, pe) = pick(exp_window);
    let (ta, pa) = pick(alg_window);
    if te.len() < 2 || ta.is_empty() {
        return Err(Error::Domain("fit windows hold too few samples".into()));
    }
    let (ln_a, slope) = fit_line(&te, &pe.iter().map(|p| p.ln()).collect::<Vec<_>>());
    let p = ta.iter().zip(&pa).map(|(t, v)| v * t.powf(1.5)).sum::<f64>() / ta.len() as f64;
    t_alg_from(-slope, ln_a.exp(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jost::{EckartModel, FreeModel};
    use crate::spectral::{DifferenceState, GaussianState};

    #[test]
    fn free_closed_form() {
        let s = GaussianState::new(1.0).unwrap();
        for r in [0.5, 2.0] {
            let p = psi_inf(&FreeModel, &s, r).unwrap();
            let x = -p.c0 * I * r / (2.0 * (I * PI).sqrt());
            assert!((p.value - x).norm() < 1e-13 * x.norm());
            // long-time limit of the exact free evolution
            let t = 1e8;
            let late = crate::spectral::free_gaussian_evolution(&s, r, t) * t.powf(1.5);
            assert!((late - x).norm() < 1e-7 * x.norm(), "{late} vs {x}");
            let fd = psi_inf_fd(&FreeModel, &s, r, 0.25, 32).unwrap();
            assert!((fd - p.value).norm() < 1e-6 * x.norm());
        }
        let c = survival_coefficient(&FreeModel, &s).unwrap();
        assert!((c - p4(0.66566768190019486) / (4.0 * PI)).abs() < 1e-13 * c);
    }

    fn p4(x: f64) -> f64 {
        x.powi(4)
    }

    #[test]
    fn eckart_regression() {
        // 30-digit evaluation of the same formula
        let m = EckartModel::standard();
        let s = GaussianState::new(1.0).unwrap();
        let p = psi_inf(&m, &s, 0.5).unwrap();
        assert!((p.value.norm() - 8.0260729469484164e-12).abs() < 1e-9 * 8.03e-12, "{}", p.value.norm());
        // the ratio carries ~1e-17 absolute rounding against a derivative of ~1e-11
        let fd = psi_inf_fd(&m, &s, 0.5, 2.0, 64).unwrap();
        assert!((fd - p.value).norm() < 1e-5 * p.value.norm(), "{fd} vs {}", p.value);
        let c = survival_coefficient(&m, &s).unwrap();
        assert!((c - 8.9661593509626590e-22).abs() < 1e-10 * c, "{c}");
        let k0 = Complex::new(3.7104837988467567, -0.24947237925300856);
        let t = t_alg(&m, &s, 0.5, k0).unwrap();
        assert!((t - 15.859092540820716).abs() < 1e-8, "{t}");
    }

    #[test]
    fn crossover_monotonicity() {
        let base = t_alg_from(1.85, 0.7, 8e-12).unwrap();
        // a larger algebraic tail crosses earlier
        assert!(t_alg_from(1.85, 0.7, 8e-11).unwrap() < base);
        assert!(t_alg_from(3.7, 0.7, 8e-12).unwrap() < base);
        assert!(matches!(t_alg_from(1.85, 1e-3, 0.5), Err(Error::NoCrossover(_))));
    }

    #[test]
    fn vanishing_c0_is_flagged() {
        let m = EckartModel::standard();
        let s = DifferenceState::zero_c0(&m, 1.0, 1.5).unwrap();
        let p = psi_inf(&m, &s, 0.5).unwrap();
        assert!(p.c0_vanishes);
        assert_eq!(t_alg(&m, &s, 0.5, Complex::new(3.7, -0.25)), Err(Error::VanishingC0));
        assert!(survival_coefficient(&m, &s).unwrap() < 1e-30);
    }
}
