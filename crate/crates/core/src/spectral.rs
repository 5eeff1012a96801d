//! Initial states, spectral coefficients `C(k) = int_0^oo u(k,r) psi0(r) dr`
//! and the direct spectral integral for `psi(r, t)`.

use crate::error::{Error, Result};
use crate::jost::{project, project_with_values, regular_solution, PotentialModel, RegularPath};
use crate::quad::integrate_vec;
use crate::scalar::{Complex, Context, Scaled, I, MAX_DIGITS};
use std::f64::consts::PI;

pub trait InitialState: Send + Sync {
    fn psi0(&self, r: f64) -> Complex;

    /// Upper bound on `ln |psi0(r)|`.
    fn ln_envelope(&self, r: f64) -> f64;

    /// `(c2, c3)` with `|psi0(r)| = O(e^{-c2 r^c3})`.
    fn tail(&self) -> (f64, f64);

    /// Whether `psi0` is real, so that `C'(k) = C(k)`.
    fn is_real(&self) -> bool;

    fn name(&self) -> String;
}

/// `N r e^{-2 (r/rho)^2}`; with `N = 2^{5/2} rho^{-3/2} pi^{-1/4}` it is normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub rho: f64,
    pub norm: f64,
}

impl GaussianState {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!("Gaussian width must be positive, got {rho}")));
        }
        Ok(GaussianState { rho, norm: 2f64.powf(2.5) * rho.powf(-1.5) * PI.powf(-0.25) })
    }

    fn shape(&self, r: f64) -> f64 {
        r * (-2.0 * (r / self.rho).powi(2)).exp()
    }
}

impl InitialState for GaussianState {
    fn psi0(&self, r: f64) -> Complex {
        Complex::new(self.norm * self.shape(r), 0.0)
    }

    fn ln_envelope(&self, r: f64) -> f64 {
        self.norm.ln() + r.max(1e-300).ln() - 2.0 * (r / self.rho).powi(2)
    }

    fn tail(&self) -> (f64, f64) {
        (2.0 / (self.rho * self.rho), 2.0)
    }

    fn is_real(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        format!("gaussian(rho={})", self.rho)
    }
}

/// `N (g1 - lambda g2)` with `g_i = r e^{-2 (r/rho_i)^2}` and `lambda` chosen
/// so that `C(0) = 0` for a given model. Normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceState {
    pub g1: GaussianState,
    pub g2: GaussianState,
    pub lambda: f64,
    pub norm: f64,
}

impl DifferenceState {
    pub fn zero_c0(model: &dyn PotentialModel, rho1: f64, rho2: f64) -> Result<Self> {
        let (g1, g2) = (GaussianState::new(rho1)?, GaussianState::new(rho2)?);
        if rho1 == rho2 {
            return Err(Error::Domain("the two widths must differ".into()));
        }
        let z = Complex::new(0.0, 0.0);
        let c1 = coefficient_c(model, &g1, z, &Context::default())?.value.value();
        let c2 = coefficient_c(model, &g2, z, &Context::default())?.value.value();
        // psi0 uses the raw shapes, so convert from the normalized ones
        let lambda = (c1.re / g1.norm) / (c2.re / g2.norm);
        let (a, b) = (rho1 * rho1 / 4.0, rho2 * rho2 / 4.0);
        // int r^2 e^{-r^2/s} = sqrt(pi)/4 s^{3/2}; s = 1/(2/a + 2/b) for the cross term
        let m = |s: f64| PI.sqrt() / 4.0 * s.powf(1.5);
        let cross = 1.0 / (2.0 / rho1.powi(2) + 2.0 / rho2.powi(2));
        let n2 = m(a) - 2.0 * lambda * m(cross) + lambda * lambda * m(b);
        Ok(DifferenceState { g1, g2, lambda, norm: n2.sqrt().recip() })
    }
}

impl InitialState for DifferenceState {
    fn psi0(&self, r: f64) -> Complex {
        Complex::new(self.norm * (self.g1.shape(r) - self.lambda * self.g2.shape(r)), 0.0)
    }

    fn ln_envelope(&self, r: f64) -> f64 {
        let w = self.g1.rho.max(self.g2.rho);
        (self.norm * (1.0 + self.lambda.abs())).ln() + r.max(1e-300).ln() - 2.0 * (r / w).powi(2)
    }

    fn tail(&self) -> (f64, f64) {
        let w = self.g1.rho.max(self.g2.rho);
        (2.0 / (w * w), 2.0)
    }

    fn is_real(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        format!("difference(rho1={}, rho2={}, lambda={})", self.g1.rho, self.g2.rho, self.lambda)
    }
}

/// Initial state sampled on an increasing grid from `r = 0`, linearly
/// interpolated, zero beyond the last node.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedState {
    r: Vec<f64>,
    psi: Vec<Complex>,
    ln_max: f64,
}

impl TabulatedState {
    pub fn new(r: Vec<f64>, psi: Vec<Complex>) -> Result<Self> {
        if r.len() < 2 || r.len() != psi.len() || r[0] != 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("tabulated state needs an increasing grid from r = 0".into()));
        }
        if psi[0].norm() > 1e-12 {
            return Err(Error::Domain("tabulated state must vanish at r = 0".into()));
        }
        let ln_max = psi.iter().map(|p| p.norm()).fold(0.0, f64::max).ln();
        Ok(TabulatedState { r, psi, ln_max })
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().expect("non-empty")
    }
}

impl InitialState for TabulatedState {
    fn psi0(&self, x: f64) -> Complex {
        let n = self.r.len();
        if x < 0.0 || x >= self.r[n - 1] {
            return Complex::new(0.0, 0.0);
        }
        let i = self.r.partition_point(|&p| p <= x) - 1;
        let t = (x - self.r[i]) / (self.r[i + 1] - self.r[i]);
        self.psi[i] * (1.0 - t) + self.psi[i + 1] * t
    }

    fn ln_envelope(&self, r: f64) -> f64 {
        if r >= self.r_max() {
            f64::NEG_INFINITY
        } else {
            self.ln_max
        }
    }

    fn tail(&self) -> (f64, f64) {
        (f64::INFINITY, 2.0)
    }

    fn is_real(&self) -> bool {
        self.psi.iter().all(|p| p.im == 0.0)
    }

    fn name(&self) -> String {
        format!("tabulated({} points)", self.r.len())
    }
}

/// Radius beyond which `e^{kappa r} |psi0(r)|` stays below `10^-25` of its
/// peak on `[0, R]`, with `kappa = |Im k|` plus a margin for growth inside
/// the potential.
pub fn cutoff_radius(model: &dyn PotentialModel, state: &dyn InitialState, k: Complex) -> f64 {
    let kappa = k.im.abs();
    let margin = model.v_max().max(0.0).sqrt() * model.support(1e-3).min(20.0);
    let g = |r: f64| state.ln_envelope(r) + kappa * r;
    let drop = 25.0 * std::f64::consts::LN_10 + margin;
    let (mut r, dr) = (0.05, 0.05);
    let mut peak = f64::NEG_INFINITY;
    while r < 1e4 {
        let v = g(r);
        peak = peak.max(v);
        if v < peak - drop && r > 0.5 {
            return r;
        }
        r += dr * (1.0 + r / 10.0);
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCoefficient {
    pub k: Complex,
    pub value: Scaled,
    pub rel_error: f64,
    pub digits_lost: f64,
    pub r_cut: f64,
}

/// `C(k)` by marching the regular solution and `int u psi0` together.
///
/// Fails with [`Error::Representability`] when cancellation in the integral
/// leaves fewer than `ctx.digits()` correct digits.
pub fn coefficient_c(
    model: &dyn PotentialModel,
    state: &dyn InitialState,
    k: Complex,
    ctx: &Context,
) -> Result<SpectralCoefficient> {
    let r_cut = cutoff_radius(model, state, k);
    let p = project(model, &|r| state.psi0(r), k, r_cut, RegularPath::default());
    let available = MAX_DIGITS as f64 + 0.5 - p.digits_lost;
    if available < ctx.digits() as f64 && p.digits_lost > 1.0 {
        return Err(Error::Representability { digits: (p.digits_lost + ctx.digits() as f64).ceil() as u32 });
    }
    Ok(SpectralCoefficient { k, value: p.value, rel_error: p.rel_error, digits_lost: p.digits_lost, r_cut })
}

/// `C(k)` without the precision gate, for callers that track errors themselves.
pub fn coefficient_c_unchecked(model: &dyn PotentialModel, state: &dyn InitialState, k: Complex) -> SpectralCoefficient {
    let r_cut = cutoff_radius(model, state, k);
    let p = project(model, &|r| state.psi0(r), k, r_cut, RegularPath::default());
    SpectralCoefficient { k, value: p.value, rel_error: p.rel_error, digits_lost: p.digits_lost, r_cut }
}

/// `C'(k) = int u psi0*`.
pub fn coefficient_c_prime(
    model: &dyn PotentialModel,
    state: &dyn InitialState,
    k: Complex,
    ctx: &Context,
) -> Result<SpectralCoefficient> {
    if state.is_real() {
        return coefficient_c(model, state, k, ctx);
    }
    let r_cut = cutoff_radius(model, state, k);
    let p = project(model, &|r| state.psi0(r).conj(), k, r_cut, RegularPath::default());
    Ok(SpectralCoefficient { k, value: p.value, rel_error: p.rel_error, digits_lost: p.digits_lost, r_cut })
}

/// Fitted growth and decay of `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    /// Least-squares slope of `ln|C(k)|` against `ln k` on real `k in [5, 50]`.
    pub real_exponent: f64,
    /// Least-squares slope of `ln|C(iy)|` against `y^2` on `y in [5, 10]`.
    pub imaginary_growth: f64,
    /// `max_y (ln|C(iy)| - ln|C(0)| - rho^2 y^2/4)` over `y in [0, 10]` with
    /// `rho = 1/sqrt(c2/2)`, the width of a Gaussian tail.
    pub gaussian_excess: f64,
}

/// Sample `|C|` along the real and imaginary axes.
pub fn decay_check_c(model: &dyn PotentialModel, state: &dyn InitialState) -> DecayReport {
    let c = |k: Complex| coefficient_c_unchecked(model, state, k).value;
    let fit = |xs: &[f64], ys: &[f64]| {
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if sxx == 0.0 {
            0.0
        } else {
            sxy / sxx
        }
    };
    let ks: Vec<f64> = (0..=20).map(|i| 5.0 * 10f64.powf(i as f64 / 20.0)).collect();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &k in &ks {
        let v = c(Complex::new(k, 0.0)).ln_abs();
        if v.is_finite() && v > -700.0 {
            xs.push(k.ln());
            ys.push(v);
        }
    }
    let real_exponent = if xs.len() >= 2 { fit(&xs, &ys) } else { f64::NEG_INFINITY };
    let (c2, _) = state.tail();
    let rho = if c2.is_finite() && c2 > 0.0 { (2.0 / c2).sqrt() } else { 0.0 };
    let c0 = c(Complex::new(0.0, 0.0)).ln_abs();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut excess = f64::NEG_INFINITY;
    for i in 0..=40 {
        let y = 0.25 * i as f64;
        let v = c(Complex::new(0.0, y)).ln_abs();
        if !v.is_finite() {
            continue;
        }
        excess = excess.max(v - c0 - rho * rho * y * y / 4.0);
        if y >= 5.0 {
            xs.push(y * y);
            ys.push(v);
        }
    }
    DecayReport {
        real_exponent,
        imaginary_growth: if xs.len() >= 2 { fit(&xs, &ys) } else { 0.0 },
        gaussian_excess: excess,
    }
}

/// Real `k` beyond which `(2/pi) k^2 |C(k)| / |f(k,0)|^2 / k` stays below `eps`.
pub fn default_k_max(model: &dyn PotentialModel, state: &dyn InitialState, eps: f64) -> f64 {
    let mut quiet = 0;
    let mut k = 2.0;
    while k < 400.0 {
        let kk = Complex::new(k, 0.0);
        let c = coefficient_c_unchecked(model, state, kk).value.value().norm();
        let f0 = model.f0(kk).map(|f| f.norm_sqr()).unwrap_or(1.0);
        let bound = 2.0 / PI * k * c / f0;
        if bound < eps {
            quiet += 1;
            if quiet == 3 {
                return k;
            }
        } else {
            quiet = 0;
        }
        k += 0.5 + k / 20.0;
    }
    k
}

/// Result of the spectral integral on a set of radii.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectPsi {
    pub r: Vec<f64>,
    pub psi: Vec<Complex>,
    pub error: f64,
}

/// `psi(r,t) = (2/pi) int_0^kmax k^2 C(k) e^{-ik^2 t} u(k,r) / |f(k,0)|^2 dk`
/// for all `r` at once. Panels follow the phase `k^2 t + k r`.
pub fn psi_direct_grid(
    model: &dyn PotentialModel,
    state: &dyn InitialState,
    r: &[f64],
    t: f64,
    k_max: f64,
    tol: f64,
) -> Result<DirectPsi> {
    if t < 0.0 {
        return Err(Error::Domain(format!("negative time {t}")));
    }
    let mut order: Vec<usize> = (0..r.len()).collect();
    order.sort_by(|&a, &b| r[a].total_cmp(&r[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| r[i]).collect();
    let r_top = sorted.last().copied().unwrap_or(0.0);
    // panel edges where k^2 t + k r_top advances by pi
    let mut breaks = vec![0.0];
    let mut k = 0.0;
    while k < k_max {
        let rate = 2.0 * k * t + r_top + 1.0;
        k = (k + PI / rate).min(k_max);
        breaks.push(k);
    }
    let r_cut = cutoff_radius(model, state, Complex::new(0.0, 0.0));
    let integrand = |k: f64| {
        let kk = Complex::new(k, 0.0);
        let (c, u) = project_with_values(model, &|x| state.psi0(x), kk, r_cut, &sorted, RegularPath::default());
        let f0 = model.f0(kk).map(|f| f.norm_sqr()).unwrap_or(f64::NAN);
        let w = c.value() * (2.0 / PI * k * k / f0) * (-I * k * k * t).exp();
        u.into_iter().map(|u| w * u).collect::<Vec<_>>()
    };
    let (vals, error) = integrate_vec(integrand, &breaks, sorted.len(), 0.0, tol, 200_000)?;
    let mut psi = vec![Complex::new(0.0, 0.0); r.len()];
    for (j, &i) in order.iter().enumerate() {
        psi[i] = vals[j];
    }
    Ok(DirectPsi { r: r.to_vec(), psi, error })
}

/// Single-point form of [`psi_direct_grid`].
pub fn psi_direct(
    model: &dyn PotentialModel,
    state: &dyn InitialState,
    r: f64,
    t: f64,
    k_max: f64,
    tol: f64,
) -> Result<(Complex, f64)> {
    let d = psi_direct_grid(model, state, &[r], t, k_max, tol)?;
    Ok((d.psi[0], d.error))
}

/// Free evolution of `N r e^{-2(r/rho)^2}` on the half line, by odd extension:
/// `N r (1 + 4iat)^{-3/2} e^{-a r^2/(1 + 4iat)}`, `a = 2/rho^2`.
pub fn free_gaussian_evolution(state: &GaussianState, r: f64, t: f64) -> Complex {
    let a = 2.0 / (state.rho * state.rho);
    let d = 1.0 + 4.0 * I * a * t;
    state.norm * r * d.powf(-1.5) * (-a * r * r / d).exp()
}

/// `u(k, r)` through the regular-solution march; re-exported for convenience.
pub fn u_regular(model: &dyn PotentialModel, k: Complex, r: f64) -> Result<Complex> {
    Ok(regular_solution(model, k, r)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jost::{u_from_f, EckartModel, FreeModel};
    use crate::quad::integrate_real;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn gaussian_is_normalized() {
        let s = GaussianState::new(1.0).unwrap();
        let n = integrate_real(|r| s.psi0(r).norm_sqr(), 0.0, 10.0, 1e-14, 1e-13).unwrap();
        assert!((n - 1.0).abs() < 1e-12);
        assert_eq!(s.psi0(0.0), c(0.0, 0.0));
    }

    #[test]
    fn free_coefficients() {
        let s = GaussianState::new(1.0).unwrap();
        let ctx = Context::default();
        let c1 = coefficient_c(&FreeModel, &s, c(1.0, 0.0), &ctx).unwrap().value.value();
        assert!((c1 - c(0.58744966742758970, 0.0)).norm() < 1e-13, "{c1}");
        let c0 = coefficient_c(&FreeModel, &s, c(0.0, 0.0), &ctx).unwrap().value.value();
        assert!((c0 - c(0.66566768190019486, 0.0)).norm() < 1e-13, "{c0}");
        let a = coefficient_c(&FreeModel, &s, c(2.5, 0.0), &ctx).unwrap().value.value();
        let b = coefficient_c(&FreeModel, &s, c(-2.5, 0.0), &ctx).unwrap().value.value();
        assert!((a - b).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn eckart_coefficient_against_jost_quadrature() {
        // at real k = 2 the Jost combination is well conditioned enough
        let m = EckartModel::standard();
        let s = GaussianState::new(1.0).unwrap();
        let k = c(2.0, 0.0);
        let direct = integrate_real(|r| (u_from_f(&m, k, r).unwrap() * s.psi0(r)).re, 0.0, 7.0, 1e-12, 1e-10).unwrap();
        let cm = coefficient_c(&m, &s, k, &Context::default()).unwrap();
        assert!((cm.value.value().re - direct).abs() < 1e-7 * direct.abs(), "{} vs {direct}", cm.value.value());
    }

    #[test]
    fn eckart_c0_is_regression_constant() {
        let m = EckartModel::standard();
        let s = GaussianState::new(1.0).unwrap();
        let c0 = coefficient_c(&m, &s, c(0.0, 0.0), &Context::default()).unwrap();
        assert!((c0.value.value().re - 2.8165708249276987).abs() < 1e-11, "{}", c0.value.value());
    }

    #[test]
    fn zero_c0_state() {
        let m = EckartModel::standard();
        let d = DifferenceState::zero_c0(&m, 1.0, 0.7).unwrap();
        let n = integrate_real(|r| d.psi0(r).norm_sqr(), 0.0, 10.0, 1e-15, 1e-13).unwrap();
        assert!((n - 1.0).abs() < 1e-10);
        let c0 = coefficient_c_unchecked(&m, &d, c(0.0, 0.0)).value.value();
        assert!(c0.norm() < 1e-12, "{c0}");
    }

    #[test]
    fn zero_state_has_zero_coefficients() {
        let z = TabulatedState::new(vec![0.0, 1.0, 2.0], vec![c(0.0, 0.0); 3]).unwrap();
        let v = coefficient_c_unchecked(&FreeModel, &z, c(1.0, -0.5)).value.value();
        assert_eq!(v, c(0.0, 0.0));
    }

    #[test]
    fn direct_integral_reproduces_free_evolution() {
        let s = GaussianState::new(1.0).unwrap();
        let km = default_k_max(&FreeModel, &s, 1e-14);
        let (p, _) = psi_direct(&FreeModel, &s, 0.5, 1.0, km, 1e-11).unwrap();
        let e = free_gaussian_evolution(&s, 0.5, 1.0);
        assert!((p - e).norm() < 1e-8, "{p} vs {e}");
    }
}
