//! Jost solutions and the regular solution of `-u'' + V u = k^2 u` on the half line.
//!
//! Models expose the reduced Jost function `phi(k, r) = e^{-ikr} f(k, r)`,
//! which tends to 1 as `r -> oo` and stays representable where `e^{ikr}` does
//! not. Resonances are zeros of `f(k, 0)` in the lower half plane.

mod eckart;
mod numerical;
mod regular;

pub use eckart::EckartModel;
pub use numerical::{numerical_jost, numerical_jost_pairs, tail_radius, TabulatedModel};
pub use regular::{project, project_with_values, regular_solution, Projection, RegularPath};

use crate::error::{Error, Result};
use crate::scalar::{Complex, I};

/// Threshold on `|k|` below which [`u_from_f`] uses the `k -> 0` limit.
pub const KAPPA0: f64 = 1e-4;

/// Reduced Jost function and its `k`-derivative at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JostValue {
    /// `e^{-ikr} f(k, r)`.
    pub phi: Complex,
    /// `d/dk [e^{-ikr} f(k, r)]`.
    pub dphi: Complex,
}

pub trait PotentialModel: Send + Sync {
    fn v(&self, r: f64) -> f64;

    /// `phi(k, r)` and its `k`-derivative.
    fn reduced(&self, k: Complex, r: f64) -> Result<JostValue>;

    /// `int_0^oo r |V(r)| dr`.
    fn range_moment(&self) -> f64;

    /// `max V` on the half line, used for growth bounds.
    fn v_max(&self) -> f64;

    /// Radius beyond which `|V(r)| r < eps`.
    fn support(&self, eps: f64) -> f64 {
        tail_radius(&|r| self.v(r), eps, 0.0).unwrap_or(200.0)
    }

    fn name(&self) -> String;

    fn f(&self, k: Complex, r: f64) -> Result<Complex> {
        Ok((I * k * r).exp() * self.reduced(k, r)?.phi)
    }

    fn f0(&self, k: Complex) -> Result<Complex> {
        Ok(self.reduced(k, 0.0)?.phi)
    }

    fn dk_f(&self, k: Complex, r: f64) -> Result<Complex> {
        let j = self.reduced(k, r)?;
        Ok((I * k * r).exp() * (I * r * j.phi + j.dphi))
    }

    fn dk_f0(&self, k: Complex) -> Result<Complex> {
        Ok(self.reduced(k, 0.0)?.dphi)
    }

    /// `f(k, r) / f(k, 0)`, finite across poles of `f` in `k`.
    fn f_ratio(&self, k: Complex, r: f64) -> Result<Complex> {
        let p0 = self.reduced(k, 0.0)?.phi;
        if p0 == Complex::new(0.0, 0.0) || !p0.is_finite() {
            return Err(Error::NearResonance(k));
        }
        Ok((I * k * r).exp() * self.reduced(k, r)?.phi / p0)
    }

    /// Upper bound on `sup_{r >= 0} |phi(k, r)|`.
    fn phi_bound(&self, k: Complex) -> f64 {
        let top = self.support(1e-12);
        let mut m: f64 = 1.0;
        for j in 0..=16 {
            if let Ok(v) = self.reduced(k, top * j as f64 / 16.0) {
                m = m.max(v.phi.norm());
            }
        }
        10.0 * m
    }

    /// Poles of `f(k, 0)` with `|k| <= kmax` (lower half plane).
    fn jost_poles(&self, _kmax: f64) -> Vec<Complex> {
        Vec::new()
    }

    /// Starting points for the resonance search with `|k| <= kmax`.
    fn resonance_seeds(&self, _kmax: f64) -> Vec<Complex> {
        Vec::new()
    }
}

/// `V = 0`, `f(k, r) = e^{ikr}`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FreeModel;

impl PotentialModel for FreeModel {
    fn v(&self, _r: f64) -> f64 {
        0.0
    }

    fn reduced(&self, _k: Complex, _r: f64) -> Result<JostValue> {
        Ok(JostValue { phi: Complex::new(1.0, 0.0), dphi: Complex::new(0.0, 0.0) })
    }

    fn range_moment(&self) -> f64 {
        0.0
    }

    fn v_max(&self) -> f64 {
        0.0
    }

    fn support(&self, _eps: f64) -> f64 {
        0.0
    }

    fn phi_bound(&self, _k: Complex) -> f64 {
        1.0
    }

    fn name(&self) -> String {
        "free".into()
    }
}

/// `u(k, r) = (f(-k,0) f(k,r) - f(k,0) f(-k,r)) / (2ik)`.
///
/// Below [`KAPPA0`] the `k -> 0` limit `(f'(0,0) f(0,r) - f(0,0) f'(0,r))/i`
/// is used (primes are `k`-derivatives). The subtraction loses digits where
/// `|f(k,0) f(-k,r)|` greatly exceeds `|u|`; [`regular_solution`] does not.
pub fn u_from_f(model: &dyn PotentialModel, k: Complex, r: f64) -> Result<Complex> {
    if r == 0.0 {
        return Ok(Complex::new(0.0, 0.0));
    }
    if k.norm() < KAPPA0 {
        let z = Complex::new(0.0, 0.0);
        let (f00, df00) = (model.f0(z)?, model.dk_f0(z)?);
        let (f0r, df0r) = (model.f(z, r)?, model.dk_f(z, r)?);
        return Ok((f00 * df0r - df00 * f0r) / I);
    }
    let num = model.f0(-k)? * model.f(k, r)? - model.f0(k)? * model.f(-k, r)?;
    Ok(num / (2.0 * I * k))
}
