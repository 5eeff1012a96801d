use super::PotentialModel;
use crate::error::{Error, Result};
use crate::ode::{magnus6, Gen};
use crate::scalar::{Complex, Scaled};

/// Step control for the Magnus sweep: `h = min(h_max, kh / |k|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularPath {
    pub h_max: f64,
    pub kh: f64,
}

impl Default for RegularPath {
    fn default() -> Self {
        RegularPath { h_max: 0.01, kh: 0.5 }
    }
}

impl RegularPath {
    fn steps(&self, k: Complex, r: f64) -> usize {
        let h = self.h_max.min(self.kh / k.norm().max(1e-300));
        ((r / h).ceil() as usize).max(1)
    }
}

struct Sweep {
    state: [Complex; 3],
    log: f64,
    max_ln_i: f64,
}

/// March `(u, u', int u g)` from 0 through the increasing `stops`, calling
/// `at_stop(i, state, log_scale)` at each. Steps are uniform between stops.
fn march(
    model: &dyn PotentialModel,
    src: Option<&dyn Fn(f64) -> Complex>,
    k: Complex,
    stops: &[f64],
    h_target: f64,
    mut at_stop: impl FnMut(usize, &[Complex; 3], f64),
) -> Sweep {
    let k2 = k * k;
    let gen = |r: f64| {
        let g = src.map_or(Complex::new(0.0, 0.0), |s| s(r));
        Gen::radial(model.v(r) - k2, g)
    };
    let z = Complex::new(0.0, 0.0);
    let mut s = [z, Complex::new(1.0, 0.0), z];
    let mut log = 0.0;
    let mut max_ln_i = f64::NEG_INFINITY;
    let mut r0 = 0.0;
    for (idx, &r1) in stops.iter().enumerate() {
        let span = r1 - r0;
        if span > 0.0 {
            let n = ((span / h_target).ceil() as usize).max(1);
            let h = span / n as f64;
            for j in 0..n {
                s = magnus6(&gen, r0 + j as f64 * h, h, s);
                let size = s[0].norm() + s[1].norm() + s[2].norm();
                if !(1e-100..=1e100).contains(&size) && size > 0.0 {
                    let e = size.ln();
                    for x in s.iter_mut() {
                        *x *= (-e).exp();
                    }
                    log += e;
                }
                if s[2] != z {
                    max_ln_i = max_ln_i.max(s[2].norm().ln() + log);
                }
            }
            r0 = r1;
        }
        at_stop(idx, &s, log);
    }
    Sweep { state: s, log, max_ln_i }
}

fn sweep(
    model: &dyn PotentialModel,
    src: Option<&dyn Fn(f64) -> Complex>,
    k: Complex,
    r_end: f64,
    n: usize,
) -> Sweep {
    march(model, src, k, &[r_end], r_end / n as f64 * (1.0 + 1e-12), |_, _, _| {})
}

/// `C = int_0^R u g` together with `u(k, r_j)` on increasing `r_j <= R`, in one
/// sweep. No error estimate; `u` values are plain complex numbers.
pub fn project_with_values(
    model: &dyn PotentialModel,
    g: &dyn Fn(f64) -> Complex,
    k: Complex,
    r_cut: f64,
    r_values: &[f64],
    path: RegularPath,
) -> (Scaled, Vec<Complex>) {
    let mut stops: Vec<f64> = r_values.iter().cloned().filter(|&r| r < r_cut).collect();
    let n_inner = stops.len();
    stops.push(r_cut);
    let h = path.h_max.min(path.kh / k.norm().max(1e-300));
    let mut u = vec![Complex::new(0.0, 0.0); r_values.len()];
    let sw = march(model, Some(g), k, &stops, h, |i, s, log| {
        if i < n_inner {
            u[i] = s[0] * log.exp();
        }
    });
    for (j, &r) in r_values.iter().enumerate().skip(n_inner) {
        // beyond the projection range: continue without the source
        u[j] = regular_solution(model, k, r).map(|p| p.0).unwrap_or(Complex::new(f64::NAN, f64::NAN));
    }
    (Scaled { mant: sw.state[2], log: sw.log }, u)
}

/// `u(k, r)` and `u'(k, r)` with `u(k,0) = 0`, `u'(k,0) = 1`, by sixth-order
/// Magnus steps from the origin. Free of the cancellation in [`super::u_from_f`].
pub fn regular_solution(model: &dyn PotentialModel, k: Complex, r: f64) -> Result<(Complex, Complex)> {
    if r < 0.0 {
        return Err(Error::Domain(format!("negative radius {r}")));
    }
    if r == 0.0 {
        return Ok((Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)));
    }
    let n = RegularPath::default().steps(k, r);
    let s = sweep(model, None, k, r, n);
    let f = s.log.exp();
    Ok((s.state[0] * f, s.state[1] * f))
}

/// `int_0^R u(k, r) g(r) dr` for a source `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub value: Scaled,
    /// Estimated relative error (step doubling plus rounding floor).
    pub rel_error: f64,
    /// `log10(max_r |int_0^r u g| / |int_0^R u g|)`: digits lost to cancellation.
    pub digits_lost: f64,
}

/// Integrate `u g` alongside `u` out to `r_cut`.
pub fn project(
    model: &dyn PotentialModel,
    g: &dyn Fn(f64) -> Complex,
    k: Complex,
    r_cut: f64,
    path: RegularPath,
) -> Projection {
    let n = path.steps(k, r_cut).max(8);
    let n = n + n % 2;
    let fine = sweep(model, Some(g), k, r_cut, n);
    let coarse = sweep(model, Some(g), k, r_cut, n / 2);
    let value = Scaled { mant: fine.state[2], log: fine.log };
    let ln_v = value.ln_abs();
    if !ln_v.is_finite() {
        return Projection { value: Scaled::zero(), rel_error: 0.0, digits_lost: 0.0 };
    }
    let c = Scaled { mant: coarse.state[2], log: coarse.log };
    let diff = (c.mant * (c.log - fine.log).exp() - fine.state[2]).norm() / fine.state[2].norm();
    let digits_lost = ((fine.max_ln_i - ln_v) / std::f64::consts::LN_10).max(0.0);
    let floor = 1e2 * f64::EPSILON * 10f64.powf(digits_lost) * (n as f64).sqrt();
    Projection { value, rel_error: diff / 63.0 + floor, digits_lost }
}
