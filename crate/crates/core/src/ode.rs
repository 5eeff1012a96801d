//! Integrators for linear second-order radial equations.
//!
//! [`Dopri5`] is an adaptive Dormand-Prince 5(4) stepper for small complex
//! systems. [`magnus6`] propagates `y' = A(r) y` with the sixth-order Magnus
//! scheme on three Gauss points; for `u'' = (V - k^2) u` the step size is then
//! limited by the variation of `V` rather than by the oscillation of `u`.

use crate::error::{Error, Result};
use crate::scalar::Complex;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State<const N: usize> = [Complex; N];

fn axpy<const N: usize>(y: &State<N>, terms: &[(f64, &State<N>)], h: f64) -> State<N> {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += k[i] * (c * h);
        }
    }
    out
}

/// Adaptive Dormand-Prince 5(4) integrator.
///
/// The error scale of component `i` is
/// `atol + rtol * max(|y_i|, |y_new_i|, 1e-3 max_j |y_j|)`.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 { rtol: 1e-12, atol: 0.0, max_steps: 1_000_000 }
    }
}

impl Dopri5 {
    /// Integrate from `x0` to `x1` (either direction). Returns the state at `x1`.
    pub fn integrate<const N: usize, F: Fn(f64, &State<N>) -> State<N>>(
        &self,
        f: F,
        x0: f64,
        x1: f64,
        y0: State<N>,
    ) -> Result<State<N>> {
        let dir = if x1 >= x0 { 1.0 } else { -1.0 };
        let span = (x1 - x0).abs();
        if span == 0.0 {
            return Ok(y0);
        }
        let mut x = x0;
        let mut y = y0;
        let mut h = dir * (span / 100.0).min(0.01);
        let mut k1 = f(x, &y);
        for _ in 0..self.max_steps {
            if (x1 - x) * dir <= 0.0 {
                return Ok(y);
            }
            if ((x + h) - x1) * dir > 0.0 {
                h = x1 - x;
            }
            let k2 = f(x + C2 * h, &axpy(&y, &[(A21, &k1)], h));
            let k3 = f(x + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
            let k4 = f(x + C4 * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
            let k5 = f(x + C5 * h, &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
            let k6 = f(
                x + h,
                &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
            );
            let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
            let k7 = f(x + h, &y_new);
            let mut err = 0.0;
            let big = y.iter().map(|v| v.norm()).fold(0.0, f64::max) * 1e-3;
            for i in 0..N {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
                let sc = self.atol + self.rtol * y[i].norm().max(y_new[i].norm()).max(big);
                err += (e.norm() / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Ode { r: x, reason: "non-finite state".into() });
            }
            if err <= 1.0 {
                x += h;
                y = y_new;
                k1 = k7;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
            if h.abs() < 1e-14 * x.abs().max(1.0) {
                return Err(Error::Ode { r: x, reason: "step size underflow".into() });
            }
        }
        Err(Error::Ode { r: x, reason: "too many steps".into() })
    }
}

/// `[[X, 0], [y, 0]]` with `X` 2x2 traceless and `y` a row: the generator of
/// `(u, u', int u g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gen {
    pub x: [[Complex; 2]; 2],
    pub y: [Complex; 2],
}

impl Gen {
    /// Generator of `u'' = q(r) u`, `I' = g(r) u`.
    pub fn radial(q: Complex, g: Complex) -> Gen {
        let z = Complex::new(0.0, 0.0);
        Gen {
            x: [[z, Complex::new(1.0, 0.0)], [q, z]],
            y: [g, z],
        }
    }

    fn scale(&self, s: f64) -> Gen {
        let mut o = *self;
        for row in o.x.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        o.y[0] *= s;
        o.y[1] *= s;
        o
    }

    fn add(&self, o: &Gen) -> Gen {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.x[i][j] += o.x[i][j];
            }
            r.y[i] += o.y[i];
        }
        r
    }

    fn mul(&self, o: &Gen) -> Gen {
        let z = Complex::new(0.0, 0.0);
        let mut r = Gen { x: [[z; 2]; 2], y: [z; 2] };
        for i in 0..2 {
            for j in 0..2 {
                r.x[i][j] = self.x[i][0] * o.x[0][j] + self.x[i][1] * o.x[1][j];
            }
            r.y[i] = self.y[0] * o.x[0][i] + self.y[1] * o.x[1][i];
        }
        r
    }

    fn comm(&self, o: &Gen) -> Gen {
        self.mul(o).add(&o.mul(self).scale(-1.0))
    }

    /// Apply `exp(self)` to `(u, u', I)`.
    fn exp_apply(&self, s: [Complex; 3]) -> [Complex; 3] {
        let half_tr = 0.5 * (self.x[0][0] + self.x[1][1]);
        let a = self.x[0][0] - half_tr;
        let q2 = a * a + self.x[0][1] * self.x[1][0];
        let (ch, sh_q, chm1_q2) = if q2.norm() < 1e-4 {
            // series in q^2
            (
                1.0 + q2 / 2.0 + q2 * q2 / 24.0 + q2 * q2 * q2 / 720.0,
                1.0 + q2 / 6.0 + q2 * q2 / 120.0 + q2 * q2 * q2 / 5040.0,
                0.5 + q2 / 24.0 + q2 * q2 / 720.0 + q2 * q2 * q2 / 40320.0,
            )
        } else {
            let q = q2.sqrt();
            let ch = q.cosh();
            (ch, q.sinh() / q, (ch - 1.0) / q2)
        };
        let x00 = a;
        let x11 = -a;
        let (x01, x10) = (self.x[0][1], self.x[1][0]);
        // exp(X) = ch I + sh_q X,  phi(X) = sh_q I + chm1_q2 X
        let u = ch * s[0] + sh_q * (x00 * s[0] + x01 * s[1]);
        let up = ch * s[1] + sh_q * (x10 * s[0] + x11 * s[1]);
        let yphi0 = self.y[0] * (sh_q + chm1_q2 * x00) + self.y[1] * (chm1_q2 * x10);
        let yphi1 = self.y[0] * (chm1_q2 * x01) + self.y[1] * (sh_q + chm1_q2 * x11);
        [u, up, s[2] + yphi0 * s[0] + yphi1 * s[1]]
    }
}

const SQRT15: f64 = 3.872983346207417;

/// One sixth-order Magnus step of length `h` from `r` for the generator `a(r)`.
pub fn magnus6<F: Fn(f64) -> Gen>(a: &F, r: f64, h: f64, s: [Complex; 3]) -> [Complex; 3] {
    let a1 = a(r + (0.5 - SQRT15 / 10.0) * h);
    let a2 = a(r + 0.5 * h);
    let a3 = a(r + (0.5 + SQRT15 / 10.0) * h);
    let al1 = a2.scale(h);
    let al2 = a3.add(&a1.scale(-1.0)).scale(SQRT15 * h / 3.0);
    let al3 = a3.add(&a2.scale(-2.0)).add(&a1).scale(10.0 * h / 3.0);
    let c1 = al1.comm(&al2);
    let c2 = al1.comm(&al3.scale(2.0).add(&c1)).scale(-1.0 / 60.0);
    let left = al1.scale(-20.0).add(&al3.scale(-1.0)).add(&c1);
    let right = al2.add(&c2);
    let omega = al1.add(&al3.scale(1.0 / 12.0)).add(&left.comm(&right).scale(1.0 / 240.0));
    omega.exp_apply(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn dopri_harmonic() {
        let k = c(2.0, 0.3);
        let f = |_x: f64, y: &[Complex; 2]| [y[1], -k * k * y[0]];
        let y = Dopri5::default().integrate(f, 0.0, 3.0, [c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let exact = (k * 3.0).sin() / k;
        assert!((y[0] - exact).norm() < 1e-10 * exact.norm());
        let back = Dopri5::default().integrate(f, 3.0, 0.0, y).unwrap();
        assert!(back[0].norm() < 1e-10);
    }

    #[test]
    fn magnus_is_exact_for_constant_generators() {
        let k = c(7.0, -2.0);
        let g = |_r: f64| Gen::radial(-k * k, c(1.0, 0.0));
        let mut s = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        for j in 0..10 {
            s = magnus6(&g, j as f64 * 0.3, 0.3, s);
        }
        let u = (k * 3.0).sin() / k;
        let int = (1.0 - (k * 3.0).cos()) / (k * k);
        assert!((s[0] - u).norm() < 1e-12 * u.norm());
        assert!((s[2] - int).norm() < 1e-12 * int.norm());
    }

    #[test]
    fn magnus_sixth_order() {
        // u'' = (V - k^2) u with smooth V; compare step h and h/2 against h/8
        let k = c(3.0, 0.0);
        let g = |r: f64| Gen::radial(c(10.0 / r.cosh().powi(2), 0.0) - k * k, c((-r * r).exp(), 0.0));
        let run = |n: usize| {
            let h = 4.0 / n as f64;
            let mut s = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
            for j in 0..n {
                s = magnus6(&g, j as f64 * h, h, s);
            }
            s
        };
        let fine = run(1600);
        let e1 = (run(50)[0] - fine[0]).norm();
        let e2 = (run(100)[0] - fine[0]).norm();
        let order = (e1 / e2).log2();
        assert!(order > 5.5, "observed order {order}");
        let e1 = (run(50)[2] - fine[2]).norm();
        let e2 = (run(100)[2] - fine[2]).norm();
        assert!((e1 / e2).log2() > 5.5);
    }
}
