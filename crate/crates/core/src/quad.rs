//! Adaptive Gauss-Kronrod (10/21) quadrature for complex integrands.

use crate::error::{Error, Result};
use crate::scalar::Complex;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600854556090,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
// Gauss weights for XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651083,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: Complex,
    pub error: f64,
    pub evals: usize,
}

/// One 21-point Kronrod panel with the QUADPACK error estimate.
pub fn gk21<F: FnMut(f64) -> Complex>(f: &mut F, a: f64, b: f64) -> (Complex, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut fv = [(Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)); 10];
    let mut k = fc * WGK[10];
    let mut g = Complex::new(0.0, 0.0);
    let mut resabs = fc.norm() * WGK[10];
    for j in 0..10 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        fv[j] = (f1, f2);
        k += (f1 + f2) * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            g += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = k * 0.5;
    let mut resasc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        resasc += WGK[j] * ((fv[j].0 - mean).norm() + (fv[j].1 - mean).norm());
    }
    let h_abs = h.abs();
    resasc *= h_abs;
    resabs *= h_abs;
    let mut err = ((k - g) * h).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (k * h, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive integration over the union of `[x_i, x_{i+1}]`.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol*|I|)`.
pub fn integrate_breaks<F: FnMut(f64) -> Complex>(
    mut f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Quad> {
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (value, error) = gk21(&mut f, w[0], w[1]);
        evals += 21;
        heap.push(Panel { a: w[0], b: w[1], value, error });
    }
    loop {
        let total: Complex = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.error).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) {
            return Ok(Quad { value: total, error: err, evals });
        }
        if heap.len() >= max_panels {
            return Err(Error::Quadrature { value: total, error: err });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Ok(Quad { value: total, error: err, evals }),
        };
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // interval exhausted at double resolution
            return Err(Error::Quadrature { value: total, error: err });
        }
        let (v1, e1) = gk21(&mut f, worst.a, m);
        let (v2, e2) = gk21(&mut f, m, worst.b);
        evals += 42;
        heap.push(Panel { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, error: e2 });
    }
}

/// Adaptive integration over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> Complex>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Quad> {
    integrate_breaks(f, &[a, b], abs_tol, rel_tol, 4000)
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    Ok(integrate(|x| Complex::new(f(x), 0.0), a, b, abs_tol, rel_tol)?.value.re)
}

/// 21-point Kronrod panel for a vector integrand; the error is the largest
/// component error.
fn gk21_vec<F: FnMut(f64) -> Vec<Complex>>(f: &mut F, a: f64, b: f64, dim: usize) -> (Vec<Complex>, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![Complex::new(0.0, 0.0); dim];
    let mut g = vec![Complex::new(0.0, 0.0); dim];
    let fc = f(c);
    for i in 0..dim {
        k[i] += fc[i] * WGK[10];
    }
    for j in 0..10 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        for i in 0..dim {
            let s = f1[i] + f2[i];
            k[i] += s * WGK[j];
            if j % 2 == 1 {
                g[i] += s * WG[j / 2];
            }
        }
    }
    let err = (0..dim).map(|i| ((k[i] - g[i]) * h).norm()).fold(0.0, f64::max);
    let floor = 50.0 * f64::EPSILON * (0..dim).map(|i| (k[i] * h).norm()).fold(0.0, f64::max);
    (k.into_iter().map(|v| v * h).collect(), err.max(floor))
}

struct VecPanel {
    a: f64,
    b: f64,
    value: Vec<Complex>,
    error: f64,
}

/// Globally adaptive integration of a `dim`-vector integrand over the
/// breakpoint intervals. Stops when the summed error is below
/// `max(abs_tol, rel_tol * max_i |I_i|)`.
pub fn integrate_vec<F: FnMut(f64) -> Vec<Complex>>(
    mut f: F,
    breaks: &[f64],
    dim: usize,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<(Vec<Complex>, f64)> {
    let mut panels: Vec<VecPanel> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk21_vec(&mut f, w[0], w[1], dim);
            panels.push(VecPanel { a: w[0], b: w[1], value, error });
        }
    }
    loop {
        let mut total = vec![Complex::new(0.0, 0.0); dim];
        for p in &panels {
            for i in 0..dim {
                total[i] += p.value[i];
            }
        }
        let err: f64 = panels.iter().map(|p| p.error).sum();
        let scale = total.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if err <= abs_tol.max(rel_tol * scale) {
            return Ok((total, err));
        }
        if panels.len() >= max_panels {
            return Err(Error::Quadrature { value: total[0], error: err });
        }
        // split every panel carrying more than its share of the budget
        let target = abs_tol.max(rel_tol * scale) / panels.len() as f64;
        let mut next = Vec::with_capacity(panels.len() * 2);
        let mut split = 0;
        let worst = panels.iter().map(|p| p.error).fold(0.0, f64::max);
        for p in panels {
            if p.error > target && p.error >= 1e-3 * worst {
                let m = 0.5 * (p.a + p.b);
                if m <= p.a || m >= p.b {
                    return Err(Error::Quadrature { value: total[0], error: err });
                }
                let (v1, e1) = gk21_vec(&mut f, p.a, m, dim);
                let (v2, e2) = gk21_vec(&mut f, m, p.b, dim);
                next.push(VecPanel { a: p.a, b: m, value: v1, error: e1 });
                next.push(VecPanel { a: m, b: p.b, value: v2, error: e2 });
                split += 1;
            } else {
                next.push(p);
            }
        }
        panels = next;
        if split == 0 {
            return Err(Error::Quadrature { value: total[0], error: err });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_high_degree_polynomials() {
        // Kronrod 21 integrates degree 31 exactly
        let q = integrate(|x| Complex::new(x.powi(30), x.powi(31)), 0.0, 1.0, 1e-15, 0.0).unwrap();
        assert!((q.value.re - 1.0 / 31.0).abs() < 1e-15);
        assert!((q.value.im - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_and_oscillatory() {
        let q = integrate_real(|x| (-x * x).exp(), 0.0, 10.0, 1e-14, 1e-14).unwrap();
        assert!((q - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-14);
        let q = integrate(|x| Complex::new(0.0, 50.0 * x).exp(), 0.0, 3.0, 1e-13, 1e-13).unwrap();
        let exact = (Complex::new(0.0, 150.0).exp() - 1.0) / Complex::new(0.0, 50.0);
        assert!((q.value - exact).norm() < 1e-13);
    }

    #[test]
    fn error_estimate_is_honest_on_a_kink() {
        let q = integrate_real(|x| (x - 0.3).abs().sqrt(), 0.0, 1.0, 1e-10, 0.0).unwrap();
        let exact = 2.0 / 3.0 * (0.3f64.powf(1.5) + 0.7f64.powf(1.5));
        assert!((q - exact).abs() < 1e-10);
    }

    #[test]
    fn vector_integrand() {
        let (v, _) = integrate_vec(
            |x| vec![Complex::new(x.cos(), 0.0), Complex::new(0.0, 30.0 * x).exp()],
            &[0.0, 1.0, 2.0, 3.0],
            2,
            1e-13,
            1e-13,
            10_000,
        )
        .unwrap();
        assert!((v[0].re - 3f64.sin()).abs() < 1e-13);
        let exact = (Complex::new(0.0, 90.0).exp() - 1.0) / Complex::new(0.0, 30.0);
        assert!((v[1] - exact).norm() < 1e-13);
    }
}
