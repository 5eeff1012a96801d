use super::{JostValue, PotentialModel};
use crate::error::{Error, Result};
use crate::ode::Dopri5;
use crate::quad::integrate_real;
use crate::scalar::{Complex, I};

const R_CAP: f64 = 200.0;

/// Smallest `R >= r_min` (on a 0.25 grid) with `|V(R)| R < eps`, capped at 200.
pub fn tail_radius(v: &dyn Fn(f64) -> f64, eps: f64, r_min: f64) -> Result<f64> {
    let mut r = r_min.max(0.25);
    loop {
        let tail = v(r).abs() * r;
        if tail < eps {
            return Ok(r);
        }
        if r >= R_CAP {
            return Err(Error::TailTooLarge { r, tail });
        }
        r += 0.25;
    }
}

/// Jost solution on `r_grid` by backward DOPRI5 integration of
/// `f'' = (V - k^2) f` from `R` with `f = e^{ikR}`, `f' = ik e^{ikR}`.
///
/// For `Im k < 0` the wanted solution is the recessive one in the backward
/// direction and errors grow like `e^{2|Im k| R}`.
pub fn numerical_jost(v: &dyn Fn(f64) -> f64, k: Complex, r_grid: &[f64]) -> Result<Vec<Complex>> {
    Ok(numerical_jost_pairs(v, k, r_grid)?.into_iter().map(|p| p[0]).collect())
}

/// As [`numerical_jost`], returning `(f, f')` at each grid point.
pub fn numerical_jost_pairs(v: &dyn Fn(f64) -> f64, k: Complex, r_grid: &[f64]) -> Result<Vec<[Complex; 2]>> {
    let r_top = r_grid.iter().cloned().fold(0.0, f64::max);
    let big_r = tail_radius(v, 1e-14, r_top)?;
    let mut order: Vec<usize> = (0..r_grid.len()).collect();
    order.sort_by(|&a, &b| r_grid[b].total_cmp(&r_grid[a]));
    let e = (I * k * big_r).exp();
    let mut y = [e, I * k * e];
    let mut x = big_r;
    let rhs = |r: f64, y: &[Complex; 2]| [y[1], (v(r) - k * k) * y[0]];
    let solver = Dopri5::default();
    let mut out = vec![[Complex::new(0.0, 0.0); 2]; r_grid.len()];
    for i in order {
        if r_grid[i] < 0.0 {
            return Err(Error::Domain(format!("negative radius {}", r_grid[i])));
        }
        y = solver.integrate(rhs, x, r_grid[i], y)?;
        x = r_grid[i];
        out[i] = y;
    }
    Ok(out)
}

/// Potential tabulated on an increasing grid, natural cubic spline in between
/// and zero beyond the last node. Jost values come from backward integration
/// of the reduced equation `phi'' + 2ik phi' = V phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedModel {
    r: Vec<f64>,
    v: Vec<f64>,
    m: Vec<f64>,
    moment: f64,
}

impl TabulatedModel {
    pub fn new(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let n = r.len();
        if n < 3 || v.len() != n {
            return Err(Error::Domain("tabulated potential needs at least 3 (r, V) pairs".into()));
        }
        if r[0] != 0.0 || r.windows(2).any(|w| w[1] <= w[0]) || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("tabulated potential needs an increasing grid starting at r = 0".into()));
        }
        // natural spline second derivatives
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let (h0, h1) = (r[i] - r[i - 1], r[i + 1] - r[i]);
            let rhs = 6.0 * ((v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0);
            let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / diag;
            d[i] = (rhs - h0 * d[i - 1]) / diag;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        let mut model = TabulatedModel { r, v, m, moment: 0.0 };
        let end = model.r[n - 1];
        model.moment = integrate_real(|x| x * model.v(x).abs(), 0.0, end, 1e-14, 1e-10)?;
        Ok(model)
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().expect("non-empty grid")
    }

    fn solve(&self, k: Complex, r: f64) -> Result<JostValue> {
        let top = self.r_max();
        if r >= top {
            return Ok(JostValue { phi: Complex::new(1.0, 0.0), dphi: Complex::new(0.0, 0.0) });
        }
        let z = Complex::new(0.0, 0.0);
        let y0 = [Complex::new(1.0, 0.0), z, z, z];
        // (phi, phi', dphi, dphi')
        let rhs = |x: f64, y: &[Complex; 4]| {
            let v = self.v(x);
            [y[1], v * y[0] - 2.0 * I * k * y[1], y[3], v * y[2] - 2.0 * I * k * y[3] - 2.0 * I * y[1]]
        };
        let y = Dopri5::default().integrate(rhs, top, r, y0)?;
        Ok(JostValue { phi: y[0], dphi: y[2] })
    }
}

impl PotentialModel for TabulatedModel {
    fn v(&self, x: f64) -> f64 {
        let n = self.r.len();
        if x >= self.r[n - 1] || x < 0.0 {
            return 0.0;
        }
        let i = match self.r.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        let h = self.r[i + 1] - self.r[i];
        let (a, b) = ((self.r[i + 1] - x) / h, (x - self.r[i]) / h);
        a * self.v[i]
            + b * self.v[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn reduced(&self, k: Complex, r: f64) -> Result<JostValue> {
        self.solve(k, r)
    }

    fn range_moment(&self) -> f64 {
        self.moment
    }

    fn v_max(&self) -> f64 {
        // spline overshoot between nodes is small; pad by 10%
        1.1 * self.v.iter().cloned().fold(0.0, f64::max)
    }

    fn support(&self, _eps: f64) -> f64 {
        self.r_max()
    }

    fn name(&self) -> String {
        format!("tabulated({} points, r <= {})", self.r.len(), self.r_max())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jost::EckartModel;

    #[test]
    fn free_case() {
        let k = Complex::new(1.5, 0.3);
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let f = numerical_jost(&|_| 0.0, k, &grid).unwrap();
        for (r, f) in grid.iter().zip(f) {
            assert!((f - (I * k * *r).exp()).norm() < 1e-10);
        }
    }

    #[test]
    fn eckart_cross_validation() {
        let m = EckartModel::standard();
        let k = Complex::new(1.0, 0.5);
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let f = numerical_jost(&|r| m.v(r), k, &grid).unwrap();
        for (r, fo) in grid.iter().zip(f) {
            let fa = m.f(k, *r).unwrap();
            assert!((fa - fo).norm() < 1e-8 * fa.norm(), "r = {r}");
        }
    }

    #[test]
    fn wronskian() {
        // W[f(k), f(-k)] = -2ik; inside the barrier |f| ~ 1e5, so the
        // tolerance is relative to the size of the products
        let m = EckartModel::standard();
        let k = Complex::new(1.7, 1e-3);
        let grid = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0];
        let a = numerical_jost_pairs(&|x| m.v(x), k, &grid).unwrap();
        let b = numerical_jost_pairs(&|x| m.v(x), -k, &grid).unwrap();
        for i in 0..grid.len() {
            let w = a[i][0] * b[i][1] - a[i][1] * b[i][0];
            let scale = (a[i][0] * b[i][1]).norm().max(1.0);
            assert!((w + 2.0 * I * k).norm() < 1e-8 * scale, "r = {}: {w}", grid[i]);
        }
    }

    #[test]
    fn tabulated_tracks_the_analytic_barrier() {
        let e = EckartModel::standard();
        let r: Vec<f64> = (0..=1200).map(|i| i as f64 * 0.025).collect();
        let v: Vec<f64> = r.iter().map(|&x| e.v(x)).collect();
        let t = TabulatedModel::new(r, v).unwrap();
        assert!((t.v(1.2345) - e.v(1.2345)).abs() < 1e-6);
        let k = Complex::new(2.0, -0.2);
        let (a, b) = (t.f(k, 0.5).unwrap(), e.f(k, 0.5).unwrap());
        assert!((a - b).norm() < 1e-6 * b.norm());
        assert!(TabulatedModel::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
    }
}
