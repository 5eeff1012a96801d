//! Crank–Nicolson integration of `i psi_t = -psi_rr + V psi` on `[0, L]` with
//! `psi(0) = psi(L) = 0`.

use crate::error::{Error, Result};
use crate::jost::PotentialModel;
use crate::scalar::Complex;
use crate::spectral::{coefficient_c_unchecked, InitialState};
use std::io::Write;

/// Spatial discretisation of `-d^2/dr^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    /// Three-point second difference.
    #[default]
    Standard,
    /// `M psi_t` form with mass matrix `(1, 10, 1)/12`, fourth order for the
    /// kinetic term; the potential stays diagonal.
    Compact,
}

impl Stencil {
    fn mass(self) -> (f64, f64) {
        match self {
            Stencil::Standard => (0.0, 1.0),
            Stencil::Compact => (1.0 / 12.0, 10.0 / 12.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnConfig {
    pub dr: f64,
    pub dt: f64,
    /// Box length; rounded up to a whole number of cells.
    pub l: f64,
    pub t_end: f64,
    pub stencil: Stencil,
}

impl CnConfig {
    /// `dt = dr^2/4`.
    pub fn new(dr: f64, l: f64, t_end: f64) -> Self {
        CnConfig { dr, dt: dr * dr / 4.0, l, t_end, stencil: Stencil::Standard }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !(ok(self.dr) && ok(self.dt) && ok(self.l)) || !(self.t_end >= 0.0) {
            return Err(Error::Domain(format!("invalid Crank-Nicolson configuration {self:?}")));
        }
        if self.l < 4.0 * self.dr {
            return Err(Error::Domain("box holds fewer than four cells".into()));
        }
        Ok(())
    }

    /// Number of cells `N`; grid points are `j dr`, `j = 0..=N`.
    pub fn cells(&self) -> usize {
        (self.l / self.dr - 1e-9).ceil() as usize
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// `L >= 2 k_95 t_end + 50`, with `k_95` the 95% quantile of `k^2 |C(k)|^2 / |f(k,0)|^2`
/// on the real axis.
pub fn box_length(model: &dyn PotentialModel, state: &dyn InitialState, t_end: f64) -> f64 {
    let dk = 0.05;
    let w: Vec<f64> = (0..1200)
        .map(|i| {
            let k = (i as f64 + 0.5) * dk;
            let kk = Complex::new(k, 0.0);
            let c = coefficient_c_unchecked(model, state, kk).value.value().norm_sqr();
            let f = model.f0(kk).map(|f| f.norm_sqr()).unwrap_or(1.0);
            k * k * c / f
        })
        .collect();
    let total: f64 = w.iter().sum();
    let mut acc = 0.0;
    let mut k95 = 60.0;
    for (i, x) in w.iter().enumerate() {
        acc += x;
        if acc >= 0.95 * total {
            k95 = (i as f64 + 1.0) * dk;
            break;
        }
    }
    2.0 * k95 * t_end + 50.0
}

/// Values `psi_j` at `r_j = j dr`; the two ends are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub dr: f64,
    pub t: f64,
    pub psi: Vec<Complex>,
}

impl GridState {
    pub fn sample(state: &dyn InitialState, dr: f64, cells: usize) -> Self {
        let mut psi: Vec<Complex> = (0..=cells).map(|j| state.psi0(j as f64 * dr)).collect();
        psi[0] = Complex::new(0.0, 0.0);
        psi[cells] = Complex::new(0.0, 0.0);
        GridState { dr, t: 0.0, psi }
    }

    /// `sum |psi_j|^2 dr`.
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dr
    }

    pub fn r(&self, j: usize) -> f64 {
        j as f64 * self.dr
    }

    /// Linear interpolation at `r`.
    pub fn at(&self, r: f64) -> Complex {
        let x = r / self.dr;
        let j = x.floor() as usize;
        if j + 1 >= self.psi.len() {
            return *self.psi.last().unwrap_or(&Complex::new(0.0, 0.0));
        }
        let f = x - j as f64;
        self.psi[j] * (1.0 - f) + self.psi[j + 1] * f
    }
}

/// `(M + i dt H/2)` factored once from both ends; `H = -D2 + V` on the
/// interior points, `M` the stencil's mass matrix. Consecutive steps alternate between the two
/// factorisations so that each sweep carries two independent recurrences.
pub struct CnStepper {
    dt: f64,
    /// Mass diagonal and the (constant) off-diagonals of both sides.
    mu_d: f64,
    b_off: Complex,
    /// `dt/2 (2/dr^2 + V_j)`.
    q: Vec<f64>,
    /// Pivot inverses of the elimination from `j = 1` upwards and from the top down.
    inv_lu: Vec<Complex>,
    inv_ul: Vec<Complex>,
    /// `-a_off inv`, the sweep multipliers.
    w_lu: Vec<Complex>,
    w_ul: Vec<Complex>,
    buf: Vec<Complex>,
}

impl CnStepper {
    pub fn new(v: &[f64], dr: f64, dt: f64) -> Result<Self> {
        Self::with_stencil(v, dr, dt, Stencil::Standard)
    }

    pub fn with_stencil(v: &[f64], dr: f64, dt: f64, stencil: Stencil) -> Result<Self> {
        let n = v.len();
        if n < 4 {
            return Err(Error::Domain("grid too small".into()));
        }
        let s = dt / (2.0 * dr * dr);
        let q: Vec<f64> = v.iter().map(|&v| dt / 2.0 * (2.0 / (dr * dr) + v)).collect();
        let (mu_o, mu_d) = stencil.mass();
        let a_off = Complex::new(mu_o, -s);
        let b_off = Complex::new(mu_o, s);
        let zero = Complex::new(0.0, 0.0);
        let pivot = |j: usize, prev: Complex| -> Result<Complex> {
            let den = Complex::new(mu_d, q[j]) - a_off * a_off * prev;
            if den.norm() < 1e-300 {
                return Err(Error::Tolerance("Crank-Nicolson factorisation broke down".into()));
            }
            Ok(den.inv())
        };
        let mut inv_lu = vec![zero; n];
        let mut inv_ul = vec![zero; n];
        for j in 1..n - 1 {
            inv_lu[j] = pivot(j, inv_lu[j - 1])?;
        }
        for j in (1..n - 1).rev() {
            inv_ul[j] = pivot(j, inv_ul[j + 1])?;
        }
        let w_lu = inv_lu.iter().map(|&z| -a_off * z).collect();
        let w_ul = inv_ul.iter().map(|&z| -a_off * z).collect();
        Ok(CnStepper { dt, mu_d, b_off, q, inv_lu, inv_ul, w_lu, w_ul, buf: vec![zero; n] })
    }

    #[inline(always)]
    fn rhs(&self, l: Complex, c: Complex, r: Complex, j: usize) -> Complex {
        Complex::new(self.mu_d, -self.q[j]) * c + self.b_off * (l + r)
    }

    /// One step in place.
    pub fn step(&mut self, psi: &mut [Complex]) {
        self.advance(psi, 1);
    }

    /// `steps` steps in place.
    pub fn advance(&mut self, psi: &mut [Complex], steps: usize) {
        if steps == 0 {
            return;
        }
        let n = psi.len();
        assert_eq!(n, self.q.len(), "grid size mismatch");
        let m = n - 2;
        let zero = Complex::new(0.0, 0.0);
        psi[0] = zero;
        psi[n - 1] = zero;
        let mut y = zero;
        for j in 1..=m {
            let inv = self.inv_lu[j];
            y = self.rhs(psi[j - 1], psi[j], psi[j + 1], j) * inv + self.w_lu[j] * y;
            self.buf[j] = y;
        }
        for k in 1..=steps {
            let more = k < steps;
            match (k % 2 == 1, more) {
                (true, true) => self.down_fused(psi),
                (false, true) => self.up_fused(psi),
                (true, false) => {
                    let mut x = zero;
                    for j in (1..=m).rev() {
                        x = self.buf[j] + self.w_lu[j] * x;
                        psi[j] = x;
                    }
                }
                (false, false) => {
                    let mut x = zero;
                    for j in 1..=m {
                        x = self.buf[j] + self.w_ul[j] * x;
                        psi[j] = x;
                    }
                }
            }
        }
    }

    /// Downward back substitution of an upward-eliminated step, fused with
    /// the downward elimination of the next step.
    fn down_fused(&mut self, psi: &mut [Complex]) {
        let m = psi.len() - 2;
        let (q, mu_d, b_off) = (&self.q[..m + 2], self.mu_d, self.b_off);
        let (inv_ul, w_lu, w_ul, buf) = (&self.inv_ul[..m + 2], &self.w_lu[..m + 2], &self.w_ul[..m + 2], &mut self.buf[..m + 2]);
        let rhs = |l: Complex, c: Complex, r: Complex, q: f64| Complex::new(mu_d, -q) * c + b_off * (l + r);
        let mut x = buf[m];
        psi[m] = x;
        let mut z = Complex::new(0.0, 0.0);
        for j in (1..m).rev() {
            x = buf[j] + w_lu[j] * x;
            psi[j] = x;
            let i = j + 1;
            z = rhs(psi[j], psi[i], psi[i + 1], q[i]) * inv_ul[i] + w_ul[i] * z;
            buf[i] = z;
        }
        buf[1] = rhs(psi[0], psi[1], psi[2], q[1]) * inv_ul[1] + w_ul[1] * z;
    }

    /// Mirror image of [`Self::down_fused`].
    fn up_fused(&mut self, psi: &mut [Complex]) {
        let m = psi.len() - 2;
        let (q, mu_d, b_off) = (&self.q[..m + 2], self.mu_d, self.b_off);
        let (inv_lu, w_lu, w_ul, buf) = (&self.inv_lu[..m + 2], &self.w_lu[..m + 2], &self.w_ul[..m + 2], &mut self.buf[..m + 2]);
        let rhs = |l: Complex, c: Complex, r: Complex, q: f64| Complex::new(mu_d, -q) * c + b_off * (l + r);
        let mut x = buf[1];
        psi[1] = x;
        let mut y = Complex::new(0.0, 0.0);
        for j in 2..=m {
            x = buf[j] + w_ul[j] * x;
            psi[j] = x;
            let i = j - 1;
            y = rhs(psi[i - 1], psi[i], psi[j], q[i]) * inv_lu[i] + w_lu[i] * y;
            buf[i] = y;
        }
        buf[m] = rhs(psi[m - 1], psi[m], psi[m + 1], q[m]) * inv_lu[m] + w_lu[m] * y;
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// `V` on the grid of `cfg`.
pub fn potential_grid(model: &dyn PotentialModel, cfg: &CnConfig) -> Vec<f64> {
    (0..=cfg.cells()).map(|j| model.v(j as f64 * cfg.dr)).collect()
}

/// One step on a [`GridState`] (factors the matrix each call; use
/// [`CnStepper`] for repeated steps).
pub fn cn_step(state: &GridState, v: &[f64], cfg: &CnConfig) -> Result<GridState> {
    let mut s = CnStepper::with_stencil(v, cfg.dr, cfg.dt, cfg.stencil)?;
    let mut psi = state.psi.clone();
    s.step(&mut psi);
    Ok(GridState { dr: state.dr, t: state.t + cfg.dt, psi })
}

/// Evolve to `cfg.t_end`, keeping the states at the requested times (rounded
/// to whole steps). The last step is shortened to land on `t_end` exactly.
pub fn cn_evolve(
    model: &dyn PotentialModel,
    psi0: &dyn InitialState,
    cfg: &CnConfig,
    snapshot_times: &[f64],
) -> Result<Vec<GridState>> {
    cfg.validate()?;
    let v = potential_grid(model, cfg);
    let mut grid = GridState::sample(psi0, cfg.dr, cfg.cells());
    evolve_grid(&mut grid, &v, cfg, snapshot_times)
}

/// As [`cn_evolve`] from a given grid state. Snapshot times before
/// `grid.t` or after `cfg.t_end` are ignored.
pub fn evolve_grid(grid: &mut GridState, v: &[f64], cfg: &CnConfig, snapshot_times: &[f64]) -> Result<Vec<GridState>> {
    let mut stepper = CnStepper::with_stencil(v, cfg.dr, cfg.dt, cfg.stencil)?;
    let mut targets: Vec<(f64, bool)> = snapshot_times
        .iter()
        .filter(|&&t| t >= grid.t && t <= cfg.t_end)
        .map(|&t| (t, true))
        .collect();
    targets.push((cfg.t_end, false));
    targets.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    for (t, keep) in targets {
        let span = t - grid.t;
        if span > 0.0 {
            let n = (span / cfg.dt + 1e-9).floor() as usize;
            stepper.advance(&mut grid.psi, n);
            let rest = span - n as f64 * cfg.dt;
            if rest > 1e-9 * cfg.dt {
                CnStepper::with_stencil(v, cfg.dr, rest, cfg.stencil)?.step(&mut grid.psi);
            }
            grid.t = t;
        }
        if keep {
            out.push(grid.clone());
        }
    }
    Ok(out)
}

/// Snapshot CSV: t, r, Re psi, Im psi, for `r <= r_max`.
pub fn write_snapshots<W: Write>(out: W, snaps: &[GridState], r_max: f64, digits: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "r", "re_psi", "im_psi"])?;
    let e = |x: f64| format!("{:.*e}", digits.saturating_sub(1), x);
    for s in snaps {
        for (j, p) in s.psi.iter().enumerate() {
            let r = s.r(j);
            if r > r_max {
                break;
            }
            w.write_record([e(s.t), e(r), e(p.re), e(p.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `sqrt(sum |a - b|^2 / sum |b|^2)` over the samples.
pub fn relative_l2(a: &[Complex], b: &[Complex]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// As [`relative_l2`] on the moduli.
pub fn relative_l2_abs(a: &[Complex], b: &[Complex]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x.norm() - y.norm()).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jost::FreeModel;
    use crate::spectral::{free_gaussian_evolution, GaussianState};
    use std::f64::consts::PI;

    #[test]
    fn eigenmode_is_unimodular() {
        let (l, n) = (10.0, 200);
        let dr = l / n as f64;
        let cfg = CnConfig::new(dr, l, 1.0);
        let psi: Vec<Complex> = (0..=n).map(|j| Complex::new((PI * j as f64 * dr / l).sin(), 0.0)).collect();
        let g = GridState { dr, t: 0.0, psi: psi.clone() };
        let v = vec![0.0; n + 1];
        let s = cn_step(&g, &v, &cfg).unwrap();
        let ratio = s.psi[n / 2] / psi[n / 2];
        for j in 1..n {
            assert!((s.psi[j] - ratio * psi[j]).norm() < 1e-13);
        }
        assert!((ratio.norm() - 1.0).abs() < 1e-14);
        assert!((s.norm() - g.norm()).abs() < 1e-12 * g.norm());
    }

    #[test]
    fn norm_is_conserved() {
        let st = GaussianState::new(1.0).unwrap();
        let cfg = CnConfig::new(0.05, 40.0, 0.0);
        let v = potential_grid(&crate::jost::EckartModel::standard(), &cfg);
        let mut g = GridState::sample(&st, cfg.dr, cfg.cells());
        let n0 = g.norm();
        let mut s = CnStepper::new(&v, cfg.dr, cfg.dt).unwrap();
        s.advance(&mut g.psi, 100_001);
        assert!((g.norm() - n0).abs() < 1e-8 * n0, "{}", g.norm() - n0);
    }

    #[test]
    fn alternating_sweeps_match_single_steps() {
        let st = GaussianState::new(1.0).unwrap();
        let cfg = CnConfig::new(0.05, 30.0, 0.0);
        let v = potential_grid(&crate::jost::EckartModel::standard(), &cfg);
        let g = GridState::sample(&st, cfg.dr, cfg.cells());
        let mut s = CnStepper::new(&v, cfg.dr, cfg.dt).unwrap();
        let (mut a, mut b) = (g.psi.clone(), g.psi.clone());
        s.advance(&mut a, 7);
        for _ in 0..7 {
            s.step(&mut b);
        }
        // independent dense reference: (1 + iH dt/2) x = (1 - iH dt/2) psi by Gaussian elimination
        let mut c = g.psi.clone();
        let n = c.len();
        let sdr = cfg.dt / (2.0 * cfg.dr * cfg.dr);
        for _ in 0..7 {
            let m = n - 2;
            let mut mat = vec![vec![Complex::new(0.0, 0.0); m + 1]; m];
            for i in 0..m {
                let j = i + 1;
                let q = cfg.dt / 2.0 * (2.0 / (cfg.dr * cfg.dr) + v[j]);
                mat[i][i] = Complex::new(1.0, q);
                if i > 0 {
                    mat[i][i - 1] = Complex::new(0.0, -sdr);
                }
                if i + 1 < m {
                    mat[i][i + 1] = Complex::new(0.0, -sdr);
                }
                mat[i][m] = c[j] * Complex::new(1.0, -q) + Complex::new(0.0, sdr) * (c[j - 1] + c[j + 1]);
            }
            for p in 0..m {
                let piv = mat[p][p];
                for i in p + 1..(p + 2).min(m) {
                    let f = mat[i][p] / piv;
                    for k in p..=m {
                        let t = mat[p][k];
                        mat[i][k] -= f * t;
                    }
                }
            }
            for i in (0..m).rev() {
                let mut acc = mat[i][m];
                if i + 1 < m {
                    acc -= mat[i][i + 1] * c[i + 2];
                }
                c[i + 1] = acc / mat[i][i];
            }
        }
        for j in 0..n {
            assert!((a[j] - b[j]).norm() < 1e-13);
            assert!((a[j] - c[j]).norm() < 1e-12, "{j} {} {}", a[j], c[j]);
        }
    }

    fn free_error(cfg: CnConfig, t: f64) -> f64 {
        let st = GaussianState::new(1.0).unwrap();
        let g = cn_evolve(&FreeModel, &st, &cfg, &[t]).unwrap().pop().unwrap();
        assert_eq!(g.t, t);
        (0..=(20.0 / cfg.dr) as usize)
            .map(|j| (g.psi[j] - free_gaussian_evolution(&st, g.r(j), t)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn free_gaussian_matches_closed_form() {
        // second order in dr for the standard stencil
        let e1 = free_error(CnConfig::new(0.02, 40.0, 1.0), 1.0);
        let e2 = free_error(CnConfig::new(0.01, 40.0, 1.0), 1.0);
        assert!(e1 < 2e-3 && e2 < 5e-4, "{e1} {e2}");
        assert!((e1 / e2 - 4.0).abs() < 0.2, "{}", e1 / e2);
        let c = CnConfig { stencil: Stencil::Compact, ..CnConfig::new(0.02, 40.0, 1.0) };
        let e = free_error(c, 1.0);
        assert!(e < 2e-5, "{e}");
    }
}
