//! `psi(r, t)`, `P(t)` and `S(t)` from the pole expansion
//! `psi = sum_n a_n(r) sum_gamma M(k_n, r, gamma + it)`, `gamma in {alpha, i alpha, -i alpha}`.

use crate::error::{Error, Result};
use crate::jost::PotentialModel;
use crate::moshinsky::{mosh_parts, sgn_im, tail_coefficient, MoshParts};
use crate::poles::{
    denominator_derivative, lowest_resonance, survival_denominator_derivative, Pole, PoleSet,
};
use crate::scalar::{sum_sorted, Complex, Context, Scaled, I};
use crate::spectral::{coefficient_c_prime, coefficient_c_unchecked, InitialState, SpectralCoefficient};
use rayon::prelude::*;
use std::io::Write;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionConfig {
    pub alpha: f64,
    /// Poles with `|k_n| <= k_max` are summed.
    pub k_max: f64,
    pub ctx: Context,
    /// Truncation estimates above `tol * |psi|` raise the truncation flag.
    pub tol: f64,
    /// Terms whose a-priori bound is below this are skipped.
    pub prune: f64,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig { alpha: 1.25, k_max: 40.0, ctx: Context::default(), tol: 1e-6, prune: 1e-40 }
    }
}

impl ExpansionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.k_max > 0.0 && self.k_max.is_finite()) {
            return Err(Error::Domain(format!("K_max must be positive, got {}", self.k_max)));
        }
        if !(self.tol > 0.0) || !(self.prune >= 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        Ok(())
    }

    fn gammas(&self) -> [Complex; 3] {
        [Complex::new(self.alpha, 0.0), I * self.alpha, -I * self.alpha]
    }

    /// Whether the discarded poles `|k| > k_max` see the large-argument form of
    /// `M(k, r, beta)`, so the `l(beta)/k` part may be summed via `sum a_n/k_n = 0`.
    fn tail_applies(&self, beta: Complex, r: f64) -> bool {
        let b = beta.norm();
        self.k_max * b.sqrt() >= 10.0 && self.k_max * b >= 10.0 * r
    }
}

/// `M(k, r, beta)` split as in [`mosh_parts`], including `beta = 0`.
fn parts(k: Complex, r: f64, beta: Complex) -> Result<MoshParts> {
    if beta == Complex::new(0.0, 0.0) {
        let coef = sgn_im(k) + 1.0;
        let alg = if r > 0.0 { Complex::new(0.0, 0.0) } else { Complex::new(-1.0, 0.0) };
        return Ok(MoshParts { nu: 1.0, coef, exp: Scaled::exp(I * k * r), alg, alg_reduced: alg });
    }
    mosh_parts(k, r, beta)
}

/// `sum_gamma M(k, r, gamma + it)` as exponential pieces plus a bounded rest.
struct Kernel {
    exp: Vec<Scaled>,
    alg: Complex,
    ln_mag: f64,
}

fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn kernel(cfg: &ExpansionConfig, k: Complex, aux: bool, r: f64, t: f64) -> Result<Kernel> {
    let mut p = Vec::with_capacity(3);
    for g in cfg.gammas() {
        let beta = g + I * t;
        p.push((parts(k, r, beta)?, cfg.tail_applies(beta, r), beta));
    }
    // at a zero of h_alpha, (sgn + nu) sum_gamma E_gamma = 0 for any fixed nu;
    // remove it with the nu of the largest E
    let shift = if aux {
        let dom = p.iter().max_by(|a, b| a.0.exp.log.total_cmp(&b.0.exp.log)).expect("three terms");
        sgn_im(k) + dom.0.nu
    } else {
        0.0
    };
    let mut exp = Vec::new();
    let mut alg = Complex::new(0.0, 0.0);
    let mut ln_mag = f64::NEG_INFINITY;
    for (q, tail, beta) in &p {
        let c = q.coef - shift;
        if c != 0.0 {
            let e = q.exp.scale(Complex::new(c, 0.0));
            ln_mag = log_add(ln_mag, e.ln_abs());
            exp.push(e);
        }
        alg += if *tail { q.alg_reduced } else { q.alg };
        if *tail {
            // bound for the subtracted l(beta)/k as well
            let l = (tail_coefficient(r, *beta) / k).norm();
            ln_mag = log_add(ln_mag, (1.0 + l).ln());
        }
    }
    ln_mag = log_add(ln_mag, 3f64.ln());
    Ok(Kernel { exp, alg, ln_mag })
}

/// `ln` of an upper bound on `|C(k)| = |int u psi0|`, using
/// `|u(k, r)| <= r e^{|Im k| r + int r|V|}` with a margin of `e^5`.
fn ln_c_bound(model: &dyn PotentialModel, state: &dyn InitialState, k: Complex) -> f64 {
    let kappa = k.im.abs();
    let g = |r: f64| state.ln_envelope(r) + r.max(1e-300).ln() + kappa * r;
    let (mut r, dr) = (0.0, 0.02);
    let mut peak = f64::NEG_INFINITY;
    let mut end = 0.0;
    while r < 1e4 {
        r += dr;
        let v = g(r);
        if v > peak {
            peak = v;
        }
        if v < peak - 60.0 && r > 1.0 {
            end = r;
            break;
        }
    }
    if end == 0.0 {
        return f64::INFINITY;
    }
    peak + (end + 1.0).ln() + model.range_moment() + 5.0
}

/// Kernel terms of one pole and their relative rounding level.
type PoleTerms = (Vec<Complex>, f64);

/// Per-pole data that does not depend on `r` or `t`.
struct PoleData {
    pole: Pole,
    /// Derivative of the denominator at the pole.
    dprime: Scaled,
    /// `ln` of the `r`-independent bound on the residue.
    ln_bound: f64,
    c: OnceLock<SpectralCoefficient>,
    c_prime: OnceLock<Result<SpectralCoefficient>>,
}

/// One value of the expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValue {
    pub psi: Complex,
    /// Summed moduli of the terms from poles with `|k| in [0.9 K, K]`.
    pub truncation: f64,
    /// Rounding estimate from the cancellation in the residues.
    pub rounding: f64,
    /// Number of pole terms evaluated.
    pub terms: usize,
    /// Number of poles skipped by the a-priori bound.
    pub pruned: usize,
    /// `truncation > tol * |psi|`.
    pub truncation_dominated: bool,
}

/// Which residues are summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Psi,
    Survival,
}

struct Engine<'a> {
    model: &'a dyn PotentialModel,
    state: &'a dyn InitialState,
    cfg: ExpansionConfig,
    set: PoleSet,
    data: Vec<PoleData>,
    mode: Mode,
}

impl<'a> Engine<'a> {
    fn new(
        model: &'a dyn PotentialModel,
        state: &'a dyn InitialState,
        cfg: ExpansionConfig,
        set: PoleSet,
        mode: Mode,
    ) -> Result<Self> {
        cfg.validate()?;
        let alpha = set.alpha;
        let data = set
            .poles
            .par_iter()
            .map(|p| {
                let (dprime, ln_bound) = match mode {
                    Mode::Psi => {
                        let d = denominator_derivative(model, p, alpha)?;
                        let b = p.k.norm().ln() + ln_c_bound(model, state, p.k) + model.phi_bound(p.k).ln();
                        (d, b - d.ln_abs())
                    }
                    Mode::Survival => {
                        let d = survival_denominator_derivative(model, p, alpha)?;
                        let b = 2.0 * (p.k.norm().ln() + ln_c_bound(model, state, p.k));
                        (d, b - d.ln_abs())
                    }
                };
                Ok(PoleData { pole: *p, dprime, ln_bound, c: OnceLock::new(), c_prime: OnceLock::new() })
            })
            .collect::<Result<Vec<_>>>()?;
        let cfg = ExpansionConfig { alpha, ..cfg };
        Ok(Engine { model, state, cfg, set, data, mode })
    }

    fn c<'b>(&self, d: &'b PoleData) -> &'b SpectralCoefficient {
        d.c.get_or_init(|| coefficient_c_unchecked(self.model, self.state, d.pole.k))
    }

    /// The residue and its rounding level (relative).
    fn residue(&self, d: &PoleData, r: f64) -> Result<(Scaled, f64)> {
        let c = self.c(d);
        let k = d.pole.k;
        let rel = f64::EPSILON * 10f64.powf(c.digits_lost) * 10.0 + c.rel_error;
        match self.mode {
            Mode::Psi => {
                let phi = self.model.reduced(k, r)?.phi;
                Ok(((c.value / d.dprime).scale(k * phi), rel))
            }
            Mode::Survival => {
                let cp = if self.state.is_real() {
                    *c
                } else {
                    let ctx = self.cfg.ctx;
                    *d.c_prime
                        .get_or_init(|| coefficient_c_prime(self.model, self.state, k, &ctx))
                        .as_ref()
                        .map_err(|e| e.clone())?
                };
                let rel = rel + f64::EPSILON * 10f64.powf(cp.digits_lost) * 10.0 + cp.rel_error;
                Ok(((c.value * cp.value / d.dprime).scale(I * k * k), rel))
            }
        }
    }

    /// Summed kernel terms per pole with their rounding level; `None` where pruned.
    fn per_pole(&self, r: f64, t: f64) -> Result<Vec<Option<PoleTerms>>> {
        let ln_prune = self.cfg.prune.ln();
        self.data
            .par_iter()
            .map(|d| {
                let kern = kernel(&self.cfg, d.pole.k, d.pole.kind.is_aux(), r, t)?;
                if d.ln_bound + kern.ln_mag < ln_prune {
                    return Ok(None);
                }
                let (a, rel) = self.residue(d, r)?;
                let mut terms: Vec<Complex> = kern.exp.iter().map(|e| (a * *e).value()).collect();
                terms.push(a.scale(kern.alg).value());
                Ok(Some((terms, rel)))
            })
            .collect()
    }

    fn evaluate(&self, r: f64, t: f64) -> Result<PsiValue> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
        }
        if r < 0.0 {
            return Err(Error::Domain(format!("negative radius {r}")));
        }
        let shell = 0.9 * self.cfg.k_max;
        let per_pole = self.per_pole(r, t)?;
        let mut all = Vec::new();
        let (mut truncation, mut rounding, mut terms, mut pruned) = (0.0, 0.0, 0, 0);
        for (p, d) in per_pole.into_iter().zip(&self.data) {
            match p {
                Some((t, rel)) => {
                    let size: f64 = t.iter().map(|z| z.norm()).sum();
                    if d.pole.k.norm() >= shell {
                        truncation += size;
                    }
                    rounding += size * rel;
                    all.extend(t);
                    terms += 1;
                }
                None => pruned += 1,
            }
        }
        let psi = sum_sorted(all);
        if !psi.is_finite() {
            return Err(Error::Tolerance(format!("non-finite expansion at r = {r}, t = {t}")));
        }
        Ok(PsiValue {
            psi,
            truncation,
            rounding,
            terms,
            pruned,
            truncation_dominated: truncation > self.cfg.tol * psi.norm(),
        })
    }
}

/// Residues `a_n(r)` over the aux zeros and resonances up to `K_max`.
pub struct Expansion<'a> {
    engine: Engine<'a>,
}

impl<'a> Expansion<'a> {
    /// Locate the poles (nudging `alpha` by 1% on a collision) and prepare the sum.
    pub fn new(model: &'a dyn PotentialModel, state: &'a dyn InitialState, cfg: ExpansionConfig) -> Result<Self> {
        cfg.validate()?;
        let set = PoleSet::build_nudged(model, cfg.alpha, cfg.k_max, false)?;
        Self::from_poles(model, state, cfg, set)
    }

    pub fn from_poles(
        model: &'a dyn PotentialModel,
        state: &'a dyn InitialState,
        cfg: ExpansionConfig,
        set: PoleSet,
    ) -> Result<Self> {
        if set.survival {
            return Err(Error::Domain("expansion needs the pole set without mirrors".into()));
        }
        let cfg = ExpansionConfig { k_max: set.kmax.min(cfg.k_max), ..cfg };
        Ok(Expansion { engine: Engine::new(model, state, cfg, set, Mode::Psi)? })
    }

    pub fn poles(&self) -> &PoleSet {
        &self.engine.set
    }

    pub fn config(&self) -> &ExpansionConfig {
        &self.engine.cfg
    }

    /// Lowest fourth-quadrant resonance.
    pub fn k0(&self) -> Option<Complex> {
        lowest_resonance(&self.engine.set.poles)
    }

    /// `a_n(r)` for the `i`-th pole of [`Expansion::poles`].
    pub fn residue(&self, i: usize, r: f64) -> Result<Complex> {
        Ok(self.engine.residue(&self.engine.data[i], r)?.0.value())
    }

    /// `a_n(r)` for every pole whose a-priori bound clears the prune level.
    pub fn residues(&self, r: f64) -> Result<Vec<Option<Complex>>> {
        let e = &self.engine;
        let ln_prune = e.cfg.prune.ln();
        e.data
            .par_iter()
            .map(|d| if d.ln_bound < ln_prune { Ok(None) } else { Ok(Some(e.residue(d, r)?.0.value())) })
            .collect()
    }

    /// `psi(r, t)`.
    pub fn psi(&self, r: f64, t: f64) -> Result<PsiValue> {
        self.engine.evaluate(r, t)
    }

    /// Each pole with its summed contribution to `psi(r, t)` (zero where pruned).
    pub fn contributions(&self, r: f64, t: f64) -> Result<Vec<(Pole, Complex)>> {
        let p = self.engine.per_pole(r, t)?;
        Ok(self
            .engine
            .data
            .iter()
            .zip(p)
            .map(|(d, v)| (d.pole, v.map_or(Complex::new(0.0, 0.0), |(t, _)| sum_sorted(t))))
            .collect())
    }

    /// `C(k)` at `k = 0`, by the regular-solution projection.
    pub fn c0(&self) -> Complex {
        coefficient_c_unchecked(self.engine.model, self.engine.state, Complex::new(0.0, 0.0)).value.value()
    }

    /// Partial sums of the three sum rules at `r` against their limits.
    pub fn sum_rules(&self, r: f64) -> Result<SumRuleReport> {
        let e = &self.engine;
        let parts: Vec<Option<([Complex; 3], f64)>> = e
            .data
            .par_iter()
            .map(|d| {
                if d.ln_bound < e.cfg.prune.ln() {
                    return Ok(None);
                }
                let (a, rel) = e.residue(d, r)?;
                let k = d.pole.k;
                let terms = [
                    (a / Scaled::new(k)).value(),
                    -(a / Scaled::new(k * k)).value(),
                    -(a / Scaled::new(k * k * k)).value(),
                ];
                Ok(Some((terms, rel)))
            })
            .collect::<Result<_>>()?;
        let mut sums = [Complex::new(0.0, 0.0); 3];
        let mut largest = [0.0f64; 3];
        let mut noise = [0.0f64; 3];
        for j in 0..3 {
            let col: Vec<Complex> = parts.iter().flatten().map(|p| p.0[j]).collect();
            largest[j] = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            noise[j] = parts.iter().flatten().map(|p| p.0[j].norm() * (p.1 + f64::EPSILON)).sum();
            sums[j] = sum_sorted(col);
        }
        let c0_rel = coefficient_c_unchecked(e.model, e.state, Complex::new(0.0, 0.0)).rel_error + f64::EPSILON;
        let c0 = self.c0();
        let (m, z) = (e.model, Complex::new(0.0, 0.0));
        let (p0, pr) = (m.reduced(z, 0.0)?, m.reduced(z, r)?);
        let ratio = pr.phi / p0.phi;
        let dratio = (pr.dphi * p0.phi - pr.phi * p0.dphi) / (p0.phi * p0.phi);
        let targets = [z, c0 / 3.0 * ratio, c0 / 3.0 * dratio];
        let (mut defects, mut rounding) = ([0.0; 3], [0.0; 3]);
        for j in 0..3 {
            let scale = largest[j].max(f64::MIN_POSITIVE);
            defects[j] = (sums[j] - targets[j]).norm() / scale;
            rounding[j] = (noise[j] + targets[j].norm() * c0_rel) / scale;
        }
        Ok(SumRuleReport { r, k_max: e.cfg.k_max, sums, targets, largest, defects, rounding })
    }
}

/// `sum a_n/k_n -> 0`, `-sum a_n/k_n^2 -> C(0)/3 f(0,r)/f(0,0)`,
/// `-sum a_n/k_n^3 -> C(0)/3 d/dk[e^{-ikr} f(k,r)/f(k,0)]_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumRuleReport {
    pub r: f64,
    pub k_max: f64,
    pub sums: [Complex; 3],
    pub targets: [Complex; 3],
    /// Largest single term in each partial sum.
    pub largest: [f64; 3],
    /// `|sum - target| / largest`.
    pub defects: [f64; 3],
    /// Rounding level of each defect from the residue error estimates, on
    /// the same scale; defects below it carry no information.
    pub rounding: [f64; 3],
}

/// Residues `b_n` of the survival integrand, mirrors included.
pub struct Survival<'a> {
    engine: Engine<'a>,
}

impl<'a> Survival<'a> {
    pub fn new(model: &'a dyn PotentialModel, state: &'a dyn InitialState, cfg: ExpansionConfig) -> Result<Self> {
        cfg.validate()?;
        let set = PoleSet::build_nudged(model, cfg.alpha, cfg.k_max, true)?;
        Ok(Survival { engine: Engine::new(model, state, cfg, set, Mode::Survival)? })
    }

    pub fn poles(&self) -> &PoleSet {
        &self.engine.set
    }

    /// `b_n` for the `i`-th pole.
    pub fn residue(&self, i: usize) -> Result<Complex> {
        Ok(self.engine.residue(&self.engine.data[i], 0.0)?.0.value())
    }

    /// The overlap amplitude `<psi0|psi(t)>`; `S = |amplitude|^2` is in `.psi`.
    pub fn amplitude(&self, t: f64) -> Result<PsiValue> {
        self.engine.evaluate(0.0, t)
    }

    /// `S(t)` with its truncation estimate (propagated to `S`).
    pub fn survival(&self, t: f64) -> Result<(f64, f64)> {
        let a = self.amplitude(t)?;
        let s = a.psi.norm_sqr();
        Ok((s, 2.0 * a.psi.norm() * (a.truncation + a.rounding)))
    }
}

/// `S(t) = |int psi0* psi(t)|^2` from the direct spectral integral, at real `k`.
pub fn survival_direct(
    model: &dyn PotentialModel,
    state: &dyn InitialState,
    t: f64,
    k_max: f64,
    tol: f64,
) -> Result<f64> {
    use crate::quad::integrate_breaks;
    let mut breaks = vec![0.0];
    let mut k: f64 = 0.0;
    while k < k_max {
        k = (k + std::f64::consts::PI / (2.0 * k * t + 1.0)).min(k_max);
        breaks.push(k);
    }
    let ctx = Context::default();
    let f = |k: f64| {
        let kk = Complex::new(k, 0.0);
        let c = coefficient_c_unchecked(model, state, kk).value.value();
        let cp = if state.is_real() {
            c
        } else {
            coefficient_c_prime(model, state, kk, &ctx).map(|v| v.value.value()).unwrap_or(Complex::new(f64::NAN, 0.0))
        };
        let f0 = model.f0(kk).map(|f| f.norm_sqr()).unwrap_or(f64::NAN);
        2.0 / std::f64::consts::PI * k * k * c * cp / f0 * (-I * k * k * t).exp()
    };
    let q = integrate_breaks(f, &breaks, 0.0, tol, 200_000)?;
    Ok(q.value.norm_sqr())
}

/// `P(t) = int_0^rho |psi(r, t)|^2 dr` by composite Simpson on a uniform grid
/// starting at `r = 0`.
pub fn non_escape_from_grid(r: &[f64], psi: &[Complex], rho: f64) -> Result<f64> {
    if r.len() < 65 || r.len() != psi.len() || r.len().is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "non-escape probability needs an odd number >= 65 of matching samples, got {}",
            r.len()
        )));
    }
    let h = r[1] - r[0];
    let uniform = r.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300));
    if r[0] != 0.0 || !uniform || (r[r.len() - 1] - rho).abs() > 1e-9 * rho.max(1.0) {
        return Err(Error::Domain(format!("grid must be uniform on [0, {rho}]")));
    }
    let n = r.len() - 1;
    let mut s = psi[0].norm_sqr() + psi[n].norm_sqr();
    for (i, p) in psi.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * p.norm_sqr();
    }
    Ok(s * h / 3.0)
}

/// `P(t)` from the expansion on `points` (odd, >= 65) radii in `[0, rho]`.
pub fn non_escape_p(exp: &Expansion, rho: f64, t: f64, points: usize) -> Result<f64> {
    let points = points.max(65) | 1;
    let r: Vec<f64> = (0..points).map(|i| rho * i as f64 / (points - 1) as f64).collect();
    let psi = r.iter().map(|&x| exp.psi(x, t).map(|v| v.psi)).collect::<Result<Vec<_>>>()?;
    non_escape_from_grid(&r, &psi, rho)
}

/// `per_decade` log-spaced times in `[t0, t1]`, both ends included.
pub fn log_times(t0: f64, t1: f64, per_decade: usize) -> Vec<f64> {
    if !(t0 > 0.0 && t1 >= t0) {
        return Vec::new();
    }
    let n = ((t1 / t0).log10() * per_decade as f64).ceil().max(1.0) as usize;
    (0..=n).map(|i| t0 * (t1 / t0).powf(i as f64 / n as f64)).collect()
}

/// One CSV row of [`write_psi_csv`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiRow {
    pub t: f64,
    pub r: f64,
    pub value: PsiValue,
}

/// Columns t, r, Re psi, Im psi, |psi|, truncation.
pub fn write_psi_csv<W: Write>(out: W, rows: &[PsiRow], digits: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "r", "re_psi", "im_psi", "abs_psi", "truncation"])?;
    let e = |x: f64| format!("{:.*e}", digits.saturating_sub(1), x);
    for row in rows {
        let p = row.value.psi;
        w.write_record([e(row.t), e(row.r), e(p.re), e(p.im), e(p.norm()), e(row.value.truncation)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jost::{EckartModel, FreeModel};
    use crate::poles::PoleKind;
    use crate::spectral::{free_gaussian_evolution, GaussianState};

    #[test]
    fn beta_zero_limit() {
        let k = Complex::new(2.0, -0.5);
        let p = parts(k, 0.5, Complex::new(0.0, 0.0)).unwrap();
        assert_eq!(p.value(), Complex::new(0.0, 0.0));
        let near = mosh_parts(k, 0.5, Complex::new(0.0, 1e-9)).unwrap().value();
        assert!(near.norm() < 1e-3);
        let k = Complex::new(2.0, 0.5);
        let p = parts(k, 0.0, Complex::new(0.0, 0.0)).unwrap();
        assert_eq!(p.value(), Complex::new(1.0, 0.0));
    }

    #[test]
    fn free_expansion_matches_closed_form() {
        let s = GaussianState::new(1.0).unwrap();
        let cfg = ExpansionConfig { k_max: 40.0, ..Default::default() };
        let e = Expansion::new(&FreeModel, &s, cfg).unwrap();
        assert_eq!(e.poles().count(PoleKind::Resonance), 0);
        for t in [0.0, 1.0, 10.0] {
            for r in [0.25, 0.5, 1.0, 2.0] {
                let v = e.psi(r, t).unwrap();
                let x = free_gaussian_evolution(&s, r, t);
                assert!((v.psi - x).norm() < 1e-6 * x.norm().max(1e-3), "r {r} t {t}: {} vs {x}", v.psi);
            }
        }
        assert!(e.psi(0.0, 3.0).unwrap().psi.norm() < 1e-10);
    }

    #[test]
    fn eckart_initial_state_is_reproduced() {
        let m = EckartModel::standard();
        let s = GaussianState::new(1.0).unwrap();
        let e = Expansion::new(&m, &s, ExpansionConfig::default()).unwrap();
        for r in [0.25, 0.5, 1.0, 2.0] {
            let v = e.psi(r, 0.0).unwrap();
            let x = s.psi0(r);
            assert!((v.psi - x).norm() < 1e-4 * x.norm(), "r {r}: {} vs {x}", v.psi);
        }
    }

    #[test]
    fn survival_starts_at_one() {
        let m = EckartModel::standard();
        let s = GaussianState::new(1.0).unwrap();
        let sv = Survival::new(&m, &s, ExpansionConfig::default()).unwrap();
        let (s0, _) = sv.survival(0.0).unwrap();
        assert!((s0 - 1.0).abs() < 1e-6, "{s0}");
    }

    #[test]
    fn simpson_grid_checks() {
        let r: Vec<f64> = (0..65).map(|i| i as f64 / 64.0).collect();
        let psi: Vec<Complex> = r.iter().map(|x| Complex::new(*x, 0.0)).collect();
        assert!((non_escape_from_grid(&r, &psi, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!(non_escape_from_grid(&r[..33], &psi[..33], 0.5).is_err());
    }
}
