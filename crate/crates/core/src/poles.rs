//! Poles of `g(k, r) = k C(k) e^{-ikr} f(k, r) / (h_alpha(k) f(k, 0))`: zeros of
//! the Gaussian trio `h_alpha` and resonances (zeros of `f(k, 0)`, lower half
//! plane), with their residues.

use crate::contour::{winding, Rect};
use crate::error::{Error, Result};
use crate::jost::PotentialModel;
use crate::scalar::{Complex, Scaled, I};
use crate::spectral::{coefficient_c_unchecked, InitialState};
use rayon::prelude::*;
use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PoleKind {
    /// Near `+-e^{-3 pi i/8} sqrt(pi (2n-1)/(sqrt 2 alpha))`.
    Aux1,
    /// Near `+-e^{3 pi i/8} sqrt(pi (2n-1)/(sqrt 2 alpha))`.
    Aux2,
    /// Near `+-sqrt(pi (2n-1)/(2 alpha))`, on the real axis.
    Aux3,
    /// Zero of `f(k, 0)`, lower half plane.
    Resonance,
    /// Zero of `f(-k, 0)`, upper half plane (survival only).
    Mirror,
}

impl PoleKind {
    pub fn is_aux(self) -> bool {
        matches!(self, PoleKind::Aux1 | PoleKind::Aux2 | PoleKind::Aux3)
    }

    pub fn label(self) -> &'static str {
        match self {
            PoleKind::Aux1 => "aux1",
            PoleKind::Aux2 => "aux2",
            PoleKind::Aux3 => "aux3",
            PoleKind::Resonance => "resonance",
            PoleKind::Mirror => "mirror",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub k: Complex,
    pub kind: PoleKind,
    pub seed: Complex,
    pub refined: bool,
    /// `|vanishing factor| / (sum of its term moduli)` at `k`.
    pub residual: f64,
}

fn trio_exponents(k: Complex, alpha: f64) -> [Complex; 3] {
    let k2 = k * k;
    [I * alpha * k2, -I * alpha * k2, -alpha * k2]
}

/// `h_alpha(k) = e^{i alpha k^2} + e^{-i alpha k^2} + e^{-alpha k^2}`, log-scaled.
pub fn h_alpha(k: Complex, alpha: f64) -> Scaled {
    let x = trio_exponents(k, alpha);
    let m = x.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let mant = x.iter().map(|z| (z - m).exp()).sum();
    Scaled { mant, log: m }
}

/// `h_alpha'(k) = 2k (i alpha e^{i alpha k^2} - i alpha e^{-i alpha k^2} - alpha e^{-alpha k^2})`.
pub fn h_alpha_prime(k: Complex, alpha: f64) -> Scaled {
    let x = trio_exponents(k, alpha);
    let m = x.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let c = [I * alpha, -I * alpha, Complex::new(-alpha, 0.0)];
    let mant: Complex = x.iter().zip(c).map(|(z, c)| c * (z - m).exp()).sum();
    Scaled { mant: 2.0 * k * mant, log: m }
}

/// `|h| / sum |terms|`.
fn h_relative(k: Complex, alpha: f64) -> f64 {
    let x = trio_exponents(k, alpha);
    let m = x.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let terms: Vec<Complex> = x.iter().map(|z| (z - m).exp()).collect();
    let sum: Complex = terms.iter().sum();
    sum.norm() / terms.iter().map(|t| t.norm()).sum::<f64>()
}

/// Lattice seeds with `|seed| <= 1.05 kmax`, both signs.
pub fn aux_pole_seeds(alpha: f64, kmax: f64) -> Vec<Pole> {
    let mut out = Vec::new();
    let mut push = |kind, z: Complex| {
        for s in [z, -z] {
            out.push(Pole { k: s, kind, seed: s, refined: false, residual: f64::NAN });
        }
    };
    let lim = 1.05 * kmax;
    for n in 1.. {
        let s = (PI * (2 * n - 1) as f64 / (SQRT_2 * alpha)).sqrt();
        if s > lim {
            break;
        }
        push(PoleKind::Aux1, Complex::from_polar(s, -3.0 * PI / 8.0));
        push(PoleKind::Aux2, Complex::from_polar(s, 3.0 * PI / 8.0));
    }
    for n in 1.. {
        let s = (PI * (2 * n - 1) as f64 / (2.0 * alpha)).sqrt();
        if s > lim {
            break;
        }
        push(PoleKind::Aux3, Complex::new(s, 0.0));
    }
    out
}

/// Newton on `h_alpha` from the seed; real iteration on lattice 3.
pub fn refine_aux(seed: Pole, alpha: f64) -> Result<Pole> {
    let mut k = seed.seed;
    for _ in 0..60 {
        let h = h_alpha(k, alpha);
        let d = h_alpha_prime(k, alpha);
        let mut step = (h.mant / d.mant) * (h.log - d.log).exp();
        if seed.kind == PoleKind::Aux3 {
            step = Complex::new(step.re, 0.0);
        }
        if !step.is_finite() {
            break;
        }
        k -= step;
        if step.norm() <= 1e-15 * k.norm().max(1.0) {
            let residual = h_relative(k, alpha);
            return Ok(Pole { k, refined: true, residual, ..seed });
        }
    }
    Err(Error::Tolerance(format!("Newton on h_alpha did not converge from {}", seed.seed)))
}

/// Completeness record for one scanned region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionAudit {
    pub region: String,
    pub winding: i64,
    /// Poles of the scanned function inside the region.
    pub poles: usize,
    pub found: usize,
}

impl RegionAudit {
    /// `winding + poles - found`; zero when the scan is complete.
    pub fn defect(&self) -> i64 {
        self.winding + self.poles as i64 - self.found as i64
    }
}

fn same(a: Complex, b: Complex) -> bool {
    (a - b).norm() <= 1e-8 * a.norm().max(1.0)
}

/// All zeros of `h_alpha` with `|k| <= kmax`, refined, plus the winding audit
/// on a circle placed in a gap between zero moduli.
pub fn aux_poles(alpha: f64, kmax: f64) -> Result<(Vec<Pole>, RegionAudit)> {
    if !(alpha > 0.0) || !(kmax > 0.0) {
        return Err(Error::Domain(format!("need alpha > 0 and K_max > 0, got {alpha}, {kmax}")));
    }
    let seeds = aux_pole_seeds(alpha, kmax * 1.02 + 1.0);
    let mut poles: Vec<Pole> = seeds.into_par_iter().map(|s| refine_aux(s, alpha)).collect::<Result<_>>()?;
    sort_poles(&mut poles);
    for w in poles.windows(2) {
        if same(w[0].k, w[1].k) {
            return Err(Error::Tolerance(format!("two lattice seeds refined to the same zero {}", w[0].k)));
        }
    }
    // audit radius: the middle of the widest modulus gap near kmax
    let mut mods: Vec<f64> = poles.iter().map(|p| p.k.norm()).collect();
    mods.sort_by(f64::total_cmp);
    let mut radius = kmax;
    let mut best = 0.0;
    for w in mods.windows(2) {
        if w[1] > 0.9 * kmax && w[0] < kmax {
            let gap = w[1] - w[0];
            if gap > best {
                best = gap;
                radius = 0.5 * (w[0] + w[1]);
            }
        }
    }
    let inside = poles.iter().filter(|p| p.k.norm() < radius).count();
    let n_vert = ((2.0 * PI * radius * radius * alpha * 4.0).ceil() as usize).max(64);
    let verts: Vec<Complex> = (0..n_vert)
        .map(|j| Complex::from_polar(radius, 2.0 * PI * j as f64 / n_vert as f64))
        .collect();
    let w = winding(&|z| Ok(h_alpha(z, alpha)), &verts, 0.0)?;
    let audit = RegionAudit { region: format!("|k| < {radius:.6}"), winding: w, poles: 0, found: inside };
    poles.retain(|p| p.k.norm() <= kmax);
    Ok((poles, audit))
}

fn newton_f0(model: &dyn PotentialModel, mut k: Complex) -> Option<Complex> {
    let mut prev = f64::INFINITY;
    for _ in 0..60 {
        let j = model.reduced(k, 0.0).ok()?;
        let step = j.phi / j.dphi;
        let s = step.norm();
        if !step.is_finite() || s > 4.0 {
            return None;
        }
        k -= step;
        let scale = k.norm().max(1.0);
        // the second test stops at the rounding floor of ill-conditioned series
        if s <= 1e-14 * scale || (s <= 1e-8 * scale && s > 0.5 * prev) {
            return Some(k);
        }
        prev = s;
    }
    None
}

/// Zeros of `f(k, 0)` in the lower half plane with `|k| <= kmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceScan {
    /// Both arms, sorted by modulus then phase.
    pub zeros: Vec<Pole>,
    pub audit: Vec<RegionAudit>,
}

const STRIP: f64 = 0.3;
const TILE: f64 = 2.0;

fn scan_tile(model: &dyn PotentialModel, rect: Rect, seeds: &[Complex], jost_poles: &[Complex], depth: u32) -> Result<Vec<Complex>> {
    let f = |z: Complex| Ok(Scaled::new(model.reduced(z, 0.0)?.phi));
    let w = winding(&f, &rect.vertices(), 24.0 / rect.width().max(1e-3))?;
    let p = jost_poles.iter().filter(|z| rect.contains(**z)).count() as i64;
    let zeros = w + p;
    if zeros < 0 {
        return Err(Error::PoleCount { region: rect.to_string(), winding: w, found: 0 });
    }
    if zeros == 0 {
        return Ok(Vec::new());
    }
    let mut found: Vec<Complex> = Vec::new();
    let starts = seeds.iter().cloned().filter(|s| rect.contains(*s)).chain(std::iter::once(rect.center()));
    for s in starts {
        if let Some(z) = newton_f0(model, s) {
            if rect.contains(z) && !found.iter().any(|q| same(*q, z)) {
                found.push(z);
            }
        }
    }
    if found.len() as i64 == zeros {
        return Ok(found);
    }
    if depth >= 10 {
        return Err(Error::PoleCount { region: rect.to_string(), winding: w, found: found.len() });
    }
    let mut all = Vec::new();
    for q in rect.quarters() {
        all.extend(scan_tile(model, q, seeds, jost_poles, depth + 1)?);
    }
    if all.len() as i64 != zeros {
        return Err(Error::PoleCount { region: rect.to_string(), winding: w, found: all.len() });
    }
    Ok(all)
}

fn tiles(kmax: f64, shift: f64) -> Vec<Rect> {
    let mut rows = vec![0.0];
    let mut y: f64 = 0.0;
    while y > -kmax {
        // row edges at quarter-integers avoid the Jost poles at -i n/2
        y = -((rows.len() as f64) * TILE + 0.25 + shift);
        rows.push(y);
    }
    let mut out = Vec::new();
    for w in rows.windows(2) {
        let (y1, y0) = (w[0], w[1]);
        let strip = Rect { x0: -STRIP - shift, x1: STRIP + shift, y0, y1 };
        if y1.abs() <= kmax {
            out.push(strip);
        }
        let mut x = STRIP + shift;
        while x < kmax {
            let r = Rect { x0: x, x1: x + TILE, y0, y1 };
            // nearest point to the origin
            let near = Complex::new(r.x0, r.y1.min(0.0).max(r.y0).min(r.y1));
            if near.norm() <= kmax {
                out.push(r);
            }
            x += TILE;
        }
    }
    out
}

/// Argument-principle scan of the lower half plane (right half and the strip
/// around the imaginary axis; the left arm follows by `k -> -conj k`), with
/// Newton refinement from the model seeds and from tile centres.
pub fn find_resonances(model: &dyn PotentialModel, kmax: f64) -> Result<ResonanceScan> {
    let seeds = model.resonance_seeds(kmax * 1.1 + 2.0);
    let jost_poles = model.jost_poles(kmax * 1.1 + 2.0 * TILE);
    let mut last_err = None;
    for shift in [0.0, 0.0137, 0.0291] {
        let rects = tiles(kmax, shift);
        let res: Result<Vec<(Rect, Vec<Complex>)>> = rects
            .par_iter()
            .map(|r| scan_tile(model, *r, &seeds, &jost_poles, 0).map(|z| (*r, z)))
            .collect();
        match res {
            Ok(list) => {
                let mut audit = Vec::new();
                let mut zeros = Vec::new();
                for (r, z) in list {
                    if !z.is_empty() {
                        let p = jost_poles.iter().filter(|q| r.contains(**q)).count();
                        audit.push(RegionAudit {
                            region: r.to_string(),
                            winding: z.len() as i64 - p as i64,
                            poles: p,
                            found: z.len(),
                        });
                    }
                    for k in z {
                        let mirror = k.re > STRIP + shift;
                        zeros.push(k);
                        if mirror {
                            zeros.push(-k.conj());
                        }
                    }
                }
                let mut poles: Vec<Pole> = zeros
                    .into_iter()
                    .filter(|k| k.norm() <= kmax)
                    .map(|k| {
                        let j = model.reduced(k, 0.0).ok();
                        let residual = j.map_or(f64::NAN, |j| j.phi.norm() / j.dphi.norm().max(1e-300));
                        Pole { k, kind: PoleKind::Resonance, seed: k, refined: true, residual }
                    })
                    .collect();
                for p in poles.iter_mut() {
                    if let Some(s) = seeds.iter().min_by(|a, b| (**a - p.k).norm().total_cmp(&(**b - p.k).norm())) {
                        if p.k.re > 0.0 {
                            p.seed = *s;
                        } else {
                            p.seed = -s.conj();
                        }
                    }
                }
                sort_poles(&mut poles);
                return Ok(ResonanceScan { zeros: poles, audit });
            }
            Err(e @ Error::PoleCount { .. }) => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(Error::Tolerance("resonance scan failed".into())))
}

/// Sort by modulus, then phase.
pub fn sort_poles(p: &mut [Pole]) {
    p.sort_by(|a, b| a.k.norm().total_cmp(&b.k.norm()).then(a.k.arg().total_cmp(&b.k.arg())));
}

/// The lowest fourth-quadrant resonance (closest to the origin).
pub fn lowest_resonance(poles: &[Pole]) -> Option<Complex> {
    poles
        .iter()
        .filter(|p| p.kind == PoleKind::Resonance && p.k.re > 0.0 && p.k.im < 0.0)
        .map(|p| p.k)
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
}

/// Aux zeros and resonances up to `kmax`, for one value of `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    pub alpha: f64,
    pub kmax: f64,
    pub poles: Vec<Pole>,
    pub audit: Vec<RegionAudit>,
    /// Whether mirror resonances (zeros of `f(-k, 0)`) are included.
    pub survival: bool,
}

impl PoleSet {
    /// Poles of `g` (aux zeros and resonances).
    pub fn expansion(model: &dyn PotentialModel, alpha: f64, kmax: f64) -> Result<PoleSet> {
        Self::build(model, alpha, kmax, false)
    }

    /// Poles of the survival integrand: additionally the mirrors `-k_n`.
    pub fn survival(model: &dyn PotentialModel, alpha: f64, kmax: f64) -> Result<PoleSet> {
        Self::build(model, alpha, kmax, true)
    }

    /// As [`PoleSet::expansion`]/[`PoleSet::survival`], retrying with `alpha`
    /// raised by 1% (up to five times) when an aux zero and a resonance collide.
    pub fn build_nudged(model: &dyn PotentialModel, alpha: f64, kmax: f64, survival: bool) -> Result<PoleSet> {
        let mut a = alpha;
        let mut last = None;
        for _ in 0..6 {
            match Self::build(model, a, kmax, survival) {
                Err(e @ Error::DegeneratePoles(..)) => {
                    last = Some(e);
                    a *= 1.01;
                }
                other => return other,
            }
        }
        Err(last.expect("loop ran"))
    }

    fn build(model: &dyn PotentialModel, alpha: f64, kmax: f64, survival: bool) -> Result<PoleSet> {
        let (mut poles, aux_audit) = aux_poles(alpha, kmax)?;
        let scan = find_resonances(model, kmax)?;
        let mut audit = vec![aux_audit];
        audit.extend(scan.audit);
        for r in &scan.zeros {
            if let Some(a) = poles.iter().find(|a| (a.k - r.k).norm() < 1e-6) {
                return Err(Error::DegeneratePoles(a.k, r.k));
            }
        }
        poles.extend(scan.zeros.iter().cloned());
        if survival {
            for r in &scan.zeros {
                poles.push(Pole { k: -r.k, kind: PoleKind::Mirror, seed: -r.seed, ..*r });
            }
        }
        sort_poles(&mut poles);
        Ok(PoleSet { alpha, kmax, poles, audit, survival })
    }

    pub fn count(&self, kind: PoleKind) -> usize {
        self.poles.iter().filter(|p| p.kind == kind).count()
    }

    /// Sum of audit defects; zero when every region is complete.
    pub fn completeness_defect(&self) -> i64 {
        self.audit.iter().map(|a| a.defect().abs()).sum()
    }
}

/// `d/dk [h_alpha(k) f(k, 0)]` at a pole where one factor vanishes.
pub fn denominator_derivative(model: &dyn PotentialModel, pole: &Pole, alpha: f64) -> Result<Scaled> {
    let k = pole.k;
    match pole.kind {
        PoleKind::Resonance => Ok(h_alpha(k, alpha).scale(model.reduced(k, 0.0)?.dphi)),
        PoleKind::Mirror => Err(Error::Domain("mirror poles are not poles of g".into())),
        _ => Ok(h_alpha_prime(k, alpha).scale(model.reduced(k, 0.0)?.phi)),
    }
}

/// `d/dk [f(k,0) f(-k,0) h_alpha(k)]` at a pole of the survival integrand.
pub fn survival_denominator_derivative(model: &dyn PotentialModel, pole: &Pole, alpha: f64) -> Result<Scaled> {
    let k = pole.k;
    let (p, m) = (model.reduced(k, 0.0)?, model.reduced(-k, 0.0)?);
    Ok(match pole.kind {
        PoleKind::Resonance => h_alpha(k, alpha).scale(p.dphi * m.phi),
        PoleKind::Mirror => h_alpha(k, alpha).scale(-p.phi * m.dphi),
        _ => h_alpha_prime(k, alpha).scale(p.phi * m.phi),
    })
}

/// `a_n(r) = k C(k) phi(k, r) / D'(k)` at the pole, `phi = e^{-ikr} f`.
pub fn residue_a(pole: &Pole, model: &dyn PotentialModel, state: &dyn InitialState, alpha: f64, r: f64) -> Result<Scaled> {
    let c = coefficient_c_unchecked(model, state, pole.k).value;
    let d = denominator_derivative(model, pole, alpha)?;
    let phi = model.reduced(pole.k, r)?.phi;
    Ok((c / d).scale(pole.k * phi))
}

/// `b_n = i Res [k^2 C'(k) C(k) / (f(k,0) f(-k,0) h_alpha(k))]`.
pub fn residue_b(pole: &Pole, model: &dyn PotentialModel, state: &dyn InitialState, alpha: f64) -> Result<Scaled> {
    let c = coefficient_c_unchecked(model, state, pole.k).value;
    let cp = if state.is_real() {
        c
    } else {
        crate::spectral::coefficient_c_prime(model, state, pole.k, &Default::default())?.value
    };
    let d = survival_denominator_derivative(model, pole, alpha)?;
    Ok((c * cp / d).scale(I * pole.k * pole.k))
}

/// Pole table as CSV: kind, k, seed, relative residual and `a_n(r)` (`nan`
/// where not evaluated).
pub fn write_csv<W: Write>(out: W, set: &PoleSet, residues: &[Option<Complex>], digits: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "re_k", "im_k", "re_seed", "im_seed", "residual", "re_a", "im_a"])?;
    let e = |x: f64| format!("{:.*e}", digits.saturating_sub(1), x);
    for (p, a) in set.poles.iter().zip(residues) {
        let a = a.unwrap_or(Complex::new(f64::NAN, f64::NAN));
        w.write_record([
            p.kind.label().to_string(),
            e(p.k.re),
            e(p.k.im),
            e(p.seed.re),
            e(p.seed.im),
            e(p.residual),
            e(a.re),
            e(a.im),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Region audit as CSV: region, winding number, located zeros, defect.
pub fn write_audit_csv<W: Write>(out: W, set: &PoleSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["region", "winding", "found", "defect"])?;
    for a in &set.audit {
        w.write_record([a.region.clone(), a.winding.to_string(), a.found.to_string(), a.defect().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jost::{EckartModel, FreeModel};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn trio_basics() {
        assert!((h_alpha(c(0.0, 0.0), 1.25).value() - c(3.0, 0.0)).norm() < 1e-15);
        assert_eq!(h_alpha_prime(c(0.0, 0.0), 1.25).value(), c(0.0, 0.0));
        let seed = Pole { k: c(0.0, 0.0), kind: PoleKind::Aux3, seed: c((PI / 2.5).sqrt(), 0.0), refined: false, residual: 0.0 };
        let p = refine_aux(seed, 1.25).unwrap();
        assert!(h_alpha(p.k, 1.25).value().norm() < 1e-12);
        assert_eq!(p.k.im, 0.0);
    }

    #[test]
    fn seeds_follow_the_lattices() {
        let s = aux_pole_seeds(1.25, 10.0);
        let n3 = s.iter().filter(|p| p.kind == PoleKind::Aux3).count();
        // s_n <= 10.5 => n <= (10.5^2 * 2.5/pi + 1)/2
        assert_eq!(n3, 2 * ((10.5f64 * 10.5 * 2.5 / PI + 1.0) / 2.0).floor() as usize);
        for p in &s {
            if p.kind == PoleKind::Aux1 {
                let ph = p.seed.arg();
                assert!((ph + 3.0 * PI / 8.0).abs() < 1e-12 || (ph - 5.0 * PI / 8.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn refinement_stays_close_to_seeds() {
        let (poles, audit) = aux_poles(1.25, 10.0).unwrap();
        assert_eq!(audit.defect(), 0, "{audit:?}");
        for p in &poles {
            let rel = (p.k - p.seed).norm() / p.seed.norm();
            if p.seed.norm() > 2.0 {
                assert!(rel < 0.1, "{:?}", p);
            }
            assert!(p.residual < 1e-12);
        }
    }

    #[test]
    fn free_model_has_no_resonances() {
        let s = find_resonances(&FreeModel, 10.0).unwrap();
        assert!(s.zeros.is_empty());
    }

    #[test]
    fn eckart_lowest_resonance() {
        let m = EckartModel::standard();
        let s = find_resonances(&m, 8.0).unwrap();
        let k0 = lowest_resonance(&s.zeros).unwrap();
        assert!((k0 - c(3.7104837988467567, -0.24947237925300856)).norm() < 1e-12, "{k0}");
        for a in &s.audit {
            assert_eq!(a.defect(), 0);
        }
        // both arms
        assert!(s.zeros.iter().any(|p| (p.k + k0.conj()).norm() < 1e-12));
    }
}
