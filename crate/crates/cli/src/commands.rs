//! Subcommands. Each writes CSV files under the output directory and returns
//! a short text summary.

use crate::config::RunConfig;
use quantum_decay::asymptotics::{survival_coefficient, AsymptoticsReport};
use quantum_decay::cn::{box_length, cn_evolve, relative_l2, relative_l2_abs, CnConfig};
use quantum_decay::evolution::{Expansion, ExpansionConfig, Survival};
use quantum_decay::jost::PotentialModel;
use quantum_decay::poles::{write_audit_csv, write_csv, PoleKind};
use quantum_decay::spectral::InitialState;
use quantum_decay::{Error, Result};
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn sci(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), x)
}

struct Setup {
    model: Box<dyn PotentialModel>,
    state: Box<dyn InitialState>,
    digits: usize,
    dir: PathBuf,
}

impl Setup {
    fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let model = cfg.build_model()?;
        let state = cfg.build_state(model.as_ref())?;
        Ok(Setup { model, state, digits: cfg.expansion.precision as usize, dir: cfg.output.dir.clone() })
    }

    fn expansion_config(&self, cfg: &RunConfig) -> Result<ExpansionConfig> {
        Ok(ExpansionConfig {
            alpha: cfg.expansion.alpha,
            k_max: cfg.expansion.k_max,
            ctx: cfg.context()?,
            tol: cfg.expansion.tol,
            ..Default::default()
        })
    }
}

/// `poles.csv` and `audit.csv`; residues at the first `evolve.r`.
pub fn cmd_poles(cfg: &RunConfig) -> Result<String> {
    let s = Setup::new(cfg)?;
    let exp = Expansion::new(s.model.as_ref(), s.state.as_ref(), s.expansion_config(cfg)?)?;
    let set = exp.poles();
    let r = cfg.evolve.r.first().copied().unwrap_or(0.5);
    let residues = exp.residues(r)?;
    write_csv(create(&s.dir, "poles.csv")?, set, &residues, s.digits)?;
    write_audit_csv(create(&s.dir, "audit.csv")?, set)?;
    let mut out = String::new();
    let aux = set.poles.iter().filter(|p| p.kind.is_aux()).count();
    let _ = writeln!(out, "alpha = {}", set.alpha);
    let _ = writeln!(out, "poles = {} (aux {aux}, resonances {})", set.poles.len(), set.count(PoleKind::Resonance));
    let _ = writeln!(out, "residues evaluated = {}", residues.iter().filter(|a| a.is_some()).count());
    let _ = writeln!(out, "audit defect = {}", set.completeness_defect());
    match exp.k0() {
        Some(k) => {
            let _ = writeln!(out, "k0 = {} {:+}i", sci(k.re, s.digits), sci(k.im, s.digits));
        }
        None => {
            let _ = writeln!(out, "k0 = none");
        }
    }
    if set.completeness_defect() != 0 {
        return Err(Error::PoleCount { region: "audit.csv".into(), winding: set.completeness_defect(), found: 0 });
    }
    Ok(out)
}

/// `evolve.csv` (psi with both reference curves and a `t_alg` marker row per
/// radius) and `asymptotics.csv`.
pub fn cmd_evolve(cfg: &RunConfig) -> Result<String> {
    let s = Setup::new(cfg)?;
    let times = cfg.evolve.schedule().resolve();
    if times.is_empty() || cfg.evolve.r.is_empty() {
        return Err(Error::Config("evolve: empty time schedule or radius list".into()));
    }
    let exp = Expansion::new(s.model.as_ref(), s.state.as_ref(), s.expansion_config(cfg)?)?;
    let k0 = exp.k0();
    let mut w = csv::Writer::from_writer(create(&s.dir, "evolve.csv")?);
    w.write_record(["t", "r", "re_psi", "im_psi", "abs_psi", "truncation", "exp_ref", "alg_ref", "marker"])?;
    let mut asym = String::new();
    let mut out = String::new();
    for &r in &cfg.evolve.r {
        let report = match k0 {
            Some(k0) => Some(AsymptoticsReport::new(s.model.as_ref(), s.state.as_ref(), r, k0)?),
            None => None,
        };
        let mut ts: Vec<(f64, &str)> = times.iter().map(|&t| (t, "")).collect();
        if let Some(ta) = report.and_then(|p| p.t_alg) {
            ts.push((ta, "t_alg"));
        }
        ts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (t, marker) in ts {
            let v = exp.psi(r, t)?;
            let (er, ar) = match report {
                Some(p) => (p.a_exp * (-p.lambda * t).exp(), p.psi_inf.norm() * t.powf(-1.5)),
                None => (f64::NAN, f64::NAN),
            };
            let e = |x: f64| sci(x, s.digits);
            w.write_record([e(t), e(r), e(v.psi.re), e(v.psi.im), e(v.psi.norm()), e(v.truncation), e(er), e(ar), marker.into()])?;
        }
        if let Some(p) = report {
            if asym.is_empty() {
                asym = p.to_csv(s.digits);
            } else {
                asym.push_str(p.to_csv(s.digits).lines().nth(1).unwrap_or(""));
                asym.push('\n');
            }
            let _ = writeln!(out, "r = {r}: |psi_inf| = {}, t_alg = {}", sci(p.psi_inf.norm(), s.digits), p.t_alg.map_or("none".into(), |x| sci(x, s.digits)));
        }
    }
    w.flush()?;
    if !asym.is_empty() {
        std::fs::write(s.dir.join("asymptotics.csv"), asym)?;
    }
    let _ = writeln!(out, "rows = {}", times.len() * cfg.evolve.r.len());
    Ok(out)
}

/// `compare_cn.csv` (per time and radius) and `compare_cn_summary.csv`.
pub fn cmd_compare_cn(cfg: &RunConfig) -> Result<String> {
    let s = Setup::new(cfg)?;
    if cfg.cn.times.is_empty() {
        return Err(Error::Config("compare-cn: empty time schedule (cn.times)".into()));
    }
    let exp = Expansion::new(s.model.as_ref(), s.state.as_ref(), s.expansion_config(cfg)?)?;
    let mut w = csv::Writer::from_writer(create(&s.dir, "compare_cn.csv")?);
    w.write_record(["t", "r", "abs_exp", "abs_cn", "phase_diff", "re_exp", "im_exp", "re_cn", "im_cn"])?;
    let mut summary = csv::Writer::from_writer(create(&s.dir, "compare_cn_summary.csv")?);
    summary.write_record(["t", "box_length", "rel_l2", "rel_l2_abs"])?;
    let mut out = String::new();
    let e = |x: f64| sci(x, s.digits);
    for (i, &t) in cfg.cn.times.iter().enumerate() {
        let l = match cfg.cn.box_length.get(i) {
            Some(&l) => l,
            None => box_length(s.model.as_ref(), s.state.as_ref(), t),
        };
        let c = CnConfig { stencil: cfg.cn.stencil.into(), ..CnConfig::new(cfg.cn.dr, l, t) };
        let grid = cn_evolve(s.model.as_ref(), s.state.as_ref(), &c, &[t])?
            .pop()
            .ok_or_else(|| Error::Tolerance("no Crank-Nicolson snapshot".into()))?;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for j in (0..grid.psi.len()).step_by(cfg.cn.stride) {
            let r = grid.r(j);
            if r > cfg.cn.r_max {
                break;
            }
            let x = exp.psi(r, t)?.psi;
            let y = grid.psi[j];
            let phase = if x.norm() > 0.0 && y.norm() > 0.0 { (y / x).arg() } else { 0.0 };
            w.write_record([e(t), e(r), e(x.norm()), e(y.norm()), e(phase), e(x.re), e(x.im), e(y.re), e(y.im)])?;
            a.push(y);
            b.push(x);
        }
        let (d, da) = (relative_l2(&a, &b), relative_l2_abs(&a, &b));
        summary.write_record([e(t), e(c.cells() as f64 * c.dr), e(d), e(da)])?;
        let _ = writeln!(out, "t = {t}: L = {}, relative L2 {}, |psi| relative L2 {}", c.cells() as f64 * c.dr, sci(d, 4), sci(da, 4));
    }
    w.flush()?;
    summary.flush()?;
    Ok(out)
}

/// `survival.csv`: S(t), its error estimate and the `t^-3` asymptote.
pub fn cmd_survival(cfg: &RunConfig) -> Result<String> {
    let s = Setup::new(cfg)?;
    let times = cfg.survival.schedule().resolve();
    if times.is_empty() {
        return Err(Error::Config("survival: empty time schedule".into()));
    }
    let sv = Survival::new(s.model.as_ref(), s.state.as_ref(), s.expansion_config(cfg)?)?;
    let coef = survival_coefficient(s.model.as_ref(), s.state.as_ref())?;
    let mut w = csv::Writer::from_writer(create(&s.dir, "survival.csv")?);
    w.write_record(["t", "survival", "error", "asymptote"])?;
    let e = |x: f64| sci(x, s.digits);
    for &t in &times {
        let (v, err) = sv.survival(t)?;
        let asym = if t > 0.0 { coef / t.powi(3) } else { f64::INFINITY };
        w.write_record([e(t), e(v), e(err), e(asym)])?;
    }
    w.flush()?;
    let (s0, _) = sv.survival(0.0)?;
    let mut out = String::new();
    let _ = writeln!(out, "S(0) = {}", sci(s0, s.digits));
    let _ = writeln!(out, "coefficient = {}", sci(coef, s.digits));
    Ok(out)
}
