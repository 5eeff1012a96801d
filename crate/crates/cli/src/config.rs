//! Run configuration: a TOML file with one table per module.

use quantum_decay::cn::Stencil;
use quantum_decay::evolution::log_times;
use quantum_decay::jost::{EckartModel, FreeModel, PotentialModel, TabulatedModel};
use quantum_decay::spectral::{DifferenceState, GaussianState, InitialState, TabulatedState};
use quantum_decay::{Complex, Context, Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Default, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub state: StateConfig,
    pub expansion: ExpansionSection,
    pub evolve: EvolveSection,
    pub cn: CnSection,
    pub survival: SurvivalSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Eckart,
    Free,
    /// `file`: CSV with columns `r,v`.
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub a: f64,
    pub rho: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { kind: ModelKind::Eckart, a: 49.25, rho: 1.0, file: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    /// `N r exp(-2 r^2/rho^2)`.
    Gaussian,
    /// Two Gaussians (`rho`, `rho2`) combined so that `C(0) = 0`.
    ZeroC0,
    /// `file`: CSV with columns `r,re,im`.
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateConfig {
    pub kind: StateKind,
    pub rho: f64,
    pub rho2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl Default for StateConfig {
    fn default() -> Self {
        StateConfig { kind: StateKind::Gaussian, rho: 1.0, rho2: 1.5, file: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionSection {
    pub alpha: f64,
    pub k_max: f64,
    /// Significant digits for tolerances and CSV output.
    pub precision: u32,
    pub tol: f64,
}

impl Default for ExpansionSection {
    fn default() -> Self {
        ExpansionSection { alpha: 1.25, k_max: 40.0, precision: 14, tol: 1e-6 }
    }
}

/// Explicit `times`, or a log grid from `t_min` to `t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSchedule {
    pub times: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
}

impl TimeSchedule {
    pub fn resolve(&self) -> Vec<f64> {
        if !self.times.is_empty() {
            return self.times.clone();
        }
        if self.per_decade == 0 {
            return Vec::new();
        }
        log_times(self.t_min, self.t_max, self.per_decade)
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Config(format!("{what}.times must be finite and non-negative")));
        }
        if self.times.is_empty() {
            if !(self.t_min > 0.0 && self.t_max >= self.t_min && self.t_max.is_finite()) {
                return Err(Error::Config(format!("{what}: need 0 < t_min <= t_max, got {} and {}", self.t_min, self.t_max)));
            }
            if self.per_decade == 0 {
                return Err(Error::Config(format!("{what}: empty time schedule (set times or per_decade > 0)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    pub r: Vec<f64>,
    pub times: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
}

impl EvolveSection {
    pub fn schedule(&self) -> TimeSchedule {
        TimeSchedule { times: self.times.clone(), t_min: self.t_min, t_max: self.t_max, per_decade: self.per_decade }
    }
}

impl Default for EvolveSection {
    fn default() -> Self {
        EvolveSection { r: vec![0.5], times: Vec::new(), t_min: 0.1, t_max: 100.0, per_decade: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StencilName {
    Standard,
    Compact,
}

impl From<StencilName> for Stencil {
    fn from(s: StencilName) -> Stencil {
        match s {
            StencilName::Standard => Stencil::Standard,
            StencilName::Compact => Stencil::Compact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CnSection {
    pub dr: f64,
    /// Comparison times, one run each.
    pub times: Vec<f64>,
    /// Box length per time; empty means `L = 2 k95 t + 50`.
    pub box_length: Vec<f64>,
    pub stencil: StencilName,
    pub r_max: f64,
    /// Every `stride`-th grid point is compared.
    pub stride: usize,
}

impl Default for CnSection {
    fn default() -> Self {
        CnSection {
            dr: 0.01953125,
            times: vec![3.0],
            box_length: vec![650.0],
            stencil: StencilName::Standard,
            r_max: 20.0,
            stride: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurvivalSection {
    pub times: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
}

impl SurvivalSection {
    pub fn schedule(&self) -> TimeSchedule {
        TimeSchedule { times: self.times.clone(), t_min: self.t_min, t_max: self.t_max, per_decade: self.per_decade }
    }
}

impl Default for SurvivalSection {
    fn default() -> Self {
        SurvivalSection { times: Vec::new(), t_min: 0.1, t_max: 200.0, per_decade: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out") }
    }
}

fn finite_pos(x: f64, name: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {x}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        finite_pos(self.expansion.alpha, "expansion.alpha")?;
        finite_pos(self.expansion.k_max, "expansion.k_max")?;
        finite_pos(self.expansion.tol, "expansion.tol")?;
        Context::new(self.expansion.precision)?;
        match self.model.kind {
            ModelKind::Eckart => {
                if !self.model.a.is_finite() {
                    return Err(Error::Config("model.a must be finite".into()));
                }
                finite_pos(self.model.rho, "model.rho")?;
            }
            ModelKind::Tabulated if self.model.file.is_none() => {
                return Err(Error::Config("model.kind = \"tabulated\" needs model.file".into()));
            }
            _ => {}
        }
        match self.state.kind {
            StateKind::Gaussian => finite_pos(self.state.rho, "state.rho")?,
            StateKind::ZeroC0 => {
                finite_pos(self.state.rho, "state.rho")?;
                finite_pos(self.state.rho2, "state.rho2")?;
            }
            StateKind::Tabulated if self.state.file.is_none() => {
                return Err(Error::Config("state.kind = \"tabulated\" needs state.file".into()));
            }
            _ => {}
        }
        if self.evolve.r.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::Config("evolve.r must be finite and non-negative".into()));
        }
        self.evolve.schedule().validate("evolve")?;
        self.survival.schedule().validate("survival")?;
        finite_pos(self.cn.dr, "cn.dr")?;
        finite_pos(self.cn.r_max, "cn.r_max")?;
        if self.cn.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Config("cn.times must be finite and non-negative".into()));
        }
        if !self.cn.box_length.is_empty() && self.cn.box_length.len() != self.cn.times.len() {
            return Err(Error::Config("cn.box_length needs one entry per cn.times entry (or none)".into()));
        }
        for &l in &self.cn.box_length {
            finite_pos(l, "cn.box_length")?;
        }
        if self.cn.stride == 0 {
            return Err(Error::Config("cn.stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn context(&self) -> Result<Context> {
        Context::new(self.expansion.precision)
    }

    pub fn build_model(&self) -> Result<Box<dyn PotentialModel>> {
        Ok(match self.model.kind {
            ModelKind::Eckart => Box::new(EckartModel::new(self.model.a, self.model.rho, self.context()?)?),
            ModelKind::Free => Box::new(FreeModel),
            ModelKind::Tabulated => {
                let rows = read_columns(self.model.file.as_deref().unwrap_or(Path::new("")), 2)?;
                Box::new(TabulatedModel::new(rows[0].clone(), rows[1].clone())?)
            }
        })
    }

    pub fn build_state(&self, model: &dyn PotentialModel) -> Result<Box<dyn InitialState>> {
        Ok(match self.state.kind {
            StateKind::Gaussian => Box::new(GaussianState::new(self.state.rho)?),
            StateKind::ZeroC0 => Box::new(DifferenceState::zero_c0(model, self.state.rho, self.state.rho2)?),
            StateKind::Tabulated => {
                let rows = read_columns(self.state.file.as_deref().unwrap_or(Path::new("")), 3)?;
                let psi = rows[1].iter().zip(&rows[2]).map(|(&a, &b)| Complex::new(a, b)).collect();
                Box::new(TabulatedState::new(rows[0].clone(), psi)?)
            }
        })
    }
}

/// Numeric CSV with a header row; returns the first `n` columns.
fn read_columns(path: &Path, n: usize) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cols = vec![Vec::new(); n];
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for (i, col) in cols.iter_mut().enumerate() {
            let x: f64 = rec
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("{}: row {} needs {n} numeric columns", path.display(), line + 2)))?;
            col.push(x);
        }
    }
    Ok(cols)
}
