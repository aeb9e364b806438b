//! Run configuration: a TOML document with one table per concern.
//!
//! ```toml
//! seed = 0
//! out_path = "run.csv"
//!
//! [grid]
//! dim = 1
//! lengths = [1.0]
//! n = [64]
//!
//! [params]
//! lambda = 1.0
//! kappa = 1.0
//! q = 3.0
//! r = 4.0
//!
//! [scheme]
//! equation = "acgl"
//! t_end = 0.5
//!
//! [initial]
//! kind = "sine_mode"
//! amplitude = 0.1
//! ```
//!
//! `[forcing]` and `[diagnostics]` are optional. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::convex::Params;
use crate::diagnostics::DEFAULT_BLOWUP_THRESHOLD;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, TimeSeriesField};
use crate::stepper::{Equation, RunControl, SchemeConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub lengths: Vec<f64>,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    #[default]
    Zero,
    SineMode,
    Gaussian,
    File,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub kind: InitialKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Sine mode per axis, 1-based; defaults to the first mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_indices: Option<Vec<usize>>,
    /// Standard deviation of the Gaussian bump, in units of length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            kind: InitialKind::Zero,
            amplitude: 1.0,
            mode_indices: None,
            width: None,
            path: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingKind {
    #[default]
    Zero,
    /// `F(x, t) = (amplitude, 0)` for `t` in `[0, t_end)`.
    Constant,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    #[serde(default)]
    pub kind: ForcingKind,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self {
            kind: ForcingKind::Zero,
            amplitude: 0.0,
            path: None,
        }
    }
}

fn default_record_every() -> usize {
    1
}

fn default_threshold() -> f64 {
    DEFAULT_BLOWUP_THRESHOLD
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            record_every: 1,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_path: Option<String>,
    pub grid: GridConfig,
    pub params: Params,
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
}

/// Everything a run needs, with files loaded.
#[derive(Debug, Clone)]
pub struct RunInputs {
    pub grid: Grid,
    pub params: Params,
    pub scheme: SchemeConfig,
    pub u0: Field,
    pub forcing: TimeSeriesField,
    pub control: RunControl,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn config_err(e: Error) -> Error {
    match e {
        Error::InvalidGrid(m) | Error::InvalidParams(m) | Error::InvalidArgument(m) => Error::Config(m),
        other => other,
    }
}

impl RunConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.dim, &self.grid.lengths, &self.grid.n).map_err(config_err)
    }

    /// Checks every invariant that does not need the filesystem.
    pub fn validate(&self) -> Result<()> {
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config("seed must be at most 2^63 - 1".into()));
        }
        let g = self.build_grid()?;
        self.params.validate(g.dim()).map_err(config_err)?;
        self.scheme.validate().map_err(config_err)?;
        if self.scheme.equation == Equation::AeEpsMu && !(self.params.mu > 0.0) {
            return Err(Error::Config("equation ae_eps_mu needs mu > 0".into()));
        }
        if self.scheme.equation != Equation::Acgl && !(self.params.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "equation {:?} needs epsilon > 0",
                self.scheme.equation
            )));
        }
        let d = &self.diagnostics;
        if d.record_every == 0 {
            return Err(Error::Config("record_every must be >= 1".into()));
        }
        if !(d.blowup_threshold > 0.0) || d.blowup_threshold.is_nan() {
            return Err(Error::Config("blowup_threshold must be > 0".into()));
        }
        let init = &self.initial;
        if !init.amplitude.is_finite() {
            return Err(Error::Config("initial amplitude must be finite".into()));
        }
        if let Some(m) = &init.mode_indices {
            if m.len() != g.dim() || m.contains(&0) {
                return Err(Error::Config(format!(
                    "mode_indices needs {} entries, each >= 1",
                    g.dim()
                )));
            }
        }
        if let Some(w) = init.width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Config("gaussian width must be > 0".into()));
            }
        }
        if init.kind == InitialKind::File && init.path.is_none() {
            return Err(Error::Config("initial kind \"file\" needs a path".into()));
        }
        if !self.forcing.amplitude.is_finite() {
            return Err(Error::Config("forcing amplitude must be finite".into()));
        }
        if self.forcing.kind == ForcingKind::File && self.forcing.path.is_none() {
            return Err(Error::Config("forcing kind \"file\" needs a path".into()));
        }
        Ok(())
    }

    pub fn run_control(&self) -> RunControl {
        RunControl {
            record_every: self.diagnostics.record_every,
            blowup_threshold: self.diagnostics.blowup_threshold,
        }
    }

    pub fn initial_field(&self, g: &Grid, base: &Path) -> Result<Field> {
        let init = &self.initial;
        let a = init.amplitude;
        Ok(match init.kind {
            InitialKind::Zero => g.zeros(),
            InitialKind::SineMode => {
                let modes = init.mode_indices.clone().unwrap_or_else(|| vec![1; g.dim()]);
                let lengths = g.lengths().to_vec();
                g.sample(|x| {
                    let v: f64 = x
                        .iter()
                        .zip(&modes)
                        .zip(&lengths)
                        .map(|((xi, k), l)| (*k as f64 * std::f64::consts::PI * xi / l).sin())
                        .product();
                    (a * v, 0.0)
                })
            }
            InitialKind::Gaussian => {
                let w = init.width.unwrap_or(0.1);
                let centre: Vec<f64> = g.lengths().iter().map(|l| 0.5 * l).collect();
                g.sample(|x| {
                    let d2: f64 = x.iter().zip(&centre).map(|(xi, c)| (xi - c) * (xi - c)).sum();
                    (a * (-d2 / (2.0 * w * w)).exp(), 0.0)
                })
            }
            InitialKind::File => {
                let path = resolve(base, init.path.as_deref().unwrap_or_default());
                super::io::read_field(&path, g)?
            }
        })
    }

    pub fn forcing_field(&self, g: &Grid, base: &Path) -> Result<TimeSeriesField> {
        let horizon = self.scheme.t_end;
        Ok(match self.forcing.kind {
            ForcingKind::Zero => TimeSeriesField::zero(g, horizon),
            ForcingKind::Constant => {
                let a = self.forcing.amplitude;
                TimeSeriesField::constant(g.sample(|_| (a, 0.0)), horizon)
            }
            ForcingKind::File => {
                let path = resolve(base, self.forcing.path.as_deref().unwrap_or_default());
                super::io::read_time_series(&path, g)?
            }
        })
    }

    /// Resolves file references relative to `base` and loads them.
    pub fn materialize(&self, base: &Path) -> Result<RunInputs> {
        self.validate()?;
        let grid = self.build_grid()?;
        let u0 = self.initial_field(&grid, base)?;
        let forcing = self.forcing_field(&grid, base)?;
        Ok(RunInputs {
            params: self.params,
            scheme: self.scheme,
            control: self.run_control(),
            u0,
            forcing,
            grid,
        })
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
