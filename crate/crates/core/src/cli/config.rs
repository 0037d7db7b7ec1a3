//! TOML experiment configuration.
//!
//! ```toml
//! [medium.eps1]
//! kind = "cauchy"          # constant | cauchy | tabulated
//! a = 1.0
//! b = 0.01
//!
//! [medium.eps2]
//! kind = "lorentzian"      # constant | lorentzian | tabulated
//! base = 1.0
//! a = 0.1
//! gamma = 5.0
//!
//! [zgrid]
//! z_min = -60.0
//! z_max = 60.0
//! n = 1201
//! taper = { kind = "cosine", fraction = 0.1 }
//!
//! [omega_grid]
//! spacing = "uniform"      # uniform | natural
//! min = 0.5
//! max = 6.0
//! n = 400
//! ```
//!
//! Command blocks `[eigen]`, `[propagate]`, `[lorentz]` and `[validate]`
//! are described on their types. Tabulated data is given inline or as a
//! two-column (three for complex fields) CSV `file`, resolved relative to
//! the configuration file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{AxisGrid, Taper};
use crate::media::{DispersionFactor, FrequencyWindow, MediumModel, ProfileFactor, Units};
use crate::modes::FrequencyGrid;
use crate::spectral::Boundary;
use crate::wkb::{PhaseTable, DEFAULT_MARGIN_WARNING};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub medium: MediumSpec,
    pub zgrid: ZGridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_grid: Option<OmegaGridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagate: Option<PropagateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lorentz: Option<LorentzSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateSpec>,
}

/// Factors default to vacuum in the chosen units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1: Option<DispersionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu1: Option<DispersionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps2: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu2: Option<ProfileSpec>,
    #[serde(default)]
    pub units: UnitsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DispersionSpec {
    Constant {
        value: f64,
    },
    /// `a + b ω²`.
    Cauchy {
        a: f64,
        b: f64,
    },
    Tabulated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant {
        value: f64,
    },
    /// `base (1 + a / (1 + z²/γ²))`.
    Lorentzian {
        base: f64,
        a: f64,
        gamma: f64,
    },
    Tabulated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsSpec {
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub eps0: f64,
    #[serde(default = "one")]
    pub mu0: f64,
}

impl Default for UnitsSpec {
    fn default() -> Self {
        Self {
            c: 1.0,
            eps0: 1.0,
            mu0: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZGridSpec {
    pub z_min: f64,
    pub z_max: f64,
    pub n: usize,
    #[serde(default)]
    pub taper: TaperSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TaperSpec {
    #[default]
    None,
    Cosine {
        fraction: f64,
    },
    Planck {
        fraction: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Uniform,
    /// Equal steps in `f(ω)` at the window's Rayleigh spacing, from `min`.
    Natural,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaGridSpec {
    pub spacing: Spacing,
    pub min: f64,
    /// Required for uniform spacing, ignored otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    pub n: usize,
}

/// `[eigen]`: the `k` lowest eigenpairs, or the `k` nearest `near_omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenSpec {
    pub k: usize,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub near_omega: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Wkb,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `Ė₀ = −v₂ ∂_z E₀`.
    #[default]
    Right,
    /// `Ė₀ = v₂ ∂_z E₀`.
    Left,
    /// `Ė₀ = 0`.
    Standing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialSpec {
    /// `amplitude · exp(−(z−z0)²/2σ²) · e^{i k0 z}`.
    Gaussian {
        sigma: f64,
        #[serde(default)]
        z0: f64,
        #[serde(default)]
        k0: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        direction: Direction,
    },
    /// `amplitude · e^{ikz}`.
    Plane {
        k: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        direction: Direction,
    },
    /// Samples on the z-grid nodes; `im` defaults to zero.
    Tabulated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        re: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<String>,
        #[serde(default)]
        direction: Direction,
    },
}

/// `[propagate]`: field snapshots at `times`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateSpec {
    pub method: Method,
    pub times: Vec<f64>,
    #[serde(default)]
    pub boundary: Boundary,
    pub initial: InitialSpec,
    /// Modes with validity margin below this are reported in `warnings.txt`.
    #[serde(default = "default_margin_warning")]
    pub margin_warning: f64,
    /// ... when their `|c(ω)|` exceeds this fraction of `max |c|`.
    #[serde(default = "default_warn_fraction")]
    pub warn_fraction: f64,
}

/// `[lorentz]`: first-order mode function of a Lorentzian inhomogeneity.
/// `ε₂`, `μ₂` come from the case (`ε₀(1 + a/(1+z²/γ²))`, `μ₀`); `ε₁` from
/// `[medium.eps1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorentzSpec {
    pub a: f64,
    pub gamma: f64,
    pub k: f64,
    #[serde(default = "default_a_steps")]
    pub a_steps: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion_radius: Option<f64>,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Range of `γ|k − 𝔎|` used for the deviation and decay-rate fit.
    #[serde(default = "default_fit_band")]
    pub fit_band: [f64; 2],
}

/// `[validate]`: monotonicity sampling density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSpec {
    #[serde(default = "default_monotone_samples")]
    pub samples: usize,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        Self {
            samples: default_monotone_samples(),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_margin_warning() -> f64 {
    DEFAULT_MARGIN_WARNING
}

fn default_warn_fraction() -> f64 {
    1e-3
}

fn default_a_steps() -> [f64; 2] {
    [0.005, 0.01]
}

fn default_fit_band() -> [f64; 2] {
    [1.0, 4.0]
}

fn default_monotone_samples() -> usize {
    2001
}

/// Reads numeric columns from a CSV file; a non-numeric first line is a header
/// and `#` starts a comment.
pub fn read_columns(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut out = vec![Vec::new(); columns];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) if values.len() >= columns => {
                for (c, v) in out.iter_mut().zip(values) {
                    c.push(v);
                }
            }
            Ok(values) => {
                return Err(invalid(format!(
                    "{}:{}: expected {columns} columns, found {}",
                    path.display(),
                    lineno + 1,
                    values.len()
                )))
            }
            Err(_) if out[0].is_empty() => continue,
            Err(_) => return Err(invalid(format!("{}:{}: non-numeric value", path.display(), lineno + 1))),
        }
    }
    Ok(out)
}

fn inline_or_file(
    what: &str,
    x: &Option<Vec<f64>>,
    y: &Option<Vec<f64>>,
    file: &Option<String>,
    base: &Path,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match (x, y, file) {
        (Some(x), Some(y), None) => Ok((x.clone(), y.clone())),
        (None, None, Some(f)) => {
            let cols = read_columns(&base.join(f), 2)?;
            Ok((cols[0].clone(), cols[1].clone()))
        }
        _ => Err(invalid(format!("{what}: give either both inline arrays or a file"))),
    }
}

impl DispersionSpec {
    pub fn build(&self, what: &str, base: &Path) -> Result<DispersionFactor> {
        match self {
            Self::Constant { value } => DispersionFactor::constant(*value),
            Self::Cauchy { a, b } => DispersionFactor::cauchy(*a, *b),
            Self::Tabulated { omega, values, file } => {
                let (x, y) = inline_or_file(what, omega, values, file, base)?;
                DispersionFactor::tabulated(x, y)
            }
        }
    }

    fn inlined(&self, what: &str, base: &Path) -> Result<Self> {
        Ok(match self {
            Self::Tabulated { omega, values, file } => {
                let (x, y) = inline_or_file(what, omega, values, file, base)?;
                Self::Tabulated {
                    omega: Some(x),
                    values: Some(y),
                    file: None,
                }
            }
            other => other.clone(),
        })
    }
}

impl ProfileSpec {
    pub fn build(&self, what: &str, base: &Path) -> Result<ProfileFactor> {
        match self {
            Self::Constant { value } => ProfileFactor::constant(*value),
            Self::Lorentzian { base: b, a, gamma } => ProfileFactor::lorentzian(*b, *a, *gamma),
            Self::Tabulated { z, values, file } => {
                let (x, y) = inline_or_file(what, z, values, file, base)?;
                ProfileFactor::tabulated(x, y)
            }
        }
    }

    fn inlined(&self, what: &str, base: &Path) -> Result<Self> {
        Ok(match self {
            Self::Tabulated { z, values, file } => {
                let (x, y) = inline_or_file(what, z, values, file, base)?;
                Self::Tabulated {
                    z: Some(x),
                    values: Some(y),
                    file: None,
                }
            }
            other => other.clone(),
        })
    }
}

impl UnitsSpec {
    pub fn build(&self) -> Result<Units> {
        Units::new(self.c, self.eps0, self.mu0)
    }
}

impl MediumSpec {
    pub fn build(&self, base: &Path) -> Result<MediumModel> {
        let units = self.units.build()?;
        let vac = MediumModel::vacuum(units);
        let eps1 = self
            .eps1
            .as_ref()
            .map(|s| s.build("medium.eps1", base))
            .transpose()?
            .unwrap_or(vac.eps1);
        let mu1 = self
            .mu1
            .as_ref()
            .map(|s| s.build("medium.mu1", base))
            .transpose()?
            .unwrap_or(vac.mu1);
        let eps2 = self
            .eps2
            .as_ref()
            .map(|s| s.build("medium.eps2", base))
            .transpose()?
            .unwrap_or(vac.eps2);
        let mu2 = self
            .mu2
            .as_ref()
            .map(|s| s.build("medium.mu2", base))
            .transpose()?
            .unwrap_or(vac.mu2);
        let mut model = MediumModel::new(eps1, mu1, eps2, mu2).with_units(units);
        if let Some(w) = self.window {
            model = model.with_window(FrequencyWindow::new(w.min, w.max)?);
        }
        model.check()?;
        Ok(model)
    }
}

impl ZGridSpec {
    pub fn build(&self) -> Result<AxisGrid> {
        let taper = match self.taper {
            TaperSpec::None => Taper::None,
            TaperSpec::Cosine { fraction } => Taper::Cosine { fraction },
            TaperSpec::Planck { fraction } => Taper::Planck { fraction },
        };
        AxisGrid::with_taper(self.z_min, self.z_max, self.n, taper)
    }
}

impl OmegaGridSpec {
    pub fn build(&self, model: &MediumModel, table: &PhaseTable) -> Result<FrequencyGrid> {
        let grid = match self.spacing {
            Spacing::Uniform => {
                let max = self
                    .max
                    .ok_or_else(|| invalid("omega_grid.max is required for uniform spacing"))?;
                FrequencyGrid::uniform(self.min, max, self.n)?
            }
            Spacing::Natural => FrequencyGrid::natural(model, table, self.min, self.n)?,
        };
        grid.check_window(model)?;
        Ok(grid)
    }

    /// Upper end of the requested range, if known without a model.
    pub fn upper(&self) -> Option<f64> {
        self.max
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Copy with every tabulated file replaced by inline arrays, so the
    /// result reproduces the run without the original files.
    pub fn resolved(&self, base: &Path) -> Result<Self> {
        let mut out = self.clone();
        let m = &mut out.medium;
        m.eps1 = m.eps1.as_ref().map(|s| s.inlined("medium.eps1", base)).transpose()?;
        m.mu1 = m.mu1.as_ref().map(|s| s.inlined("medium.mu1", base)).transpose()?;
        m.eps2 = m.eps2.as_ref().map(|s| s.inlined("medium.eps2", base)).transpose()?;
        m.mu2 = m.mu2.as_ref().map(|s| s.inlined("medium.mu2", base)).transpose()?;
        if let Some(p) = out.propagate.as_mut() {
            if let InitialSpec::Tabulated {
                z,
                re,
                im,
                file: Some(f),
                direction,
            } = &p.initial
            {
                if z.is_some() || re.is_some() || im.is_some() {
                    return Err(invalid("propagate.initial: give either inline arrays or a file"));
                }
                let cols = read_columns(&base.join(f), 3)?;
                p.initial = InitialSpec::Tabulated {
                    z: Some(cols[0].clone()),
                    re: Some(cols[1].clone()),
                    im: Some(cols[2].clone()),
                    file: None,
                    direction: *direction,
                };
            }
        }
        Ok(out)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }
}

/// Directory against which relative `file` entries resolve.
pub fn base_dir(config_path: &Path) -> PathBuf {
    config_path.parent().map(Path::to_path_buf).unwrap_or_default()
}
