use std::path::Path;

use double_layer::squeeze::{Coefficient, SqueezeFamily, TestFunction};
use double_layer::{convert_energy, DoubleLayerSpec, UnitSystem};
use serde::Deserialize;

use crate::CliError;

/// Energy unit of the potentials and intensities in a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
pub enum Units {
    #[serde(rename = "eV")]
    Ev,
    #[default]
    #[serde(rename = "nm-2")]
    InverseNm2,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub v1: f64,
    pub l1: f64,
    pub v2: f64,
    pub l2: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub mu: f64,
    pub nu: f64,
    pub tau: f64,
    pub h1: f64,
    pub d1: f64,
    pub h2: f64,
    pub d2: f64,
    pub c: f64,
}

/// Explicit values, a linear range or a decreasing logarithmic range.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Linear { start: f64, stop: f64, points: usize },
    Log { start: f64, stop: f64, per_decade: usize },
}

impl Grid {
    pub fn values(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Grid::Values(v) => v.clone(),
            Grid::Linear { start, stop, points } => {
                if *points == 0 {
                    return Err(CliError::Config(format!("{name}: points must be positive")));
                }
                if *points == 1 {
                    vec![*start]
                } else {
                    (0..*points).map(|i| start + (stop - start) * i as f64 / (*points - 1) as f64).collect()
                }
            }
            Grid::Log { start, stop, per_decade } => double_layer::squeeze::log_grid(*start, *stop, *per_decade)
                .map_err(|e| CliError::Config(format!("{name}: {e}")))?,
        };
        if v.is_empty() {
            return Err(CliError::Config(format!("{name}: grid is empty")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config(format!("{name}: non-finite grid value")));
        }
        let up = v.windows(2).all(|w| w[1] > w[0]);
        let down = v.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(CliError::Config(format!("{name}: grid must be strictly monotone")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WaveMode {
    Scatter { k: f64 },
    Bound { level: usize },
}

/// Re-solve one family coefficient onto the nearest resonance root before running.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapConfig {
    pub coefficient: CoefficientName,
    #[serde(default = "default_window")]
    pub window: f64,
}

fn default_window() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientName {
    H1,
    H2,
    D1,
    D2,
    C,
}

impl From<CoefficientName> for Coefficient {
    fn from(c: CoefficientName) -> Self {
        match c {
            CoefficientName::H1 => Coefficient::H1,
            CoefficientName::H2 => Coefficient::H2,
            CoefficientName::D1 => Coefficient::D1,
            CoefficientName::D2 => Coefficient::D2,
            CoefficientName::C => Coefficient::C,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: String,
    #[serde(default)]
    pub units: Units,
    /// nm⁻² per eV; defaults to 2.62464.
    pub ev_to_inv_nm2: Option<f64>,
    pub spec: Option<SpecConfig>,
    pub family: Option<FamilyConfig>,
    pub snap: Option<SnapConfig>,
    /// ε values at which a family is realized.
    pub eps: Option<Grid>,
    pub k: Option<Grid>,
    pub x: Option<Grid>,
    pub mode: Option<WaveMode>,
    pub test_function: Option<TestFunction>,
    pub tolerance: Option<f64>,
    /// Real k at which |λ₂₁| is recorded along ε-sweeps.
    pub probe_k: Option<f64>,
}

/// Structure source after unit conversion.
#[derive(Debug, Clone, Copy)]
pub enum Source {
    Spec(DoubleLayerSpec),
    Family(SqueezeFamily),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    fn unit_system(&self) -> Result<UnitSystem, CliError> {
        match self.ev_to_inv_nm2 {
            None => Ok(UnitSystem::default()),
            Some(f) if f > 0.0 && f.is_finite() => Ok(UnitSystem::new(f)),
            Some(f) => Err(CliError::Config(format!("ev_to_inv_nm2: must be positive, got {f}"))),
        }
    }

    fn energy(&self, value: f64) -> Result<f64, CliError> {
        Ok(match self.units {
            Units::Ev => convert_energy(value, self.unit_system()?),
            Units::InverseNm2 => value,
        })
    }

    pub fn source(&self) -> Result<Source, CliError> {
        match (&self.spec, &self.family) {
            (Some(_), Some(_)) => Err(CliError::Config("give exactly one of `spec` or `family`, not both".into())),
            (None, None) => Err(CliError::Config("missing `spec` or `family`".into())),
            (Some(s), None) => {
                if self.snap.is_some() {
                    return Err(CliError::Config("`snap` applies to a family only".into()));
                }
                let spec = DoubleLayerSpec::new(self.energy(s.v1)?, s.l1, self.energy(s.v2)?, s.l2, s.r);
                Ok(Source::Spec(double_layer::validate_spec(spec)?))
            }
            (None, Some(_)) => Ok(Source::Family(self.family()?)),
        }
    }

    pub fn family(&self) -> Result<SqueezeFamily, CliError> {
        let f = self.family.ok_or_else(|| CliError::Config("missing `family`".into()))?;
        if self.spec.is_some() {
            return Err(CliError::Config("give exactly one of `spec` or `family`, not both".into()));
        }
        let fam = SqueezeFamily::new(f.mu, f.nu, f.tau, self.energy(f.h1)?, f.d1, self.energy(f.h2)?, f.d2, f.c)
            .map_err(|e| CliError::Config(format!("family: {e}")))?;
        match self.snap {
            Some(s) => Ok(double_layer::squeeze::snap_to_resonance(&fam, s.coefficient.into(), s.window)?),
            None => Ok(fam),
        }
    }

    pub fn grid(&self, which: &Option<Grid>, name: &str) -> Result<Vec<f64>, CliError> {
        which.as_ref().ok_or_else(|| CliError::Config(format!("missing `{name}` grid")))?.values(name)
    }
}
