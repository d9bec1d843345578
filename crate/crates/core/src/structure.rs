//! Units, layer specifications and wavenumbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conversion between eV and the internal nm⁻² potential unit (ħ²/2m* = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub ev_to_inv_nm2: f64,
}

impl UnitSystem {
    pub const DEFAULT_EV_TO_INV_NM2: f64 = 2.62464;

    pub fn new(ev_to_inv_nm2: f64) -> Self {
        Self { ev_to_inv_nm2 }
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self { ev_to_inv_nm2: Self::DEFAULT_EV_TO_INV_NM2 }
    }
}

/// Converts an energy in eV to a potential strength in nm⁻².
pub fn convert_energy(value_ev: f64, units: UnitSystem) -> f64 {
    value_ev * units.ev_to_inv_nm2
}

/// One rectangular layer: strength `v` (nm⁻²) over width `l` (nm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub v: f64,
    pub l: f64,
}

impl LayerSpec {
    pub fn new(v: f64, l: f64) -> Self {
        Self { v, l }
    }

    pub fn absent() -> Self {
        Self { v: 0.0, l: 0.0 }
    }
}

/// Two layers separated by a gap `r`; layer 1 starts at x = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleLayerSpec {
    pub layer1: LayerSpec,
    pub layer2: LayerSpec,
    pub r: f64,
}

impl DoubleLayerSpec {
    pub fn new(v1: f64, l1: f64, v2: f64, l2: f64, r: f64) -> Self {
        Self { layer1: LayerSpec::new(v1, l1), layer2: LayerSpec::new(v2, l2), r }
    }

    pub fn free() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// Total extent l₁ + r + l₂.
    pub fn extent(&self) -> f64 {
        self.layer1.l + self.r + self.layer2.l
    }

    /// Interface positions 0, l₁, l₁+r, L.
    pub fn breakpoints(&self) -> [f64; 4] {
        let x1 = self.layer1.l;
        let x2 = x1 + self.r;
        [0.0, x1, x2, x2 + self.layer2.l]
    }

    /// Potential at `x` (nm⁻²), zero outside the structure.
    pub fn potential_at(&self, x: f64) -> f64 {
        let [x0, x1, x2, x3] = self.breakpoints();
        if x > x0 && x < x1 {
            self.layer1.v
        } else if x > x2 && x < x3 {
            self.layer2.v
        } else {
            0.0
        }
    }

    /// Largest |V_j| over layers of positive width.
    pub fn max_abs_potential(&self) -> f64 {
        let mut m: f64 = 0.0;
        for layer in [self.layer1, self.layer2] {
            if layer.l > 0.0 {
                m = m.max(layer.v.abs());
            }
        }
        m
    }

    /// Deepest well strength among layers of positive width, if any is negative.
    pub fn deepest_well(&self) -> Option<f64> {
        [self.layer1, self.layer2]
            .iter()
            .filter(|layer| layer.l > 0.0 && layer.v < 0.0)
            .map(|layer| layer.v)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
    }
}

/// Checks widths and strengths; returns the spec unchanged when valid.
pub fn validate_spec(spec: DoubleLayerSpec) -> Result<DoubleLayerSpec> {
    let fields = [
        ("layer1.v", spec.layer1.v, false),
        ("layer1.l", spec.layer1.l, true),
        ("layer2.v", spec.layer2.v, false),
        ("layer2.l", spec.layer2.l, true),
        ("r", spec.r, true),
    ];
    for (name, value, is_width) in fields {
        if !value.is_finite() {
            return Err(Error::InvalidSpec { field: name, reason: "non-finite value" });
        }
        if is_width && value < 0.0 {
            return Err(Error::InvalidSpec { field: name, reason: "negative width" });
        }
    }
    Ok(spec)
}

/// A wavenumber that is either real positive (scattering) or k = iκ, κ > 0 (bound).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Wavenumber {
    Real(f64),
    Imaginary(f64),
}

impl Wavenumber {
    pub fn real(k: f64) -> Result<Self> {
        if k > 0.0 && k.is_finite() {
            Ok(Self::Real(k))
        } else {
            Err(Error::InvalidWavenumber(k))
        }
    }

    pub fn imaginary(kappa: f64) -> Result<Self> {
        if kappa > 0.0 && kappa.is_finite() {
            Ok(Self::Imaginary(kappa))
        } else {
            Err(Error::InvalidWavenumber(kappa))
        }
    }

    /// Real wavenumber from a kinetic energy already in nm⁻².
    pub fn from_energy(e: f64) -> Result<Self> {
        Self::real(e.sqrt())
    }

    /// Builds from a complex value, rejecting anything off the two rays.
    pub fn from_complex(k: num_complex::Complex64) -> Result<Self> {
        if k.im == 0.0 && k.re > 0.0 {
            Self::real(k.re)
        } else if k.re == 0.0 && k.im > 0.0 {
            Self::imaginary(k.im)
        } else {
            Err(Error::GeneralComplexWavenumber { re: k.re, im: k.im })
        }
    }

    /// k², real on both rays.
    pub fn k_squared(self) -> f64 {
        match self {
            Self::Real(k) => k * k,
            Self::Imaginary(kappa) => -kappa * kappa,
        }
    }

    pub fn to_complex(self) -> num_complex::Complex64 {
        match self {
            Self::Real(k) => num_complex::Complex64::new(k, 0.0),
            Self::Imaginary(kappa) => num_complex::Complex64::new(0.0, kappa),
        }
    }

    pub fn is_real(self) -> bool {
        matches!(self, Self::Real(_))
    }
}
