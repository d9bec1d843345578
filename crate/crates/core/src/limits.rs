//! Squeezed-limit point interactions: resonance residuals, θ and α, limit
//! scattering data, the squeezed bound level and the jump conditions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::Wavenumber;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which of k₁l₁, k₂l₂ keep a non-zero limit σ_j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GSet {
    G11,
    G01,
    G10,
    G00,
}

impl GSet {
    fn from_flags(s1: bool, s2: bool) -> Self {
        match (s1, s2) {
            (true, true) => GSet::G11,
            (false, true) => GSet::G01,
            (true, false) => GSet::G10,
            (false, false) => GSet::G00,
        }
    }
}

/// Divergence cancellation route: first (Δ = 0, X-sets) or second (Y-sets).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Way {
    First,
    Second,
}

/// Limits for one cancellation way: `amp` holds f_j (first) or g_j (second),
/// `zero` holds η_j (first) or β_j (second).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WayChars {
    pub amp: [Option<Complex64>; 2],
    pub zero: [Option<f64>; 2],
}

/// A characteristic whose ε-power is negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub name: &'static str,
    pub power: f64,
}

/// Limit characteristics of a squeezing path.
///
/// σ_j, f_j and g_j share the phase of k_j: real over a well, imaginary over
/// a barrier. Products such as f_j tan σ_j are then real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitChars {
    pub sigma: [Complex64; 2],
    pub first: std::result::Result<WayChars, Divergence>,
    pub second: std::result::Result<WayChars, Divergence>,
}

impl LimitChars {
    pub fn g_set(&self) -> GSet {
        GSet::from_flags(self.sigma[0].norm() > 0.0, self.sigma[1].norm() > 0.0)
    }

    fn way(&self, way: Way) -> Result<&WayChars> {
        let part = match way {
            Way::First => &self.first,
            Way::Second => &self.second,
        };
        part.as_ref().map_err(|d| Error::DivergentCharacteristic { name: d.name, power: d.power })
    }

    /// A_j (first way) or B_j (second way).
    fn term(&self, way: Way, j: usize) -> Result<Complex64> {
        let w = self.way(way)?;
        let names = match way {
            Way::First => [["f1", "f2"], ["eta1", "eta2"]],
            Way::Second => [["g1", "g2"], ["beta1", "beta2"]],
        };
        if self.sigma[j].norm() > 0.0 {
            let amp = w.amp[j].ok_or(Error::DivergentCharacteristic { name: names[0][j], power: f64::NAN })?;
            Ok(amp * crate::xfer::ctan(self.sigma[j]))
        } else {
            let z = w.zero[j].ok_or(Error::DivergentCharacteristic { name: names[1][j], power: f64::NAN })?;
            Ok(Complex64::new(z, 0.0))
        }
    }

    fn amp(&self, way: Way, j: usize) -> Result<Complex64> {
        self.way(way)?.amp[j].ok_or(Error::DivergentCharacteristic {
            name: if way == Way::First { ["f1", "f2"][j] } else { ["g1", "g2"][j] },
            power: f64::NAN,
        })
    }

    fn zero(&self, way: Way, j: usize) -> Result<f64> {
        self.way(way)?.zero[j].ok_or(Error::DivergentCharacteristic {
            name: if way == Way::First { ["eta1", "eta2"][j] } else { ["beta1", "beta2"][j] },
            power: f64::NAN,
        })
    }
}

/// A₁ + A₂ − A₁A₂; zero on the X resonance set of the chars' G-set.
pub fn x_residual(chars: &LimitChars) -> Result<f64> {
    let a1 = chars.term(Way::First, 0)?;
    let a2 = chars.term(Way::First, 1)?;
    Ok((a1 + a2 - a1 * a2).re)
}

/// B₁ + B₂; zero on the Y resonance set of the chars' G-set.
pub fn y_residual(chars: &LimitChars) -> Result<f64> {
    let b1 = chars.term(Way::Second, 0)?;
    let b2 = chars.term(Way::Second, 1)?;
    Ok((b1 + b2).re)
}

/// Limit connection elements θ and (second way only) α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaAlpha {
    pub theta: f64,
    pub alpha: Option<f64>,
    pub way: Way,
    /// Largest minus smallest among the equivalent θ expressions that were finite.
    pub spread: f64,
}

/// Default tolerance on the spread of equivalent θ expressions.
pub const THETA_SPREAD_TOL: f64 = 1e-9;

/// θ from every equivalent expression of the chars' row (mean, spread-checked),
/// plus α for the second way.
pub fn theta_alpha(chars: &LimitChars, way: Way, tol: f64) -> Result<ThetaAlpha> {
    let (s1, s2) = (chars.sigma[0], chars.sigma[1]);
    let (c1, c2, n1, n2) = (s1.cos(), s2.cos(), s1.sin(), s2.sin());
    let set = chars.g_set();
    let (candidates, alpha): (Vec<Complex64>, Option<Complex64>) = match way {
        Way::First => {
            let cands = match set {
                GSet::G11 => {
                    let (f1, f2) = (chars.amp(way, 0)?, chars.amp(way, 1)?);
                    vec![(c1 - f1 * n1) / c2, c1 / (c2 - f2 * n2), -f1 * n1 / (f2 * n2)]
                }
                GSet::G01 => {
                    let (e1, f2) = (chars.zero(way, 0)?, chars.amp(way, 1)?);
                    vec![(1.0 - e1) / c2, 1.0 / (c2 - f2 * n2), -e1 / (f2 * n2)]
                }
                GSet::G10 => {
                    let (f1, e2) = (chars.amp(way, 0)?, chars.zero(way, 1)?);
                    vec![c1 - f1 * n1, c1 / (1.0 - e2), -f1 * n1 / e2]
                }
                GSet::G00 => {
                    let (e1, e2) = (chars.zero(way, 0)?, chars.zero(way, 1)?);
                    vec![(1.0 - e1).into(), (1.0 / (1.0 - e2)).into(), (-e1 / e2).into()]
                }
            };
            (cands, None)
        }
        Way::Second => match set {
            GSet::G11 => {
                let (g1, g2) = (chars.amp(way, 0)?, chars.amp(way, 1)?);
                (vec![c1 / c2, -g1 * n1 / (g2 * n2)], Some(g1 * g2 * n1 * n2))
            }
            GSet::G01 => {
                let (b1, g2) = (chars.zero(way, 0)?, chars.amp(way, 1)?);
                (vec![1.0 / c2, -b1 / (g2 * n2)], Some(b1 * g2 * n2))
            }
            GSet::G10 => {
                let (g1, b2) = (chars.amp(way, 0)?, chars.zero(way, 1)?);
                (vec![c1, -g1 * n1 / b2], Some(g1 * b2 * n1))
            }
            GSet::G00 => {
                let (b1, b2) = (chars.zero(way, 0)?, chars.zero(way, 1)?);
                (vec![Complex64::new(1.0, 0.0), (-b1 / b2).into()], Some((b1 * b2).into()))
            }
        },
    };
    let finite: Vec<f64> = candidates.iter().map(|z| z.re).filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::NonFinite("theta"));
    }
    let mean = finite.iter().sum::<f64>() / finite.len() as f64;
    let hi = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    if spread > tol * mean.abs().max(1.0) {
        return Err(Error::OffResonance { spread });
    }
    if mean == 0.0 {
        return Err(Error::ThetaZero);
    }
    Ok(ThetaAlpha { theta: mean, alpha: alpha.map(|a| a.re), way, spread })
}

/// Type of the limiting point interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InteractionKind {
    XType,
    YType,
    Separated,
}

/// Squeezed point interaction and its scattering data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedInteraction {
    pub kind: InteractionKind,
    pub theta: f64,
    pub alpha: f64,
    pub kappa: Option<f64>,
}

impl SqueezedInteraction {
    /// Dirichlet-decoupled limit: zero transmission.
    pub fn separated() -> Self {
        Self { kind: InteractionKind::Separated, theta: f64::NAN, alpha: f64::NAN, kappa: None }
    }

    /// Limit a(k), b(k); an error for separated interactions.
    pub fn scattering(&self, k: Wavenumber) -> Result<crate::xfer::ScatteringData> {
        if self.kind == InteractionKind::Separated {
            return Err(Error::Separated);
        }
        let inv = 1.0 / self.theta;
        let term = match self.kind {
            InteractionKind::YType => I * self.alpha / k.to_complex(),
            _ => Complex64::new(0.0, 0.0),
        };
        Ok(crate::xfer::ScatteringData {
            a: 0.5 * (self.theta + inv + term),
            b: 0.5 * (self.theta - inv - term),
        })
    }
}

pub fn squeezed_scattering(ta: &ThetaAlpha) -> Result<SqueezedInteraction> {
    if ta.theta == 0.0 || !ta.theta.is_finite() {
        return Err(Error::ThetaZero);
    }
    match ta.way {
        Way::First => Ok(SqueezedInteraction { kind: InteractionKind::XType, theta: ta.theta, alpha: 0.0, kappa: None }),
        Way::Second => {
            let alpha = ta.alpha.unwrap_or(0.0);
            let mut si = SqueezedInteraction { kind: InteractionKind::YType, theta: ta.theta, alpha, kappa: None };
            si.kappa = squeezed_bound_level(ta)?;
            Ok(si)
        }
    }
}

/// κ = −α/(θ + θ⁻¹) when positive.
pub fn squeezed_bound_level(ta: &ThetaAlpha) -> Result<Option<f64>> {
    if ta.way != Way::Second {
        return Err(Error::NotSecondWay);
    }
    let den = ta.theta + 1.0 / ta.theta;
    if den == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let kappa = -ta.alpha.unwrap_or(0.0) / den;
    Ok((kappa > 0.0).then_some(kappa))
}

/// The set-specific closed forms of the squeezed level, for cross-checking.
pub fn bound_level_by_set(chars: &LimitChars) -> Result<Option<f64>> {
    let w = Way::Second;
    let (s1, s2) = (chars.sigma[0], chars.sigma[1]);
    let sec2 = |s: Complex64| 1.0 / (s.cos() * s.cos());
    let kappa = match chars.g_set() {
        GSet::G11 => {
            let (g1, g2) = (chars.amp(w, 0)?, chars.amp(w, 1)?);
            -(g1 * g2 * crate::xfer::ctan(s1) * crate::xfer::ctan(s2)) / (sec2(s1) + sec2(s2))
        }
        GSet::G01 => {
            let b1 = chars.zero(w, 0)?;
            Complex64::new(b1 * b1, 0.0) / (1.0 + sec2(s2))
        }
        GSet::G10 => {
            let b2 = chars.zero(w, 1)?;
            Complex64::new(b2 * b2, 0.0) / (1.0 + sec2(s1))
        }
        GSet::G00 => Complex64::new(-0.5 * chars.zero(w, 0)? * chars.zero(w, 1)?, 0.0),
    };
    Ok((kappa.re > 0.0).then_some(kappa.re))
}

/// Connects (ψ, ψ′) across the point interaction from x = −0 to x = +0.
pub fn jump_conditions(
    si: &SqueezedInteraction,
    psi: Complex64,
    dpsi: Complex64,
) -> Result<(Complex64, Complex64)> {
    if si.kind == InteractionKind::Separated {
        return Err(Error::Separated);
    }
    Ok((si.theta * psi, dpsi / si.theta + si.alpha * psi))
}
