//! Power-law squeezing families, (μ, ν, τ) region classification, ε-sweeps of
//! bound ladders and distributional δ′ pairings.
//!
//! A family realizes V₁ = ε^{−μ}h₁, V₂ = ε^{−ν}h₂, l₁ = εd₁,
//! l₂ = ε^{1−μ+ν}d₂ and r = ε^τ c.

use std::fmt;

use num_complex::Complex64;
use crate::par::*;
use serde::{Deserialize, Serialize};

use crate::bound::{build_chi_problem, find_roots_with, BoundLadder, ChiConfig, ChiProblem, WellBranch};
use crate::error::{Error, Result};
use crate::kernels::{c as kc, s as ks};
use crate::limits::{
    squeezed_bound_level, squeezed_scattering, theta_alpha, Divergence, GSet, LimitChars, SqueezedInteraction,
    ThetaAlpha, Way, WayChars,
};
use crate::structure::{DoubleLayerSpec, Wavenumber};
use crate::xfer::{scattering_data, total_matrix, ScatteringData};

/// Equalities between powers are tested with this tolerance.
pub const POWER_TOL: f64 = 1e-12;

/// Default smallest ε accepted by [`SqueezeFamily::realize`].
pub const DEFAULT_FLOOR: f64 = 1e-12;

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= POWER_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeFamily {
    pub mu: f64,
    pub nu: f64,
    pub tau: f64,
    /// Intensities in nm⁻².
    pub h1: f64,
    pub h2: f64,
    /// Width and gap coefficients in nm.
    pub d1: f64,
    pub d2: f64,
    pub c: f64,
}

impl SqueezeFamily {
    #[allow(clippy::too_many_arguments)]
    pub fn new(mu: f64, nu: f64, tau: f64, h1: f64, d1: f64, h2: f64, d2: f64, c: f64) -> Result<Self> {
        let f = Self { mu, nu, tau, h1, h2, d1, d2, c };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu, self.nu, self.tau, self.h1, self.h2, self.d1, self.d2, self.c];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidFamily("non-finite parameter".into()));
        }
        if !(self.mu > 0.0 && self.nu > 0.0 && self.tau > 0.0) {
            return Err(Error::InvalidFamily("powers mu, nu, tau must be positive".into()));
        }
        if !(self.d1 > 0.0 && self.d2 > 0.0 && self.c > 0.0) {
            return Err(Error::InvalidFamily("d1, d2, c must be positive".into()));
        }
        Ok(())
    }

    fn l2_power(&self) -> f64 {
        1.0 - self.mu + self.nu
    }

    pub fn realize(&self, eps: f64) -> Result<DoubleLayerSpec> {
        self.realize_with_floor(eps, DEFAULT_FLOOR)
    }

    pub fn realize_with_floor(&self, eps: f64, floor: f64) -> Result<DoubleLayerSpec> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidGrid(format!("epsilon must be positive, got {eps}")));
        }
        if eps < floor {
            return Err(Error::EpsilonBelowFloor { eps, floor });
        }
        if self.l2_power() <= 0.0 {
            return Err(Error::InvalidFamily(format!(
                "1 - mu + nu = {} must be positive so that l2 shrinks",
                self.l2_power()
            )));
        }
        Ok(DoubleLayerSpec::new(
            eps.powf(-self.mu) * self.h1,
            eps * self.d1,
            eps.powf(-self.nu) * self.h2,
            eps.powf(self.l2_power()) * self.d2,
            eps.powf(self.tau) * self.c,
        ))
    }

    pub fn region(&self) -> RegionLabel {
        classify_region(self.mu, self.nu, self.tau)
    }

    /// Reference-well branch kept for the whole sweep.
    pub fn sweep_branch(&self) -> Result<WellBranch> {
        match (self.h1 < 0.0, self.h2 < 0.0) {
            (false, false) => Err(Error::NoBoundSector),
            (true, false) => Ok(WellBranch::First),
            (false, true) => Ok(WellBranch::Second),
            (true, true) => {
                if (same(self.mu, self.nu) && self.h1 <= self.h2) || self.mu > self.nu + POWER_TOL {
                    Ok(WellBranch::First)
                } else {
                    Ok(WellBranch::Second)
                }
            }
        }
    }

    /// ε-power exponent of ρ on a branch; positive means ρ → 0.
    pub fn rho_power(&self, branch: WellBranch) -> f64 {
        match branch {
            WellBranch::First => 1.0 - self.mu / 2.0,
            WellBranch::Second => 1.0 - self.mu + self.nu / 2.0,
        }
    }

    /// χ-problem at ε written directly in powers of ε, so that no
    /// ε^{−μ}·ε² products are formed.
    pub fn chi_problem(&self, eps: f64, branch: WellBranch) -> Result<ChiProblem> {
        let (mu, nu, tau) = (self.mu, self.nu, self.tau);
        let p = |e: f64| eps.powf(e);
        match branch {
            WellBranch::First => ChiProblem::new(
                branch,
                p(1.0 - mu / 2.0) * self.h1.abs().sqrt() * self.d1,
                p(2.0 - nu) * self.h2 * self.d1 * self.d1,
                p(nu - mu) * self.d2 / self.d1,
                p(tau - 1.0) * self.c / self.d1,
                eps * self.d1,
            ),
            WellBranch::Second => ChiProblem::new(
                branch,
                p(1.0 - mu + nu / 2.0) * self.h2.abs().sqrt() * self.d2,
                p(2.0 - 3.0 * mu + 2.0 * nu) * self.h1 * self.d2 * self.d2,
                p(mu - nu) * self.d1 / self.d2,
                p(tau - 1.0 + mu - nu) * self.c / self.d2,
                p(1.0 - mu + nu) * self.d2,
            ),
        }
    }
}

/// Sets of the two trihedral angles in (μ, ν, τ)-space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    P1,
    K1,
    L1,
    N1,
    Q1,
    O1,
    S1,
    I1,
    P2,
    K2,
    L2,
    N2,
    Q2,
    O2,
    S2,
    I2,
    #[serde(rename = "outside")]
    Outside,
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionLabel::Outside => "outside",
            other => return write!(f, "{other:?}"),
        };
        f.write_str(s)
    }
}

impl RegionLabel {
    /// Cancellation way whose resonance set lives on this region.
    pub fn way(self) -> Option<Way> {
        use RegionLabel::*;
        match self {
            P1 | K1 | L1 | S1 => Some(Way::First),
            P2 | K2 | L2 | S2 | N2 | Q2 | O2 | I2 => Some(Way::Second),
            _ => None,
        }
    }
}

#[derive(Clone, Copy)]
struct Axes {
    mu_two: bool,
    mu_open: bool,
    nu_edge: bool,
    nu_above: bool,
}

fn axes(mu: f64, nu: f64) -> Option<Axes> {
    let mu_two = same(mu, 2.0);
    let mu_open = mu > 1.0 + POWER_TOL && mu < 2.0 && !mu_two;
    if !(mu_two || mu_open) {
        return None;
    }
    let edge = 2.0 * (mu - 1.0);
    let nu_edge = same(nu, edge);
    let nu_above = nu > edge && !nu_edge;
    (nu_edge || nu_above).then_some(Axes { mu_two, mu_open, nu_edge, nu_above })
}

fn pick(a: Axes, vertex: RegionLabel, k: RegionLabel, l: RegionLabel, s: RegionLabel) -> RegionLabel {
    match (a.mu_two, a.nu_edge) {
        (true, true) => vertex,
        (false, true) => k,
        (true, false) => l,
        (false, false) => s,
    }
}

/// Partitions (μ, ν, τ)-space: the second-angle sets take τ ≥ 2(μ−1), the
/// first-angle sets μ−1 ≤ τ < 2(μ−1), everything else is outside.
pub fn classify_region(mu: f64, nu: f64, tau: f64) -> RegionLabel {
    use RegionLabel::*;
    let Some(a) = axes(mu, nu) else { return Outside };
    debug_assert!(a.mu_two != a.mu_open && a.nu_edge != a.nu_above);
    let (lo, hi) = (mu - 1.0, 2.0 * (mu - 1.0));
    if same(tau, hi) {
        pick(a, P2, K2, L2, S2)
    } else if tau > hi {
        pick(a, N2, Q2, O2, I2)
    } else if same(tau, lo) {
        pick(a, P1, K1, L1, S1)
    } else if tau > lo {
        pick(a, N1, Q1, O1, I1)
    } else {
        Outside
    }
}

/// Label from the first-angle definitions alone (τ ≥ μ−1 without upper cap),
/// as used by the δ′-strength table.
pub fn first_angle_label(mu: f64, nu: f64, tau: f64) -> RegionLabel {
    use RegionLabel::*;
    let Some(a) = axes(mu, nu) else { return Outside };
    let lo = mu - 1.0;
    if same(tau, lo) {
        pick(a, P1, K1, L1, S1)
    } else if tau > lo {
        pick(a, N1, Q1, O1, I1)
    } else {
        Outside
    }
}

fn limit_value(power: f64, value: Complex64) -> Option<Complex64> {
    if same(power, 0.0) {
        Some(value)
    } else if power > 0.0 {
        Some(Complex64::new(0.0, 0.0))
    } else {
        None
    }
}

/// σ_j, f_j, η_j, g_j, β_j limits of the family along ε → 0.
pub fn limit_chars_of(family: &SqueezeFamily) -> Result<LimitChars> {
    let SqueezeFamily { mu, nu, tau, h1, h2, d1, d2, c } = *family;
    let root = |h: f64| Complex64::new(-h, 0.0).sqrt();
    let (r1, r2) = (root(h1), root(h2));
    let sig_pow = [1.0 - mu / 2.0, 1.0 - mu + nu / 2.0];
    let sig_val = [r1 * d1, r2 * d2];
    let mut sigma = [Complex64::new(0.0, 0.0); 2];
    for j in 0..2 {
        sigma[j] = limit_value(sig_pow[j], sig_val[j]).ok_or(Error::DivergentCharacteristic {
            name: ["sigma1", "sigma2"][j],
            power: sig_pow[j],
        })?;
    }
    let live = [sigma[0].norm() > 0.0, sigma[1].norm() > 0.0];
    let hd = [h1 * d1, h2 * d2];

    let build = |amp_names: [&'static str; 2],
                 zero_names: [&'static str; 2],
                 amp_pow: [f64; 2],
                 amp_val: [Complex64; 2],
                 zero_pow: f64,
                 zero_val: [f64; 2]|
     -> std::result::Result<WayChars, Divergence> {
        let mut w = WayChars { amp: [None, None], zero: [None, None] };
        for j in 0..2 {
            w.amp[j] = limit_value(amp_pow[j], amp_val[j]);
            w.zero[j] = limit_value(zero_pow, zero_val[j].into()).map(|z| z.re);
            if live[j] && w.amp[j].is_none() {
                return Err(Divergence { name: amp_names[j], power: amp_pow[j] });
            }
            if !live[j] && w.zero[j].is_none() {
                return Err(Divergence { name: zero_names[j], power: zero_pow });
            }
        }
        Ok(w)
    };

    let first = build(
        ["f1", "f2"],
        ["eta1", "eta2"],
        [tau - mu / 2.0, tau - nu / 2.0],
        [r1 * c, r2 * c],
        tau - mu + 1.0,
        [-hd[0] * c, -hd[1] * c],
    );
    let sc = c.sqrt();
    let second = build(
        ["g1", "g2"],
        ["beta1", "beta2"],
        [(tau - mu) / 2.0, (tau - nu) / 2.0],
        [r1 * sc, r2 * sc],
        tau / 2.0 - mu + 1.0,
        [-hd[0] * sc, -hd[1] * sc],
    );
    Ok(LimitChars { sigma, first, second })
}

/// Resonance-row name such as "Y11" for a region, if the region carries one.
pub fn resonance_set(region: RegionLabel) -> Option<&'static str> {
    use RegionLabel::*;
    Some(match region {
        P1 => "X11",
        K1 => "X01",
        L1 => "X10",
        S1 => "X00",
        P2 | N2 => "Y11",
        K2 | Q2 => "Y01",
        L2 | O2 => "Y10",
        S2 | I2 => "Y00",
        _ => return None,
    })
}

struct LayerKernels {
    a: f64,
    c: f64,
    s: f64,
}

fn layer_kernels(h: f64, d: f64) -> LayerKernels {
    let w = -h * d * d;
    LayerKernels { a: -h * d, c: kc(w), s: ks(w) }
}

/// The family's explicit resonance condition (zero on resonance). X rows are
/// in nm, Y rows in nm⁻¹.
pub fn resonance_residual_of(family: &SqueezeFamily) -> Result<f64> {
    let l1 = layer_kernels(family.h1, family.d1);
    let l2 = layer_kernels(family.h2, family.d2);
    // √(−h) tan(√(−h) d) = a S / C and cot(√(−h) d)/√(−h) = C / (a S).
    let tan_part = |l: &LayerKernels| l.a * l.s / l.c;
    let cot_part = |l: &LayerKernels| l.c / (l.a * l.s);
    let region = family.region();
    let set = resonance_set(region).ok_or_else(|| Error::NoResonanceCondition(region.to_string()))?;
    Ok(match set {
        "X11" => cot_part(&l1) + cot_part(&l2) - family.c,
        "X01" => 1.0 / l1.a + cot_part(&l2) - family.c,
        "X10" => cot_part(&l1) + 1.0 / l2.a - family.c,
        "X00" => 1.0 / l1.a + 1.0 / l2.a - family.c,
        "Y11" => tan_part(&l1) + tan_part(&l2),
        "Y01" => -l1.a - tan_part(&l2),
        "Y10" => tan_part(&l1) - l2.a,
        _ => -l1.a - l2.a,
    })
}

/// Pole-free multiple of [`resonance_residual_of`], used for root refinement.
pub fn cleared_resonance_residual(family: &SqueezeFamily) -> Result<f64> {
    let l1 = layer_kernels(family.h1, family.d1);
    let l2 = layer_kernels(family.h2, family.d2);
    let c = family.c;
    let region = family.region();
    let set = resonance_set(region).ok_or_else(|| Error::NoResonanceCondition(region.to_string()))?;
    Ok(match set {
        "X11" => l1.c * l2.a * l2.s + l2.c * l1.a * l1.s - c * l1.a * l1.s * l2.a * l2.s,
        "X01" => l2.a * l2.s + l1.a * l2.c - c * l1.a * l2.a * l2.s,
        "X10" => l2.a * l1.c + l1.a * l1.s - c * l1.a * l1.s * l2.a,
        "X00" => l1.a + l2.a - c * l1.a * l2.a,
        "Y11" => l1.a * l1.s * l2.c + l2.a * l2.s * l1.c,
        "Y01" => -(l1.a * l2.c + l2.a * l2.s),
        "Y10" => l1.a * l1.s - l2.a * l1.c,
        _ => -l1.a - l2.a,
    })
}

/// Family coefficient that [`snap_to_resonance`] may adjust.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coefficient {
    H1,
    H2,
    D1,
    D2,
    C,
}

fn with_coefficient(family: &SqueezeFamily, which: Coefficient, v: f64) -> SqueezeFamily {
    let mut f = *family;
    match which {
        Coefficient::H1 => f.h1 = v,
        Coefficient::H2 => f.h2 = v,
        Coefficient::D1 => f.d1 = v,
        Coefficient::D2 => f.d2 = v,
        Coefficient::C => f.c = v,
    }
    f
}

fn coefficient(family: &SqueezeFamily, which: Coefficient) -> f64 {
    match which {
        Coefficient::H1 => family.h1,
        Coefficient::H2 => family.h2,
        Coefficient::D1 => family.d1,
        Coefficient::D2 => family.d2,
        Coefficient::C => family.c,
    }
}

/// Moves one coefficient to the nearest root of the resonance condition,
/// searching within ±`rel_window` of its current value.
pub fn snap_to_resonance(family: &SqueezeFamily, which: Coefficient, rel_window: f64) -> Result<SqueezeFamily> {
    let x0 = coefficient(family, which);
    let span = rel_window * x0.abs().max(1e-12);
    let n = 4000;
    let xs: Vec<f64> = (0..=n).map(|i| x0 - span + 2.0 * span * i as f64 / n as f64).collect();
    let f = |x: f64| cleared_resonance_residual(&with_coefficient(family, which, x)).unwrap_or(f64::NAN);
    cleared_resonance_residual(family)?;
    let roots = crate::roots::sign_change_roots(f, &xs, 1e-15 * x0.abs().max(1.0));
    let best = roots
        .into_iter()
        .filter(|&x| with_coefficient(family, which, x).validate().is_ok())
        .min_by(|a, b| (a - x0).abs().total_cmp(&(b - x0).abs()))
        .ok_or_else(|| Error::NoBracket(format!("resonance root near {x0}")))?;
    Ok(with_coefficient(family, which, best))
}

/// Verdict of the squeezed-limit analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    XType,
    YType,
    Separated,
    Undetermined,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::XType => "x-type",
            Verdict::YType => "y-type",
            Verdict::Separated => "separated",
            Verdict::Undetermined => "undetermined",
        })
    }
}

/// Region, resonance row and limit elements of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceAnalysis {
    pub region: RegionLabel,
    pub set: Option<String>,
    pub g_set: Option<GSet>,
    pub residual: Option<f64>,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub kappa: Option<f64>,
    pub theta_spread: Option<f64>,
    pub verdict: Verdict,
}

/// Classifies the family and, on resonance within `tol`, computes θ, α and κ.
pub fn analyze_resonance(family: &SqueezeFamily, tol: f64) -> Result<ResonanceAnalysis> {
    family.validate()?;
    let region = family.region();
    let mut out = ResonanceAnalysis {
        region,
        set: resonance_set(region).map(str::to_owned),
        g_set: None,
        residual: None,
        theta: None,
        alpha: None,
        kappa: None,
        theta_spread: None,
        verdict: Verdict::Undetermined,
    };
    let Some(way) = region.way() else {
        if region == RegionLabel::Outside {
            out.verdict = Verdict::Separated;
        }
        return Ok(out);
    };
    let residual = resonance_residual_of(family)?;
    out.residual = Some(residual);
    let chars = limit_chars_of(family)?;
    out.g_set = Some(chars.g_set());
    if !(residual.abs() <= tol) {
        out.verdict = Verdict::Separated;
        return Ok(out);
    }
    let ta = theta_alpha(&chars, way, tol.max(crate::limits::THETA_SPREAD_TOL))?;
    let si = squeezed_scattering(&ta)?;
    out.theta = Some(ta.theta);
    out.alpha = ta.alpha;
    out.theta_spread = Some(ta.spread);
    out.kappa = si.kappa;
    out.verdict = if way == Way::First { Verdict::XType } else { Verdict::YType };
    Ok(out)
}

/// Squeezed interaction of an on-resonance family.
pub fn squeezed_interaction_of(family: &SqueezeFamily, tol: f64) -> Result<SqueezedInteraction> {
    let an = analyze_resonance(family, tol)?;
    match (an.verdict, an.theta) {
        (Verdict::XType | Verdict::YType, Some(theta)) => {
            let way = if an.verdict == Verdict::XType { Way::First } else { Way::Second };
            squeezed_scattering(&ThetaAlpha { theta, alpha: an.alpha, way, spread: an.theta_spread.unwrap_or(0.0) })
        }
        _ => Ok(SqueezedInteraction::separated()),
    }
}

/// κ of the squeezed interaction when the family is on a Y resonance.
pub fn kappa_limit_of(family: &SqueezeFamily, tol: f64) -> Option<f64> {
    let an = analyze_resonance(family, tol).ok()?;
    if an.verdict != Verdict::YType {
        return None;
    }
    squeezed_bound_level(&ThetaAlpha { theta: an.theta?, alpha: an.alpha, way: Way::Second, spread: 0.0 })
        .ok()
        .flatten()
}

/// Decreasing logarithmic grid from `start` to `stop` with `per_decade` points per decade.
pub fn log_grid(start: f64, stop: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0 && stop <= start && per_decade > 0) {
        return Err(Error::InvalidGrid(format!("need start >= stop > 0, got {start} .. {stop}")));
    }
    let (a, b) = (start.log10(), stop.log10());
    let steps = ((a - b) * per_decade as f64 - 1e-9).ceil().max(0.0) as usize;
    let mut out: Vec<f64> = (0..steps).map(|i| 10f64.powf(a - i as f64 / per_decade as f64)).collect();
    out.push(stop);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub chi: ChiConfig,
    /// Smallest admissible ε.
    pub floor: f64,
    /// Real k at which a(k), b(k) are sampled per ε.
    pub k_samples: Vec<f64>,
    /// Real k at which |λ₂₁| is recorded per ε.
    pub probe_k: Option<f64>,
    /// A level growing faster than this per decade of ε is divergent.
    pub divergence_ratio: f64,
    /// A level changing less than this (relative) over the last decade is stationary.
    pub stationary_tol: f64,
    /// Resonance tolerance used to decide whether κ_limit exists.
    pub resonance_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            chi: ChiConfig::default(),
            floor: DEFAULT_FLOOR,
            k_samples: Vec::new(),
            probe_k: None,
            divergence_ratio: 1.5,
            stationary_tol: 0.05,
            resonance_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub spec: DoubleLayerSpec,
    pub ladder: Option<BoundLadder>,
    /// Set when the rule branch's well is not the deepest at this ε and the
    /// deepest well was used instead.
    pub branch_override: bool,
    pub failure: Option<String>,
    pub scattering: Vec<ScatteringData>,
    pub lambda21: Option<f64>,
}

/// Convergence scenario of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// ρ → 0: the deepest level κ_N converges, the others vanish.
    DeepestSurvives,
    /// ρ → const: the shallowest level κ₁ converges, the others diverge.
    ShallowestSurvives,
    Separated,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Survivor {
    Lowest,
    Highest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitDiagnostics {
    pub scenario: Scenario,
    pub survivor: Option<Survivor>,
    /// Survivor level per ε (absent where the ladder is empty or failed).
    pub trajectory: Vec<Option<f64>>,
    pub kappa_limit: Option<f64>,
    /// |κ_survivor − κ_limit| / κ_limit at the smallest ε.
    pub final_gap: Option<f64>,
    /// κ_survivor(ε_min) / κ_survivor(10 ε_min).
    pub decade_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub family: SqueezeFamily,
    pub branch: WellBranch,
    pub k_samples: Vec<f64>,
    pub points: Vec<SweepPoint>,
    pub diagnostics: LimitDiagnostics,
}

impl SweepResult {
    pub fn eps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.eps).collect()
    }

    /// Level `i` counted from the bottom (κ₁ = 0) per ε.
    pub fn level_from_bottom(&self, i: usize) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.ladder.as_ref().and_then(|l| l.levels.get(i).copied())).collect()
    }

    /// Level `i` counted from the top (κ_N = 0) per ε.
    pub fn level_from_top(&self, i: usize) -> Vec<Option<f64>> {
        self.points
            .iter()
            .map(|p| {
                p.ladder.as_ref().and_then(|l| l.levels.len().checked_sub(i + 1).map(|j| l.levels[j]))
            })
            .collect()
    }
}

fn sweep_point(family: &SqueezeFamily, eps: f64, branch: WellBranch, cfg: &SweepConfig) -> Result<SweepPoint> {
    let spec = family.realize_with_floor(eps, cfg.floor)?;
    let mut point = SweepPoint {
        eps,
        spec,
        ladder: None,
        branch_override: false,
        failure: None,
        scattering: Vec::new(),
        lambda21: None,
    };
    let (vw, vo) = match branch {
        WellBranch::First => (spec.layer1.v, spec.layer2.v),
        WellBranch::Second => (spec.layer2.v, spec.layer1.v),
    };
    let problem = if vw <= vo { family.chi_problem(eps, branch) } else {
        point.branch_override = true;
        build_chi_problem(&spec)
    };
    match problem {
        Ok(p) => point.ladder = Some(find_roots_with(&p, &cfg.chi)),
        Err(e) => point.failure = Some(e.to_string()),
    }
    for &k in &cfg.k_samples {
        point.scattering.push(scattering_data(&spec, Wavenumber::real(k)?));
    }
    if let Some(k) = cfg.probe_k {
        point.lambda21 = Some(total_matrix(&spec, Wavenumber::real(k)?).l21.abs());
    }
    Ok(point)
}

/// Solves the ladder at every ε (in parallel, merged in grid order) and
/// classifies the convergence scenario.
pub fn sweep_ladder(family: &SqueezeFamily, eps_grid: &[f64], cfg: &SweepConfig) -> Result<SweepResult> {
    family.validate()?;
    if eps_grid.is_empty() || eps_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidGrid("epsilon grid must be non-empty and strictly decreasing".into()));
    }
    if let Some(&e) = eps_grid.iter().find(|&&e| e < cfg.floor) {
        return Err(Error::EpsilonBelowFloor { eps: e, floor: cfg.floor });
    }
    let branch = family.sweep_branch()?;
    let points: Vec<SweepPoint> = eps_grid
        .par_iter()
        .map(|&eps| sweep_point(family, eps, branch, cfg))
        .collect::<Result<_>>()?;
    let mut result = SweepResult {
        family: *family,
        branch,
        k_samples: cfg.k_samples.clone(),
        points,
        diagnostics: LimitDiagnostics {
            scenario: Scenario::Undetermined,
            survivor: None,
            trajectory: Vec::new(),
            kappa_limit: None,
            final_gap: None,
            decade_ratio: None,
        },
    };
    result.diagnostics = diagnose(&result, cfg);
    Ok(result)
}

fn decade_index(eps: &[f64]) -> Option<usize> {
    let last = *eps.last()?;
    let target = (10.0 * last).log10();
    (0..eps.len() - 1).min_by(|&a, &b| {
        (eps[a].log10() - target).abs().total_cmp(&(eps[b].log10() - target).abs())
    })
}

fn diagnose(sweep: &SweepResult, cfg: &SweepConfig) -> LimitDiagnostics {
    let eps = sweep.eps();
    let kappa_limit = kappa_limit_of(&sweep.family, cfg.resonance_tol);
    let lowest = sweep.level_from_bottom(0);
    let highest = sweep.level_from_top(0);
    let di = decade_index(&eps);
    let n = eps.len();
    let ratio = |t: &[Option<f64>]| match (di, t[n - 1]) {
        (Some(d), Some(f)) => t[d].map(|v| f / v),
        _ => None,
    };
    let rho_power = sweep.family.rho_power(sweep.branch);
    let expected = if rho_power > POWER_TOL { Survivor::Highest } else { Survivor::Lowest };
    let survivor = match (kappa_limit, lowest[n - 1], highest[n - 1]) {
        (_, None, _) | (_, _, None) => None,
        (_, Some(lo), Some(hi)) if lo == hi => Some(expected),
        (Some(kl), Some(lo), Some(hi)) => {
            Some(if (lo - kl).abs() <= (hi - kl).abs() { Survivor::Lowest } else { Survivor::Highest })
        }
        (None, _, _) => {
            let change = |t: &[Option<f64>]| ratio(t).map(|r| r.ln().abs()).unwrap_or(f64::INFINITY);
            Some(if change(&lowest) <= change(&highest) { Survivor::Lowest } else { Survivor::Highest })
        }
    };
    let trajectory = match survivor {
        Some(Survivor::Lowest) => lowest,
        Some(Survivor::Highest) => highest,
        None => vec![None; n],
    };
    let decade_ratio = ratio(&trajectory);
    let final_gap = match (kappa_limit, trajectory[n - 1]) {
        (Some(kl), Some(k)) => Some((k - kl).abs() / kl),
        _ => None,
    };
    let scenario = match decade_ratio {
        Some(r) if r > cfg.divergence_ratio => Scenario::Separated,
        Some(r) if (r - 1.0).abs() < cfg.stationary_tol => {
            match (survivor, expected) {
                (Some(Survivor::Highest), Survivor::Highest) => Scenario::DeepestSurvives,
                (Some(Survivor::Lowest), Survivor::Lowest) => Scenario::ShallowestSurvives,
                _ => Scenario::Undetermined,
            }
        }
        _ => Scenario::Undetermined,
    };
    LimitDiagnostics { scenario, survivor, trajectory, kappa_limit, final_gap, decade_ratio }
}

/// Aitken Δ² estimate of the limit from the last three samples of a sequence
/// taken on a geometric ε grid.
pub fn aitken_limit(values: &[f64]) -> Option<f64> {
    let [x0, x1, x2] = values.get(values.len().checked_sub(3)?..)? else { return None };
    let (d1, d2) = (x1 - x0, x2 - x1);
    let den = d2 - d1;
    if den == 0.0 {
        return Some(*x2);
    }
    let v = x2 - d2 * d2 / den;
    v.is_finite().then_some(v)
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    slope.is_finite().then_some(slope)
}

/// Smooth compactly supported test functions φ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// exp(−1/(1−u²)), u = (x − center)/radius.
    Bump { center: f64, radius: f64 },
    /// Gaussian of the given width times a bump cutoff of radius `cutoff`.
    GaussianCutoff { center: f64, width: f64, cutoff: f64 },
    /// Cubic Hermite interpolation of (x, φ, φ′) samples; zero outside.
    Tabulated { xs: Vec<f64>, values: Vec<f64>, derivatives: Vec<f64> },
}

fn bump(u: f64) -> (f64, f64) {
    if u.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let w = 1.0 - u * u;
    let v = (-1.0 / w).exp();
    (v, v * (-2.0 * u / (w * w)))
}

impl TestFunction {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidTestFunction(m.into()));
        match self {
            TestFunction::Bump { center, radius } => {
                if !(center.is_finite() && *radius > 0.0 && radius.is_finite()) {
                    return bad("bump needs finite center and positive radius");
                }
            }
            TestFunction::GaussianCutoff { center, width, cutoff } => {
                if !(center.is_finite() && *width > 0.0 && *cutoff > 0.0 && cutoff.is_finite()) {
                    return bad("gaussian needs positive width and cutoff");
                }
            }
            TestFunction::Tabulated { xs, values, derivatives } => {
                if xs.len() < 2 || values.len() != xs.len() || derivatives.len() != xs.len() {
                    return bad("tabulated function needs matching xs, values, derivatives (>= 2 points)");
                }
                if xs.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("tabulated xs must be strictly increasing");
                }
                let last = xs.len() - 1;
                if [values[0], values[last], derivatives[0], derivatives[last]].iter().any(|v| *v != 0.0) {
                    return bad("tabulated function must vanish with its derivative at both ends");
                }
            }
        }
        Ok(())
    }

    /// Closed support interval.
    pub fn support(&self) -> (f64, f64) {
        match self {
            TestFunction::Bump { center, radius } => (center - radius, center + radius),
            TestFunction::GaussianCutoff { center, cutoff, .. } => (center - cutoff, center + cutoff),
            TestFunction::Tabulated { xs, .. } => (xs[0], xs[xs.len() - 1]),
        }
    }

    /// φ(x) and φ′(x).
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match self {
            TestFunction::Bump { center, radius } => {
                let (v, dv) = bump((x - center) / radius);
                (v, dv / radius)
            }
            TestFunction::GaussianCutoff { center, width, cutoff } => {
                let t = x - center;
                let g = (-0.5 * t * t / (width * width)).exp();
                let dg = -t / (width * width) * g;
                let (b, db) = bump(t / cutoff);
                (g * b, dg * b + g * db / cutoff)
            }
            TestFunction::Tabulated { xs, values, derivatives } => {
                if x < xs[0] || x > xs[xs.len() - 1] {
                    return (0.0, 0.0);
                }
                let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1) - 1;
                let h = xs[i + 1] - xs[i];
                let t = (x - xs[i]) / h;
                let (t2, t3) = (t * t, t * t * t);
                let (p0, p1) = (values[i], values[i + 1]);
                let (m0, m1) = (derivatives[i] * h, derivatives[i + 1] * h);
                let v = (2.0 * t3 - 3.0 * t2 + 1.0) * p0
                    + (t3 - 2.0 * t2 + t) * m0
                    + (-2.0 * t3 + 3.0 * t2) * p1
                    + (t3 - t2) * m1;
                let dv = (6.0 * t2 - 6.0 * t) * p0
                    + (3.0 * t2 - 4.0 * t + 1.0) * m0
                    + (-6.0 * t2 + 6.0 * t) * p1
                    + (3.0 * t2 - 2.0 * t) * m1;
                (v, dv / h)
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` on [a, b].
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // A few fixed panels first so narrow features are not skipped.
    let panels = 8;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson_rec(&f, x0, x1, f0, fm, f1, whole, tol / panels as f64, 40)
        })
        .sum()
}

/// Relative tolerance on h₁d₁ + h₂d₂ = 0.
pub const DELTA_PRIME_TOL: f64 = 1e-9;

/// h₁d₁ + h₂d₂.
pub fn delta_prime_residual(family: &SqueezeFamily) -> f64 {
    family.h1 * family.d1 + family.h2 * family.d2
}

fn delta_prime_holds(family: &SqueezeFamily, tol: f64) -> bool {
    let scale = (family.h1 * family.d1).abs() + (family.h2 * family.d2).abs();
    delta_prime_residual(family).abs() <= tol * scale.max(f64::MIN_POSITIVE)
}

/// δ′ strength γ on the first-angle sets; absent outside them or on I₁.
pub fn gamma_strength(family: &SqueezeFamily, region: RegionLabel) -> Result<Option<f64>> {
    if !delta_prime_holds(family, DELTA_PRIME_TOL) {
        return Err(Error::DeltaPrimeViolated { residual: delta_prime_residual(family) });
    }
    use RegionLabel::*;
    let SqueezeFamily { d1, d2, c, .. } = *family;
    let factor = match region {
        P1 => d1 + d2 + 2.0 * c,
        K1 => d2 + 2.0 * c,
        L1 => d1 + 2.0 * c,
        N1 => d1 + d2,
        Q1 => d2,
        O1 => d1,
        S1 => 2.0 * c,
        _ => return Ok(None),
    };
    Ok(Some(0.5 * family.h1 * d1 * factor))
}

/// ⟨V_ε | φ⟩ and its distributional limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    pub eps: f64,
    pub value: f64,
    pub gamma: Option<f64>,
    /// Limit of the pairing: ⟨γδ′, φ⟩ = −γφ′(0), or 0 on the transparent region.
    pub limit: Option<f64>,
    pub gap: Option<f64>,
    /// Set when h₁d₁ + h₂d₂ ≠ 0: the pairing grows like ε^{1−μ}.
    pub divergence_order: Option<f64>,
}

/// Pairs V_ε with φ: exact piecewise-constant V, adaptive Simpson for φ.
pub fn delta_prime_pairing(family: &SqueezeFamily, eps: f64, phi: &TestFunction) -> Result<Pairing> {
    family.validate()?;
    phi.validate()?;
    let spec = family.realize(eps)?;
    let (s0, s1) = phi.support();
    let [_, x1, x2, x3] = spec.breakpoints();
    let piece = |a: f64, b: f64| {
        let (lo, hi) = (a.max(s0), b.min(s1));
        if hi <= lo {
            return 0.0;
        }
        let scale = (hi - lo).max(1e-300);
        adaptive_simpson(|x| phi.eval(x).0, lo, hi, 1e-14 * scale)
    };
    let value = spec.layer1.v * piece(0.0, x1) + spec.layer2.v * piece(x2, x3);
    let label = first_angle_label(family.mu, family.nu, family.tau);
    let mut out = Pairing { eps, value, gamma: None, limit: None, gap: None, divergence_order: None };
    if !delta_prime_holds(family, DELTA_PRIME_TOL) {
        out.divergence_order = Some(1.0 - family.mu);
        return Ok(out);
    }
    out.gamma = gamma_strength(family, label)?;
    out.limit = match (out.gamma, label) {
        (Some(g), _) => Some(-g * phi.eval(0.0).1),
        (None, RegionLabel::I1) => Some(0.0),
        _ => None,
    };
    out.gap = out.limit.map(|l| (value - l).abs());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::find_roots;
    use proptest::prelude::*;

    const EV: f64 = 2.62464;

    fn barrier_well() -> SqueezeFamily {
        let f = SqueezeFamily::new(2.0, 2.0, 2.0, 0.5 * EV, 1.0, -0.5 * EV, 0.6, 2.0).unwrap();
        snap_to_resonance(&f, Coefficient::D2, 0.05).unwrap()
    }

    #[test]
    fn realize_unit_and_powers() {
        let f = SqueezeFamily::new(2.0, 2.0, 2.0, -0.3, 2.1, -0.5, 12.0, 20.0).unwrap();
        assert_eq!(f.realize(1.0).unwrap(), DoubleLayerSpec::new(-0.3, 2.1, -0.5, 12.0, 20.0));
        let s = f.realize(0.1).unwrap();
        assert!((s.layer1.v - 100.0 * -0.3).abs() < 1e-12);
        assert!((s.r - 0.2).abs() < 1e-15);
        let g = SqueezeFamily::new(1.7, 1.7, 1.0, -1.0, 1.0, -1.0, 3.0, 1.0).unwrap();
        assert!((g.realize(0.01).unwrap().layer2.l - 0.03).abs() < 1e-15);
        assert!(matches!(f.realize(1e-13), Err(Error::EpsilonBelowFloor { .. })));
    }

    #[test]
    fn family_validation() {
        let flat = SqueezeFamily::new(3.0, 2.0, 1.0, -1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(flat.realize(0.1), Err(Error::InvalidFamily(_))));
        assert_eq!(analyze_resonance(&flat, 1e-9).unwrap().verdict, Verdict::Separated);
        assert!(SqueezeFamily::new(0.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(SqueezeFamily::new(1.0, 1.0, 1.0, -1.0, 0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn region_examples() {
        use RegionLabel::*;
        assert_eq!(classify_region(2.0, 2.0, 1.0), P1);
        assert_eq!(classify_region(2.0, 2.0, 2.0), P2);
        assert_eq!(classify_region(3.0, 2.0, 1.0), Outside);
        assert_eq!(classify_region(1.5, 1.0, 0.5), K1);
        assert_eq!(classify_region(1.5, 1.0, 1.0), K2);
        assert_eq!(classify_region(1.5, 1.0, 0.7), Q1);
        assert_eq!(classify_region(1.5, 1.0, 3.0), Q2);
        assert_eq!(classify_region(1.5, 1.5, 1.0), S2);
        assert_eq!(classify_region(1.5, 1.5, 0.5), S1);
        assert_eq!(classify_region(1.5, 1.5, 0.8), I1);
        assert_eq!(classify_region(1.5, 1.5, 2.0), I2);
        assert_eq!(classify_region(2.0, 3.0, 1.0), L1);
        assert_eq!(classify_region(2.0, 3.0, 1.5), O1);
        assert_eq!(classify_region(2.0, 3.0, 2.0), L2);
        assert_eq!(classify_region(2.0, 3.0, 5.0), O2);
        assert_eq!(classify_region(2.0, 2.0, 1.5), N1);
        assert_eq!(classify_region(2.0, 2.0, 2.5), N2);
        assert_eq!(classify_region(1.5, 0.9, 1.0), Outside);
        assert_eq!(classify_region(1.5, 1.5, 0.4), Outside);
        assert_eq!(first_angle_label(2.0, 2.0, 2.0), N1);
        assert_eq!(first_angle_label(1.5, 1.0, 1.0), Q1);
    }

    #[test]
    fn limit_chars_examples() {
        let p2 = SqueezeFamily::new(2.0, 2.0, 2.0, -0.3, 2.0, -0.5, 3.0, 4.0).unwrap();
        let ch = limit_chars_of(&p2).unwrap();
        assert_eq!(ch.g_set(), GSet::G11);
        let w = ch.second.unwrap();
        assert!((w.amp[0].unwrap() - Complex64::new((0.3f64 * 4.0).sqrt(), 0.0)).norm() < 1e-15);
        assert!((w.zero[1].unwrap() - 0.5 * 3.0 * 2.0).abs() < 1e-15);
        assert_eq!(ch.first.unwrap().zero, [Some(0.0); 2]);

        let s2 = SqueezeFamily::new(1.5, 1.5, 1.0, 0.5, 12.0, -0.5, 12.0, 20.0).unwrap();
        let ch = limit_chars_of(&s2).unwrap();
        assert_eq!(ch.g_set(), GSet::G00);
        let w = ch.second.unwrap();
        assert_eq!(w.zero, [Some(-0.5 * 12.0 * 20f64.sqrt()), Some(0.5 * 12.0 * 20f64.sqrt())]);

        let n2 = SqueezeFamily::new(2.0, 2.0, 3.0, -0.3, 2.0, -0.5, 3.0, 4.0).unwrap();
        let ch = limit_chars_of(&n2).unwrap();
        let w = ch.second.unwrap();
        assert_eq!(w.amp, [Some(Complex64::new(0.0, 0.0)); 2]);
        let ta = theta_alpha(&ch, Way::Second, 1e-9).unwrap();
        assert_eq!(ta.alpha, Some(0.0));

        let out = SqueezeFamily::new(3.0, 2.5, 1.0, -0.3, 2.0, -0.5, 3.0, 4.0).unwrap();
        assert!(matches!(limit_chars_of(&out), Err(Error::DivergentCharacteristic { name: "sigma1", .. })));
    }

    #[test]
    fn resonance_examples() {
        let s2 = SqueezeFamily::new(1.5, 1.5, 1.0, 0.5 * EV, 12.0, -0.5 * EV, 12.0, 20.0).unwrap();
        assert_eq!(resonance_residual_of(&s2).unwrap(), 0.0);
        let an = analyze_resonance(&s2, 1e-9).unwrap();
        assert_eq!(an.set.as_deref(), Some("Y00"));
        assert_eq!(an.theta, Some(1.0));
        let expected = 0.5 * (0.5 * EV * 12.0f64).powi(2) * 20.0;
        assert!((an.kappa.unwrap() - expected).abs() < 1e-9 * expected);

        let off = SqueezeFamily { d1: 8.0, ..s2 };
        assert!(resonance_residual_of(&off).unwrap().abs() > 1.0);
        assert_eq!(analyze_resonance(&off, 1e-9).unwrap().verdict, Verdict::Separated);

        let rough = SqueezeFamily::new(2.0, 2.0, 2.0, 0.5 * EV, 1.0, -0.5 * EV, 0.6, 2.0).unwrap();
        assert!(resonance_residual_of(&rough).unwrap().abs() < 0.02);

        let f = barrier_well();
        assert!((f.d2 - 0.5976).abs() < 1e-4);
        assert!(resonance_residual_of(&f).unwrap().abs() < 1e-12);
        let an = analyze_resonance(&f, 1e-9).unwrap();
        assert!((an.theta.unwrap() - 2.23).abs() < 0.01);
        assert!((an.kappa.unwrap() - 0.8744).abs() < 1e-3);

        let outside = SqueezeFamily::new(3.0, 2.5, 1.0, -0.3, 2.0, -0.5, 3.0, 4.0).unwrap();
        let an = analyze_resonance(&outside, 1e-9).unwrap();
        assert_eq!((an.region, an.verdict), (RegionLabel::Outside, Verdict::Separated));
        let n1 = SqueezeFamily::new(2.0, 2.0, 1.5, -0.3, 2.0, -0.5, 3.0, 4.0).unwrap();
        assert!(matches!(resonance_residual_of(&n1), Err(Error::NoResonanceCondition(_))));
    }

    #[test]
    fn cleared_and_plain_residual_share_roots() {
        let f = barrier_well();
        assert!(cleared_resonance_residual(&f).unwrap().abs() < 1e-12);
        let x = SqueezeFamily::new(2.0, 2.0, 1.0, -0.3, 2.0, -0.5, 3.0, 1.0).unwrap();
        let snapped = snap_to_resonance(&x, Coefficient::C, 5.0).unwrap();
        assert!(resonance_residual_of(&snapped).unwrap().abs() < 1e-10);
        assert_eq!(analyze_resonance(&snapped, 1e-9).unwrap().verdict, Verdict::XType);
    }

    #[test]
    fn sweep_branch_rule() {
        let mk = |mu, nu, h1, h2| SqueezeFamily::new(mu, nu, 2.0, h1, 1.0, h2, 1.0, 1.0).unwrap();
        assert_eq!(mk(2.0, 2.0, -1.0, 1.0).sweep_branch().unwrap(), WellBranch::First);
        assert_eq!(mk(2.0, 2.0, 1.0, -1.0).sweep_branch().unwrap(), WellBranch::Second);
        assert_eq!(mk(2.0, 2.0, -2.0, -1.0).sweep_branch().unwrap(), WellBranch::First);
        assert_eq!(mk(2.0, 2.0, -1.0, -2.0).sweep_branch().unwrap(), WellBranch::Second);
        assert_eq!(mk(2.0, 1.5, -1.0, -2.0).sweep_branch().unwrap(), WellBranch::First);
        assert_eq!(mk(1.5, 2.0, -2.0, -1.0).sweep_branch().unwrap(), WellBranch::Second);
        assert_eq!(mk(2.0, 2.0, 1.0, 1.0).sweep_branch(), Err(Error::NoBoundSector));
    }

    #[test]
    fn power_form_matches_realized_spec() {
        let f = SqueezeFamily::new(1.5, 1.5, 1.0, 0.5 * EV, 12.0, -0.5 * EV, 12.0, 20.0).unwrap();
        for eps in [1.0, 0.1, 1e-3] {
            let a = f.chi_problem(eps, WellBranch::Second).unwrap();
            let b = build_chi_problem(&f.realize(eps).unwrap()).unwrap();
            assert_eq!(a.branch, b.branch);
            for (x, y) in [(a.rho, b.rho), (a.other, b.other), (a.ratio, b.ratio), (a.gap_ratio, b.gap_ratio), (a.l, b.l)] {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300), "{x} {y}");
            }
        }
    }

    #[test]
    fn log_grid_shape() {
        let g = log_grid(1.0, 1e-3, 8).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1.0);
        assert_eq!(*g.last().unwrap(), 1e-3);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert!(log_grid(1e-3, 1.0, 8).is_err());
    }

    #[test]
    fn barrier_well_sweep_converges_to_limit() {
        let f = barrier_well();
        let grid = log_grid(1.0, 1e-4, 4).unwrap();
        let sweep = sweep_ladder(&f, &grid, &SweepConfig::default()).unwrap();
        let d = &sweep.diagnostics;
        assert_eq!(d.scenario, Scenario::ShallowestSurvives);
        assert!(d.final_gap.unwrap() < 1e-3);
        let traj: Vec<f64> = d.trajectory.iter().map(|v| v.unwrap()).collect();
        assert!((traj[0] - 0.3196).abs() < 1e-3);
        let kl = d.kappa_limit.unwrap();
        let gaps: Vec<f64> = traj.iter().map(|k| (k - kl).abs()).collect();
        assert!(gaps.windows(2).skip(4).all(|w| w[1] <= w[0]), "{gaps:?}");
        assert!(sweep.points.iter().all(|p| !p.branch_override));
    }

    #[test]
    fn off_resonance_sweep_separates() {
        let f = SqueezeFamily::new(1.5, 1.5, 1.0, 0.5 * EV, 8.0, -0.5 * EV, 12.0, 20.0).unwrap();
        let grid = log_grid(1e-4, 1e-7, 2).unwrap();
        let cfg = SweepConfig { probe_k: Some(0.5), ..SweepConfig::default() };
        let sweep = sweep_ladder(&f, &grid, &cfg).unwrap();
        assert_eq!(sweep.diagnostics.scenario, Scenario::Separated);
        let l21: Vec<f64> = sweep.points.iter().map(|p| p.lambda21.unwrap()).collect();
        assert!(l21.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn s2_limit_without_cubic_term() {
        // μ = ν = 5/4: the cubic tan term vanishes and κ_N reaches ½(h₁d₁)²c.
        let f = SqueezeFamily::new(1.25, 1.25, 0.5, 1.0, 1.0, -1.0, 1.0, 2.0).unwrap();
        assert_eq!(f.region(), RegionLabel::S2);
        let kl = kappa_limit_of(&f, 1e-9).unwrap();
        assert!((kl - 1.0).abs() < 1e-12);
        let grid = log_grid(1e-6, 1e-10, 2).unwrap();
        let sweep = sweep_ladder(&f, &grid, &SweepConfig::default()).unwrap();
        assert_eq!(sweep.diagnostics.scenario, Scenario::DeepestSurvives);
        assert!(sweep.diagnostics.final_gap.unwrap() < 0.02, "{:?}", sweep.diagnostics);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let f = barrier_well();
        assert!(sweep_ladder(&f, &[1.0, 1.0], &SweepConfig::default()).is_err());
        assert!(sweep_ladder(&f, &[], &SweepConfig::default()).is_err());
        assert!(matches!(
            sweep_ladder(&f, &[1.0, 1e-13], &SweepConfig::default()),
            Err(Error::EpsilonBelowFloor { .. })
        ));
    }

    #[test]
    fn aitken_exact_on_geometric_sequences() {
        let xs: Vec<f64> = (0..5).map(|n| 2.0 + 3.0 * 0.5f64.powi(n)).collect();
        assert!((aitken_limit(&xs).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(aitken_limit(&[1.0, 2.0]), None);
        let s = loglog_slope(&[1.0, 10.0, 100.0], &[2.0, 20.0, 200.0]).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn test_functions() {
        let b = TestFunction::Bump { center: 0.2, radius: 1.0 };
        assert_eq!(b.eval(1.3), (0.0, 0.0));
        let h = 1e-6;
        for tf in [
            b.clone(),
            TestFunction::GaussianCutoff { center: -0.1, width: 0.5, cutoff: 2.0 },
            TestFunction::Tabulated {
                xs: vec![-1.0, 0.0, 1.0],
                values: vec![0.0, 1.0, 0.0],
                derivatives: vec![0.0, -0.5, 0.0],
            },
        ] {
            tf.validate().unwrap();
            for x in [-0.3, 0.05, 0.4] {
                let fd = (tf.eval(x + h).0 - tf.eval(x - h).0) / (2.0 * h);
                assert!((fd - tf.eval(x).1).abs() < 1e-6, "{tf:?} at {x}");
            }
        }
        let bad = TestFunction::Tabulated { xs: vec![0.0, 1.0], values: vec![1.0, 0.0], derivatives: vec![0.0, 0.0] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_table() {
        let f = SqueezeFamily::new(2.0, 2.0, 1.0, 1.0, 2.0, -0.5, 4.0, 3.0).unwrap();
        assert_eq!(gamma_strength(&f, RegionLabel::P1).unwrap(), Some(0.5 * 2.0 * (2.0 + 4.0 + 6.0)));
        assert_eq!(gamma_strength(&f, RegionLabel::S1).unwrap(), Some(2.0 * 3.0));
        assert_eq!(gamma_strength(&f, RegionLabel::I1).unwrap(), None);
        let zero = SqueezeFamily { h1: 0.0, h2: 0.0, ..f };
        assert_eq!(gamma_strength(&zero, RegionLabel::Q1).unwrap(), Some(0.0));
        let bad = SqueezeFamily { h2: -0.6, ..f };
        assert!(matches!(gamma_strength(&bad, RegionLabel::P1), Err(Error::DeltaPrimeViolated { .. })));
    }

    #[test]
    fn constant_test_function_pairs_to_zero() {
        // φ ≡ 1 across the structure: the pairing is h₁d₁ + h₂d₂ times ε^{1−μ}.
        let f = SqueezeFamily::new(1.5, 1.0, 1.0, 1.0, 1.0, -2.0, 0.5, 1.0).unwrap();
        let tf = TestFunction::Tabulated {
            xs: vec![-10.0, -9.0, 9.0, 10.0],
            values: vec![0.0, 1.0, 1.0, 0.0],
            derivatives: vec![0.0; 4],
        };
        let p = delta_prime_pairing(&f, 0.01, &tf).unwrap();
        assert!(p.value.abs() < 1e-10, "{p:?}");
    }

    #[test]
    fn q1_pairing_converges() {
        let f = SqueezeFamily::new(1.5, 1.0, 1.0, 1.0, 1.0, -2.0, 0.5, 1.0).unwrap();
        let tf = TestFunction::Bump { center: -0.5, radius: 2.0 };
        let gaps: Vec<f64> =
            [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&e| delta_prime_pairing(&f, e, &tf).unwrap().gap.unwrap()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        let p = delta_prime_pairing(&f, 1e-4, &tf).unwrap();
        assert_eq!(p.gamma, Some(0.5 * 1.0 * 0.5));
    }

    proptest! {
        #[test]
        fn regions_partition(mu in 0.01f64..4.0, nu in 0.01f64..4.0, tau in 0.01f64..4.0, snap in 0u8..8) {
            // Snap some samples onto the planes and lines so equalities are exercised.
            let mu = if snap & 1 == 1 { 1.0 + (mu / 4.0) } else { mu };
            let mu = if snap == 7 { 2.0 } else { mu };
            let nu = if snap & 2 == 2 { 2.0 * (mu - 1.0) } else { nu };
            let tau = if snap & 4 == 4 { 2.0 * (mu - 1.0) } else { tau };
            let label = classify_region(mu, nu, tau);
            let hi = 2.0 * (mu - 1.0);
            let inside = mu > 1.0 && mu <= 2.0 + POWER_TOL && nu >= hi - POWER_TOL && tau >= mu - 1.0 - POWER_TOL;
            prop_assert_eq!(label != RegionLabel::Outside, inside, "{:?} at {} {} {}", label, mu, nu, tau);
            if label.way() == Some(Way::Second) {
                prop_assert!(tau >= hi - POWER_TOL);
            }
        }

        #[test]
        fn realize_at_one_is_exact(h1 in -3f64..3.0, h2 in -3f64..3.0, d1 in 0.1f64..5.0, d2 in 0.1f64..5.0, c in 0.1f64..5.0,
                                   mu in 1.0f64..2.0, nu in 1.0f64..2.0, tau in 0.5f64..3.0) {
            let f = SqueezeFamily::new(mu, nu, tau, h1, d1, h2, d2, c).unwrap();
            prop_assert_eq!(f.realize(1.0).unwrap(), DoubleLayerSpec::new(h1, d1, h2, d2, c));
        }

        #[test]
        fn branch_stable_for_equal_powers(h1 in -3f64..-0.1, h2 in -3f64..3.0, mu in 1.1f64..2.0) {
            let f = SqueezeFamily::new(mu, mu, 2.0 * (mu - 1.0), h1, 1.0, h2, 1.5, 1.0).unwrap();
            let branch = f.sweep_branch().unwrap();
            for eps in [1.0, 1e-2, 1e-4, 1e-6] {
                let s = f.realize(eps).unwrap();
                let deepest = build_chi_problem(&s).unwrap();
                prop_assert_eq!(deepest.branch, branch);
                let p = f.chi_problem(eps, branch).unwrap();
                prop_assert_eq!(find_roots(&p).len(), find_roots(&deepest).len());
            }
        }
    }
}
