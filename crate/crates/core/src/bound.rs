//! Bound-state ladders from the χ-substitution transcendental equation.
//!
//! With the deepest well as reference layer, χ = k_w l and q = κ l satisfy
//! χ² + q² = ρ². The equation tan χ = y(χ) is solved in its denominator-cleared
//! form, parametrized by the angle ϑ with χ = ρ cos ϑ, q = ρ sin ϑ so that
//! levels with q ≪ ρ keep full relative precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{c, s, tanhc};
use crate::roots;
use crate::structure::DoubleLayerSpec;
use crate::xfer::scaled_bound_residual;

/// Which layer plays the role of the (deepest) well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WellBranch {
    /// V₁ ≤ V₂: layer 1 is the reference well.
    First,
    /// V₂ ≤ V₁: layer 2 is the reference well.
    Second,
}

/// Dimensionless data of the χ-equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiProblem {
    pub branch: WellBranch,
    /// |V_w|^{1/2} l_w.
    pub rho: f64,
    /// V_o l_w², so that ζ² = χ² − ρ² − V_o l_w².
    pub other: f64,
    /// l_o / l_w, so that ζ̄ = ratio · ζ.
    pub ratio: f64,
    /// r / l_w.
    pub gap_ratio: f64,
    /// Reference width l_w (nm); κ = q / l.
    pub l: f64,
}

/// Root-search settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiConfig {
    /// Uniform χ samples in the pre-scan.
    pub scan_points: usize,
    /// Extra geometric samples approaching χ = ρ.
    pub edge_points: usize,
}

impl Default for ChiConfig {
    fn default() -> Self {
        Self { scan_points: 2048, edge_points: 40 }
    }
}

/// Roots in descending χ and the matching levels in ascending κ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundLadder {
    pub roots: Vec<f64>,
    pub levels: Vec<f64>,
    pub rho: f64,
    pub l: f64,
}

impl BoundLadder {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Terms N₀, N₁, N₂ with tan χ = N₀ / (χN₁ − N₂/χ).
#[derive(Debug, Clone, Copy)]
struct Parts {
    n0: f64,
    n1: f64,
    n2: f64,
}

impl ChiProblem {
    pub fn new(branch: WellBranch, rho: f64, other: f64, ratio: f64, gap_ratio: f64, l: f64) -> Result<Self> {
        let ok = rho > 0.0 && l > 0.0 && ratio >= 0.0 && gap_ratio >= 0.0;
        if !ok || ![rho, other, ratio, gap_ratio, l].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("chi problem parameters"));
        }
        Ok(Self { branch, rho, other, ratio, gap_ratio, l })
    }

    /// ζ² offset in the χ form: ζ² = χ² − (ρ² + V_o l²).
    pub fn zeta_offset(&self) -> f64 {
        self.rho * self.rho + self.other
    }

    fn parts(&self, q: f64) -> Parts {
        let z2 = -q * q - self.other;
        let rt = self.ratio;
        let zb2 = rt * rt * z2;
        let (cb, sb) = (c(zb2), s(zb2));
        let t0q = self.gap_ratio * tanhc(q * self.gap_ratio);
        let t0 = q * t0q;
        let n0 = (1.0 + t0) * (2.0 * q * cb + rt * sb * (q * q - z2));
        let n1 = (1.0 + t0) * cb + q * rt * sb - rt * z2 * sb * t0q;
        let n2 = q * q * (1.0 + t0) * cb - q * rt * z2 * sb + q * q * q * t0 * rt * sb;
        Parts { n0, n1, n2 }
    }

    /// (χ, q) on the quarter circle at angle ϑ ∈ [0, π/2].
    fn point(&self, theta: f64) -> (f64, f64) {
        (self.rho * theta.cos(), self.rho * theta.sin())
    }

    fn theta_of_chi(&self, chi: f64) -> f64 {
        (chi / self.rho).clamp(-1.0, 1.0).acos()
    }

    /// Cleared function h = sin χ·(χN₁ − N₂/χ) − cos χ·N₀ and its term scale.
    fn cleared_at(&self, chi: f64, q: f64) -> (f64, f64) {
        let p = self.parts(q);
        let sinc = s(chi * chi);
        let sn = chi.sin();
        let a = sn * chi * p.n1;
        let b = sinc * p.n2;
        let d = chi.cos() * p.n0;
        (a - b - d, a.abs() + b.abs() + d.abs())
    }

    fn cleared_theta(&self, theta: f64) -> f64 {
        let (chi, q) = self.point(theta);
        self.cleared_at(chi, q).0
    }

    fn denominator_theta(&self, theta: f64) -> f64 {
        let (chi, q) = self.point(theta);
        let p = self.parts(q);
        // χN₁ − N₂/χ, multiplied by χ to stay finite at χ = 0.
        chi * chi * p.n1 - p.n2
    }

    /// Cleared residual at χ divided by its term scale.
    pub fn scaled_cleared_residual(&self, chi: f64) -> f64 {
        let q = ((self.rho - chi) * (self.rho + chi)).max(0.0).sqrt();
        let (h, scale) = self.cleared_at(chi, q);
        h / scale.max(f64::MIN_POSITIVE)
    }

    /// Pre-scan angles, ascending (χ descending from ρ).
    fn scan_angles(&self, cfg: &ChiConfig) -> Vec<f64> {
        let n = cfg.scan_points.max(8);
        let mut th: Vec<f64> = (1..n).map(|i| self.theta_of_chi(self.rho * i as f64 / n as f64)).collect();
        let mut branch = std::f64::consts::FRAC_PI_2;
        while branch < self.rho {
            th.push(self.theta_of_chi(branch));
            branch += std::f64::consts::PI;
        }
        let first = self.theta_of_chi(self.rho * (n - 1) as f64 / n as f64);
        let mut t = first;
        for _ in 0..cfg.edge_points {
            t *= 0.5;
            th.push(t);
        }
        th.push(std::f64::consts::FRAC_PI_2);
        th.retain(|t| *t > 0.0 && t.is_finite());
        th.sort_by(f64::total_cmp);
        th.dedup();
        th
    }

    fn refine_all<F: Fn(f64) -> f64>(&self, f: F, angles: &[f64]) -> Vec<f64> {
        let vals: Vec<f64> = angles.iter().map(|&t| f(t)).collect();
        let mut out = Vec::new();
        for i in 1..angles.len() {
            let (a, b, fa, fb) = (angles[i - 1], angles[i], vals[i - 1], vals[i]);
            if !fa.is_finite() || !fb.is_finite() {
                continue;
            }
            if fa == 0.0 {
                out.push(a);
            } else if fb != 0.0 && fa.signum() != fb.signum() {
                let tol = 1e-16 * b.max(1e-300) + 4.0 * f64::MIN_POSITIVE;
                out.push(roots::refine(&f, a, b, fa, fb, tol));
            }
        }
        out
    }

    /// Zeros of the y denominator (poles of y), ascending in χ.
    pub fn poles(&self, cfg: &ChiConfig) -> Vec<f64> {
        let angles = self.scan_angles(cfg);
        let mut chis: Vec<f64> = self
            .refine_all(|t| self.denominator_theta(t), &angles)
            .into_iter()
            .map(|t| self.point(t).0)
            .filter(|&x| x > 0.0 && x < self.rho)
            .collect();
        chis.sort_by(f64::total_cmp);
        chis
    }
}

/// Builds the χ-problem of a finite structure, choosing the deepest well.
pub fn build_chi_problem(spec: &DoubleLayerSpec) -> Result<ChiProblem> {
    let w1 = spec.layer1.l > 0.0 && spec.layer1.v < 0.0;
    let w2 = spec.layer2.l > 0.0 && spec.layer2.v < 0.0;
    let branch = match (w1, w2) {
        (false, false) => return Err(Error::NoBoundSector),
        (true, false) => WellBranch::First,
        (false, true) => WellBranch::Second,
        (true, true) => {
            if spec.layer1.v <= spec.layer2.v {
                WellBranch::First
            } else {
                WellBranch::Second
            }
        }
    };
    let (well, other) = match branch {
        WellBranch::First => (spec.layer1, spec.layer2),
        WellBranch::Second => (spec.layer2, spec.layer1),
    };
    let l = well.l;
    ChiProblem::new(
        branch,
        (-well.v).sqrt() * l,
        other.v * l * l,
        other.l / l,
        spec.r / l,
        l,
    )
}

/// y(χ); ±∞ exactly at a pole of the cleared denominator.
pub fn y_of_chi(problem: &ChiProblem, chi: f64) -> Result<f64> {
    if !(chi > 0.0 && chi < problem.rho) {
        return Err(Error::ChiOutOfRange { chi, rho: problem.rho });
    }
    let q = ((problem.rho - chi) * (problem.rho + chi)).sqrt();
    let p = problem.parts(q);
    let den = chi * p.n1 - p.n2 / chi;
    if den == 0.0 {
        return Ok(if p.n0 >= 0.0 { f64::INFINITY } else { f64::NEG_INFINITY });
    }
    Ok(p.n0 / den)
}

/// All solutions of tan χ = y(χ) on (0, ρ).
pub fn find_roots(problem: &ChiProblem) -> BoundLadder {
    find_roots_with(problem, &ChiConfig::default())
}

pub fn find_roots_with(problem: &ChiProblem, cfg: &ChiConfig) -> BoundLadder {
    let mut angles = problem.scan_angles(cfg);
    // Pole positions split cells where both factors of the cleared form move fast.
    let pole_angles = problem.refine_all(|t| problem.denominator_theta(t), &angles);
    angles.extend(pole_angles);
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    let thetas = problem.refine_all(|t| problem.cleared_theta(t), &angles);
    let mut pairs: Vec<(f64, f64)> = thetas
        .into_iter()
        .filter(|&t| t > 0.0 && t < std::f64::consts::FRAC_PI_2)
        .map(|t| problem.point(t))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.dedup_by(|a, b| a.0 == b.0);
    BoundLadder {
        roots: pairs.iter().map(|p| p.0).collect(),
        levels: pairs.iter().map(|p| p.1 / problem.l).collect(),
        rho: problem.rho,
        l: problem.l,
    }
}

/// Convenience: χ-problem plus root search for a concrete structure.
pub fn ladder_of(spec: &DoubleLayerSpec) -> Result<BoundLadder> {
    Ok(find_roots(&build_chi_problem(spec)?))
}

/// Outcome of checking a ladder against the direct residual F(κ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    /// Scaled F(κ_i) per level.
    pub residuals: Vec<f64>,
    /// Levels whose residual exceeds tolerance or that have no nearby F root.
    pub failing: Vec<usize>,
    /// F roots with no matching ladder level.
    pub missed: Vec<f64>,
    /// F roots found by the independent scan, ascending.
    pub scan_levels: Vec<f64>,
}

impl LadderReport {
    pub fn ok(&self) -> bool {
        self.failing.is_empty() && self.missed.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub residual_tol: f64,
    pub level_tol: f64,
    pub scan_points: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { residual_tol: 1e-8, level_tol: 1e-8, scan_points: 4096 }
    }
}

/// Checks every level against F(κ) and scans F for sign changes the ladder lacks.
pub fn verify_ladder(spec: &DoubleLayerSpec, ladder: &BoundLadder) -> Result<LadderReport> {
    verify_ladder_with(spec, ladder, &VerifyConfig::default())
}

pub fn verify_ladder_with(spec: &DoubleLayerSpec, ladder: &BoundLadder, cfg: &VerifyConfig) -> Result<LadderReport> {
    let kmax = spec.max_abs_potential().sqrt();
    let residuals = ladder
        .levels
        .iter()
        .map(|&k| scaled_bound_residual(spec, k))
        .collect::<Result<Vec<f64>>>()?;
    // κ grid uniform in χ of the reference well, refined toward κ = 0,
    // then continued uniformly up to the largest |V|^{1/2}.
    let n = cfg.scan_points.max(16);
    let kw = ladder.rho / ladder.l;
    let mut grid: Vec<f64> = (0..n)
        .map(|i| {
            let chi = ladder.rho * i as f64 / n as f64;
            ((ladder.rho - chi) * (ladder.rho + chi)).sqrt() / ladder.l
        })
        .collect();
    let smallest = grid.iter().cloned().filter(|k| *k > 0.0).fold(f64::INFINITY, f64::min);
    let mut t = smallest;
    for _ in 0..40 {
        t *= 0.5;
        grid.push(t);
    }
    if kmax > kw {
        grid.extend((1..=n).map(|i| kw + (kmax - kw) * i as f64 / n as f64));
    }
    for &k in &ladder.levels {
        // Bracket each claimed level so a sign change there is always seen.
        let w = (k * 1e-7).max(1e-12);
        grid.push(k - w);
        grid.push(k + w);
    }
    grid.retain(|k| *k > 0.0 && k.is_finite());
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let scan_levels = roots::sign_change_roots(
        |k| scaled_bound_residual(spec, k).unwrap_or(f64::NAN),
        &grid,
        1e-15,
    );
    let tol_for = |k: f64| cfg.level_tol.max(1e-11 * k);
    let mut failing = Vec::new();
    for (i, (&k, r)) in ladder.levels.iter().zip(&residuals).enumerate() {
        let matched = scan_levels.iter().any(|&s| (s - k).abs() <= tol_for(k));
        if r.abs() > cfg.residual_tol || !matched {
            failing.push(i);
        }
    }
    let missed = scan_levels
        .iter()
        .cloned()
        .filter(|&s| !ladder.levels.iter().any(|&k| (s - k).abs() <= tol_for(s)))
        .collect();
    Ok(LadderReport { residuals, failing, missed, scan_levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{convert_energy, UnitSystem};
    use proptest::prelude::*;

    fn ev(x: f64) -> f64 {
        convert_energy(x, UnitSystem::default())
    }

    fn double_well() -> DoubleLayerSpec {
        DoubleLayerSpec::new(ev(-0.3), 2.117948, ev(-0.5), 12.0, 20.0)
    }

    #[test]
    fn branch_selection() {
        let p = build_chi_problem(&double_well()).unwrap();
        assert_eq!(p.branch, WellBranch::Second);
        assert!((p.rho - 13.7).abs() < 0.1);
        let both_barriers = DoubleLayerSpec::new(1.0, 1.0, 2.0, 1.0, 1.0);
        assert_eq!(build_chi_problem(&both_barriers), Err(Error::NoBoundSector));
        let sym = DoubleLayerSpec::new(-2.0, 1.3, -2.0, 1.3, 0.4);
        let p = build_chi_problem(&sym).unwrap();
        assert_eq!(p.branch, WellBranch::First);
        assert!((p.rho - 2f64.sqrt() * 1.3).abs() < 1e-15);
        assert_eq!(p.ratio, 1.0);
    }

    #[test]
    fn y_domain() {
        let p = build_chi_problem(&double_well()).unwrap();
        assert!(y_of_chi(&p, 0.0).is_err());
        assert!(y_of_chi(&p, p.rho).is_err());
        assert!(y_of_chi(&p, 1.0).unwrap().is_finite());
    }

    #[test]
    fn barrier_well_y_negative_near_origin() {
        let spec = DoubleLayerSpec::new(-2.0, 3.0, 1.5, 1.0, 0.5);
        let p = build_chi_problem(&spec).unwrap();
        let y = y_of_chi(&p, 1e-3).unwrap();
        assert!(y < 0.0 && y > -1e-2, "{y}");
    }

    #[test]
    fn single_well_pole_at_rho_over_sqrt2() {
        let spec = DoubleLayerSpec::new(-4.0, 1.7, 0.0, 0.0, 0.0);
        let p = build_chi_problem(&spec).unwrap();
        let poles = p.poles(&ChiConfig::default());
        assert_eq!(poles.len(), 1);
        assert!((poles[0] - p.rho / 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn barrier_well_has_one_pole_approaching_rho_over_sqrt2() {
        for r in [0.5, 3.0, 8.0] {
            let spec = DoubleLayerSpec::new(-2.0, 3.0, 1.5, 1.0, r);
            let p = build_chi_problem(&spec).unwrap();
            let poles = p.poles(&ChiConfig::default());
            assert_eq!(poles.len(), 1, "r = {r}");
        }
        let far = build_chi_problem(&DoubleLayerSpec::new(-2.0, 3.0, 1.5, 1.0, 40.0)).unwrap();
        let pole = far.poles(&ChiConfig::default())[0];
        assert!((pole - far.rho / 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn double_well_ladder_has_six_levels() {
        let ladder = ladder_of(&double_well()).unwrap();
        let expected = [0.33244, 0.57950, 0.71225, 0.92224, 1.05113, 1.12258];
        assert_eq!(ladder.len(), expected.len());
        for (k, e) in ladder.levels.iter().zip(expected) {
            assert!((k - e).abs() < 2e-5, "{k} vs {e}");
        }
        let report = verify_ladder(&double_well(), &ladder).unwrap();
        assert!(report.ok(), "{report:?}");
    }

    #[test]
    fn barrier_well_level_at_unit_epsilon() {
        let spec = DoubleLayerSpec::new(ev(0.5), 1.0, ev(-0.5), 0.597599, 2.0);
        let ladder = ladder_of(&spec).unwrap();
        assert_eq!(ladder.len(), 1);
        assert!((ladder.levels[0] - 0.320).abs() < 5e-3);
        assert!(ladder.roots[0] < std::f64::consts::FRAC_PI_2);
        assert!(verify_ladder(&spec, &ladder).unwrap().ok());
    }

    #[test]
    fn roots_satisfy_cleared_equation() {
        let spec = DoubleLayerSpec::new(-5.0, 2.0, -3.0, 1.5, 0.7);
        let p = build_chi_problem(&spec).unwrap();
        let ladder = find_roots(&p);
        assert!(ladder.len() >= 3);
        for &chi in &ladder.roots {
            assert!(p.scaled_cleared_residual(chi).abs() < 1e-10);
        }
        for w in ladder.roots.windows(2) {
            assert!(w[0] > w[1]);
        }
        for w in ladder.levels.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn small_rho_barrier_well_single_root() {
        let spec = DoubleLayerSpec::new(3.0, 0.4, -1.0, 0.5, 0.2);
        let ladder = ladder_of(&spec).unwrap();
        assert!(ladder.len() <= 1);
        let spec = DoubleLayerSpec::new(0.2, 0.4, -6.0, 0.5, 0.2);
        let ladder = ladder_of(&spec).unwrap();
        assert_eq!(ladder.len(), 1);
        assert!(ladder.roots[0] > 0.0 && ladder.roots[0] < std::f64::consts::FRAC_PI_2);
    }

    fn arb_spec() -> impl Strategy<Value = DoubleLayerSpec> {
        (-6f64..-0.2, 0.2f64..3.0, -6f64..6.0, 0.0f64..3.0, 0.0f64..3.0)
            .prop_map(|(v1, l1, v2, l2, r)| DoubleLayerSpec::new(v1, l1, v2, l2, r))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ladder_matches_direct_residual(spec in arb_spec(), swap in any::<bool>()) {
            let spec = if swap {
                DoubleLayerSpec::new(spec.layer2.v, spec.layer2.l, spec.layer1.v, spec.layer1.l, spec.r)
            } else {
                spec
            };
            if let Ok(ladder) = ladder_of(&spec) {
                let report = verify_ladder(&spec, &ladder).unwrap();
                prop_assert!(report.ok(), "{:?} {:?}", ladder, report);
            }
        }

        #[test]
        fn count_non_increasing_under_weakening(
            v1 in -8f64..-0.5, l1 in 0.3f64..3.0, v2 in -8f64..-0.5, l2 in 0.3f64..3.0, r in 0.0f64..2.0,
        ) {
            let mut prev = usize::MAX;
            for i in 0..12 {
                let scale = 1.0 - i as f64 / 12.0;
                let spec = DoubleLayerSpec::new(v1 * scale, l1, v2 * scale, l2, r);
                let n = ladder_of(&spec).unwrap().len();
                prop_assert!(n <= prev);
                prev = n;
            }
        }
    }
}
