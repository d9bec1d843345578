//! wasm-bindgen entry points for the static demo page in `www/`.
//!
//! Energies come in eV and are converted at 2.62464 nm⁻²/eV; lengths are nm.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use double_layer::bound::{build_chi_problem, find_roots, ladder_of};
use double_layer::squeeze::{analyze_resonance, log_grid, sweep_ladder, Scenario, SqueezeFamily, SweepConfig};
use double_layer::xfer::{reflection_transmission, scattering_data, scattering_wavefunction};
use double_layer::{convert_energy, validate_spec, DoubleLayerSpec, UnitSystem, Wavenumber};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn ev(x: f64) -> f64 {
    convert_energy(x, UnitSystem::default())
}

fn spec_ev(v1: f64, l1: f64, v2: f64, l2: f64, r: f64) -> Result<DoubleLayerSpec, String> {
    validate_spec(DoubleLayerSpec::new(ev(v1), l1, ev(v2), l2, r)).map_err(|e| e.to_string())
}

fn grid(start: f64, stop: f64, n: usize) -> Result<Vec<f64>, String> {
    if n < 2 || !(stop > start) || !start.is_finite() || !stop.is_finite() {
        return Err("grid needs n ≥ 2 and start < stop".into());
    }
    Ok((0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect())
}

/// Interleaved (E, |T|²) pairs for energies E in eV.
#[allow(clippy::too_many_arguments)]
pub fn transmission(v1: f64, l1: f64, v2: f64, l2: f64, r: f64, e_min: f64, e_max: f64, n: usize) -> Result<Vec<f64>, String> {
    let spec = spec_ev(v1, l1, v2, l2, r)?;
    let mut out = Vec::with_capacity(2 * n);
    for e in grid(e_min.max(1e-9), e_max, n)? {
        let k = Wavenumber::from_energy(ev(e)).map_err(|x| x.to_string())?;
        let t2 = reflection_transmission(&scattering_data(&spec, k)).map_or(f64::NAN, |rt| rt.t_left.norm_sqr());
        out.extend([e, t2]);
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct Profile {
    pub x: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub abs: Vec<f64>,
    pub potential: Vec<f64>,
    /// Bound levels of the structure (nm⁻¹).
    pub levels: Vec<f64>,
    /// κ (nm⁻¹) of the plotted state, or the real k for scattering.
    pub k: f64,
    pub bound: bool,
}

/// φ(x) of bound level `level` when `level ≥ 0`, otherwise the scattering state at energy `energy` eV.
#[allow(clippy::too_many_arguments)]
pub fn profile(v1: f64, l1: f64, v2: f64, l2: f64, r: f64, level: i32, energy: f64, n: usize) -> Result<Profile, String> {
    let spec = spec_ev(v1, l1, v2, l2, r)?;
    let levels = ladder_of(&spec).map(|l| l.levels).unwrap_or_default();
    let (k, bound) = if level >= 0 {
        let kappa = *levels
            .get(level as usize)
            .ok_or_else(|| format!("level {level} absent: the structure has {} bound states", levels.len()))?;
        (Wavenumber::imaginary(kappa).map_err(|e| e.to_string())?, true)
    } else {
        (Wavenumber::from_energy(ev(energy)).map_err(|e| e.to_string())?, false)
    };
    let w = scattering_wavefunction(&spec, k).map_err(|e| e.to_string())?;
    let width = spec.extent();
    let mut margin = (0.5 * width).max(2.0);
    if bound {
        margin = margin.max(4.0 / k.to_complex().im);
    }
    let xs = grid(-margin, width + margin, n)?;
    let mut p = Profile {
        x: Vec::with_capacity(n),
        re: Vec::with_capacity(n),
        im: Vec::with_capacity(n),
        abs: Vec::with_capacity(n),
        potential: Vec::with_capacity(n),
        levels,
        k: if bound { k.to_complex().im } else { k.to_complex().re },
        bound,
    };
    // Bound states normalized to unit peak so the plot scale is stable.
    let values: Vec<_> = xs.iter().map(|&x| w.eval(x)).collect();
    let peak = if bound { values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300) } else { 1.0 };
    for (&x, v) in xs.iter().zip(&values) {
        p.x.push(x);
        p.re.push(v.re / peak);
        p.im.push(v.im / peak);
        p.abs.push(v.norm() / peak);
        p.potential.push(spec.potential_at(x) / ev(1.0));
    }
    Ok(p)
}

#[derive(Debug, Serialize)]
pub struct Sweep {
    pub eps: Vec<f64>,
    /// Ladder per ε, ascending κ.
    pub levels: Vec<Vec<f64>>,
    pub region: String,
    pub verdict: String,
    pub theta: Option<f64>,
    pub kappa_limit: Option<f64>,
    pub scenario: String,
}

/// Ladders of a squeezing family on a decreasing log ε-grid.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    mu: f64,
    nu: f64,
    tau: f64,
    h1: f64,
    d1: f64,
    h2: f64,
    d2: f64,
    c: f64,
    eps_min: f64,
    per_decade: usize,
) -> Result<Sweep, String> {
    let f = SqueezeFamily::new(mu, nu, tau, ev(h1), d1, ev(h2), d2, c).map_err(|e| e.to_string())?;
    let eps = log_grid(1.0, eps_min, per_decade).map_err(|e| e.to_string())?;
    let an = analyze_resonance(&f, 1e-9).map_err(|e| e.to_string())?;
    let (levels, scenario) = match sweep_ladder(&f, &eps, &SweepConfig::default()) {
        Ok(s) => (
            s.points.iter().map(|p| p.ladder.as_ref().map(|l| l.levels.clone()).unwrap_or_default()).collect(),
            s.diagnostics.scenario,
        ),
        // No well to follow along the rule branch: solve each ε on its deepest well.
        Err(_) => (
            eps.iter()
                .map(|&e| {
                    f.realize(e)
                        .ok()
                        .and_then(|s| build_chi_problem(&s).ok())
                        .map(|p| find_roots(&p).levels)
                        .unwrap_or_default()
                })
                .collect(),
            Scenario::Undetermined,
        ),
    };
    Ok(Sweep {
        eps,
        levels,
        region: an.region.to_string(),
        verdict: an.verdict.to_string(),
        theta: an.theta,
        kappa_limit: an.kappa,
        scenario: format!("{scenario:?}"),
    })
}

fn js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string())).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn transmission_curve(
    v1: f64,
    l1: f64,
    v2: f64,
    l2: f64,
    r: f64,
    e_min: f64,
    e_max: f64,
    n: usize,
) -> Result<Vec<f64>, JsValue> {
    transmission(v1, l1, v2, l2, r, e_min, e_max, n).map_err(|e| JsValue::from_str(&e))
}

/// JSON-encoded [`Profile`].
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn wavefunction_profile(
    v1: f64,
    l1: f64,
    v2: f64,
    l2: f64,
    r: f64,
    level: i32,
    energy: f64,
    n: usize,
) -> Result<String, JsValue> {
    js(profile(v1, l1, v2, l2, r, level, energy, n))
}

/// JSON-encoded [`Sweep`].
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn ladder_sweep(
    mu: f64,
    nu: f64,
    tau: f64,
    h1: f64,
    d1: f64,
    h2: f64,
    d2: f64,
    c: f64,
    eps_min: f64,
    per_decade: usize,
) -> Result<String, JsValue> {
    js(sweep(mu, nu, tau, h1, d1, h2, d2, c, eps_min, per_decade))
}
