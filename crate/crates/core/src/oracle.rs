//! Brute-force reference: direct integration of −ψ″ + Vψ = k²ψ across the
//! structure, independent of the transfer-matrix algebra.

use num_complex::Complex64;
use crate::par::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::refine;
use crate::structure::{validate_spec, DoubleLayerSpec, Wavenumber};
use crate::xfer::ScatteringData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Classical fourth-order Runge–Kutta, steps aligned to the pieces.
    Rk4,
    /// Exact exponential propagation on each constant piece.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    /// Largest step (nm).
    pub step: f64,
    pub method: Method,
    /// Uniform κ samples in the bound-state shooting scan.
    pub bound_samples: usize,
}

impl IntegrationConfig {
    /// Step fine enough for RK4 at wavenumbers up to `k_max`: at most 1/16 of
    /// the narrowest piece and 0.01 of the shortest local wavelength scale.
    pub fn for_spec(spec: &DoubleLayerSpec, k_max: f64) -> Self {
        let scale = (spec.max_abs_potential() + k_max * k_max).sqrt().max(1.0);
        let step = max_step(spec).unwrap_or(f64::INFINITY).min(0.01 / scale);
        Self { step, method: Method::Rk4, bound_samples: 400 }
    }

    pub fn exact() -> Self {
        Self { step: f64::INFINITY, method: Method::Exact, bound_samples: 400 }
    }
}

fn max_step(spec: &DoubleLayerSpec) -> Option<f64> {
    [spec.layer1.l, spec.layer2.l, spec.r]
        .into_iter()
        .filter(|&w| w > 0.0)
        .fold(None, |m: Option<f64>, w| Some(m.map_or(w, |m| m.min(w))))
        .map(|w| w / 16.0)
}

fn check(spec: &DoubleLayerSpec, cfg: &IntegrationConfig) -> Result<()> {
    validate_spec(*spec)?;
    if cfg.method == Method::Rk4 {
        let max = max_step(spec).unwrap_or(f64::INFINITY);
        if !(cfg.step > 0.0) || cfg.step > max {
            return Err(Error::StepTooCoarse { h: cfg.step, max });
        }
    }
    Ok(())
}

/// Real 2×2 fundamental matrix of one constant piece, columns are the
/// solutions with (ψ, ψ′)(0) = (1, 0) and (0, 1).
type Fundamental = [[f64; 2]; 2];

fn mul(a: &Fundamental, b: &Fundamental) -> Fundamental {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// ψ″ = q2 ψ over a length `len` by RK4 with steps not exceeding `h`.
fn rk4_piece(q2: f64, len: f64, h: f64) -> Fundamental {
    let n = (len / h).ceil().max(1.0) as usize;
    let dt = len / n as f64;
    let mut cols = [[1.0, 0.0], [0.0, 1.0]];
    for col in cols.iter_mut() {
        let (mut y, mut dy) = (col[0], col[1]);
        for _ in 0..n {
            let (k1y, k1d) = (dy, q2 * y);
            let (k2y, k2d) = (dy + 0.5 * dt * k1d, q2 * (y + 0.5 * dt * k1y));
            let (k3y, k3d) = (dy + 0.5 * dt * k2d, q2 * (y + 0.5 * dt * k2y));
            let (k4y, k4d) = (dy + dt * k3d, q2 * (y + dt * k3y));
            y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            dy += dt / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        }
        *col = [y, dy];
    }
    [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]
}

/// Same propagator from complex exponentials.
fn exact_piece(q2: f64, len: f64) -> Fundamental {
    let q = Complex64::new(q2, 0.0).sqrt();
    let z = q * len;
    let (ep, em) = (z.exp(), (-z).exp());
    let ch = 0.5 * (ep + em);
    let sh_over_q = if z.norm() < 1e-8 { Complex64::new(len, 0.0) } else { 0.5 * (ep - em) / q };
    let q_sh = 0.5 * (ep - em) * q;
    [[ch.re, sh_over_q.re], [q_sh.re, ch.re]]
}

/// Fundamental matrix over [0, L] at energy k².
fn fundamental(spec: &DoubleLayerSpec, k2: f64, cfg: &IntegrationConfig) -> Fundamental {
    let pieces = [(spec.layer1.v, spec.layer1.l), (0.0, spec.r), (spec.layer2.v, spec.layer2.l)];
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for (v, len) in pieces {
        if len <= 0.0 {
            continue;
        }
        let p = match cfg.method {
            Method::Rk4 => rk4_piece(v - k2, len, cfg.step),
            Method::Exact => exact_piece(v - k2, len),
        };
        m = mul(&p, &m);
    }
    m
}

/// a(k), b(k) by integrating the left-incident solution e^{−ikx} through the
/// structure and matching plane waves at x = L.
pub fn integrate_scatter(spec: &DoubleLayerSpec, k: f64, cfg: &IntegrationConfig) -> Result<ScatteringData> {
    Wavenumber::real(k)?;
    check(spec, cfg)?;
    let m = fundamental(spec, k * k, cfg);
    let (p0, d0) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, -k));
    let p = m[0][0] * p0 + m[0][1] * d0;
    let d = m[1][0] * p0 + m[1][1] * d0;
    let i = Complex64::new(0.0, 1.0);
    let l = spec.extent();
    let phase = Complex64::from_polar(1.0, k * l);
    Ok(ScatteringData { a: 0.5 * (p + i * d / k) * phase, b: 0.5 * (p - i * d / k) / phase })
}

/// [`integrate_scatter`] over a k-grid, in parallel, results in grid order.
pub fn integrate_scatter_grid(spec: &DoubleLayerSpec, ks: &[f64], cfg: &IntegrationConfig) -> Result<Vec<ScatteringData>> {
    ks.par_iter().map(|&k| integrate_scatter(spec, k, cfg)).collect()
}

/// ψ′(L) + κψ(L) for the solution decaying to the left.
fn shooting_mismatch(spec: &DoubleLayerSpec, kappa: f64, cfg: &IntegrationConfig) -> f64 {
    let m = fundamental(spec, -kappa * kappa, cfg);
    let p = m[0][0] + m[0][1] * kappa;
    let d = m[1][0] + m[1][1] * kappa;
    d + kappa * p
}

/// Bound-state decay rates κ (ascending) by shooting.
pub fn integrate_bound(spec: &DoubleLayerSpec, cfg: &IntegrationConfig) -> Result<Vec<f64>> {
    check(spec, cfg)?;
    let depth = [spec.layer1, spec.layer2]
        .iter()
        .filter(|l| l.l > 0.0 && l.v < 0.0)
        .map(|l| -l.v)
        .fold(0.0, f64::max);
    if depth == 0.0 {
        return Ok(Vec::new());
    }
    let kmax = depth.sqrt();
    let n = cfg.bound_samples.max(16);
    let mut grid: Vec<f64> = (1..n).map(|i| kmax * i as f64 / n as f64).collect();
    grid.extend((1..=40).map(|j| kmax / n as f64 * 0.5f64.powi(j)));
    grid.push(kmax * (1.0 - 1e-12));
    grid.sort_by(f64::total_cmp);
    let values: Vec<f64> = grid.par_iter().map(|&kp| shooting_mismatch(spec, kp, cfg)).collect();
    let brackets: Vec<(f64, f64, f64, f64)> = grid
        .windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| v[0] != 0.0 && v[0].signum() != v[1].signum())
        .map(|(x, v)| (x[0], x[1], v[0], v[1]))
        .collect();
    let mut levels: Vec<f64> = brackets
        .par_iter()
        .map(|&(a, b, fa, fb)| refine(|kp| shooting_mismatch(spec, kp, cfg), a, b, fa, fb, 1e-14 * b))
        .collect();
    levels.extend(grid.iter().zip(&values).filter(|(_, v)| **v == 0.0).map(|(x, _)| *x));
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xfer::scattering_data;

    fn rel(a: &ScatteringData, b: &ScatteringData) -> f64 {
        ((a.a - b.a).norm() + (a.b - b.b).norm()) / b.a.norm()
    }

    #[test]
    fn free_structure_is_transparent() {
        let spec = DoubleLayerSpec::new(0.0, 1.0, 0.0, 2.0, 0.5);
        for cfg in [IntegrationConfig::for_spec(&spec, 3.0), IntegrationConfig::exact()] {
            let sd = integrate_scatter(&spec, 1.3, &cfg).unwrap();
            assert!((sd.a - 1.0).norm() < 1e-9 && sd.b.norm() < 1e-9, "{sd:?}");
        }
    }

    #[test]
    fn coarse_step_rejected() {
        let spec = DoubleLayerSpec::new(-1.0, 1.0, 1.0, 2.0, 0.5);
        let cfg = IntegrationConfig { step: 0.1, method: Method::Rk4, bound_samples: 400 };
        assert!(matches!(integrate_scatter(&spec, 1.0, &cfg), Err(Error::StepTooCoarse { .. })));
        assert!(integrate_scatter(&spec, 1.0, &IntegrationConfig::exact()).is_ok());
    }

    #[test]
    fn barrier_well_spec_matches_transfer_matrices() {
        let ev = 2.62464;
        let spec = DoubleLayerSpec::new(0.5 * ev, 1.0, -0.5 * ev, 0.6, 2.0);
        let k = 1.04986f64.sqrt();
        let reference = scattering_data(&spec, Wavenumber::Real(k));
        for cfg in [IntegrationConfig::for_spec(&spec, k), IntegrationConfig::exact()] {
            let sd = integrate_scatter(&spec, k, &cfg).unwrap();
            assert!(rel(&sd, &reference) < 1e-6, "{cfg:?}");
            assert!(sd.unitarity_defect().abs() < 1e-6);
        }
    }

    #[test]
    fn barriers_have_no_levels() {
        let spec = DoubleLayerSpec::new(1.0, 1.0, 0.5, 2.0, 0.5);
        assert!(integrate_bound(&spec, &IntegrationConfig::exact()).unwrap().is_empty());
    }

    #[test]
    fn single_well_textbook_levels() {
        // Even/odd conditions k tan(ka) = κ and −k cot(ka) = κ for half-width a.
        let (v, w) = (6.0f64, 4.0f64);
        let spec = DoubleLayerSpec::new(-v, w, 0.0, 0.0, 0.0);
        let a = w / 2.0;
        let even = |kp: f64| {
            let k = (v - kp * kp).sqrt();
            k * (k * a).sin() - kp * (k * a).cos()
        };
        let odd = |kp: f64| {
            let k = (v - kp * kp).sqrt();
            -k * (k * a).cos() - kp * (k * a).sin()
        };
        let xs: Vec<f64> = (1..20000).map(|i| v.sqrt() * i as f64 / 20000.0).collect();
        let mut expected = crate::roots::sign_change_roots(even, &xs, 1e-15);
        expected.extend(crate::roots::sign_change_roots(odd, &xs, 1e-15));
        expected.sort_by(f64::total_cmp);
        for cfg in [IntegrationConfig::for_spec(&spec, 0.0), IntegrationConfig::exact()] {
            let got = integrate_bound(&spec, &cfg).unwrap();
            assert_eq!(got.len(), expected.len());
            for (g, e) in got.iter().zip(&expected) {
                assert!((g - e).abs() < 1e-7, "{g} {e}");
            }
        }
    }
}
