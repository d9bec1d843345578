//! Transfer matrices, scattering data and piecewise wavefunctions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{c, s};
use crate::structure::{DoubleLayerSpec, LayerSpec, Wavenumber};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Real 2×2 matrix mapping (ψ, ψ′) at the left end of an interval to the right end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub l11: f64,
    pub l12: f64,
    pub l21: f64,
    pub l22: f64,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        Self { l11: 1.0, l12: 0.0, l21: 0.0, l22: 1.0 }
    }

    pub fn det(&self) -> f64 {
        self.l11 * self.l22 - self.l12 * self.l21
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            l11: self.l11 * rhs.l11 + self.l12 * rhs.l21,
            l12: self.l11 * rhs.l12 + self.l12 * rhs.l22,
            l21: self.l21 * rhs.l11 + self.l22 * rhs.l21,
            l22: self.l21 * rhs.l12 + self.l22 * rhs.l22,
        }
    }

    pub fn apply(&self, psi: Complex64, dpsi: Complex64) -> (Complex64, Complex64) {
        (self.l11 * psi + self.l12 * dpsi, self.l21 * psi + self.l22 * dpsi)
    }

    /// Largest absolute entry, used to scale residuals.
    pub fn max_abs(&self) -> f64 {
        self.l11.abs().max(self.l12.abs()).max(self.l21.abs()).max(self.l22.abs())
    }
}

/// cos, sin/k_j and k_j·sin of one layer, all as real numbers.
#[derive(Debug, Clone, Copy)]
struct LayerTrig {
    cos: f64,
    sin_over_k: f64,
    k_sin: f64,
}

fn layer_trig(k2: f64, v: f64, l: f64) -> LayerTrig {
    let kj2 = k2 - v;
    let w = kj2 * l * l;
    let sv = l * s(w);
    LayerTrig { cos: c(w), sin_over_k: sv, k_sin: kj2 * sv }
}

/// Transfer matrix of a single layer of strength `layer.v` and width `layer.l`.
pub fn layer_matrix(layer: LayerSpec, k: Wavenumber) -> TransferMatrix {
    let t = layer_trig(k.k_squared(), layer.v, layer.l);
    TransferMatrix { l11: t.cos, l12: t.sin_over_k, l21: -t.k_sin, l22: t.cos }
}

/// Λ = Λ₂ Λ₀ Λ₁ as a matrix product.
pub fn total_matrix(spec: &DoubleLayerSpec, k: Wavenumber) -> TransferMatrix {
    let m1 = layer_matrix(spec.layer1, k);
    let m0 = layer_matrix(LayerSpec::new(0.0, spec.r), k);
    let m2 = layer_matrix(spec.layer2, k);
    m2.mul(&m0.mul(&m1))
}

/// Λ from the expanded four-entry formulas instead of the product.
pub fn total_matrix_explicit(spec: &DoubleLayerSpec, k: Wavenumber) -> TransferMatrix {
    let k2 = k.k_squared();
    let t1 = layer_trig(k2, spec.layer1.v, spec.layer1.l);
    let t2 = layer_trig(k2, spec.layer2.v, spec.layer2.l);
    let t0 = layer_trig(k2, 0.0, spec.r);
    let (c1, s1, q1) = (t1.cos, t1.sin_over_k, t1.k_sin);
    let (c2, s2, q2) = (t2.cos, t2.sin_over_k, t2.k_sin);
    let (c0, s0, q0) = (t0.cos, t0.sin_over_k, t0.k_sin);
    TransferMatrix {
        l11: (c1 * c2 - q1 * s2) * c0 - (q1 * c2 * s0 + c1 * s2 * q0),
        l12: (s1 * c2 + c1 * s2) * c0 + c1 * c2 * s0 - q0 * s1 * s2,
        l21: -(q1 * c2 + c1 * q2) * c0 - c1 * c2 * q0 + q1 * q2 * s0,
        l22: (c1 * c2 - q2 * s1) * c0 - (s1 * c2 * q0 + c1 * q2 * s0),
    }
}

/// Monodromy entries a(k), b(k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringData {
    pub a: Complex64,
    pub b: Complex64,
}

impl ScatteringData {
    /// |a|² − |b|² − 1.
    pub fn unitarity_defect(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr() - 1.0
    }
}

/// a, b from a transfer matrix on [x₁, x₂].
pub fn scattering_from_matrix(m: &TransferMatrix, k: Wavenumber, x1: f64, x2: f64) -> ScatteringData {
    let kc = k.to_complex();
    let d = m.l11 + m.l22 - I * (kc * m.l12 - m.l21 / kc);
    let p = Complex64::new(m.l11 - m.l22, 0.0);
    let q = kc * m.l12 + m.l21 / kc;
    ScatteringData {
        a: 0.5 * d * (I * kc * (x2 - x1)).exp(),
        b: 0.5 * (p - I * q) * (-I * kc * (x1 + x2)).exp(),
    }
}

/// Scattering data through the Λ-matrix product.
pub fn scattering_data_matrix(spec: &DoubleLayerSpec, k: Wavenumber) -> ScatteringData {
    scattering_from_matrix(&total_matrix(spec, k), k, 0.0, spec.extent())
}

const CLOSED_FORM_MIN_COS: f64 = 1e-6;
const CLOSED_FORM_MIN_KL: f64 = 1e-8;

/// Scattering data from the tan-form closed expressions.
///
/// Returns `None` when cos(k_j l_j) is too close to zero or k_j l_j vanishes,
/// where the removable factors make the expressions ill-conditioned.
pub fn scattering_data_closed_form(spec: &DoubleLayerSpec, k: Wavenumber) -> Option<ScatteringData> {
    let kc = k.to_complex();
    let k2 = kc * kc;
    let kj = |v: f64| (k2 - v).sqrt();
    let (k1, k2j) = (kj(spec.layer1.v), kj(spec.layer2.v));
    let (z1, z2) = (k1 * spec.layer1.l, k2j * spec.layer2.l);
    let (c1, c2) = (z1.cos(), z2.cos());
    if c1.norm() < CLOSED_FORM_MIN_COS || c2.norm() < CLOSED_FORM_MIN_COS {
        return None;
    }
    // Absent layers contribute tan = 0 whatever k_j is.
    let tan_or_zero = |z: Complex64, kj: Complex64, l: f64| {
        if l == 0.0 {
            Some(Complex64::new(0.0, 0.0))
        } else if (kj * l).norm() < CLOSED_FORM_MIN_KL {
            None
        } else {
            Some(ctan(z))
        }
    };
    let t1 = tan_or_zero(z1, k1, spec.layer1.l)?;
    let t2 = tan_or_zero(z2, k2j, spec.layer2.l)?;
    // With t_j = 0 the k_j ratios drop out; guard the division anyway.
    let safe = |z: Complex64| if z.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { z };
    let (k1, k2j) = (safe(k1), safe(k2j));
    let r = spec.r;
    let ekr = (I * kc * r).exp();
    let emkr = (-I * kc * r).exp();
    let (sin_kr, cos_kr) = ((kc * r).sin(), (kc * r).cos());
    let len = spec.extent();
    let cc = c1 * c2;

    let a_brace = emkr
        - 0.5 * I * ((kc / k1 + k1 / kc) * t1 + (kc / k2j + k2j / kc) * t2) * emkr
        + 0.5
            * (I * (k2 / (k1 * k2j) + k1 * k2j / k2) * sin_kr - (k1 / k2j + k2j / k1) * cos_kr)
            * t1
            * t2;
    let b_brace = (k1 / kc - kc / k1) * t1 * ekr
        + (k2j / kc - kc / k2j) * t2 * emkr
        + ((k2 / (k1 * k2j) - k1 * k2j / k2) * sin_kr + I * (k1 / k2j - k2j / k1) * cos_kr) * t1 * t2;
    Some(ScatteringData {
        a: cc * a_brace * (I * kc * len).exp(),
        b: cc * 0.5 * I * b_brace * (-I * kc * len).exp(),
    })
}

/// Complex tangent accurate near the real poles, where the double-angle
/// form cos 2x + cosh 2y cancels.
pub(crate) fn ctan(z: Complex64) -> Complex64 {
    if z.im.abs() < 1.0 {
        z.sin() / z.cos()
    } else {
        z.tan()
    }
}

/// Scattering data: closed form by default, Λ-product where it is ill-conditioned.
pub fn scattering_data(spec: &DoubleLayerSpec, k: Wavenumber) -> ScatteringData {
    scattering_data_closed_form(spec, k).unwrap_or_else(|| scattering_data_matrix(spec, k))
}

/// Reflection and transmission amplitudes for incidence from either side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RTCoefficients {
    pub r_right: Complex64,
    pub t_right: Complex64,
    pub r_left: Complex64,
    pub t_left: Complex64,
}

pub fn reflection_transmission(sd: &ScatteringData) -> Result<RTCoefficients> {
    let scale = 1.0 + sd.b.norm();
    if sd.a.norm() <= 1e-300 * scale || sd.a.norm() == 0.0 {
        return Err(Error::TransmissionPole);
    }
    let t = 1.0 / sd.a;
    Ok(RTCoefficients { r_right: sd.b / sd.a, t_right: t, r_left: -sd.b.conj() / sd.a, t_left: t })
}

/// λ11 + λ22 + κλ12 + λ21/κ; its zeros are the bound-state levels.
pub fn bound_state_residual(spec: &DoubleLayerSpec, kappa: f64) -> Result<f64> {
    let k = Wavenumber::imaginary(kappa)?;
    let m = total_matrix(spec, k);
    Ok(m.l11 + m.l22 + kappa * m.l12 + m.l21 / kappa)
}

/// Residual divided by the sum of the magnitudes of its four terms.
pub fn scaled_bound_residual(spec: &DoubleLayerSpec, kappa: f64) -> Result<f64> {
    let k = Wavenumber::imaginary(kappa)?;
    let m = total_matrix(spec, k);
    let terms = [m.l11, m.l22, kappa * m.l12, m.l21 / kappa];
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    Ok(terms.iter().sum::<f64>() / scale.max(f64::MIN_POSITIVE))
}

/// Default eigenvalue tolerance on the scaled residual for bound-mode waves.
pub const EIGEN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: f64,
    end: f64,
    kj2: f64,
    psi: Complex64,
    dpsi: Complex64,
}

/// Wavefunction φ₁ on the whole axis, built region by region.
#[derive(Debug, Clone)]
pub struct PiecewiseWave {
    pub spec: DoubleLayerSpec,
    pub k: Wavenumber,
    pub data: ScatteringData,
    segments: [Segment; 3],
}

impl PiecewiseWave {
    fn plane(&self, x: f64) -> (Complex64, Complex64) {
        let kc = self.k.to_complex();
        let em = (-I * kc * x).exp();
        (em, -I * kc * em)
    }

    fn right(&self, x: f64) -> (Complex64, Complex64) {
        let kc = self.k.to_complex();
        let em = (-I * kc * x).exp();
        let ep = (I * kc * x).exp();
        (self.data.a * em + self.data.b * ep, I * kc * (self.data.b * ep - self.data.a * em))
    }

    fn inside(seg: &Segment, x: f64) -> (Complex64, Complex64) {
        let d = x - seg.start;
        let w = seg.kj2 * d * d;
        let (cv, sv) = (c(w), d * s(w));
        (seg.psi * cv + seg.dpsi * sv, -seg.kj2 * sv * seg.psi + seg.dpsi * cv)
    }

    /// (φ(x), φ′(x)). Breakpoints belong to the region on their left.
    pub fn eval_with_derivative(&self, x: f64) -> (Complex64, Complex64) {
        if x <= 0.0 {
            return self.plane(x);
        }
        for seg in &self.segments {
            if x <= seg.end {
                return Self::inside(seg, x);
            }
        }
        self.right(x)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.eval_with_derivative(x).0
    }

    /// One-sided limits (left, right) of (φ, φ′) at breakpoint `index` (0..4).
    pub fn one_sided(&self, index: usize) -> ((Complex64, Complex64), (Complex64, Complex64)) {
        let x = self.spec.breakpoints()[index];
        let left = if index == 0 { self.plane(x) } else { Self::inside(&self.segments[index - 1], x) };
        let right = if index == 3 { self.right(x) } else { Self::inside(&self.segments[index], x) };
        (left, right)
    }

    /// Largest relative mismatch of φ or φ′ across the four breakpoints.
    pub fn max_continuity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            let ((l, dl), (r, dr)) = self.one_sided(i);
            let scale = 1.0 + l.norm().max(r.norm());
            let dscale = 1.0 + dl.norm().max(dr.norm());
            worst = worst.max((l - r).norm() / scale).max((dl - dr).norm() / dscale);
        }
        worst
    }
}

/// φ₁ for real k, or the bound eigenfunction for k = iκ when κ is a level.
pub fn scattering_wavefunction(spec: &DoubleLayerSpec, k: Wavenumber) -> Result<PiecewiseWave> {
    scattering_wavefunction_with_tol(spec, k, EIGEN_TOL)
}

pub fn scattering_wavefunction_with_tol(
    spec: &DoubleLayerSpec,
    k: Wavenumber,
    eigen_tol: f64,
) -> Result<PiecewiseWave> {
    let kc = k.to_complex();
    let k2 = k.k_squared();
    let [x0, x1, x2, x3] = spec.breakpoints();
    let mut psi = Complex64::new(1.0, 0.0);
    let mut dpsi = -I * kc;
    let pieces = [(x0, x1, spec.layer1.v), (x1, x2, 0.0), (x2, x3, spec.layer2.v)];
    let mut segments = [Segment { start: 0.0, end: 0.0, kj2: 0.0, psi, dpsi }; 3];
    for (seg, &(start, end, v)) in segments.iter_mut().zip(pieces.iter()) {
        *seg = Segment { start, end, kj2: k2 - v, psi, dpsi };
        let m = layer_matrix(LayerSpec::new(v, end - start), k);
        (psi, dpsi) = m.apply(psi, dpsi);
    }
    let data = match k {
        Wavenumber::Real(_) => scattering_data(spec, k),
        Wavenumber::Imaginary(kappa) => {
            let residual = scaled_bound_residual(spec, kappa)?;
            if residual.abs() > eigen_tol {
                return Err(Error::NotAnEigenvalue { kappa, residual });
            }
            ScatteringData { a: Complex64::new(0.0, 0.0), b: psi * (kappa * x3).exp() }
        }
    };
    Ok(PiecewiseWave { spec: *spec, k, data, segments })
}

/// The equivalent θ expressions that hold when the gap is tuned so that Δ(k) = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaIdentities {
    /// Gap r* = (k₁t₁ + k₂t₂)/(k₁t₁k₂t₂).
    pub r_star: f64,
    /// z₁(k)·cos(k₁l₁)cos(k₂l₂) and the three right-hand forms.
    pub theta: [f64; 4],
    /// z₂(k)·cos(k₁l₁)cos(k₂l₂), expected to equal 1/θ.
    pub theta_inverse: f64,
}

/// Evaluates the θ identities for layer parameters at real k; `None` when
/// k₁t₁k₂t₂ = 0 so that no finite r* exists.
pub fn theta_identities(v1: f64, l1: f64, v2: f64, l2: f64, k: f64) -> Option<ThetaIdentities> {
    let k2 = k * k;
    let a = layer_trig(k2, v1, l1);
    let b = layer_trig(k2, v2, l2);
    // k_j t_j = k_j sin / cos, real on both rays.
    let kt1 = a.k_sin / a.cos;
    let kt2 = b.k_sin / b.cos;
    if kt1 * kt2 == 0.0 || !(kt1 * kt2).is_finite() {
        return None;
    }
    let r = (kt1 + kt2) / (kt1 * kt2);
    let cc = a.cos * b.cos;
    // (k₁/k₂) t₁t₂ · cos₁cos₂ = k₁ sin₁ · sin₂/k₂.
    let z1 = cc * (1.0 - kt1 * r) - a.k_sin * b.sin_over_k;
    let z2 = cc * (1.0 - kt2 * r) - b.k_sin * a.sin_over_k;
    Some(ThetaIdentities {
        r_star: r,
        theta: [
            z1,
            -a.k_sin / b.k_sin,
            (a.cos - r * a.k_sin) / b.cos,
            a.cos / (b.cos - r * b.k_sin),
        ],
        theta_inverse: z2,
    })
}
