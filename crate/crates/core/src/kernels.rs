//! Even/odd trigonometric kernels of w = z².
//!
//! `c(w) = cos √w` and `s(w) = sin √w / √w` are entire in w, so a negative
//! argument yields cosh/sinh without any square-root branch choice.

const SERIES_SWITCH: f64 = 1e-6;

/// cos √w, analytic continuation to w < 0.
pub fn c(w: f64) -> f64 {
    if w.abs() < SERIES_SWITCH {
        1.0 - w / 2.0 + w * w / 24.0 - w * w * w / 720.0
    } else if w > 0.0 {
        w.sqrt().cos()
    } else {
        (-w).sqrt().cosh()
    }
}

/// sin √w / √w, analytic continuation to w < 0.
pub fn s(w: f64) -> f64 {
    if w.abs() < SERIES_SWITCH {
        1.0 - w / 6.0 + w * w / 120.0 - w * w * w / 5040.0
    } else if w > 0.0 {
        let z = w.sqrt();
        z.sin() / z
    } else {
        let z = (-w).sqrt();
        z.sinh() / z
    }
}

/// tanh(x)/x with the x → 0 limit.
pub fn tanhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0
    } else {
        x.tanh() / x
    }
}
