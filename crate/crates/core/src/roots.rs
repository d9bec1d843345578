//! Bracketed scalar root refinement.

/// Refines a sign change of `f` on [a, b] (with `fa`, `fb` already evaluated)
/// until the bracket is narrower than `xtol`. Uses Illinois regula falsi with
/// a bisection fallback, so convergence never degrades below bisection.
pub fn refine<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa.signum() != fb.signum());
    let mut side = 0i8;
    for iter in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        let mut x = if iter % 4 == 3 {
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !x.is_finite() || x <= a.min(b) || x >= a.max(b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if !fa.is_finite() || !fb.is_finite() {
            break;
        }
    }
    0.5 * (a + b)
}

/// Finds every sign change of `f` on the sorted sample points and refines each.
pub fn sign_change_roots<F: FnMut(f64) -> f64>(mut f: F, xs: &[f64], xtol: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in xs {
        let fx = f(x);
        if !fx.is_finite() {
            prev = None;
            continue;
        }
        if let Some((xp, fp)) = prev {
            if fp == 0.0 {
                out.push(xp);
            } else if fx != 0.0 && fp.signum() != fx.signum() {
                out.push(refine(&mut f, xp, x, fp, fx, xtol));
            }
        }
        prev = Some((x, fx));
    }
    if let Some((xp, fp)) = prev {
        if fp == 0.0 && out.last() != Some(&xp) {
            out.push(xp);
        }
    }
    out
}
