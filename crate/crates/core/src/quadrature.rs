//! Numerical integration used throughout the crate.
//!
//! Everything radial in the model reduces to one-dimensional integrals of
//! smooth functions. Adaptive Simpson handles those; the endpoint
//! singularity of the CMC profile integral is removed by substitution
//! before it gets here (see [`crate::cmc`]).

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 48;
const INITIAL_PANELS: usize = 4;
/// Relative floor on the accepted local error. Integrals that grow like
/// `exp(2r)` cannot meet a purely absolute tolerance in double precision.
const REL_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return adaptive_simpson(f, b, a, tol).map(|v| -v);
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut total = 0.0;
    // Compensated sum over accepted panels.
    let mut comp = 0.0;
    let mut stack: Vec<Panel> = Vec::with_capacity(64);
    for p in (0..INITIAL_PANELS).rev() {
        let lo = a + width * p as f64;
        let hi = if p + 1 == INITIAL_PANELS { b } else { lo + width };
        stack.push(Panel::new(&f, lo, hi, tol / INITIAL_PANELS as f64, 0));
    }
    while let Some(panel) = stack.pop() {
        let mid = 0.5 * (panel.a + panel.b);
        let lm = 0.5 * (panel.a + mid);
        let rm = 0.5 * (mid + panel.b);
        let flm = f(lm);
        let frm = f(rm);
        // Actual half widths: the rounded midpoint need not split the panel evenly.
        let left = (mid - panel.a) / 6.0 * (panel.fa + 4.0 * flm + panel.fm);
        let right = (panel.b - mid) / 6.0 * (panel.fm + 4.0 * frm + panel.fb);
        let refined = left + right;
        let diff = refined - panel.whole;
        let allowed = (15.0 * panel.tol).max(REL_FLOOR * refined.abs());
        if diff.abs() <= allowed || !diff.is_finite() && !refined.is_finite() {
            let y = refined + diff / 15.0 - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
            continue;
        }
        if panel.depth >= MAX_DEPTH || mid <= panel.a || mid >= panel.b {
            return Err(Error::Quadrature {
                a,
                b,
                max_depth: MAX_DEPTH,
            });
        }
        let half_tol = 0.5 * panel.tol;
        stack.push(Panel {
            a: mid,
            b: panel.b,
            fa: panel.fm,
            fm: frm,
            fb: panel.fb,
            whole: right,
            tol: half_tol,
            depth: panel.depth + 1,
        });
        stack.push(Panel {
            a: panel.a,
            b: mid,
            fa: panel.fa,
            fm: flm,
            fb: panel.fm,
            whole: left,
            tol: half_tol,
            depth: panel.depth + 1,
        });
    }
    if !total.is_finite() {
        return Err(Error::Quadrature {
            a,
            b,
            max_depth: MAX_DEPTH,
        });
    }
    Ok(total)
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> Self {
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5 * (a + b));
        Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole: (b - a) / 6.0 * (fa + 4.0 * fm + fb),
            tol,
            depth,
        }
    }
}

const GL10: [(f64, f64); 10] = [
    (-0.9739065285171717, 0.06667134430868807),
    (-0.8650633666889845, 0.14945134915058036),
    (-0.6794095682990244, 0.219086362515982),
    (-0.4333953941292472, 0.2692667193099965),
    (-0.14887433898163122, 0.295524224714753),
    (0.14887433898163122, 0.295524224714753),
    (0.4333953941292472, 0.2692667193099965),
    (0.6794095682990244, 0.219086362515982),
    (0.8650633666889845, 0.14945134915058036),
    (0.9739065285171717, 0.06667134430868807),
];

/// Ten-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * GL10.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
}

/// Mean value of `f` over `[a, b]` by Gauss-Legendre; exact for `a == b`.
pub fn gauss_legendre_mean<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    if a == b {
        return f(a);
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    0.5 * GL10.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((v - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn exponential_to_tolerance() {
        let v = adaptive_simpson(f64::exp, 0.0, 2.0, 1e-11).unwrap();
        assert!((v - (2f64.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let fwd = adaptive_simpson(f64::sin, 0.0, 1.0, 1e-12).unwrap();
        let back = adaptive_simpson(f64::sin, 1.0, 0.0, 1e-12).unwrap();
        assert_eq!(fwd, -back);
    }

    #[test]
    fn inverse_sqrt_singularity_is_reported() {
        let r = adaptive_simpson(|x| 1.0 / x, 0.0, 1.0, 1e-10);
        assert!(r.is_err());
    }

    #[test]
    fn gauss_legendre_high_degree() {
        let v = gauss_legendre(|x| x.powi(19), 0.0, 1.0);
        assert!((v - 0.05).abs() < 1e-15);
        assert_eq!(gauss_legendre_mean(|x| x, 2.0, 2.0), 2.0);
    }
}
