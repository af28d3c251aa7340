//! Rotationally symmetric model data `(n, xi, iota, rho)` and the radial
//! quantities derived from it.
//!
//! The base is `P = [0, inf) x S^{n-1}` with metric `g = dr^2 + xi(r)^2 dtheta^2`,
//! the ambient space is `P x_rho R` with `gbar = rho^2 ds^2 + g`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::ProfileSpec;
use crate::quadrature::{adaptive_simpson, gauss_legendre};

/// Radii below this are treated as the pole.
pub const R_MIN: f64 = 1e-12;

const CACHE_STEP: f64 = 1.0 / 256.0;
const CACHE_END: f64 = 32.0;
const LADDER_POINTS: usize = 512;
const LADDER_GEOMETRIC: usize = 64;
const DEFAULT_WINDOW: f64 = 1e3;
const VALIDATION_TOL: f64 = 1e-9;
/// Interpolated tables only approximate the inequalities they sample.
const TABLE_VALIDATION_TOL: f64 = 1e-5;

/// Serializable description of a model; everything else is derived.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n: usize,
    pub xi: ProfileSpec,
    pub iota: ProfileSpec,
    pub rho: ProfileSpec,
    pub quad_tol: f64,
}

/// Result of the sampled validation of the geometric conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub samples: usize,
    pub window_end: f64,
}

/// A validated model. Immutable after construction.
#[derive(Clone, Debug)]
pub struct ModelGeometry {
    pub n: usize,
    pub xi: ProfileSpec,
    pub iota: ProfileSpec,
    pub rho: ProfileSpec,
    pub quad_tol: f64,
    pub validation: ValidationRecord,
    v_cache: Vec<f64>,
    zeta_cache: Vec<f64>,
}

/// Builds and validates a model on the default window `[0, 1e3]`
/// (clipped to the range of any table profile).
pub fn make_model(xi: ProfileSpec, iota: ProfileSpec, rho: ProfileSpec, n: usize, quad_tol: f64) -> Result<ModelGeometry> {
    make_model_with_window(xi, iota, rho, n, quad_tol, DEFAULT_WINDOW)
}

pub fn make_model_with_window(
    xi: ProfileSpec,
    iota: ProfileSpec,
    rho: ProfileSpec,
    n: usize,
    quad_tol: f64,
    window: f64,
) -> Result<ModelGeometry> {
    if n < 2 {
        return Err(Error::Parameter(format!("dimension n must be >= 2, got {n}")));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::Parameter(format!("quad_tol must be positive, got {quad_tol}")));
    }
    if !(window > 0.0) {
        return Err(Error::Parameter(format!("validation window must be positive, got {window}")));
    }
    for (name, p) in [("xi", &xi), ("iota", &iota)] {
        if let ProfileSpec::Table(t) = p {
            if t.first() != (0.0, 0.0) {
                return Err(Error::TableFormat(format!(
                    "{name} table must start at (0, 0), starts at {:?}",
                    t.first()
                )));
            }
        }
    }
    let window_end = window.min(xi.domain_end()).min(iota.domain_end()).min(rho.domain_end());

    let mut model = ModelGeometry {
        n,
        xi,
        iota,
        rho,
        quad_tol,
        validation: ValidationRecord {
            samples: LADDER_POINTS,
            window_end,
        },
        v_cache: Vec::new(),
        zeta_cache: Vec::new(),
    };
    model.validate(&validation_ladder(window_end))?;

    let panels = (CACHE_END / CACHE_STEP) as usize;
    let panel_tol = quad_tol / panels as f64;
    let mut v = Vec::with_capacity(panels + 1);
    let mut z = Vec::with_capacity(panels + 1);
    v.push(0.0);
    z.push(0.0);
    for k in 0..panels {
        let a = k as f64 * CACHE_STEP;
        let b = a + CACHE_STEP;
        v.push(v[k] + adaptive_simpson(|r| model.a(r), a, b, panel_tol)?);
        z.push(z[k] + adaptive_simpson(|r| model.xi.value(r), a, b, panel_tol)?);
    }
    model.v_cache = v;
    model.zeta_cache = z;
    Ok(model)
}

fn validation_ladder(end: f64) -> Vec<f64> {
    let split = end.min(1.0) * 0.5;
    let lo: f64 = 1e-6_f64.min(split * 1e-3);
    let ratio = (split / lo).powf(1.0 / (LADDER_GEOMETRIC - 1) as f64);
    let mut pts: Vec<f64> = (0..LADDER_GEOMETRIC).map(|i| lo * ratio.powi(i as i32)).collect();
    let rest = LADDER_POINTS - LADDER_GEOMETRIC;
    let h = (end - split) / rest as f64;
    pts.extend((1..=rest).map(|i| split + h * i as f64));
    pts
}

/// `count` points on `[a, b]`, uniform in the middle and geometrically
/// refined towards both ends. Includes both endpoints.
pub fn sample_ladder(a: f64, b: f64, count: usize) -> Vec<f64> {
    let count = count.max(8);
    let edge = count / 8;
    let len = b - a;
    let ratio = (1e-6f64 / 0.05).powf(1.0 / (edge - 1).max(1) as f64);
    let mut pts = Vec::with_capacity(count);
    pts.push(a);
    for i in (1..edge).rev() {
        pts.push(a + len * 0.05 * ratio.powi(i as i32));
    }
    let mid = count - 2 * edge;
    for i in 0..=mid {
        pts.push(a + len * (0.05 + 0.9 * i as f64 / mid as f64));
    }
    for i in 1..edge {
        pts.push(b - len * 0.05 * ratio.powi(i as i32));
    }
    pts.push(b);
    pts
}

impl ModelGeometry {
    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            n: self.n,
            xi: self.xi.clone(),
            iota: self.iota.clone(),
            rho: self.rho.clone(),
            quad_tol: self.quad_tol,
        }
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        make_model(spec.xi.clone(), spec.iota.clone(), spec.rho.clone(), spec.n, spec.quad_tol)
    }

    fn validate(&self, ladder: &[f64]) -> Result<()> {
        let any_table = [&self.xi, &self.iota, &self.rho].iter().any(|p| matches!(p, ProfileSpec::Table(_)));
        let tol = if any_table { TABLE_VALIDATION_TOL } else { VALIDATION_TOL };
        let check = |condition: &'static str, r: f64, lhs: f64, rhs: f64| {
            if lhs <= rhs + tol * (1.0 + rhs.abs()) {
                Ok(())
            } else {
                Err(Error::Validation { condition, r, lhs, rhs })
            }
        };
        for &r in ladder {
            for (condition, p) in [("xi > 0", &self.xi), ("iota > 0", &self.iota), ("rho > 0", &self.rho)] {
                let v = p.value(r);
                if !(v > 0.0) {
                    return Err(Error::Validation {
                        condition,
                        r,
                        lhs: v,
                        rhs: 0.0,
                    });
                }
            }
            let lr = self.rho.log_d1(r);
            check("rho'/rho <= xi'/xi", r, lr, self.xi.log_d1(r))?;
            check("rho'/rho <= iota'/iota", r, lr, self.iota.log_d1(r))?;
            check("iota''/iota <= xi''/xi", r, self.iota.d2_ratio(r), self.xi.d2_ratio(r))?;
        }
        Ok(())
    }

    /// `A(r) = rho xi^{n-1}`.
    pub fn a(&self, r: f64) -> f64 {
        self.rho.value(r) * self.xi.value(r).powi(self.n as i32 - 1)
    }

    /// `A'(r)`.
    pub fn a_prime(&self, r: f64) -> f64 {
        let m = self.n as i32 - 1;
        let x = self.xi.value(r);
        self.rho.d1(r) * x.powi(m) + m as f64 * self.rho.value(r) * x.powi(m - 1) * self.xi.d1(r)
    }

    /// `V(r) = int_0^r A`.
    pub fn volume(&self, r: f64) -> f64 {
        self.cumulative(&self.v_cache, |s| self.a(s), r)
    }

    /// `zeta(r) = int_0^r xi`.
    pub fn zeta(&self, r: f64) -> f64 {
        self.cumulative(&self.zeta_cache, |s| self.xi.value(s), r)
    }

    /// `int_0^r xi^{n-1}`, the volume of the base ball up to the sphere constant.
    pub fn base_volume(&self, r: f64) -> f64 {
        let m = self.n as i32 - 1;
        if m == 1 {
            return self.zeta(r);
        }
        self.integrate(|s| self.xi.value(s).powi(m), 0.0, r)
    }

    fn cumulative<F: Fn(f64) -> f64>(&self, cache: &[f64], f: F, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let k = ((r / CACHE_STEP) as usize).min(cache.len() - 1);
        let base = k as f64 * CACHE_STEP;
        cache[k] + self.integrate(f, base, r)
    }

    fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        adaptive_simpson(&f, a, b, 0.25 * self.quad_tol).unwrap_or_else(|_| {
            let panels = ((b - a) / CACHE_STEP).ceil().max(1.0) as usize;
            let w = (b - a) / panels as f64;
            (0..panels)
                .map(|i| gauss_legendre(&f, a + i as f64 * w, a + (i + 1) as f64 * w))
                .sum()
        })
    }

    fn require_positive(&self, what: &'static str, r: f64) -> Result<()> {
        if r < R_MIN || !r.is_finite() {
            Err(Error::Domain { what, r })
        } else {
            Ok(())
        }
    }

    /// `H(r) = -A/(nV)`, the mean curvature of the radial CMC graph over `B_r`.
    pub fn mean_curvature(&self, r: f64) -> Result<f64> {
        self.require_positive("H(r)", r)?;
        Ok(-self.a(r) / (self.n as f64 * self.volume(r)))
    }

    /// `H'(r) = (A^2 - A'V) / (n V^2)`.
    pub fn mean_curvature_prime(&self, r: f64) -> Result<f64> {
        self.require_positive("H'(r)", r)?;
        let a = self.a(r);
        let v = self.volume(r);
        Ok((a * a - self.a_prime(r) * v) / (self.n as f64 * v * v))
    }

    /// Mean curvature of the Killing cylinder over the sphere of radius `r`.
    pub fn cylinder_curvature(&self, r: f64) -> Result<f64> {
        self.require_positive("H_cyl(r)", r)?;
        Ok(((self.n - 1) as f64 * self.xi.log_d1(r) + self.rho.log_d1(r)) / self.n as f64)
    }

    pub fn ambient_frame(&self) -> AmbientFrameData<'_> {
        AmbientFrameData { model: self }
    }

    /// Ricci lower bounds `(L, L1)` on `B_R`:
    /// `Ric_g - Hess log rho >= -L g` and `Ric_gbar >= -L1 gbar`.
    pub fn lower_ricci_bounds(&self, radius: f64) -> (f64, f64) {
        let frame = self.ambient_frame();
        let mut worst = 0.0f64;
        let mut worst1 = 0.0f64;
        for r in sample_ladder(0.0, radius, 1024) {
            let r = r.max(R_MIN);
            let (rad, tan) = frame.bakry_emery(r);
            worst = worst.max(-rad).max(-tan);
            let (ss, rr, sph) = frame.ricci_diagonal(r);
            worst1 = worst1.max(-ss).max(-rr).max(-sph);
        }
        // `+ 0.0` turns a `-0.0` from the maxima into `0.0`.
        (worst + 0.0, worst1 + 0.0)
    }
}

pub fn eval_a(model: &ModelGeometry, r: f64) -> f64 {
    model.a(r)
}

pub fn eval_v(model: &ModelGeometry, r: f64) -> f64 {
    model.volume(r)
}

pub fn eval_zeta(model: &ModelGeometry, r: f64) -> f64 {
    model.zeta(r)
}

pub fn eval_h(model: &ModelGeometry, r: f64) -> Result<f64> {
    model.mean_curvature(r)
}

pub fn eval_hcyl(model: &ModelGeometry, r: f64) -> Result<f64> {
    model.cylinder_curvature(r)
}

pub fn lower_ricci_bounds(model: &ModelGeometry, radius: f64) -> (f64, f64) {
    model.lower_ricci_bounds(radius)
}

/// Connection and curvature of `gbar = rho^2 ds^2 + dr^2 + xi^2 dtheta^2`.
///
/// Coordinates are ordered `(s, r, theta_1, ..., theta_{n-1})` with the
/// round metric in hyperspherical form
/// `dtheta^2 = dtheta_1^2 + sin^2 theta_1 dtheta_2^2 + ...`.
///
/// The metric is diagonal, so `Gamma^k_ij = (d_i g_kj + d_j g_ki - d_k g_ij) / (2 g_kk)`
/// and the nonzero symbols are
///
/// ```text
/// Gamma^s_sr = rho'/rho        Gamma^r_ss = -rho rho'
/// Gamma^r_tt = -xi xi' (times the sphere factor)
/// Gamma^t_rt = xi'/xi          plus the round-sphere symbols among the angles
/// ```
///
/// Ricci is diagonal in the orthonormal frame `(e_s, e_r, e_sphere...)`.
/// Writing `gbar` as a warped product over `(P, g)` with fibre `R` gives
/// `Ric(X, X) = Ric_g(X, X) - Hess rho (X, X) / rho` on the base and
/// `Ric(e_s, e_s) = -Laplacian(rho)/rho`; `Ric_g` itself comes from the
/// rotationally symmetric base:
///
/// ```text
/// Ric(e_s, e_s)   = -rho''/rho - (n-1) rho' xi' / (rho xi)
/// Ric(e_r, e_r)   = -rho''/rho - (n-1) xi''/xi
/// Ric(e_th, e_th) = -xi''/xi + (n-2)(1 - xi'^2)/xi^2 - rho' xi' / (rho xi)
/// ```
#[derive(Clone, Copy, Debug)]
pub struct AmbientFrameData<'a> {
    model: &'a ModelGeometry,
}

impl<'a> AmbientFrameData<'a> {
    pub fn dim(&self) -> usize {
        self.model.n + 1
    }

    /// Diagonal metric components at `(r, theta)`; `theta` has `n - 1` entries.
    pub fn metric_diagonal(&self, r: f64, theta: &[f64]) -> Vec<f64> {
        let m = self.model;
        let rho = m.rho.value(r);
        let xi = m.xi.value(r);
        let mut g = vec![rho * rho, 1.0];
        let mut factor = xi * xi;
        for (i, _) in theta.iter().enumerate().take(m.n - 1) {
            g.push(factor);
            factor *= theta[i].sin().powi(2);
        }
        g
    }

    /// `grad[c][k] = d g_kk / d x^c`.
    fn metric_gradient(&self, r: f64, theta: &[f64]) -> Vec<Vec<f64>> {
        let m = self.model;
        let dim = self.dim();
        let rho = m.rho.value(r);
        let xi = m.xi.value(r);
        let mut grad = vec![vec![0.0; dim]; dim];
        grad[1][0] = 2.0 * rho * m.rho.d1(r);
        let sphere = |k: usize, skip: Option<usize>| -> f64 {
            (0..k)
                .map(|j| {
                    if Some(j) == skip {
                        2.0 * theta[j].sin() * theta[j].cos()
                    } else {
                        theta[j].sin().powi(2)
                    }
                })
                .product()
        };
        for k in 0..m.n - 1 {
            grad[1][k + 2] = 2.0 * xi * m.xi.d1(r) * sphere(k, None);
            for j in 0..k {
                grad[j + 2][k + 2] = xi * xi * sphere(k, Some(j));
            }
        }
        grad
    }

    /// All Christoffel symbols, indexed `[k][i][j]` for `Gamma^k_ij`.
    pub fn christoffels(&self, r: f64, theta: &[f64]) -> Vec<Vec<Vec<f64>>> {
        let dim = self.dim();
        let g = self.metric_diagonal(r, theta);
        let dg = self.metric_gradient(r, theta);
        let mut gamma = vec![vec![vec![0.0; dim]; dim]; dim];
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let mut s = 0.0;
                    if k == j {
                        s += dg[i][k];
                    }
                    if k == i {
                        s += dg[j][k];
                    }
                    if i == j {
                        s -= dg[k][i];
                    }
                    gamma[k][i][j] = 0.5 * s / g[k];
                }
            }
        }
        gamma
    }

    /// Nonzero symbols as `(k, i, j, value)`.
    pub fn nonzero_christoffels(&self, r: f64, theta: &[f64]) -> Vec<(usize, usize, usize, f64)> {
        let gamma = self.christoffels(r, theta);
        let mut out = Vec::new();
        for (k, gk) in gamma.iter().enumerate() {
            for (i, gki) in gk.iter().enumerate() {
                for (j, &v) in gki.iter().enumerate() {
                    if v != 0.0 {
                        out.push((k, i, j, v));
                    }
                }
            }
        }
        out
    }

    /// Ricci curvature in the orthonormal frame: `(Ric_ss, Ric_rr, Ric_sphere)`.
    pub fn ricci_diagonal(&self, r: f64) -> (f64, f64, f64) {
        let m = self.model;
        let r = r.max(R_MIN);
        let nm1 = (m.n - 1) as f64;
        let lr = m.rho.log_d1(r);
        let lx = m.xi.log_d1(r);
        let rr2 = m.rho.d2_ratio(r);
        let xx2 = m.xi.d2_ratio(r);
        let cross = if lr == 0.0 { 0.0 } else { lr * lx };
        let ss = -rr2 - nm1 * cross;
        let rr = -rr2 - nm1 * xx2;
        let sph = -xx2 + (m.n as f64 - 2.0) * m.xi.sphere_term(r) - cross;
        (ss, rr, sph)
    }

    /// `Ric(v, v)` for `v` given by orthonormal components `(v_s, v_r, v_theta...)`.
    pub fn ricci(&self, r: f64, direction: &[f64]) -> f64 {
        let (ss, rr, sph) = self.ricci_diagonal(r);
        let mut total = ss * direction[0] * direction[0] + rr * direction[1] * direction[1];
        for v in &direction[2..] {
            total += sph * v * v;
        }
        total
    }

    /// Eigenvalues `(radial, tangential)` of `Ric_g - Hess log rho` relative to `g`.
    pub fn bakry_emery(&self, r: f64) -> (f64, f64) {
        let m = self.model;
        let r = r.max(R_MIN);
        let nm1 = (m.n - 1) as f64;
        let lr = m.rho.log_d1(r);
        let lx = m.xi.log_d1(r);
        let xx2 = m.xi.d2_ratio(r);
        let hess_rad = m.rho.d2_ratio(r) - lr * lr;
        let hess_tan = if lr == 0.0 { 0.0 } else { lr * lx };
        let radial = -nm1 * xx2 - hess_rad;
        let tangential = -xx2 + (m.n as f64 - 2.0) * m.xi.sphere_term(r) - hess_tan;
        (radial, tangential)
    }
}
