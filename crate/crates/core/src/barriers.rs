//! Barriers and estimate constants: the expanding CMC family `u_+`, the
//! height bounds it implies, the boundary-gradient barrier `h(d)`, the
//! barrier at infinity `eta` for a geodesic halfplane in `H^2`, and the
//! interior-gradient and curvature bounds.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::cmc::{eval_vr, solve_vr_on, three_point_derivative};
use crate::error::{Error, Result};
use crate::geometry::{sample_ladder, ModelGeometry, R_MIN};
use crate::profile::ProfileSpec;
use crate::quadrature::adaptive_simpson;

const BRACKET_LIMIT: f64 = 1e6;
const ROOT_TOL: f64 = 1e-12;
const SUP_SAMPLES: usize = 1024;

/// Radial operator handle `(model, r, u) -> Q[u]` on a radial grid; entries
/// that cannot be evaluated (the outer boundary) are `NaN`.
pub type RadialOperator<'a> = &'a dyn Fn(&ModelGeometry, &[f64], &[f64]) -> Vec<f64>;

/// `I(R) = int_{r0}^R V/A`.
fn time_integral(model: &ModelGeometry, r0: f64, radius: f64) -> Result<f64> {
    let tol = 1e-3 * ROOT_TOL;
    adaptive_simpson(|s| model.volume(s) / model.a(s), r0, radius, tol)
}

/// `R(t) = r0 + mu(t)` with `int_{r0}^{R(t)} V/A = t`.
pub fn mu_of_t(model: &ModelGeometry, r0: f64, t: f64) -> Result<f64> {
    if !(r0 > 0.0) || !(t >= 0.0) {
        return Err(Error::Parameter(format!("need r0 > 0 and t >= 0, got r0 = {r0}, t = {t}")));
    }
    if t == 0.0 {
        return Ok(r0);
    }
    let limit = BRACKET_LIMIT * r0;
    let (mut lo, mut hi) = (r0, 2.0 * r0);
    let mut i_lo = 0.0;
    loop {
        let i_hi = time_integral(model, r0, hi)?;
        if i_hi >= t {
            break;
        }
        lo = hi;
        i_lo = i_hi;
        hi *= 2.0;
        if hi > limit {
            return Err(Error::BracketExpansion { limit });
        }
    }
    // Safeguarded Newton on I(R) - t; I' = V/A > 0.
    let mut x = 0.5 * (lo + hi);
    let mut fx = i_lo + time_integral(model, lo, x)? - t;
    for _ in 0..200 {
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let slope = model.volume(x) / model.a(x);
        let mut next = x - fx / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        fx += time_integral(model, x, next)?;
        x = next;
        if step <= ROOT_TOL * (1.0 + x) || fx.abs() <= 1e-3 * ROOT_TOL {
            return Ok(x);
        }
    }
    Ok(x)
}

/// `R(t)` by RK4 on `dmu/dt = -n H(r0 + mu)`, used to cross-check [`mu_of_t`].
pub fn mu_of_t_ode(model: &ModelGeometry, r0: f64, t: f64, steps: usize) -> Result<f64> {
    let n = model.n as f64;
    let rate = |r: f64| -> Result<f64> { Ok(-n * model.mean_curvature(r)?) };
    let dt = t / steps.max(1) as f64;
    let mut r = r0;
    for _ in 0..steps.max(1) {
        let k1 = rate(r)?;
        let k2 = rate(r + 0.5 * dt * k1)?;
        let k3 = rate(r + 0.5 * dt * k2)?;
        let k4 = rate(r + dt * k3)?;
        r += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Ok(r)
}

/// The family `u_+(x, t) = v_{R(t)}(r(x))` on `B_{r0}`.
#[derive(Clone, Copy, Debug)]
pub struct SupersolutionFlow<'a> {
    pub model: &'a ModelGeometry,
    pub r0: f64,
}

impl<'a> SupersolutionFlow<'a> {
    pub fn new(model: &'a ModelGeometry, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::Parameter(format!("r0 must be positive, got {r0}")));
        }
        Ok(SupersolutionFlow { model, r0 })
    }

    pub fn radius(&self, t: f64) -> Result<f64> {
        mu_of_t(self.model, self.r0, t)
    }

    pub fn eval(&self, r: f64, t: f64) -> Result<f64> {
        if !(0.0..=self.r0).contains(&r) {
            return Err(Error::Domain {
                what: "u_+ outside B_{r0}",
                r,
            });
        }
        eval_vr(self.model, self.radius(t)?, r)
    }

    /// `u_+(., t)` sampled on `r_grid` (a subset of `[0, r0]`).
    pub fn sample(&self, t: f64, r_grid: &[f64]) -> Result<Vec<f64>> {
        let radius = self.radius(t)?;
        let mut grid = r_grid.to_vec();
        let appended = *grid.last().unwrap() < radius;
        if appended {
            grid.push(radius);
        }
        let mut v = solve_vr_on(self.model, radius, grid)?.v;
        if appended {
            v.pop();
        }
        Ok(v)
    }
}

pub fn eval_u_plus(model: &ModelGeometry, r0: f64, r: f64, t: f64) -> Result<f64> {
    SupersolutionFlow::new(model, r0)?.eval(r, t)
}

/// Extremes of the supersolution residual field.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualSummary {
    pub min_residual: f64,
    pub max_abs_residual: f64,
    pub points: usize,
}

/// `d_t u + Q[u]` for a field sampled row-wise at `t_grid x r_grid`, at
/// interior times with a three-point time derivative.
pub fn supersolution_residual_field(
    model: &ModelGeometry,
    t_grid: &[f64],
    r_grid: &[f64],
    rows: &[Vec<f64>],
    discrete_q: RadialOperator,
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(t_grid.len().saturating_sub(2));
    for j in 1..t_grid.len() - 1 {
        let q = discrete_q(model, r_grid, &rows[j]);
        let row = (0..r_grid.len())
            .map(|i| {
                let ut = three_point_derivative(t_grid[j - 1], t_grid[j], t_grid[j + 1], rows[j - 1][i], rows[j][i], rows[j + 1][i]);
                ut + q[i]
            })
            .collect();
        out.push(row);
    }
    out
}

fn summarize(field: &[Vec<f64>]) -> ResidualSummary {
    let mut min = f64::INFINITY;
    let mut max_abs = 0.0f64;
    let mut points = 0;
    for v in field.iter().flatten().filter(|v| v.is_finite()) {
        min = min.min(*v);
        max_abs = max_abs.max(v.abs());
        points += 1;
    }
    ResidualSummary {
        min_residual: min,
        max_abs_residual: max_abs,
        points,
    }
}

/// Evaluates `d_t u_+ + Q[u_+]` on `t_grid x r_grid`. The residual is
/// nonnegative for a supersolution and vanishes in the model spaces.
pub fn verify_supersolution(
    model: &ModelGeometry,
    r0: f64,
    t_grid: &[f64],
    r_grid: &[f64],
    discrete_q: RadialOperator,
) -> Result<ResidualSummary> {
    if t_grid.len() < 3 || r_grid.len() < 3 {
        return Err(Error::Parameter("need at least 3 points in each grid".into()));
    }
    if r_grid.iter().any(|&r| r < 0.0 || r > r0) {
        return Err(Error::Parameter("r_grid must lie in [0, r0]".into()));
    }
    let flow = SupersolutionFlow::new(model, r0)?;
    let rows = t_grid.iter().map(|&t| flow.sample(t, r_grid)).collect::<Result<Vec<_>>>()?;
    Ok(summarize(&supersolution_residual_field(model, t_grid, r_grid, &rows, discrete_q)))
}

/// Height bounds on `B_{r0} x [0, T]`:
/// `inf u0 - v_{R(T)}(0) + v_{r0}(r) <= u <= sup u0 + v_{R(T)}(0) - v_{r0}(r)`.
#[derive(Clone, Debug)]
pub struct HeightBounds<'a> {
    model: &'a ModelGeometry,
    pub r0: f64,
    pub final_radius: f64,
    pub top: f64,
    pub sup_u0: f64,
    pub inf_u0: f64,
}

pub fn height_bounds<'a>(model: &'a ModelGeometry, r0: f64, t_final: f64, sup_u0: f64, inf_u0: f64) -> Result<HeightBounds<'a>> {
    if !(t_final > 0.0) {
        return Err(Error::Parameter(format!("T must be positive, got {t_final}")));
    }
    let final_radius = mu_of_t(model, r0, t_final)?;
    Ok(HeightBounds {
        model,
        r0,
        final_radius,
        top: eval_vr(model, final_radius, 0.0)?,
        sup_u0,
        inf_u0,
    })
}

impl HeightBounds<'_> {
    fn base(&self, r: f64) -> f64 {
        eval_vr(self.model, self.r0, r.clamp(0.0, self.r0)).unwrap_or(0.0)
    }

    pub fn upper(&self, r: f64) -> f64 {
        self.sup_u0 + self.top - self.base(r)
    }

    pub fn lower(&self, r: f64) -> f64 {
        self.inf_u0 - self.top + self.base(r)
    }

    /// Both bounds on a grid, computing `v_{r0}` once.
    pub fn on_grid(&self, r_grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let flow = SupersolutionFlow::new(self.model, self.r0)?;
        let clipped: Vec<f64> = r_grid.iter().map(|r| r.min(self.r0)).collect();
        let mut uniq = clipped.clone();
        uniq.dedup();
        let base = flow.sample(0.0, &uniq)?;
        let lookup = |r: f64| base[uniq.partition_point(|&x| x < r)];
        let upper = clipped.iter().map(|&r| self.sup_u0 + self.top - lookup(r)).collect();
        let lower = clipped.iter().map(|&r| self.inf_u0 - self.top + lookup(r)).collect();
        Ok((lower, upper))
    }
}

/// `c0 = -sup_{[0, l0 r0]} (H^2 / (rho H')) / H(l0 r0)`, a cap on `u_+(o, t)`
/// while `R(t) <= l0 r0`.
pub fn c0_height_cap(model: &ModelGeometry, r0: f64, l0: u32) -> Result<f64> {
    if l0 < 1 || !(r0 > 0.0) {
        return Err(Error::Parameter(format!("need l0 >= 1 and r0 > 0, got l0 = {l0}, r0 = {r0}")));
    }
    let outer = l0 as f64 * r0;
    let n = model.n as f64;
    let mut sup = f64::NEG_INFINITY;
    for r in sample_ladder(0.0, outer, SUP_SAMPLES) {
        let r = r.max(1e-4 * outer);
        let a = model.a(r);
        let v = model.volume(r);
        let gap = a * a - model.a_prime(r) * v;
        if !(gap > 0.0) {
            return Err(Error::Geometry(format!("H' <= 0 at r = {r}; H must increase")));
        }
        // H^2/(rho H') = A^2 / (n rho (A^2 - A' V)).
        sup = sup.max(a * a / (n * model.rho.value(r) * gap));
    }
    Ok(-sup / model.mean_curvature(outer)?)
}

/// Extension of the initial data used by the boundary barrier.
pub type Extension = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `h(d) = ln(1 + A d) / L` with `A = L / (1 - L d0)`.
#[derive(Clone)]
pub struct BoundaryBarrier {
    pub l: f64,
    pub d0: f64,
    pub a_coef: f64,
    pub extension: Extension,
}

impl fmt::Debug for BoundaryBarrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryBarrier")
            .field("l", &self.l)
            .field("d0", &self.d0)
            .field("a_coef", &self.a_coef)
            .finish_non_exhaustive()
    }
}

pub fn make_boundary_barrier(l: f64, d0: f64, u0_ext: Extension) -> Result<BoundaryBarrier> {
    if !(l > 0.0) {
        return Err(Error::Parameter(format!("L must be positive, got {l}")));
    }
    if !(d0 > 0.0 && l * d0 < 1.0) {
        return Err(Error::Parameter(format!("need 0 < d0 < 1/L = {}, got d0 = {d0}", 1.0 / l)));
    }
    Ok(BoundaryBarrier {
        l,
        d0,
        a_coef: l / (1.0 - l * d0),
        extension: u0_ext,
    })
}

impl BoundaryBarrier {
    pub fn h(&self, d: f64) -> f64 {
        (self.a_coef * d).ln_1p() / self.l
    }

    pub fn h_prime(&self, d: f64) -> f64 {
        (self.a_coef / self.l) / (1.0 + self.a_coef * d)
    }

    pub fn h_second(&self, d: f64) -> f64 {
        let p = self.h_prime(d);
        -self.l * p * p
    }

    /// Gradient cap at the boundary: `|grad u0| + h'(0)`.
    pub fn gradient_cap(&self, grad_u0: f64) -> f64 {
        grad_u0 + self.a_coef / self.l
    }

    /// Upper barrier `u0_ext + h(d)` at polar point `(r, theta)` with distance `d` to the boundary.
    pub fn upper(&self, r: f64, theta: f64, d: f64) -> f64 {
        (self.extension)(r, theta) + self.h(d)
    }
}

/// A geodesic in `H^2` at distance `delta > 0` from the pole, orthogonal to
/// the ray at angle `theta`. The halfplane `U` is the side away from the pole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct HalfplaneGeodesic {
    pub delta: f64,
    pub theta: f64,
}

impl HalfplaneGeodesic {
    /// Lorentzian product of the hyperboloid point at polar `(kr, theta)` with the unit normal.
    fn pairing(&self, kr: f64, theta: f64) -> (f64, f64) {
        let (sd, cd) = (self.delta.sinh(), self.delta.cosh());
        let c = (theta - self.theta).cos();
        let f = -kr.cosh() * sd + kr.sinh() * cd * c;
        let df = -kr.sinh() * sd + kr.cosh() * cd * c;
        (f, df)
    }

    /// Signed distance to the geodesic at polar `(r, theta)` in `H^2(-kappa^2)`,
    /// positive in `U`: `sinh(kappa d) = <x, nu>`.
    pub fn distance(&self, kappa: f64, r: f64, theta: f64) -> f64 {
        self.pairing(kappa * r, theta).0.asinh() / kappa
    }

    /// `<grad r, grad d>` at `(r, theta)`.
    pub fn radial_derivative(&self, kappa: f64, r: f64, theta: f64) -> f64 {
        let (f, df) = self.pairing(kappa * r, theta);
        df / (1.0 + f * f).sqrt()
    }

    /// Polar coordinates of the point at distance `d` from the geodesic,
    /// displaced `a` along it from the foot of the perpendicular through the pole.
    pub fn point(&self, kappa: f64, d: f64, a: f64) -> (f64, f64) {
        let (st, ct) = self.theta.sin_cos();
        let (sd, cd) = (self.delta.sinh(), self.delta.cosh());
        // Foot p0, unit tangent e and unit normal nu on the hyperboloid.
        let p0 = [cd, sd * ct, sd * st];
        let e = [0.0, -st, ct];
        let nu = [sd, cd * ct, cd * st];
        let (ca, sa) = (a.cosh(), a.sinh());
        let kd = kappa * d;
        let x: Vec<f64> = (0..3).map(|i| kd.cosh() * (ca * p0[i] + sa * e[i]) + kd.sinh() * nu[i]).collect();
        (x[0].max(1.0).acosh() / kappa, x[2].atan2(x[1]))
    }
}

/// Upper barrier at infinity: `eta = C` off `U_0 = {d >= d0}`,
/// `eta = C e^{alpha d0} e^{-alpha d}` on `U_0`.
#[derive(Clone, Debug, Serialize)]
pub struct ScBarrier {
    pub c: f64,
    pub d0: f64,
    pub alpha: f64,
    pub c1: f64,
    pub kappa: f64,
    pub geodesic: HalfplaneGeodesic,
    pub samples: usize,
}

/// Builds the barrier for a hyperbolic base `xi = sinh(kappa r)/kappa`.
/// `alpha` is the infimum over sampled points of `U_0` of
/// `(rho'/rho) <grad r, grad d>`.
pub fn make_sc_barrier(model: &ModelGeometry, geodesic: HalfplaneGeodesic, c: f64, d0: f64) -> Result<ScBarrier> {
    let kappa = match (&model.xi, model.n) {
        (ProfileSpec::Hyperbolic { kappa }, 2) => *kappa,
        _ => return Err(Error::Geometry("barrier at infinity needs the hyperbolic base with n = 2".into())),
    };
    if !(d0 >= 2.0) || !(c > 0.0) {
        return Err(Error::Parameter(format!("need d0 >= 2 and C > 0, got d0 = {d0}, C = {c}")));
    }
    if !(geodesic.delta > 0.0) {
        return Err(Error::Geometry("the pole must lie outside the halfplane (delta > 0)".into()));
    }
    let (nd, na) = (32usize, 32usize);
    let mut alpha = f64::INFINITY;
    for i in 0..nd {
        let d = d0 + 6.0 * i as f64 / (nd - 1) as f64;
        for j in 0..na {
            let a = -8.0 + 16.0 * j as f64 / (na - 1) as f64;
            let (r, th) = geodesic.point(kappa, d, a);
            let r = r.max(R_MIN);
            alpha = alpha.min(model.rho.log_d1(r) * geodesic.radial_derivative(kappa, r, th));
        }
    }
    if !(alpha > 0.0) {
        return Err(Error::Geometry(format!(
            "inf over U_0 of (rho'/rho)<grad r, grad d> is {alpha} <= 0; no decay rate exists"
        )));
    }
    Ok(ScBarrier {
        c,
        d0,
        alpha,
        c1: c * (alpha * d0).exp(),
        kappa,
        geodesic,
        samples: nd * na,
    })
}

impl ScBarrier {
    pub fn distance(&self, r: f64, theta: f64) -> f64 {
        self.geodesic.distance(self.kappa, r, theta)
    }

    pub fn eta_of_distance(&self, d: f64) -> f64 {
        if d >= self.d0 {
            self.c1 * (-self.alpha * d).exp()
        } else {
            self.c
        }
    }

    pub fn eta(&self, r: f64, theta: f64) -> f64 {
        self.eta_of_distance(self.distance(r, theta))
    }
}

/// Constants of the interior gradient estimate.
#[derive(Clone, Debug, Serialize)]
pub struct InteriorGradientBound {
    pub beta: f64,
    pub k: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub mu: f64,
    pub c0: f64,
    pub min_rho: f64,
    /// Log of the branch with `sup xi / zeta(R)`.
    pub log_branch_radius: f64,
    /// Log of the branch with `C0`.
    pub log_branch_c0: f64,
    /// `max` of the two branches, in log form.
    pub log_bound: f64,
    /// `exp(log_bound)`; `inf` when it overflows.
    pub bound: f64,
    /// Smallest admissible `k`: `max{M L, sup(2|grad log rho|^2 + |Hess log rho|)}`.
    pub k_min: f64,
}

/// `(delta, delta', mu)` for given `beta` and `rho` value.
pub fn gradient_mu(beta: f64, rho: f64) -> (f64, f64, f64) {
    gradient_mu_tail(beta, 1.0 - beta, rho)
}

fn gradient_mu_tail(beta: f64, one_minus_beta: f64, rho: f64) -> (f64, f64, f64) {
    let delta = 1.5 * beta - 1.0;
    let delta_prime = beta.ln() - one_minus_beta.ln() - 2.0 * rho.ln();
    let mu = 2.0 * beta * (delta * delta_prime - 2.0) / delta_prime;
    (delta, delta_prime, mu)
}

pub fn interior_gradient_bound(model: &ModelGeometry, radius: f64, m: f64, beta: f64, k: f64) -> Result<InteriorGradientBound> {
    interior_gradient_bound_tail(model, radius, m, 1.0 - beta, k)
}

/// As [`interior_gradient_bound`] with `beta` given through `1 - beta`, which
/// keeps admissible values representable when `rho^2 e^k` is large.
pub fn interior_gradient_bound_tail(
    model: &ModelGeometry,
    radius: f64,
    m: f64,
    one_minus_beta: f64,
    k: f64,
) -> Result<InteriorGradientBound> {
    if !(radius > 0.0) || !(m >= 0.0) {
        return Err(Error::Parameter(format!("need R > 0 and M >= 0, got R = {radius}, M = {m}")));
    }
    if !(one_minus_beta > 0.0 && one_minus_beta < 0.25) {
        return Err(Error::Parameter(format!(
            "beta must lie in (3/4, 1), got 1 - beta = {one_minus_beta}"
        )));
    }
    let beta = 1.0 - one_minus_beta;
    let ladder: Vec<f64> = sample_ladder(0.0, radius, SUP_SAMPLES).into_iter().map(|r| r.max(R_MIN)).collect();
    let rhos: Vec<f64> = ladder.iter().map(|&r| model.rho.value(r)).collect();
    let min_rho = rhos.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_rho = rhos.iter().cloned().fold(0.0, f64::max);

    let (delta, delta_prime, mu) = gradient_mu_tail(beta, one_minus_beta, min_rho);
    if !(mu > 0.0) {
        return Err(Error::Parameter(format!("mu = {mu} <= 0 (delta' = {delta_prime}); beta too small")));
    }
    if !(k > 16.0) {
        return Err(Error::Parameter(format!("k must exceed 16, got {k}")));
    }
    // beta > rho^2 e^k / (1 + rho^2 e^k)  <=>  ln(1 - beta) < -ln(1 + rho^2 e^k).
    let log_rho_ek = k + 2.0 * max_rho.ln();
    let log_tail_max = -(log_rho_ek + (-log_rho_ek).exp().ln_1p());
    if !(one_minus_beta.ln() < log_tail_max) {
        return Err(Error::Parameter(format!(
            "beta must exceed rho^2 e^k / (1 + rho^2 e^k): need 1 - beta < {}",
            log_tail_max.exp()
        )));
    }
    let (l, _) = model.lower_ricci_bounds(radius);
    let nm1 = (model.n - 1) as f64;
    let rho_term = ladder
        .iter()
        .map(|&r| {
            let f1 = model.rho.log_d1(r);
            let f2 = model.rho.d2_ratio(r) - f1 * f1;
            let tan = if f1 == 0.0 { 0.0 } else { f1 * model.xi.log_d1(r) };
            2.0 * f1 * f1 + (f2 * f2 + nm1 * tan * tan).sqrt()
        })
        .fold(0.0, f64::max);
    let k_min = (m * l).max(rho_term);
    if k < k_min {
        return Err(Error::Parameter(format!(
            "k = {k} below max{{ML, sup(2|grad log rho|^2 + |Hess log rho|)}} = {k_min}"
        )));
    }

    let zeta_r = model.zeta(radius);
    let n = model.n as f64;
    let s1b = (1.0 - beta).sqrt();
    let mut c0 = f64::NEG_INFINITY;
    let mut sup_xi = 0.0f64;
    for (&r, &rho) in ladder.iter().zip(&rhos) {
        let xz = model.xi.value(r) / zeta_r;
        sup_xi = sup_xi.max(xz);
        let brace =
            1.25 + n * m * model.xi.d1(r) / zeta_r + 2.0 * s1b * xz + (m * (6.0 - 5.0 * beta) * xz + 2.0 * s1b) * model.rho.log_d1(r);
        c0 = c0.max(rho * rho / mu * brace);
    }
    let factor = (1.0 + min_rho).powi(2) / min_rho * m;
    let log_branch_radius = 128.0 * factor * sup_xi;
    let log_branch_c0 = 64.0 * factor * c0;
    let log_bound = log_branch_radius.max(log_branch_c0);
    Ok(InteriorGradientBound {
        beta,
        k,
        delta,
        delta_prime,
        mu,
        c0,
        min_rho,
        log_branch_radius,
        log_branch_c0,
        log_bound,
        bound: log_bound.exp(),
        k_min,
    })
}

/// `(4/sqrt(delta_psi)) sqrt(1 + L1 + C~ + C + E_R/zeta_R^2 + 1/(2T))`.
pub fn curvature_bound(delta_psi: f64, l1: f64, c_sim: f64, c_sim_tilde: f64, e_r: f64, zeta_r: f64, t: f64) -> Result<f64> {
    if !(delta_psi > 0.0) || !(t > 0.0) || !(zeta_r > 0.0) || l1 < 0.0 || c_sim < 0.0 || c_sim_tilde < 0.0 || e_r < 0.0 {
        return Err(Error::Parameter(
            "curvature bound needs delta > 0, T > 0, zeta_R > 0 and nonnegative constants".into(),
        ));
    }
    Ok(4.0 / delta_psi.sqrt() * (1.0 + l1 + c_sim_tilde + c_sim + e_r / (zeta_r * zeta_r) + 0.5 / t).sqrt())
}

/// `E_R = (1/delta + 4) sup xi^2 + n zeta(R) sup |xi'|`.
pub fn e_r(delta_psi: f64, sup_xi_sq: f64, n: usize, zeta_r: f64, sup_abs_xi_prime: f64) -> f64 {
    (1.0 / delta_psi + 4.0) * sup_xi_sq + n as f64 * zeta_r * sup_abs_xi_prime
}

/// Constants of the curvature estimate on `B_R x [0, T]`.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureConstants {
    pub gamma: f64,
    pub delta_psi: f64,
    pub e_r: f64,
    pub l1: f64,
    pub zeta_r: f64,
    pub bound: f64,
}

/// Assembles `gamma = inf 1/rho^2`, `delta_psi = gamma / (2 sup W^2)`, `E_R`
/// and the bound from model data and a measured `sup W^2`.
pub fn curvature_constants(
    model: &ModelGeometry,
    radius: f64,
    t: f64,
    sup_w_sq: f64,
    c_sim: f64,
    c_sim_tilde: f64,
) -> Result<CurvatureConstants> {
    let ladder = sample_ladder(0.0, radius, SUP_SAMPLES);
    let gamma = ladder
        .iter()
        .map(|&r| 1.0 / model.rho.value(r).powi(2))
        .fold(f64::INFINITY, f64::min);
    let delta_psi = gamma / (2.0 * sup_w_sq);
    let sup_xi_sq = ladder.iter().map(|&r| model.xi.value(r).powi(2)).fold(0.0, f64::max);
    let sup_dxi = ladder.iter().map(|&r| model.xi.d1(r).abs()).fold(0.0, f64::max);
    let zeta_r = model.zeta(radius);
    let er = e_r(delta_psi, sup_xi_sq, model.n, zeta_r, sup_dxi);
    let (_, l1) = model.lower_ricci_bounds(radius);
    Ok(CurvatureConstants {
        gamma,
        delta_psi,
        e_r: er,
        l1,
        zeta_r,
        bound: curvature_bound(delta_psi, l1, c_sim, c_sim_tilde, er, zeta_r, t)?,
    })
}
