//! Rotationally invariant graphs of constant mean curvature `H(R)` over
//! geodesic balls `B_R`, vanishing on the boundary sphere.
//!
//! With `D = A V_R - A_R V` and `S = A V_R + A_R V`,
//!
//! ```text
//! -v_R'(r) = A_R V / (rho sqrt(D S))
//! ```
//!
//! which blows up like `(R - r)^{-1/2}` at the boundary. Substituting
//! `r = R - tau^2` and writing `D = tau^2 q` where `q` is the mean of
//! `k = A_R A - V_R A'` over `[r, R]` gives the bounded integrand
//!
//! ```text
//! v_R(r) = int_0^{sqrt(R - r)} G(tau) dtau,   G = 2 A_R V / (rho sqrt(q S)).
//! ```
//!
//! Orientation: the unit normal is `N = (rho^{-2} X - grad u) / W`, so
//! `H(R) = -A(R)/(n V(R))` is negative and `v_R` is a cap above `B_R`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, R_MIN};
use crate::quadrature::{adaptive_simpson, gauss_legendre_mean};

/// Below this fraction of `R`, `q` is computed as a mean instead of the
/// cancelling difference `D / tau^2`.
const MEAN_SWITCH: f64 = 0.05;

/// Sampled radial CMC graph.
#[derive(Clone, Debug, Serialize)]
pub struct CmcProfile {
    pub radius: f64,
    pub h_r: f64,
    pub grid: Vec<f64>,
    pub v: Vec<f64>,
    pub vp: Vec<f64>,
}

/// Radial profile curve `(r, s, phi)` against arclength.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ProfileCurve {
    pub arclength: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub phi: Vec<f64>,
}

/// Precomputed boundary data for a fixed `R`.
struct Kernel<'a> {
    model: &'a ModelGeometry,
    radius: f64,
    a_r: f64,
    v_r: f64,
}

impl<'a> Kernel<'a> {
    fn new(model: &'a ModelGeometry, radius: f64) -> Result<Self> {
        if !(radius >= R_MIN) || !radius.is_finite() {
            return Err(Error::Domain { what: "v_R", r: radius });
        }
        Ok(Kernel {
            model,
            radius,
            a_r: model.a(radius),
            v_r: model.volume(radius),
        })
    }

    /// `D / tau^2` at `r = R - tau^2`.
    fn q(&self, tau: f64, r: f64, a: f64, v: f64) -> f64 {
        let t2 = tau * tau;
        if t2 <= MEAN_SWITCH * self.radius {
            let m = self.model;
            gauss_legendre_mean(|s| self.a_r * m.a(s) - self.v_r * m.a_prime(s), r, self.radius)
        } else {
            (a * self.v_r - self.a_r * v) / t2
        }
    }

    /// The regularized integrand `G(tau)`.
    fn g(&self, tau: f64) -> f64 {
        let r = (self.radius - tau * tau).max(0.0);
        let v = self.model.volume(r);
        if v == 0.0 {
            return 0.0;
        }
        let a = self.model.a(r);
        let s = a * self.v_r + self.a_r * v;
        let q = self.q(tau, r, a, v);
        2.0 * self.a_r * v / (self.model.rho.value(r) * (q * s).sqrt())
    }

    fn tau(&self, r: f64) -> f64 {
        (self.radius - r).max(0.0).sqrt()
    }

    fn slope(&self, r: f64) -> f64 {
        let tau = self.tau(r);
        if tau == 0.0 {
            return f64::NEG_INFINITY;
        }
        -self.g(tau) / (2.0 * tau)
    }

    /// `a_R^2 / (a_R^2 - a_R' V_R)`: how many digits `a V_R - a_R V` loses
    /// to cancellation near `R`. Grows like `exp(2R)` when `A` is exponential.
    fn condition(&self) -> f64 {
        let a2 = self.a_r * self.a_r;
        let gap = a2 - self.model.a_prime(self.radius) * self.v_r;
        if gap > 0.0 {
            (a2 / gap).max(1.0)
        } else {
            1.0
        }
    }

    fn value_between(&self, tau_lo: f64, tau_hi: f64, tol: f64) -> Result<f64> {
        let floor = 16.0 * f64::EPSILON * self.condition() * self.radius;
        adaptive_simpson(|t| self.g(t), tau_lo, tau_hi, tol.max(floor))
    }
}

/// Grid on `[0, R]` with `grid_size` points: uniform up to `0.95 R`,
/// geometric towards `R`. When there is room the uniform spacing is `R / m`
/// with `m` a multiple of 20, so round fractions of `R` are nodes.
pub fn cmc_grid(radius: f64, grid_size: usize) -> Vec<f64> {
    let spare = grid_size - (grid_size / 8).max(4);
    let (n_uni, m) = if spare >= 19 {
        let m = 20 * (spare / 19);
        (19 * m / 20, m as f64)
    } else {
        (spare, spare as f64 / 0.95)
    };
    let n_geo = grid_size - n_uni;
    let ratio = (1.0 - 19.0 / n_uni as f64).max(0.5);
    let mut grid: Vec<f64> = (0..=n_uni).map(|i| i as f64 * radius / m).collect();
    grid[n_uni] = 0.95 * radius;
    for j in 1..n_geo - 1 {
        grid.push(radius - 0.05 * radius * ratio.powi(j as i32));
    }
    grid.push(radius);
    grid
}

/// Samples `v_R` and `v_R'` on [`cmc_grid`].
pub fn solve_vr(model: &ModelGeometry, radius: f64, grid_size: usize) -> Result<CmcProfile> {
    if grid_size < 16 {
        return Err(Error::Parameter(format!("grid_size must be >= 16, got {grid_size}")));
    }
    let kernel = Kernel::new(model, radius)?;
    let grid = cmc_grid(radius, grid_size);
    sample_profile(&kernel, grid)
}

/// Samples `v_R` and `v_R'` on a caller-supplied increasing grid ending at `R`.
pub fn solve_vr_on(model: &ModelGeometry, radius: f64, grid: Vec<f64>) -> Result<CmcProfile> {
    let kernel = Kernel::new(model, radius)?;
    if grid.last() != Some(&radius) || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 {
        return Err(Error::Parameter("grid must increase strictly and end at R".into()));
    }
    sample_profile(&kernel, grid)
}

fn sample_profile(kernel: &Kernel, grid: Vec<f64>) -> Result<CmcProfile> {
    let model = kernel.model;
    let radius = kernel.radius;
    let count = grid.len();
    let tol = model.quad_tol / count as f64;
    let mut v = vec![0.0; count];
    for i in (0..count - 1).rev() {
        let lo = kernel.tau(grid[i + 1]);
        let hi = kernel.tau(grid[i]);
        v[i] = v[i + 1] + kernel.value_between(lo, hi, tol)?;
    }
    let vp = grid.iter().map(|&r| kernel.slope(r)).collect();
    Ok(CmcProfile {
        radius,
        h_r: model.mean_curvature(radius)?,
        grid,
        v,
        vp,
    })
}

/// `v_R(r)` by a single quadrature.
pub fn eval_vr(model: &ModelGeometry, radius: f64, r: f64) -> Result<f64> {
    if !(0.0..=radius).contains(&r) {
        return Err(Error::Domain {
            what: "v_R outside [0, R]",
            r,
        });
    }
    let kernel = Kernel::new(model, radius)?;
    kernel.value_between(0.0, kernel.tau(r), model.quad_tol)
}

/// `v_R'(r) = nH(R) V / (rho sqrt(A^2 - n^2 H(R)^2 V^2))` for `0 <= r < R`.
pub fn eval_vr_prime(model: &ModelGeometry, radius: f64, r: f64) -> Result<f64> {
    if !(r >= 0.0 && r < radius) {
        return Err(Error::Domain { what: "v_R'", r });
    }
    Ok(Kernel::new(model, radius)?.slope(r))
}

impl CmcProfile {
    /// Interpolates `v_R` with cubic Hermite segments; the last segment uses
    /// the square-root shape of the vertical tangent.
    pub fn eval(&self, r: f64) -> f64 {
        let g = &self.grid;
        let n = g.len();
        if r >= self.radius {
            return 0.0;
        }
        if r <= 0.0 {
            return self.v[0];
        }
        let k = (g.partition_point(|&x| x <= r) - 1).min(n - 2);
        if k == n - 2 {
            return self.v[k] * ((self.radius - r) / (self.radius - g[k])).sqrt();
        }
        let h = g[k + 1] - g[k];
        let t = (r - g[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.v[k]
            + (t3 - 2.0 * t2 + t) * h * self.vp[k]
            + (-2.0 * t3 + 3.0 * t2) * self.v[k + 1]
            + (t3 - t2) * h * self.vp[k + 1]
    }

    /// Checks the profile invariants: `v(R) = 0`, `v` decreasing and
    /// nonnegative, `vp <= 0` and `vp(0) = 0`.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Geometry(msg));
        if *self.v.last().unwrap() != 0.0 {
            return fail("v(R) != 0".into());
        }
        if self.vp[0] != 0.0 && self.grid[0] == 0.0 {
            return fail(format!("v'(0) = {} != 0", self.vp[0]));
        }
        for i in 0..self.v.len() - 1 {
            if !(self.v[i] > self.v[i + 1]) || self.v[i] < 0.0 {
                return fail(format!("v not strictly decreasing at r = {}", self.grid[i]));
            }
            if self.vp[i] > 0.0 {
                return fail(format!("v' > 0 at r = {}", self.grid[i]));
            }
        }
        Ok(())
    }
}

/// Integrates the profile curve of `v_R` from `(R, 0, pi/2)` towards the pole
/// with classical RK4:
///
/// ```text
/// r' = cos phi,  s' = sin phi / rho,  phi' = -n H(R) - n H_cyl(r) sin phi
/// ```
///
/// Stops once `r` drops below `max(R_MIN, 2 step)`, or after arclength `3 R + 10`.
pub fn integrate_profile_ode(model: &ModelGeometry, radius: f64, step: f64) -> Result<ProfileCurve> {
    if !(step > 0.0) {
        return Err(Error::Parameter(format!("step must be positive, got {step}")));
    }
    let n = model.n as f64;
    let nh = n * model.mean_curvature(radius)?;
    let stop = (2.0 * step).max(R_MIN);
    let budget = 3.0 * radius + 10.0;
    let rhs = |y: [f64; 3]| -> Result<[f64; 3]> {
        let (r, phi) = (y[0], y[2]);
        let hcyl = model.cylinder_curvature(r)?;
        Ok([phi.cos(), phi.sin() / model.rho.value(r), -nh - n * hcyl * phi.sin()])
    };
    let mut y = [radius, 0.0, std::f64::consts::FRAC_PI_2];
    let mut sigma = 0.0;
    let mut curve = ProfileCurve::default();
    let push = |c: &mut ProfileCurve, sigma: f64, y: [f64; 3]| {
        c.arclength.push(sigma);
        c.r.push(y[0]);
        c.s.push(y[1]);
        c.phi.push(y[2]);
    };
    push(&mut curve, sigma, y);
    let add = |y: [f64; 3], k: [f64; 3], f: f64| [y[0] + f * k[0], y[1] + f * k[1], y[2] + f * k[2]];
    while y[0] >= stop && sigma < budget {
        let k1 = rhs(y)?;
        let k2 = rhs(add(y, k1, 0.5 * step))?;
        let k3 = rhs(add(y, k2, 0.5 * step))?;
        let k4 = rhs(add(y, k3, step))?;
        for i in 0..3 {
            y[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        sigma += step;
        if !(-1e-9..=std::f64::consts::PI + 1e-9).contains(&y[2]) {
            return Err(Error::StepSize {
                arclength: sigma,
                phi: y[2],
            });
        }
        push(&mut curve, sigma, y);
    }
    Ok(curve)
}

/// Max deviation of the radial CMC operator from `nH(R)` on interior nodes:
///
/// ```text
/// w' + w (rho'/rho + (n-1) xi'/xi),   w = v' / sqrt(rho^{-2} + v'^2)
/// ```
///
/// with a three-point nonuniform derivative. The pole and the two nodes
/// closest to `R` are skipped.
pub fn residual_cmc(model: &ModelGeometry, profile: &CmcProfile) -> f64 {
    let g = &profile.grid;
    let n = g.len();
    let flux: Vec<f64> = g
        .iter()
        .zip(&profile.vp)
        .map(|(&r, &p)| {
            if p.is_infinite() {
                p.signum()
            } else {
                let rho = model.rho.value(r);
                p / (1.0 / (rho * rho) + p * p).sqrt()
            }
        })
        .collect();
    let nh = model.n as f64 * profile.h_r;
    let mut worst = 0.0f64;
    for i in 1..n.saturating_sub(2) {
        if g[i] < R_MIN {
            continue;
        }
        let dw = three_point_derivative(g[i - 1], g[i], g[i + 1], flux[i - 1], flux[i], flux[i + 1]);
        let coef = model.n as f64 * model.cylinder_curvature(g[i]).unwrap_or(f64::NAN);
        worst = worst.max((dw + flux[i] * coef - nh).abs());
    }
    worst
}

/// Second-order derivative at `x1` from three nonuniform nodes.
pub fn three_point_derivative(x0: f64, x1: f64, x2: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    let (h1, h2) = (x1 - x0, x2 - x1);
    (h2 * (f1 - f0) / h1 + h1 * (f2 - f1) / h2) / (h1 + h2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_model;
    use crate::profile::ProfileSpec;

    fn euclid(n: usize) -> ModelGeometry {
        make_model(ProfileSpec::Euclidean, ProfileSpec::Euclidean, ProfileSpec::constant(1.0), n, 1e-10).unwrap()
    }

    fn hyperbolic() -> ModelGeometry {
        make_model(
            ProfileSpec::hyperbolic(1.0),
            ProfileSpec::hyperbolic(1.0),
            ProfileSpec::cosh(1.0),
            2,
            1e-10,
        )
        .unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = cmc_grid(2.0, 256);
        assert_eq!(g.len(), 256);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 2.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn hemisphere() {
        for n in [2, 3] {
            let m = euclid(n);
            for radius in [0.5, 1.0, 2.0] {
                let p = solve_vr(&m, radius, 256).unwrap();
                p.check_invariants().unwrap();
                for (r, v) in p.grid.iter().zip(&p.v) {
                    if *r <= radius - 1e-3 {
                        assert!((v - (radius * radius - r * r).sqrt()).abs() < 1e-7, "n={n} R={radius} r={r}");
                    }
                }
            }
        }
        let m = euclid(2);
        assert!((eval_vr(&m, 1.0, 0.6).unwrap() - 0.8).abs() < 1e-9);
        assert!((eval_vr_prime(&m, 1.0, 0.6).unwrap() + 0.75).abs() < 1e-12);
        assert_eq!(eval_vr_prime(&m, 1.0, 0.0).unwrap(), 0.0);
        assert!(eval_vr_prime(&m, 1.0, 1.0).is_err());
    }

    #[test]
    fn hyperbolic_reference_values() {
        let m = hyperbolic();
        let p = solve_vr(&m, 1.0, 256).unwrap();
        p.check_invariants().unwrap();
        assert!((p.v[0] - 1.0).abs() < 1e-8);
        assert!((eval_vr(&m, 1.0, 0.5).unwrap() - 0.834025228981330644).abs() < 1e-9);
        assert!((eval_vr_prime(&m, 1.0, 0.5).unwrap() + 0.676964355109536208).abs() < 1e-12);
        assert!((p.h_r + 1.31303528549933130).abs() < 1e-10);
    }

    #[test]
    fn slope_matches_finite_difference() {
        let m = hyperbolic();
        let h = 1e-4;
        let fd = (eval_vr(&m, 1.0, 0.5 + h).unwrap() - eval_vr(&m, 1.0, 0.5 - h).unwrap()) / (2.0 * h);
        assert!((fd - eval_vr_prime(&m, 1.0, 0.5).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn flux_identity() {
        for m in [euclid(2), euclid(3), hyperbolic()] {
            let p = solve_vr(&m, 1.5, 128).unwrap();
            let nh = m.n as f64 * p.h_r;
            for i in 0..p.grid.len() - 1 {
                let r = p.grid[i];
                let rho = m.rho.value(r);
                let w = p.vp[i] / (1.0 / (rho * rho) + p.vp[i] * p.vp[i]).sqrt();
                assert!((w * m.a(r) - nh * m.volume(r)).abs() < 1e-6, "r = {r}");
            }
        }
    }

    #[test]
    fn profile_ode_traces_quarter_circle() {
        let m = euclid(2);
        let c = integrate_profile_ode(&m, 1.0, 1e-3).unwrap();
        assert_eq!((c.r[0], c.s[0], c.phi[0]), (1.0, 0.0, std::f64::consts::FRAC_PI_2));
        for (r, s) in c.r.iter().zip(&c.s) {
            assert!((r * r + s * s - 1.0).abs() < 1e-6);
        }
        assert!(*c.r.last().unwrap() < 2e-3);
    }

    #[test]
    fn profile_ode_agrees_with_quadrature() {
        let m = hyperbolic();
        let c = integrate_profile_ode(&m, 1.0, 1e-3).unwrap();
        let worst =
            c.r.iter()
                .zip(&c.s)
                .map(|(&r, &s)| (s - eval_vr(&m, 1.0, r.clamp(0.0, 1.0)).unwrap()).abs())
                .fold(0.0, f64::max);
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn residual_and_order() {
        for m in [euclid(2), hyperbolic()] {
            let coarse = residual_cmc(&m, &solve_vr(&m, 1.0, 256).unwrap());
            let fine = residual_cmc(&m, &solve_vr(&m, 1.0, 512).unwrap());
            assert!(coarse < 1e-3, "{coarse}");
            // The euclidean flux -r/R is linear, so the stencil is exact there.
            if coarse > 1e-10 {
                assert!((coarse / fine).log2() >= 1.8, "{coarse} {fine}");
            }
        }
    }

    #[test]
    fn residual_rejects_flat_profile() {
        let m = euclid(2);
        let mut p = solve_vr(&m, 1.0, 64).unwrap();
        p.v.iter_mut().for_each(|v| *v = 0.0);
        p.vp.iter_mut().for_each(|v| *v = 0.0);
        assert!((residual_cmc(&m, &p) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn interpolation_hits_nodes() {
        let m = euclid(2);
        let p = solve_vr(&m, 1.0, 64).unwrap();
        for (r, v) in p.grid.iter().zip(&p.v) {
            assert!((p.eval(*r) - v).abs() < 1e-14);
        }
        assert!((p.eval(0.61) - (1.0 - 0.61f64 * 0.61).sqrt()).abs() < 1e-6);
    }
}
