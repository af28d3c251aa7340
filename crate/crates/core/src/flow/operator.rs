//! Finite-difference discretization of
//! `Q[u] = (g^ij - u^i u^j / W^2) u_{i;j} + (1 + 1/(rho^2 W^2)) <grad log rho, grad u>`
//! in geodesic polar coordinates `dr^2 + xi^2 dtheta^2`.
//!
//! With coefficients frozen at a field `u`, `Q` is the linear operator
//! `a_rr u_rr + 2 a_rt u_rt + a_tt u_tt + b_r u_r + b_t u_t`, where the
//! first-order terms absorb `Gamma^r_tt = -xi xi'` and `Gamma^t_rt = xi'/xi`.
//! The same stencil is used for evaluating `Q` and for the implicit step.

use rayon::prelude::*;

use crate::cmc::three_point_derivative;
use crate::error::{Error, Result};
use crate::flow::grid::Grid;
use crate::flow::linear::Csr;
use crate::geometry::ModelGeometry;
use crate::quadrature::gauss_legendre;

/// Radial data of one ring.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RingGeometry {
    pub xi: f64,
    pub dxi: f64,
    pub rho: f64,
    pub log_drho: f64,
}

impl RingGeometry {
    pub fn at(model: &ModelGeometry, r: f64) -> Self {
        RingGeometry {
            xi: model.xi.value(r),
            dxi: model.xi.d1(r),
            rho: model.rho.value(r),
            log_drho: if r > 0.0 { model.rho.log_d1(r) } else { 0.0 },
        }
    }
}

/// `m(h) = int_0^h (int_0^s xi^{n-1}) / xi(s)^{n-1} ds`: a radial function with
/// constant Laplacian `c` satisfies `u(h) - u(0) = c m(h)`.
pub fn pole_metric_factor(model: &ModelGeometry, h: f64) -> f64 {
    let m = model.n as i32 - 1;
    gauss_legendre(
        |s| {
            let inner = gauss_legendre(|x| model.xi.value(x).powi(m), 0.0, s);
            inner / model.xi.value(s).powi(m)
        },
        0.0,
        h,
    )
}

pub(crate) fn check_dimension(model: &ModelGeometry, grid: &Grid) -> Result<()> {
    if !grid.is_radial() && model.n != 2 {
        return Err(Error::Parameter(format!(
            "the angular grid needs n = 2 (got n = {}); use ntheta = 1 for radial data",
            model.n
        )));
    }
    Ok(())
}

/// Precomputed per-ring geometry for a grid.
#[derive(Clone, Debug)]
pub struct GridGeometry {
    pub(crate) rings: Vec<RingGeometry>,
    pub(crate) pole_factor: f64,
    pub(crate) n: usize,
}

impl GridGeometry {
    pub fn new(model: &ModelGeometry, grid: &Grid) -> Result<Self> {
        check_dimension(model, grid)?;
        Ok(GridGeometry {
            rings: (0..=grid.nr).map(|i| RingGeometry::at(model, grid.r(i))).collect(),
            pole_factor: pole_metric_factor(model, grid.h),
            n: model.n,
        })
    }
}

/// Coefficients of the frozen operator at one node.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Coefficients {
    pub a_rr: f64,
    pub a_rt: f64,
    pub a_tt: f64,
    pub b_r: f64,
    pub b_t: f64,
    pub w_sq: f64,
}

/// Coefficients at a point with first derivatives `(u_r, u_t)` in `n = 2`.
pub(crate) fn coefficients_2d(g: &RingGeometry, ur: f64, ut: f64) -> Coefficients {
    let xi2 = g.xi * g.xi;
    let w_sq = 1.0 / (g.rho * g.rho) + ur * ur + ut * ut / xi2;
    let a_rr = 1.0 - ur * ur / w_sq;
    let a_rt = -ur * ut / (xi2 * w_sq);
    let a_tt = 1.0 / xi2 - ut * ut / (xi2 * xi2 * w_sq);
    let drift = (1.0 + 1.0 / (g.rho * g.rho * w_sq)) * g.log_drho;
    Coefficients {
        a_rr,
        a_rt,
        a_tt,
        b_r: a_tt * g.xi * g.dxi + drift,
        b_t: -2.0 * a_rt * g.dxi / g.xi,
        w_sq,
    }
}

/// Coefficients of the radial operator in dimension `n`.
pub(crate) fn coefficients_radial(g: &RingGeometry, n: usize, ur: f64) -> Coefficients {
    let w_sq = 1.0 / (g.rho * g.rho) + ur * ur;
    let inv = 1.0 / (g.rho * g.rho * w_sq);
    Coefficients {
        a_rr: inv,
        b_r: (n - 1) as f64 * g.dxi / g.xi + (1.0 + inv) * g.log_drho,
        w_sq,
        ..Default::default()
    }
}

type Entries = Vec<(usize, f64)>;

/// Centered weights for `b u_x` with diffusion `a` and spacing `dx`, switching
/// to upwind when the cell Peclet number `|b| dx / 2a` exceeds two. The
/// threshold leaves the `(n - 1)/r` term at the first ring centered for `n <= 5`.
fn first_order(b: f64, a: f64, dx: f64) -> (f64, f64, f64) {
    if (b * dx).abs() <= 4.0 * a {
        (-b / (2.0 * dx), 0.0, b / (2.0 * dx))
    } else if b > 0.0 {
        (0.0, -b / dx, b / dx)
    } else {
        (b / dx, -b / dx, 0.0)
    }
}

/// Gradient `(p_x, p_y)` and Hessian terms at the pole from the first ring,
/// in normal coordinates: returns `(p, trace, a2, b2)` where `a2`, `b2` are
/// the second Fourier coefficients of the ring.
fn pole_fourier(grid: &Grid, u: &[f64]) -> ([f64; 2], f64, f64, f64) {
    let ring = grid.ring(u, 1);
    let nt = grid.ntheta as f64;
    let (mut mean, mut a1, mut b1, mut a2, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (j, &v) in ring.iter().enumerate() {
        let th = grid.theta(j);
        mean += v;
        a1 += v * th.cos();
        b1 += v * th.sin();
        a2 += v * (2.0 * th).cos();
        b2 += v * (2.0 * th).sin();
    }
    let s = 2.0 / nt;
    ([s * a1 / grid.h, s * b1 / grid.h], mean / nt, s * a2, s * b2)
}

fn pole_row(grid: &Grid, geo: &GridGeometry, u: &[f64]) -> Entries {
    let m = geo.pole_factor;
    if grid.is_radial() {
        return vec![(0, -1.0 / m), (1, 1.0 / m)];
    }
    let (p, _, _, _) = pole_fourier(grid, u);
    let rho0 = geo.rings[0].rho;
    let p2 = p[0] * p[0] + p[1] * p[1];
    let w_sq = 1.0 / (rho0 * rho0) + p2;
    // Q(0) = T - (p^T Hess p) / W^2 with T = (mean - u0)/m, Hxx - Hyy = 4 a2 / h^2,
    // Hxy = 2 b2 / h^2.
    let trace_w = 1.0 - p2 / (2.0 * w_sq);
    let h2 = grid.h * grid.h;
    let nt = grid.ntheta as f64;
    let cd = -(p[0] * p[0] - p[1] * p[1]) / (2.0 * w_sq) * 4.0 / h2 * 2.0 / nt;
    let cx = -2.0 * p[0] * p[1] / w_sq * 2.0 / h2 * 2.0 / nt;
    let mut row = Vec::with_capacity(grid.ntheta + 1);
    row.push((0, -trace_w / m));
    for j in 0..grid.ntheta {
        let th = 2.0 * grid.theta(j);
        row.push((grid.idx(1, j as isize), trace_w / (m * nt) + cd * th.cos() + cx * th.sin()));
    }
    row
}

fn interior_row_radial(grid: &Grid, geo: &GridGeometry, u: &[f64], i: usize) -> (Entries, Coefficients) {
    let h = grid.h;
    let ur = (u[i + 1] - u[i - 1]) / (2.0 * h);
    let c = coefficients_radial(&geo.rings[i], geo.n, ur);
    let (wm, wc, wp) = first_order(c.b_r, c.a_rr, h);
    let a = c.a_rr / (h * h);
    (vec![(i - 1, a + wm), (i, -2.0 * a + wc), (i + 1, a + wp)], c)
}

fn interior_row_2d(grid: &Grid, geo: &GridGeometry, u: &[f64], i: usize, j: usize) -> (Entries, Coefficients) {
    let (h, k) = (grid.h, grid.dtheta);
    let j = j as isize;
    let at = |di: isize, dj: isize| u[grid.idx((i as isize + di) as usize, j + dj)];
    let ur = (at(1, 0) - at(-1, 0)) / (2.0 * h);
    let ut = (at(0, 1) - at(0, -1)) / (2.0 * k);
    let c = coefficients_2d(&geo.rings[i], ur, ut);
    let idx = |di: isize, dj: isize| grid.idx((i as isize + di) as usize, j + dj);

    let mut row: Entries = Vec::with_capacity(9);
    let (arr, att) = (c.a_rr / (h * h), c.a_tt / (k * k));
    let s = c.a_rt.abs() / (h * k);
    let (rm, rc, rp) = first_order(c.b_r, c.a_rr, h);
    let (tm, tc, tp) = first_order(c.b_t, c.a_tt, k);
    row.push((idx(0, 0), -2.0 * arr - 2.0 * att + 2.0 * s + rc + tc));
    row.push((idx(1, 0), arr - s + rp));
    row.push((idx(-1, 0), arr - s + rm));
    row.push((idx(0, 1), att - s + tp));
    row.push((idx(0, -1), att - s + tm));
    // Seven-point mixed stencil along the diagonal matching the sign of a_rt.
    if c.a_rt >= 0.0 {
        row.push((idx(1, 1), s));
        row.push((idx(-1, -1), s));
    } else {
        row.push((idx(1, -1), s));
        row.push((idx(-1, 1), s));
    }
    (row, c)
}

/// Rows of the frozen operator at every node; boundary rows are empty.
pub(crate) fn operator_rows(grid: &Grid, geo: &GridGeometry, u: &[f64]) -> Vec<Entries> {
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = grid.position(k);
            if k == 0 {
                pole_row(grid, geo, u)
            } else if i == grid.nr {
                Vec::new()
            } else if grid.is_radial() {
                interior_row_radial(grid, geo, u, i).0
            } else {
                interior_row_2d(grid, geo, u, i, j).0
            }
        })
        .collect()
}

/// The frozen operator `L_u` as a sparse matrix with empty boundary rows.
pub fn assemble_operator(grid: &Grid, geo: &GridGeometry, u: &[f64]) -> Csr {
    Csr::from_rows(grid.len(), operator_rows(grid, geo, u))
}

/// `Q[u]` on the grid; the boundary ring is `NaN`.
pub fn discretize_q(model: &ModelGeometry, grid: &Grid, u: &[f64]) -> Result<Vec<f64>> {
    let geo = GridGeometry::new(model, grid)?;
    Ok(apply_q(grid, &geo, u))
}

pub(crate) fn apply_q(grid: &Grid, geo: &GridGeometry, u: &[f64]) -> Vec<f64> {
    operator_rows(grid, geo, u)
        .into_par_iter()
        .enumerate()
        .map(|(k, row)| {
            if grid.is_boundary(k) {
                f64::NAN
            } else {
                row.iter().map(|&(c, w)| w * u[c]).sum()
            }
        })
        .collect()
}

/// First derivatives `(u_r, u_theta)` at every node: centered inside, one-sided
/// second order on the boundary ring, from the first Fourier mode at the pole
/// (reported as `(|grad u|, 0)` there).
pub fn gradient_components(grid: &Grid, u: &[f64]) -> Vec<(f64, f64)> {
    let h = grid.h;
    let k = grid.dtheta;
    (0..grid.len())
        .map(|idx| {
            let (i, j) = grid.position(idx);
            if idx == 0 {
                if grid.is_radial() {
                    return (0.0, 0.0);
                }
                let (p, ..) = pole_fourier(grid, u);
                return (p[0].hypot(p[1]), 0.0);
            }
            let j = j as isize;
            let at = |ii: usize, dj: isize| u[grid.idx(ii, j + dj)];
            let ur = if i == grid.nr {
                (3.0 * at(i, 0) - 4.0 * at(i - 1, 0) + at(i - 2, 0)) / (2.0 * h)
            } else {
                (at(i + 1, 0) - at(i - 1, 0)) / (2.0 * h)
            };
            let ut = if grid.is_radial() {
                0.0
            } else {
                (at(i, 1) - at(i, -1)) / (2.0 * k)
            };
            (ur, ut)
        })
        .collect()
}

/// `W = (rho^-2 + |grad u|^2)^{1/2}` at every node.
pub fn w_field(grid: &Grid, geo: &GridGeometry, u: &[f64]) -> Vec<f64> {
    gradient_components(grid, u)
        .into_iter()
        .enumerate()
        .map(|(idx, (ur, ut))| {
            let g = &geo.rings[grid.position(idx).0];
            let tang = if idx == 0 || ut == 0.0 { 0.0 } else { ut / g.xi };
            (1.0 / (g.rho * g.rho) + ur * ur + tang * tang).sqrt()
        })
        .collect()
}

/// `|grad u|` at every node.
pub fn gradient_norm(grid: &Grid, geo: &GridGeometry, u: &[f64]) -> Vec<f64> {
    gradient_components(grid, u)
        .into_iter()
        .enumerate()
        .map(|(idx, (ur, ut))| {
            let g = &geo.rings[grid.position(idx).0];
            let tang = if idx == 0 || ut == 0.0 { 0.0 } else { ut / g.xi };
            ur.hypot(tang)
        })
        .collect()
}

/// Radial `Q` on an arbitrary increasing grid `r` (the pole when `r[0] == 0`).
/// The last entry is `NaN`.
pub fn radial_q(model: &ModelGeometry, r: &[f64], u: &[f64]) -> Vec<f64> {
    let len = r.len();
    let mut out = vec![f64::NAN; len];
    for i in 0..len - 1 {
        if i == 0 {
            if r[0] == 0.0 {
                out[0] = (u[1] - u[0]) / pole_metric_factor(model, r[1]);
            }
            continue;
        }
        let (h1, h2) = (r[i] - r[i - 1], r[i + 1] - r[i]);
        let ur = three_point_derivative(r[i - 1], r[i], r[i + 1], u[i - 1], u[i], u[i + 1]);
        let urr = 2.0 * ((u[i + 1] - u[i]) / h2 - (u[i] - u[i - 1]) / h1) / (h1 + h2);
        let c = coefficients_radial(&RingGeometry::at(model, r[i]), model.n, ur);
        out[i] = c.a_rr * urr + c.b_r * ur;
    }
    out
}

/// `Q[f]` at a single point `(r, theta)` of a 2-dimensional base, by centered
/// differences with physical step `h` (angular step `h / xi(r)`).
pub fn q_pointwise(model: &ModelGeometry, f: &dyn Fn(f64, f64) -> f64, r: f64, theta: f64, h: f64) -> f64 {
    let g = RingGeometry::at(model, r);
    let k = h / g.xi;
    let at = |dr: f64, dt: f64| f(r + dr * h, theta + dt * k);
    let c0 = at(0.0, 0.0);
    let ur = (at(1.0, 0.0) - at(-1.0, 0.0)) / (2.0 * h);
    let ut = (at(0.0, 1.0) - at(0.0, -1.0)) / (2.0 * k);
    let urr = (at(1.0, 0.0) - 2.0 * c0 + at(-1.0, 0.0)) / (h * h);
    let utt = (at(0.0, 1.0) - 2.0 * c0 + at(0.0, -1.0)) / (k * k);
    let urt = (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * k);
    let c = coefficients_2d(&g, ur, ut);
    c.a_rr * urr + 2.0 * c.a_rt * urt + c.a_tt * utt + c.b_r * ur + c.b_t * ut
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmc::solve_vr_on;
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
    fn constants_are_annihilated() {
        for grid in [Grid::new(1.0, 16, 16).unwrap(), Grid::radial(1.0, 16).unwrap()] {
            let q = discretize_q(&hyperbolic(), &grid, &vec![2.5; grid.len()]).unwrap();
            for (k, v) in q.iter().enumerate() {
                if grid.is_boundary(k) {
                    assert!(v.is_nan());
                } else {
                    assert!(v.abs() < 1e-12, "k = {k}: {v}");
                }
            }
        }
    }

    /// Max error of `Q[v_R] - W n H(R)` over `B_{0.7}`, on a grid of `B_{0.8}`, for `R = 1`.
    fn hemisphere_error(model: &ModelGeometry, nr: usize, ntheta: usize) -> f64 {
        let grid = Grid::new(0.8, nr, ntheta).unwrap();
        let rs: Vec<f64> = (0..=nr).map(|i| grid.r(i)).chain([1.0]).collect();
        let prof = solve_vr_on(model, 1.0, rs).unwrap();
        let u = grid.sample(|r, _| prof.eval(r));
        let exact = grid.sample(|r, _| {
            let i = (r / grid.h).round() as usize;
            let vp = prof.vp[i];
            let rho = model.rho.value(r);
            (1.0 / (rho * rho) + vp * vp).sqrt()
        });
        let nh = model.n as f64 * model.mean_curvature(1.0).unwrap();
        let q = discretize_q(model, &grid, &u).unwrap();
        // A fixed region, so the maximum does not chase the steepening near r = 0.8.
        q.iter()
            .zip(&exact)
            .enumerate()
            .filter(|(k, (v, _))| v.is_finite() && grid.r(grid.position(*k).0) <= 0.7 + 1e-12)
            .map(|(_, (v, w))| (v - w * nh).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn hemisphere_value_at_point() {
        let m = euclid(2);
        let grid = Grid::new(0.8, 64, 32).unwrap();
        let u = grid.sample(|r, _| (1.0 - r * r).sqrt());
        let q = discretize_q(&m, &grid, &u).unwrap();
        let k = grid.idx(48, 5);
        assert!((grid.r(48) - 0.6).abs() < 1e-12);
        assert!((q[k] + 2.5).abs() < 1e-3, "{}", q[k]);
    }

    #[test]
    fn hemisphere_second_order() {
        for (model, ntheta) in [(euclid(2), 16), (euclid(3), 1), (hyperbolic(), 16), (hyperbolic(), 1)] {
            let errs: Vec<f64> = [16, 32, 64]
                .iter()
                .map(|&nr| hemisphere_error(&model, nr, if ntheta == 1 { 1 } else { nr }))
                .collect();
            for w in errs.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!(order >= 1.8, "n = {} ntheta = {ntheta} errors {errs:?}", model.n);
            }
        }
    }

    #[test]
    fn radial_grid_matches_radial_q() {
        let m = hyperbolic();
        let grid = Grid::radial(1.0, 32).unwrap();
        let u = grid.sample(|r, _| (r * r).cos());
        let a = discretize_q(&m, &grid, &u).unwrap();
        let rs: Vec<f64> = (0..=32).map(|i| grid.r(i)).collect();
        let b = radial_q(&m, &rs, &u);
        for (x, y) in a.iter().zip(&b) {
            assert!(x.is_nan() && y.is_nan() || (x - y).abs() < 1e-10, "{x} {y}");
        }
    }

    #[test]
    fn pointwise_matches_grid_operator() {
        let m = hyperbolic();
        let f = |r: f64, t: f64| 0.3 * r * r * t.cos() + 0.1 * r * (2.0 * t).sin();
        let grid = Grid::new(1.0, 128, 128).unwrap();
        let u = grid.sample(f);
        let q = discretize_q(&m, &grid, &u).unwrap();
        for (i, j) in [(40, 3), (64, 50), (100, 90)] {
            let k = grid.idx(i, j);
            let p = q_pointwise(&m, &f, grid.r(i), grid.theta(j as usize), 1e-4);
            assert!((q[k] - p).abs() < 5e-3 * (1.0 + p.abs()), "{} vs {p}", q[k]);
        }
    }

    #[test]
    fn pole_of_smooth_field() {
        // u = x + x^2 + 0.5 y^2 in the euclidean plane: grad (1, 0), Hxx = 2, Hyy = 1.
        // Q = 3 - (1 * 2) / (1 + 1) = 2.
        let m = euclid(2);
        let grid = Grid::new(1.0, 64, 16).unwrap();
        let u = grid.sample(|r, t| {
            let (x, y) = (r * t.cos(), r * t.sin());
            x + x * x + 0.5 * y * y
        });
        let q = discretize_q(&m, &grid, &u).unwrap();
        assert!((q[0] - 2.0).abs() < 1e-3, "{}", q[0]);
    }

    #[test]
    fn w_is_at_least_inverse_rho() {
        let m = hyperbolic();
        let grid = Grid::new(2.0, 16, 16).unwrap();
        let u = grid.sample(|r, t| r * t.sin());
        let geo = GridGeometry::new(&m, &grid).unwrap();
        let w = w_field(&grid, &geo, &u);
        for (k, v) in w.iter().enumerate() {
            let r = grid.r(grid.position(k).0);
            assert!(*v >= 1.0 / m.rho.value(r) - 1e-15);
        }
    }
}
