//! Second fundamental form of the graph `x -> (u(x), x)` assembled from the
//! ambient Christoffel symbols.
//!
//! With `nu = ds - du` and `W = |nu|`, the upward unit normal is `N = nu^# / W`
//! and `a_ij = <N, Dbar_i X_j> = (u_ij + nu_c Gamma^c_ab X_i^a X_j^b) / W`,
//! where `X_i = d_i + u_i d_s`.

use rayon::prelude::*;

use crate::flow::grid::Grid;
use crate::flow::operator::GridGeometry;
use crate::geometry::ModelGeometry;

/// Coordinate derivatives of `u` at a point of the base: `du[i]`, `ddu[i][j]`
/// over `(r, theta_1, ..., theta_{n-1})`.
pub struct Jet {
    pub r: f64,
    pub du: Vec<f64>,
    pub ddu: Vec<Vec<f64>>,
}

/// `(|A|^2, nH)` at one point. Angles are placed on the equator of the
/// hyperspherical chart, where the round metric is `dtheta_1^2 + ...`.
pub fn sff_at(model: &ModelGeometry, jet: &Jet) -> (f64, f64) {
    let n = model.n;
    let theta = vec![std::f64::consts::FRAC_PI_2; n - 1];
    let frame = model.ambient_frame();
    let g = frame.metric_diagonal(jet.r, &theta);
    let gamma = frame.christoffels(jet.r, &theta);
    let dim = n + 1;
    // Ambient components of X_i.
    let x: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut v = vec![0.0; dim];
            v[0] = jet.du[i];
            v[i + 1] = 1.0;
            v
        })
        .collect();
    let mut nu = vec![1.0; dim];
    for i in 0..n {
        nu[i + 1] = -jet.du[i];
    }
    let w = (0..dim).map(|c| nu[c] * nu[c] / g[c]).sum::<f64>().sqrt();

    let mut a = vec![vec![0.0; n]; n];
    let mut metric = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = jet.ddu[i][j];
            for c in 0..dim {
                if nu[c] == 0.0 {
                    continue;
                }
                let mut t = 0.0;
                for p in 0..dim {
                    if x[i][p] == 0.0 {
                        continue;
                    }
                    for q in 0..dim {
                        t += gamma[c][p][q] * x[i][p] * x[j][q];
                    }
                }
                s += nu[c] * t;
            }
            a[i][j] = s / w;
            metric[i][j] = (0..dim).map(|c| g[c] * x[i][c] * x[j][c]).sum();
        }
    }
    // Shape operator S = metric^{-1} a.
    let s = solve_matrix(metric, a);
    let trace: f64 = (0..n).map(|i| s[i][i]).sum();
    let sq: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| s[i][j] * s[j][i])
        .sum();
    (sq, trace)
}

/// Solves `m X = b` for square `m` by Gaussian elimination with partial pivoting.
fn solve_matrix(mut m: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| m[p][col].abs().total_cmp(&m[q][col].abs())).unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            for k in 0..b[row].len() {
                b[row][k] -= f * b[col][k];
            }
        }
    }
    for col in (0..n).rev() {
        for k in 0..b[col].len() {
            let mut s = b[col][k];
            for j in col + 1..n {
                s -= m[col][j] * b[j][k];
            }
            b[col][k] = s / m[col][col];
        }
    }
    b
}

fn node_jet(model: &ModelGeometry, grid: &Grid, geo: &GridGeometry, u: &[f64], idx: usize) -> Option<Jet> {
    let n = model.n;
    let (i, j) = grid.position(idx);
    if i == grid.nr {
        return None;
    }
    let h = grid.h;
    if idx == 0 {
        // Normal coordinates at the pole: the Christoffels vanish when rho'(0) = 0,
        // so `a = Hess u / W` with `Hess u` from the first ring.
        let ring = grid.ring(u, 1);
        let m = geo.pole_factor;
        let mean = ring.iter().sum::<f64>() / ring.len() as f64;
        let mut ddu = vec![vec![0.0; n]; n];
        let mut du = vec![0.0; n];
        let lap = (mean - u[0]) / m;
        if grid.is_radial() {
            for (k, row) in ddu.iter_mut().enumerate() {
                row[k] = lap / n as f64;
            }
        } else {
            let nt = ring.len() as f64;
            let (mut a1, mut b1, mut a2, mut b2) = (0.0, 0.0, 0.0, 0.0);
            for (jj, &v) in ring.iter().enumerate() {
                let th = grid.theta(jj);
                a1 += v * th.cos();
                b1 += v * th.sin();
                a2 += v * (2.0 * th).cos();
                b2 += v * (2.0 * th).sin();
            }
            let s = 2.0 / nt;
            du = vec![s * a1 / h, s * b1 / h];
            let d = 4.0 * s * a2 / (h * h);
            ddu[0][0] = 0.5 * (lap + d);
            ddu[1][1] = 0.5 * (lap - d);
            ddu[0][1] = 2.0 * s * b2 / (h * h);
            ddu[1][0] = ddu[0][1];
        }
        return Some(Jet { r: 0.0, du, ddu });
    }
    let at = |di: isize, dj: isize| u[grid.idx((i as isize + di) as usize, j as isize + dj)];
    let mut du = vec![0.0; n];
    let mut ddu = vec![vec![0.0; n]; n];
    du[0] = (at(1, 0) - at(-1, 0)) / (2.0 * h);
    ddu[0][0] = (at(1, 0) - 2.0 * at(0, 0) + at(-1, 0)) / (h * h);
    if !grid.is_radial() {
        let k = grid.dtheta;
        du[1] = (at(0, 1) - at(0, -1)) / (2.0 * k);
        ddu[1][1] = (at(0, 1) - 2.0 * at(0, 0) + at(0, -1)) / (k * k);
        ddu[0][1] = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * k);
        ddu[1][0] = ddu[0][1];
    }
    Some(Jet { r: grid.r(i), du, ddu })
}

/// Pole values assume the model is flat to first order there.
fn pole_sff(model: &ModelGeometry, jet: &Jet) -> (f64, f64) {
    let n = model.n;
    let rho = model.rho.value(0.0);
    let p2: f64 = jet.du.iter().map(|v| v * v).sum();
    let w = (1.0 / (rho * rho) + p2).sqrt();
    let metric: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { 0.0 } + rho * rho * jet.du[i] * jet.du[j])
                .collect()
        })
        .collect();
    let a: Vec<Vec<f64>> = jet.ddu.iter().map(|row| row.iter().map(|v| v / w).collect()).collect();
    let s = solve_matrix(metric, a);
    let trace: f64 = (0..n).map(|i| s[i][i]).sum();
    let sq: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| s[i][j] * s[j][i])
        .sum();
    (sq, trace)
}

/// `(|A|^2, nH)` at every node; `NaN` on the boundary ring.
pub fn second_fundamental_form(model: &ModelGeometry, grid: &Grid, u: &[f64]) -> crate::error::Result<(Vec<f64>, Vec<f64>)> {
    let geo = GridGeometry::new(model, grid)?;
    Ok(second_fundamental_form_with(model, grid, &geo, u))
}

pub(crate) fn second_fundamental_form_with(model: &ModelGeometry, grid: &Grid, geo: &GridGeometry, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let values: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|idx| match node_jet(model, grid, geo, u, idx) {
            None => (f64::NAN, f64::NAN),
            Some(jet) if idx == 0 => pole_sff(model, &jet),
            Some(jet) => sff_at(model, &jet),
        })
        .collect();
    values.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_model;
    use crate::profile::ProfileSpec;

    fn euclid(n: usize) -> ModelGeometry {
        make_model(ProfileSpec::Euclidean, ProfileSpec::Euclidean, ProfileSpec::constant(1.0), n, 1e-10).unwrap()
    }

    #[test]
    fn flat_leaf_is_totally_geodesic() {
        let m = euclid(2);
        let grid = Grid::new(1.0, 16, 16).unwrap();
        let (a2, nh) = second_fundamental_form(&m, &grid, &vec![0.0; grid.len()]).unwrap();
        for (x, y) in a2.iter().zip(&nh).filter(|(x, _)| x.is_finite()) {
            assert_eq!(*x, 0.0);
            assert_eq!(*y, 0.0);
        }
    }

    #[test]
    fn hemisphere() {
        let m = euclid(2);
        let grid = Grid::new(0.9, 256, 64).unwrap();
        let u = grid.sample(|r, _| (1.0 - r * r).sqrt());
        let (a2, nh) = second_fundamental_form(&m, &grid, &u).unwrap();
        for (x, y) in a2.iter().zip(&nh).filter(|(x, _)| x.is_finite()) {
            assert!((x - 2.0).abs() < 1e-3, "{x}");
            assert!((y + 2.0).abs() < 1e-3, "{y}");
        }
        let m3 = euclid(3);
        let grid = Grid::radial(0.9, 256).unwrap();
        let u = grid.sample(|r, _| (1.0 - r * r).sqrt());
        let (a2, nh) = second_fundamental_form(&m3, &grid, &u).unwrap();
        for (x, y) in a2.iter().zip(&nh).filter(|(x, _)| x.is_finite()) {
            assert!((x - 3.0).abs() < 1e-3 && (y + 3.0).abs() < 1e-3, "{x} {y}");
        }
    }

    #[test]
    fn cmc_graph_in_warped_model() {
        let m = make_model(
            ProfileSpec::hyperbolic(1.0),
            ProfileSpec::hyperbolic(1.0),
            ProfileSpec::cosh(1.0),
            2,
            1e-10,
        )
        .unwrap();
        let grid = Grid::new(0.8, 128, 32).unwrap();
        let rs: Vec<f64> = (0..=128).map(|i| grid.r(i)).chain([1.0]).collect();
        let prof = crate::cmc::solve_vr_on(&m, 1.0, rs).unwrap();
        let u = grid.sample(|r, _| prof.eval(r));
        let (_, nh) = second_fundamental_form(&m, &grid, &u).unwrap();
        let target = 2.0 * m.mean_curvature(1.0).unwrap();
        for y in nh.iter().filter(|y| y.is_finite()) {
            assert!((y - target).abs() < 1e-3, "{y} vs {target}");
        }
    }
}
