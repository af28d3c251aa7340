//! Cubic interpolation of grid fields at arbitrary polar points.

use crate::flow::grid::Grid;
use std::f64::consts::{PI, TAU};

/// Lagrange weights for nodes `0, 1, 2, 3` at `x`.
fn cubic_weights(x: f64) -> [f64; 4] {
    let mut w = [0.0; 4];
    for (j, wj) in w.iter_mut().enumerate() {
        let mut num = 1.0;
        let mut den = 1.0;
        for m in 0..4 {
            if m != j {
                num *= x - m as f64;
                den *= j as f64 - m as f64;
            }
        }
        *wj = num / den;
    }
    w
}

/// Periodic cubic interpolation along ring `i >= 1` at angle `theta`.
fn along_ring(grid: &Grid, u: &[f64], i: usize, theta: f64) -> f64 {
    if grid.ntheta == 1 {
        return u[grid.idx(i, 0)];
    }
    let x = theta.rem_euclid(TAU) / grid.dtheta;
    let base = x.floor() as isize - 1;
    let w = cubic_weights(x - base as f64);
    (0..4).map(|m| w[m] * u[grid.idx(i, base + m as isize)]).sum()
}

/// Value on "ring" `i`, where negative rings continue through the pole.
fn ring_value(grid: &Grid, u: &[f64], i: isize, theta: f64) -> f64 {
    match i {
        0 => u[0],
        i if i < 0 => along_ring(grid, u, (-i) as usize, theta + PI),
        i => along_ring(grid, u, i as usize, theta),
    }
}

/// Tensor cubic interpolation of `u` at `(r, theta)`, `0 <= r <= R`. Exact at
/// grid nodes.
pub fn interpolate(grid: &Grid, u: &[f64], r: f64, theta: f64) -> f64 {
    let x = (r / grid.h).clamp(0.0, grid.nr as f64);
    let nr = grid.nr as isize;
    let start = (x.floor() as isize - 1).min(nr - 3);
    let w = cubic_weights(x - start as f64);
    (0..4).map(|m| w[m] * ring_value(grid, u, start + m as isize, theta)).sum()
}

/// Linear interpolation, used to size the cubic interpolation error.
pub fn interpolate_linear(grid: &Grid, u: &[f64], r: f64, theta: f64) -> f64 {
    let x = (r / grid.h).clamp(0.0, grid.nr as f64);
    let i = (x.floor() as usize).min(grid.nr - 1);
    let f = x - i as f64;
    let ring = |i: usize| -> f64 {
        if i == 0 || grid.ntheta == 1 {
            return u[grid.idx(i, 0)];
        }
        let y = theta.rem_euclid(TAU) / grid.dtheta;
        let j = y.floor() as isize;
        let g = y - j as f64;
        (1.0 - g) * u[grid.idx(i, j)] + g * u[grid.idx(i, j + 1)]
    };
    (1.0 - f) * ring(i) + f * ring(i + 1)
}
