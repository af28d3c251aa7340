use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polar grid on `B_R`: the pole plus rings `r_i = i h`, `i = 1..=nr`, each
/// with `ntheta` uniform angles. `ntheta == 1` is the radial grid.
///
/// Fields are flat vectors: index 0 is the pole, ring `i` occupies
/// `1 + (i - 1) ntheta .. 1 + i ntheta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nr: usize,
    pub ntheta: usize,
    pub radius: f64,
    pub h: f64,
    pub dtheta: f64,
}

impl Grid {
    pub fn new(radius: f64, nr: usize, ntheta: usize) -> Result<Self> {
        if nr < 8 {
            return Err(Error::Schema {
                key: "nr".into(),
                constraint: format!("must be >= 8, got {nr}"),
            });
        }
        if ntheta != 1 && ntheta < 8 {
            return Err(Error::Schema {
                key: "ntheta".into(),
                constraint: format!("must be >= 8 or = 1, got {ntheta}"),
            });
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Parameter(format!("grid radius must be positive, got {radius}")));
        }
        Ok(Grid {
            nr,
            ntheta,
            radius,
            h: radius / nr as f64,
            dtheta: TAU / ntheta as f64,
        })
    }

    /// Grid with radial spacing `h`; `radius` must be a multiple of `h`.
    pub fn with_spacing(radius: f64, h: f64, ntheta: usize) -> Result<Self> {
        let nr = (radius / h).round();
        if ((nr * h) - radius).abs() > 1e-9 * radius {
            return Err(Error::Parameter(format!("radius {radius} is not a multiple of h = {h}")));
        }
        Grid::new(radius, nr as usize, ntheta)
    }

    pub fn radial(radius: f64, nr: usize) -> Result<Self> {
        Grid::new(radius, nr, 1)
    }

    pub fn is_radial(&self) -> bool {
        self.ntheta == 1
    }

    pub fn len(&self) -> usize {
        1 + self.nr * self.ntheta
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of ring `i >= 1`, angle `j` (taken modulo `ntheta`).
    pub fn idx(&self, i: usize, j: isize) -> usize {
        if i == 0 {
            return 0;
        }
        let j = j.rem_euclid(self.ntheta as isize) as usize;
        1 + (i - 1) * self.ntheta + j
    }

    pub fn r(&self, i: usize) -> f64 {
        if i == self.nr {
            self.radius
        } else {
            i as f64 * self.h
        }
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta
    }

    /// `(ring, angle)` of a flat index; the pole is `(0, 0)`.
    pub fn position(&self, k: usize) -> (usize, usize) {
        if k == 0 {
            (0, 0)
        } else {
            (1 + (k - 1) / self.ntheta, (k - 1) % self.ntheta)
        }
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.position(k).0 == self.nr
    }

    /// Samples `f(r, theta)`; the pole gets the mean of `f(0, theta_j)`.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.push((0..self.ntheta).map(|j| f(0.0, self.theta(j))).sum::<f64>() / self.ntheta as f64);
        for i in 1..=self.nr {
            let r = self.r(i);
            for j in 0..self.ntheta {
                out.push(f(r, self.theta(j)));
            }
        }
        out
    }

    pub fn ring<'a>(&self, u: &'a [f64], i: usize) -> &'a [f64] {
        if i == 0 {
            &u[0..1]
        } else {
            let start = self.idx(i, 0);
            &u[start..start + self.ntheta]
        }
    }

    /// Number of rings with `r_i <= r` (plus tolerance), i.e. the last ring index inside `B_r`.
    pub fn rings_within(&self, r: f64) -> usize {
        ((r / self.h + 1e-9).floor() as usize).min(self.nr)
    }
}
