//! Compressed sparse rows and a Jacobi-preconditioned BiCGSTAB.

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Builds from per-row entry lists, summing duplicate columns.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let start = cols.len();
            for (c, v) in row {
                if cols.len() > start && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Csr { n, row_ptr, cols, vals }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .into_par_iter()
            .map(|i| self.row(i).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).find(|&(c, _)| c == i).map_or(0.0, |(_, v)| v))
            .collect()
    }

    /// `I - scale * self` with rows in `fixed` replaced by identity rows.
    pub fn identity_minus(&self, scale: f64, fixed: impl Fn(usize) -> bool) -> Csr {
        let rows = (0..self.n)
            .map(|i| {
                if fixed(i) {
                    vec![(i, 1.0)]
                } else {
                    let mut row: Vec<(usize, f64)> = self.row(i).map(|(c, v)| (c, -scale * v)).collect();
                    row.push((i, 1.0));
                    row
                }
            })
            .collect();
        Csr::from_rows(self.n, rows)
    }
}

/// Deterministic sum: fixed-size blocks summed in order.
pub fn det_dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_chunks(4096)
        .zip(b.par_chunks(4096))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

fn norm(a: &[f64]) -> f64 {
    det_dot(a, a).sqrt()
}

/// Solves `A x = b` to relative residual `tol`, starting from `x`.
pub fn bicgstab(a: &Csr, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<usize> {
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect();
    let precond = |v: &[f64]| -> Vec<f64> { v.iter().zip(&inv_diag).map(|(p, q)| p * q).collect() };
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let ax = a.matvec(x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let mut res = norm(&r) / bnorm;
    if res <= tol {
        return Ok(0);
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; a.n];
    let mut p = vec![0.0; a.n];
    for it in 1..=max_iter {
        let rho_new = det_dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..a.n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let y = precond(&p);
        v = a.matvec(&y);
        let denom = det_dot(&r_hat, &v);
        if denom == 0.0 {
            break;
        }
        alpha = rho / denom;
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        if norm(&s) / bnorm <= tol {
            for i in 0..a.n {
                x[i] += alpha * y[i];
            }
            return Ok(it);
        }
        let z = precond(&s);
        let t = a.matvec(&z);
        let tt = det_dot(&t, &t);
        omega = if tt > 0.0 { det_dot(&t, &s) / tt } else { 0.0 };
        for i in 0..a.n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        res = norm(&r) / bnorm;
        if res <= tol {
            return Ok(it);
        }
    }
    Err(Error::LinearSolver {
        iterations: max_iter,
        residual: res,
    })
}
