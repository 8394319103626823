//! Sparse symmetric solves for graph Laplacian systems.

use crate::error::{Error, Result};
use crate::space::Network;

/// Iteration record of a linear or complementarity solve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// Diagonally scaled max-norm residual.
    pub residual: f64,
}

/// `max |b_x - (L u)_x| / deg_w(x)` over `free`, where `L = D - W`.
pub fn scaled_residual(net: &Network, free: &[usize], u: &[f64], b: Option<&[f64]>) -> f64 {
    free.iter()
        .map(|&x| {
            let mut acc = b.map_or(0.0, |b| b[x]);
            for (y, w, _) in net.neighbors(x) {
                acc += w * (u[y] - u[x]);
            }
            acc.abs() / net.degree_weight(x)
        })
        .fold(0.0, f64::max)
}

/// Solve `L u = b` on free vertices with `u` fixed on `pinned`.
///
/// `values` carries the initial guess and the boundary data; on return it holds
/// the solution. Jacobi-preconditioned conjugate gradients restricted to the
/// free vertices, stopped when `max |r_x| / deg_w(x) <= tol`.
pub fn solve_dirichlet(
    net: &Network,
    pinned: &[bool],
    values: &mut [f64],
    source: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = net.len();
    if pinned.len() != n || values.len() != n || source.is_some_and(|b| b.len() != n) {
        return Err(Error::param("solver vectors must match the network size"));
    }
    let free: Vec<usize> = (0..n).filter(|&x| !pinned[x]).collect();
    let m = free.len();
    if m == 0 {
        return Ok(SolveStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    // Compact numbering of the free vertices.
    let mut local = vec![usize::MAX; n];
    for (k, &x) in free.iter().enumerate() {
        local[x] = k;
    }
    let diag: Vec<f64> = free.iter().map(|&x| net.degree_weight(x)).collect();
    let compute_r = |u: &[f64], r: &mut [f64]| {
        for (k, &x) in free.iter().enumerate() {
            let mut acc = source.map_or(0.0, |b| b[x]);
            for (y, w, _) in net.neighbors(x) {
                acc += w * (u[y] - u[x]);
            }
            r[k] = acc;
        }
    };
    let scaled = |r: &[f64]| r.iter().zip(&diag).map(|(a, d)| a.abs() / d).fold(0.0, f64::max);
    let mut r = vec![0.0; m];
    compute_r(values, &mut r);
    let mut res = scaled(&r);
    if res <= tol {
        return Ok(SolveStats {
            iterations: 0,
            residual: res,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; m];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for it in 1..=max_iter {
        for (k, &x) in free.iter().enumerate() {
            let mut acc = diag[k] * p[k];
            for (y, w, _) in net.neighbors(x) {
                let l = local[y];
                if l != usize::MAX {
                    acc -= w * p[l];
                }
            }
            ap[k] = acc;
        }
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for k in 0..m {
            values[free[k]] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        if it % 50 == 0 {
            compute_r(values, &mut r);
        }
        res = scaled(&r);
        if res <= tol {
            compute_r(values, &mut r);
            res = scaled(&r);
            if res <= tol {
                return Ok(SolveStats {
                    iterations: it,
                    residual: res,
                });
            }
        }
        for k in 0..m {
            z[k] = r[k] / diag[k];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..m {
            p[k] = z[k] + beta * p[k];
        }
    }
    compute_r(values, &mut r);
    res = scaled(&r);
    if res <= tol {
        return Ok(SolveStats {
            iterations: max_iter,
            residual: res,
        });
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: res,
    })
}
