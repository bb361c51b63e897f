//! Non-negative least squares, `min ‖A x - b‖₂ subject to x ≥ 0`, by the
//! Lawson–Hanson active-set method. Unconstrained subproblems on the passive
//! set are solved with a Householder QR. Columns are scaled to unit norm
//! first, so a column of tiny magnitude can still enter the passive set.

use faer::prelude::*;
use faer::{Mat, MatRef};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub x: Vec<f64>,
    /// ‖A x - b‖₂
    pub residual_norm: f64,
    /// Dual vector `w = Aᵀ(b - A x)`; at the optimum `w ≤ 0` on the active set
    /// and `w = 0` on the passive set.
    pub dual: Vec<f64>,
    pub iterations: usize,
}

fn residual(a: MatRef<'_, f64>, b: &[f64], x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| b[i] - (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum::<f64>())
        .collect()
}

fn dual(a: MatRef<'_, f64>, r: &[f64]) -> Vec<f64> {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)] * r[i]).sum())
        .collect()
}

fn solve_passive(a: MatRef<'_, f64>, b: &[f64], passive: &[bool]) -> Vec<f64> {
    let cols: Vec<usize> = (0..a.ncols()).filter(|&j| passive[j]).collect();
    let sub = Mat::from_fn(a.nrows(), cols.len(), |i, k| a[(i, cols[k])]);
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let sol = sub.qr().solve_lstsq(&rhs);
    let mut z = vec![0.0; a.ncols()];
    for (k, &j) in cols.iter().enumerate() {
        z[j] = sol[(k, 0)];
    }
    z
}

pub fn nnls(a: MatRef<'_, f64>, b: &[f64]) -> Result<NnlsSolution> {
    let (m, n) = (a.nrows(), a.ncols());
    if m == 0 || n == 0 || b.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "NNLS with a {m}x{n} matrix and a right-hand side of length {}",
            b.len()
        )));
    }
    if !a.is_all_finite() || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("NNLS input contains non-finite values"));
    }
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt())
        .collect();
    let scaled = Mat::from_fn(m, n, |i, j| {
        if norms[j] > 0.0 {
            a[(i, j)] / norms[j]
        } else {
            0.0
        }
    });
    let (y, iterations) = active_set(scaled.as_ref(), b)?;
    let x: Vec<f64> = y
        .iter()
        .zip(&norms)
        .map(|(v, s)| if *s > 0.0 { v / s } else { 0.0 })
        .collect();
    let r = residual(a, b, &x);
    Ok(NnlsSolution {
        residual_norm: r.iter().map(|v| v * v).sum::<f64>().sqrt(),
        dual: dual(a, &r),
        x,
        iterations,
    })
}

/// Moves `x` towards the least-squares solution on the passive set, dropping
/// entries that hit zero, until that solution is strictly positive. Returns
/// `false` if the column `entering` could not become positive.
fn restore_feasibility(
    a: MatRef<'_, f64>,
    b: &[f64],
    x: &mut [f64],
    passive: &mut [bool],
    entering: Option<usize>,
    tol: f64,
) -> bool {
    let n = x.len();
    while passive.iter().any(|&p| p) {
        let z = solve_passive(a, b, passive);
        if (0..n).filter(|&i| passive[i]).all(|i| z[i] > 0.0) {
            x.copy_from_slice(&z);
            return true;
        }
        let alpha = (0..n)
            .filter(|&i| passive[i] && z[i] <= 0.0)
            .map(|i| x[i] / (x[i] - z[i]))
            .fold(f64::INFINITY, f64::min);
        if let Some(j) = entering {
            if alpha <= 0.0 && x[j] == 0.0 && z[j] <= 0.0 {
                passive[j] = false;
                return false;
            }
        }
        for i in 0..n {
            x[i] += alpha * (z[i] - x[i]);
            if passive[i] && x[i] <= tol * 1e-3 {
                x[i] = 0.0;
                passive[i] = false;
            }
        }
    }
    true
}

fn active_set(a: MatRef<'_, f64>, b: &[f64]) -> Result<(Vec<f64>, usize)> {
    let (m, n) = (a.nrows(), a.ncols());
    let tol = 10.0 * f64::EPSILON * a.norm_l2() * m.max(n) as f64;

    let mut x = vec![0.0; n];
    // Warm start from the sign pattern of the unconstrained solution. On
    // ill-conditioned systems the dual test alone would stop long before the
    // optimum; with consistent data this start is already optimal.
    let mut passive = if m >= n {
        solve_passive(a, b, &vec![true; n])
            .iter()
            .map(|v| *v > 0.0)
            .collect()
    } else {
        vec![false; n]
    };
    restore_feasibility(a, b, &mut x, &mut passive, None, tol);

    // columns that just failed to become positive; cleared whenever x moves
    let mut blocked = vec![false; n];
    let max_iter = 5 * n + 50;
    let mut iterations = 0;
    loop {
        let w = dual(a, &residual(a, b, &x));
        let candidate = (0..n)
            .filter(|&j| !passive[j] && !blocked[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate.filter(|&j| w[j] > tol) else {
            break;
        };
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::Numerical(format!(
                "NNLS did not converge in {max_iter} iterations"
            )));
        }
        passive[j] = true;
        if restore_feasibility(a, b, &mut x, &mut passive, Some(j), tol) {
            blocked.iter_mut().for_each(|v| *v = false);
        } else {
            blocked[j] = true;
        }
    }
    Ok((x, iterations))
}

/// Largest violation of the KKT conditions of the NNLS problem at `x`.
pub fn kkt_violation(a: MatRef<'_, f64>, b: &[f64], x: &[f64]) -> f64 {
    let w = dual(a, &residual(a, b, x));
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| {
            let primal = (-xi).max(0.0);
            let stationarity = if xi > 0.0 { wi.abs() } else { wi.max(0.0) };
            primal.max(stationarity)
        })
        .fold(0.0, f64::max)
}
