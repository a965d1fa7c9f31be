//! ADMM for the DL power QCQP
//!
//! ```text
//! minimize   sum_q kappa_q^T Q_q kappa_q - 2 b_q^T kappa_q
//! subject to sum_q kappa_jq^2 <= 1   for every AP j
//! ```
//!
//! The problem is split into an unconstrained quadratic in `kappa` and a
//! copy `pi` that must satisfy the per-AP ball constraints. In scaled form the
//! `kappa` step is one linear solve per column and the `pi` step is a row-wise
//! projection onto the unit ball.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcqpProblem {
    /// One PSD block per DL UE, |A_d| x |A_d|.
    pub q: Vec<DMatrix<f64>>,
    /// Linear terms, |A_d| x |U_d|.
    pub b: DMatrix<f64>,
}

impl QcqpProblem {
    pub fn objective(&self, kappa: &DMatrix<f64>) -> f64 {
        (0..self.q.len())
            .map(|n| {
                let k = kappa.column(n);
                k.dot(&(&self.q[n] * k)) - 2.0 * self.b.column(n).dot(&k)
            })
            .sum()
    }

    pub fn gradient(&self, kappa: &DMatrix<f64>) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(kappa.nrows(), kappa.ncols());
        for n in 0..self.q.len() {
            let col = (&self.q[n] * kappa.column(n)) * 2.0 - self.b.column(n) * 2.0;
            g.set_column(n, &col);
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmOptions {
    pub rho: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Residual balancing: rescale `rho` when one residual dominates.
    pub adaptive: bool,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self { rho: 1e-3, tol: 1e-3, max_iter: 5000, adaptive: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmResult {
    /// The feasible iterate `pi`.
    pub kappa: DMatrix<f64>,
    /// Scaled duals at exit.
    pub dual: DMatrix<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
    /// `(objective at pi, primal residual)` per iteration.
    pub trace: Vec<(f64, f64)>,
}

/// Projects every row onto the closed unit ball.
pub fn project_rows(v: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = v.clone();
    for mut row in out.row_iter_mut() {
        let n = row.norm();
        if n > 1.0 {
            row /= n;
        }
    }
    out
}

/// Scaled augmented Lagrangian restricted to `kappa`:
/// `sum_q kappa_q^T Q_q kappa_q - 2 b_q^T kappa_q + rho/2 ||kappa - pi + u||^2`.
pub fn kappa_lagrangian(p: &QcqpProblem, kappa: &DMatrix<f64>, pi: &DMatrix<f64>, u: &DMatrix<f64>, rho: f64) -> f64 {
    p.objective(kappa) + 0.5 * rho * (kappa - pi + u).norm_squared()
}

/// Exact minimizer of [`kappa_lagrangian`]: `(Q_q + rho/2 I) kappa_q = b_q + rho/2 (pi_q - u_q)`.
pub fn kappa_step(
    factors: &[Cholesky<f64, Dyn>],
    p: &QcqpProblem,
    pi: &DMatrix<f64>,
    u: &DMatrix<f64>,
    rho: f64,
) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(pi.nrows(), pi.ncols());
    for (n, ch) in factors.iter().enumerate() {
        let rhs: DVector<f64> = p.b.column(n) + (pi.column(n) - u.column(n)) * (0.5 * rho);
        k.set_column(n, &ch.solve(&rhs));
    }
    k
}

/// Cholesky factors of `Q_q + rho/2 I` for every column.
pub fn factorize(p: &QcqpProblem, rho: f64) -> Result<Vec<Cholesky<f64, Dyn>>> {
    p.q.iter()
        .map(|q| {
            let mut a = q.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += 0.5 * rho;
            }
            a.cholesky().ok_or(Error::NonFinite("ADMM system not positive definite"))
        })
        .collect()
}

pub fn admm_qcqp(p: &QcqpProblem, init: &DMatrix<f64>, opts: &AdmmOptions) -> Result<AdmmResult> {
    let (rows, cols) = (p.b.nrows(), p.b.ncols());
    if rows == 0 || cols == 0 {
        return Ok(AdmmResult {
            kappa: DMatrix::zeros(rows, cols),
            dual: DMatrix::zeros(rows, cols),
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            converged: true,
            trace: vec![],
        });
    }
    let mut rho = opts.rho.max(f64::MIN_POSITIVE);
    let mut factors = factorize(p, rho)?;
    let mut pi = project_rows(init);
    let mut u = DMatrix::zeros(rows, cols);
    let mut trace = Vec::new();
    let (mut r, mut s) = (f64::INFINITY, f64::INFINITY);
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        let kappa = kappa_step(&factors, p, &pi, &u, rho);
        let pi_prev = pi;
        pi = project_rows(&(&kappa + &u));
        u += &kappa - &pi;
        r = (&kappa - &pi).norm();
        s = rho * (&pi - &pi_prev).norm();
        if !(r.is_finite() && s.is_finite()) {
            return Err(Error::NonFinite("ADMM residual"));
        }
        trace.push((p.objective(&pi), r));
        if r < opts.tol && s < opts.tol {
            break;
        }
        // Stop adapting late so the fixed-rho convergence argument applies.
        if opts.adaptive && it < opts.max_iter / 2 {
            let scale = if r > 10.0 * s {
                2.0
            } else if s > 10.0 * r {
                0.5
            } else {
                1.0
            };
            if scale != 1.0 {
                rho *= scale;
                u /= scale;
                factors = factorize(p, rho)?;
            }
        }
    }
    let converged = r < opts.tol && s < opts.tol;
    Ok(AdmmResult { kappa: pi, dual: u, iterations: it, primal_residual: r, dual_residual: s, converged, trace })
}

/// Projected gradient with Armijo backtracking, run to a tight
/// stationarity tolerance. Used as an independent reference.
pub fn projected_gradient(p: &QcqpProblem, init: &DMatrix<f64>, tol: f64, max_iter: usize) -> DMatrix<f64> {
    let mut x = project_rows(init);
    let mut f = p.objective(&x);
    let mut step = 1.0;
    for _ in 0..max_iter {
        let g = p.gradient(&x);
        let mut accepted = false;
        let mut t = step * 2.0;
        for _ in 0..60 {
            let y = project_rows(&(&x - &g * t));
            let fy = p.objective(&y);
            let d = &y - &x;
            if fy <= f + g.dot(&d) + d.norm_squared() / (2.0 * t) {
                let moved = d.norm() / t;
                x = y;
                f = fy;
                step = t;
                accepted = true;
                if moved < tol {
                    return x;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    x
}
