//! DL power control: fractional programming outer loop, QCQP inner step.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::admm::{admm_qcqp, AdmmOptions, QcqpProblem};
use super::uplink::ln_sum;
use crate::error::{Error, Result};
use crate::se::{PowerAllocation, SeModel};

/// Auxiliaries and ADMM variables of one FP iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpStateDl {
    pub kappa: DMatrix<f64>,
    pub varpi: Vec<f64>,
    pub varpi_tilde: Vec<f64>,
    pub pi: DMatrix<f64>,
    pub pi_bar: DMatrix<f64>,
    /// `sum_n ln(1 + SINR_n)` at `kappa`.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DlResult {
    pub kappa: DMatrix<f64>,
    /// Last completed iteration, absent when no iteration ran.
    pub state: Option<FpStateDl>,
    /// `sum_n ln(1 + SINR_n)` at the start and after every iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub admm_iterations: Vec<usize>,
    /// Iterations where the QCQP step was rejected.
    pub safeguarded: usize,
}

/// QCQP for one FP iteration with the auxiliaries it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DlSurrogate {
    pub problem: QcqpProblem,
    pub varpi: Vec<f64>,
    pub varpi_tilde: Vec<f64>,
    /// Power-independent interference plus noise per DL UE.
    pub sigma: Vec<f64>,
}

impl DlSurrogate {
    /// Value of the quadratic-transform surrogate at `kappa`.
    pub fn value(&self, kappa: &DMatrix<f64>) -> f64 {
        let c: f64 = (0..self.varpi.len())
            .map(|n| {
                let w = self.varpi[n];
                w.ln_1p() - w - self.varpi_tilde[n].powi(2) * self.sigma[n]
            })
            .sum();
        c - self.problem.objective(kappa)
    }
}

/// Interference matrix `I_nq`: the power DL UE n receives from the stream
/// of UE q is `kappa_q^T I_nq kappa_q`. The coherent part appears only when q
/// shares n's pilot, q = n included.
pub fn interference_matrix(model: &SeModel, e_d: f64, n: usize, q: usize) -> DMatrix<f64> {
    let ja = model.num_dl_aps();
    let a = model.alpha_d.column(n);
    let mut m = if q == n || model.cp_d[n].contains(&q) {
        (a * a.transpose()) * (model.n_dl * e_d)
    } else {
        DMatrix::zeros(ja, ja)
    };
    for j in 0..ja {
        m[(j, j)] += e_d * model.err_d[(j, n)];
    }
    m
}

pub fn build_qcqp(model: &SeModel, power: &PowerAllocation) -> DlSurrogate {
    let terms = model.dl_terms(power);
    let (ja, nd) = model.alpha_d.shape();
    let ed = power.e_d;
    let varpi: Vec<f64> = terms.iter().map(|t| t.sinr()).collect();
    let sigma: Vec<f64> = terms.iter().map(|t| t.iue + t.noise).collect();
    let vt: Vec<f64> = terms
        .iter()
        .zip(&varpi)
        .map(|(t, w)| {
            let total = t.signal + t.interference();
            if total > 0.0 {
                (1.0 + w).sqrt() * t.signal.sqrt() / total
            } else {
                0.0
            }
        })
        .collect();
    let g_scale = (model.n_dl * ed).sqrt();
    let mut q = vec![DMatrix::zeros(ja, ja); nd];
    let mut b = DMatrix::zeros(ja, nd);
    for n in 0..nd {
        let w2 = vt[n] * vt[n];
        if w2 == 0.0 {
            continue;
        }
        let a = model.alpha_d.column(n);
        let coherent = (a * a.transpose()) * (w2 * model.n_dl * ed);
        for qq in std::iter::once(n).chain(model.cp_d[n].iter().copied()) {
            q[qq] += &coherent;
        }
        for block in q.iter_mut() {
            for j in 0..ja {
                block[(j, j)] += w2 * ed * model.err_d[(j, n)];
            }
        }
        let coef = vt[n] * (1.0 + varpi[n]).sqrt() * g_scale;
        for j in 0..ja {
            b[(j, n)] = coef * a[j];
        }
    }
    DlSurrogate { problem: QcqpProblem { q, b }, varpi, varpi_tilde: vt, sigma }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DlOptions {
    pub delta: f64,
    pub max_iter: usize,
    pub admm: AdmmOptions,
}

pub fn dl_power_control(model: &SeModel, power: &PowerAllocation, opts: &DlOptions) -> Result<DlResult> {
    let mut cur = power.clone();
    let mut obj = ln_sum(&model.dl_sinr(&cur));
    let mut trace = vec![obj];
    let mut admm_iterations = Vec::new();
    let mut safeguarded = 0;
    let mut converged = model.num_dl_ues() == 0 || model.num_dl_aps() == 0;
    let mut iterations = 0;
    let mut state = None;
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let sur = build_qcqp(model, &cur);
        let prob = &sur.problem;
        let r = admm_qcqp(prob, &cur.kappa, &opts.admm)?;
        admm_iterations.push(r.iterations);
        let (pi, pi_bar) = (r.kappa.clone(), r.dual);
        // The surrogate is the negated QCQP objective plus constants.
        if prob.objective(&r.kappa) <= prob.objective(&cur.kappa) {
            cur.kappa = r.kappa;
        } else {
            safeguarded += 1;
        }
        let new = ln_sum(&model.dl_sinr(&cur));
        if !new.is_finite() {
            return Err(Error::NonFinite("DL objective"));
        }
        trace.push(new);
        converged = (new - obj).abs() < opts.delta;
        obj = new;
        state = Some(FpStateDl {
            kappa: cur.kappa.clone(),
            varpi: sur.varpi,
            varpi_tilde: sur.varpi_tilde,
            pi,
            pi_bar,
            objective: obj,
        });
    }
    Ok(DlResult { kappa: cur.kappa, state, trace, iterations, converged, admm_iterations, safeguarded })
}
