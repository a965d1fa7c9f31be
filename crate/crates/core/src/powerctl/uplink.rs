//! UL power control by fractional programming.
//!
//! With weights and DL coefficients fixed, `SINR_k = a_k E_k / (b_k . E + s_k)`.
//! The Lagrangian-dual transform moves the ratios out of the logarithms and
//! the quadratic transform decouples them, leaving a concave problem in
//! `sqrt(E_k)` that has a closed-form maximizer per UE.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::se::UlLinearForm;

/// Auxiliaries of one FP iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpStateUl {
    pub e_u: Vec<f64>,
    /// Current SINR per UE.
    pub varpi: Vec<f64>,
    pub varpi_tilde: Vec<f64>,
    /// `sum_k ln(1 + SINR_k)` at `e_u`.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UlResult {
    pub e_u: Vec<f64>,
    /// Auxiliaries from the last iteration.
    pub state: FpStateUl,
    /// Objective (nats) at the start and after every iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn ln_sum(sinr: &[f64]) -> f64 {
    sinr.iter().map(|s| s.max(0.0).ln_1p()).sum()
}

/// Received power including the UE's own signal: `a_k E_k + b_k . E + s_k`.
fn total_power(lf: &UlLinearForm, e: &[f64], k: usize) -> f64 {
    lf.a[k] * e[k] + (0..e.len()).map(|i| lf.b[(k, i)] * e[i]).sum::<f64>() + lf.sigma[k]
}

/// Auxiliary updates at powers `e`: `varpi = SINR`,
/// `varpi_tilde_k = sqrt((1 + varpi_k) a_k E_k) / (G_k + I_k)`.
pub fn auxiliaries(lf: &UlLinearForm, e: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let varpi = lf.sinr(e);
    let vt = (0..e.len())
        .map(|k| {
            let t = total_power(lf, e, k);
            if t > 0.0 {
                ((1.0 + varpi[k]) * lf.a[k] * e[k]).sqrt() / t
            } else {
                0.0
            }
        })
        .collect();
    (varpi, vt)
}

/// Quadratic-transform surrogate at fixed auxiliaries.
pub fn surrogate(lf: &UlLinearForm, e: &[f64], varpi: &[f64], vt: &[f64]) -> f64 {
    (0..e.len())
        .map(|k| {
            varpi[k].ln_1p() - varpi[k] + 2.0 * vt[k] * ((1.0 + varpi[k]) * lf.a[k] * e[k]).sqrt()
                - vt[k] * vt[k] * total_power(lf, e, k)
        })
        .sum()
}

/// Stationary point of the surrogate in each `E_k`, before clamping:
/// `E_k = vt_k^2 (1 + varpi_k) a_k / (sum_n vt_n^2 c_nk)^2`, where `c_nk` is
/// the coefficient of `E_k` in UE n's total received power.
pub fn power_update_unclamped(lf: &UlLinearForm, varpi: &[f64], vt: &[f64]) -> Vec<f64> {
    let n = varpi.len();
    (0..n)
        .map(|k| {
            let den: f64 = (0..n)
                .map(|i| {
                    let c = lf.b[(i, k)] + if i == k { lf.a[k] } else { 0.0 };
                    vt[i] * vt[i] * c
                })
                .sum();
            let num = vt[k] * vt[k] * (1.0 + varpi[k]) * lf.a[k];
            if den > 0.0 {
                num / (den * den)
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

pub fn ul_power_control(
    lf: &UlLinearForm,
    e_init: &[f64],
    e_max: f64,
    delta: f64,
    max_iter: usize,
) -> Result<UlResult> {
    let mut e: Vec<f64> = e_init.iter().map(|x| x.clamp(0.0, e_max)).collect();
    let mut obj = ln_sum(&lf.sinr(&e));
    let mut trace = vec![obj];
    let mut converged = e.is_empty();
    let mut iterations = 0;
    let (mut varpi, mut vt) = auxiliaries(lf, &e);
    while !converged && iterations < max_iter {
        iterations += 1;
        (varpi, vt) = auxiliaries(lf, &e);
        let next = power_update_unclamped(lf, &varpi, &vt);
        for (k, v) in next.into_iter().enumerate() {
            if v.is_nan() {
                return Err(Error::NonFinite("UL power update"));
            }
            e[k] = v.clamp(0.0, e_max);
        }
        let new = ln_sum(&lf.sinr(&e));
        if !new.is_finite() {
            return Err(Error::NonFinite("UL objective"));
        }
        trace.push(new);
        converged = (new - obj).abs() < delta;
        obj = new;
    }
    let state = FpStateUl { e_u: e.clone(), varpi, varpi_tilde: vt, objective: obj };
    Ok(UlResult { e_u: e, state, trace, iterations, converged })
}
