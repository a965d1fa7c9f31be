//! Alternating UL/DL optimization.
//!
//! UL powers and DL coefficients are coupled only through inter-AP
//! interference (DL loads raise UL noise) and inter-UE interference (UL
//! powers raise DL noise). Each outer pass fixes one side and optimizes the
//! other. The best allocation seen is returned, so the result never falls
//! below the starting point.

use serde::{Deserialize, Serialize};

use super::admm::AdmmOptions;
use super::downlink::{dl_power_control, DlOptions};
use super::uplink::{ln_sum, ul_power_control};
use crate::config::SystemConfig;
use crate::error::Result;
use crate::se::{PowerAllocation, SEReport, SeModel, UplinkWeights};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcOptions {
    pub delta_u: f64,
    pub delta_d: f64,
    pub admm: AdmmOptions,
    pub max_inner: usize,
    pub max_outer: usize,
    /// Re-solve CPU weights whenever powers change.
    pub refine_weights: bool,
    pub e_u_max: f64,
}

impl PcOptions {
    pub fn from_config(c: &SystemConfig) -> Self {
        Self {
            delta_u: c.delta_u,
            delta_d: c.delta_d,
            admm: AdmmOptions { rho: c.admm_penalty, tol: c.delta_admm, max_iter: c.max_inner_iter, adaptive: true },
            max_inner: c.max_inner_iter,
            max_outer: c.max_outer_iter,
            refine_weights: c.refine_weights,
            e_u_max: c.ul_power_max,
        }
    }

    fn dl(&self) -> DlOptions {
        DlOptions { delta: self.delta_d, max_iter: self.max_inner, admm: self.admm }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltResult {
    pub power: PowerAllocation,
    pub weights: UplinkWeights,
    pub report: SEReport,
    /// Sum SE (bits) at the start and after every outer pass.
    pub outer_trace: Vec<f64>,
    pub ul_traces: Vec<Vec<f64>>,
    pub dl_traces: Vec<Vec<f64>>,
    pub outer_iterations: usize,
    pub converged: bool,
}

impl AltResult {
    pub fn sum_se(&self) -> f64 {
        self.report.sum_se
    }
}

/// Starts from full UL power and an even DL split.
pub fn optimize(model: &SeModel, opts: &PcOptions) -> Result<AltResult> {
    alternate_ul_dl(model, opts, &model.equal_power())
}

pub fn alternate_ul_dl(model: &SeModel, opts: &PcOptions, init: &PowerAllocation) -> Result<AltResult> {
    let mut power = init.clone();
    let mut weights = model.zf_optimal_weights(&power);
    let mut report = model.report(&power, &weights);
    let mut best = (report.sum_se, power.clone(), weights.clone(), report.clone());
    let mut outer_trace = vec![report.sum_se];
    let (mut ul_traces, mut dl_traces) = (Vec::new(), Vec::new());
    let has_ul = model.num_ul_ues() > 0 && model.num_ul_aps() > 0;
    let has_dl = model.num_dl_ues() > 0 && model.num_dl_aps() > 0;
    let tol = opts.delta_u.max(opts.delta_d);
    let mut converged = false;
    let mut outer = 0;
    while outer < opts.max_outer {
        outer += 1;
        if has_ul {
            let mut prev = ln_sum(&model.ul_sinr(&power, &weights));
            for _ in 0..opts.max_outer {
                if opts.refine_weights {
                    weights = model.zf_optimal_weights(&power);
                }
                let lf = model.ul_linear_form(&weights, &power);
                let r = ul_power_control(&lf, &power.e_u, opts.e_u_max, opts.delta_u, opts.max_inner)?;
                power.e_u = r.e_u;
                ul_traces.push(r.trace);
                if !opts.refine_weights {
                    break;
                }
                let now = ln_sum(&model.ul_sinr(&power, &weights));
                if (now - prev).abs() < opts.delta_u {
                    break;
                }
                prev = now;
            }
        }
        if has_dl {
            let r = dl_power_control(model, &power, &opts.dl())?;
            power.kappa = r.kappa;
            dl_traces.push(r.trace);
        }
        if opts.refine_weights {
            weights = model.zf_optimal_weights(&power);
        }
        report = model.report(&power, &weights);
        let last = *outer_trace.last().unwrap_or(&0.0);
        outer_trace.push(report.sum_se);
        // Compare in nats without the pre-log, the unit the inner loops use.
        let nats = if report.prelog > 0.0 { std::f64::consts::LN_2 / report.prelog } else { 0.0 };
        if report.sum_se > best.0 {
            best = (report.sum_se, power.clone(), weights.clone(), report.clone());
        }
        if (report.sum_se - last).abs() * nats < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::debug!("alternating optimization stopped after {outer} outer passes without converging");
    }
    let (_, power, weights, report) = best;
    Ok(AltResult { power, weights, report, outer_trace, ul_traces, dl_traces, outer_iterations: outer, converged })
}
