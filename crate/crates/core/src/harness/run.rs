//! Trial execution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::spec::{sweep_label, Arm, ExperimentSpec, Scheduling, Stage};
use super::stats;
use crate::channel::mean_nmse;
use crate::config::{DuplexMode, SystemConfig};
use crate::error::{Error, Result};
use crate::powerctl::{optimize, AltResult, PcOptions};
use crate::rng::trial_seed;
use crate::scenario::Scenario;
use crate::schedule::{exhaustive_mode_select, greedy_mode_select, ScheduleStep};
use crate::se::{DuplexConfig, SEReport, SeModel};

/// Largest M for exhaustive scheduling.
pub const EXHAUSTIVE_CAP: usize = 10;

/// Everything produced by one trial of one arm.
#[derive(Debug, Clone)]
pub struct TrialDetail {
    pub scenario: Scenario,
    pub duplex: Option<DuplexConfig>,
    pub schedule: Vec<ScheduleStep>,
    pub optimized: Option<AltResult>,
    pub report: Option<SEReport>,
    /// Sum SE at equal power with optimal ZF weights on the same split.
    pub equal_sum_se: Option<f64>,
}

impl TrialDetail {
    pub fn metrics(&self) -> Vec<(&'static str, f64)> {
        let sc = &self.scenario;
        let max_cluster = sc.connectivity.ap_clusters.iter().map(Vec::len).max().unwrap_or(0);
        let mut m = vec![
            ("tau_p", sc.tau_p() as f64),
            ("colors_used", sc.pilots.colors_used() as f64),
            ("max_cluster", max_cluster as f64),
            ("max_degree", sc.conflict.max_degree() as f64),
            ("mean_nmse", mean_nmse(&sc.stats)),
            ("r_o", sc.connectivity.r_o),
        ];
        if let Some(r) = &self.report {
            m.push(("sum_se", r.sum_se));
            m.push(("ul_se", r.ul_sum()));
            m.push(("dl_se", r.dl_sum()));
        }
        if let Some(e) = self.equal_sum_se {
            m.push(("equal_sum_se", e));
        }
        if let Some(d) = &self.duplex {
            m.push(("num_ul_aps", d.ul_aps.len() as f64));
            m.push(("num_dl_aps", d.dl_aps.len() as f64));
        }
        if let Some(o) = &self.optimized {
            m.push(("outer_iterations", o.outer_iterations as f64));
            m.push(("pc_converged", f64::from(u8::from(o.converged))));
        }
        m
    }
}

/// Runs one arm on one network drop.
pub fn run_trial(cfg: &SystemConfig, arm: &Arm, seed: u64) -> Result<TrialDetail> {
    let sc = Scenario::generate_with(cfg, seed, arm.pilot_scheme)?;
    let mut detail =
        TrialDetail { scenario: sc, duplex: None, schedule: vec![], optimized: None, report: None, equal_sum_se: None };
    if arm.stage == Stage::Pilots {
        return Ok(detail);
    }
    let sc = &detail.scenario;
    if !sc.zf_feasible() {
        return Err(Error::TooFewAntennas { antennas: cfg.min_array(), tau_p: sc.tau_p() });
    }
    let opts = PcOptions::from_config(cfg);
    let (duplex, schedule, optimized) = match (cfg.duplex, arm.scheduling) {
        (DuplexMode::Fd, _) => {
            let d = DuplexConfig::full_duplex(sc.geometry.num_aps());
            let o = if arm.power_control { Some(optimize(&SeModel::new(sc, &d)?, &opts)?) } else { None };
            (d, vec![], o)
        }
        (DuplexMode::Dtdd, Scheduling::Exhaustive) => {
            let ex = exhaustive_mode_select(sc, &opts, EXHAUSTIVE_CAP)?;
            let o = if arm.power_control { Some(optimize(&SeModel::new(sc, &ex.duplex)?, &opts)?) } else { None };
            (ex.duplex, vec![], o)
        }
        (DuplexMode::Dtdd, _) => {
            let g = greedy_mode_select(sc, &opts, arm.schedule_mode())?;
            let o = arm.power_control.then_some(g.result);
            (g.duplex, g.trace, o)
        }
    };
    let model = SeModel::new(sc, &duplex)?;
    let eq = model.equal_power();
    let eq_report = model.report(&eq, &model.zf_optimal_weights(&eq));
    detail.equal_sum_se = Some(eq_report.sum_se);
    detail.report = Some(optimized.as_ref().map_or(eq_report, |o| o.report.clone()));
    detail.duplex = Some(duplex);
    detail.schedule = schedule;
    detail.optimized = optimized;
    Ok(detail)
}

/// One long-format row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub experiment: String,
    pub arm: String,
    pub sweep_value: String,
    pub trial: usize,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeRecord {
    pub arm: String,
    pub sweep_value: String,
    pub trial: usize,
    pub ue: usize,
    pub direction: String,
    pub sinr: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub arm: String,
    pub sweep_value: String,
    pub trial: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub arm: String,
    pub sweep_value: String,
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub arm: String,
    pub sweep_value: String,
    pub config: SystemConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub experiment: String,
    pub records: Vec<Record>,
    pub ue_records: Vec<UeRecord>,
    pub failures: Vec<Failure>,
    pub configs: Vec<ResolvedConfig>,
}

impl ResultTable {
    /// Samples of one metric, in trial order.
    pub fn values(&self, arm: &str, sweep_value: &str, metric: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.arm == arm && r.sweep_value == sweep_value && r.metric == metric)
            .map(|r| r.value)
            .collect()
    }

    /// `(trial, value)` pairs, for pairing arms on the same drops.
    pub fn by_trial(&self, arm: &str, sweep_value: &str, metric: &str) -> Vec<(usize, f64)> {
        self.records
            .iter()
            .filter(|r| r.arm == arm && r.sweep_value == sweep_value && r.metric == metric)
            .map(|r| (r.trial, r.value))
            .collect()
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(&str, &str, &str)> = Vec::new();
        for r in &self.records {
            let k = (r.arm.as_str(), r.sweep_value.as_str(), r.metric.as_str());
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .map(|(arm, sv, metric)| {
                let xs = self.values(arm, sv, metric);
                SummaryRow {
                    arm: arm.into(),
                    sweep_value: sv.into(),
                    metric: metric.into(),
                    n: xs.len(),
                    mean: stats::mean(&xs),
                    p10: stats::percentile(&xs, 0.1),
                    p50: stats::percentile(&xs, 0.5),
                    p90: stats::percentile(&xs, 0.9),
                }
            })
            .collect()
    }
}

struct Cell {
    records: Vec<Record>,
    ue: Vec<UeRecord>,
    failure: Option<Failure>,
}

fn run_cell(spec: &ExperimentSpec, arm: &Arm, cfg: &SystemConfig, label: &str, trial: usize) -> Cell {
    let seed = trial_seed(spec.seed, trial as u64);
    let rec = |metric: &str, value: f64| Record {
        experiment: spec.name.clone(),
        arm: arm.name.clone(),
        sweep_value: label.to_string(),
        trial,
        metric: metric.to_string(),
        value,
    };
    match run_trial(cfg, arm, seed) {
        Ok(d) => {
            let mut records: Vec<Record> = d.metrics().into_iter().map(|(k, v)| rec(k, v)).collect();
            records.push(rec("failed", 0.0));
            let mut ue = Vec::new();
            if let Some(r) = &d.report {
                let rows =
                    r.ul_ues.iter().zip(r.ul_sinr.iter().zip(&r.ul_se)).map(|(&u, (&s, &e))| (u, "ul", s, e)).chain(
                        r.dl_ues.iter().zip(r.dl_sinr.iter().zip(&r.dl_se)).map(|(&u, (&s, &e))| (u, "dl", s, e)),
                    );
                for (u, dir, sinr, se) in rows {
                    ue.push(UeRecord {
                        arm: arm.name.clone(),
                        sweep_value: label.to_string(),
                        trial,
                        ue: u,
                        direction: dir.into(),
                        sinr,
                        se,
                    });
                }
            }
            Cell { records, ue, failure: None }
        }
        Err(e) => {
            log::debug!("arm {} sweep {label} trial {trial}: {e}", arm.name);
            Cell {
                records: vec![rec("failed", 1.0)],
                ue: vec![],
                failure: Some(Failure {
                    arm: arm.name.clone(),
                    sweep_value: label.to_string(),
                    trial,
                    error: e.to_string(),
                }),
            }
        }
    }
}

/// Runs every (sweep value, arm, trial) cell. Trials run in parallel; the
/// output order is fixed by sweep value, then arm, then trial.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let sweep = spec.sweep_values();
    let mut configs = Vec::new();
    let mut cells: Vec<(usize, usize, SystemConfig, String)> = Vec::new();
    for (si, v) in sweep.iter().enumerate() {
        for (ai, arm) in spec.arms.iter().enumerate() {
            let cfg = spec.resolve(arm, v)?;
            let label = sweep_label(v);
            configs.push(ResolvedConfig { arm: arm.name.clone(), sweep_value: label.clone(), config: cfg.clone() });
            cells.push((si, ai, cfg, label));
        }
    }
    let trials = spec.trials();
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..trials).map(move |t| (c, t))).collect();
    let done: Vec<Cell> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (_, ai, cfg, label) = &cells[c];
            run_cell(spec, &spec.arms[*ai], cfg, label, t)
        })
        .collect();
    let mut table = ResultTable {
        experiment: spec.name.clone(),
        records: Vec::new(),
        ue_records: Vec::new(),
        failures: Vec::new(),
        configs,
    };
    for cell in done {
        table.records.extend(cell.records);
        table.ue_records.extend(cell.ue);
        table.failures.extend(cell.failure);
    }
    Ok(table)
}

/// Resolved config for one arm and sweep point, convenient for single runs.
pub fn resolve_point(spec: &ExperimentSpec, arm: usize, sweep_index: usize) -> Result<SystemConfig> {
    let values: Vec<Value> = spec.sweep_values();
    let v = values.get(sweep_index).ok_or_else(|| Error::InvalidConfig("sweep index out of range".into()))?;
    spec.resolve(&spec.arms[arm], v)
}
