//! Closed-form SINRs against the Monte Carlo oracle, per UE and component.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DuplexMode, SystemConfig};
use crate::error::Result;
use crate::rng::trial_seed;
use crate::scenario::Scenario;
use crate::se::monte_carlo::{run_mc, CombinerKind, PrecoderKind};
use crate::se::{DuplexConfig, SeModel};

pub const SINR_TOL: f64 = 0.02;
pub const COMPONENT_TOL: f64 = 0.03;
/// Components smaller than this fraction of the UE's total interference are
/// compared against that floor instead of their own size.
pub const COMPONENT_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub instance: usize,
    pub duplex: String,
    pub direction: String,
    pub ue: usize,
    pub component: String,
    pub closed_form: f64,
    pub sampled: f64,
    pub rel_err: f64,
    pub tol: f64,
}

impl OracleRow {
    pub fn pass(&self) -> bool {
        self.rel_err <= self.tol
    }
}

fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

/// Compares every UE's SINR and interference components at equal power with
/// closed-form optimal weights.
pub fn check_instance(
    sc: &Scenario,
    duplex: &DuplexConfig,
    instance: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<OracleRow>> {
    let model = SeModel::new(sc, duplex)?;
    let p = model.equal_power();
    let w = model.zf_optimal_weights(&p);
    let mc = run_mc(sc, duplex, &p, CombinerKind::Zf, PrecoderKind::Zf, trials, seed)?;
    let label = match sc.config.duplex {
        DuplexMode::Dtdd => "dtdd",
        DuplexMode::Fd => "fd",
    };
    let mut rows = Vec::new();
    let mut push = |dir: &str, ue: usize, comp: &str, c: f64, s: f64, floor: f64, tol: f64| {
        rows.push(OracleRow {
            instance,
            duplex: label.into(),
            direction: dir.into(),
            ue,
            component: comp.into(),
            closed_form: c,
            sampled: s,
            rel_err: rel(c, s, floor),
            tol,
        });
    };
    // Sampled UL moments leave out the N - tau_p factor the closed form carries.
    let s = model.n_ul;
    for ((&ue, c), m) in sc.geometry.ul_ues.iter().zip(model.ul_terms(&p, &w)).zip(mc.ul_terms(&w)) {
        let floor = COMPONENT_FLOOR * c.interference();
        push("ul", ue, "sinr", c.sinr(), m.sinr(), 0.0, SINR_TOL);
        push("ul", ue, "est", c.est, s * m.est, floor, COMPONENT_TOL);
        push("ul", ue, "mui", c.mui, s * m.mui, floor, COMPONENT_TOL);
        push("ul", ue, "iap", c.iap, s * m.iap, floor, COMPONENT_TOL);
    }
    for ((&ue, c), m) in sc.geometry.dl_ues.iter().zip(model.dl_terms(&p)).zip(mc.dl_terms(&p.kappa)) {
        let floor = COMPONENT_FLOOR * c.interference();
        push("dl", ue, "sinr", c.sinr(), m.sinr(), 0.0, SINR_TOL);
        push("dl", ue, "est", c.est, m.est, floor, COMPONENT_TOL);
        push("dl", ue, "mui", c.mui, m.mui, floor, COMPONENT_TOL);
        push("dl", ue, "iue", c.iue, m.iue, floor, COMPONENT_TOL);
    }
    Ok(rows)
}

/// `instances` drops of `cfg`, each checked as DTDD (even APs UL, odd APs
/// DL) and as FD with the same antenna count on both sides.
pub fn oracle_suite(cfg: &SystemConfig, instances: usize, trials: usize, seed: u64) -> Result<Vec<OracleRow>> {
    let mut dtdd = cfg.clone();
    dtdd.duplex = DuplexMode::Dtdd;
    let mut fd = cfg.clone();
    fd.duplex = DuplexMode::Fd;
    fd.n_tx = cfg.antennas_per_ap;
    fd.n_rx = cfg.antennas_per_ap;
    let m = cfg.num_aps;
    let split = DuplexConfig::from_modes(&(0..m).map(|a| a % 2 == 0).collect::<Vec<_>>());
    let full = DuplexConfig::full_duplex(m);
    let jobs: Vec<(usize, bool)> = (0..instances).flat_map(|i| [(i, false), (i, true)]).collect();
    let parts: Vec<Result<Vec<OracleRow>>> = jobs
        .par_iter()
        .map(|&(i, is_fd)| {
            let s = trial_seed(seed, i as u64);
            let (c, d) = if is_fd { (&fd, &full) } else { (&dtdd, &split) };
            let sc = Scenario::generate(c, s)?;
            check_instance(&sc, d, i, trials, s ^ 0x5eed)
        })
        .collect();
    let mut rows = Vec::new();
    for p in parts {
        rows.extend(p?);
    }
    Ok(rows)
}
