//! Greedy scheduling against exhaustive search on small networks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DuplexMode, SystemConfig};
use crate::error::{Error, Result};
use crate::powerctl::PcOptions;
use crate::rng::trial_seed;
use crate::scenario::Scenario;
use crate::schedule::{exhaustive_mode_select, greedy_mode_select, ScheduleMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub instance: usize,
    pub seed: u64,
    pub greedy: f64,
    pub exhaustive: f64,
    pub ratio: f64,
    /// Committed greedy SE never decreased.
    pub monotone: bool,
}

/// Relative slack allowed in the greedy trace check.
pub const TRACE_TOL: f64 = 1e-9;

/// Runs `instances` ZF-feasible drops. Drops with too few antennas for
/// their pilot count are skipped, so seeds are not contiguous.
pub fn schedule_gap(cfg: &SystemConfig, instances: usize, seed: u64, cap: usize) -> Result<Vec<GapRow>> {
    let mut cfg = cfg.clone();
    cfg.duplex = DuplexMode::Dtdd;
    let mut seeds = Vec::with_capacity(instances);
    let mut t = 0u64;
    while seeds.len() < instances {
        if t > 20 * instances as u64 + 100 {
            return Err(Error::InvalidConfig("too few ZF-feasible drops for the gap study".into()));
        }
        let s = trial_seed(seed, t);
        if Scenario::generate(&cfg, s)?.zf_feasible() {
            seeds.push(s);
        }
        t += 1;
    }
    let opts = PcOptions::from_config(&cfg);
    let rows: Vec<Result<GapRow>> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let sc = Scenario::generate(&cfg, s)?;
            let g = greedy_mode_select(&sc, &opts, ScheduleMode::Full)?;
            let ex = exhaustive_mode_select(&sc, &opts, cap)?;
            let monotone =
                g.trace.windows(2).all(|w| w[1].sum_se >= w[0].sum_se - TRACE_TOL * w[0].sum_se.abs().max(1.0));
            let ratio = if ex.sum_se > 0.0 { g.sum_se() / ex.sum_se } else { 1.0 };
            Ok(GapRow { instance: i, seed: s, greedy: g.sum_se(), exhaustive: ex.sum_se, ratio, monotone })
        })
        .collect();
    rows.into_iter().collect()
}
