//! UL/DL mode selection for half-duplex APs.
//!
//! The greedy scheduler grows the UL and DL AP sets one AP at a time,
//! always committing the (AP, mode) pair that gives the largest sum SE. A
//! candidate's value is the better of two power optimizations: one from the
//! equal-power start and one warm-started from the committed allocation
//! with the new AP idle. The warm start makes the committed sequence
//! non-decreasing.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::powerctl::{alternate_ul_dl, optimize, AltResult, PcOptions};
use crate::scenario::Scenario;
use crate::se::{DuplexConfig, PowerAllocation, SeModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleMode {
    /// Power optimization for every candidate.
    #[default]
    Full,
    /// Equal power while scheduling, one optimization at the end.
    Cheap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub ap: usize,
    pub ul: bool,
    pub sum_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    pub duplex: DuplexConfig,
    /// Committed sum SE after each step.
    pub trace: Vec<ScheduleStep>,
    /// Power-optimized result on the final split, from the equal-power start.
    /// This is the split's value in the exhaustive table too.
    pub result: AltResult,
}

impl ScheduleResult {
    pub fn sum_se(&self) -> f64 {
        self.result.sum_se()
    }

    /// `true` for UL, indexed by AP.
    pub fn modes(&self, num_aps: usize) -> Vec<bool> {
        (0..num_aps).map(|m| self.duplex.ul_aps.contains(&m)).collect()
    }
}

/// A committed partial split with the allocation that achieved its value.
#[derive(Clone)]
struct State {
    duplex: DuplexConfig,
    power: PowerAllocation,
    value: f64,
}

/// Carries an allocation over to a split with one more AP. A new DL AP gets
/// a zero row, so it transmits nothing until optimized.
fn extend(prev: &State, next: &DuplexConfig) -> PowerAllocation {
    let nd = prev.power.kappa.ncols();
    let kappa = DMatrix::from_fn(next.dl_aps.len(), nd, |r, n| {
        let ap = next.dl_aps[r];
        prev.duplex.dl_aps.iter().position(|&j| j == ap).map_or(0.0, |i| prev.power.kappa[(i, n)])
    });
    PowerAllocation { e_u: prev.power.e_u.clone(), kappa, e_d: prev.power.e_d }
}

fn value_at(model: &SeModel, power: &PowerAllocation) -> f64 {
    model.report(power, &model.zf_optimal_weights(power)).sum_se
}

fn evaluate(sc: &Scenario, prev: &State, duplex: DuplexConfig, opts: &PcOptions, mode: ScheduleMode) -> Result<State> {
    let model = SeModel::new(sc, &duplex)?;
    let warm = extend(prev, &duplex);
    let cold = model.equal_power();
    let (power, value) = match mode {
        ScheduleMode::Full => {
            let a = optimize(&model, opts)?;
            let b = alternate_ul_dl(&model, opts, &warm)?;
            if a.sum_se() >= b.sum_se() {
                (a.power, a.report.sum_se)
            } else {
                (b.power, b.report.sum_se)
            }
        }
        ScheduleMode::Cheap => {
            let (va, vb) = (value_at(&model, &cold), value_at(&model, &warm));
            if va >= vb {
                (cold, va)
            } else {
                (warm, vb)
            }
        }
    };
    Ok(State { duplex, power, value })
}

/// All APs to one side when the other has no UEs.
fn forced_split(sc: &Scenario) -> Option<DuplexConfig> {
    let all: Vec<usize> = (0..sc.geometry.num_aps()).collect();
    if sc.geometry.ul_ues.is_empty() {
        Some(DuplexConfig::dtdd(vec![], all))
    } else if sc.geometry.dl_ues.is_empty() {
        Some(DuplexConfig::dtdd(all, vec![]))
    } else {
        None
    }
}

pub fn greedy_mode_select(sc: &Scenario, opts: &PcOptions, mode: ScheduleMode) -> Result<ScheduleResult> {
    let m_total = sc.geometry.num_aps();
    let cfg = &sc.config;
    if let Some(d) = forced_split(sc) {
        let model = SeModel::new(sc, &d)?;
        let result = optimize(&model, opts)?;
        let trace =
            (0..m_total).map(|ap| ScheduleStep { ap, ul: d.ul_aps.contains(&ap), sum_se: result.sum_se() }).collect();
        return Ok(ScheduleResult { duplex: d, trace, result });
    }
    let empty = DuplexConfig::dtdd(vec![], vec![]);
    let nu = sc.geometry.ul_ues.len();
    let power = PowerAllocation::equal(nu, 0, sc.geometry.dl_ues.len(), cfg.ul_power_max, cfg.dl_power_total);
    let mut state = State { value: 0.0, duplex: empty, power };
    let mut trace = Vec::with_capacity(m_total);
    let mut free: Vec<usize> = (0..m_total).collect();
    while !free.is_empty() {
        let cands: Vec<(usize, bool)> = free.iter().flat_map(|&ap| [(ap, true), (ap, false)]).collect();
        let evals: Vec<Result<State>> = cands
            .par_iter()
            .map(|&(ap, ul)| {
                let (mut u, mut d) = (state.duplex.ul_aps.clone(), state.duplex.dl_aps.clone());
                if ul {
                    u.push(ap);
                } else {
                    d.push(ap);
                }
                evaluate(sc, &state, DuplexConfig::dtdd(u, d), opts, mode)
            })
            .collect();
        // Best UL and best DL candidate (lowest AP on ties), then UL if at least as good.
        let mut best: [Option<(usize, State)>; 2] = [None, None];
        for (i, e) in evals.into_iter().enumerate() {
            let e = e?;
            let slot = &mut best[usize::from(!cands[i].1)];
            if slot.as_ref().is_none_or(|(_, b)| e.value > b.value) {
                *slot = Some((i, e));
            }
        }
        let [ul_best, dl_best] = best;
        let (i, next) = match (ul_best, dl_best) {
            (Some(u), Some(d)) => {
                if u.1.value >= d.1.value {
                    u
                } else {
                    d
                }
            }
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => unreachable!("free APs always yield candidates"),
        };
        let (ap, ul) = cands[i];
        free.retain(|&m| m != ap);
        trace.push(ScheduleStep { ap, ul, sum_se: next.value });
        state = next;
    }
    let model = SeModel::new(sc, &state.duplex)?;
    let result = optimize(&model, opts)?;
    Ok(ScheduleResult { duplex: state.duplex, trace, result })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveRow {
    /// `true` for UL, indexed by AP.
    pub modes: Vec<bool>,
    pub sum_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveResult {
    pub duplex: DuplexConfig,
    pub sum_se: f64,
    pub table: Vec<ExhaustiveRow>,
}

/// Optimized sum SE of one full split, from the equal-power start.
pub fn split_value(sc: &Scenario, duplex: &DuplexConfig, opts: &PcOptions) -> Result<f64> {
    Ok(optimize(&SeModel::new(sc, duplex)?, opts)?.sum_se())
}

/// Every one of the `2^M` splits, row `r` having AP `m` in UL when bit `m` of `r` is set.
pub fn exhaustive_mode_select(sc: &Scenario, opts: &PcOptions, m_cap: usize) -> Result<ExhaustiveResult> {
    let m = sc.geometry.num_aps();
    if m > m_cap {
        return Err(Error::TooManyAps { m, cap: m_cap });
    }
    let rows: Vec<Result<ExhaustiveRow>> = (0..1usize << m)
        .into_par_iter()
        .map(|mask| {
            let modes: Vec<bool> = (0..m).map(|i| mask >> i & 1 == 1).collect();
            let sum_se = split_value(sc, &DuplexConfig::from_modes(&modes), opts)?;
            Ok(ExhaustiveRow { modes, sum_se })
        })
        .collect();
    let table: Vec<ExhaustiveRow> = rows.into_iter().collect::<Result<_>>()?;
    // First row wins ties, so the result does not depend on scheduling order.
    let best = table.iter().fold(&table[0], |b, r| if r.sum_se > b.sum_se { r } else { b });
    Ok(ExhaustiveResult { duplex: DuplexConfig::from_modes(&best.modes), sum_se: best.sum_se, table })
}
