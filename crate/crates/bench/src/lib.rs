//! Fixtures shared by the solver benchmarks.

use cellfree::powerctl::PcOptions;
use cellfree::schedule::{greedy_mode_select, ScheduleMode};
use cellfree::{DuplexConfig, Scenario, SystemConfig};

/// A desk-scale drop that admits ZF, with its cheap greedy schedule.
pub fn desk_drop(seed: u64) -> (Scenario, DuplexConfig) {
    let cfg = SystemConfig::desk();
    let sc = (seed..)
        .map(|s| Scenario::generate(&cfg, s).expect("desk config is valid"))
        .find(Scenario::zf_feasible)
        .expect("some drop admits ZF");
    let d = greedy_mode_select(&sc, &PcOptions::from_config(&cfg), ScheduleMode::Cheap).expect("schedule").duplex;
    (sc, d)
}

/// The same drop with every AP in full duplex.
pub fn fd_drop(seed: u64) -> (Scenario, DuplexConfig) {
    let cfg = SystemConfig { duplex: cellfree::DuplexMode::Fd, n_tx: 8, n_rx: 8, ..SystemConfig::desk() };
    let sc = (seed..)
        .map(|s| Scenario::generate(&cfg, s).expect("desk config is valid"))
        .find(Scenario::zf_feasible)
        .expect("some drop admits ZF");
    let d = DuplexConfig::full_duplex(sc.geometry.num_aps());
    (sc, d)
}
