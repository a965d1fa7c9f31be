//! Seeded experiments: TOML specs, parallel trials and result tables.

pub mod emit;
pub mod gap;
pub mod oracle;
pub mod run;
pub mod spec;
pub mod stats;

pub use emit::{emit, emit_detail, write_rows_csv, write_trace, Format, SCHEMA_VERSION};
pub use gap::{schedule_gap, GapRow};
pub use oracle::{oracle_suite, OracleRow};
pub use run::{
    resolve_point, run_experiment, run_trial, Failure, Record, ResolvedConfig, ResultTable, SummaryRow, TrialDetail,
    UeRecord, EXHAUSTIVE_CAP,
};
pub use spec::{Arm, ExperimentSpec, Profile, Scheduling, Stage, Sweep};
