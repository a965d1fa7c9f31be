//! Cell-free MIMO simulation for dynamic-TDD and full-duplex access points.
//!
//! The pipeline runs from geometry to sum spectral efficiency:
//!
//! 1. [`channel`] drops APs and UEs, draws large-scale fading and computes MMSE
//!    estimation statistics.
//! 2. [`pilot`] clusters UEs around APs and colors the resulting conflict graph
//!    so UEs sharing an AP never share a pilot.
//! 3. [`se`] evaluates closed-form ZF SINRs and their Monte Carlo counterparts.
//! 4. [`powerctl`] optimizes UL powers and DL coefficients.
//! 5. [`schedule`] assigns each half-duplex AP to UL or DL.
//! 6. [`harness`] runs seeded experiments and writes result tables.

// Matrix code indexes several arrays with the same AP/UE index.
#![allow(clippy::needless_range_loop)]

pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod pilot;
pub mod powerctl;
pub mod rng;
pub mod scenario;
pub mod schedule;
pub mod se;

pub use config::{DuplexMode, SystemConfig};
pub use error::{Error, Result};
pub use harness::{run_experiment, ExperimentSpec, ResultTable};
pub use scenario::{PilotScheme, Scenario};
pub use se::{DuplexConfig, PowerAllocation, SEReport, SeModel, UplinkWeights};
