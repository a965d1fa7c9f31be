//! Power control: UL fractional programming, DL fractional programming with
//! an ADMM inner solver, and the alternating loop that couples them.

pub mod admm;
pub mod alternate;
pub mod downlink;
pub mod uplink;

pub use admm::{admm_qcqp, AdmmOptions, AdmmResult, QcqpProblem};
pub use alternate::{alternate_ul_dl, optimize, AltResult, PcOptions};
pub use downlink::{build_qcqp, dl_power_control, interference_matrix, DlOptions, DlResult, DlSurrogate, FpStateDl};
pub use uplink::{ul_power_control, FpStateUl, UlResult};
