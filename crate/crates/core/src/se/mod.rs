//! Spectral efficiency: closed-form ZF SINRs and Monte Carlo estimators.

pub mod closed_form;
pub mod monte_carlo;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::C64;
use crate::config::DuplexMode;
use crate::error::{Error, Result};

pub use closed_form::{DlTerms, SeModel, UlLinearForm, UlTerms};

/// Which APs receive (UL) and which transmit (DL).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplexConfig {
    pub mode: DuplexMode,
    pub ul_aps: Vec<usize>,
    pub dl_aps: Vec<usize>,
}

impl DuplexConfig {
    pub fn full_duplex(num_aps: usize) -> Self {
        Self { mode: DuplexMode::Fd, ul_aps: (0..num_aps).collect(), dl_aps: (0..num_aps).collect() }
    }

    pub fn dtdd(mut ul_aps: Vec<usize>, mut dl_aps: Vec<usize>) -> Self {
        ul_aps.sort_unstable();
        dl_aps.sort_unstable();
        Self { mode: DuplexMode::Dtdd, ul_aps, dl_aps }
    }

    /// DTDD split from a per-AP flag, `true` meaning UL.
    pub fn from_modes(modes: &[bool]) -> Self {
        let ul = (0..modes.len()).filter(|&m| modes[m]).collect();
        let dl = (0..modes.len()).filter(|&m| !modes[m]).collect();
        Self::dtdd(ul, dl)
    }

    pub fn validate(&self, num_aps: usize) -> Result<()> {
        let in_range = self.ul_aps.iter().chain(&self.dl_aps).all(|&m| m < num_aps);
        if !in_range {
            return Err(Error::InvalidConfig("AP index out of range".into()));
        }
        match self.mode {
            DuplexMode::Dtdd => {
                if self.ul_aps.iter().any(|m| self.dl_aps.contains(m)) {
                    return Err(Error::InvalidConfig("half-duplex AP scheduled in both directions".into()));
                }
            }
            DuplexMode::Fd => {
                let all: Vec<usize> = (0..num_aps).collect();
                if self.ul_aps != all || self.dl_aps != all {
                    return Err(Error::InvalidConfig("full duplex uses every AP in both directions".into()));
                }
            }
        }
        Ok(())
    }
}

/// UL powers (per UL UE, W) and DL coefficients (|A_d| x |U_d|).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub e_u: Vec<f64>,
    pub kappa: DMatrix<f64>,
    pub e_d: f64,
}

impl PowerAllocation {
    /// Full UL power and an even split of each AP's budget.
    pub fn equal(num_ul_ues: usize, num_dl_aps: usize, num_dl_ues: usize, e_u_max: f64, e_d: f64) -> Self {
        let k = if num_dl_ues > 0 { 1.0 / (num_dl_ues as f64).sqrt() } else { 0.0 };
        Self { e_u: vec![e_u_max; num_ul_ues], kappa: DMatrix::from_element(num_dl_aps, num_dl_ues, k), e_d }
    }

    /// Largest per-AP power use `sum_q kappa_jq^2`.
    pub fn max_ap_load(&self) -> f64 {
        self.kappa.row_iter().map(|r| r.norm_squared()).fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, e_u_max: f64) -> bool {
        self.e_u.iter().all(|&e| (0.0..=e_u_max * (1.0 + 1e-12)).contains(&e)) && self.max_ap_load() <= 1.0 + 1e-6
    }
}

/// CPU combining weights, |A_u| x |U_u|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UplinkWeights {
    pub omega: DMatrix<C64>,
}

impl UplinkWeights {
    pub fn equal(num_ul_aps: usize, num_ul_ues: usize) -> Self {
        let w = if num_ul_aps > 0 { 1.0 / num_ul_aps as f64 } else { 0.0 };
        Self { omega: DMatrix::from_element(num_ul_aps, num_ul_ues, C64::new(w, 0.0)) }
    }

    pub fn from_real(w: &DMatrix<f64>) -> Self {
        Self { omega: w.map(|x| C64::new(x, 0.0)) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SEReport {
    /// Global UE indices matching the per-UE arrays.
    pub ul_ues: Vec<usize>,
    pub dl_ues: Vec<usize>,
    pub ul_sinr: Vec<f64>,
    pub dl_sinr: Vec<f64>,
    /// Bits per channel use, pre-log included.
    pub ul_se: Vec<f64>,
    pub dl_se: Vec<f64>,
    pub prelog: f64,
    pub sum_se: f64,
}

impl SEReport {
    pub fn ul_sum(&self) -> f64 {
        self.ul_se.iter().sum()
    }

    pub fn dl_sum(&self) -> f64 {
        self.dl_se.iter().sum()
    }
}

/// Pre-log `(tau - tau_p) / tau`, floored at zero.
pub fn prelog(tau: usize, tau_p: usize) -> f64 {
    ((tau as f64 - tau_p as f64) / tau as f64).max(0.0)
}

/// Sum SE in bits per channel use.
pub fn sum_se(
    ul_ues: &[usize],
    dl_ues: &[usize],
    ul_sinr: &[f64],
    dl_sinr: &[f64],
    tau: usize,
    tau_p: usize,
) -> SEReport {
    let pre = prelog(tau, tau_p);
    let se = |s: &f64| pre * (1.0 + s.max(0.0)).log2();
    let ul_se: Vec<f64> = ul_sinr.iter().map(se).collect();
    let dl_se: Vec<f64> = dl_sinr.iter().map(se).collect();
    let sum_se = ul_se.iter().sum::<f64>() + dl_se.iter().sum::<f64>();
    SEReport {
        ul_ues: ul_ues.to_vec(),
        dl_ues: dl_ues.to_vec(),
        ul_sinr: ul_sinr.to_vec(),
        dl_sinr: dl_sinr.to_vec(),
        ul_se,
        dl_se,
        prelog: pre,
        sum_se,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_se_two_ul_ues() {
        let r = sum_se(&[0, 1], &[], &[1.0, 1.0], &[], 200, 5);
        assert!((r.sum_se - 1.95).abs() < 1e-12);
        assert!((r.prelog - 0.975).abs() < 1e-15);
    }

    #[test]
    fn no_data_phase_gives_zero() {
        let r = sum_se(&[0], &[1], &[3.0], &[7.0], 10, 10);
        assert_eq!(r.sum_se, 0.0);
    }

    #[test]
    fn mixed_instance_recomputed() {
        let ul = [0.5, 2.0, 0.0];
        let dl = [4.0, 0.25];
        let r = sum_se(&[0, 1, 2], &[3, 4], &ul, &dl, 100, 7);
        let mut want = 0.0;
        for s in ul.iter().chain(&dl) {
            want += (1.0 + s).ln() / 2f64.ln();
        }
        want *= 93.0 / 100.0;
        assert!((r.sum_se - want).abs() < 1e-12);
        assert!((r.ul_sum() + r.dl_sum() - r.sum_se).abs() < 1e-12);
    }

    #[test]
    fn duplex_validation() {
        assert!(DuplexConfig::dtdd(vec![0, 1], vec![1]).validate(2).is_err());
        assert!(DuplexConfig::dtdd(vec![0], vec![1]).validate(2).is_ok());
        assert!(DuplexConfig::full_duplex(3).validate(3).is_ok());
        let mut fd = DuplexConfig::full_duplex(3);
        fd.dl_aps.pop();
        assert!(fd.validate(3).is_err());
    }

    #[test]
    fn equal_allocation_uses_full_budget() {
        let p = PowerAllocation::equal(2, 3, 4, 0.1, 1.0);
        assert!((p.max_ap_load() - 1.0).abs() < 1e-12);
        assert!(p.is_feasible(0.1));
    }
}
