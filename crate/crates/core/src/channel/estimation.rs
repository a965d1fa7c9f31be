use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::pilot::PilotAssignment;

/// Per-link MMSE estimation statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateStats {
    /// Inverse received pilot power, shared by all UEs on one pilot at one AP.
    pub c: DMatrix<f64>,
    /// Variance of the channel estimate.
    pub alpha2: DMatrix<f64>,
    /// Variance of the estimation error, `beta - alpha2`.
    pub alpha2_err: DMatrix<f64>,
}

impl EstimateStats {
    pub fn alpha(&self, m: usize, k: usize) -> f64 {
        self.alpha2[(m, k)].sqrt()
    }
}

/// `c_mk = 1 / (tau_p * sum_{n on k's pilot} E_p,n beta_mn + N0)`.
pub fn estimation_coefficients(
    beta: &DMatrix<f64>,
    pilots: &PilotAssignment,
    pilot_power: &[f64],
    noise: f64,
) -> EstimateStats {
    let (m, k) = beta.shape();
    let tau = pilots.tau_p as f64;
    let mut c = DMatrix::zeros(m, k);
    let mut alpha2 = DMatrix::zeros(m, k);
    for a in 0..m {
        for set in &pilots.copilot_sets {
            let rx: f64 = set.iter().map(|&n| pilot_power[n] * beta[(a, n)]).sum();
            let cm = 1.0 / (tau * rx + noise);
            for &u in set {
                c[(a, u)] = cm;
                alpha2[(a, u)] = (cm * tau * pilot_power[u] * beta[(a, u)].powi(2)).min(beta[(a, u)]);
            }
        }
    }
    let alpha2_err = beta - &alpha2;
    EstimateStats { c, alpha2, alpha2_err }
}

/// `NMSE_mk = (beta - alpha2) / beta`; zero-gain links report 1.
pub fn nmse(stats: &EstimateStats) -> DMatrix<f64> {
    let beta = &stats.alpha2 + &stats.alpha2_err;
    DMatrix::from_fn(beta.nrows(), beta.ncols(), |i, j| {
        let b = beta[(i, j)];
        if b > 0.0 {
            (stats.alpha2_err[(i, j)] / b).clamp(0.0, 1.0)
        } else {
            1.0
        }
    })
}

/// Mean NMSE over links with nonzero gain.
pub fn mean_nmse(stats: &EstimateStats) -> f64 {
    let beta = &stats.alpha2 + &stats.alpha2_err;
    let nm = nmse(stats);
    let (sum, n) =
        nm.iter().zip(beta.iter()).filter(|(_, &b)| b > 0.0).fold((0.0, 0usize), |(s, n), (x, _)| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}
