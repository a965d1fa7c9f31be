//! Closed-form SINRs for ZF combining and precoding.
//!
//! UL quantities follow the convention that numerator and denominator are both
//! multiplied by `N_rx - tau_p`, so estimation error, cross-link and noise
//! terms carry no antenna factor while the coherent terms do.
//!
//! Two points differ from the commonly printed forms:
//! * The combiner of UE `k` at AP `m` picks up a co-pilot UE `i` with mean
//!   `alpha_mk * alpha_mi` (all UEs on one pilot share one estimate
//!   direction), so pilot-contamination terms use that product.
//! * AP-to-AP interference through a unit-norm precoder and a `CN(0, zeta)`
//!   channel has power `zeta * E||v||^2`, with no array-size factor.

use nalgebra::{DMatrix, DVector};

use super::{sum_se, DuplexConfig, PowerAllocation, SEReport, UplinkWeights};
use crate::channel::C64;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// UL SINR components of one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlTerms {
    pub signal: f64,
    pub est: f64,
    pub mui: f64,
    pub iap: f64,
    pub noise: f64,
}

impl UlTerms {
    pub fn interference(&self) -> f64 {
        self.est + self.mui + self.iap + self.noise
    }

    pub fn sinr(&self) -> f64 {
        ratio(self.signal, self.interference())
    }
}

/// DL SINR components of one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DlTerms {
    pub signal: f64,
    pub est: f64,
    pub mui: f64,
    pub iue: f64,
    pub noise: f64,
}

impl DlTerms {
    pub fn interference(&self) -> f64 {
        self.est + self.mui + self.iue + self.noise
    }

    pub fn sinr(&self) -> f64 {
        ratio(self.signal, self.interference())
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num <= 0.0 {
        0.0
    } else if den <= 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// UL SINR as a function of the powers at fixed weights and DL coefficients:
/// `SINR_k = a_k E_k / (sum_i b[k, i] E_i + sigma_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UlLinearForm {
    pub a: Vec<f64>,
    pub b: DMatrix<f64>,
    pub sigma: Vec<f64>,
}

impl UlLinearForm {
    pub fn sinr(&self, e: &[f64]) -> Vec<f64> {
        (0..self.a.len())
            .map(|k| {
                let den: f64 = (0..e.len()).map(|i| self.b[(k, i)] * e[i]).sum::<f64>() + self.sigma[k];
                ratio(self.a[k] * e[k], den)
            })
            .collect()
    }
}

/// Statistics of one scenario restricted to a UL/DL AP split.
#[derive(Debug, Clone)]
pub struct SeModel<'a> {
    pub scenario: &'a Scenario,
    pub duplex: &'a DuplexConfig,
    /// `N_rx - tau_p` and `N_tx - tau_p`.
    pub n_ul: f64,
    pub n_dl: f64,
    /// |A_u| x |U_u|.
    pub alpha_u: DMatrix<f64>,
    pub alpha2_u: DMatrix<f64>,
    pub err_u: DMatrix<f64>,
    /// |A_d| x |U_d|.
    pub alpha_d: DMatrix<f64>,
    pub err_d: DMatrix<f64>,
    /// Co-pilot partners of each UL (DL) UE within its own direction, by local index.
    pub cp_u: Vec<Vec<usize>>,
    pub cp_d: Vec<Vec<usize>>,
    /// |A_u| x |A_d| cross-AP gain (self-interference where the AP is shared).
    pub zeta_ud: DMatrix<f64>,
    pub noise: f64,
}

fn local_copilots(ues: &[usize], pilot_of: &[usize]) -> Vec<Vec<usize>> {
    (0..ues.len())
        .map(|a| (0..ues.len()).filter(|&b| b != a && pilot_of[ues[a]] == pilot_of[ues[b]]).collect())
        .collect()
}

impl<'a> SeModel<'a> {
    pub fn new(scenario: &'a Scenario, duplex: &'a DuplexConfig) -> Result<Self> {
        let cfg = &scenario.config;
        duplex.validate(scenario.geometry.num_aps())?;
        let tau_p = scenario.tau_p();
        let (n_rx, n_tx) = (cfg.rx_antennas(), cfg.tx_antennas());
        for n in [n_rx, n_tx] {
            if n <= tau_p {
                return Err(Error::TooFewAntennas { antennas: n, tau_p });
            }
        }
        let st = &scenario.stats;
        let ul = &scenario.geometry.ul_ues;
        let dl = &scenario.geometry.dl_ues;
        let (au, ad) = (&duplex.ul_aps, &duplex.dl_aps);
        let alpha2_u = DMatrix::from_fn(au.len(), ul.len(), |m, k| st.alpha2[(au[m], ul[k])]);
        let alpha_u = alpha2_u.map(f64::sqrt);
        let err_u = DMatrix::from_fn(au.len(), ul.len(), |m, k| st.alpha2_err[(au[m], ul[k])]);
        let alpha_d = DMatrix::from_fn(ad.len(), dl.len(), |j, n| st.alpha2[(ad[j], dl[n])].sqrt());
        let err_d = DMatrix::from_fn(ad.len(), dl.len(), |j, n| st.alpha2_err[(ad[j], dl[n])]);
        let zeta_ud = DMatrix::from_fn(au.len(), ad.len(), |m, j| scenario.gains.zeta(au[m], ad[j]));
        Ok(Self {
            scenario,
            duplex,
            n_ul: (n_rx - tau_p) as f64,
            n_dl: (n_tx - tau_p) as f64,
            alpha_u,
            alpha2_u,
            err_u,
            alpha_d,
            err_d,
            cp_u: local_copilots(ul, &scenario.pilots.pilot_of),
            cp_d: local_copilots(dl, &scenario.pilots.pilot_of),
            zeta_ud,
            noise: cfg.noise_w(),
        })
    }

    pub fn num_ul_ues(&self) -> usize {
        self.alpha_u.ncols()
    }

    pub fn num_dl_ues(&self) -> usize {
        self.alpha_d.ncols()
    }

    pub fn num_ul_aps(&self) -> usize {
        self.alpha_u.nrows()
    }

    pub fn num_dl_aps(&self) -> usize {
        self.alpha_d.nrows()
    }

    pub fn equal_power(&self) -> PowerAllocation {
        let c = &self.scenario.config;
        PowerAllocation::equal(
            self.num_ul_ues(),
            self.num_dl_aps(),
            self.num_dl_ues(),
            c.ul_power_max,
            c.dl_power_total,
        )
    }

    /// Cross-link power reaching each UL AP per unit of `|omega|^2 alpha^2`:
    /// `q_m = E_d sum_j zeta_mj sum_n kappa_jn^2`.
    pub fn crosslink_per_ap(&self, power: &PowerAllocation) -> DVector<f64> {
        let loads = DVector::from_fn(self.num_dl_aps(), |j, _| power.kappa.row(j).norm_squared());
        (&self.zeta_ud * loads) * power.e_d
    }

    pub fn ul_terms(&self, power: &PowerAllocation, weights: &UplinkWeights) -> Vec<UlTerms> {
        let q = self.crosslink_per_ap(power);
        let e = &power.e_u;
        let (ma, ku) = self.alpha_u.shape();
        (0..ku)
            .map(|k| {
                let w = weights.omega.column(k);
                let coh = |i: usize| -> C64 {
                    (0..ma).map(|m| w[m].conj() * (self.alpha_u[(m, k)] * self.alpha_u[(m, i)])).sum()
                };
                let signal = self.n_ul * e[k] * coh(k).norm_sqr();
                let mui = self.n_ul * self.cp_u[k].iter().map(|&i| e[i] * coh(i).norm_sqr()).sum::<f64>();
                let mut est = 0.0;
                let mut iap = 0.0;
                let mut noise = 0.0;
                for m in 0..ma {
                    let g = w[m].norm_sqr() * self.alpha2_u[(m, k)];
                    if g == 0.0 {
                        continue;
                    }
                    est += g * (0..ku).map(|i| e[i] * self.err_u[(m, i)]).sum::<f64>();
                    iap += g * q[m];
                    noise += g * self.noise;
                }
                UlTerms { signal, est, mui, iap, noise }
            })
            .collect()
    }

    pub fn ul_sinr(&self, power: &PowerAllocation, weights: &UplinkWeights) -> Vec<f64> {
        self.ul_terms(power, weights).iter().map(UlTerms::sinr).collect()
    }

    /// UL SINR pieces that stay fixed while the UL powers change.
    pub fn ul_linear_form(&self, weights: &UplinkWeights, power: &PowerAllocation) -> UlLinearForm {
        let q = self.crosslink_per_ap(power);
        let (ma, ku) = self.alpha_u.shape();
        let mut a = vec![0.0; ku];
        let mut b = DMatrix::zeros(ku, ku);
        let mut sigma = vec![0.0; ku];
        for k in 0..ku {
            let w = weights.omega.column(k);
            let coh = |i: usize| -> f64 {
                (0..ma).map(|m| w[m].conj() * (self.alpha_u[(m, k)] * self.alpha_u[(m, i)])).sum::<C64>().norm_sqr()
            };
            a[k] = self.n_ul * coh(k);
            for m in 0..ma {
                let g = w[m].norm_sqr() * self.alpha2_u[(m, k)];
                for i in 0..ku {
                    b[(k, i)] += g * self.err_u[(m, i)];
                }
                sigma[k] += g * (q[m] + self.noise);
            }
            for &i in &self.cp_u[k] {
                b[(k, i)] += self.n_ul * coh(i);
            }
        }
        UlLinearForm { a, b, sigma }
    }

    /// SINR-optimal CPU weights for ZF combining. Each column solves
    /// `R_k w = E_k u_k` with `u_k = alpha2_:k`.
    pub fn zf_optimal_weights(&self, power: &PowerAllocation) -> UplinkWeights {
        let (ma, ku) = self.alpha_u.shape();
        let mut omega = DMatrix::zeros(ma, ku);
        if ma == 0 {
            return UplinkWeights { omega };
        }
        let q = self.crosslink_per_ap(power);
        let e = &power.e_u;
        for k in 0..ku {
            let mut r = DMatrix::<f64>::zeros(ma, ma);
            for &i in &self.cp_u[k] {
                let u = self.alpha_u.column(k).component_mul(&self.alpha_u.column(i));
                r += (&u * u.transpose()) * e[i];
            }
            for m in 0..ma {
                let est: f64 = (0..ku).map(|i| e[i] * self.err_u[(m, i)]).sum();
                r[(m, m)] += self.alpha2_u[(m, k)] * (est + self.noise + q[m]) / self.n_ul;
            }
            let u = self.alpha2_u.column(k).into_owned();
            let w = match r.clone().cholesky() {
                Some(ch) if u.iter().any(|&x| x > 0.0) => ch.solve(&u) * if e[k] > 0.0 { e[k] } else { 1.0 },
                _ => r.clone().lu().solve(&u).unwrap_or_else(|| {
                    log::warn!("singular weight matrix for UL UE {k}; using uniform weights");
                    DVector::from_element(ma, 1.0 / ma as f64)
                }),
            };
            let w = if w.iter().all(|x| x.is_finite()) { w } else { DVector::from_element(ma, 1.0 / ma as f64) };
            for m in 0..ma {
                omega[(m, k)] = C64::new(w[m], 0.0);
            }
        }
        UplinkWeights { omega }
    }

    pub fn equal_weights(&self) -> UplinkWeights {
        UplinkWeights::equal(self.num_ul_aps(), self.num_ul_ues())
    }

    pub fn dl_terms(&self, power: &PowerAllocation) -> Vec<DlTerms> {
        let kap = &power.kappa;
        let ed = power.e_d;
        let loads: Vec<f64> = (0..self.num_dl_aps()).map(|j| kap.row(j).norm_squared()).collect();
        let eps = &self.scenario.gains.epsilon;
        (0..self.num_dl_ues())
            .map(|n| {
                let a = self.alpha_d.column(n);
                let coh = |q: usize| a.dot(&kap.column(q));
                let signal = self.n_dl * ed * coh(n).powi(2);
                let mui = self.n_dl * ed * self.cp_d[n].iter().map(|&q| coh(q).powi(2)).sum::<f64>();
                let est = ed * (0..loads.len()).map(|j| loads[j] * self.err_d[(j, n)]).sum::<f64>();
                let iue = (0..power.e_u.len()).map(|k| power.e_u[k] * eps[(n, k)]).sum();
                DlTerms { signal, est, mui, iue, noise: self.noise }
            })
            .collect()
    }

    pub fn dl_sinr(&self, power: &PowerAllocation) -> Vec<f64> {
        self.dl_terms(power).iter().map(DlTerms::sinr).collect()
    }

    pub fn report(&self, power: &PowerAllocation, weights: &UplinkWeights) -> SEReport {
        let sc = self.scenario;
        sum_se(
            &sc.geometry.ul_ues,
            &sc.geometry.dl_ues,
            &self.ul_sinr(power, weights),
            &self.dl_sinr(power),
            sc.config.coherence_len,
            sc.tau_p(),
        )
    }

    /// Sum SE with weights re-solved for the given powers.
    pub fn sum_se_optimal_weights(&self, power: &PowerAllocation) -> f64 {
        let w = self.zf_optimal_weights(power);
        self.report(power, &w).sum_se
    }
}
