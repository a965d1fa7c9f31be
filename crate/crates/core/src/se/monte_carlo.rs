//! Monte Carlo SINR estimators.
//!
//! Sample moments of the per-AP soft estimates are accumulated once; SINRs
//! for any CPU weights (UL) or power coefficients (DL) then follow from the
//! use-and-forget expressions without re-simulating. Trials run in fixed-size
//! chunks with their own seeds and are summed in chunk order, so results do
//! not depend on the thread count.
//!
//! Each soft estimate splits as `v^H h = v^H h_hat + v^H e`, and the error
//! draw is independent of every estimate. Means are accumulated from the
//! first part alone and second moments without the estimate-error cross
//! term. Both dropped pieces have zero conditional mean given the estimates,
//! so the estimands are unchanged and only variance goes. Without this the
//! mean of a UE with poor CSI, and the estimation-error term of a UE with
//! high SINR, need millions of draws to settle.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closed_form::{DlTerms, UlTerms};
use super::{DuplexConfig, PowerAllocation, UplinkWeights};
use crate::channel::realization::{draw_with, ArrayDraw, ArrayLayout, ChannelRealization, C64};
use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng, trial_seed};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombinerKind {
    Zf,
    Mmse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecoderKind {
    Zf,
    Rzf,
}

const CHUNK: usize = 256;

/// Moments for one UL UE `k`. Vectors run over UL APs.
#[derive(Debug, Clone)]
pub struct UlMoments {
    /// `E[u_ki]` for every UL UE `i`.
    pub mean: Vec<DVector<C64>>,
    /// `E[u_ki u_ki^H]`.
    pub second: Vec<DMatrix<C64>>,
    /// `sum_n E[a_kn a_kn^H]`, DL power already applied.
    pub cross: DMatrix<C64>,
    /// `E[||v_mk||^2]`.
    pub vnorm: DVector<f64>,
    /// `second` with the estimation-error draw integrated out given the
    /// estimates. Its off-diagonal entries carry no error noise.
    pub second_cond: Vec<DMatrix<C64>>,
    /// Diagonal of `cross` with the cross-link channel integrated out.
    pub cross_cond: DVector<f64>,
}

/// Moments for one DL UE `n`. Vectors run over DL APs.
#[derive(Debug, Clone)]
pub struct DlMoments {
    /// `E[d_nq]` for every DL UE `q`, with `[d_nq]_j = f_jn^H p_jq`.
    pub mean: Vec<DVector<C64>>,
    pub second: Vec<DMatrix<C64>>,
    /// `sum_k E_k E|g_nk|^2`.
    pub iue: f64,
}

#[derive(Debug, Clone)]
pub struct McStats {
    pub trials: usize,
    pub ul: Vec<UlMoments>,
    pub dl: Vec<DlMoments>,
    pub e_u: Vec<f64>,
    pub e_d: f64,
    pub noise: f64,
}

fn quad(w: &DVector<C64>, a: &DMatrix<C64>) -> f64 {
    (w.adjoint() * a * w)[(0, 0)].re
}

fn quad_real(k: &DVector<f64>, a: &DMatrix<C64>) -> f64 {
    let kc = k.map(|x| C64::new(x, 0.0));
    quad(&kc, a)
}

impl McStats {
    fn zeros(au: usize, ku: usize, ad: usize, kd: usize, power: &PowerAllocation, noise: f64) -> Self {
        let ul = (0..ku)
            .map(|_| UlMoments {
                mean: vec![DVector::zeros(au); ku],
                second: vec![DMatrix::zeros(au, au); ku],
                cross: DMatrix::zeros(au, au),
                vnorm: DVector::zeros(au),
                second_cond: vec![DMatrix::zeros(au, au); ku],
                cross_cond: DVector::zeros(au),
            })
            .collect();
        let dl = (0..kd)
            .map(|_| DlMoments {
                mean: vec![DVector::zeros(ad); kd],
                second: vec![DMatrix::zeros(ad, ad); kd],
                iue: 0.0,
            })
            .collect();
        Self { trials: 0, ul, dl, e_u: power.e_u.clone(), e_d: power.e_d, noise }
    }

    fn add(&mut self, o: &McStats) {
        self.trials += o.trials;
        for (a, b) in self.ul.iter_mut().zip(&o.ul) {
            for i in 0..a.mean.len() {
                a.mean[i] += &b.mean[i];
                a.second[i] += &b.second[i];
                a.second_cond[i] += &b.second_cond[i];
            }
            a.cross += &b.cross;
            a.vnorm += &b.vnorm;
            a.cross_cond += &b.cross_cond;
        }
        for (a, b) in self.dl.iter_mut().zip(&o.dl) {
            for q in 0..a.mean.len() {
                a.mean[q] += &b.mean[q];
                a.second[q] += &b.second[q];
            }
            a.iue += b.iue;
        }
    }

    fn normalize(&mut self) {
        let t = self.trials as f64;
        let tc = C64::new(1.0 / t, 0.0);
        for a in &mut self.ul {
            for i in 0..a.mean.len() {
                a.mean[i] *= tc;
                a.second[i] *= tc;
                a.second_cond[i] *= tc;
            }
            a.cross *= tc;
            a.vnorm /= t;
            a.cross_cond /= t;
        }
        for a in &mut self.dl {
            for q in 0..a.mean.len() {
                a.mean[q] *= tc;
                a.second[q] *= tc;
            }
            a.iue /= t;
        }
    }

    /// UL SINR components for the given weights, in unscaled form.
    pub fn ul_terms(&self, weights: &UplinkWeights) -> Vec<UlTerms> {
        let e = &self.e_u;
        (0..self.ul.len())
            .map(|k| {
                let w = weights.omega.column(k).into_owned();
                let mo = &self.ul[k];
                let proj = |i: usize| w.dotc(&mo.mean[i]).norm_sqr();
                let signal = e[k] * proj(k);
                let mut est = 0.0;
                let mut mui = 0.0;
                for i in 0..e.len() {
                    est += e[i] * (quad(&w, &mo.second[i]) - proj(i));
                    if i != k {
                        mui += e[i] * proj(i);
                    }
                }
                let iap = quad(&w, &mo.cross);
                let noise = self.noise * w.iter().zip(mo.vnorm.iter()).map(|(x, v)| x.norm_sqr() * v).sum::<f64>();
                UlTerms { signal, est, mui, iap, noise }
            })
            .collect()
    }

    pub fn ul_sinr(&self, weights: &UplinkWeights) -> Vec<f64> {
        self.ul_terms(weights).iter().map(UlTerms::sinr).collect()
    }

    /// DL SINR components for the given coefficients (|A_d| x |U_d|).
    pub fn dl_terms(&self, kappa: &DMatrix<f64>) -> Vec<DlTerms> {
        let ed = self.e_d;
        (0..self.dl.len())
            .map(|n| {
                let mo = &self.dl[n];
                let kq = |q: usize| kappa.column(q).into_owned();
                let proj = |q: usize| kq(q).map(|x| C64::new(x, 0.0)).dot(&mo.mean[q]).norm_sqr();
                let signal = ed * proj(n);
                let mut est = 0.0;
                let mut mui = 0.0;
                for q in 0..self.dl.len() {
                    est += ed * (quad_real(&kq(q), &mo.second[q]) - proj(q));
                    if q != n {
                        mui += ed * proj(q);
                    }
                }
                DlTerms { signal, est, mui, iue: mo.iue, noise: self.noise }
            })
            .collect()
    }

    pub fn dl_sinr(&self, kappa: &DMatrix<f64>) -> Vec<f64> {
        self.dl_terms(kappa).iter().map(DlTerms::sinr).collect()
    }

    /// Weights maximizing each UE's estimated SINR, `R_k^-1 E[u_kk]`.
    ///
    /// `R_k` is built from the conditional moments. Per-AP gains span many
    /// decades, and plain sample off-diagonals between a strong and a weak AP
    /// are noisier than the weak AP's diagonal at any feasible trial count.
    pub fn optimal_weights(&self) -> UplinkWeights {
        let ku = self.ul.len();
        let au = self.ul.first().map_or(0, |m| m.vnorm.len());
        let mut omega = DMatrix::zeros(au, ku);
        for k in 0..ku {
            let mo = &self.ul[k];
            let mut r = DMatrix::from_diagonal(&mo.cross_cond.map(|x| C64::new(x, 0.0)));
            for i in 0..ku {
                r += &mo.second_cond[i] * C64::new(self.e_u[i], 0.0);
            }
            r -= (&mo.mean[k] * mo.mean[k].adjoint()) * C64::new(self.e_u[k], 0.0);
            for m in 0..au {
                r[(m, m)] += C64::new(self.noise * mo.vnorm[m], 0.0);
            }
            let w = r.clone().cholesky().map(|c| c.solve(&mo.mean[k])).or_else(|| r.lu().solve(&mo.mean[k]));
            if let Some(w) = w {
                omega.set_column(k, &w);
            }
        }
        UplinkWeights { omega }
    }
}

/// Pseudo-inverse columns `W (W^H W)^-1`.
fn zf_basis(a: &ArrayDraw, ap: usize) -> Result<DMatrix<C64>> {
    let g = a.w.adjoint() * &a.w;
    let inv = g.try_inverse().ok_or(Error::RankDeficient { ap })?;
    Ok(&a.w * inv)
}

struct Ctx<'a> {
    sc: &'a Scenario,
    duplex: &'a DuplexConfig,
    power: &'a PowerAllocation,
    combiner: CombinerKind,
    precoder: PrecoderKind,
    n_tx_eff: f64,
}

impl Ctx<'_> {
    /// Combiners of every UL UE at AP `m`, N_rx x |U_u|.
    fn combiner_matrix(&self, arr: &ArrayDraw, m: usize) -> Result<DMatrix<C64>> {
        let sc = self.sc;
        let st = &sc.stats;
        let ul = &sc.geometry.ul_ues;
        let p = self.power;
        let ku = ul.len();
        Ok(match self.combiner {
            CombinerKind::Zf => {
                let b = zf_basis(arr, m)?;
                DMatrix::from_fn(b.nrows(), ku, |r, k| b[(r, sc.pilots.pilot_of[ul[k]])] * st.alpha(m, ul[k]))
            }
            CombinerKind::Mmse => {
                let n = arr.w.nrows();
                let loads: f64 = self
                    .duplex
                    .dl_aps
                    .iter()
                    .enumerate()
                    .map(|(jj, &j)| sc.gains.zeta(m, j) * p.kappa.row(jj).norm_squared())
                    .sum();
                let s: f64 = (0..ku).map(|i| p.e_u[i] * st.alpha2_err[(m, ul[i])]).sum::<f64>()
                    + p.e_d * loads
                    + sc.config.noise_w();
                let mut r = DMatrix::<C64>::identity(n, n) * C64::new(s, 0.0);
                for i in 0..ku {
                    let fh = arr.f_hat.column(ul[i]);
                    r += (fh * fh.adjoint()) * C64::new(p.e_u[i], 0.0);
                }
                let rhs = DMatrix::from_fn(n, ku, |row, k| arr.f_hat[(row, ul[k])]);
                r.cholesky().ok_or(Error::RankDeficient { ap: m })?.solve(&rhs)
            }
        })
    }

    fn one(&self, real: &ChannelRealization, acc: &mut McStats) -> Result<()> {
        let sc = self.sc;
        let st = &sc.stats;
        let pil = &sc.pilots;
        let ul = &sc.geometry.ul_ues;
        let dl = &sc.geometry.dl_ues;
        let (au, ad) = (&self.duplex.ul_aps, &self.duplex.dl_aps);
        let p = self.power;
        let noise = sc.config.noise_w();
        let sed = p.e_d.sqrt();

        // Precoders per DL AP, N_tx x |U_d|.
        let mut precoders: Vec<DMatrix<C64>> = Vec::with_capacity(ad.len());
        for &j in ad {
            let a = real.tx[j].as_ref().expect("tx array drawn");
            let pm = match self.precoder {
                PrecoderKind::Zf => {
                    let b = zf_basis(a, j)?;
                    DMatrix::from_fn(b.nrows(), dl.len(), |r, q| b[(r, pil.pilot_of[dl[q]])] * self.n_tx_eff.sqrt())
                }
                PrecoderKind::Rzf => {
                    let n = a.w.nrows();
                    let edn = p.e_d / dl.len().max(1) as f64;
                    let mut r = DMatrix::<C64>::identity(n, n);
                    let s: f64 = dl.iter().map(|&q| edn * st.alpha2_err[(j, q)]).sum::<f64>() + noise;
                    r *= C64::new(s, 0.0);
                    for &q in dl {
                        let f = a.f_hat.column(q);
                        r += (f * f.adjoint()) * C64::new(edn, 0.0);
                    }
                    let rhs = DMatrix::from_fn(n, dl.len(), |row, q| a.f_hat[(row, dl[q])]);
                    let mut sol = r.cholesky().ok_or(Error::RankDeficient { ap: j })?.solve(&rhs);
                    for mut c in sol.column_iter_mut() {
                        let nn = c.norm();
                        if nn > 0.0 {
                            c.unscale_mut(nn);
                        }
                    }
                    sol
                }
            };
            precoders.push(pm);
        }

        // UL: soft estimates u_ki at every UL AP.
        let ku = ul.len();
        let mut u = vec![DMatrix::<C64>::zeros(au.len(), ku); ku]; // u[k][(m, i)]
        let mut u_hat = u.clone();
        let mut a_kn = vec![DMatrix::<C64>::zeros(au.len(), dl.len()); ku];
        let mut vn = DMatrix::<f64>::zeros(au.len(), ku); // ||v_mk||^2
                                                          // Cross-link power per unit combiner norm, given the precoders.
        let loads: Vec<f64> = (0..ad.len())
            .map(|jj| {
                (0..dl.len()).map(|n| p.e_d * p.kappa[(jj, n)].powi(2) * precoders[jj].column(n).norm_squared()).sum()
            })
            .collect();
        for (mi, &m) in au.iter().enumerate() {
            let arr = real.rx[m].as_ref().expect("rx array drawn");
            let f = arr.f();
            let v = self.combiner_matrix(arr, m)?;
            let fu = DMatrix::from_fn(f.nrows(), ku, |r, i| f[(r, ul[i])]);
            let proj = v.adjoint() * fu; // (k, i)
            let fh = DMatrix::from_fn(f.nrows(), ku, |r, i| arr.f_hat[(r, ul[i])]);
            let proj_hat = v.adjoint() * fh;
            for k in 0..ku {
                for i in 0..ku {
                    u[k][(mi, i)] = proj[(k, i)];
                    u_hat[k][(mi, i)] = proj_hat[(k, i)];
                }
                vn[(mi, k)] = v.column(k).norm_squared();
                acc.ul[k].vnorm[mi] += vn[(mi, k)];
                acc.ul[k].cross_cond[mi] +=
                    vn[(mi, k)] * ad.iter().zip(&loads).map(|(&j, l)| sc.gains.zeta(m, j) * l).sum::<f64>();
            }
            for (jj, &j) in ad.iter().enumerate() {
                let g = real.g(m, j).expect("cross-AP channel drawn");
                let h = g * &precoders[jj]; // N_rx x |U_d|
                let t = v.adjoint() * h; // (k, n)
                for k in 0..ku {
                    for n in 0..dl.len() {
                        a_kn[k][(mi, n)] += t[(k, n)] * (sed * p.kappa[(jj, n)]);
                    }
                }
            }
        }
        for k in 0..ku {
            let mo = &mut acc.ul[k];
            for i in 0..ku {
                let hat = u_hat[k].column(i);
                let err = u[k].column(i) - hat;
                mo.mean[i] += hat;
                mo.second[i] += hat * hat.adjoint() + &err * err.adjoint();
                mo.second_cond[i] += hat * hat.adjoint();
                for (mi, &m) in au.iter().enumerate() {
                    mo.second_cond[i][(mi, mi)] += vn[(mi, k)] * st.alpha2_err[(m, ul[i])];
                }
            }
            for n in 0..dl.len() {
                let col = a_kn[k].column(n);
                mo.cross += col * col.adjoint();
            }
        }

        // DL: effective gains d_nq over DL APs.
        let kd = dl.len();
        let mut d = vec![DMatrix::<C64>::zeros(ad.len(), kd); kd]; // d[n][(j, q)]
        let mut d_hat = d.clone();
        for (jj, &j) in ad.iter().enumerate() {
            let arr = real.tx[j].as_ref().expect("tx array drawn");
            let f = arr.f();
            let fd = DMatrix::from_fn(f.nrows(), kd, |r, n| f[(r, dl[n])]);
            let fdh = DMatrix::from_fn(f.nrows(), kd, |r, n| arr.f_hat[(r, dl[n])]);
            let g = fd.adjoint() * &precoders[jj]; // (n, q)
            let gh = fdh.adjoint() * &precoders[jj];
            for n in 0..kd {
                for q in 0..kd {
                    d[n][(jj, q)] = g[(n, q)];
                    d_hat[n][(jj, q)] = gh[(n, q)];
                }
            }
        }
        for n in 0..kd {
            let mo = &mut acc.dl[n];
            for q in 0..kd {
                let hat = d_hat[n].column(q);
                let err = d[n].column(q) - hat;
                mo.mean[q] += hat;
                mo.second[q] += hat * hat.adjoint() + &err * err.adjoint();
            }
            mo.iue += (0..ku).map(|k| p.e_u[k] * real.g_ue[(n, k)].norm_sqr()).sum::<f64>();
        }
        acc.trials += 1;
        Ok(())
    }
}

/// Estimate UL/DL moments over `trials` fading realizations.
pub fn run_mc(
    sc: &Scenario,
    duplex: &DuplexConfig,
    power: &PowerAllocation,
    combiner: CombinerKind,
    precoder: PrecoderKind,
    trials: usize,
    seed: u64,
) -> Result<McStats> {
    duplex.validate(sc.geometry.num_aps())?;
    let cfg = &sc.config;
    let tau_p = sc.tau_p();
    if combiner == CombinerKind::Zf && !duplex.ul_aps.is_empty() && cfg.rx_antennas() <= tau_p {
        return Err(Error::TooFewAntennas { antennas: cfg.rx_antennas(), tau_p });
    }
    if precoder == PrecoderKind::Zf && !duplex.dl_aps.is_empty() && cfg.tx_antennas() <= tau_p {
        return Err(Error::TooFewAntennas { antennas: cfg.tx_antennas(), tau_p });
    }
    let ctx = Ctx { sc, duplex, power, combiner, precoder, n_tx_eff: cfg.tx_antennas().saturating_sub(tau_p) as f64 };
    let (au, ku, ad, kd) =
        (duplex.ul_aps.len(), sc.geometry.ul_ues.len(), duplex.dl_aps.len(), sc.geometry.dl_ues.len());
    let noise = cfg.noise_w();
    let layout = ArrayLayout {
        ul_aps: &duplex.ul_aps,
        dl_aps: &duplex.dl_aps,
        n_rx: cfg.rx_antennas(),
        n_tx: cfg.tx_antennas(),
    };
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Result<McStats>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(trial_seed(seed, c as u64), stream::FADING);
            let mut acc = McStats::zeros(au, ku, ad, kd, power, noise);
            let n = CHUNK.min(trials - c * CHUNK);
            for _ in 0..n {
                let real = draw_with(&mut rng, &sc.stats, &sc.gains, &sc.pilots, layout);
                ctx.one(&real, &mut acc)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = McStats::zeros(au, ku, ad, kd, power, noise);
    for p in parts {
        total.add(&p?);
    }
    total.normalize();
    Ok(total)
}

/// Combiners of every UL UE at AP `m` for one realization, N_rx x |U_u|.
pub fn ul_combiners(
    sc: &Scenario,
    duplex: &DuplexConfig,
    power: &PowerAllocation,
    kind: CombinerKind,
    real: &ChannelRealization,
    m: usize,
) -> Result<DMatrix<C64>> {
    let ctx = Ctx { sc, duplex, power, combiner: kind, precoder: PrecoderKind::Zf, n_tx_eff: 0.0 };
    let arr = real.rx[m].as_ref().ok_or_else(|| Error::InvalidConfig(format!("AP {m} has no receive array")))?;
    ctx.combiner_matrix(arr, m)
}

/// Per-UE UL and DL SINR estimates for the given weights and powers.
#[allow(clippy::too_many_arguments)]
pub fn mc_sinr_oracle(
    sc: &Scenario,
    duplex: &DuplexConfig,
    power: &PowerAllocation,
    weights: &UplinkWeights,
    combiner: CombinerKind,
    precoder: PrecoderKind,
    trials: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = run_mc(sc, duplex, power, combiner, precoder, trials, seed)?;
    Ok((s.ul_sinr(weights), s.dl_sinr(&power.kappa)))
}

/// SINR-optimal CPU weights estimated from sample moments.
pub fn mc_optimal_weights(
    sc: &Scenario,
    duplex: &DuplexConfig,
    power: &PowerAllocation,
    combiner: CombinerKind,
    trials: usize,
    seed: u64,
) -> Result<UplinkWeights> {
    Ok(run_mc(sc, duplex, power, combiner, PrecoderKind::Zf, trials, seed)?.optimal_weights())
}

/// Cosine similarity `|<a, b>| / (|a| |b|)` between two weight columns.
pub fn cosine_similarity(a: &DMatrix<C64>, b: &DMatrix<C64>, col: usize) -> f64 {
    let (x, y) = (a.column(col), b.column(col));
    let den = x.norm() * y.norm();
    if den == 0.0 {
        return 0.0;
    }
    x.dotc(&y).norm() / den
}
