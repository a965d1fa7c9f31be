//! Small-scale fading draws for Monte Carlo validation.
//!
//! The MMSE estimate of every UE on pilot `l` at AP `m` is a scaled copy of
//! one Gaussian vector, `f_hat_mk = alpha_mk * w_ml`, where `w_ml ~ CN(0, I)`
//! is the whitened pilot observation `Z e_l * sqrt(c_ml)`. The error is drawn
//! independently with variance `beta - alpha2`.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::estimation::EstimateStats;
use super::fading::LargeScaleGains;
use crate::pilot::PilotAssignment;
use crate::rng::{stream, stream_rng};

pub type C64 = Complex<f64>;

/// `CN(0, var)` sample.
pub fn cn<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}

pub fn cn_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, var: f64) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| cn(rng, var))
}

/// One antenna array's channels toward all UEs.
#[derive(Debug, Clone)]
pub struct ArrayDraw {
    /// N x tau_p whitened pilot observation.
    pub w: DMatrix<C64>,
    /// N x K estimates and errors.
    pub f_hat: DMatrix<C64>,
    pub f_err: DMatrix<C64>,
}

impl ArrayDraw {
    pub fn f(&self) -> DMatrix<C64> {
        &self.f_hat + &self.f_err
    }

    /// Un-whitened pilot observation `Z` for AP `m`.
    pub fn z(&self, stats: &EstimateStats, pilots: &PilotAssignment, m: usize) -> DMatrix<C64> {
        let mut z = self.w.clone();
        for (l, set) in pilots.copilot_sets.iter().enumerate() {
            if let Some(&u) = set.first() {
                let s = 1.0 / stats.c[(m, u)].sqrt();
                z.column_mut(l).scale_mut(s);
            }
        }
        z
    }
}

pub fn draw_array<R: Rng + ?Sized>(
    rng: &mut R,
    antennas: usize,
    m: usize,
    stats: &EstimateStats,
    pilots: &PilotAssignment,
) -> ArrayDraw {
    let k = stats.alpha2.ncols();
    let w = cn_matrix(rng, antennas, pilots.tau_p, 1.0);
    let mut f_hat = DMatrix::zeros(antennas, k);
    let mut f_err = DMatrix::zeros(antennas, k);
    for u in 0..k {
        let a = stats.alpha(m, u);
        let l = pilots.pilot_of[u];
        f_hat.column_mut(u).copy_from(&(w.column(l) * C64::from(a)));
        let var = stats.alpha2_err[(m, u)].max(0.0);
        for i in 0..antennas {
            f_err[(i, u)] = cn(rng, var);
        }
    }
    ArrayDraw { w, f_hat, f_err }
}

/// All fading terms for one coherence block.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Receive arrays, present for UL-capable APs.
    pub rx: Vec<Option<ArrayDraw>>,
    /// Transmit arrays, present for DL-capable APs.
    pub tx: Vec<Option<ArrayDraw>>,
    /// `g_ap[m * M + j]`: n_rx x n_tx channel from AP j's transmitter to AP m's
    /// receiver. The diagonal holds self-interference.
    pub g_ap: Vec<Option<DMatrix<C64>>>,
    /// |U_d| x |U_u| UE-to-UE scalars.
    pub g_ue: DMatrix<C64>,
    num_aps: usize,
}

impl ChannelRealization {
    pub fn g(&self, m: usize, j: usize) -> Option<&DMatrix<C64>> {
        self.g_ap[m * self.num_aps + j].as_ref()
    }

    pub fn g_si(&self, m: usize) -> Option<&DMatrix<C64>> {
        self.g(m, m)
    }
}

/// Which arrays a realization needs.
#[derive(Debug, Clone, Copy)]
pub struct ArrayLayout<'a> {
    pub ul_aps: &'a [usize],
    pub dl_aps: &'a [usize],
    pub n_rx: usize,
    pub n_tx: usize,
}

pub fn draw_with<R: Rng + ?Sized>(
    rng: &mut R,
    stats: &EstimateStats,
    gains: &LargeScaleGains,
    pilots: &PilotAssignment,
    layout: ArrayLayout<'_>,
) -> ChannelRealization {
    let m_total = stats.alpha2.nrows();
    let mut rx = vec![None; m_total];
    let mut tx = vec![None; m_total];
    for &m in layout.ul_aps {
        rx[m] = Some(draw_array(rng, layout.n_rx, m, stats, pilots));
    }
    for &j in layout.dl_aps {
        tx[j] = Some(draw_array(rng, layout.n_tx, j, stats, pilots));
    }
    let mut g_ap = vec![None; m_total * m_total];
    for &m in layout.ul_aps {
        for &j in layout.dl_aps {
            let z = gains.zeta(m, j);
            g_ap[m * m_total + j] = Some(cn_matrix(rng, layout.n_rx, layout.n_tx, z));
        }
    }
    let eps = &gains.epsilon;
    let g_ue = DMatrix::from_fn(eps.nrows(), eps.ncols(), |n, k| cn(rng, eps[(n, k)]));
    ChannelRealization { rx, tx, g_ap, g_ue, num_aps: m_total }
}

pub fn draw_realization(
    stats: &EstimateStats,
    gains: &LargeScaleGains,
    pilots: &PilotAssignment,
    layout: ArrayLayout<'_>,
    seed: u64,
) -> ChannelRealization {
    let mut rng = stream_rng(seed, stream::FADING);
    draw_with(&mut rng, stats, gains, pilots, layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::estimation::estimation_coefficients;
    use nalgebra::DVector;

    fn setup() -> (EstimateStats, LargeScaleGains, PilotAssignment) {
        let beta = DMatrix::from_row_slice(1, 2, &[2.0, 0.5]);
        let pilots = PilotAssignment::from_labels(vec![0, 0]);
        let stats = estimation_coefficients(&beta, &pilots, &[1.0, 1.0], 0.4);
        let gains = LargeScaleGains {
            beta,
            zeta_inap: DMatrix::zeros(1, 1),
            zeta_si: DVector::from_element(1, 0.3),
            epsilon: DMatrix::from_element(1, 1, 0.0),
        };
        (stats, gains, pilots)
    }

    #[test]
    fn zero_variance_draws_are_zero() {
        let mut rng = stream_rng(1, 0);
        assert!((0..10).all(|_| cn(&mut rng, 0.0) == C64::new(0.0, 0.0)));
        let (s, g, p) = setup();
        let r = draw_realization(&s, &g, &p, ArrayLayout { ul_aps: &[0], dl_aps: &[], n_rx: 4, n_tx: 4 }, 1);
        assert!(r.g_ue.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn sample_variances_match_statistics() {
        let (s, g, p) = setup();
        let mut rng = stream_rng(5, 0);
        let n = 4;
        let trials = 100_000;
        let (mut hat, mut tot) = ([0.0; 2], [0.0; 2]);
        for _ in 0..trials {
            let a = draw_array(&mut rng, n, 0, &s, &p);
            let f = a.f();
            for k in 0..2 {
                hat[k] += a.f_hat.column(k).norm_squared();
                tot[k] += f.column(k).norm_squared();
            }
        }
        for k in 0..2 {
            let h = hat[k] / (trials * n) as f64;
            let t = tot[k] / (trials * n) as f64;
            assert!((h / s.alpha2[(0, k)] - 1.0).abs() < 0.01, "alpha2 {k}: {h}");
            assert!((t / g.beta[(0, k)] - 1.0).abs() < 0.01, "beta {k}: {t}");
        }
    }

    #[test]
    fn estimate_is_scaled_pilot_observation() {
        let (s, _, p) = setup();
        let mut rng = stream_rng(2, 0);
        let a = draw_array(&mut rng, 3, 0, &s, &p);
        let z = a.z(&s, &p, 0);
        // f_hat = c * sqrt(tau_p * E_p) * beta * Z e_l
        let scale = s.c[(0, 0)] * 2.0;
        let diff = (a.f_hat.column(0) - z.column(0) * C64::from(scale)).norm();
        assert!(diff < 1e-12);
    }
}
