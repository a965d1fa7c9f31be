use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::geometry::{distance, NetworkGeometry};
use crate::config::{db_to_lin, SystemConfig};
use crate::rng::{stream, stream_rng};

/// Large-scale gains, all linear.
///
/// A full-duplex AP's transmit and receive arrays are co-located, so both see
/// the same `beta`; `beta_ul`/`beta_dl` are views onto it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleGains {
    /// M x K, AP to UE.
    pub beta: DMatrix<f64>,
    /// M x M inter-AP gain. The diagonal is zero; self-interference lives in `zeta_si`.
    pub zeta_inap: DMatrix<f64>,
    pub zeta_si: DVector<f64>,
    /// |U_d| x |U_u|, UL UE to DL UE, indexed in the geometry's set order.
    pub epsilon: DMatrix<f64>,
}

impl LargeScaleGains {
    pub fn beta_ul(&self) -> &DMatrix<f64> {
        &self.beta
    }

    pub fn beta_dl(&self) -> &DMatrix<f64> {
        &self.beta
    }

    /// Cross-AP gain seen by receiver `m` from transmitter `j`: self-interference
    /// when `m == j`, inter-AP interference otherwise.
    pub fn zeta(&self, m: usize, j: usize) -> f64 {
        if m == j {
            self.zeta_si[m]
        } else {
            self.zeta_inap[(m, j)]
        }
    }
}

pub fn large_scale_fading(geom: &NetworkGeometry, config: &SystemConfig, seed: u64) -> LargeScaleGains {
    let m = geom.num_aps();
    let k = geom.num_ues();
    let mut rng = stream_rng(seed, stream::SHADOW);
    let d1 = config.pathloss_threeslope.d1_m;
    let sigma = config.shadow_sigma_db;

    // Draw every shadowing sample even when unused so the stream does not
    // shift with geometry.
    let beta = DMatrix::from_fn(m, k, |mi, ki| {
        let z: f64 = StandardNormal.sample(&mut rng);
        let d = geom.ap_ue_distance(mi, ki);
        let shadow = if config.shadow_all_slopes || d > d1 { sigma * z } else { 0.0 };
        db_to_lin(config.path_gain_db(d) + shadow)
    });

    let level = config.zeta_inap_level();
    let zeta_inap = if config.inai_distance_based {
        let ap = &geom.ap_positions;
        let pl = DMatrix::from_fn(m, m, |a, b| if a == b { 0.0 } else { config.path_gain(distance(ap[a], ap[b])) });
        let peak = pl.max();
        if peak > 0.0 {
            pl * (level / peak)
        } else {
            pl
        }
    } else {
        DMatrix::from_fn(m, m, |a, b| if a == b { 0.0 } else { level })
    };
    let zeta_si = DVector::from_element(m, config.zeta_si_level());

    let epsilon = DMatrix::from_fn(geom.dl_ues.len(), geom.ul_ues.len(), |n, u| {
        let a = geom.ue_positions[geom.dl_ues[n]];
        let b = geom.ue_positions[geom.ul_ues[u]];
        config.path_gain(distance(a, b))
    });

    LargeScaleGains { beta, zeta_inap, zeta_si, epsilon }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::geometry::NetworkGeometry;

    fn line_geometry(ds: &[f64]) -> NetworkGeometry {
        let ues = ds.iter().map(|&d| [d, 0.0]).collect();
        NetworkGeometry::from_positions(1000.0, vec![[0.0, 0.0]], ues, 0)
    }

    #[test]
    fn no_shadow_is_monotone_in_distance() {
        let c = SystemConfig { shadow_sigma_db: 0.0, ..Default::default() };
        let ds: Vec<f64> = (1..40).map(|i| 60.0 + 20.0 * i as f64).collect();
        let g = large_scale_fading(&line_geometry(&ds), &c, 1);
        for w in 0..ds.len() - 1 {
            assert!(g.beta[(0, w)] > g.beta[(0, w + 1)]);
        }
    }

    #[test]
    fn equal_distance_equal_gain() {
        let c = SystemConfig { shadow_sigma_db: 0.0, ..Default::default() };
        let geom =
            NetworkGeometry::from_positions(1000.0, vec![[500.0, 500.0]], vec![[700.0, 500.0], [500.0, 300.0]], 1);
        let g = large_scale_fading(&geom, &c, 9);
        assert!((g.beta[(0, 0)] / g.beta[(0, 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_range_is_not_shadowed() {
        let c = SystemConfig::default();
        let g = large_scale_fading(&line_geometry(&[30.0, 30.0, 30.0]), &c, 5);
        let expect = c.path_gain(30.0);
        for k in 0..3 {
            assert!((g.beta[(0, k)] / expect - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn inai_level_relative_to_noise() {
        let c = SystemConfig { num_aps: 4, inai_rel_noise_db: -40.0, ..Default::default() };
        let geom = crate::channel::geometry::generate_geometry(&c, 2);
        let g = large_scale_fading(&geom, &c, 2);
        let want = 1e-4 * 10f64.powf(-12.2);
        for a in 0..4 {
            for b in 0..4 {
                let v = g.zeta_inap[(a, b)];
                if a == b {
                    assert_eq!(v, 0.0);
                } else {
                    assert!((v / want - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn zero_distance_is_clamped() {
        let c = SystemConfig { shadow_sigma_db: 0.0, ..Default::default() };
        let g = large_scale_fading(&line_geometry(&[0.0]), &c, 1);
        assert!(g.beta[(0, 0)].is_finite());
    }
}
