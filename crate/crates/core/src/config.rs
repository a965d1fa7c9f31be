//! System configuration. Keys ending in `_db`/`_dbm` are logarithmic;
//! powers without a suffix are linear watts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DuplexMode {
    #[default]
    Dtdd,
    Fd,
}

/// Three-slope path loss. When `l_db` is `None` the far-slope intercept comes
/// from the COST-231 Hata form with the carrier and antenna heights below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThreeSlope {
    pub l_db: Option<f64>,
    pub d0_m: f64,
    pub d1_m: f64,
    pub carrier_mhz: f64,
    pub ap_height_m: f64,
    pub ue_height_m: f64,
}

impl Default for ThreeSlope {
    fn default() -> Self {
        Self { l_db: None, d0_m: 10.0, d1_m: 50.0, carrier_mhz: 1900.0, ap_height_m: 15.0, ue_height_m: 1.65 }
    }
}

impl ThreeSlope {
    pub fn intercept_db(&self) -> f64 {
        if let Some(l) = self.l_db {
            return l;
        }
        let f = self.carrier_mhz.log10();
        46.3 + 33.9 * f - 13.82 * self.ap_height_m.log10() - (1.1 * f - 0.7) * self.ue_height_m + (1.56 * f - 0.8)
    }
}

/// Single-slope model `beta(d) = (d / d0)^-exponent`, used only to size the
/// cluster radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimplePathLoss {
    pub d0_m: f64,
    pub exponent: f64,
}

impl Default for SimplePathLoss {
    fn default() -> Self {
        Self { d0_m: 20.0, exponent: 3.76 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub duplex: DuplexMode,
    pub area_side_m: f64,
    pub num_aps: usize,
    /// Array size of a half-duplex AP.
    pub antennas_per_ap: usize,
    /// Transmit and receive array sizes of a full-duplex AP.
    pub n_tx: usize,
    pub n_rx: usize,
    pub num_ues: usize,
    /// Fraction of UEs with uplink demand; `floor(ul_fraction * K)` are UL.
    pub ul_fraction: f64,
    pub coherence_len: usize,
    /// Pilot SNR at the reference distance `simple_pl.d0_m`.
    pub pilot_snr_db: f64,
    /// Optional per-UE pilot SNR; overrides `pilot_snr_db` when present.
    pub pilot_snr_per_ue_db: Option<Vec<f64>>,
    pub noise_power_dbm: f64,
    /// Informational; the noise power is given directly.
    pub bandwidth_hz: f64,
    pub shadow_sigma_db: f64,
    pub shadow_all_slopes: bool,
    pub pathloss_threeslope: ThreeSlope,
    pub simple_pl: SimplePathLoss,
    pub gamma_min_db: f64,
    /// Multiplier on the cluster radius. Values below 1 void the coverage
    /// guarantee and are rejected.
    pub r_o_scale: f64,
    pub inai_rel_noise_db: f64,
    pub irai_rel_noise_db: f64,
    /// Scale inter-AP gains by normalized AP-AP path loss instead of a flat level.
    pub inai_distance_based: bool,
    pub ul_power_max: f64,
    pub dl_power_total: f64,
    pub delta_u: f64,
    pub delta_d: f64,
    pub delta_admm: f64,
    pub admm_penalty: f64,
    pub max_inner_iter: usize,
    pub max_outer_iter: usize,
    /// Re-solve the CPU weights after each uplink power update.
    pub refine_weights: bool,
    pub mc_trials: usize,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            duplex: DuplexMode::Dtdd,
            area_side_m: 1000.0,
            num_aps: 16,
            antennas_per_ap: 8,
            n_tx: 4,
            n_rx: 4,
            num_ues: 16,
            ul_fraction: 0.5,
            coherence_len: 200,
            pilot_snr_db: 20.0,
            pilot_snr_per_ue_db: None,
            noise_power_dbm: -92.0,
            bandwidth_hz: 20e6,
            shadow_sigma_db: 6.0,
            shadow_all_slopes: false,
            pathloss_threeslope: ThreeSlope::default(),
            simple_pl: SimplePathLoss::default(),
            gamma_min_db: 0.0,
            r_o_scale: 1.0,
            inai_rel_noise_db: -40.0,
            irai_rel_noise_db: -40.0,
            inai_distance_based: false,
            ul_power_max: 0.1,
            dl_power_total: 1.0,
            delta_u: 1e-3,
            delta_d: 1e-3,
            delta_admm: 1e-3,
            admm_penalty: 1e-3,
            max_inner_iter: 500,
            max_outer_iter: 20,
            refine_weights: true,
            mc_trials: 1000,
            seed: 1,
        }
    }
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl SystemConfig {
    /// Desk-scale defaults: M = 16, K = 16.
    pub fn desk() -> Self {
        Self::default()
    }

    /// Full-scale defaults (the `paper` profile): M = 64, K = 40.
    pub fn paper() -> Self {
        Self { num_aps: 64, num_ues: 40, ..Self::default() }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn noise_w(&self) -> f64 {
        db_to_lin(self.noise_power_dbm - 30.0)
    }

    pub fn num_ul_ues(&self) -> usize {
        (self.ul_fraction * self.num_ues as f64 + 1e-9).floor() as usize
    }

    /// Receive array size used for uplink combining.
    pub fn rx_antennas(&self) -> usize {
        match self.duplex {
            DuplexMode::Dtdd => self.antennas_per_ap,
            DuplexMode::Fd => self.n_rx,
        }
    }

    /// Transmit array size used for downlink precoding.
    pub fn tx_antennas(&self) -> usize {
        match self.duplex {
            DuplexMode::Dtdd => self.antennas_per_ap,
            DuplexMode::Fd => self.n_tx,
        }
    }

    /// Smallest array involved; ZF needs it to exceed `tau_p`.
    pub fn min_array(&self) -> usize {
        self.rx_antennas().min(self.tx_antennas())
    }

    pub fn zeta_inap_level(&self) -> f64 {
        db_to_lin(self.inai_rel_noise_db) * self.noise_w()
    }

    pub fn zeta_si_level(&self) -> f64 {
        db_to_lin(self.irai_rel_noise_db) * self.noise_w()
    }

    /// Three-slope gain (linear, no shadowing) at distance `d_m`, clamped to 1 m.
    pub fn path_gain(&self, d_m: f64) -> f64 {
        db_to_lin(self.path_gain_db(d_m))
    }

    pub fn path_gain_db(&self, d_m: f64) -> f64 {
        let p = &self.pathloss_threeslope;
        let l = p.intercept_db();
        let d = d_m.max(1.0) / 1000.0;
        let d0 = p.d0_m / 1000.0;
        let d1 = p.d1_m / 1000.0;
        if d > d1 {
            -l - 35.0 * d.log10()
        } else if d > d0 {
            -l - 15.0 * d1.log10() - 20.0 * d.log10()
        } else {
            -l - 15.0 * d1.log10() - 20.0 * d0.log10()
        }
    }

    /// Pilot transmit power per UE. The pilot SNR is referenced to the
    /// three-slope gain at `simple_pl.d0_m`, the same anchor the cluster
    /// radius uses, so `E_p * beta(d0) / N0` equals the configured SNR.
    pub fn pilot_powers(&self) -> Vec<f64> {
        let scale = self.noise_w() / self.path_gain(self.simple_pl.d0_m);
        match &self.pilot_snr_per_ue_db {
            Some(v) => v.iter().map(|&s| db_to_lin(s) * scale).collect(),
            None => vec![db_to_lin(self.pilot_snr_db) * scale; self.num_ues],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.num_aps == 0 || self.num_ues == 0 {
            return bad("num_aps and num_ues must be at least 1");
        }
        if self.antennas_per_ap == 0 || self.n_tx == 0 || self.n_rx == 0 {
            return bad("antenna counts must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.ul_fraction) {
            return bad("ul_fraction must lie in [0, 1]");
        }
        if self.coherence_len == 0 {
            return bad("coherence_len must be positive");
        }
        let positive = [
            ("area_side_m", self.area_side_m),
            ("ul_power_max", self.ul_power_max),
            ("dl_power_total", self.dl_power_total),
            ("delta_u", self.delta_u),
            ("delta_d", self.delta_d),
            ("delta_admm", self.delta_admm),
            ("admm_penalty", self.admm_penalty),
            ("simple_pl.d0_m", self.simple_pl.d0_m),
            ("simple_pl.exponent", self.simple_pl.exponent),
            ("pathloss_threeslope.d0_m", self.pathloss_threeslope.d0_m),
            ("bandwidth_hz", self.bandwidth_hz),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive and finite")));
            }
        }
        if self.pathloss_threeslope.d1_m < self.pathloss_threeslope.d0_m {
            return bad("pathloss_threeslope.d1_m must be >= d0_m");
        }
        if self.shadow_sigma_db < 0.0 {
            return bad("shadow_sigma_db must be non-negative");
        }
        if !(self.r_o_scale.is_finite() && self.r_o_scale >= 1.0) {
            return bad("r_o_scale must be >= 1");
        }
        if let Some(v) = &self.pilot_snr_per_ue_db {
            if v.len() != self.num_ues {
                return bad("pilot_snr_per_ue_db length must equal num_ues");
            }
        }
        let finite = [
            self.pilot_snr_db,
            self.noise_power_dbm,
            self.gamma_min_db,
            self.inai_rel_noise_db,
            self.irai_rel_noise_db,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("dB parameters must be finite");
        }
        if self.max_inner_iter == 0 || self.max_outer_iter == 0 {
            return bad("iteration caps must be positive");
        }
        Ok(())
    }
}
