//! One network drop with everything downstream of the geometry: gains,
//! clusters, pilots and estimation statistics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{
    estimation_coefficients, generate_geometry, large_scale_fading, EstimateStats, LargeScaleGains, NetworkGeometry,
};
use crate::config::SystemConfig;
use crate::error::Result;
use crate::pilot::{
    build_connectivity, color_graph, compute_r_o, conflict_graph, orthogonal_assignment, random_assignment,
    ConflictGraph, ConnectivityGraph, PilotAssignment,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PilotScheme {
    /// Greedy coloring of the conflict graph.
    #[default]
    Coloring,
    /// One pilot per UE.
    Orthogonal,
    /// As many pilots as the coloring uses, assigned at random.
    Random,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: SystemConfig,
    pub geometry: NetworkGeometry,
    pub gains: LargeScaleGains,
    pub connectivity: ConnectivityGraph,
    pub conflict: ConflictGraph,
    pub pilots: PilotAssignment,
    pub stats: EstimateStats,
    pub pilot_power: Vec<f64>,
}

impl Scenario {
    pub fn generate(config: &SystemConfig, seed: u64) -> Result<Self> {
        Self::generate_with(config, seed, PilotScheme::Coloring)
    }

    pub fn generate_with(config: &SystemConfig, seed: u64, scheme: PilotScheme) -> Result<Self> {
        config.validate()?;
        let geometry = generate_geometry(config, seed);
        let gains = large_scale_fading(&geometry, config, seed);
        Self::assemble(config, geometry, gains, seed, scheme)
    }

    /// Pilots and statistics for a given geometry and gain set.
    pub fn assemble(
        config: &SystemConfig,
        geometry: NetworkGeometry,
        gains: LargeScaleGains,
        seed: u64,
        scheme: PilotScheme,
    ) -> Result<Self> {
        let r_o = compute_r_o(&geometry, config)?;
        let connectivity = build_connectivity(&geometry, r_o);
        let conflict = conflict_graph(&connectivity);
        let colored = color_graph(&conflict, seed);
        let k = geometry.num_ues();
        let pilots = match scheme {
            PilotScheme::Coloring => colored,
            PilotScheme::Orthogonal => orthogonal_assignment(k),
            PilotScheme::Random => random_assignment(k, colored.tau_p, seed),
        };
        let pilot_power = config.pilot_powers();
        let stats = estimation_coefficients(&gains.beta, &pilots, &pilot_power, config.noise_w());
        Ok(Self { config: config.clone(), geometry, gains, connectivity, conflict, pilots, stats, pilot_power })
    }

    /// Scenario from given statistics rather than a random drop. All
    /// UEs and APs sit at the origin, cross gains are zero and every entry
    /// of `beta - alpha2` becomes estimation error. Useful for hand-checked
    /// cases.
    pub fn synthetic(
        config: SystemConfig,
        beta: DMatrix<f64>,
        alpha2: DMatrix<f64>,
        pilots: Vec<usize>,
        ul_ues: Vec<usize>,
        dl_ues: Vec<usize>,
    ) -> Self {
        let (m, k) = beta.shape();
        let mut geometry =
            NetworkGeometry::from_positions(config.area_side_m, vec![[0.0, 0.0]; m], vec![[0.0, 0.0]; k], 0);
        geometry.ul_ues = ul_ues;
        geometry.dl_ues = dl_ues;
        let pilots = PilotAssignment::from_labels(pilots);
        let mut stats = estimation_coefficients(&beta, &pilots, &vec![1.0; k], config.noise_w());
        stats.alpha2_err = &beta - &alpha2;
        stats.alpha2 = alpha2;
        let gains = LargeScaleGains {
            beta,
            zeta_inap: DMatrix::zeros(m, m),
            zeta_si: DVector::zeros(m),
            epsilon: DMatrix::zeros(geometry.dl_ues.len(), geometry.ul_ues.len()),
        };
        let connectivity = build_connectivity(&geometry, 0.0);
        Self {
            config,
            geometry,
            gains,
            connectivity,
            conflict: ConflictGraph::from_edges(k, &[]),
            pilots,
            stats,
            pilot_power: vec![1.0; k],
        }
    }

    pub fn tau_p(&self) -> usize {
        self.pilots.tau_p
    }

    /// Pre-log factor `(tau - tau_p) / tau`, floored at zero.
    pub fn prelog(&self) -> f64 {
        let tau = self.config.coherence_len as f64;
        ((tau - self.tau_p() as f64) / tau).max(0.0)
    }

    /// ZF needs both arrays strictly larger than the pilot length.
    pub fn zf_feasible(&self) -> bool {
        self.config.min_array() > self.tau_p()
    }
}
