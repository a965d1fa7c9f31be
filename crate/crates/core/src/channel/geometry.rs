use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::rng::{stream, stream_rng};

pub type Point = [f64; 2];

pub fn distance(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// AP and UE positions plus the UL/DL split of the UEs. Both UE sets are
/// sorted ascending and together cover `0..K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGeometry {
    pub area_side_m: f64,
    pub ap_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    pub ul_ues: Vec<usize>,
    pub dl_ues: Vec<usize>,
}

impl NetworkGeometry {
    pub fn num_aps(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn num_ues(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn ap_ue_distance(&self, m: usize, k: usize) -> f64 {
        distance(self.ap_positions[m], self.ue_positions[k])
    }

    /// Build from explicit positions; the first `num_ul` listed UEs are UL.
    pub fn from_positions(area_side_m: f64, aps: Vec<Point>, ues: Vec<Point>, num_ul: usize) -> Self {
        let k = ues.len();
        Self {
            area_side_m,
            ap_positions: aps,
            ue_positions: ues,
            ul_ues: (0..num_ul).collect(),
            dl_ues: (num_ul..k).collect(),
        }
    }
}

/// APs on a grid with `ceil(sqrt(M))` columns. When M is not a multiple of
/// the column count the last row is partial, laid out row-major.
pub fn ap_grid(m: usize, side: f64) -> Vec<Point> {
    let cols = (m as f64).sqrt().ceil() as usize;
    let rows = m.div_ceil(cols);
    let dx = side / cols as f64;
    let dy = side / rows as f64;
    (0..m)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            [(c as f64 + 0.5) * dx, (r as f64 + 0.5) * dy]
        })
        .collect()
}

pub fn generate_geometry(config: &SystemConfig, seed: u64) -> NetworkGeometry {
    let side = config.area_side_m;
    let mut rng = stream_rng(seed, stream::GEOMETRY);
    let ues: Vec<Point> =
        (0..config.num_ues).map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side]).collect();

    let mut order: Vec<usize> = (0..config.num_ues).collect();
    order.shuffle(&mut stream_rng(seed, stream::ROLES));
    let n_ul = config.num_ul_ues();
    let mut ul_ues = order[..n_ul].to_vec();
    let mut dl_ues = order[n_ul..].to_vec();
    ul_ues.sort_unstable();
    dl_ues.sort_unstable();

    NetworkGeometry {
        area_side_m: side,
        ap_positions: ap_grid(config.num_aps, side),
        ue_positions: ues,
        ul_ues,
        dl_ues,
    }
}
