//! UE-centric clustering and pilot assignment by greedy graph coloring.
//!
//! Two UEs served by a common AP must use orthogonal pilots, so they are
//! adjacent in the conflict graph. Coloring that graph with few colors keeps
//! the pilot length short.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::geometry::NetworkGeometry;
use crate::config::{db_to_lin, SystemConfig};
use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityGraph {
    pub r_o: f64,
    /// APs within `r_o` of each UE.
    pub ue_clusters: Vec<Vec<usize>>,
    /// UEs within `r_o` of each AP.
    pub ap_clusters: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictGraph {
    /// Sorted neighbor lists.
    pub adj: Vec<Vec<usize>>,
}

impl ConflictGraph {
    pub fn from_edges(k: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); k];
        for &(a, b) in edges {
            if a != b && !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        adj.iter_mut().for_each(|v| v.sort_unstable());
        Self { adj }
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Edge list with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for (a, nb) in self.adj.iter().enumerate() {
            e.extend(nb.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        e
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }
}

/// Pilot index per UE (0-based) and the resulting co-pilot sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotAssignment {
    pub tau_p: usize,
    pub pilot_of: Vec<usize>,
    pub copilot_sets: Vec<Vec<usize>>,
}

impl PilotAssignment {
    pub fn from_labels(pilot_of: Vec<usize>) -> Self {
        let tau_p = pilot_of.iter().map(|&p| p + 1).max().unwrap_or(0);
        let mut copilot_sets = vec![Vec::new(); tau_p];
        for (k, &p) in pilot_of.iter().enumerate() {
            copilot_sets[p].push(k);
        }
        Self { tau_p, pilot_of, copilot_sets }
    }

    pub fn shares_pilot(&self, a: usize, b: usize) -> bool {
        self.pilot_of[a] == self.pilot_of[b]
    }

    /// UEs on the same pilot as `k`, including `k`.
    pub fn copilots(&self, k: usize) -> &[usize] {
        &self.copilot_sets[self.pilot_of[k]]
    }

    /// Number of distinct pilots actually used.
    pub fn colors_used(&self) -> usize {
        self.copilot_sets.iter().filter(|s| !s.is_empty()).count()
    }
}

/// Distance at which the single-slope pilot SNR summed over N antennas drops to `gamma_min`.
pub fn snr_radius(config: &SystemConfig, antennas: usize) -> Result<f64> {
    let gamma = db_to_lin(config.gamma_min_db);
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidConfig("gamma_min must be positive".into()));
    }
    let snr = antennas as f64 * db_to_lin(config.pilot_snr_db) / gamma;
    Ok(config.simple_pl.d0_m * snr.powf(1.0 / config.simple_pl.exponent))
}

/// Cluster radius: large enough that every UE reaches its nearest AP and at
/// least `d_SNRo`, then scaled by `r_o_scale`.
pub fn compute_r_o(geom: &NetworkGeometry, config: &SystemConfig) -> Result<f64> {
    let antennas = config.min_array();
    let d_snr = snr_radius(config, antennas)?;
    let nearest = (0..geom.num_ues())
        .map(|k| (0..geom.num_aps()).map(|m| geom.ap_ue_distance(m, k)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    Ok(config.r_o_scale * nearest.max(d_snr))
}

pub fn build_connectivity(geom: &NetworkGeometry, r_o: f64) -> ConnectivityGraph {
    let (m, k) = (geom.num_aps(), geom.num_ues());
    let mut ue_clusters = vec![Vec::new(); k];
    let mut ap_clusters = vec![Vec::new(); m];
    for a in 0..m {
        for u in 0..k {
            if geom.ap_ue_distance(a, u) <= r_o {
                ue_clusters[u].push(a);
                ap_clusters[a].push(u);
            }
        }
    }
    ConnectivityGraph { r_o, ue_clusters, ap_clusters }
}

/// UEs are adjacent when their AP clusters intersect.
pub fn conflict_graph(conn: &ConnectivityGraph) -> ConflictGraph {
    let k = conn.ue_clusters.len();
    let mut edges = Vec::new();
    for ap in &conn.ap_clusters {
        for (i, &a) in ap.iter().enumerate() {
            for &b in &ap[i + 1..] {
                edges.push((a, b));
            }
        }
    }
    ConflictGraph::from_edges(k, &edges)
}

/// DSATUR coloring. The next vertex has the most distinct neighbor colors,
/// then the highest degree, then a seeded random pick. It receives the
/// feasible color used least so far (lowest index on ties); a new color opens
/// only when no existing one is feasible.
pub fn color_graph(graph: &ConflictGraph, seed: u64) -> PilotAssignment {
    let k = graph.num_vertices();
    let mut rng = stream_rng(seed, stream::PILOT);
    let mut color: Vec<Option<usize>> = vec![None; k];
    let mut uses: Vec<usize> = Vec::new();
    let mut neighbor_colors: Vec<Vec<bool>> = vec![Vec::new(); k];

    for _ in 0..k {
        let mut best: Vec<usize> = Vec::new();
        let mut best_key = (0usize, 0usize);
        for v in (0..k).filter(|&v| color[v].is_none()) {
            let sat = neighbor_colors[v].iter().filter(|&&b| b).count();
            let key = (sat, graph.adj[v].len());
            if best.is_empty() || key > best_key {
                best_key = key;
                best.clear();
                best.push(v);
            } else if key == best_key {
                best.push(v);
            }
        }
        let v = if best.len() == 1 { best[0] } else { best[rng.random_range(0..best.len())] };

        let blocked = &neighbor_colors[v];
        let pick = (0..uses.len()).filter(|&c| !blocked.get(c).copied().unwrap_or(false)).min_by_key(|&c| (uses[c], c));
        let c = pick.unwrap_or_else(|| {
            uses.push(0);
            uses.len() - 1
        });
        uses[c] += 1;
        color[v] = Some(c);
        for &w in &graph.adj[v] {
            let nc = &mut neighbor_colors[w];
            if nc.len() <= c {
                nc.resize(c + 1, false);
            }
            nc[c] = true;
        }
    }
    PilotAssignment::from_labels(color.into_iter().map(|c| c.expect("all colored")).collect())
}

/// A pair of UEs served by AP `ap` that share a pilot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub ap: usize,
    pub ue_a: usize,
    pub ue_b: usize,
}

pub fn verify_assignment(pilots: &PilotAssignment, conn: &ConnectivityGraph) -> (bool, Vec<Violation>) {
    let mut v = Vec::new();
    for (ap, ues) in conn.ap_clusters.iter().enumerate() {
        for (i, &a) in ues.iter().enumerate() {
            for &b in &ues[i + 1..] {
                if pilots.shares_pilot(a, b) {
                    v.push(Violation { ap, ue_a: a, ue_b: b });
                }
            }
        }
    }
    (v.is_empty(), v)
}

/// Exact chromatic number by backtracking. Exponential; meant for K <= 12.
pub fn chromatic_number(graph: &ConflictGraph) -> usize {
    let k = graph.num_vertices();
    if k == 0 {
        return 0;
    }
    // Color high-degree vertices first to prune early.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(graph.adj[v].len()));
    (1..=k)
        .find(|&c| {
            let mut col = vec![usize::MAX; k];
            try_color(graph, &order, 0, c, &mut col)
        })
        .unwrap_or(k)
}

fn try_color(g: &ConflictGraph, order: &[usize], i: usize, c: usize, col: &mut [usize]) -> bool {
    if i == order.len() {
        return true;
    }
    let v = order[i];
    let used = col.iter().filter(|&&x| x != usize::MAX).copied().max().map_or(0, |m| m + 1);
    // Symmetry break: never open more than one new color at a time.
    for x in 0..c.min(used + 1) {
        if g.adj[v].iter().all(|&w| col[w] != x) {
            col[v] = x;
            if try_color(g, order, i + 1, c, col) {
                return true;
            }
            col[v] = usize::MAX;
        }
    }
    false
}

/// One pilot per UE.
pub fn orthogonal_assignment(k: usize) -> PilotAssignment {
    PilotAssignment::from_labels((0..k).collect())
}

/// Pilots drawn uniformly from `tau_p` choices, ignoring conflicts.
pub fn random_assignment(k: usize, tau_p: usize, seed: u64) -> PilotAssignment {
    let mut rng = stream_rng(seed, stream::PILOT ^ 0x5241_4e44);
    let mut labels: Vec<usize> = (0..k).map(|i| i % tau_p.max(1)).collect();
    labels.shuffle(&mut rng);
    PilotAssignment::from_labels(labels)
}
