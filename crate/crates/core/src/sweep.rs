//! Table-producing sweeps. The family sweep computes, for every
//! (family, n, k) cell, per-distance-partition means of the exact expected
//! consensus times with a 95% t-interval across the states in the partition.
//! The density sweep samples random convergent graphs at each density and
//! averages each initial state's expected time across them. Partition keys
//! are the Hamming distance to the nearest consensus state, which is how the
//! published tables group initial states.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::gossip::{is_consensus, NetworkState, DEFAULT_EPSILON};
use crate::graph::{generate, random_at_density, Family};
use crate::markov::{analyze_absorbing, build_chain, enumerate_states, state_index};
use crate::metrics::{mean_with_t_ci, nearest_consensus_distance};
use crate::sim::sweep_initial_states;

/// Summary of one distance partition inside a sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionStat {
    pub distance: u32,
    pub count: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellOutcome {
    /// Partition statistics, ascending by distance. Distances that admit no
    /// state are simply absent (rendered "-" in tables).
    Partitions(Vec<PartitionStat>),
    /// The cell could not be analyzed; the sweep records why and moves on.
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub family: Family,
    pub n: usize,
    pub k: u32,
    pub outcome: CellOutcome,
}

impl SweepCell {
    pub fn partition(&self, distance: u32) -> Option<&PartitionStat> {
        match &self.outcome {
            CellOutcome::Partitions(stats) => stats.iter().find(|p| p.distance == distance),
            CellOutcome::Failed { .. } => None,
        }
    }
}

fn sweep_cell(family: Family, n: usize, k: u32) -> CellOutcome {
    let result = generate(family, n)
        .map_err(|e| e.to_string())
        .and_then(|graph| build_chain(&graph, k).map_err(|e| e.to_string()))
        .and_then(|chain| {
            let analysis = analyze_absorbing(&chain).map_err(|e| e.to_string())?;
            Ok((chain, analysis))
        });
    let (chain, analysis) = match result {
        Ok(pair) => pair,
        Err(reason) => return CellOutcome::Failed { reason },
    };

    let mut by_distance: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (i, state) in chain.states().iter().enumerate() {
        if is_consensus(state, DEFAULT_EPSILON) {
            continue;
        }
        by_distance
            .entry(nearest_consensus_distance(state) as u32)
            .or_default()
            .push(analysis.expected_steps_of(i));
    }
    CellOutcome::Partitions(
        by_distance
            .into_iter()
            .map(|(distance, times)| {
                let (mean, ci_low, ci_high) =
                    mean_with_t_ci(&times).expect("partitions are never empty");
                PartitionStat { distance, count: times.len(), mean, ci_low, ci_high }
            })
            .collect(),
    )
}

/// One cell per (family, n, k) combination, in the given order. Failures are
/// recorded in their cells; the sweep always completes.
pub fn sweep(families: &[Family], nodes: &[usize], states: &[u32]) -> Vec<SweepCell> {
    let mut cells = Vec::with_capacity(families.len() * nodes.len() * states.len());
    for &family in families {
        for &n in nodes {
            for &k in states {
                cells.push(SweepCell { family, n, k, outcome: sweep_cell(family, n, k) });
            }
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    pub base_n: usize,
    pub k: u32,
    pub densities: Vec<f64>,
    pub graphs_per_density: usize,
    pub seed: u64,
    /// `None` analyzes each sampled graph exactly; `Some(reps)` replaces the
    /// exact expected time with a simulated mean over that many replications.
    pub empirical_replications: Option<u32>,
}

/// One (density, initial state) cell: the mean over sampled graphs of that
/// state's expected consensus time, with a 95% t-interval across graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub density: f64,
    pub state: NetworkState,
    pub partition: u32,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Number of graphs contributing a value for this state.
    pub graphs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFailure {
    pub density: f64,
    /// Index of the failing graph draw, or `None` when the density itself is
    /// infeasible.
    pub graph_index: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub rows: Vec<DensityRow>,
    pub failures: Vec<DensityFailure>,
}

/// Per-graph expected times for every state, positionally indexed by state;
/// `None` marks states without a value (consensus, or all-timeout cells in
/// empirical mode).
fn per_graph_times(
    cfg: &DensityConfig,
    graph: &crate::graph::DirectedGraph,
    rng: &mut ChaCha12Rng,
    state_count: usize,
) -> Result<Vec<Option<f64>>, String> {
    let mut values = vec![None; state_count];
    match cfg.empirical_replications {
        None => {
            let chain = build_chain(graph, cfg.k).map_err(|e| e.to_string())?;
            let analysis = analyze_absorbing(&chain).map_err(|e| e.to_string())?;
            for (i, state) in chain.states().iter().enumerate() {
                if !is_consensus(state, DEFAULT_EPSILON) {
                    values[i] = Some(analysis.expected_steps_of(i));
                }
            }
        }
        Some(replications) => {
            // A fresh seed drawn from the graph's own stream keeps the
            // simulation decoupled from how many draws graph sampling used.
            let sim_seed = rng.gen::<u64>();
            let sweep = sweep_initial_states(graph, cfg.k, replications, sim_seed)
                .map_err(|e| e.to_string())?;
            for (state, outcome) in sweep {
                values[state_index(&state, cfg.k)] = outcome.mean_time;
            }
        }
    }
    Ok(values)
}

/// Samples `graphs_per_density` convergent graphs per density on streams
/// `(density index << 32) | graph index` and aggregates each initial state's
/// expected time across them.
pub fn density_sweep(cfg: &DensityConfig) -> DensityReport {
    let states = enumerate_states(cfg.base_n, cfg.k);
    let mut rows = Vec::new();
    let mut failures = Vec::new();

    for (d_idx, &density) in cfg.densities.iter().enumerate() {
        // A density below the spanning-tree threshold fails for every draw;
        // record it once instead of once per graph.
        let total = cfg.base_n * (cfg.base_n - 1);
        if ((density * total as f64).ceil() as usize) < cfg.base_n.saturating_sub(1) {
            failures.push(DensityFailure {
                density,
                graph_index: None,
                reason: format!(
                    "density {density} on {} nodes leaves fewer than n-1 edges",
                    cfg.base_n
                ),
            });
            continue;
        }

        let mut per_state: Vec<Vec<f64>> = vec![Vec::new(); states.len()];
        for g_idx in 0..cfg.graphs_per_density {
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
            rng.set_stream(((d_idx as u64) << 32) | g_idx as u64);
            let result = random_at_density(cfg.base_n, density, &mut rng)
                .map_err(|e| e.to_string())
                .and_then(|graph| per_graph_times(cfg, &graph, &mut rng, states.len()));
            match result {
                Ok(values) => {
                    for (i, v) in values.into_iter().enumerate() {
                        if let Some(v) = v {
                            per_state[i].push(v);
                        }
                    }
                }
                Err(reason) => {
                    failures.push(DensityFailure { density, graph_index: Some(g_idx), reason });
                }
            }
        }

        for (i, state) in states.iter().enumerate() {
            if let Some((mean, ci_low, ci_high)) = mean_with_t_ci(&per_state[i]) {
                rows.push(DensityRow {
                    density,
                    state: state.clone(),
                    partition: nearest_consensus_distance(state) as u32,
                    mean,
                    ci_low,
                    ci_high,
                    graphs: per_state[i].len(),
                });
            }
        }
    }
    DensityReport { rows, failures }
}

/// Mean of the per-state means inside each partition of one density column —
/// the quantity the density plots track per distance curve.
pub fn partition_means(report: &DensityReport, density: f64) -> BTreeMap<u32, f64> {
    let mut sums: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for row in report.rows.iter().filter(|r| r.density == density) {
        let entry = sums.entry(row.partition).or_insert((0.0, 0));
        entry.0 += row.mean;
        entry.1 += 1;
    }
    sums.into_iter().map(|(d, (sum, count))| (d, sum / count as f64)).collect()
}
