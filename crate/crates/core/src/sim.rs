//! Monte-Carlo engine. A replication runs the gossip machine from one
//! initial state until consensus or a step ceiling; an experiment aggregates
//! many replications into consensus-label frequencies and halting-time
//! statistics. Every replication gets its own counter-derived RNG stream, so
//! results are bit-identical regardless of execution order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::gossip::{
    apply_adoption, is_consensus, proportional_select, sample_transmission, NetworkState,
    StateError, DEFAULT_EPSILON,
};
use crate::graph::DirectedGraph;
use crate::markov::enumerate_states;

/// Default step ceiling per replication.
pub const DEFAULT_MAX_STEPS: u64 = 100_000;

/// z quantile for the 95% confidence interval on mean halting time.
const CI95_Z: f64 = 1.96;

/// Ceiling on k^n when sweeping every initial state.
pub const DEFAULT_SWEEP_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("replications must be at least 1")]
    NoReplications,
    #[error("max_steps must be at least 1")]
    NoSteps,
    #[error("sweep too large: k^n = {product} exceeds the cap of {cap}")]
    SweepTooLarge { product: u128, cap: usize },
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub graph: DirectedGraph,
    pub num_states: u32,
    pub initial: NetworkState,
    pub replications: u32,
    pub max_steps: u64,
    pub epsilon: f64,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn new(
        graph: DirectedGraph,
        num_states: u32,
        initial: NetworkState,
        replications: u32,
        seed: u64,
    ) -> Result<Self, SimError> {
        let cfg = SimulationConfig {
            graph,
            num_states,
            initial,
            replications,
            max_steps: DEFAULT_MAX_STEPS,
            epsilon: DEFAULT_EPSILON,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.initial.len() != self.graph.node_count() {
            return Err(StateError::LengthMismatch {
                len: self.initial.len(),
                n: self.graph.node_count(),
            }
            .into());
        }
        for (position, &label) in self.initial.values().iter().enumerate() {
            if label < 1 || label > self.num_states {
                return Err(
                    StateError::LabelOutOfRange { label, position, k: self.num_states }.into()
                );
            }
        }
        if self.replications == 0 {
            return Err(SimError::NoReplications);
        }
        if self.max_steps == 0 {
            return Err(SimError::NoSteps);
        }
        Ok(())
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }
}

/// One replication's result: the step at which consensus was first observed
/// and the agreed label, or `None` on timeout (in which case `halt_step` is
/// the ceiling).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicationRecord {
    pub halt_step: u64,
    pub consensus_label: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub records: Vec<ReplicationRecord>,
    /// Count of replications that agreed on each label, indexed by label - 1.
    pub consensus_counts: Vec<u64>,
    pub timeout_count: u64,
    /// Mean halting time over converged replications; `None` when every
    /// replication timed out (the non-convergent flag).
    pub mean_time: Option<f64>,
    pub ci95_low: Option<f64>,
    pub ci95_high: Option<f64>,
}

impl SimulationOutcome {
    pub fn replications(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn consensus_probability(&self, label: u32) -> f64 {
        self.consensus_counts[label as usize - 1] as f64 / self.records.len() as f64
    }

    pub fn timeout_fraction(&self) -> f64 {
        self.timeout_count as f64 / self.records.len() as f64
    }

    pub fn is_convergent(&self) -> bool {
        self.mean_time.is_some()
    }

    /// Halting times of the converged replications, in replication order.
    pub fn converged_times(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.consensus_label.is_some())
            .map(|r| r.halt_step as f64)
            .collect()
    }

    fn aggregate(records: Vec<ReplicationRecord>, k: u32) -> Self {
        let mut consensus_counts = vec![0u64; k as usize];
        let mut timeout_count = 0;
        for r in &records {
            match r.consensus_label {
                Some(label) => consensus_counts[label as usize - 1] += 1,
                None => timeout_count += 1,
            }
        }
        let times: Vec<f64> = records
            .iter()
            .filter(|r| r.consensus_label.is_some())
            .map(|r| r.halt_step as f64)
            .collect();
        let (mean_time, ci95_low, ci95_high) = match times.len() {
            0 => (None, None, None),
            m => {
                let mean = times.iter().sum::<f64>() / m as f64;
                let half = if m > 1 {
                    let var =
                        times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
                    CI95_Z * (var / m as f64).sqrt()
                } else {
                    0.0
                };
                (Some(mean), Some(mean - half), Some(mean + half))
            }
        };
        SimulationOutcome {
            records,
            consensus_counts,
            timeout_count,
            mean_time,
            ci95_low,
            ci95_high,
        }
    }
}

/// Runs the machine from `cfg.initial` until consensus or `cfg.max_steps`
/// ticks. A start already at consensus halts at step 0 without drawing.
pub fn run_replication(cfg: &SimulationConfig, rng: &mut impl Rng) -> (u64, Option<u32>) {
    let mut x = cfg.initial.clone();
    let mut step = 0u64;
    loop {
        if is_consensus(&x, cfg.epsilon) {
            return (step, Some(x.values()[0]));
        }
        if step == cfg.max_steps {
            return (step, None);
        }
        let w = sample_transmission(&cfg.graph, rng);
        let a = proportional_select(&w, rng);
        x = apply_adoption(&a, &x);
        step += 1;
    }
}

/// The RNG for one replication: the master seed keys the generator and the
/// stream index separates replications (and, in sweeps, initial states), so
/// any replication can be reproduced in isolation.
pub fn replication_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn run_experiment_with_stream_base(
    cfg: &SimulationConfig,
    stream_base: u64,
) -> Result<SimulationOutcome, SimError> {
    cfg.validate()?;
    let records: Vec<ReplicationRecord> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(cfg.seed, stream_base | rep as u64);
            let (halt_step, consensus_label) = run_replication(cfg, &mut rng);
            ReplicationRecord { halt_step, consensus_label }
        })
        .collect();
    Ok(SimulationOutcome::aggregate(records, cfg.num_states))
}

/// Runs `cfg.replications` independent replications on streams
/// `(cfg.seed, replication index)` and aggregates them.
pub fn run_experiment(cfg: &SimulationConfig) -> Result<SimulationOutcome, SimError> {
    run_experiment_with_stream_base(cfg, 0)
}

/// One experiment per non-consensus initial state, in state-enumeration
/// order. Stream indices are `(state index << 32) | replication`, so a
/// sweep's cell for one state is identical to a standalone experiment run
/// with that stream base.
pub fn sweep_initial_states(
    graph: &DirectedGraph,
    k: u32,
    replications: u32,
    seed: u64,
) -> Result<Vec<(NetworkState, SimulationOutcome)>, SimError> {
    sweep_initial_states_with_cap(graph, k, replications, seed, DEFAULT_SWEEP_CAP)
}

pub fn sweep_initial_states_with_cap(
    graph: &DirectedGraph,
    k: u32,
    replications: u32,
    seed: u64,
    cap: usize,
) -> Result<Vec<(NetworkState, SimulationOutcome)>, SimError> {
    let n = graph.node_count();
    let product = (k as u128).pow(n as u32);
    if product > cap as u128 {
        return Err(SimError::SweepTooLarge { product, cap });
    }
    let mut out = Vec::new();
    for (index, state) in enumerate_states(n, k).into_iter().enumerate() {
        if is_consensus(&state, DEFAULT_EPSILON) {
            continue;
        }
        let cfg = SimulationConfig::new(graph.clone(), k, state.clone(), replications, seed)?;
        let outcome = run_experiment_with_stream_base(&cfg, (index as u64) << 32)?;
        out.push((state, outcome));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};
    use crate::markov::{analyze_absorbing, build_chain, state_index};

    fn config(
        family: Family,
        n: usize,
        k: u32,
        initial: &[u32],
        reps: u32,
        seed: u64,
    ) -> SimulationConfig {
        SimulationConfig::new(
            generate(family, n).unwrap(),
            k,
            NetworkState::new(initial.to_vec(), k).unwrap(),
            reps,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn consensus_start_halts_at_zero() {
        let cfg = config(Family::Complete, 3, 2, &[1, 1, 1], 10, 1);
        let mut rng = replication_rng(cfg.seed, 0);
        assert_eq!(run_replication(&cfg, &mut rng), (0, Some(1)));

        let outcome = run_experiment(&cfg).unwrap();
        assert_eq!(outcome.mean_time, Some(0.0));
        assert_eq!(outcome.consensus_probability(1), 1.0);
        assert_eq!(outcome.timeout_count, 0);
        assert_eq!(outcome.ci95_low, Some(0.0));
        assert_eq!(outcome.ci95_high, Some(0.0));
    }

    #[test]
    fn directed_ring_times_out() {
        let cfg = config(Family::RingDirected, 3, 2, &[1, 2, 1], 5, 3).with_max_steps(500);
        let mut rng = replication_rng(cfg.seed, 0);
        assert_eq!(run_replication(&cfg, &mut rng), (500, None));

        let outcome = run_experiment(&cfg).unwrap();
        assert_eq!(outcome.timeout_count, 5);
        assert!(!outcome.is_convergent());
        assert_eq!(outcome.mean_time, None);
        assert!((outcome.timeout_fraction() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reproducible_bit_exactly() {
        let cfg = config(Family::Complete, 3, 2, &[1, 1, 2], 200, 42);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);

        let other_seed = config(Family::Complete, 3, 2, &[1, 1, 2], 200, 43);
        assert_ne!(run_experiment(&other_seed).unwrap(), a);
    }

    #[test]
    fn experiment_equals_manually_streamed_replications() {
        let cfg = config(Family::Star, 4, 2, &[1, 2, 2, 1], 16, 9);
        let outcome = run_experiment(&cfg).unwrap();
        for rep in 0..16u64 {
            let mut rng = replication_rng(cfg.seed, rep);
            let (halt_step, consensus_label) = run_replication(&cfg, &mut rng);
            assert_eq!(
                outcome.records[rep as usize],
                ReplicationRecord { halt_step, consensus_label }
            );
        }
    }

    #[test]
    fn probabilities_and_timeouts_sum_to_one() {
        let cfg = config(Family::Complete, 4, 3, &[1, 2, 3, 1], 500, 11);
        let outcome = run_experiment(&cfg).unwrap();
        let total: f64 = (1..=3).map(|label| outcome.consensus_probability(label)).sum();
        assert!((total + outcome.timeout_fraction() - 1.0).abs() < 1e-12);

        let (low, mean, high) = (
            outcome.ci95_low.unwrap(),
            outcome.mean_time.unwrap(),
            outcome.ci95_high.unwrap(),
        );
        assert!(low <= mean && mean <= high);
    }

    #[test]
    fn no_timeouts_on_convergent_topologies() {
        for family in [Family::Complete, Family::Star, Family::RingBidirectional] {
            let cfg = config(family, 4, 2, &[1, 2, 1, 2], 300, 17);
            assert_eq!(run_experiment(&cfg).unwrap().timeout_count, 0, "{family:?}");
        }
    }

    #[test]
    fn k4_consensus_probability_tracks_initial_majority() {
        let cfg = config(Family::Complete, 4, 2, &[1, 1, 1, 2], 1000, 7);
        let outcome = run_experiment(&cfg).unwrap();
        assert!((outcome.consensus_probability(1) - 0.75).abs() < 0.05);

        let cfg = config(Family::Complete, 4, 2, &[1, 1, 2, 2], 1000, 7);
        let outcome = run_experiment(&cfg).unwrap();
        assert!((outcome.consensus_probability(1) - 0.50).abs() < 0.05);
    }

    #[test]
    fn k3_label_frequencies_match_exact_absorption() {
        let g = generate(Family::Complete, 3).unwrap();
        let analysis = analyze_absorbing(&build_chain(&g, 2).unwrap()).unwrap();
        let sweep = sweep_initial_states(&g, 2, 10_000, 123).unwrap();
        assert_eq!(sweep.len(), 6);
        for (state, outcome) in &sweep {
            let b = analysis.absorption_row(state_index(state, 2));
            assert!(
                (outcome.consensus_probability(1) - b[0]).abs() < 0.03,
                "state {state}: {} vs {}",
                outcome.consensus_probability(1),
                b[0]
            );
            assert!((outcome.consensus_probability(2) - b[1]).abs() < 0.03);
        }
    }

    #[test]
    fn k3_halting_time_mean_is_eight() {
        // The sampling process picks a transmission matrix uniformly and then
        // resolves rows uniformly, which weights adoption matrices by how
        // many (transmission, resolution) paths produce them -- not by the
        // uniform 1/|A| weighting of the exact chain. On K3 the induced
        // per-step consensus probability is exactly 1/8 from every
        // non-consensus state, so the empirical mean is 8.0, not the exact
        // chain's 5.5. The gap is expected and surfaced by validate().
        let cfg = config(Family::Complete, 3, 2, &[1, 1, 2], 10_000, 2024);
        let outcome = run_experiment(&cfg).unwrap();
        let mean = outcome.mean_time.unwrap();
        assert!((mean - 8.0).abs() < 0.5, "mean {mean}");
    }

    #[test]
    fn sweep_counts_and_order() {
        let g = generate(Family::Complete, 3).unwrap();
        let sweep = sweep_initial_states(&g, 2, 10, 5).unwrap();
        let states: Vec<String> = sweep.iter().map(|(s, _)| s.to_string()).collect();
        assert_eq!(states, ["112", "121", "122", "211", "212", "221"]);

        let k4 = generate(Family::Complete, 4).unwrap();
        assert_eq!(sweep_initial_states(&k4, 2, 10, 5).unwrap().len(), 14);

        let path = DirectedGraph::from_edge_list(2, [(0, 1)]).unwrap();
        assert_eq!(sweep_initial_states(&path, 2, 10, 5).unwrap().len(), 2);
    }

    #[test]
    fn sweep_cells_reproduce_standalone_stream_bases() {
        let g = generate(Family::Complete, 3).unwrap();
        let sweep = sweep_initial_states(&g, 2, 50, 77).unwrap();
        // State 121 has enumeration index 2.
        let (state, outcome) = &sweep[1];
        assert_eq!(state.to_string(), "121");
        let cfg = SimulationConfig::new(g.clone(), 2, state.clone(), 50, 77).unwrap();
        let standalone = run_experiment_with_stream_base(&cfg, 2u64 << 32).unwrap();
        assert_eq!(outcome, &standalone);
    }

    #[test]
    fn config_validation_rejects_bad_inputs() {
        let g = generate(Family::Complete, 3).unwrap();
        let short = NetworkState::new(vec![1, 2], 2).unwrap();
        assert!(matches!(
            SimulationConfig::new(g.clone(), 2, short, 10, 0),
            Err(SimError::State(StateError::LengthMismatch { .. }))
        ));

        let wide = NetworkState::new(vec![1, 2, 3], 3).unwrap();
        assert!(matches!(
            SimulationConfig::new(g.clone(), 2, wide, 10, 0),
            Err(SimError::State(StateError::LabelOutOfRange { .. }))
        ));

        let ok = NetworkState::new(vec![1, 2, 1], 2).unwrap();
        assert!(matches!(
            SimulationConfig::new(g.clone(), 2, ok.clone(), 0, 0),
            Err(SimError::NoReplications)
        ));
        assert!(matches!(
            SimulationConfig::new(g, 2, ok, 10, 0).map(|c| c.with_max_steps(0).validate()),
            Ok(Err(SimError::NoSteps))
        ));
    }

    #[test]
    fn sweep_cap_is_enforced() {
        let g = generate(Family::Complete, 5).unwrap();
        assert!(matches!(
            sweep_initial_states_with_cap(&g, 4, 10, 0, 1000),
            Err(SimError::SweepTooLarge { product: 1024, cap: 1000 })
        ));
    }
}
