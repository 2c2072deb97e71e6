//! Exact Markov-chain analysis of the gossip process. The chain lives on all
//! k^n label assignments; each tick applies one adoption matrix drawn
//! uniformly from the graph's reachable adoption set, so the transition
//! probability between two states is the number of adoption matrices mapping
//! one to the other divided by the set size. When the chain is absorbing the
//! fundamental matrix gives exact expected absorption times, variances, and
//! absorption probabilities per consensus label.

use std::collections::VecDeque;

use thiserror::Error;

use crate::gossip::{
    apply_adoption, enumerate_adoptions, enumerate_transmissions, AdoptionMatrix,
    EnumerationError, NetworkState, StateError, DEFAULT_ENUMERATION_CAP,
};
use crate::graph::DirectedGraph;
use crate::linalg::{Matrix, SingularMatrix};

/// Ceiling on the state-space size k^n; the transition matrix is dense, so
/// memory grows with its square.
pub const DEFAULT_STATE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error("state space too large: k^n = {product} exceeds the cap of {cap}")]
    StateSpaceTooLarge { product: u128, cap: usize },
    #[error("k must be at least 1, got {k}")]
    InvalidLabelCount { k: u32 },
    #[error(
        "chain is not absorbing: some state cannot reach consensus \
         (the graph lacks a directed spanning tree or is a directed ring)"
    )]
    NotAbsorbing,
    #[error(transparent)]
    Singular(#[from] SingularMatrix),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("initial distribution has {len} entries (state space has {expected}) or does not sum to 1")]
    InvalidDistribution { len: usize, expected: usize },
}

/// All k^n network states in base-k order with node 1 most significant:
/// index 0 is all-ones, the last index is all-k.
pub fn enumerate_states(n: usize, k: u32) -> Vec<NetworkState> {
    let total = (k as u128).pow(n as u32) as usize;
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![1u32; n];
    loop {
        out.push(NetworkState::new(digits.clone(), k).expect("digits stay in range"));
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] <= k {
                break;
            }
            digits[pos] = 1;
        }
    }
}

/// The index of `x` in `enumerate_states(x.len(), k)`.
pub fn state_index(x: &NetworkState, k: u32) -> usize {
    x.values()
        .iter()
        .fold(0usize, |acc, &v| acc * k as usize + (v as usize - 1))
}

/// The gossip chain of a graph for k labels: state list, adoption set, and
/// dense transition matrix.
#[derive(Debug, Clone)]
pub struct GossipChain {
    graph: DirectedGraph,
    k: u32,
    states: Vec<NetworkState>,
    adoptions: Vec<AdoptionMatrix>,
    transition: Matrix,
}

impl GossipChain {
    pub fn build(graph: &DirectedGraph, k: u32) -> Result<Self, ChainError> {
        Self::build_with_caps(graph, k, DEFAULT_ENUMERATION_CAP, DEFAULT_STATE_CAP)
    }

    pub fn build_with_caps(
        graph: &DirectedGraph,
        k: u32,
        enumeration_cap: usize,
        state_cap: usize,
    ) -> Result<Self, ChainError> {
        if k < 1 {
            return Err(ChainError::InvalidLabelCount { k });
        }
        let n = graph.node_count();
        let state_count = (k as u128).pow(n as u32);
        if state_count > state_cap as u128 {
            return Err(ChainError::StateSpaceTooLarge { product: state_count, cap: state_cap });
        }
        let state_count = state_count as usize;

        let transmissions = enumerate_transmissions(graph, enumeration_cap)?;
        let adoptions = enumerate_adoptions(&transmissions, enumeration_cap)?;
        let states = enumerate_states(n, k);

        // Integer counts first, then one division: the diagonal of an
        // absorbing state comes out exactly 1.0.
        let mut counts = vec![0u32; state_count * state_count];
        for (from, state) in states.iter().enumerate() {
            for a in &adoptions {
                let to = state_index(&apply_adoption(a, state), k);
                counts[from * state_count + to] += 1;
            }
        }
        let total = adoptions.len() as f64;
        let mut transition = Matrix::zeros(state_count, state_count);
        for from in 0..state_count {
            for to in 0..state_count {
                transition[(from, to)] = counts[from * state_count + to] as f64 / total;
            }
        }

        Ok(GossipChain { graph: graph.clone(), k, states, adoptions, transition })
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn states(&self) -> &[NetworkState] {
        &self.states
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn adoption_count(&self) -> usize {
        self.adoptions.len()
    }

    pub fn adoptions(&self) -> &[AdoptionMatrix] {
        &self.adoptions
    }

    pub fn transition_matrix(&self) -> &Matrix {
        &self.transition
    }

    /// Indices of the consensus states — the absorbing block of the
    /// canonical form. Consensus states are fixed by every adoption matrix,
    /// so their self-loop probability is exactly 1. (Degenerate graphs can
    /// fix other states too, e.g. every state under an edgeless graph; those
    /// stay in the transient block, which is what makes the absorbing-chain
    /// check below agree with the structural convergence predicates.)
    pub fn absorbing_states(&self) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&i| {
                let is_consensus = self.states[i]
                    .values()
                    .iter()
                    .all(|&v| v == self.states[i].values()[0]);
                debug_assert!(!is_consensus || self.transition[(i, i)] == 1.0);
                is_consensus
            })
            .collect()
    }

    /// Exact reachability: the chain is absorbing when every state has a
    /// path (through nonzero transitions) to some absorbing state.
    pub fn is_absorbing(&self) -> bool {
        let m = self.states.len();
        let absorbing = self.absorbing_states();
        if absorbing.is_empty() {
            return false;
        }
        // Walk the transposed transition graph from the absorbing states.
        let mut reaches = vec![false; m];
        let mut queue: VecDeque<usize> = absorbing.into_iter().collect();
        for &i in &queue {
            reaches[i] = true;
        }
        while let Some(to) = queue.pop_front() {
            for from in 0..m {
                if !reaches[from] && self.transition[(from, to)] > 0.0 {
                    reaches[from] = true;
                    queue.push_back(from);
                }
            }
        }
        reaches.iter().all(|&r| r)
    }

    /// The distribution over states after `t` ticks from `initial`, as a row
    /// vector indexed like `states()`.
    pub fn distribution_at_time(
        &self,
        initial: &NetworkState,
        t: usize,
    ) -> Result<Vec<f64>, ChainError> {
        if initial.len() != self.graph.node_count() {
            return Err(StateError::LengthMismatch {
                len: initial.len(),
                n: self.graph.node_count(),
            }
            .into());
        }
        for (position, &label) in initial.values().iter().enumerate() {
            if label < 1 || label > self.k {
                return Err(StateError::LabelOutOfRange { label, position, k: self.k }.into());
            }
        }
        let mut z = vec![0.0; self.states.len()];
        z[state_index(initial, self.k)] = 1.0;
        for _ in 0..t {
            z = self.transition.vec_mat(&z);
        }
        Ok(z)
    }
}

/// The chain rearranged into canonical absorbing form [Q R; 0 I]: transient
/// states first, absorbing states last, both keeping their original relative
/// order. `transient` and `absorbing` map block positions back to original
/// state indices.
#[derive(Debug, Clone)]
pub struct CanonicalChain {
    pub transient: Vec<usize>,
    pub absorbing: Vec<usize>,
    pub q: Matrix,
    pub r: Matrix,
}

impl CanonicalChain {
    /// Reassembles the full canonical matrix [Q R; 0 I].
    pub fn full_matrix(&self) -> Matrix {
        let t = self.transient.len();
        let a = self.absorbing.len();
        let mut m = Matrix::zeros(t + a, t + a);
        for i in 0..t {
            for j in 0..t {
                m[(i, j)] = self.q[(i, j)];
            }
            for j in 0..a {
                m[(i, t + j)] = self.r[(i, j)];
            }
        }
        for j in 0..a {
            m[(t + j, t + j)] = 1.0;
        }
        m
    }
}

pub fn canonicalize(chain: &GossipChain) -> CanonicalChain {
    let absorbing = chain.absorbing_states();
    let is_absorbing: Vec<bool> = {
        let mut flags = vec![false; chain.state_count()];
        for &i in &absorbing {
            flags[i] = true;
        }
        flags
    };
    let transient: Vec<usize> =
        (0..chain.state_count()).filter(|&i| !is_absorbing[i]).collect();

    let m = chain.transition_matrix();
    let mut q = Matrix::zeros(transient.len(), transient.len());
    let mut r = Matrix::zeros(transient.len(), absorbing.len());
    for (bi, &i) in transient.iter().enumerate() {
        for (bj, &j) in transient.iter().enumerate() {
            q[(bi, bj)] = m[(i, j)];
        }
        for (bj, &j) in absorbing.iter().enumerate() {
            r[(bi, bj)] = m[(i, j)];
        }
    }
    CanonicalChain { transient, absorbing, q, r }
}

pub fn build_chain(graph: &DirectedGraph, k: u32) -> Result<GossipChain, ChainError> {
    GossipChain::build(graph, k)
}

pub fn is_absorbing_chain(chain: &GossipChain) -> bool {
    chain.is_absorbing()
}

/// N = (I - Q)^-1. Fails on a singular I - Q, which happens exactly when the
/// chain is not absorbing.
pub fn fundamental_matrix(canonical: &CanonicalChain) -> Result<Matrix, ChainError> {
    let t = canonical.transient.len();
    let mut i_minus_q = Matrix::identity(t);
    for i in 0..t {
        for j in 0..t {
            i_minus_q[(i, j)] -= canonical.q[(i, j)];
        }
    }
    Ok(i_minus_q.inverse()?)
}

/// B = N R.
pub fn absorption_probabilities(fundamental: &Matrix, r: &Matrix) -> Matrix {
    fundamental.mul(r)
}

/// t_A = N 1.
pub fn expected_absorption_time(fundamental: &Matrix) -> Vec<f64> {
    fundamental.row_sums()
}

/// Var[T] = (2N - I) t_A - t_A^2, with the square taken elementwise.
pub fn absorption_time_variance(fundamental: &Matrix, expected: &[f64]) -> Vec<f64> {
    let t = expected.len();
    (0..t)
        .map(|i| {
            let weighted: f64 = (0..t)
                .map(|j| {
                    let identity = if i == j { 1.0 } else { 0.0 };
                    (2.0 * fundamental[(i, j)] - identity) * expected[j]
                })
                .sum();
            weighted - expected[i] * expected[i]
        })
        .collect()
}

/// z M^t over an arbitrary initial distribution, by iterated vector-matrix
/// products.
pub fn distribution_at_time(
    chain: &GossipChain,
    z: &[f64],
    t: usize,
) -> Result<Vec<f64>, ChainError> {
    let expected = chain.state_count();
    if z.len() != expected || (z.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(ChainError::InvalidDistribution { len: z.len(), expected });
    }
    let mut z = z.to_vec();
    for _ in 0..t {
        z = chain.transition_matrix().vec_mat(&z);
    }
    Ok(z)
}

/// Where a state sits in the canonical ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Transient(usize),
    Absorbing(usize),
}

/// Exact absorption quantities of an absorbing gossip chain, all indexed by
/// canonical block position with lookups by original state index.
#[derive(Debug, Clone)]
pub struct AbsorbingAnalysis {
    canonical: CanonicalChain,
    roles: Vec<Role>,
    fundamental: Matrix,
    absorption: Matrix,
    expected_steps: Vec<f64>,
    variance: Vec<f64>,
}

impl AbsorbingAnalysis {
    pub fn canonical(&self) -> &CanonicalChain {
        &self.canonical
    }

    /// N = (I - Q)^-1.
    pub fn fundamental_matrix(&self) -> &Matrix {
        &self.fundamental
    }

    /// B = N R; row = transient state, column = absorbing state.
    pub fn absorption_matrix(&self) -> &Matrix {
        &self.absorption
    }

    /// t_A = N 1, indexed by transient block position.
    pub fn expected_steps(&self) -> &[f64] {
        &self.expected_steps
    }

    /// Var[T] = (2N - I) t_A - t_A^2, indexed by transient block position.
    pub fn step_variance(&self) -> &[f64] {
        &self.variance
    }

    /// Expected absorption time from a state by original index; absorbing
    /// states take 0 steps.
    pub fn expected_steps_of(&self, state_index: usize) -> f64 {
        match self.roles[state_index] {
            Role::Transient(pos) => self.expected_steps[pos],
            Role::Absorbing(_) => 0.0,
        }
    }

    pub fn variance_of(&self, state_index: usize) -> f64 {
        match self.roles[state_index] {
            Role::Transient(pos) => self.variance[pos],
            Role::Absorbing(_) => 0.0,
        }
    }

    /// Absorption probabilities from a state by original index, one entry
    /// per absorbing state in canonical order. An absorbing state is a point
    /// mass on itself.
    pub fn absorption_row(&self, state_index: usize) -> Vec<f64> {
        let a = self.canonical.absorbing.len();
        match self.roles[state_index] {
            Role::Transient(pos) => (0..a).map(|j| self.absorption[(pos, j)]).collect(),
            Role::Absorbing(pos) => {
                let mut row = vec![0.0; a];
                row[pos] = 1.0;
                row
            }
        }
    }
}

/// Runs the absorbing-chain pipeline: canonicalize, invert I - Q, and read
/// off N, B = NR, t_A = N1, and the variance vector.
pub fn analyze_absorbing(chain: &GossipChain) -> Result<AbsorbingAnalysis, ChainError> {
    if !chain.is_absorbing() {
        return Err(ChainError::NotAbsorbing);
    }
    let canonical = canonicalize(chain);
    let fundamental = fundamental_matrix(&canonical)?;
    let absorption = absorption_probabilities(&fundamental, &canonical.r);
    let expected_steps = expected_absorption_time(&fundamental);
    let variance = absorption_time_variance(&fundamental, &expected_steps);

    let mut roles = vec![Role::Transient(usize::MAX); chain.state_count()];
    for (pos, &i) in canonical.transient.iter().enumerate() {
        roles[i] = Role::Transient(pos);
    }
    for (pos, &i) in canonical.absorbing.iter().enumerate() {
        roles[i] = Role::Absorbing(pos);
    }

    Ok(AbsorbingAnalysis { canonical, roles, fundamental, absorption, expected_steps, variance })
}

/// Markov's inequality on the absorption time: P(T >= a) <= min(1, E[T]/a).
pub fn markov_tail_bound(expected_steps: f64, a: f64) -> f64 {
    if a <= 0.0 {
        return 1.0;
    }
    (expected_steps / a).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, DirectedGraph, Family};

    fn k3_chain() -> GossipChain {
        build_chain(&generate(Family::Complete, 3).unwrap(), 2).unwrap()
    }

    #[test]
    fn state_enumeration_order_and_index() {
        let states = enumerate_states(2, 3);
        let strings: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        assert_eq!(strings, ["11", "12", "13", "21", "22", "23", "31", "32", "33"]);
        for (i, s) in states.iter().enumerate() {
            assert_eq!(state_index(s, 3), i);
        }

        // Node 1 is most significant: flipping it jumps by k^(n-1).
        let states = enumerate_states(3, 2);
        assert_eq!(states[0].to_string(), "111");
        assert_eq!(states[4].to_string(), "211");
        assert_eq!(states[7].to_string(), "222");
    }

    #[test]
    fn k3_transition_row_is_eleventh_multiples() {
        let chain = k3_chain();
        assert_eq!(chain.state_count(), 8);
        assert_eq!(chain.adoption_count(), 11);

        // Row of state 112 (index 1), exact counts out of 11.
        let expected_counts = [2.0, 1.0, 3.0, 1.0, 3.0, 1.0, 0.0, 0.0];
        let m = chain.transition_matrix();
        for (j, &c) in expected_counts.iter().enumerate() {
            assert!((m[(1, j)] - c / 11.0).abs() < 1e-15, "entry {j}");
        }
    }

    #[test]
    fn transition_rows_are_stochastic() {
        for family in [Family::Complete, Family::Star, Family::RingBidirectional] {
            let g = generate(family, 4).unwrap();
            for k in [2, 3] {
                let chain = build_chain(&g, k).unwrap();
                for sum in chain.transition_matrix().row_sums() {
                    assert!((sum - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn absorbing_states_are_the_consensus_states() {
        let chain = build_chain(&generate(Family::Star, 4).unwrap(), 3).unwrap();
        let absorbing = chain.absorbing_states();
        assert_eq!(absorbing.len(), 3);
        for &i in &absorbing {
            let s = &chain.states()[i];
            let first = s.values()[0];
            assert!(s.values().iter().all(|&v| v == first));
        }
    }

    #[test]
    fn absorbing_iff_spanning_tree_and_not_ring() {
        // The structural criterion must agree with exact chain reachability
        // on every subgraph of a fixed edge pool.
        let pool =
            [(0usize, 1usize), (1, 0), (1, 2), (2, 1), (2, 3), (3, 0), (0, 2), (3, 1)];
        for mask in 0u32..256 {
            let edges: Vec<_> = pool
                .iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, &e)| e)
                .collect();
            let g = DirectedGraph::from_edge_list(4, edges).unwrap();
            let chain = build_chain(&g, 2).unwrap();
            let structural = g.has_directed_spanning_tree() && !g.is_directed_ring();
            assert_eq!(
                chain.is_absorbing(),
                structural,
                "disagreement at mask {mask:08b}"
            );
        }

        assert!(is_absorbing_chain(&k3_chain()));
        let ring = generate(Family::RingDirected, 3).unwrap();
        assert!(!is_absorbing_chain(&build_chain(&ring, 2).unwrap()));
        assert!(matches!(
            analyze_absorbing(&build_chain(&ring, 2).unwrap()),
            Err(ChainError::NotAbsorbing)
        ));
    }

    #[test]
    fn canonical_form_reassembles_to_permuted_transition() {
        let chain = k3_chain();
        let canonical = canonicalize(&chain);
        assert_eq!(canonical.absorbing, vec![0, 7]);
        assert_eq!(canonical.transient, vec![1, 2, 3, 4, 5, 6]);

        let order: Vec<usize> = canonical
            .transient
            .iter()
            .chain(canonical.absorbing.iter())
            .copied()
            .collect();
        let full = canonical.full_matrix();
        let m = chain.transition_matrix();
        for (bi, &i) in order.iter().enumerate() {
            for (bj, &j) in order.iter().enumerate() {
                assert!((full[(bi, bj)] - m[(i, j)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn k3_absorption_quantities() {
        let chain = k3_chain();
        let analysis = analyze_absorbing(&chain).unwrap();

        // (I - Q) N = I.
        let canonical = analysis.canonical();
        let t = canonical.transient.len();
        let mut i_minus_q = Matrix::identity(t);
        for i in 0..t {
            for j in 0..t {
                i_minus_q[(i, j)] -= canonical.q[(i, j)];
            }
        }
        let product = i_minus_q.mul(analysis.fundamental_matrix());
        assert!(product.max_abs_diff(&Matrix::identity(t)) < 1e-12);

        // Every starting state takes 5.5 expected steps by symmetry.
        for &i in &canonical.transient {
            assert!((analysis.expected_steps_of(i) - 5.5).abs() < 1e-9);
            assert!((analysis.variance_of(i) - 24.75).abs() < 1e-9);
        }

        // A 2-vs-1 split absorbs to the majority label at 2/3.
        let idx_112 = 1;
        let b = analysis.absorption_row(idx_112);
        assert!((b[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((b[1] - 1.0 / 3.0).abs() < 1e-12);

        // Absorbing states are point masses and take zero steps.
        assert_eq!(analysis.absorption_row(0), vec![1.0, 0.0]);
        assert_eq!(analysis.expected_steps_of(7), 0.0);

        // B rows are distributions.
        for sum in analysis.absorption_matrix().row_sums() {
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn k4_absorption_quantities() {
        let chain = build_chain(&generate(Family::Complete, 4).unwrap(), 2).unwrap();
        assert_eq!(chain.adoption_count(), 95);
        let analysis = analyze_absorbing(&chain).unwrap();

        let idx_1112 = 1; // 1112
        let idx_1122 = 3; // 1122
        assert!((analysis.expected_steps_of(idx_1112) - 6.125992).abs() < 1e-6);
        assert!((analysis.expected_steps_of(idx_1122) - 7.728175).abs() < 1e-6);
        assert!((analysis.variance_of(idx_1112) - 37.743759).abs() < 1e-5);
        assert!((analysis.variance_of(idx_1122) - 39.916560).abs() < 1e-5);

        let b = analysis.absorption_row(idx_1112);
        assert!((b[0] - 0.75).abs() < 1e-9);
        assert!((b[1] - 0.25).abs() < 1e-9);
        let b = analysis.absorption_row(idx_1122);
        assert!((b[0] - 0.5).abs() < 1e-9);
        assert!((b[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn expected_steps_do_not_depend_on_unused_labels() {
        // The adoption set is fixed by the graph, so a state's absorption
        // time is the same whether the chain is built with k=2 or k=3.
        let g = generate(Family::Complete, 3).unwrap();
        let two = analyze_absorbing(&build_chain(&g, 2).unwrap()).unwrap();
        let three = analyze_absorbing(&build_chain(&g, 3).unwrap()).unwrap();

        let s = NetworkState::new(vec![1, 1, 2], 3).unwrap();
        let t2 = two.expected_steps_of(state_index(&s, 2));
        let t3 = three.expected_steps_of(state_index(&s, 3));
        assert!((t2 - t3).abs() < 1e-9);

        // Under k=3 the unused label picks up no absorption mass.
        let b = three.absorption_row(state_index(&s, 3));
        assert!((b[0] - 2.0 / 3.0).abs() < 1e-9);
        assert!((b[1] - 1.0 / 3.0).abs() < 1e-9);
        assert!(b[2].abs() < 1e-12);
    }

    #[test]
    fn distribution_iterates_and_converges() {
        let chain = k3_chain();
        let s = NetworkState::new(vec![1, 1, 2], 2).unwrap();

        let z0 = chain.distribution_at_time(&s, 0).unwrap();
        assert_eq!(z0[1], 1.0);
        assert_eq!(z0.iter().sum::<f64>(), 1.0);

        let z1 = chain.distribution_at_time(&s, 1).unwrap();
        let m = chain.transition_matrix();
        for j in 0..8 {
            assert!((z1[j] - m[(1, j)]).abs() < 1e-15);
        }

        // Long-run mass settles on the absorbing states per B.
        let z = chain.distribution_at_time(&s, 300).unwrap();
        assert!((z[0] - 2.0 / 3.0).abs() < 1e-9);
        assert!((z[7] - 1.0 / 3.0).abs() < 1e-9);
        assert!(z[1..7].iter().all(|&p| p < 1e-9));
        assert!((z.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ring_distribution_cycles_forever() {
        let chain = build_chain(&generate(Family::RingDirected, 3).unwrap(), 2).unwrap();
        let s = NetworkState::new(vec![1, 1, 2], 2).unwrap();
        let z3 = chain.distribution_at_time(&s, 3).unwrap();
        let z0 = chain.distribution_at_time(&s, 0).unwrap();
        assert_eq!(z0, z3);
        let z300 = chain.distribution_at_time(&s, 300).unwrap();
        assert_eq!(z0, z300);
    }

    #[test]
    fn distribution_accepts_any_initial_mixture() {
        let chain = k3_chain();
        let z = vec![1.0 / 8.0; 8];
        let out = distribution_at_time(&chain, &z, 300).unwrap();
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Uniform over H puts 1/8 on each consensus state immediately and
        // splits the rest evenly by symmetry.
        assert!((out[0] - 0.5).abs() < 1e-9);
        assert!((out[7] - 0.5).abs() < 1e-9);

        assert!(matches!(
            distribution_at_time(&chain, &[0.5, 0.5], 1),
            Err(ChainError::InvalidDistribution { len: 2, expected: 8 })
        ));
        assert!(matches!(
            distribution_at_time(&chain, &vec![0.25; 8], 1),
            Err(ChainError::InvalidDistribution { .. })
        ));
    }

    #[test]
    fn variances_are_nonnegative() {
        for family in [Family::Complete, Family::Star, Family::RingBidirectional] {
            let g = generate(family, 4).unwrap();
            let analysis = analyze_absorbing(&build_chain(&g, 2).unwrap()).unwrap();
            for &v in analysis.step_variance() {
                assert!(v >= 0.0);
            }
        }
    }

    #[test]
    fn tail_bound_clamps() {
        assert!((markov_tail_bound(5.5, 110.0) - 0.05).abs() < 1e-15);
        assert_eq!(markov_tail_bound(5.5, 2.0), 1.0);
        assert_eq!(markov_tail_bound(5.5, 0.0), 1.0);
    }

    #[test]
    fn distribution_rejects_bad_states() {
        let chain = k3_chain();
        let short = NetworkState::new(vec![1, 2], 2).unwrap();
        assert!(matches!(
            chain.distribution_at_time(&short, 1),
            Err(ChainError::State(StateError::LengthMismatch { .. }))
        ));
        let wide = NetworkState::new(vec![1, 2, 3], 3).unwrap();
        assert!(matches!(
            chain.distribution_at_time(&wide, 1),
            Err(ChainError::State(StateError::LabelOutOfRange { .. }))
        ));
    }

    #[test]
    fn state_cap_guards_memory() {
        let g = generate(Family::Complete, 4).unwrap();
        assert!(matches!(
            GossipChain::build_with_caps(&g, 10, DEFAULT_ENUMERATION_CAP, 4096),
            Err(ChainError::StateSpaceTooLarge { product: 10_000, cap: 4096 })
        ));
    }
}
