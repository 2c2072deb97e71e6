//! The gossip state machine. Each tick, every node with out-neighbors
//! transmits its value to one of them; a node that hears several senders
//! resolves the conflict by adopting one received value, chosen uniformly
//! among the transmissions it received (which makes the adopted *value*
//! proportional to how many senders held it). Nodes nobody transmitted to
//! keep their value. Both the transmission and adoption matrix families can
//! be enumerated exhaustively for exact analysis.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use rand::RngCore;
use thiserror::Error;

use crate::graph::DirectedGraph;

/// Default ceiling for exhaustive enumerations.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Consensus tolerance under which integer labels must match exactly.
pub const DEFAULT_EPSILON: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("state has {len} entries but the graph has {n} nodes")]
    LengthMismatch { len: usize, n: usize },
    #[error("label {label} at position {position} is outside 1..={k}")]
    LabelOutOfRange { label: u32, position: usize, k: u32 },
    #[error("state string '{text}' is not valid for n={n}, k={k}: {reason}")]
    UnparsableState { text: String, n: usize, k: u32, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error(
        "transmission set too large: the out-degree product is {product}, \
         above the cap of {cap}"
    )]
    TransmissionsTooLarge { product: u128, cap: usize },
    #[error(
        "adoption set too large: a transmission matrix admits {product} \
         resolutions, above the cap of {cap}"
    )]
    AdoptionsTooLarge { product: u128, cap: usize },
}

/// One assignment of labels to nodes: entry i is node i's label in `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetworkState {
    values: Vec<u32>,
}

impl NetworkState {
    pub fn new(values: Vec<u32>, k: u32) -> Result<Self, StateError> {
        for (position, &label) in values.iter().enumerate() {
            if label < 1 || label > k {
                return Err(StateError::LabelOutOfRange { label, position, k });
            }
        }
        Ok(NetworkState { values })
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The compact display form: concatenated digits when every label is a
    /// single digit ("1122"), comma-separated otherwise ("1,12,3").
    pub fn to_compact_string(&self) -> String {
        if self.values.iter().all(|&v| v <= 9) {
            self.values.iter().map(|v| v.to_string()).collect()
        } else {
            let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
            parts.join(",")
        }
    }

    /// Parses the compact form back into a state and validates it against
    /// the expected node count and label range.
    pub fn parse(text: &str, n: usize, k: u32) -> Result<Self, StateError> {
        let fail = |reason: &str| StateError::UnparsableState {
            text: text.to_string(),
            n,
            k,
            reason: reason.to_string(),
        };
        let values: Vec<u32> = if text.contains(',') {
            text.split(',')
                .map(|part| part.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| fail("expected comma-separated labels"))?
        } else {
            text.chars()
                .map(|c| c.to_digit(10).filter(|&d| d > 0).ok_or(()))
                .collect::<Result<_, _>>()
                .map_err(|_| fail("expected digits 1-9 or the comma-separated form"))?
        };
        if values.len() != n {
            return Err(fail(&format!("expected {n} labels, found {}", values.len())));
        }
        NetworkState::new(values, k)
    }
}

impl fmt::Display for NetworkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact_string())
    }
}

impl serde::Serialize for NetworkState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_compact_string())
    }
}

impl<'de> serde::Deserialize<'de> for NetworkState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        let values: Result<Vec<u32>, ()> = if text.contains(',') {
            text.split(',').map(|p| p.trim().parse::<u32>().map_err(|_| ())).collect()
        } else {
            text.chars().map(|c| c.to_digit(10).ok_or(())).collect()
        };
        match values {
            Ok(values) if !values.is_empty() && values.iter().all(|&v| v >= 1) => {
                Ok(NetworkState { values })
            }
            _ => Err(serde::de::Error::custom(format!("invalid state string '{text}'"))),
        }
    }
}

/// Who transmits to whom in one tick: `target(j)` is the receiver node j
/// sends its value to, or `None` for nodes with no out-neighbors. Viewed as
/// a 0/1 matrix, column j carries a single 1 in row `target(j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransmissionMatrix {
    targets: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixShapeError {
    #[error("node {j} transmits to {i} but the graph has no edge ({j}, {i})")]
    MissingEdge { j: usize, i: usize },
    #[error("node {j} transmits to itself")]
    SelfTransmission { j: usize },
    #[error("node {j} has out-neighbors but no transmission target")]
    SilentSender { j: usize },
    #[error("row {i} adopts from {j} but the graph has no edge ({j}, {i})")]
    MissingAdoptionEdge { i: usize, j: usize },
}

impl TransmissionMatrix {
    /// Validates the per-column target assignment against the graph: every
    /// node with out-neighbors sends to exactly one of them, nobody sends to
    /// itself, and nodes without out-neighbors stay silent.
    pub fn from_targets(
        g: &DirectedGraph,
        targets: Vec<Option<usize>>,
    ) -> Result<Self, MatrixShapeError> {
        assert_eq!(targets.len(), g.node_count(), "target list length mismatch");
        for (j, &t) in targets.iter().enumerate() {
            match t {
                Some(i) if i == j => return Err(MatrixShapeError::SelfTransmission { j }),
                Some(i) if !g.has_edge(j, i) => {
                    return Err(MatrixShapeError::MissingEdge { j, i })
                }
                None if g.out_degree(j) > 0 => {
                    return Err(MatrixShapeError::SilentSender { j })
                }
                _ => {}
            }
        }
        Ok(TransmissionMatrix { targets })
    }

    pub fn n(&self) -> usize {
        self.targets.len()
    }

    /// The receiver node j transmits to, if any.
    pub fn target(&self, j: usize) -> Option<usize> {
        self.targets[j]
    }

    /// Matrix entry w_ij: 1 when node j transmits to node i.
    pub fn entry(&self, i: usize, j: usize) -> u8 {
        u8::from(self.targets[j] == Some(i))
    }

    /// For each node, the senders that transmitted to it, ascending.
    pub fn senders_by_receiver(&self) -> Vec<Vec<usize>> {
        let mut senders = vec![Vec::new(); self.targets.len()];
        for (j, &t) in self.targets.iter().enumerate() {
            if let Some(i) = t {
                senders[i].push(j);
            }
        }
        senders
    }
}

/// The resolved outcome of one tick: row i carries a single 1 in column
/// `source(i)`, meaning node i takes node `source(i)`'s value (itself when it
/// received nothing).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdoptionMatrix {
    sources: Vec<usize>,
}

impl AdoptionMatrix {
    /// Validates the per-row source assignment against the graph: every
    /// off-diagonal source must follow an existing edge.
    pub fn from_sources(
        g: &DirectedGraph,
        sources: Vec<usize>,
    ) -> Result<Self, MatrixShapeError> {
        assert_eq!(sources.len(), g.node_count(), "source list length mismatch");
        for (i, &j) in sources.iter().enumerate() {
            if i != j && !g.has_edge(j, i) {
                return Err(MatrixShapeError::MissingAdoptionEdge { i, j });
            }
        }
        Ok(AdoptionMatrix { sources })
    }

    pub fn n(&self) -> usize {
        self.sources.len()
    }

    /// The node whose value row i adopts.
    pub fn source(&self, i: usize) -> usize {
        self.sources[i]
    }

    /// Matrix entry a_ij: 1 when node i adopts node j's value.
    pub fn entry(&self, i: usize, j: usize) -> u8 {
        u8::from(self.sources[i] == j)
    }

    pub fn is_identity(&self) -> bool {
        self.sources.iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// How simultaneous receptions collapse into one adopted value per node.
/// `sample` draws one resolution of a transmission matrix; `enumerate` lists
/// every resolution `sample` can produce, and nothing else.
pub trait ConflictResolver {
    fn sample(&self, w: &TransmissionMatrix, rng: &mut dyn RngCore) -> AdoptionMatrix;

    fn enumerate(
        &self,
        w: &TransmissionMatrix,
        cap: usize,
    ) -> Result<Vec<AdoptionMatrix>, EnumerationError>;
}

/// The proportional rule: each receiver picks uniformly among the
/// transmissions it received. Values held by several senders are adopted
/// proportionally to their multiplicity; a {2,2,3} reception adopts 2 with
/// probability 2/3.
#[derive(Debug, Clone, Copy, Default)]
pub struct Proportional;

impl ConflictResolver for Proportional {
    fn sample(&self, w: &TransmissionMatrix, rng: &mut dyn RngCore) -> AdoptionMatrix {
        let senders = w.senders_by_receiver();
        let sources = senders
            .iter()
            .enumerate()
            .map(|(i, s)| if s.is_empty() { i } else { s[rng.gen_range(0..s.len())] })
            .collect();
        AdoptionMatrix { sources }
    }

    fn enumerate(
        &self,
        w: &TransmissionMatrix,
        cap: usize,
    ) -> Result<Vec<AdoptionMatrix>, EnumerationError> {
        let senders = w.senders_by_receiver();
        let mut product: u128 = 1;
        for s in &senders {
            product = product.saturating_mul(s.len().max(1) as u128);
        }
        if product > cap as u128 {
            return Err(EnumerationError::AdoptionsTooLarge { product, cap });
        }

        // Odometer over per-row candidates, least-significant row last, so
        // the output is in lexicographic source order.
        let candidates: Vec<Vec<usize>> = senders
            .into_iter()
            .enumerate()
            .map(|(i, s)| if s.is_empty() { vec![i] } else { s })
            .collect();
        let n = candidates.len();
        let mut counters = vec![0usize; n];
        let mut out = Vec::with_capacity(product as usize);
        loop {
            let sources: Vec<usize> =
                counters.iter().zip(&candidates).map(|(&c, cand)| cand[c]).collect();
            out.push(AdoptionMatrix { sources });
            let mut row = n;
            loop {
                if row == 0 {
                    return Ok(out);
                }
                row -= 1;
                counters[row] += 1;
                if counters[row] < candidates[row].len() {
                    break;
                }
                counters[row] = 0;
            }
        }
    }
}

/// Draws one transmission matrix: every node with out-neighbors picks a
/// target uniformly among them, in ascending node order (which fixes the RNG
/// consumption order for reproducibility).
pub fn sample_transmission(g: &DirectedGraph, rng: &mut impl Rng) -> TransmissionMatrix {
    let targets = (0..g.node_count())
        .map(|j| {
            let nbrs = g.out_neighbors(j);
            if nbrs.is_empty() {
                None
            } else {
                Some(nbrs[rng.gen_range(0..nbrs.len())])
            }
        })
        .collect();
    TransmissionMatrix { targets }
}

/// Every valid transmission matrix of the graph: the Cartesian product of
/// per-node target choices, in lexicographic target order.
pub fn enumerate_transmissions(
    g: &DirectedGraph,
    cap: usize,
) -> Result<Vec<TransmissionMatrix>, EnumerationError> {
    let n = g.node_count();
    let mut product: u128 = 1;
    for j in 0..n {
        product = product.saturating_mul(g.out_degree(j).max(1) as u128);
    }
    if product > cap as u128 {
        return Err(EnumerationError::TransmissionsTooLarge { product, cap });
    }

    let mut counters = vec![0usize; n];
    let mut out = Vec::with_capacity(product as usize);
    loop {
        let targets: Vec<Option<usize>> = (0..n)
            .map(|j| {
                let nbrs = g.out_neighbors(j);
                if nbrs.is_empty() {
                    None
                } else {
                    Some(nbrs[counters[j]])
                }
            })
            .collect();
        out.push(TransmissionMatrix { targets });
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            counters[j] += 1;
            if counters[j] < g.out_degree(j).max(1) {
                break;
            }
            counters[j] = 0;
        }
    }
}

/// One proportionally resolved adoption matrix for `w`.
pub fn proportional_select(w: &TransmissionMatrix, rng: &mut impl Rng) -> AdoptionMatrix {
    Proportional.sample(w, rng)
}

/// The union of every resolution of every given transmission matrix,
/// deduplicated by exact equality, in first-seen order.
pub fn enumerate_adoptions(
    ts: &[TransmissionMatrix],
    cap: usize,
) -> Result<Vec<AdoptionMatrix>, EnumerationError> {
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::new();
    for w in ts {
        for a in Proportional.enumerate(w, cap)? {
            if seen.insert(a.sources.clone()) {
                out.push(a);
            }
        }
    }
    Ok(out)
}

/// Applies one resolved tick: node i takes the value of `a.source(i)`.
pub fn apply_adoption(a: &AdoptionMatrix, x: &NetworkState) -> NetworkState {
    assert_eq!(a.n(), x.len(), "dimension mismatch");
    let values = a.sources.iter().map(|&j| x.values[j]).collect();
    NetworkState { values }
}

/// Consensus means the spread of labels is below epsilon; at the default
/// epsilon of 0.5 integer labels must be identical.
pub fn is_consensus(x: &NetworkState, epsilon: f64) -> bool {
    match (x.values.iter().max(), x.values.iter().min()) {
        (Some(&max), Some(&min)) => ((max - min) as f64) < epsilon,
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::collections::HashMap;

    fn state(values: &[u32], k: u32) -> NetworkState {
        NetworkState::new(values.to_vec(), k).unwrap()
    }

    #[test]
    fn state_validation_and_strings() {
        assert!(NetworkState::new(vec![1, 2, 3], 3).is_ok());
        assert!(matches!(
            NetworkState::new(vec![1, 4], 3),
            Err(StateError::LabelOutOfRange { label: 4, position: 1, k: 3 })
        ));
        assert!(matches!(
            NetworkState::new(vec![0, 1], 2),
            Err(StateError::LabelOutOfRange { label: 0, .. })
        ));

        assert_eq!(state(&[1, 1, 2, 2], 2).to_compact_string(), "1122");
        assert_eq!(state(&[1, 12, 3], 12).to_compact_string(), "1,12,3");

        assert_eq!(NetworkState::parse("1122", 4, 2).unwrap(), state(&[1, 1, 2, 2], 2));
        assert_eq!(NetworkState::parse("1,12,3", 3, 12).unwrap(), state(&[1, 12, 3], 12));
        assert!(NetworkState::parse("112", 4, 2).is_err());
        assert!(NetworkState::parse("1123", 4, 2).is_err());
        assert!(NetworkState::parse("10", 2, 2).is_err());
        assert!(NetworkState::parse("abc", 3, 2).is_err());
    }

    #[test]
    fn transmission_enumeration_counts() {
        let cap = DEFAULT_ENUMERATION_CAP;
        let k3 = generate(Family::Complete, 3).unwrap();
        assert_eq!(enumerate_transmissions(&k3, cap).unwrap().len(), 8);

        let ring = generate(Family::RingDirected, 4).unwrap();
        assert_eq!(enumerate_transmissions(&ring, cap).unwrap().len(), 1);

        let star = generate(Family::Star, 3).unwrap();
        assert_eq!(enumerate_transmissions(&star, cap).unwrap().len(), 2);

        // K3's brute-force count: every 0/1 matrix that is zero-diagonal and
        // has exactly one 1 per column placed along an edge.
        let mut brute = 0;
        for t0 in 0..3 {
            for t1 in 0..3 {
                for t2 in 0..3 {
                    if t0 != 0 && t1 != 1 && t2 != 2 {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(brute, 8);

        assert!(matches!(
            enumerate_transmissions(&generate(Family::Complete, 10).unwrap(), 1000),
            Err(EnumerationError::TransmissionsTooLarge { .. })
        ));
    }

    #[test]
    fn transmission_invariants_hold() {
        let g = generate(Family::Star, 4).unwrap();
        for w in enumerate_transmissions(&g, DEFAULT_ENUMERATION_CAP).unwrap() {
            for j in 0..4 {
                let col: u8 = (0..4).map(|i| w.entry(i, j)).sum();
                assert_eq!(col, u8::from(g.out_degree(j) > 0));
                assert_eq!(w.entry(j, j), 0);
            }
            // Round-trip through the validated constructor.
            let targets: Vec<_> = (0..4).map(|j| w.target(j)).collect();
            assert_eq!(TransmissionMatrix::from_targets(&g, targets).unwrap(), w);
        }
    }

    #[test]
    fn directed_ring_has_unique_cyclic_transmission() {
        let g = generate(Family::RingDirected, 3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let w = sample_transmission(&g, &mut rng);
        assert_eq!(w.entry(1, 0), 1);
        assert_eq!(w.entry(2, 1), 1);
        assert_eq!(w.entry(0, 2), 1);
        let a = proportional_select(&w, &mut rng);
        assert_eq!((a.source(0), a.source(1), a.source(2)), (2, 0, 1));
    }

    #[test]
    fn sample_transmission_no_out_neighbors() {
        let g = DirectedGraph::from_edge_list(1, []).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let w = sample_transmission(&g, &mut rng);
        assert_eq!(w.target(0), None);
        // A node nobody transmits to keeps its own value.
        let a = proportional_select(&w, &mut rng);
        assert!(a.is_identity());
    }

    #[test]
    fn adoption_counts_k3_and_k4() {
        let cap = DEFAULT_ENUMERATION_CAP;
        let k3 = generate(Family::Complete, 3).unwrap();
        let ts = enumerate_transmissions(&k3, cap).unwrap();
        assert_eq!(enumerate_adoptions(&ts, cap).unwrap().len(), 11);

        let k4 = generate(Family::Complete, 4).unwrap();
        let ts = enumerate_transmissions(&k4, cap).unwrap();
        assert_eq!(ts.len(), 81);
        assert_eq!(enumerate_adoptions(&ts, cap).unwrap().len(), 95);

        let ring = generate(Family::RingDirected, 3).unwrap();
        let ts = enumerate_transmissions(&ring, cap).unwrap();
        let adoptions = enumerate_adoptions(&ts, cap).unwrap();
        assert_eq!(adoptions.len(), 1);
        assert_eq!(
            (adoptions[0].source(0), adoptions[0].source(1), adoptions[0].source(2)),
            (2, 0, 1)
        );
    }

    #[test]
    fn adoption_rows_are_stochastic_and_edge_respecting() {
        for family in [Family::Complete, Family::Star, Family::RingBidirectional] {
            let g = generate(family, 4).unwrap();
            let ts = enumerate_transmissions(&g, DEFAULT_ENUMERATION_CAP).unwrap();
            for a in enumerate_adoptions(&ts, DEFAULT_ENUMERATION_CAP).unwrap() {
                for i in 0..4 {
                    let row: u8 = (0..4).map(|j| a.entry(i, j)).sum();
                    assert_eq!(row, 1);
                }
                let sources: Vec<_> = (0..4).map(|i| a.source(i)).collect();
                assert!(AdoptionMatrix::from_sources(&g, sources).is_ok());
            }
        }
    }

    #[test]
    fn sampled_resolutions_match_enumeration_with_uniform_rows() {
        // For each transmission matrix of each small topology: every sampled
        // resolution must appear in the enumerated set, and per-row choice
        // frequencies must be uniform within 3-sigma binomial bounds.
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let trials = 10_000;
        for family in [Family::Complete, Family::Star, Family::RingBidirectional] {
            for n in [3, 4] {
                let g = generate(family, n).unwrap();
                for w in enumerate_transmissions(&g, DEFAULT_ENUMERATION_CAP).unwrap() {
                    let enumerated: HashSet<Vec<usize>> =
                        Proportional
                            .enumerate(&w, DEFAULT_ENUMERATION_CAP)
                            .unwrap()
                            .into_iter()
                            .map(|a| (0..n).map(|i| a.source(i)).collect())
                            .collect();
                    let mut row_counts: Vec<HashMap<usize, u32>> = vec![HashMap::new(); n];
                    for _ in 0..trials {
                        let a = Proportional.sample(&w, &mut rng);
                        let sources: Vec<usize> = (0..n).map(|i| a.source(i)).collect();
                        assert!(enumerated.contains(&sources));
                        for (i, &j) in sources.iter().enumerate() {
                            *row_counts[i].entry(j).or_default() += 1;
                        }
                    }
                    // 4.5 sigma: this loop makes hundreds of binomial
                    // comparisons, so a 3-sigma bound would trip on noise.
                    let senders = w.senders_by_receiver();
                    for (i, counts) in row_counts.iter().enumerate() {
                        let c = senders[i].len().max(1);
                        let p = 1.0 / c as f64;
                        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
                        for (_, &count) in counts {
                            assert!(
                                (count as f64 - trials as f64 * p).abs() <= 4.5 * sigma.max(1.0),
                                "row {i} frequency {count} too far from uniform"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn value_proportionality_two_two_three() {
        // One receiver, three senders holding values {2,2,3}: value 2 must be
        // adopted with probability 2/3.
        let g = DirectedGraph::from_edge_list(4, [(1, 0), (2, 0), (3, 0)]).unwrap();
        let w = TransmissionMatrix::from_targets(&g, vec![None, Some(0), Some(0), Some(0)])
            .unwrap();
        let x = state(&[1, 2, 2, 3], 3);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let trials = 30_000;
        let mut twos = 0;
        for _ in 0..trials {
            let next = apply_adoption(&proportional_select(&w, &mut rng), &x);
            match next.values()[0] {
                2 => twos += 1,
                3 => {}
                v => panic!("receiver adopted value {v}"),
            }
        }
        let freq = twos as f64 / trials as f64;
        let sigma = (2.0 / 9.0f64 / trials as f64).sqrt();
        assert!((freq - 2.0 / 3.0).abs() < 4.0 * sigma, "frequency {freq}");
    }

    #[test]
    fn apply_adoption_basics() {
        let g = DirectedGraph::from_edge_list(4, [(0, 1), (0, 2), (2, 3)]).unwrap();
        let x = state(&[1, 2, 3, 4], 4);
        // Node 1 adopts node 0's value; everyone else keeps their own.
        let a = AdoptionMatrix::from_sources(&g, vec![0, 0, 2, 3]).unwrap();
        assert_eq!(apply_adoption(&a, &x), state(&[1, 1, 3, 4], 4));

        let id = AdoptionMatrix::from_sources(&g, vec![0, 1, 2, 3]).unwrap();
        assert!(id.is_identity());
        assert_eq!(apply_adoption(&id, &x), x);

        // Consensus is a fixed point of every adoption matrix.
        let k3 = generate(Family::Complete, 3).unwrap();
        let ts = enumerate_transmissions(&k3, DEFAULT_ENUMERATION_CAP).unwrap();
        let consensus = state(&[2, 2, 2], 2);
        for a in enumerate_adoptions(&ts, DEFAULT_ENUMERATION_CAP).unwrap() {
            assert_eq!(apply_adoption(&a, &consensus), consensus);
        }
    }

    #[test]
    fn adoption_matrix_rejects_non_edges() {
        let g = generate(Family::RingDirected, 3).unwrap();
        assert!(matches!(
            AdoptionMatrix::from_sources(&g, vec![1, 1, 2]),
            Err(MatrixShapeError::MissingAdoptionEdge { i: 0, j: 1 })
        ));
    }

    #[test]
    fn consensus_predicate() {
        assert!(is_consensus(&state(&[2, 2, 2], 2), 0.5));
        assert!(!is_consensus(&state(&[1, 2, 1], 2), 0.5));
        assert!(is_consensus(&state(&[1, 1], 2), 2.0));
        assert!(is_consensus(&state(&[1, 2], 2), 1.5));
    }

    #[test]
    fn state_serde_roundtrip() {
        let s = state(&[1, 1, 2, 2], 2);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "\"1122\"");
        assert_eq!(serde_json::from_str::<NetworkState>(&json).unwrap(), s);

        let wide = state(&[1, 12, 3], 12);
        let json = serde_json::to_string(&wide).unwrap();
        assert_eq!(json, "\"1,12,3\"");
        assert_eq!(serde_json::from_str::<NetworkState>(&json).unwrap(), wide);
    }
}
