//! Directed communication topologies: construction, the standard generator
//! families, random graphs at a target edge density, and the two structural
//! predicates (directed spanning tree, directed ring) that decide whether
//! gossip on the graph is guaranteed to settle.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

/// Whole-graph resamples attempted by [`random_at_density`] before giving up.
pub const DENSITY_RESAMPLE_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("self-loop ({node}, {node}) is not allowed")]
    SelfLoop { node: usize },
    #[error("edge ({u}, {v}) has an endpoint out of range for {n} nodes")]
    EndpointOutOfRange { u: usize, v: usize, n: usize },
    #[error("{family} requires at least {min} nodes, got {n}")]
    TooFewNodes { family: Family, min: usize, n: usize },
    #[error("density {density} on {n} nodes leaves fewer than n-1 edges; no spanning tree can exist")]
    DensityTooLow { density: f64, n: usize },
    #[error(
        "no graph at density {density} satisfied the convergence predicates \
         after {attempts} attempts"
    )]
    InfeasibleDensity { density: f64, attempts: usize },
}

/// A simple directed graph on nodes `0..n`. Immutable once built; adjacency
/// lists are precomputed so traversals never touch the edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl DirectedGraph {
    /// Builds a graph from explicit edges. Duplicates collapse; self-loops
    /// and out-of-range endpoints are rejected.
    pub fn from_edge_list(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut edges = BTreeSet::new();
        for (u, v) in pairs {
            if u == v {
                return Err(GraphError::SelfLoop { node: u });
            }
            if u >= n || v >= n {
                return Err(GraphError::EndpointOutOfRange { u, v, n });
            }
            edges.insert((u, v));
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            out_adj[u].push(v);
            in_adj[v].push(u);
        }
        Ok(DirectedGraph { n, edges, out_adj, in_adj })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u, v))
    }

    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out_adj[u]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out_adj[u].len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_adj[v].len()
    }

    /// Ratio of present edges to the n(n-1) possible ones.
    pub fn density(&self) -> f64 {
        self.edges.len() as f64 / (self.n * (self.n - 1)) as f64
    }

    /// True when some root node reaches every other node along directed
    /// edges. Checked by one reachability scan per candidate root.
    pub fn has_directed_spanning_tree(&self) -> bool {
        (0..self.n).any(|root| self.reachable_from(root).iter().all(|&r| r))
    }

    /// True when the edges form a single directed cycle covering all nodes:
    /// every in-degree and out-degree is exactly one and following the unique
    /// successor from node 0 returns there after n hops.
    pub fn is_directed_ring(&self) -> bool {
        if self.n == 0 || self.edges.len() != self.n {
            return false;
        }
        if (0..self.n).any(|v| self.out_degree(v) != 1 || self.in_degree(v) != 1) {
            return false;
        }
        let mut cur = 0;
        for _ in 0..self.n {
            cur = self.out_adj[cur][0];
        }
        cur == 0 && {
            let mut seen = vec![false; self.n];
            let mut node = 0;
            for _ in 0..self.n {
                if seen[node] {
                    return false;
                }
                seen[node] = true;
                node = self.out_adj[node][0];
            }
            true
        }
    }

    /// Why gossip on this graph cannot be guaranteed to reach consensus, or
    /// `None` when it can (directed spanning tree present, not a ring).
    pub fn consensus_obstruction(&self) -> Option<&'static str> {
        if !self.has_directed_spanning_tree() {
            Some("the graph has no directed spanning tree")
        } else if self.is_directed_ring() {
            Some("the graph is a directed ring (values rotate forever)")
        } else {
            None
        }
    }

    fn reachable_from(&self, root: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &v in &self.out_adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// The generator families used throughout the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Complete,
    Star,
    RingBidirectional,
    RingDirected,
}

impl Family {
    pub const ALL: [Family; 4] =
        [Family::Complete, Family::Star, Family::RingBidirectional, Family::RingDirected];

    pub fn name(self) -> &'static str {
        match self {
            Family::Complete => "complete",
            Family::Star => "star",
            Family::RingBidirectional => "ring-bidirectional",
            Family::RingDirected => "ring-directed",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "complete" => Ok(Family::Complete),
            "star" => Ok(Family::Star),
            "ring-bidirectional" => Ok(Family::RingBidirectional),
            "ring-directed" => Ok(Family::RingDirected),
            other => Err(format!(
                "unknown topology family '{other}' (expected complete, star, \
                 ring-bidirectional, or ring-directed)"
            )),
        }
    }
}

/// Builds one of the named topologies. Stars put the hub at node 0; rings
/// run node i to node (i+1) mod n.
pub fn generate(family: Family, n: usize) -> Result<DirectedGraph, GraphError> {
    let min = match family {
        Family::Complete | Family::Star => 2,
        Family::RingBidirectional | Family::RingDirected => 3,
    };
    if n < min {
        return Err(GraphError::TooFewNodes { family, min, n });
    }
    let mut edges = Vec::new();
    match family {
        Family::Complete => {
            for u in 0..n {
                for v in 0..n {
                    if u != v {
                        edges.push((u, v));
                    }
                }
            }
        }
        Family::Star => {
            for i in 1..n {
                edges.push((0, i));
                edges.push((i, 0));
            }
        }
        Family::RingBidirectional => {
            for i in 0..n {
                edges.push((i, (i + 1) % n));
                edges.push(((i + 1) % n, i));
            }
        }
        Family::RingDirected => {
            for i in 0..n {
                edges.push((i, (i + 1) % n));
            }
        }
    }
    DirectedGraph::from_edge_list(n, edges)
}

/// Samples a random graph by deleting edges from the complete graph on
/// `base_n` nodes until `ceil(target_density * n(n-1))` remain. Whole graphs
/// are resampled (up to [`DENSITY_RESAMPLE_ATTEMPTS`] times) until the result
/// has a directed spanning tree and is not a directed ring, so every returned
/// graph is guaranteed to reach consensus.
pub fn random_at_density(
    base_n: usize,
    target_density: f64,
    rng: &mut impl Rng,
) -> Result<DirectedGraph, GraphError> {
    let total = base_n * (base_n - 1);
    let keep = (target_density * total as f64).ceil() as usize;
    if keep < base_n.saturating_sub(1) {
        return Err(GraphError::DensityTooLow { density: target_density, n: base_n });
    }
    let keep = keep.min(total);

    let mut all_edges: Vec<(usize, usize)> = Vec::with_capacity(total);
    for u in 0..base_n {
        for v in 0..base_n {
            if u != v {
                all_edges.push((u, v));
            }
        }
    }
    for _ in 0..DENSITY_RESAMPLE_ATTEMPTS {
        all_edges.shuffle(rng);
        let g = DirectedGraph::from_edge_list(base_n, all_edges[..keep].iter().copied())
            .expect("edges from a complete graph are always valid");
        if g.has_directed_spanning_tree() && !g.is_directed_ring() {
            return Ok(g);
        }
    }
    Err(GraphError::InfeasibleDensity {
        density: target_density,
        attempts: DENSITY_RESAMPLE_ATTEMPTS,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EdgeListError {
    #[error("edge list is empty: expected a node count on the first line")]
    MissingNodeCount,
    #[error("line {line}: invalid node count '{text}'")]
    InvalidNodeCount { line: usize, text: String },
    #[error("line {line}: expected 'u v', got '{text}'")]
    MalformedEdge { line: usize, text: String },
    #[error("line {line}: node id {id} is out of range 1..={n}")]
    NodeIdOutOfRange { line: usize, id: usize, n: usize },
    #[error("line {line}: node ids are 1-based; 0 is not a valid id")]
    ZeroNodeId { line: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Parses the edge-list text format: the first significant line holds the
/// node count, every following one an edge as two 1-based ids. `#` starts a
/// comment; blank lines are skipped.
pub fn parse_edge_list(text: &str) -> Result<DirectedGraph, EdgeListError> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        match n {
            None => {
                n = Some(content.parse().map_err(|_| EdgeListError::InvalidNodeCount {
                    line,
                    text: content.to_string(),
                })?);
            }
            Some(n) => {
                let mut parts = content.split_whitespace();
                let (u, v) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(u), Some(v), None) => (u, v),
                    _ => {
                        return Err(EdgeListError::MalformedEdge {
                            line,
                            text: content.to_string(),
                        })
                    }
                };
                let parse = |s: &str| {
                    s.parse::<usize>().map_err(|_| EdgeListError::MalformedEdge {
                        line,
                        text: content.to_string(),
                    })
                };
                let (u, v) = (parse(u)?, parse(v)?);
                for id in [u, v] {
                    if id == 0 {
                        return Err(EdgeListError::ZeroNodeId { line });
                    }
                    if id > n {
                        return Err(EdgeListError::NodeIdOutOfRange { line, id, n });
                    }
                }
                edges.push((u - 1, v - 1));
            }
        }
    }
    let n = n.ok_or(EdgeListError::MissingNodeCount)?;
    Ok(DirectedGraph::from_edge_list(n, edges)?)
}

/// Renders a graph in the edge-list text format with edges sorted, so the
/// output is stable and `parse_edge_list` round-trips it exactly.
pub fn format_edge_list(g: &DirectedGraph) -> String {
    let mut out = format!("{}\n", g.node_count());
    for (u, v) in g.edges() {
        out.push_str(&format!("{} {}\n", u + 1, v + 1));
    }
    out
}
