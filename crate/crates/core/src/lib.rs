//! Simulation and exact analysis of unconstrained gossip consensus on
//! directed networks.
//!
//! Each synchronous tick, every node with out-neighbors transmits its value
//! to one of them chosen uniformly; nodes receiving several values adopt one
//! by proportional selection. The same process is treated two ways:
//!
//! - [`sim`] runs it as a Monte-Carlo experiment with reproducible
//!   per-replication RNG streams;
//! - [`markov`] builds the exact k^n-state absorbing chain over the graph's
//!   adoption-matrix set and solves for absorption probabilities, expected
//!   consensus times, and variances via the fundamental matrix.
//!
//! [`graph`] holds the directed-graph model, the generator families, and the
//! edge-list text format; [`gossip`] the state machine itself; [`metrics`]
//! distance-to-consensus metrics and the t-test layer comparing simulation to
//! theory; [`sweep`] the table-producing sweeps over families and edge
//! densities; [`linalg`] the dense matrix kernel used by the analysis.

pub mod gossip;
pub mod graph;
pub mod linalg;
pub mod markov;
pub mod metrics;
pub mod sim;
pub mod sweep;
