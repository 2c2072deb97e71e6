use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gossip_core::gossip::{DEFAULT_ENUMERATION_CAP, DEFAULT_EPSILON};
use gossip_core::markov::DEFAULT_STATE_CAP;
use gossip_core::sim::DEFAULT_MAX_STEPS;

#[derive(Debug, Parser)]
#[command(
    name = "gossip",
    version,
    about = "Exact analyzer and Monte Carlo simulator for unconstrained gossip consensus on directed networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact absorbing-chain analysis: consensus probabilities, expected
    /// times, variances, and 95% step bounds per initial state.
    Analyze(AnalyzeArgs),
    /// Monte Carlo replications of the gossip process from one initial state.
    Simulate(SimulateArgs),
    /// Side-by-side exact vs simulated comparison over every initial state.
    Validate(ValidateArgs),
    /// Distance-partition consensus-time tables across topology families.
    Sweep(SweepArgs),
    /// Consensus time against edge density on random subgraphs.
    Density(DensityArgs),
}

/// Where the graph comes from: exactly one of the two flags.
#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Topology shorthand FAMILY:N, e.g. complete:4, star:5,
    /// ring-bidirectional:5, ring-directed:3.
    #[arg(long, value_name = "FAMILY:N", required_unless_present = "graph", conflicts_with = "graph")]
    pub topology: Option<String>,

    /// Edge-list file: first significant line the node count, then one
    /// "u v" pair of 1-based ids per line; '#' starts a comment.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,

    /// Write the report to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Fixed-width tables with 2-4 decimals.
    Human,
    /// Manifest-embedded JSON with full-precision reals.
    Json,
    /// Flat CSV, manifest in leading '#' comment lines.
    Csv,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Number of labels per node (k).
    #[arg(long, default_value_t = 2)]
    pub states: u32,

    /// Include the full transition matrix in the report.
    #[arg(long)]
    pub emit_matrix: bool,

    /// Abort if the transmission or adoption enumeration exceeds this size.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub enumeration_cap: usize,

    /// Abort if the state space k^n exceeds this size.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    pub state_cap: usize,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Number of labels per node (k).
    #[arg(long, default_value_t = 2)]
    pub states: u32,

    /// Initial state: compact digits ("1122") or comma-separated labels
    /// ("1,12,3") when k exceeds 9.
    #[arg(long, value_name = "STATE")]
    pub init: String,

    /// Independent replications to run.
    #[arg(long = "reps", visible_alias = "replications", default_value_t = 1000)]
    pub reps: u32,

    /// Master seed; replication r runs on stream r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Per-replication step ceiling before declaring a timeout.
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: u64,

    /// Consensus closeness threshold on node values.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,

    /// Additionally record replication 0's state at every step.
    #[arg(long)]
    pub trace: bool,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Number of labels per node (k).
    #[arg(long, default_value_t = 2)]
    pub states: u32,

    /// Replications per initial state.
    #[arg(long = "reps", visible_alias = "replications", default_value_t = 1000)]
    pub reps: u32,

    /// Master seed; state s, replication r runs on stream (s << 32) | r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Families to sweep, comma-separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_values_t = vec![
            String::from("complete"),
            String::from("star"),
            String::from("ring-bidirectional"),
        ]
    )]
    pub families: Vec<String>,

    /// Node counts: "3,4,5" or an inclusive range "3:5".
    #[arg(long, default_value = "3:5")]
    pub nodes: String,

    /// Label counts: "2,3,4" or an inclusive range "2:4".
    #[arg(long, default_value = "2:4")]
    pub states: String,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Number of nodes in the complete base graph edges are removed from.
    #[arg(long, default_value_t = 5)]
    pub nodes: usize,

    /// Number of labels per node (k).
    #[arg(long, default_value_t = 3)]
    pub states: u32,

    /// Densities: "0.6,0.8,1.0" or a range "0.6:1.0:0.05".
    #[arg(long, default_value = "0.6:1.0:0.05")]
    pub densities: String,

    /// Graphs sampled per density value.
    #[arg(long, default_value_t = 30)]
    pub graphs: usize,

    /// Master seed; density d, graph g samples on stream (d << 32) | g.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Replace exact expected times with simulated means per graph.
    #[arg(long)]
    pub empirical: bool,

    /// Replications per initial state in --empirical mode.
    #[arg(long = "reps", visible_alias = "replications", default_value_t = 1000)]
    pub reps: u32,

    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses "a,b,c" or inclusive "lo:hi" into a list.
pub fn parse_index_list(text: &str) -> Result<Vec<usize>, String> {
    if let Some((lo, hi)) = text.split_once(':') {
        let lo: usize = lo.trim().parse().map_err(|_| bad_list(text))?;
        let hi: usize = hi.trim().parse().map_err(|_| bad_list(text))?;
        if lo > hi {
            return Err(format!("empty range '{text}'"));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|part| part.trim().parse().map_err(|_| bad_list(text))).collect()
}

/// Parses "a,b,c" or "lo:hi:step" into a float list; the range form is
/// inclusive of hi up to a half-step tolerance, matching 0.6:1.0:0.05.
pub fn parse_density_list(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [_] => text
            .split(',')
            .map(|part| parse_density(part.trim(), text))
            .collect(),
        [lo, hi, step] => {
            let lo = parse_density(lo.trim(), text)?;
            let hi = parse_density(hi.trim(), text)?;
            let step: f64 = step.trim().parse().map_err(|_| bad_list(text))?;
            if step <= 0.0 || hi < lo {
                return Err(format!("empty range '{text}'"));
            }
            let mut out = Vec::new();
            let mut index = 0;
            loop {
                let value = lo + step * index as f64;
                if value > hi + step / 2.0 {
                    break;
                }
                // Snap to the step grid so 0.6 + 2*0.05 prints as 0.7.
                out.push((value / step).round() * step);
                index += 1;
            }
            Ok(out)
        }
        _ => Err(bad_list(text)),
    }
}

fn parse_density(part: &str, whole: &str) -> Result<f64, String> {
    let value: f64 = part.parse().map_err(|_| bad_list(whole))?;
    if !(0.0..=1.0).contains(&value) {
        return Err(format!("density {value} is outside [0, 1]"));
    }
    Ok(value)
}

fn bad_list(text: &str) -> String {
    format!("cannot parse list '{text}' (expected 'a,b,c', 'lo:hi', or 'lo:hi:step')")
}
