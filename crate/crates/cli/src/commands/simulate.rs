use serde::{Deserialize, Serialize};

use gossip_core::gossip::{
    apply_adoption, is_consensus, proportional_select, sample_transmission, NetworkState,
};
use gossip_core::sim::{replication_rng, run_experiment, SimulationConfig};

use crate::args::{Format, SimulateArgs};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output::{self, TextTable};
use crate::source;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub manifest: RunManifest,
    pub replications: u32,
    pub timeout_count: u64,
    /// Entry i is the number of replications that agreed on label i+1.
    pub consensus_counts: Vec<u64>,
    pub consensus_probabilities: Vec<f64>,
    pub mean_time: Option<f64>,
    pub ci95: Option<(f64, f64)>,
    /// Replication 0's state at every step, initial state included.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<String>>,
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let (graph, graph_source) = source::resolve(&args.source)?;
    let initial = NetworkState::parse(&args.init, graph.node_count(), args.states)?;
    let mut cfg = SimulationConfig::new(graph, args.states, initial, args.reps, args.seed)?
        .with_max_steps(args.max_steps);
    cfg.epsilon = args.epsilon;

    let outcome = run_experiment(&cfg)?;
    let trace = args.trace.then(|| trace_replication_zero(&cfg));

    let mut manifest = RunManifest::new("simulate");
    manifest.graph_source = Some(graph_source);
    manifest.nodes = Some(cfg.graph.node_count());
    manifest.states_per_node = Some(args.states);
    manifest.initial = Some(cfg.initial.to_compact_string());
    manifest.seed = Some(args.seed);
    manifest.replications = Some(args.reps);
    manifest.max_steps = Some(args.max_steps);
    manifest.epsilon = args.epsilon;
    manifest.trace = Some(args.trace);

    let report = SimulateReport {
        manifest,
        replications: args.reps,
        timeout_count: outcome.timeout_count,
        consensus_probabilities: (1..=args.states)
            .map(|label| outcome.consensus_probability(label))
            .collect(),
        consensus_counts: outcome.consensus_counts,
        mean_time: outcome.mean_time,
        ci95: outcome.ci95_low.zip(outcome.ci95_high),
        trace,
    };
    let text = render(&report, args.output.format)?;
    output::emit(args.output.output.as_deref(), &text)
}

/// Re-runs replication 0 on its own stream, recording each visited state.
/// The drawing order matches the experiment's inner loop exactly, so the
/// trace ends on the state replication 0 halted in.
fn trace_replication_zero(cfg: &SimulationConfig) -> Vec<String> {
    let mut rng = replication_rng(cfg.seed, 0);
    let mut x = cfg.initial.clone();
    let mut trace = vec![x.to_compact_string()];
    let mut step = 0u64;
    loop {
        if is_consensus(&x, cfg.epsilon) || step == cfg.max_steps {
            return trace;
        }
        let w = sample_transmission(&cfg.graph, &mut rng);
        let a = proportional_select(&w, &mut rng);
        x = apply_adoption(&a, &x);
        trace.push(x.to_compact_string());
        step += 1;
    }
}

fn render(report: &SimulateReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => output::json_document(report),
        Format::Csv => output::csv_document(&report.manifest, |w| {
            w.write_record(["label", "count", "probability"])?;
            for (i, (&count, &p)) in report
                .consensus_counts
                .iter()
                .zip(&report.consensus_probabilities)
                .enumerate()
            {
                w.write_record([(i + 1).to_string(), count.to_string(), output::machine(p)])?;
            }
            w.write_record(["timeout", &report.timeout_count.to_string(), ""])?;
            Ok(())
        }),
        Format::Human => {
            let mut table = TextTable::new(["label", "count", "probability"]);
            for (i, (&count, &p)) in report
                .consensus_counts
                .iter()
                .zip(&report.consensus_probabilities)
                .enumerate()
            {
                table.push([(i + 1).to_string(), count.to_string(), output::prob4(p)]);
            }
            let mut text = format!(
                "{} replications, {} timed out\n\n{}",
                report.replications,
                report.timeout_count,
                table.render(),
            );
            match (report.mean_time, report.ci95) {
                (Some(mean), Some((lo, hi))) => text.push_str(&format!(
                    "\nmean consensus time {} steps, 95% CI ({}, {})\n",
                    output::time2(mean),
                    output::time2(lo),
                    output::time2(hi),
                )),
                (Some(mean), None) => text.push_str(&format!(
                    "\nmean consensus time {} steps\n",
                    output::time2(mean),
                )),
                _ => text.push_str("\nno replication reached consensus\n"),
            }
            if let Some(trace) = &report.trace {
                text.push_str(&format!("\nreplication 0 ({} steps):\n", trace.len() - 1));
                for (step, state) in trace.iter().enumerate() {
                    text.push_str(&format!("  {step:>4}  {state}\n"));
                }
            }
            Ok(text)
        }
    }
}
