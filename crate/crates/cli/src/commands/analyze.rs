use serde::{Deserialize, Serialize};

use gossip_core::gossip::{is_consensus, DEFAULT_EPSILON};
use gossip_core::markov::{analyze_absorbing, GossipChain};
use gossip_core::metrics::distance_report;

use crate::args::{AnalyzeArgs, Format};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output::{self, TextTable};
use crate::source;

/// The 95% step bound is Markov's inequality inverted: P(T >= 20 t_A) <= 0.05.
const TAIL_FACTOR_95: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeRow {
    pub state: String,
    /// One probability per consensus state, in label order.
    pub absorption_probabilities: Vec<f64>,
    pub expected_steps: f64,
    pub step_variance: f64,
    /// Steps within which consensus is reached with probability >= 0.95.
    pub step_bound_95: f64,
    pub expected_distance: f64,
    pub partition: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub manifest: RunManifest,
    pub state_count: usize,
    pub adoption_count: usize,
    pub consensus_states: Vec<String>,
    /// One row per transient state, in base-k state order.
    pub rows: Vec<AnalyzeRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transition_matrix: Option<Vec<Vec<f64>>>,
}

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    let (graph, graph_source) = source::resolve(&args.source)?;
    if let Some(reason) = graph.consensus_obstruction() {
        return Err(CliError::Structural(format!("no consensus sequence: {reason}")));
    }

    let chain =
        GossipChain::build_with_caps(&graph, args.states, args.enumeration_cap, args.state_cap)?;
    let analysis = analyze_absorbing(&chain)?;
    let distances = distance_report(&chain, &analysis);

    let consensus_states: Vec<String> = analysis
        .canonical()
        .absorbing
        .iter()
        .map(|&i| chain.states()[i].to_compact_string())
        .collect();

    let rows: Vec<AnalyzeRow> = chain
        .states()
        .iter()
        .enumerate()
        .filter(|(_, state)| !is_consensus(state, DEFAULT_EPSILON))
        .map(|(i, state)| {
            let expected_steps = analysis.expected_steps_of(i);
            AnalyzeRow {
                state: state.to_compact_string(),
                absorption_probabilities: analysis.absorption_row(i),
                expected_steps,
                step_variance: analysis.variance_of(i),
                step_bound_95: TAIL_FACTOR_95 * expected_steps,
                expected_distance: distances[i].expected,
                partition: distances[i].partition,
            }
        })
        .collect();

    let transition_matrix = args.emit_matrix.then(|| {
        let m = chain.transition_matrix();
        (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
    });

    let mut manifest = RunManifest::new("analyze");
    manifest.graph_source = Some(graph_source);
    manifest.nodes = Some(graph.node_count());
    manifest.states_per_node = Some(args.states);
    manifest.emit_matrix = Some(args.emit_matrix);
    manifest.enumeration_cap = args.enumeration_cap;
    manifest.state_cap = args.state_cap;

    let report = AnalyzeReport {
        manifest,
        state_count: chain.state_count(),
        adoption_count: chain.adoption_count(),
        consensus_states,
        rows,
        transition_matrix,
    };
    let text = render(&report, args.output.format)?;
    output::emit(args.output.output.as_deref(), &text)
}

fn render(report: &AnalyzeReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => output::json_document(report),
        Format::Csv => output::csv_document(&report.manifest, |w| {
            let mut header = vec!["state".to_string()];
            header.extend(report.consensus_states.iter().map(|c| format!("p_{c}")));
            header.extend(
                ["expected_steps", "step_variance", "step_bound_95", "expected_distance", "partition"]
                    .map(String::from),
            );
            w.write_record(&header)?;
            for row in &report.rows {
                let mut record = vec![row.state.clone()];
                record.extend(row.absorption_probabilities.iter().map(|&p| output::machine(p)));
                record.push(output::machine(row.expected_steps));
                record.push(output::machine(row.step_variance));
                record.push(output::machine(row.step_bound_95));
                record.push(output::machine(row.expected_distance));
                record.push(row.partition.to_string());
                w.write_record(&record)?;
            }
            Ok(())
        }),
        Format::Human => {
            let mut header = vec!["state".to_string()];
            header.extend(report.consensus_states.iter().map(|c| format!("P[{c}]")));
            header.extend(["E[steps]", "Var[steps]", "95% bound", "E[dist]", "part"].map(String::from));
            let mut table = TextTable::new(header);
            for row in &report.rows {
                let mut record = vec![row.state.clone()];
                record.extend(row.absorption_probabilities.iter().map(|&p| output::prob4(p)));
                record.push(output::time2(row.expected_steps));
                record.push(output::time2(row.step_variance));
                record.push(output::time2(row.step_bound_95));
                record.push(output::prob4(row.expected_distance));
                record.push(row.partition.to_string());
                table.push(record);
            }
            let mut text = format!(
                "{} states, {} of them consensus; {} adoption matrices\n\n",
                report.state_count,
                report.consensus_states.len(),
                report.adoption_count,
            );
            text.push_str(&table.render());
            if let Some(matrix) = &report.transition_matrix {
                text.push_str("\ntransition matrix (row = from, base-k state order):\n");
                for row in matrix {
                    let cells: Vec<String> = row.iter().map(|&p| output::prob4(p)).collect();
                    text.push_str(&format!("  {}\n", cells.join(" ")));
                }
            }
            Ok(text)
        }
    }
}
