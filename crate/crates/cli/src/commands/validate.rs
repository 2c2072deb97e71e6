use serde::{Deserialize, Serialize};

use gossip_core::markov::{analyze_absorbing, build_chain, state_index};
use gossip_core::metrics::{distance_report, validate, ValidationRow, PROBABILITY_TOLERANCE};

use crate::args::{Format, ValidateArgs};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output::{self, TextTable};
use crate::source;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateRow {
    pub partition: u32,
    #[serde(flatten)]
    pub comparison: ValidationRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub manifest: RunManifest,
    pub rows: Vec<ValidateRow>,
    pub max_probability_error: f64,
    pub probability_criterion_pass: bool,
    pub statistically_equal_count: usize,
    pub weighting_note: String,
}

pub fn run(args: &ValidateArgs) -> Result<(), CliError> {
    let (graph, graph_source) = source::resolve(&args.source)?;
    if let Some(reason) = graph.consensus_obstruction() {
        return Err(CliError::Structural(format!("no consensus sequence: {reason}")));
    }

    let comparison = validate(&graph, args.states, args.reps, args.seed)?;
    let chain = build_chain(&graph, args.states)?;
    let analysis = analyze_absorbing(&chain)?;
    let distances = distance_report(&chain, &analysis);

    let rows: Vec<ValidateRow> = comparison
        .rows
        .into_iter()
        .map(|row| ValidateRow {
            partition: distances[state_index(&row.initial, args.states)].partition,
            comparison: row,
        })
        .collect();

    let mut manifest = RunManifest::new("validate");
    manifest.graph_source = Some(graph_source);
    manifest.nodes = Some(graph.node_count());
    manifest.states_per_node = Some(args.states);
    manifest.seed = Some(args.seed);
    manifest.replications = Some(args.reps);

    let report = ValidateReport {
        manifest,
        rows,
        max_probability_error: comparison.max_probability_error,
        probability_criterion_pass: comparison.probability_criterion_pass,
        statistically_equal_count: comparison.statistically_equal_count,
        weighting_note: comparison.weighting_note,
    };
    let text = render(&report, args.output.format)?;
    output::emit(args.output.output.as_deref(), &text)?;

    if !report.probability_criterion_pass {
        return Err(CliError::ValidationFailed(format!(
            "max absolute consensus-probability error {} exceeds the {} tolerance",
            report.max_probability_error, PROBABILITY_TOLERANCE,
        )));
    }
    Ok(())
}

fn join(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|&v| output::prob4(v)).collect();
    cells.join(", ")
}

fn render(report: &ValidateReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => output::json_document(report),
        Format::Csv => output::csv_document(&report.manifest, |w| {
            let labels = report
                .rows
                .first()
                .map(|r| r.comparison.theoretical_probabilities.len())
                .unwrap_or(0);
            let mut header = vec!["state".to_string(), "partition".to_string()];
            for i in 1..=labels {
                header.push(format!("p_theory_{i}"));
            }
            for i in 1..=labels {
                header.push(format!("p_empirical_{i}"));
            }
            header.extend(
                [
                    "theoretical_time",
                    "empirical_mean_time",
                    "ci_low",
                    "ci_high",
                    "p_value",
                    "probability_pass",
                    "time_statistically_equal",
                ]
                .map(String::from),
            );
            w.write_record(&header)?;
            for row in &report.rows {
                let c = &row.comparison;
                let mut record =
                    vec![c.initial.to_compact_string(), row.partition.to_string()];
                record.extend(c.theoretical_probabilities.iter().map(|&p| output::machine(p)));
                record.extend(c.empirical_probabilities.iter().map(|&p| output::machine(p)));
                record.push(output::machine(c.theoretical_time));
                record.push(c.empirical_mean_time.map(output::machine).unwrap_or_default());
                record.push(c.ci95.map(|(lo, _)| output::machine(lo)).unwrap_or_default());
                record.push(c.ci95.map(|(_, hi)| output::machine(hi)).unwrap_or_default());
                record.push(c.p_value.map(output::machine).unwrap_or_default());
                record.push(c.probability_pass.to_string());
                record.push(
                    c.time_statistically_equal.map(|b| b.to_string()).unwrap_or_default(),
                );
                w.write_record(&record)?;
            }
            Ok(())
        }),
        Format::Human => {
            let mut table = TextTable::new([
                "state", "part", "P theory", "P empirical", "max |dP|", "t_A",
                "mean (95% CI)", "p-value", "pass",
            ]);
            for row in &report.rows {
                let c = &row.comparison;
                let max_err = c.abs_error.iter().cloned().fold(0.0, f64::max);
                let mean_ci = match (c.empirical_mean_time, c.ci95) {
                    (Some(mean), Some((lo, hi))) => format!(
                        "{} ({}, {})",
                        output::time2(mean),
                        output::time2(lo),
                        output::time2(hi)
                    ),
                    (Some(mean), None) => output::time2(mean),
                    _ => "-".to_string(),
                };
                table.push([
                    c.initial.to_compact_string(),
                    row.partition.to_string(),
                    join(&c.theoretical_probabilities),
                    join(&c.empirical_probabilities),
                    output::prob4(max_err),
                    output::time2(c.theoretical_time),
                    mean_ci,
                    c.p_value.map(output::prob4).unwrap_or_else(|| "-".to_string()),
                    if c.probability_pass { "yes" } else { "NO" }.to_string(),
                ]);
            }
            let verdict = if report.probability_criterion_pass { "PASS" } else { "FAIL" };
            let mut text = table.render();
            text.push_str(&format!(
                "\nmax probability error {} (tolerance {}): {verdict}\n\
                 {} of {} states statistically indistinguishable from t_A at alpha 0.05\n\
                 \nnote: {}\n",
                output::prob4(report.max_probability_error),
                PROBABILITY_TOLERANCE,
                report.statistically_equal_count,
                report.rows.len(),
                report.weighting_note,
            ));
            Ok(text)
        }
    }
}
