use serde::{Deserialize, Serialize};

use gossip_core::sweep::{density_sweep, DensityConfig, DensityFailure, DensityRow};

use crate::args::{parse_density_list, DensityArgs, Format};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output::{self, TextTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub manifest: RunManifest,
    /// Long format: one row per (density, initial state).
    pub rows: Vec<DensityRow>,
    pub failures: Vec<DensityFailure>,
}

pub fn run(args: &DensityArgs) -> Result<(), CliError> {
    let densities = parse_density_list(&args.densities).map_err(CliError::Usage)?;

    let cfg = DensityConfig {
        base_n: args.nodes,
        k: args.states,
        densities: densities.clone(),
        graphs_per_density: args.graphs,
        seed: args.seed,
        empirical_replications: args.empirical.then_some(args.reps),
    };
    let result = density_sweep(&cfg);

    let mut manifest = RunManifest::new("density");
    manifest.nodes = Some(args.nodes);
    manifest.states_per_node = Some(args.states);
    manifest.densities = Some(densities);
    manifest.graphs_per_density = Some(args.graphs);
    manifest.seed = Some(args.seed);
    manifest.empirical = Some(args.empirical);
    if args.empirical {
        manifest.replications = Some(args.reps);
    }

    let report = DensityReport { manifest, rows: result.rows, failures: result.failures };
    let text = render(&report, args.output.format)?;
    output::emit(args.output.output.as_deref(), &text)
}

fn render(report: &DensityReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => output::json_document(report),
        Format::Csv => output::csv_document(&report.manifest, |w| {
            w.write_record([
                "density", "state", "partition", "graphs", "mean", "ci_low", "ci_high",
            ])?;
            for row in &report.rows {
                w.write_record([
                    output::machine(row.density),
                    row.state.to_compact_string(),
                    row.partition.to_string(),
                    row.graphs.to_string(),
                    output::machine(row.mean),
                    output::machine(row.ci_low),
                    output::machine(row.ci_high),
                ])?;
            }
            Ok(())
        }),
        Format::Human => {
            let mut table =
                TextTable::new(["density", "state", "distance", "graphs", "mean", "95% CI"]);
            for row in &report.rows {
                table.push([
                    format!("{:.2}", row.density),
                    row.state.to_compact_string(),
                    row.partition.to_string(),
                    row.graphs.to_string(),
                    output::time2(row.mean),
                    format!("({}, {})", output::time2(row.ci_low), output::time2(row.ci_high)),
                ]);
            }
            let mut text = table.render();
            if !report.failures.is_empty() {
                text.push_str("\nfailures:\n");
                for f in &report.failures {
                    match f.graph_index {
                        Some(g) => text.push_str(&format!(
                            "  density {:.2}, graph {g}: {}\n",
                            f.density, f.reason
                        )),
                        None => {
                            text.push_str(&format!("  density {:.2}: {}\n", f.density, f.reason))
                        }
                    }
                }
            }
            Ok(text)
        }
    }
}
