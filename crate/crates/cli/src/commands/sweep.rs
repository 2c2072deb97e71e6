use std::collections::BTreeSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use gossip_core::graph::Family;
use gossip_core::sweep::{sweep, CellOutcome, SweepCell};

use crate::args::{parse_index_list, Format, SweepArgs};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output::{self, TextTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub manifest: RunManifest,
    pub cells: Vec<SweepCell>,
    pub notes: Vec<String>,
}

pub fn run(args: &SweepArgs) -> Result<(), CliError> {
    let families: Vec<Family> = args
        .families
        .iter()
        .map(|name| Family::from_str(name).map_err(CliError::Usage))
        .collect::<Result<_, _>>()?;
    let nodes = parse_index_list(&args.nodes).map_err(CliError::Usage)?;
    let states: Vec<u32> = parse_index_list(&args.states)
        .map_err(CliError::Usage)?
        .into_iter()
        .map(|k| k as u32)
        .collect();

    let cells = sweep(&families, &nodes, &states);

    let mut manifest = RunManifest::new("sweep");
    manifest.families = Some(families.iter().map(|f| f.name().to_string()).collect());
    manifest.node_list = Some(nodes);
    manifest.state_list = Some(states);

    let report = SweepReport {
        manifest,
        cells,
        notes: vec![
            "Published versions of these tables label every ring-bidirectional row \
             '3 nodes'; the node column here records each row's actual count."
                .to_string(),
            "A '-' cell means no initial state of that size sits at that distance \
             from consensus."
                .to_string(),
        ],
    };
    let text = render(&report, args.output.format)?;
    output::emit(args.output.output.as_deref(), &text)
}

fn distances_in(cells: &[SweepCell]) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    for cell in cells {
        if let CellOutcome::Partitions(stats) = &cell.outcome {
            out.extend(stats.iter().map(|s| s.distance));
        }
    }
    out
}

fn render(report: &SweepReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => output::json_document(report),
        Format::Csv => output::csv_document(&report.manifest, |w| {
            w.write_record([
                "family", "n", "k", "distance", "count", "mean", "ci_low", "ci_high", "note",
            ])?;
            for cell in &report.cells {
                let prefix =
                    [cell.family.name().to_string(), cell.n.to_string(), cell.k.to_string()];
                match &cell.outcome {
                    CellOutcome::Partitions(stats) => {
                        for s in stats {
                            let mut record = prefix.to_vec();
                            record.extend([
                                s.distance.to_string(),
                                s.count.to_string(),
                                output::machine(s.mean),
                                output::machine(s.ci_low),
                                output::machine(s.ci_high),
                                String::new(),
                            ]);
                            w.write_record(&record)?;
                        }
                    }
                    CellOutcome::Failed { reason } => {
                        let mut record = prefix.to_vec();
                        record.extend([
                            String::new(),
                            String::new(),
                            String::new(),
                            String::new(),
                            String::new(),
                            reason.clone(),
                        ]);
                        w.write_record(&record)?;
                    }
                }
            }
            Ok(())
        }),
        Format::Human => {
            let ks: Vec<u32> = {
                let mut seen = BTreeSet::new();
                for cell in &report.cells {
                    seen.insert(cell.k);
                }
                seen.into_iter().collect()
            };
            let row_keys: Vec<(Family, usize)> = {
                let mut keys = Vec::new();
                for cell in &report.cells {
                    if !keys.contains(&(cell.family, cell.n)) {
                        keys.push((cell.family, cell.n));
                    }
                }
                keys
            };
            let cell_for = |family: Family, n: usize, k: u32| {
                report.cells.iter().find(|c| c.family == family && c.n == n && c.k == k)
            };

            let mut text = String::new();
            for distance in distances_in(&report.cells) {
                text.push_str(&format!("expected consensus time, distance {distance}:\n"));
                let mut header = vec!["topology".to_string()];
                header.extend(ks.iter().map(|k| format!("k={k}")));
                let mut table = TextTable::new(header);
                for &(family, n) in &row_keys {
                    let mut row = vec![format!("{}:{n}", family.name())];
                    for &k in &ks {
                        row.push(match cell_for(family, n, k) {
                            Some(cell) => match &cell.outcome {
                                CellOutcome::Partitions(_) => cell
                                    .partition(distance)
                                    .map(|s| {
                                        format!(
                                            "{} ({}, {})",
                                            output::time2(s.mean),
                                            output::time2(s.ci_low),
                                            output::time2(s.ci_high)
                                        )
                                    })
                                    .unwrap_or_else(|| "-".to_string()),
                                CellOutcome::Failed { .. } => "failed".to_string(),
                            },
                            None => "-".to_string(),
                        });
                    }
                    table.push(row);
                }
                text.push_str(&table.render());
                text.push('\n');
            }

            let failures: Vec<&SweepCell> = report
                .cells
                .iter()
                .filter(|c| matches!(c.outcome, CellOutcome::Failed { .. }))
                .collect();
            if !failures.is_empty() {
                text.push_str("failed cells:\n");
                for cell in failures {
                    if let CellOutcome::Failed { reason } = &cell.outcome {
                        text.push_str(&format!(
                            "  {}:{} k={}: {reason}\n",
                            cell.family.name(),
                            cell.n,
                            cell.k
                        ));
                    }
                }
                text.push('\n');
            }

            for note in &report.notes {
                text.push_str(&format!("note: {note}\n"));
            }
            Ok(text)
        }
    }
}
