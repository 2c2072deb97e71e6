use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::manifest::RunManifest;

/// Writes the rendered report to the file or to stdout.
pub fn emit(target: Option<&Path>, text: &str) -> Result<(), CliError> {
    match target {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Machine format: the shortest decimal that parses back to the identical
/// f64, so JSON and CSV reports round-trip bit-for-bit.
pub fn machine(v: f64) -> String {
    format!("{v}")
}

/// Human format for consensus times and step counts: 2 decimals.
pub fn time2(v: f64) -> String {
    format!("{v:.2}")
}

/// Human format for probabilities, distances, and p-values: 4 decimals.
pub fn prob4(v: f64) -> String {
    format!("{v:.4}")
}

pub fn json_document<T: Serialize>(report: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Usage(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// A CSV report: the manifest as leading "# key=value" comment lines, then
/// whatever rows `fill` writes.
pub fn csv_document<F>(manifest: &RunManifest, fill: F) -> Result<String, CliError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut writer = csv::Writer::from_writer(Vec::new());
    fill(&mut writer).map_err(|e| CliError::Usage(format!("cannot build csv: {e}")))?;
    let body = writer
        .into_inner()
        .map_err(|e| CliError::Usage(format!("cannot build csv: {e}")))?;
    let body = String::from_utf8(body).expect("csv output is UTF-8");
    Ok(format!("{}{}", manifest.comment_lines(), body))
}

/// Fixed-width text table: the first column is left-aligned, the rest right-
/// aligned, with a dash rule under the header.
pub struct TextTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        TextTable { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        assert_eq!(row.len(), self.header.len(), "row width matches the header");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(String::len).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let format_row = |row: &[String]| -> String {
            let mut line = String::new();
            for (i, (cell, &w)) in row.iter().zip(&widths).enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                if i == 0 {
                    line.push_str(&format!("{cell:<w$}"));
                } else {
                    line.push_str(&format!("{cell:>w$}"));
                }
            }
            line.trim_end().to_string()
        };
        let mut out = format_row(&self.header);
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format_row(row));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_align_columns() {
        let mut table = TextTable::new(["state", "t_A", "p"]);
        table.push(["1122", "7.73", "0.2500"]);
        table.push(["112", "6.13", "0.75"]);
        let text = table.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "state   t_A       p");
        assert!(lines[1].chars().all(|c| c == '-'));
        assert_eq!(lines[2], "1122   7.73  0.2500");
        assert_eq!(lines[3], "112    6.13    0.75");
    }

    #[test]
    fn machine_floats_round_trip() {
        for v in [0.1, 2.0 / 3.0, 7.728174603174603, f64::MIN_POSITIVE, 1e300] {
            assert_eq!(machine(v).parse::<f64>().unwrap(), v);
        }
    }
}
