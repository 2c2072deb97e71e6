use std::fs;
use std::str::FromStr;

use gossip_core::graph::{generate, parse_edge_list, DirectedGraph, Family};

use crate::args::SourceArgs;
use crate::error::CliError;

/// Turns the --topology/--graph pair into a graph plus the source string
/// recorded in the manifest.
pub fn resolve(source: &SourceArgs) -> Result<(DirectedGraph, String), CliError> {
    if let Some(spec) = &source.topology {
        let (family, n) = spec
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("topology '{spec}' is not FAMILY:N")))?;
        let family = Family::from_str(family.trim()).map_err(CliError::Usage)?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("'{n}' is not a node count")))?;
        let graph = generate(family, n).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok((graph, spec.clone()))
    } else if let Some(path) = &source.graph {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let graph = parse_edge_list(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok((graph, path.display().to_string()))
    } else {
        // clap enforces required_unless_present, so this is unreachable.
        Err(CliError::Usage("a graph source is required".to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::SourceArgs;

    fn topology(spec: &str) -> SourceArgs {
        SourceArgs { topology: Some(spec.to_string()), graph: None }
    }

    #[test]
    fn topology_specs_resolve() {
        let (g, desc) = resolve(&topology("complete:4")).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 12);
        assert_eq!(desc, "complete:4");

        let (g, _) = resolve(&topology("ring-directed:3")).unwrap();
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn bad_specs_are_usage_errors() {
        for spec in ["complete", "mesh:4", "complete:x", "star:1"] {
            match resolve(&topology(spec)) {
                Err(CliError::Usage(_)) => {}
                other => panic!("{spec}: expected a usage error, got {other:?}"),
            }
        }
        let missing = SourceArgs { topology: None, graph: Some("no-such-file.edges".into()) };
        assert!(matches!(resolve(&missing), Err(CliError::Usage(_))));
    }
}
