use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use gossip_core::gossip::{DEFAULT_ENUMERATION_CAP, DEFAULT_EPSILON};
use gossip_core::markov::DEFAULT_STATE_CAP;

/// The resolved configuration embedded in every report. Two runs with equal
/// manifests (timestamp aside) produce identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub timestamp: String,
    /// Conflict resolution rule; "proportional" is the only one shipped.
    pub resolver: String,
    pub epsilon: f64,
    pub enumeration_cap: usize,
    pub state_cap: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states_per_node: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replications: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emit_matrix: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_list: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub densities: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graphs_per_density: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<bool>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            resolver: "proportional".to_string(),
            epsilon: DEFAULT_EPSILON,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            state_cap: DEFAULT_STATE_CAP,
            graph_source: None,
            nodes: None,
            states_per_node: None,
            initial: None,
            seed: None,
            replications: None,
            max_steps: None,
            emit_matrix: None,
            trace: None,
            families: None,
            node_list: None,
            state_list: None,
            densities: None,
            graphs_per_density: None,
            empirical: None,
        }
    }

    /// The manifest as "# key=value" lines for CSV headers.
    pub fn comment_lines(&self) -> String {
        let value = serde_json::to_value(self).expect("manifest serializes");
        let map = value.as_object().expect("manifest is a JSON object");
        let mut out = String::new();
        for (key, val) in map {
            let rendered = match val {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("# {key}={rendered}\n"));
        }
        out
    }
}
