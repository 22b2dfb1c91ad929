use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use headfit::loss::LossReport;

/// Metrics written by `fit`, `distill` and `eval`.
///
/// Contains no wall-clock data so reruns are byte-identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metrics: BTreeMap<String, f64>,
    pub metadata: ReportMetadata,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
}

impl EvalReport {
    pub fn new(command: &str, seed: u64, config_hash: String) -> Self {
        Self {
            metrics: BTreeMap::new(),
            metadata: ReportMetadata { command: command.into(), seed, config_hash },
        }
    }

    pub fn insert(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), value);
    }
}

/// One line of a fit trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub step: usize,
    #[serde(flatten)]
    pub report: LossReport,
}

pub fn trace_to_jsonl(trace: &[LossReport]) -> String {
    let mut out = String::new();
    for (step, report) in trace.iter().enumerate() {
        let line = TraceLine { step, report: report.clone() };
        out.push_str(&serde_json::to_string(&line).expect("trace lines serialise"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str) -> serde_json::Result<Vec<TraceLine>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}
