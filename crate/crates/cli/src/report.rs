//! The JSON run report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use hyperpstl::smc::{TruncationPolicy, Verdict};
use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything needed to rerun a check bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub model: String,
    pub model_sha256: String,
    pub formula: String,
    pub alpha: f64,
    pub batch: u64,
    pub horizon: f64,
    pub seed: u64,
    pub max_samples: u64,
    pub truncation: TruncationPolicy,
}

/// Summary of the first traces a run draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStats {
    pub traces: u64,
    pub mean_segments: f64,
    /// Fraction of time up to the horizon during which each label holds.
    pub label_occupancy: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub inputs: Inputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_stats: Option<TraceStats>,
    /// RFC 3339.
    pub started: String,
    pub finished: String,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// The report with wall time and timestamps cleared, for comparing runs.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.verdict.wall_time = 0.0;
        r.started.clear();
        r.finished.clear();
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hyperpstl::logic::Shape;
    use hyperpstl::smc::{Assertion, IterationRecord, OperatorSamples};

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn round_trip() {
        let report = RunReport {
            verdict: Verdict {
                assertion: Assertion::Undecided,
                achieved_significance: 0.1 + 0.2,
                algorithm: Shape::NestedPath,
                samples_used: vec![OperatorSamples { operator: "P{x}(a@x)".into(), tuples: 30, paths: 60 }],
                truncated_evaluations: 3,
                wall_time: 1.0 / 3.0,
                iterations: vec![IterationRecord { samples: vec![10], successes: vec![4], alpha: 0.7 }],
            },
            inputs: Inputs {
                model: "m.toml".into(),
                model_sha256: "00".into(),
                formula: "P{x}(a@x) < 0.5".into(),
                alpha: 0.05,
                batch: 10,
                horizon: 20.0,
                seed: u64::MAX,
                max_samples: 1000,
                truncation: TruncationPolicy::CountError,
            },
            trace_stats: Some(TraceStats {
                traces: 2,
                mean_segments: 2.5,
                label_occupancy: [("a".to_string(), 0.25)].into(),
            }),
            started: "2024-01-01T00:00:00Z".into(),
            finished: "2024-01-01T00:00:01Z".into(),
        };
        let text = report.to_json();
        assert_eq!(RunReport::from_json(&text).unwrap(), report);
        let keys: Vec<&str> = text.lines().filter(|l| l.starts_with("  \"")).map(|l| l.split('"').nth(1).unwrap()).collect();
        assert_eq!(keys[0], "assertion");
        assert_eq!(*keys.last().unwrap(), "finished");
    }
}
