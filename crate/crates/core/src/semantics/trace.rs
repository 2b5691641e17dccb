use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// How a trace was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceKind {
    /// Segments start at jump times of a discrete-event process.
    EventPiecewiseConstant,
    /// Segments start on a uniform grid of step `dt`.
    FixedGrid { dt: f64 },
}

/// A finite piecewise-constant sample path on `[0, horizon]`.
///
/// Labels are stored as bit sets over a label table shared by all traces of
/// a model, so at most 64 labels are supported. Values are stored row-major,
/// one row per segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    label_names: Arc<[String]>,
    value_names: Arc<[String]>,
    starts: Vec<f64>,
    labels: Vec<u64>,
    values: Vec<f64>,
    horizon: f64,
    kind: TraceKind,
}

impl Trace {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn starts(&self) -> &[f64] {
        &self.starts
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn value_names(&self) -> &[String] {
        &self.value_names
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.label_names.iter().position(|l| l == name)
    }

    /// Label bit set of segment `i`.
    pub fn label_bits(&self, i: usize) -> u64 {
        self.labels[i]
    }

    /// Label names active in segment `i`.
    pub fn labels(&self, i: usize) -> Vec<&str> {
        let bits = self.labels[i];
        self.label_names
            .iter()
            .enumerate()
            .filter(|(k, _)| bits >> k & 1 == 1)
            .map(|(_, n)| n.as_str())
            .collect()
    }

    pub fn values(&self, i: usize) -> &[f64] {
        let w = self.value_names.len();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn value(&self, i: usize, name: &str) -> Option<f64> {
        let k = self.value_names.iter().position(|n| n == name)?;
        Some(self.values(i)[k])
    }

    /// Index of the segment active at time `t`, treating starts within
    /// `eps` of `t` as already begun.
    pub fn segment_at(&self, t: f64, eps: f64) -> Option<usize> {
        if t < -eps || t > self.horizon + eps {
            return None;
        }
        let k = self.starts.partition_point(|&s| s <= t + eps);
        Some(k.saturating_sub(1))
    }

    /// One line per segment: `t=<seconds> labels={...} values={k:v,...}`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            let vals: Vec<String> = self
                .value_names
                .iter()
                .zip(self.values(i))
                .map(|(n, v)| format!("{n}:{v}"))
                .collect();
            let _ = writeln!(
                out,
                "t={} labels={{{}}} values={{{}}}",
                self.starts[i],
                self.labels(i).join(","),
                vals.join(",")
            );
        }
        out
    }

    pub fn to_document(&self) -> TraceDocument {
        TraceDocument {
            kind: self.kind,
            horizon: self.horizon,
            segments: (0..self.len())
                .map(|i| SegmentDocument {
                    start: self.starts[i],
                    labels: self.labels(i).into_iter().map(String::from).collect(),
                    values: self
                        .value_names
                        .iter()
                        .cloned()
                        .zip(self.values(i).iter().copied())
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("trace serializes")
    }

    /// Rebuild a trace from its JSON export.
    pub fn from_json(text: &str) -> Result<Trace, EvalError> {
        let doc: TraceDocument =
            serde_json::from_str(text).map_err(|e| EvalError::InvalidTrace(e.to_string()))?;
        doc.into_trace()
    }
}

/// Serializable form of a [`Trace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    #[serde(flatten)]
    pub kind: TraceKind,
    pub horizon: f64,
    pub segments: Vec<SegmentDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDocument {
    pub start: f64,
    pub labels: Vec<String>,
    pub values: BTreeMap<String, f64>,
}

impl TraceDocument {
    pub fn into_trace(self) -> Result<Trace, EvalError> {
        let mut label_names: Vec<String> = Vec::new();
        let mut value_names: Vec<String> = Vec::new();
        for s in &self.segments {
            for l in &s.labels {
                if !label_names.contains(l) {
                    label_names.push(l.clone());
                }
            }
            for v in s.values.keys() {
                if !value_names.contains(v) {
                    value_names.push(v.clone());
                }
            }
        }
        let mut b = TraceBuilder::new(label_names.into(), value_names.clone().into(), self.kind);
        for s in &self.segments {
            let bits = s
                .labels
                .iter()
                .map(|l| 1u64 << b.label_names.iter().position(|n| n == l).unwrap())
                .fold(0, |a, x| a | x);
            let vals: Vec<f64> = value_names
                .iter()
                .map(|n| s.values.get(n).copied().unwrap_or(f64::NAN))
                .collect();
            b.push(s.start, bits, &vals);
        }
        b.finish(self.horizon)
    }
}

/// Incremental construction of a [`Trace`] with invariant checks.
#[derive(Debug, Clone)]
pub struct TraceBuilder {
    label_names: Arc<[String]>,
    value_names: Arc<[String]>,
    kind: TraceKind,
    starts: Vec<f64>,
    labels: Vec<u64>,
    values: Vec<f64>,
}

impl TraceBuilder {
    pub fn new(label_names: Arc<[String]>, value_names: Arc<[String]>, kind: TraceKind) -> Self {
        Self {
            label_names,
            value_names,
            kind,
            starts: Vec::new(),
            labels: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn with_capacity(mut self, n: usize) -> Self {
        self.starts.reserve(n);
        self.labels.reserve(n);
        self.values.reserve(n * self.value_names.len());
        self
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    /// Label bits of the most recent segment.
    pub fn last_labels(&self) -> Option<u64> {
        self.labels.last().copied()
    }

    pub fn push(&mut self, start: f64, labels: u64, values: &[f64]) {
        assert_eq!(values.len(), self.value_names.len(), "value row width");
        self.starts.push(start);
        self.labels.push(labels);
        self.values.extend_from_slice(values);
    }

    /// Validate and freeze: starts strictly increasing from 0, all below the
    /// horizon, and grid spacing exact to rounding for fixed-grid traces.
    pub fn finish(self, horizon: f64) -> Result<Trace, EvalError> {
        let bad = |m: String| Err(EvalError::InvalidTrace(m));
        if self.label_names.len() > 64 {
            return bad(format!("{} labels exceed the 64-label limit", self.label_names.len()));
        }
        if !(horizon > 0.0) || horizon.is_nan() {
            return bad(format!("horizon {horizon} must be positive"));
        }
        match self.starts.first() {
            None => return bad("trace has no segments".into()),
            Some(&s) if s != 0.0 => return bad(format!("first segment starts at {s}, not 0")),
            _ => {}
        }
        for w in self.starts.windows(2) {
            if !(w[1] > w[0]) {
                return bad(format!("segment starts {} and {} not increasing", w[0], w[1]));
            }
        }
        if let Some(&last) = self.starts.last() {
            if !(last < horizon) {
                return bad(format!("segment start {last} not below horizon {horizon}"));
            }
        }
        if let TraceKind::FixedGrid { dt } = self.kind {
            for (k, &s) in self.starts.iter().enumerate() {
                if (s - k as f64 * dt).abs() > 1e-9 * (1.0 + s.abs()) {
                    return bad(format!("grid point {k} at {s}, expected {}", k as f64 * dt));
                }
            }
        }
        Ok(Trace {
            label_names: self.label_names,
            value_names: self.value_names,
            starts: self.starts,
            labels: self.labels,
            values: self.values,
            horizon,
            kind: self.kind,
        })
    }
}
