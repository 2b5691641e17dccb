//! Finite continuous-time Markov chains sampled with Gillespie's direct
//! method.
//!
//! From state `s` with exit rate `q = -M[s][s]`:
//!
//! 1. draw `u1 ~ U[0,1)` and hold for `-ln(1 - u1) / q`;
//! 2. draw `u2 ~ U[0,1)` and jump to the first `j != s` whose cumulative
//!    rate `sum_{k <= j, k != s} M[s][k]` exceeds `u2 * q`.
//!
//! States with zero exit rate are absorbing and are held to the horizon.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use super::{ModelError, PusModel, SeedTree};
use crate::semantics::{Trace, TraceBuilder, TraceKind};

const ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct CtmcModel {
    states: Vec<String>,
    rates: Vec<Vec<f64>>,
    initial: usize,
    label_names: Arc<[String]>,
    state_labels: Vec<u64>,
}

impl CtmcModel {
    /// Build and validate a chain. Every state is labelled with its own name
    /// plus the labels listed for it in `labeling`.
    pub fn new(
        states: Vec<String>,
        rates: Vec<Vec<f64>>,
        initial: &str,
        labeling: &BTreeMap<String, Vec<String>>,
    ) -> Result<Self, ModelError> {
        let n = states.len();
        let invalid = |m: String| Err(ModelError::InvalidModel(m));
        if n == 0 {
            return invalid("chain has no states".into());
        }
        if rates.len() != n || rates.iter().any(|r| r.len() != n) {
            return invalid(format!("rate matrix must be {n} x {n}"));
        }
        for (i, row) in rates.iter().enumerate() {
            if row.iter().any(|r| !r.is_finite()) {
                return invalid(format!("row {i} has a non-finite rate"));
            }
            if let Some(j) = (0..n).find(|&j| j != i && row[j] < 0.0) {
                return invalid(format!("negative off-diagonal rate at ({i}, {j})"));
            }
            let sum: f64 = row.iter().sum();
            let scale = row.iter().fold(1.0f64, |m, r| m.max(r.abs()));
            if sum.abs() > ROW_SUM_TOL * scale {
                return invalid(format!("row {i} sums to {sum}, expected 0"));
            }
        }
        let initial = states
            .iter()
            .position(|s| s == initial)
            .ok_or_else(|| ModelError::InvalidModel(format!("unknown initial state `{initial}`")))?;
        for s in labeling.keys() {
            if !states.contains(s) {
                return invalid(format!("labeling refers to unknown state `{s}`"));
            }
        }

        let mut names: Vec<String> = states.clone();
        for ls in labeling.values() {
            for l in ls {
                if !names.contains(l) {
                    names.push(l.clone());
                }
            }
        }
        if names.len() > 64 {
            return invalid(format!("{} labels exceed the 64-label limit", names.len()));
        }
        let state_labels = states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut bits = 1u64 << i;
                for l in labeling.get(s).into_iter().flatten() {
                    bits |= 1u64 << names.iter().position(|n| n == l).unwrap();
                }
                bits
            })
            .collect();
        Ok(Self { states, rates, initial, label_names: names.into(), state_labels })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.rates
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn exit_rate(&self, s: usize) -> f64 {
        -self.rates[s][s]
    }

    /// One Gillespie step from `s`: holding time and next state, or `None`
    /// for an absorbing state.
    pub fn step<R: Rng>(&self, s: usize, rng: &mut R) -> Option<(f64, usize)> {
        let q = self.exit_rate(s);
        if q <= 0.0 {
            return None;
        }
        let u1: f64 = rng.random();
        let hold = -(1.0 - u1).ln() / q;
        let target = rng.random::<f64>() * q;
        let mut acc = 0.0;
        let mut last = None;
        for (j, &r) in self.rates[s].iter().enumerate() {
            if j == s || r <= 0.0 {
                continue;
            }
            acc += r;
            last = Some(j);
            if acc > target {
                return Some((hold, j));
            }
        }
        // rounding left the target at the very top of the range
        last.map(|j| (hold, j))
    }
}

impl PusModel for CtmcModel {
    fn kind(&self) -> &'static str {
        "ctmc"
    }

    fn label_names(&self) -> &[String] {
        &self.label_names
    }

    fn sample(&self, seed: u64, horizon: f64) -> Result<Trace, ModelError> {
        let mut rng = SeedTree::new(seed).rng();
        let mut b = TraceBuilder::new(
            self.label_names.clone(),
            Arc::from(vec!["state".to_string()]),
            TraceKind::EventPiecewiseConstant,
        );
        let (mut t, mut s) = (0.0, self.initial);
        b.push(0.0, self.state_labels[s], &[s as f64]);
        while let Some((hold, next)) = self.step(s, &mut rng) {
            t += hold;
            if t >= horizon {
                break;
            }
            s = next;
            b.push(t, self.state_labels[s], &[s as f64]);
        }
        Ok(b.finish(horizon)?)
    }

    fn state_names(&self) -> Option<Vec<String>> {
        Some(self.states.clone())
    }

    fn restarted(&self, state: usize) -> Result<Box<dyn PusModel>, ModelError> {
        if state >= self.states.len() {
            return Err(ModelError::InvalidModel(format!("no state with index {state}")));
        }
        Ok(Box::new(Self { initial: state, ..self.clone() }))
    }

    fn with_state_label(&self, label: &str, states: &[usize]) -> Result<Box<dyn PusModel>, ModelError> {
        let mut m = self.clone();
        let mut names: Vec<String> = m.label_names.to_vec();
        let bit = match names.iter().position(|n| n == label) {
            Some(k) => k,
            None => {
                names.push(label.to_string());
                names.len() - 1
            }
        };
        if bit >= 64 {
            return Err(ModelError::InvalidModel("label table is full".into()));
        }
        for &s in states {
            m.state_labels[s] |= 1u64 << bit;
        }
        m.label_names = names.into();
        Ok(Box::new(m))
    }
}
