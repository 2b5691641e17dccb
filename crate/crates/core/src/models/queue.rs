//! Two-tier queueing network.
//!
//! Each of `n` front servers owns a bounded queue fed by its own arrival
//! process (Poisson or Markov-modulated Poisson). A job finishing at a front
//! server moves to the shortest of the `m` bounded back queues (ties go to the
//! lowest index) and is lost if that queue is full. Service times are
//! exponential. Every rate in the network is Markovian, so the simulation
//! draws the next event from the total rate.
//!
//! Labels `q1 .. qm` hold while back queue `i` is at capacity.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ModelError, PusModel, SeedTree};
use crate::semantics::{Trace, TraceBuilder, TraceKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "snake_case")]
pub enum ArrivalProcess {
    Exponential { rate: f64 },
    /// Arrival rate `rates[k]` while the modulating chain is in mode `k`.
    Mmpp { generator: Vec<Vec<f64>>, rates: Vec<f64>, #[serde(default)] initial_mode: usize },
}

impl ArrivalProcess {
    fn validate(&self, idx: usize) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidModel(format!("arrival process {idx}: {m}")));
        match self {
            ArrivalProcess::Exponential { rate } => {
                if !(rate.is_finite() && *rate >= 0.0) {
                    return bad(format!("rate {rate} must be non-negative"));
                }
            }
            ArrivalProcess::Mmpp { generator, rates, initial_mode } => {
                let k = rates.len();
                if k == 0 || generator.len() != k || generator.iter().any(|r| r.len() != k) {
                    return bad("generator and rates must agree in size".into());
                }
                if *initial_mode >= k {
                    return bad(format!("initial mode {initial_mode} out of range"));
                }
                if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                    return bad("arrival rates must be non-negative".into());
                }
                for (i, row) in generator.iter().enumerate() {
                    if (0..k).any(|j| j != i && !(row[j] >= 0.0 && row[j].is_finite())) {
                        return bad(format!("generator row {i} has a negative off-diagonal rate"));
                    }
                    if row.iter().sum::<f64>().abs() > 1e-9 * row.iter().fold(1.0f64, |m, r| m.max(r.abs())) {
                        return bad(format!("generator row {i} does not sum to 0"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// What happened at an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueueEvent {
    /// Arrival at front queue `i`; `accepted` is false when the queue was full.
    Arrival { front: usize, accepted: bool },
    ModeSwitch { front: usize, mode: usize },
    /// Front service finished; `routed_to` is `None` when the job was lost.
    FrontDone { front: usize, routed_to: Option<usize> },
    BackDone { back: usize },
}

/// Network state with cumulative counters.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueState {
    pub time: f64,
    pub front_len: Vec<usize>,
    pub back_len: Vec<usize>,
    pub modes: Vec<usize>,
    pub arrivals: u64,
    pub rejected_front: u64,
    pub lost_at_routing: u64,
    pub departures: u64,
}

impl QueueState {
    /// Jobs currently queued or in service.
    pub fn in_system(&self) -> u64 {
        (self.front_len.iter().sum::<usize>() + self.back_len.iter().sum::<usize>()) as u64
    }
}

#[derive(Debug, Clone)]
pub struct QueueModel {
    front_capacity: Vec<usize>,
    back_capacity: Vec<usize>,
    arrivals: Vec<ArrivalProcess>,
    front_service: Vec<f64>,
    back_service: Vec<f64>,
    label_names: Arc<[String]>,
}

impl QueueModel {
    pub fn new(
        front_capacity: Vec<usize>,
        back_capacity: Vec<usize>,
        arrivals: Vec<ArrivalProcess>,
        front_service: Vec<f64>,
        back_service: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let bad = |m: String| Err(ModelError::InvalidModel(m));
        let (n, m) = (front_capacity.len(), back_capacity.len());
        if n == 0 || m == 0 {
            return bad("need at least one front and one back server".into());
        }
        if m > 64 {
            return bad("at most 64 back servers".into());
        }
        if arrivals.len() != n || front_service.len() != n || back_service.len() != m {
            return bad("arrival and service lists must match the server counts".into());
        }
        if front_capacity.iter().chain(&back_capacity).any(|&c| c == 0) {
            return bad("buffer capacities must be at least 1".into());
        }
        if front_service.iter().chain(&back_service).any(|r| !(r.is_finite() && *r > 0.0)) {
            return bad("service rates must be positive".into());
        }
        for (i, a) in arrivals.iter().enumerate() {
            a.validate(i)?;
        }
        let label_names: Vec<String> = (1..=m).map(|j| format!("q{j}")).collect();
        Ok(Self {
            front_capacity,
            back_capacity,
            arrivals,
            front_service,
            back_service,
            label_names: label_names.into(),
        })
    }

    fn initial_state(&self) -> QueueState {
        QueueState {
            time: 0.0,
            front_len: vec![0; self.front_capacity.len()],
            back_len: vec![0; self.back_capacity.len()],
            modes: self
                .arrivals
                .iter()
                .map(|a| match a {
                    ArrivalProcess::Exponential { .. } => 0,
                    ArrivalProcess::Mmpp { initial_mode, .. } => *initial_mode,
                })
                .collect(),
            arrivals: 0,
            rejected_front: 0,
            lost_at_routing: 0,
            departures: 0,
        }
    }

    fn label_bits(&self, s: &QueueState) -> u64 {
        s.back_len
            .iter()
            .zip(&self.back_capacity)
            .enumerate()
            .filter(|(_, (l, c))| l >= c)
            .fold(0, |acc, (j, _)| acc | 1u64 << j)
    }

    /// Simulate up to `horizon`, calling `observe` after every event.
    pub fn run<F: FnMut(QueueEvent, &QueueState)>(&self, seed: u64, horizon: f64, mut observe: F) -> QueueState {
        let mut rng = SeedTree::new(seed).rng();
        let mut s = self.initial_state();
        let (n, m) = (s.front_len.len(), s.back_len.len());
        let mut rates: Vec<f64> = Vec::with_capacity(3 * n + m);
        loop {
            rates.clear();
            for i in 0..n {
                rates.push(match &self.arrivals[i] {
                    ArrivalProcess::Exponential { rate } => *rate,
                    ArrivalProcess::Mmpp { rates: r, .. } => r[s.modes[i]],
                });
                rates.push(match &self.arrivals[i] {
                    ArrivalProcess::Exponential { .. } => 0.0,
                    ArrivalProcess::Mmpp { generator, .. } => -generator[s.modes[i]][s.modes[i]],
                });
                rates.push(if s.front_len[i] > 0 { self.front_service[i] } else { 0.0 });
            }
            for j in 0..m {
                rates.push(if s.back_len[j] > 0 { self.back_service[j] } else { 0.0 });
            }
            let total: f64 = rates.iter().sum();
            if total <= 0.0 {
                break;
            }
            let u: f64 = rng.random();
            let t = s.time - (1.0 - u).ln() / total;
            if t >= horizon {
                break;
            }
            s.time = t;
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = rates.iter().rposition(|r| *r > 0.0).unwrap();
            for (k, r) in rates.iter().enumerate() {
                acc += r;
                if *r > 0.0 && acc > target {
                    pick = k;
                    break;
                }
            }
            let event = if pick < 3 * n {
                let i = pick / 3;
                match pick % 3 {
                    0 => {
                        s.arrivals += 1;
                        let accepted = s.front_len[i] < self.front_capacity[i];
                        if accepted {
                            s.front_len[i] += 1;
                        } else {
                            s.rejected_front += 1;
                        }
                        QueueEvent::Arrival { front: i, accepted }
                    }
                    1 => {
                        let ArrivalProcess::Mmpp { generator, .. } = &self.arrivals[i] else {
                            unreachable!("mode switch of a Poisson source")
                        };
                        let cur = s.modes[i];
                        let row = &generator[cur];
                        let goal = rng.random::<f64>() * -row[cur];
                        let mut acc = 0.0;
                        let mut next = cur;
                        for (k, &r) in row.iter().enumerate() {
                            if k == cur || r <= 0.0 {
                                continue;
                            }
                            acc += r;
                            next = k;
                            if acc > goal {
                                break;
                            }
                        }
                        s.modes[i] = next;
                        QueueEvent::ModeSwitch { front: i, mode: next }
                    }
                    _ => {
                        s.front_len[i] -= 1;
                        let j = (0..m).min_by_key(|&j| (s.back_len[j], j)).unwrap();
                        let routed_to = if s.back_len[j] < self.back_capacity[j] {
                            s.back_len[j] += 1;
                            Some(j)
                        } else {
                            s.lost_at_routing += 1;
                            None
                        };
                        QueueEvent::FrontDone { front: i, routed_to }
                    }
                }
            } else {
                let j = pick - 3 * n;
                s.back_len[j] -= 1;
                s.departures += 1;
                QueueEvent::BackDone { back: j }
            };
            observe(event, &s);
        }
        s
    }
}

impl PusModel for QueueModel {
    fn kind(&self) -> &'static str {
        "queue"
    }

    fn label_names(&self) -> &[String] {
        &self.label_names
    }

    fn sample(&self, seed: u64, horizon: f64) -> Result<Trace, ModelError> {
        let mut b = TraceBuilder::new(
            self.label_names.clone(),
            Arc::from(vec![]),
            TraceKind::EventPiecewiseConstant,
        );
        b.push(0.0, self.label_bits(&self.initial_state()), &[]);
        let mut last = b.last_labels().unwrap();
        self.run(seed, horizon, |_, s| {
            let bits = self.label_bits(s);
            if bits != last {
                b.push(s.time, bits, &[]);
                last = bits;
            }
        });
        Ok(b.finish(horizon)?)
    }
}
