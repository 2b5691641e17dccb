//! Distributional checks of sampled CTMC paths against the rate matrix.

use std::collections::BTreeMap;

use hyperpstl::models::{CtmcModel, PusModel, SeedTree};
use rand::Rng;

/// One statistic compared with its analytic value.
#[derive(Debug)]
pub struct Check {
    pub what: String,
    pub observed: f64,
    pub expected: f64,
    pub std_err: f64,
}

impl Check {
    /// Within three standard errors.
    pub fn ok(&self) -> bool {
        if self.std_err == 0.0 {
            self.observed == self.expected
        } else {
            (self.observed - self.expected).abs() <= 3.0 * self.std_err
        }
    }
}

pub fn chain(rates: Vec<Vec<f64>>) -> CtmcModel {
    let states = (0..rates.len()).map(|i| format!("s{i}")).collect();
    CtmcModel::new(states, rates, "s0", &BTreeMap::new()).unwrap()
}

/// The three-state chain of the two-buffer queue.
pub fn queue_chain() -> CtmcModel {
    chain(vec![vec![-1.0, 1.0, 0.0], vec![2.0, -3.0, 1.0], vec![0.0, 2.0, -2.0]])
}

/// Random chain with `n` states; some off-diagonal rates are zero, every
/// state can be left.
pub fn random_chain<R: Rng>(rng: &mut R, n: usize) -> CtmcModel {
    let mut rates = vec![vec![0.0; n]; n];
    for (i, row) in rates.iter_mut().enumerate() {
        let forced = (i + 1 + rng.random_range(0..n - 1)) % n;
        for j in (0..n).filter(|&j| j != i) {
            if j == forced || rng.random_bool(0.75) {
                row[j] = rng.random_range(0.2..3.0);
            }
        }
        row[i] = -row.iter().sum::<f64>();
    }
    chain(rates)
}

/// Start `samples` paths in every state and compare the first holding time
/// and the first successor with the rate matrix.
pub fn first_step_checks(m: &CtmcModel, samples: u64, seed: u64) -> Vec<Check> {
    let n = m.states().len();
    let mut out = Vec::new();
    for l in 0..n {
        let exit = m.exit_rate(l);
        let start = m.restarted(l).unwrap();
        // the first jump falls before the horizon except with probability e^-40
        let horizon = 40.0 / exit;
        let mut holds = Vec::with_capacity(samples as usize);
        let mut next = vec![0u64; n];
        for k in 0..samples {
            let tr = start.sample(SeedTree::new(seed).child(l as u64).child(k).seed(), horizon).unwrap();
            assert!(tr.len() > 1, "no jump from s{l} before {horizon}");
            holds.push(tr.starts()[1]);
            let to = (0..n).find(|&j| tr.label_bits(1) >> j & 1 == 1).unwrap();
            next[to] += 1;
        }
        let s = samples as f64;
        let mean = holds.iter().sum::<f64>() / s;
        let var = holds.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (s - 1.0);
        out.push(Check { what: format!("mean holding time in s{l}"), observed: mean, expected: 1.0 / exit, std_err: (var / s).sqrt() });
        for (j, &c) in next.iter().enumerate().filter(|&(j, _)| j != l) {
            let q = m.rates()[l][j] / exit;
            out.push(Check {
                what: format!("jump frequency s{l} -> s{j}"),
                observed: c as f64 / s,
                expected: q,
                std_err: (q * (1.0 - q) / s).sqrt(),
            });
        }
        if next[l] != 0 {
            out.push(Check { what: format!("self jumps from s{l}"), observed: next[l] as f64, expected: 0.0, std_err: 0.0 });
        }
    }
    out
}
