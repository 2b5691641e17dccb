//! The `check` command.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};

use hyperpstl::config::load_model_str;
use hyperpstl::logic::parse_state_formula;
use hyperpstl::models::PusModel;
use hyperpstl::semantics::Trace;
use hyperpstl::smc::{tuple_seed, verify, SmcConfig};

use crate::args::CheckArgs;
use crate::report::{sha256_hex, Inputs, RunReport, TraceStats};

/// Traces summarised by `--trace-stats`.
const STATS_TRACES: u64 = 100;

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true)
}

/// Trace drawn for component 0 of tuple `k` of the first operator of a flat
/// run with master seed `seed`.
pub fn sampled_trace(model: &dyn PusModel, seed: u64, k: u64, horizon: f64) -> anyhow::Result<Trace> {
    Ok(model.sample(tuple_seed(seed, 0, k, 0), horizon)?)
}

fn trace_stats(model: &dyn PusModel, seed: u64, horizon: f64) -> anyhow::Result<TraceStats> {
    let mut segments = 0usize;
    let mut occupancy: BTreeMap<String, f64> = model.label_names().iter().map(|l| (l.clone(), 0.0)).collect();
    for k in 0..STATS_TRACES {
        let tr = sampled_trace(model, seed, k, horizon)?;
        segments += tr.len();
        let starts = tr.starts();
        for i in 0..tr.len() {
            let end = starts.get(i + 1).copied().unwrap_or(tr.horizon());
            for l in tr.labels(i) {
                *occupancy.entry(l.to_string()).or_default() += (end - starts[i]) / tr.horizon();
            }
        }
    }
    let n = STATS_TRACES as f64;
    occupancy.values_mut().for_each(|v| *v /= n);
    Ok(TraceStats { traces: STATS_TRACES, mean_segments: segments as f64 / n, label_occupancy: occupancy })
}

/// Load the inputs named by `args`, run the matching engine and build the
/// report. Diagnostics for `--dump-trace` go to stderr.
pub fn run_check(args: &CheckArgs) -> anyhow::Result<RunReport> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        bail!("significance must be in (0,1), got {}", args.alpha);
    }
    let model_text = read(&args.model)?;
    let model_sha256 = sha256_hex(model_text.as_bytes());
    let loaded = load_model_str(&model_text).with_context(|| format!("in {}", args.model.display()))?;
    let formula_text = read(&args.formula)?;
    let formula =
        parse_state_formula(&formula_text).with_context(|| format!("in {}", args.formula.display()))?;
    let Some(horizon) = args.horizon.or(loaded.horizon) else {
        bail!("no horizon: pass --horizon or set `horizon` in the model file");
    };
    let cfg = SmcConfig {
        batch: args.batch,
        max_samples: args.max_samples,
        truncation: args.truncation_policy.into(),
        record_iterations: args.iterations,
        ..SmcConfig::new(args.alpha, horizon, args.seed)
    };
    cfg.validate()?;
    let model = loaded.model.as_ref();
    if let Some(k) = args.dump_trace {
        eprint!("{}", sampled_trace(model, args.seed, k, horizon)?.dump());
    }
    let stats = if args.trace_stats { Some(trace_stats(model, args.seed, horizon)?) } else { None };

    let started = now();
    let verdict = verify(model, &formula, &loaded.regions, &cfg)?;
    let finished = now();
    Ok(RunReport {
        verdict,
        inputs: Inputs {
            model: args.model.display().to_string(),
            model_sha256,
            formula: formula_text,
            alpha: cfg.alpha,
            batch: cfg.batch,
            horizon,
            seed: cfg.seed,
            max_samples: cfg.max_samples,
            truncation: cfg.truncation,
        },
        trace_stats: stats,
        started,
        finished,
    })
}
