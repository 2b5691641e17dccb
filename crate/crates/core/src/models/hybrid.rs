//! Stochastic hybrid systems on a fixed time grid.
//!
//! Random parameters are drawn once per path. The continuous state is
//! advanced with classical RK4; after every step the guards of the current
//! mode are checked and a jump fires at the first grid point past the
//! crossing. Predicates are evaluated on the pre-jump state, so a trace
//! shows the grid point where a guard was hit.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{ModelError, PusModel, SeedTree};
use crate::semantics::{Trace, TraceBuilder, TraceKind};

/// Slack for guard and predicate thresholds, absorbing rounding in the
/// integrator.
fn slack(v: f64) -> f64 {
    1e-9 * (1.0 + v.abs())
}

/// Distribution of a per-path random parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum ParamDist {
    Gaussian { mean: f64, std: f64 },
    Uniform { low: f64, high: f64 },
    Constant { value: f64 },
}

impl ParamDist {
    fn validate(&self, name: &str) -> Result<(), ModelError> {
        let ok = match *self {
            ParamDist::Gaussian { mean, std } => mean.is_finite() && std.is_finite() && std >= 0.0,
            ParamDist::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
            ParamDist::Constant { value } => value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidModel(format!("bad distribution for parameter `{name}`")))
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            ParamDist::Gaussian { mean, std } => {
                Normal::new(mean, std).expect("validated").sample(rng)
            }
            ParamDist::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            ParamDist::Constant { value } => value,
        }
    }
}

/// Built-in dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    /// Modes `heat` (dT/dt = c1 + n1) and `cool` (dT/dt = -(c2 + n2)),
    /// switching at `t_high` and `t_low`; starts at `(t_low, heat)`.
    Thermostat,
    /// Single mode `run` with dx/dt = `rate`, starting at `x0`.
    ConstantRate,
}

impl Template {
    fn modes(self) -> &'static [&'static str] {
        match self {
            Template::Thermostat => &["heat", "cool"],
            Template::ConstantRate => &["run"],
        }
    }

    fn vars(self) -> &'static [&'static str] {
        match self {
            Template::Thermostat => &["T"],
            Template::ConstantRate => &["x"],
        }
    }

    fn defaults(self) -> Vec<(&'static str, ParamDist)> {
        let c = |value| ParamDist::Constant { value };
        match self {
            Template::Thermostat => vec![
                ("c1", c(5.0)),
                ("c2", c(5.0)),
                ("t_low", c(15.0)),
                ("t_high", c(40.0)),
                ("n1", ParamDist::Gaussian { mean: 0.0, std: 0.25 }),
                ("n2", ParamDist::Gaussian { mean: 0.0, std: 0.25 }),
            ],
            Template::ConstantRate => vec![("x0", c(0.0)), ("rate", c(0.0))],
        }
    }
}

/// Parameters of one path after sampling.
#[derive(Debug, Clone, Copy)]
enum Instance {
    Thermostat { heat: f64, cool: f64, t_low: f64, t_high: f64 },
    ConstantRate { x0: f64, rate: f64 },
}

impl Instance {
    fn new(template: Template, p: &BTreeMap<String, f64>) -> Self {
        match template {
            Template::Thermostat => Instance::Thermostat {
                heat: p["c1"] + p["n1"],
                cool: p["c2"] + p["n2"],
                t_low: p["t_low"],
                t_high: p["t_high"],
            },
            Template::ConstantRate => Instance::ConstantRate { x0: p["x0"], rate: p["rate"] },
        }
    }

    fn initial(&self) -> (usize, Vec<f64>) {
        match *self {
            Instance::Thermostat { t_low, .. } => (0, vec![t_low]),
            Instance::ConstantRate { x0, .. } => (0, vec![x0]),
        }
    }

    fn flow(&self, mode: usize, _x: &[f64], dx: &mut [f64]) {
        match *self {
            Instance::Thermostat { heat, cool, .. } => {
                dx[0] = if mode == 0 { heat } else { -cool };
            }
            Instance::ConstantRate { rate, .. } => dx[0] = rate,
        }
    }

    /// Jump enabled in `mode` at `x`, with its reset.
    fn jump(&self, mode: usize, x: &[f64]) -> Option<(usize, Vec<f64>)> {
        match *self {
            Instance::Thermostat { t_low, t_high, .. } => {
                if mode == 0 && x[0] >= t_high - slack(t_high) {
                    Some((1, vec![t_high]))
                } else if mode == 1 && x[0] <= t_low + slack(t_low) {
                    Some((0, vec![t_low]))
                } else {
                    None
                }
            }
            Instance::ConstantRate { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredicateOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

/// Named Boolean function of (mode, state): the mode must match if given,
/// and `var op value` must hold if a variable is given. Thresholds carry the
/// same relative slack of 1e-9 as guards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub var: Option<String>,
    #[serde(default)]
    pub op: Option<PredicateOp>,
    #[serde(default)]
    pub value: Option<f64>,
}

#[derive(Debug, Clone)]
struct ResolvedPredicate {
    mode: Option<usize>,
    test: Option<(usize, PredicateOp, f64)>,
}

impl ResolvedPredicate {
    fn holds(&self, mode: usize, x: &[f64]) -> bool {
        if self.mode.is_some_and(|m| m != mode) {
            return false;
        }
        match self.test {
            None => true,
            Some((k, op, v)) => match op {
                PredicateOp::Lt => x[k] < v - slack(v),
                PredicateOp::Le => x[k] <= v + slack(v),
                PredicateOp::Gt => x[k] > v + slack(v),
                PredicateOp::Ge => x[k] >= v - slack(v),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct HybridModel {
    template: Template,
    params: Vec<(String, ParamDist)>,
    predicates: Vec<ResolvedPredicate>,
    dt: f64,
    max_jumps_per_step: usize,
    label_names: Arc<[String]>,
    value_names: Arc<[String]>,
}

impl HybridModel {
    /// Build a model. `overrides` replace template parameters by name. Mode
    /// names are always available as labels; when `predicates` is empty the
    /// thermostat gets `q := cool and T <= t_low`.
    pub fn new(
        template: Template,
        overrides: &BTreeMap<String, ParamDist>,
        predicates: &[Predicate],
        dt: f64,
        max_jumps_per_step: usize,
    ) -> Result<Self, ModelError> {
        let invalid = |m: String| Err(ModelError::InvalidModel(m));
        if !(dt > 0.0 && dt.is_finite()) {
            return invalid(format!("time step {dt} must be positive"));
        }
        let mut params: Vec<(String, ParamDist)> = template
            .defaults()
            .into_iter()
            .map(|(n, d)| (n.to_string(), d))
            .collect();
        for (name, dist) in overrides {
            match params.iter_mut().find(|(n, _)| n == name) {
                Some(slot) => slot.1 = dist.clone(),
                None => return invalid(format!("template has no parameter `{name}`")),
            }
        }
        for (n, d) in &params {
            d.validate(n)?;
        }
        if template == Template::Thermostat {
            let get = |k: &str| match params.iter().find(|(n, _)| n == k) {
                Some((_, ParamDist::Constant { value })) => Some(*value),
                _ => None,
            };
            if let (Some(lo), Some(hi)) = (get("t_low"), get("t_high")) {
                if lo > hi {
                    return invalid(format!("t_low {lo} exceeds t_high {hi}"));
                }
            }
        }

        let mut preds = predicates.to_vec();
        if preds.is_empty() && template == Template::Thermostat {
            let t_low = match params.iter().find(|(n, _)| n == "t_low") {
                Some((_, ParamDist::Constant { value })) => *value,
                _ => 15.0,
            };
            preds.push(Predicate {
                name: "q".into(),
                mode: Some("cool".into()),
                var: Some("T".into()),
                op: Some(PredicateOp::Le),
                value: Some(t_low),
            });
        }
        let modes = template.modes();
        let vars = template.vars();
        let mut names: Vec<String> = modes.iter().map(|m| m.to_string()).collect();
        let mut resolved: Vec<ResolvedPredicate> = modes
            .iter()
            .enumerate()
            .map(|(k, _)| ResolvedPredicate { mode: Some(k), test: None })
            .collect();
        for p in &preds {
            if names.contains(&p.name) {
                return invalid(format!("label `{}` defined twice", p.name));
            }
            let mode = match &p.mode {
                None => None,
                Some(m) => Some(modes.iter().position(|x| x == m).ok_or_else(|| {
                    ModelError::InvalidModel(format!("predicate `{}`: unknown mode `{m}`", p.name))
                })?),
            };
            let test = match (&p.var, p.op, p.value) {
                (None, None, None) => None,
                (Some(v), Some(op), Some(value)) => {
                    let k = vars.iter().position(|x| x == v).ok_or_else(|| {
                        ModelError::InvalidModel(format!("predicate `{}`: unknown variable `{v}`", p.name))
                    })?;
                    Some((k, op, value))
                }
                _ => {
                    return invalid(format!(
                        "predicate `{}` needs all of var, op and value, or none",
                        p.name
                    ))
                }
            };
            names.push(p.name.clone());
            resolved.push(ResolvedPredicate { mode, test });
        }
        if names.len() > 64 {
            return invalid("more than 64 labels".into());
        }
        let mut value_names: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        value_names.push("mode".into());
        Ok(Self {
            template,
            params,
            predicates: resolved,
            dt,
            max_jumps_per_step,
            label_names: names.into(),
            value_names: value_names.into(),
        })
    }

    pub fn template(&self) -> Template {
        self.template
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn draw_params<R: Rng>(&self, rng: &mut R) -> BTreeMap<String, f64> {
        self.params.iter().map(|(n, d)| (n.clone(), d.draw(rng))).collect()
    }

    fn labels(&self, mode: usize, x: &[f64]) -> u64 {
        self.predicates
            .iter()
            .enumerate()
            .filter(|(_, p)| p.holds(mode, x))
            .fold(0, |acc, (k, _)| acc | 1u64 << k)
    }

    /// Sample a trace and report the parameter values drawn for it.
    pub fn sample_with_params(
        &self,
        seed: u64,
        horizon: f64,
    ) -> Result<(Trace, BTreeMap<String, f64>), ModelError> {
        let mut rng = SeedTree::new(seed).rng();
        let params = self.draw_params(&mut rng);
        let inst = Instance::new(self.template, &params);
        let (mut mode, mut x) = inst.initial();
        let n = x.len();
        let steps = grid_points(horizon, self.dt);
        let mut b = TraceBuilder::new(
            self.label_names.clone(),
            self.value_names.clone(),
            TraceKind::FixedGrid { dt: self.dt },
        )
        .with_capacity(steps);
        let mut row = vec![0.0; n + 1];
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
            (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let h = self.dt;
        for k in 0..steps {
            let t = k as f64 * h;
            if k > 0 {
                inst.flow(mode, &x, &mut k1);
                for i in 0..n {
                    tmp[i] = x[i] + 0.5 * h * k1[i];
                }
                inst.flow(mode, &tmp, &mut k2);
                for i in 0..n {
                    tmp[i] = x[i] + 0.5 * h * k2[i];
                }
                inst.flow(mode, &tmp, &mut k3);
                for i in 0..n {
                    tmp[i] = x[i] + h * k3[i];
                }
                inst.flow(mode, &tmp, &mut k4);
                for i in 0..n {
                    x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(ModelError::NonfiniteState { t });
                }
            }
            row[..n].copy_from_slice(&x);
            row[n] = mode as f64;
            b.push(t, self.labels(mode, &x), &row);
            let mut jumps = 0;
            while let Some((m, reset)) = inst.jump(mode, &x) {
                jumps += 1;
                if jumps > self.max_jumps_per_step {
                    return Err(ModelError::ZenoGuard { t });
                }
                mode = m;
                x = reset;
            }
        }
        Ok((b.finish(horizon)?, params))
    }
}

/// Number of grid points `k * dt` strictly below `horizon`.
fn grid_points(horizon: f64, dt: f64) -> usize {
    let mut n = (horizon / dt).ceil() as usize;
    while n > 1 && (n - 1) as f64 * dt >= horizon {
        n -= 1;
    }
    while (n as f64) * dt < horizon {
        n += 1;
    }
    n.max(1)
}

impl PusModel for HybridModel {
    fn kind(&self) -> &'static str {
        "hybrid"
    }

    fn label_names(&self) -> &[String] {
        &self.label_names
    }

    fn sample(&self, seed: u64, horizon: f64) -> Result<Trace, ModelError> {
        Ok(self.sample_with_params(seed, horizon)?.0)
    }
}
