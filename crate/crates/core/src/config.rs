//! Model files.
//!
//! A model file is TOML with a `kind` key selecting the model family, an
//! optional suggested `horizon`, and an optional `[regions]` table naming the
//! target regions that formulas refer to with `(...) in NAME`. Region
//! coordinates `i`, `j` are 1-based, matching the order of the operators in
//! the formula.
//!
//! ```toml
//! kind = "ctmc"
//! states = ["s0", "s1", "s2"]
//! rates = [[-1, 1, 0], [2, -3, 1], [0, 2, -2]]
//! initial = "s0"
//! horizon = 20.0
//!
//! [labels]
//! s2 = ["full"]
//!
//! [regions.close]
//! kind = "absdiff_le"
//! i = 1
//! j = 2
//! delta = 0.1
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::models::{
    ArrivalProcess, CtmcModel, HybridModel, ModelError, ParamDist, Predicate, PusModel, QueueModel,
    Template,
};
use crate::stats::{Halfspace, Region};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed model file: {0}")]
    Parse(String),
    #[error("region `{name}`: {message}")]
    Region { name: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Deserialize)]
struct ModelFile {
    #[serde(flatten)]
    model: ModelSpec,
    #[serde(default)]
    horizon: Option<f64>,
    #[serde(default)]
    regions: BTreeMap<String, RegionSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModelSpec {
    Ctmc {
        states: Vec<String>,
        rates: Vec<Vec<f64>>,
        initial: String,
        #[serde(default)]
        labels: BTreeMap<String, Vec<String>>,
    },
    Hybrid {
        template: Template,
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "default_max_jumps")]
        max_jumps_per_step: usize,
        #[serde(default)]
        params: BTreeMap<String, ParamDist>,
        #[serde(default)]
        predicates: Vec<Predicate>,
    },
    Queue {
        front_buffers: Vec<usize>,
        back_buffers: Vec<usize>,
        arrivals: Vec<ArrivalProcess>,
        front_service: Vec<f64>,
        back_service: Vec<f64>,
    },
}

fn default_dt() -> f64 {
    0.01
}

fn default_max_jumps() -> usize {
    10
}

/// Region as written in a model file.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Box { intervals: Vec<(f64, f64)> },
    AbsdiffLe { i: usize, j: usize, delta: f64, #[serde(default)] dim: Option<usize> },
    AbsdiffGe { i: usize, j: usize, delta: f64, #[serde(default)] dim: Option<usize> },
    Halfspaces { dim: usize, halfspaces: Vec<Halfspace> },
    Lower { p: f64 },
    Upper { p: f64 },
}

impl RegionSpec {
    pub fn to_region(&self, name: &str) -> Result<Region, ConfigError> {
        let err = |message: String| ConfigError::Region { name: name.to_string(), message };
        let region = match self {
            RegionSpec::Box { intervals } => Region::BoxProduct(intervals.clone()),
            RegionSpec::AbsdiffLe { i, j, delta, dim } | RegionSpec::AbsdiffGe { i, j, delta, dim } => {
                if *i == 0 || *j == 0 {
                    return Err(err("coordinates are 1-based".into()));
                }
                let dim = dim.unwrap_or(*i.max(j));
                let (i, j, delta) = (i - 1, j - 1, *delta);
                if matches!(self, RegionSpec::AbsdiffLe { .. }) {
                    Region::AbsDiffLe { dim, i, j, delta }
                } else {
                    Region::AbsDiffGe { dim, i, j, delta }
                }
            }
            RegionSpec::Halfspaces { dim, halfspaces } => {
                Region::HalfspaceConj { dim: *dim, halfspaces: halfspaces.clone() }
            }
            RegionSpec::Lower { p } => Region::LowerHalfLine(*p),
            RegionSpec::Upper { p } => Region::UpperHalfLine(*p),
        };
        region.validate().map_err(|e| err(e.to_string()))?;
        Ok(region)
    }
}

/// A model ready for verification.
pub struct LoadedModel {
    pub model: Box<dyn PusModel>,
    pub regions: BTreeMap<String, Region>,
    /// Horizon suggested by the file, if any.
    pub horizon: Option<f64>,
}

impl std::fmt::Debug for LoadedModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LoadedModel")
            .field("kind", &self.model.kind())
            .field("regions", &self.regions)
            .field("horizon", &self.horizon)
            .finish()
    }
}

pub fn load_model_str(text: &str) -> Result<LoadedModel, ConfigError> {
    let file: ModelFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    if let Some(h) = file.horizon {
        if !(h > 0.0 && h.is_finite()) {
            return Err(ConfigError::Parse(format!("horizon {h} must be positive")));
        }
    }
    let model: Box<dyn PusModel> = match file.model {
        ModelSpec::Ctmc { states, rates, initial, labels } => {
            Box::new(CtmcModel::new(states, rates, &initial, &labels)?)
        }
        ModelSpec::Hybrid { template, dt, max_jumps_per_step, params, predicates } => Box::new(
            HybridModel::new(template, &params, &predicates, dt, max_jumps_per_step)?,
        ),
        ModelSpec::Queue { front_buffers, back_buffers, arrivals, front_service, back_service } => {
            Box::new(QueueModel::new(front_buffers, back_buffers, arrivals, front_service, back_service)?)
        }
    };
    let regions = file
        .regions
        .iter()
        .map(|(name, spec)| Ok((name.clone(), spec.to_region(name)?)))
        .collect::<Result<_, ConfigError>>()?;
    Ok(LoadedModel { model, regions, horizon: file.horizon })
}

pub fn load_model_file(path: impl AsRef<Path>) -> Result<LoadedModel, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    load_model_str(&text)
}
