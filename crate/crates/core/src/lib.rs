//! Statistical model checking of HyperPSTL properties.
//!
//! Formulas quantify probabilistically over tuples of independent sample
//! paths of a stochastic system. The crate is organised as:
//!
//! - [`logic`]: syntax tree, parser, printer and shape classification;
//! - [`semantics`]: traces and Boolean evaluation of path formulas;
//! - [`models`]: CTMC, stochastic hybrid and queueing-network samplers;
//! - [`stats`]: Clopper-Pearson machinery;
//! - [`smc`]: the four verification engines and their verdicts;
//! - [`config`]: loading model files.

pub mod config;
pub mod logic;
pub mod models;
pub mod semantics;
pub mod smc;
pub mod stats;
