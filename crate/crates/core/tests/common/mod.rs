//! Helpers shared by the integration tests.
#![allow(dead_code)]

pub mod beta_quad;
pub mod brute;
pub mod gillespie;
pub mod gen;
