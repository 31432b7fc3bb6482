//! Experiment runner for the adaptive channel access model: config parsing,
//! simulation and analysis pipelines, CSV/JSON artifacts.

pub mod ana;
pub mod commands;
pub mod config;
pub mod output;
pub mod sim;
