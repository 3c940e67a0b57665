//! Experiment drivers behind the `resonance-lab` command.

pub mod config;
pub mod table;
pub mod experiments;
