//! Host-side tooling for the soft gripper simulator: configuration, object
//! fixtures, mission scripts, trace files, parallel batches and the CLI.

pub mod cli;
pub mod config;
pub mod fixtures;
pub mod presets;
pub mod runner;
pub mod script;
pub mod trace;
