// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Scenario runner and sensor-fusion demo behind the `qsynapse` binary.

pub mod config;
pub mod fusion;
pub mod scenario;

pub use config::{ConfigError, Scenario};
pub use fusion::{run_fusion_demo, FusionFile, FusionReport};
pub use scenario::{run_scenario, RunError, RunOptions, RunSummary, TRACE_FORMAT_VERSION};
