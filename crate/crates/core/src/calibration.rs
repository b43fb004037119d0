// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Classical-versus-quantum calibration.
//!
//! Per-link threshold-crossing probabilities measured from a LIF trajectory are
//! encoded into the upstream state, the circuit is run for one window and its
//! upstream output is sampled. The normalised classical vector and the shot
//! frequencies are compared with total variation (pass metric) and a
//! two-sample Kolmogorov–Smirnov statistic over link order.

use std::io::Write;

use thiserror::Error;

use crate::lif::{measure_firing_probability, LifError, LifParams, Trajectory};
use crate::quantum::{measure, QuantumState};
use crate::rng::Seed;
use crate::synapse::{prepare_upstream, run_circuit, SynapseCircuit, SynapseError};

pub const DEFAULT_EPSILON: f64 = 0.02;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Lif(#[from] LifError),
    #[error(transparent)]
    Synapse(#[from] SynapseError),
    #[error("calibration setup: {0}")]
    Setup(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which trajectory neurons feed the circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSetup {
    /// Presynaptic neuron behind each upstream link.
    pub link_neurons: Vec<usize>,
    /// Neuron whose potential drives the threshold gate.
    pub gate_neuron: Option<usize>,
    /// Neuron whose potential drives the downstream equation; `None` holds it at rest.
    pub post_neuron: Option<usize>,
    pub phases: Option<Vec<f64>>,
    /// Window in ms; must be a whole number of steps.
    pub window: f64,
    pub shots: u64,
    pub seed: Seed,
    pub epsilon: f64,
}

impl CalibrationSetup {
    pub fn new(link_neurons: Vec<usize>, window: f64, shots: u64, seed: Seed) -> Self {
        Self {
            link_neurons,
            gate_neuron: None,
            post_neuron: None,
            phases: None,
            window,
            shots,
            seed,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    /// Raw per-link firing probabilities.
    pub classical_probs: Vec<f64>,
    pub quantum_freqs: Vec<f64>,
    pub tv_distance: f64,
    pub ks_statistic: f64,
    pub windows: usize,
    pub shots: u64,
    pub epsilon: f64,
    pub pass: bool,
    /// Why the calibration failed without a comparison, if it did.
    pub failure: Option<String>,
    pub warnings: Vec<String>,
}

impl CalibrationReport {
    /// Normalised classical vector `p / Σ p`, or zeros if `Σ p = 0`.
    pub fn normalized_classical(&self) -> Vec<f64> {
        normalize(&self.classical_probs)
    }

    /// Flat `key,value` CSV block.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "key,value")?;
        for (k, p) in self.classical_probs.iter().enumerate() {
            writeln!(out, "classical_p_{k},{p}")?;
        }
        for (k, p) in self.normalized_classical().iter().enumerate() {
            writeln!(out, "classical_normalized_{k},{p}")?;
        }
        for (k, f) in self.quantum_freqs.iter().enumerate() {
            writeln!(out, "quantum_freq_{k},{f}")?;
        }
        writeln!(out, "tv_distance,{}", self.tv_distance)?;
        writeln!(out, "ks_statistic,{}", self.ks_statistic)?;
        writeln!(out, "windows,{}", self.windows)?;
        writeln!(out, "shots,{}", self.shots)?;
        writeln!(out, "epsilon,{}", self.epsilon)?;
        writeln!(out, "pass,{}", self.pass)?;
        if let Some(f) = &self.failure {
            writeln!(out, "failure,\"{}\"", f.replace('"', "\"\""))?;
        }
        Ok(())
    }
}

fn normalize(p: &[f64]) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter().map(|x| x / total).collect()
    } else {
        vec![0.0; p.len()]
    }
}

/// `½ Σ |a_k − b_k|`. Panics if the lengths differ.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "distributions must have equal support");
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Largest gap between the two cumulative distributions over index order.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "distributions must have equal support");
    let (mut ca, mut cb, mut worst) = (0.0f64, 0.0f64, 0.0f64);
    for (x, y) in a.iter().zip(b) {
        ca += x;
        cb += y;
        worst = worst.max((ca - cb).abs());
    }
    worst
}

/// Compare classical firing statistics with the circuit's measured output.
///
/// A degenerate encoding (every link silent) or a circuit that loses all
/// amplitude yields a failed report rather than an error.
pub fn calibrate(
    trajectory: &Trajectory,
    circuit: &SynapseCircuit,
    params: &LifParams,
    setup: &CalibrationSetup,
) -> Result<CalibrationReport, CalibrationError> {
    if setup.link_neurons.len() != circuit.up_dim {
        return Err(CalibrationError::Setup(format!(
            "{} link neurons for {} upstream links",
            setup.link_neurons.len(),
            circuit.up_dim
        )));
    }
    if setup.shots == 0 {
        return Err(CalibrationError::Setup("shots must be ≥ 1".into()));
    }
    if !(setup.epsilon > 0.0) {
        return Err(CalibrationError::Setup(format!("epsilon must be > 0, got {}", setup.epsilon)));
    }
    let per_window = trajectory.window_steps(setup.window)?;
    let windows = trajectory.steps() / per_window;
    let classical = setup
        .link_neurons
        .iter()
        .map(|&n| measure_firing_probability(trajectory, setup.window, n))
        .collect::<Result<Vec<_>, _>>()?;

    let mut report = CalibrationReport {
        classical_probs: classical.clone(),
        quantum_freqs: vec![0.0; classical.len()],
        tv_distance: 1.0,
        ks_statistic: 1.0,
        windows,
        shots: setup.shots,
        epsilon: setup.epsilon,
        pass: false,
        failure: None,
        warnings: Vec::new(),
    };
    if windows < 100 {
        report.warnings.push(format!("only {windows} windows; at least 100 recommended"));
    }

    let (up, warnings) = match prepare_upstream(circuit, &classical, setup.phases.as_deref()) {
        Ok(x) => x,
        Err(e @ (SynapseError::DegenerateEncoding | SynapseError::AllBlocked | SynapseError::Quantum(_))) => {
            report.failure = Some(e.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    report.warnings.extend(warnings);

    let sample = |neuron: Option<usize>| -> Vec<f64> {
        (1..=per_window).map(|s| neuron.map_or(params.v_rest, |n| trajectory.potential(s, n))).collect()
    };
    for n in [setup.gate_neuron, setup.post_neuron].into_iter().flatten() {
        if n >= trajectory.neuron_count() {
            return Err(CalibrationError::Setup(format!("neuron {n} not in trajectory")));
        }
    }
    let pre_v = sample(setup.gate_neuron);
    let post_v = sample(setup.post_neuron);
    let down0 = QuantumState::basis(circuit.down_dim, 0).map_err(SynapseError::from)?;
    let out = match run_circuit(circuit, &up, &down0, &pre_v, &post_v, params, trajectory.dt()) {
        Ok(run) => run.up_states.last().cloned().unwrap_or(up),
        Err(e @ (SynapseError::Collapsed { .. } | SynapseError::AllBlocked | SynapseError::Quantum(_))) => {
            report.failure = Some(e.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };

    let freqs = measure(&out, setup.shots, setup.seed).frequencies();
    let reference = normalize(&classical);
    report.tv_distance = tv_distance(&reference, &freqs);
    report.ks_statistic = ks_statistic(&reference, &freqs);
    report.quantum_freqs = freqs;
    report.pass = report.tv_distance < setup.epsilon;
    Ok(report)
}
