// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use super::circuit::{Mode, SynapseCircuit};
use super::tags::{compose_tags, gate_by_tag, TaggedState};
use super::{bidirectional_step, encode_up, evolve_down, gate_up, shutdown_link, SynapseError};
use crate::lif::LifParams;
use crate::quantum::{QuantumError, QuantumState};

/// States recorded after every step of [`run_circuit`].
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitRun {
    /// Upstream output per step: gated `ψ_UP`, or `ψ_UP(2)` in bidirectional mode.
    pub up_states: Vec<QuantumState>,
    pub down_states: Vec<QuantumState>,
    pub warnings: Vec<String>,
}

impl CircuitRun {
    pub fn final_up(&self) -> Option<&QuantumState> {
        self.up_states.last()
    }

    pub fn final_down(&self) -> Option<&QuantumState> {
        self.down_states.last()
    }
}

/// Encode presynaptic probabilities, close shut-down links and apply colour
/// gating. Bound violations come back as warnings.
pub fn prepare_upstream(
    circuit: &SynapseCircuit,
    probabilities: &[f64],
    phases: Option<&[f64]>,
) -> Result<(QuantumState, Vec<String>), SynapseError> {
    circuit.validate()?;
    if probabilities.len() != circuit.up_dim {
        return Err(QuantumError::DimensionMismatch { expected: circuit.up_dim, found: probabilities.len() }.into());
    }
    let mut warnings: Vec<String> = circuit.bounds.check_up(probabilities).into_iter().collect();
    let down_probs: Vec<f64> = circuit.b_weights.iter().map(|b| b.norm_sqr()).collect();
    warnings.extend(circuit.bounds.check_down(&down_probs));

    let mut state = encode_up(probabilities, phases)?.state;
    for &link in &circuit.shutdown {
        state = shutdown_link(&state, link)?;
    }
    if let Some(tags) = &circuit.tags {
        let tagged = TaggedState::new(state, tags.up_tags.clone(), &tags.table)?;
        state = gate_by_tag(&tagged, &tags.blocked)?.state;
    }
    Ok((state, warnings))
}

/// Drive the circuit with presynaptic (`pre_v`) and postsynaptic (`post_v`)
/// membrane potentials, one entry per step.
///
/// Each step gates the prepared upstream state on the presynaptic potential,
/// advances `ψ_DOWN` with the coupled drive and, for bidirectional circuits,
/// runs the feedback loop. `ψ_UP(2)` is recomputed from the gated state every
/// step; only `ψ_DOWN` carries over.
pub fn run_circuit(
    circuit: &SynapseCircuit,
    up_initial: &QuantumState,
    psi_down0: &QuantumState,
    pre_v: &[f64],
    post_v: &[f64],
    params: &LifParams,
    dt: f64,
) -> Result<CircuitRun, SynapseError> {
    circuit.validate()?;
    if up_initial.dim() != circuit.up_dim {
        return Err(QuantumError::DimensionMismatch { expected: circuit.up_dim, found: up_initial.dim() }.into());
    }
    if psi_down0.dim() != circuit.down_dim {
        return Err(QuantumError::DimensionMismatch { expected: circuit.down_dim, found: psi_down0.dim() }.into());
    }
    if pre_v.len() != post_v.len() {
        return Err(SynapseError::Circuit(format!(
            "{} presynaptic and {} postsynaptic samples",
            pre_v.len(),
            post_v.len()
        )));
    }
    let combined_tags = match &circuit.tags {
        Some(t) => match &t.down_tags {
            Some(down) => Some(
                t.up_tags
                    .iter()
                    .zip(down)
                    .map(|(&a, &b)| compose_tags(a, b, &t.table))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        },
        None => None,
    };

    let mut up = up_initial.clone();
    let mut down = psi_down0.clone();
    let mut run = CircuitRun {
        up_states: Vec::with_capacity(pre_v.len()),
        down_states: Vec::with_capacity(pre_v.len()),
        warnings: Vec::new(),
    };
    for (&v_pre, &v_post) in pre_v.iter().zip(post_v) {
        if let Some(pair) = circuit.gate_pair {
            up = gate_up(&up, v_pre, params.v_thres, pair)?;
        }
        let drive: Vec<Complex64> = circuit.couple(up.amplitudes());
        down = evolve_down(&down, &drive, v_post, params, circuit.drive_scale, dt)?;
        let out = match circuit.mode {
            Mode::Unidirectional => up.clone(),
            Mode::Bidirectional => {
                let (up2, down2) = bidirectional_step(circuit, &up, &down, v_post, params, dt)?;
                down = down2;
                match (&combined_tags, &circuit.tags) {
                    (Some(tags), Some(setup)) => {
                        let tagged = TaggedState::new(up2, tags.clone(), &setup.table)?;
                        gate_by_tag(&tagged, &setup.blocked)?.state
                    }
                    _ => up2,
                }
            }
        };
        run.up_states.push(out);
        run.down_states.push(down.clone());
    }
    Ok(run)
}
