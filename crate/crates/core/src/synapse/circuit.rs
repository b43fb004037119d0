// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use num_complex::Complex64;

use super::tags::{ColorTable, ColorTag};
use super::SynapseError;
use crate::quantum::{Operator, OperatorKind, OPERATOR_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Unidirectional,
    Bidirectional,
}

/// `L×K` map from upstream components to the downstream drive.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl Coupling {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self, SynapseError> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(SynapseError::Circuit(format!("coupling needs {rows}×{cols} entries, got {}", entries.len())));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let n = values.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &v) in values.iter().enumerate() {
            entries[i * n + i] = v;
        }
        Self { rows: n, cols: n, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.entries.chunks_exact(self.cols).map(|row| row.iter().zip(x).map(|(w, v)| w * v).sum()).collect()
    }
}

/// Optional `[min, max]` bounds on summed link probabilities. Violations are
/// reported as warnings only.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProbabilityBounds {
    pub up: Option<(f64, f64)>,
    pub down: Option<(f64, f64)>,
}

impl ProbabilityBounds {
    fn check(bound: Option<(f64, f64)>, side: &str, probabilities: &[f64]) -> Option<String> {
        let (lo, hi) = bound?;
        let total: f64 = probabilities.iter().sum();
        (total < lo || total > hi).then(|| format!("{side} probability total {total} outside [{lo}, {hi}]"))
    }

    pub fn check_up(&self, probabilities: &[f64]) -> Option<String> {
        Self::check(self.up, "upstream", probabilities)
    }

    pub fn check_down(&self, probabilities: &[f64]) -> Option<String> {
        Self::check(self.down, "downstream", probabilities)
    }
}

/// Colour tags carried by the circuit's link components.
#[derive(Debug, Clone, PartialEq)]
pub struct TagSetup {
    pub table: ColorTable,
    pub up_tags: Vec<ColorTag>,
    /// When present, `ψ_UP(2)` components carry `up ∘ down`.
    pub down_tags: Option<Vec<ColorTag>>,
    pub blocked: BTreeSet<ColorTag>,
}

/// A one-way or feedback quantum synapse between `up_dim` presynaptic and
/// `down_dim` postsynaptic links.
#[derive(Debug, Clone, PartialEq)]
pub struct SynapseCircuit {
    pub mode: Mode,
    pub up_dim: usize,
    pub down_dim: usize,
    /// Feedback operator on the downstream space (Hermitian or unitary).
    pub k_operator: Operator,
    /// `None` is the identity (requires `up_dim == down_dim`).
    pub coupling: Option<Coupling>,
    /// Dimensionless factor on the membrane-potential drive.
    pub drive_scale: f64,
    pub b_weights: Vec<Complex64>,
    /// Basis pair flipped by the threshold gate.
    pub gate_pair: Option<(usize, usize)>,
    /// Upstream links closed before the run.
    pub shutdown: BTreeSet<usize>,
    pub tags: Option<TagSetup>,
    pub bounds: ProbabilityBounds,
}

impl SynapseCircuit {
    /// Circuit with no gate, identity coupling, unit drive scale and zero
    /// downstream weights.
    pub fn new(mode: Mode, up_dim: usize, down_dim: usize, k_operator: Operator) -> Result<Self, SynapseError> {
        let circuit = Self {
            mode,
            up_dim,
            down_dim,
            k_operator,
            coupling: None,
            drive_scale: 1.0,
            b_weights: vec![Complex64::new(0.0, 0.0); down_dim],
            gate_pair: None,
            shutdown: BTreeSet::new(),
            tags: None,
            bounds: ProbabilityBounds::default(),
        };
        circuit.validate()?;
        Ok(circuit)
    }

    /// One-way circuit with a zero feedback operator.
    pub fn unidirectional(up_dim: usize, down_dim: usize) -> Result<Self, SynapseError> {
        Self::new(Mode::Unidirectional, up_dim, down_dim, Operator::zeros(down_dim.max(1)))
    }

    pub fn validate(&self) -> Result<(), SynapseError> {
        let fail = |m: String| Err(SynapseError::Circuit(m));
        if self.up_dim == 0 || self.down_dim == 0 {
            return fail("link counts must be ≥ 1".into());
        }
        if self.k_operator.dim() != self.down_dim {
            return fail(format!("K has dimension {}, expected {}", self.k_operator.dim(), self.down_dim));
        }
        match self.k_operator.kind() {
            OperatorKind::Hermitian => {
                let d = self.k_operator.hermitian_defect();
                if !(d < OPERATOR_TOLERANCE) {
                    return fail(format!("K declared Hermitian but ‖K − K†‖_F = {d}"));
                }
            }
            OperatorKind::Unitary => {
                let d = self.k_operator.unitary_defect();
                if !(d < OPERATOR_TOLERANCE) {
                    return fail(format!("K declared unitary but ‖K†K − I‖_F = {d}"));
                }
            }
            OperatorKind::General => return fail("K must be declared Hermitian or unitary".into()),
        }
        match &self.coupling {
            Some(w) if w.rows() != self.down_dim || w.cols() != self.up_dim => {
                return fail(format!(
                    "coupling is {}×{}, expected {}×{}",
                    w.rows(),
                    w.cols(),
                    self.down_dim,
                    self.up_dim
                ));
            }
            None if self.up_dim != self.down_dim => {
                return fail("identity coupling needs equal upstream and downstream link counts".into());
            }
            _ => {}
        }
        if self.mode == Mode::Bidirectional && self.up_dim != self.down_dim {
            return fail("bidirectional circuits need equal upstream and downstream link counts".into());
        }
        if self.b_weights.len() != self.down_dim {
            return fail(format!("{} downstream weights for {} links", self.b_weights.len(), self.down_dim));
        }
        if !self.drive_scale.is_finite() {
            return fail("drive scale must be finite".into());
        }
        if let Some((i, j)) = self.gate_pair {
            if i == j || i >= self.up_dim || j >= self.up_dim {
                return fail(format!("gate pair ({i}, {j}) invalid for {} upstream links", self.up_dim));
            }
        }
        if let Some(&link) = self.shutdown.iter().find(|&&l| l >= self.up_dim) {
            return fail(format!("shutdown link {link} out of range"));
        }
        if let Some(tags) = &self.tags {
            if tags.up_tags.len() != self.up_dim {
                return fail(format!("{} upstream tags for {} links", tags.up_tags.len(), self.up_dim));
            }
            if let Some(down) = &tags.down_tags {
                if down.len() != self.up_dim {
                    return fail(format!("{} downstream tags for {} links", down.len(), self.up_dim));
                }
            }
            let all = tags.up_tags.iter().chain(tags.down_tags.iter().flatten()).chain(&tags.blocked);
            if let Some(t) = all.clone().find(|t| !tags.table.contains(**t)) {
                return fail(format!("tag {} not in the colour table", t.0));
            }
        }
        Ok(())
    }

    /// Map upstream amplitudes to the downstream space.
    pub fn couple(&self, up: &[Complex64]) -> Vec<Complex64> {
        match &self.coupling {
            Some(w) => w.apply(up),
            None => up.to_vec(),
        }
    }

    /// Downstream weights from postsynaptic probabilities, `|b_l|² = p_l / Σ p`.
    pub fn set_b_from_probabilities(&mut self, probabilities: &[f64]) -> Result<(), SynapseError> {
        if probabilities.len() != self.down_dim {
            return Err(SynapseError::Circuit(format!(
                "{} downstream probabilities for {} links",
                probabilities.len(),
                self.down_dim
            )));
        }
        self.b_weights = super::encode_up(probabilities, None)?.state.amplitudes().to_vec();
        Ok(())
    }
}
