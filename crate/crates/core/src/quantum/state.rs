// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use super::{Limits, Operator, QuantumError, NORM_TOLERANCE};

/// Unit-norm amplitude vector over labelled basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
    labels: Vec<String>,
}

pub(crate) fn norm(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn default_labels(dim: usize) -> Vec<String> {
    (0..dim).map(|i| i.to_string()).collect()
}

impl QuantumState {
    /// Wrap amplitudes that are already normalised.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        let labels = default_labels(amplitudes.len());
        Self::with_labels(amplitudes, labels)
    }

    pub fn with_labels(amplitudes: Vec<Complex64>, labels: Vec<String>) -> Result<Self, QuantumError> {
        Self::check_shape(&amplitudes, &labels)?;
        let n = norm(&amplitudes);
        if (n - 1.0).abs() >= NORM_TOLERANCE {
            return Err(QuantumError::NormDrift { context: "state construction".into(), norm: n });
        }
        Ok(Self { amplitudes, labels })
    }

    /// Scale arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>, context: &str) -> Result<Self, QuantumError> {
        let labels = default_labels(amplitudes.len());
        Self::normalized_with_labels(amplitudes, labels, context)
    }

    pub fn normalized_with_labels(
        mut amplitudes: Vec<Complex64>,
        labels: Vec<String>,
        context: &str,
    ) -> Result<Self, QuantumError> {
        Self::check_shape(&amplitudes, &labels)?;
        let n = norm(&amplitudes);
        if !(n > 0.0) || !n.is_finite() {
            return Err(QuantumError::Degenerate { context: context.into(), norm: n });
        }
        for a in &mut amplitudes {
            *a /= n;
        }
        Ok(Self { amplitudes, labels })
    }

    fn check_shape(amplitudes: &[Complex64], labels: &[String]) -> Result<(), QuantumError> {
        if amplitudes.is_empty() {
            return Err(QuantumError::DimensionMismatch { expected: 1, found: 0 });
        }
        Limits::default().check_state(amplitudes.len())?;
        if labels.len() != amplitudes.len() {
            return Err(QuantumError::DimensionMismatch { expected: amplitudes.len(), found: labels.len() });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QuantumError::NonFinite);
        }
        Ok(())
    }

    /// Computational basis state `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Result<Self, QuantumError> {
        if k >= dim {
            return Err(QuantumError::IndexOutOfRange { index: k, dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[k] = Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn uniform(dim: usize) -> Result<Self, QuantumError> {
        Self::normalized(vec![Complex64::new(1.0, 0.0); dim], "uniform state")
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `|amplitude|²` per basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Same labels, new amplitudes, renormalised.
    pub fn replace_normalized(&self, amplitudes: Vec<Complex64>, context: &str) -> Result<Self, QuantumError> {
        if amplitudes.len() != self.dim() {
            return Err(QuantumError::DimensionMismatch { expected: self.dim(), found: amplitudes.len() });
        }
        Self::normalized_with_labels(amplitudes, self.labels.clone(), context)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<(), QuantumError> {
        if index >= self.dim() {
            return Err(QuantumError::IndexOutOfRange { index, dim: self.dim() });
        }
        Ok(())
    }
}

/// Bit-flip between two basis states when `control` holds.
pub fn classically_controlled_not(
    state: &QuantumState,
    target_pair: (usize, usize),
    control: bool,
) -> Result<QuantumState, QuantumError> {
    let (i, j) = target_pair;
    state.check_index(i)?;
    state.check_index(j)?;
    if i == j {
        return Err(QuantumError::SamePair(i));
    }
    let mut next = state.clone();
    if control {
        next.amplitudes.swap(i, j);
    }
    Ok(next)
}

/// `M·ψ`, optionally renormalised. Without renormalisation the result must
/// already be a unit vector, otherwise the drift is reported.
pub fn apply_operator(state: &QuantumState, op: &Operator, renormalize: bool) -> Result<QuantumState, QuantumError> {
    if op.dim() != state.dim() {
        return Err(QuantumError::DimensionMismatch { expected: state.dim(), found: op.dim() });
    }
    let amps = op.apply(state.amplitudes());
    if renormalize {
        return state.replace_normalized(amps, "operator application");
    }
    let n = norm(&amps);
    if (n - 1.0).abs() >= NORM_TOLERANCE {
        return Err(QuantumError::NormDrift { context: "operator application".into(), norm: n });
    }
    Ok(QuantumState { amplitudes: amps, labels: state.labels.clone() })
}
