// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense statevector engine.
//!
//! States and operators are plain row-major `Complex64` buffers. Every public
//! operation returning a [`QuantumState`] either hands back a unit vector
//! (within [`NORM_TOLERANCE`]) or fails with [`QuantumError::Degenerate`] /
//! [`QuantumError::NormDrift`]; there are no silently unnormalised states.
//! The convention is ħ = 1.

mod expm;
mod measure;
mod operator;
mod state;
mod text;

pub use expm::{expm_hermitian, hermitian_eigen, rotation_operator, spin_generators, HermitianEigen, RotationSpec};
pub use measure::{measure, Histogram};
pub use operator::{cnot_matrix, Operator, OperatorKind};
pub use state::{apply_operator, classically_controlled_not, QuantumState};
pub use text::{format_matrix, parse_matrix, parse_rect_matrix};

use thiserror::Error;

pub use num_complex::Complex64;

/// Allowed deviation of a state's norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Frobenius tolerance for declared Hermitian / unitary operators.
pub const OPERATOR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {dim} exceeds the limit of {limit}")]
    DimensionLimit { dim: usize, limit: usize },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("target pair ({0}, {0}) must name two distinct basis states")]
    SamePair(usize),
    #[error("degenerate state in {context}: norm {norm}")]
    Degenerate { context: String, norm: f64 },
    #[error("norm drifted to {norm} after {context}")]
    NormDrift { context: String, norm: f64 },
    #[error("operator is not Hermitian: ‖M − M†‖_F = {defect}")]
    NotHermitian { defect: f64 },
    #[error("operator is not unitary: ‖M†M − I‖_F = {defect}")]
    NotUnitary { defect: f64 },
    #[error("amplitudes must be finite")]
    NonFinite,
    #[error(
        "eigendecomposition did not converge after {sweeps} sweeps \
         (off-diagonal norm {off_norm:e}, Frobenius norm {frobenius:e}, eigenvalue spread {spread:e})"
    )]
    EigenNonConvergence { sweeps: usize, off_norm: f64, frobenius: f64, spread: f64 },
    #[error("rotation axis must be a unit vector, |Ω| = {0}")]
    RotationAxis(f64),
    #[error("matrix text line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Dimension caps for dense objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_state_dim: usize,
    pub max_operator_dim: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_state_dim: 4096, max_operator_dim: 256 }
    }
}

impl Limits {
    pub fn check_state(&self, dim: usize) -> Result<(), QuantumError> {
        if dim > self.max_state_dim {
            return Err(QuantumError::DimensionLimit { dim, limit: self.max_state_dim });
        }
        Ok(())
    }

    pub fn check_operator(&self, dim: usize) -> Result<(), QuantumError> {
        if dim > self.max_operator_dim {
            return Err(QuantumError::DimensionLimit { dim, limit: self.max_operator_dim });
        }
        Ok(())
    }
}
