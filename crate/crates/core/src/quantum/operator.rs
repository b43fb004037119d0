// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::{Limits, QuantumError, OPERATOR_TOLERANCE};

/// Structural claim attached to an operator, verified on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    General,
    Hermitian,
    Unitary,
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<Complex64>,
    kind: OperatorKind,
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

impl Operator {
    /// Build an operator and verify the declared kind.
    pub fn new(dim: usize, entries: Vec<Complex64>, kind: OperatorKind) -> Result<Self, QuantumError> {
        if dim == 0 {
            return Err(QuantumError::DimensionMismatch { expected: 1, found: 0 });
        }
        Limits::default().check_operator(dim)?;
        if entries.len() != dim * dim {
            return Err(QuantumError::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QuantumError::NonFinite);
        }
        let op = Self { dim, entries, kind: OperatorKind::General };
        op.declare(kind)
    }

    /// Re-declare the kind, verifying it.
    pub fn declare(mut self, kind: OperatorKind) -> Result<Self, QuantumError> {
        match kind {
            OperatorKind::General => {}
            OperatorKind::Hermitian => {
                let defect = self.hermitian_defect();
                if !(defect < OPERATOR_TOLERANCE) {
                    return Err(QuantumError::NotHermitian { defect });
                }
            }
            OperatorKind::Unitary => {
                let defect = self.unitary_defect();
                if !(defect < OPERATOR_TOLERANCE) {
                    return Err(QuantumError::NotUnitary { defect });
                }
            }
        }
        self.kind = kind;
        Ok(self)
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, ONE)
    }

    /// `c·I`; declared unitary when `|c| = 1`, Hermitian when `c` is real.
    pub fn scaled_identity(dim: usize, c: Complex64) -> Self {
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = c;
        }
        let kind = if (c.norm() - 1.0).abs() < 1e-15 && c.im != 0.0 {
            OperatorKind::Unitary
        } else if c.im == 0.0 {
            OperatorKind::Hermitian
        } else {
            OperatorKind::General
        };
        Self { dim, entries, kind }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![ZERO; dim * dim], kind: OperatorKind::Hermitian }
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let dim = values.len();
        let mut entries = vec![ZERO; dim * dim];
        for (i, &v) in values.iter().enumerate() {
            entries[i * dim + i] = v;
        }
        Self { dim, entries, kind: OperatorKind::General }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    /// Conjugate transpose; keeps the kind.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                entries[c * n + r] = self.entries[r * n + c].conj();
            }
        }
        Self { dim: n, entries, kind: self.kind }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖M − M†‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                acc += (self.entries[r * n + c] - self.entries[c * n + r].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `‖M†M − I‖_F`.
    pub fn unitary_defect(&self) -> f64 {
        (&(&self.adjoint() * self) - &Operator::identity(self.dim)).frobenius_norm()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&z| z * c).collect(), kind: OperatorKind::General }
    }

    /// `M·x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.dim);
        self.entries.chunks_exact(self.dim).map(|row| row.iter().zip(x).fold(ZERO, |acc, (m, v)| acc + m * v)).collect()
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    entries[r * n + c] += a * rhs.entries[k * n + c];
                }
            }
        }
        Operator { dim: n, entries, kind: OperatorKind::General }
    }
}

fn zip_with(a: &Operator, b: &Operator, f: impl Fn(Complex64, Complex64) -> Complex64) -> Operator {
    assert_eq!(a.dim, b.dim, "operator dimensions differ");
    Operator {
        dim: a.dim,
        entries: a.entries.iter().zip(&b.entries).map(|(&x, &y)| f(x, y)).collect(),
        kind: OperatorKind::General,
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        zip_with(self, rhs, |x, y| x - y)
    }
}

/// Two-qubit controlled-NOT in the `|00⟩, |01⟩, |10⟩, |11⟩` basis.
pub fn cnot_matrix() -> Operator {
    let mut entries = vec![ZERO; 16];
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        entries[r * 4 + c] = ONE;
    }
    Operator { dim: 4, entries, kind: OperatorKind::Unitary }
}
