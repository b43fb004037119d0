// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Hermitian eigendecomposition (cyclic complex Jacobi) and the unitary
//! exponentials built on it.

use num_complex::Complex64;

use super::{Operator, OperatorKind, QuantumError, OPERATOR_TOLERANCE};

const MAX_SWEEPS: usize = 100;

/// `H = V·diag(values)·V†` with the eigenvectors in the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Operator,
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                acc += a[r * n + c].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Diagonalise a Hermitian operator.
pub fn hermitian_eigen(h: &Operator) -> Result<HermitianEigen, QuantumError> {
    let defect = h.hermitian_defect();
    if !(defect < OPERATOR_TOLERANCE) {
        return Err(QuantumError::NotHermitian { defect });
    }
    let n = h.dim();
    // Work on the exactly Hermitian part.
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            a[r * n + c] =
                if r == c { Complex64::new(h.get(r, r).re, 0.0) } else { (h.get(r, c) + h.get(c, r).conj()) * 0.5 };
        }
    }
    let mut v = Operator::identity(n).entries().to_vec();
    let frobenius = h.frobenius_norm();
    let target = 1e-15 * frobenius;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a, n);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
            let spread = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - diag.iter().cloned().fold(f64::INFINITY, f64::min);
            return Err(QuantumError::EigenNonConvergence { sweeps, off_norm: off, frobenius, spread });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
        sweeps += 1;
    }

    let values = (0..n).map(|i| a[i * n + i].re).collect();
    let vectors = Operator::new(n, v, OperatorKind::General)?;
    Ok(HermitianEigen { values, vectors })
}

/// Annihilate `a[p][q]` with the unitary `G = diag-phase · real rotation`.
fn rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (2.0 * r);
    let t =
        if theta.abs() > 1e150 { 0.5 / theta } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let ph_conj = phase.conj();

    // Columns: X ← X·G.
    let columns = |m: &mut [Complex64]| {
        for k in 0..n {
            let xp = m[k * n + p];
            let xq = m[k * n + q];
            m[k * n + p] = xp * c - xq * ph_conj * s;
            m[k * n + q] = xp * s + xq * ph_conj * c;
        }
    };
    columns(a);
    columns(v);
    // Rows: A ← G†·A.
    for k in 0..n {
        let xp = a[p * n + k];
        let xq = a[q * n + k];
        a[p * n + k] = xp * c - xq * phase * s;
        a[q * n + k] = xp * s + xq * phase * c;
    }
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;
}

/// `exp(i·scale·H)` for Hermitian `H`, verified unitary.
pub fn expm_hermitian(h: &Operator, scale: f64) -> Result<Operator, QuantumError> {
    if scale == 0.0 {
        let defect = h.hermitian_defect();
        if !(defect < OPERATOR_TOLERANCE) {
            return Err(QuantumError::NotHermitian { defect });
        }
        return Operator::identity(h.dim()).declare(OperatorKind::Unitary);
    }
    let eig = hermitian_eigen(h)?;
    let n = h.dim();
    let phases: Vec<Complex64> = eig.values.iter().map(|&l| Complex64::from_polar(1.0, scale * l)).collect();
    let vecs = eig.vectors.entries();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            out[r * n + c] = (0..n).map(|k| vecs[r * n + k] * phases[k] * vecs[c * n + k].conj()).sum();
        }
    }
    Operator::new(n, out, OperatorKind::Unitary)
}

/// Spin-j angular momentum matrices `(Jx, Jy, Jz)` for `dim = 2j + 1`, in the
/// basis `m = j, j − 1, …, −j`.
pub fn spin_generators(dim: usize) -> Result<[Operator; 3], QuantumError> {
    if dim == 0 {
        return Err(QuantumError::DimensionMismatch { expected: 1, found: 0 });
    }
    let j = (dim as f64 - 1.0) / 2.0;
    let zero = Complex64::new(0.0, 0.0);
    let mut jx = vec![zero; dim * dim];
    let mut jy = vec![zero; dim * dim];
    let mut jz = vec![zero; dim * dim];
    for i in 0..dim {
        let m = j - i as f64;
        jz[i * dim + i] = Complex64::new(m, 0.0);
        if i > 0 {
            // ⟨m+1| J+ |m⟩
            let raise = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
            jx[(i - 1) * dim + i] = Complex64::new(raise / 2.0, 0.0);
            jx[i * dim + i - 1] = Complex64::new(raise / 2.0, 0.0);
            jy[(i - 1) * dim + i] = Complex64::new(0.0, -raise / 2.0);
            jy[i * dim + i - 1] = Complex64::new(0.0, raise / 2.0);
        }
    }
    Ok([
        Operator::new(dim, jx, OperatorKind::Hermitian)?,
        Operator::new(dim, jy, OperatorKind::Hermitian)?,
        Operator::new(dim, jz, OperatorKind::Hermitian)?,
    ])
}

/// Rotation by `angle` about unit `axis`, generated by `generators`.
#[derive(Debug, Clone)]
pub struct RotationSpec {
    axis: [f64; 3],
    angle: f64,
    generators: [Operator; 3],
}

impl RotationSpec {
    pub fn new(axis: [f64; 3], angle: f64, generators: [Operator; 3]) -> Result<Self, QuantumError> {
        let len = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !((len - 1.0).abs() <= 1e-12) {
            return Err(QuantumError::RotationAxis(len));
        }
        let dim = generators[0].dim();
        for g in &generators {
            if g.dim() != dim {
                return Err(QuantumError::DimensionMismatch { expected: dim, found: g.dim() });
            }
            let defect = g.hermitian_defect();
            if !(defect < OPERATOR_TOLERANCE) {
                return Err(QuantumError::NotHermitian { defect });
            }
        }
        if !angle.is_finite() {
            return Err(QuantumError::NonFinite);
        }
        Ok(Self { axis, angle, generators })
    }

    /// Rotation on a `dim`-level spin (dim 2 is spin-½ with `J = σ/2`).
    pub fn spin(dim: usize, axis: [f64; 3], angle: f64) -> Result<Self, QuantumError> {
        Self::new(axis, angle, spin_generators(dim)?)
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// `Ω·J`.
    pub fn generator(&self) -> Operator {
        let [gx, gy, gz] = &self.generators;
        let [x, y, z] = self.axis;
        &(&gx.scale(x.into()) + &gy.scale(y.into())) + &gz.scale(z.into())
    }
}

/// `exp(−i·angle·Ω·J)`.
pub fn rotation_operator(spec: &RotationSpec) -> Result<Operator, QuantumError> {
    expm_hermitian(&spec.generator(), -spec.angle)
}
