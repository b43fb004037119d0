// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use qsynapse_core::quantum::{
    apply_operator, classically_controlled_not, cnot_matrix, expm_hermitian, measure, rotation_operator, Complex64,
    Operator, OperatorKind, QuantumState, RotationSpec, NORM_TOLERANCE,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hermitian_from(dim: usize, raw: &[(f64, f64)]) -> Operator {
    let mut m = vec![c(0.0, 0.0); dim * dim];
    let mut it = raw.iter().cycle();
    for i in 0..dim {
        for j in i..dim {
            let &(re, im) = it.next().unwrap();
            if i == j {
                m[i * dim + i] = c(re, 0.0);
            } else {
                m[i * dim + j] = c(re, im);
                m[j * dim + i] = c(re, -im);
            }
        }
    }
    Operator::new(dim, m, OperatorKind::Hermitian).unwrap()
}

/// `exp(i·s·h)` by a 30-term Taylor series, with plain loops.
fn taylor_exp(h: &Operator, s: f64) -> Vec<Complex64> {
    let d = h.dim();
    let a: Vec<Complex64> = h.entries().iter().map(|z| z * c(0.0, s)).collect();
    let mut sum = vec![c(0.0, 0.0); d * d];
    let mut term = vec![c(0.0, 0.0); d * d];
    for i in 0..d {
        term[i * d + i] = c(1.0, 0.0);
    }
    for n in 0..30 {
        for (acc, t) in sum.iter_mut().zip(&term) {
            *acc += t;
        }
        let mut next = vec![c(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let t = term[i * d + k];
                for j in 0..d {
                    next[i * d + j] += t * a[k * d + j];
                }
            }
        }
        let inv = 1.0 / (n + 1) as f64;
        term = next.into_iter().map(|z| z * inv).collect();
    }
    sum
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn pauli_exponential_closed_form_and_series() {
    let half_z = Operator::diagonal(&[c(0.5, 0.0), c(-0.5, 0.0)]).declare(OperatorKind::Hermitian).unwrap();
    let u = expm_hermitian(&half_z, -2.0 * PI).unwrap();
    let minus_i = Operator::scaled_identity(2, c(-1.0, 0.0));
    assert!(max_diff(u.entries(), minus_i.entries()) < 1e-10);
    assert!(max_diff(u.entries(), &taylor_exp(&half_z, -2.0 * PI)) < 1e-10);
}

#[test]
fn series_oracle_on_fixed_hermitian() {
    let raw = [(0.3, 0.0), (0.2, -0.7), (-0.1, 0.4), (1.1, 0.0), (0.5, 0.25), (-0.6, 0.0)];
    let h = hermitian_from(3, &raw);
    for s in [0.3, -1.0, 2.5] {
        assert!(max_diff(expm_hermitian(&h, s).unwrap().entries(), &taylor_exp(&h, s)) < 1e-10, "s = {s}");
    }
}

#[test]
fn spin_half_rotations() {
    let rz = rotation_operator(&RotationSpec::spin(2, [0.0, 0.0, 1.0], 2.0 * PI).unwrap()).unwrap();
    assert!(max_diff(rz.entries(), Operator::scaled_identity(2, c(-1.0, 0.0)).entries()) < 1e-10);
    let rx = rotation_operator(&RotationSpec::spin(2, [1.0, 0.0, 0.0], FRAC_PI_2).unwrap()).unwrap();
    let ry = rotation_operator(&RotationSpec::spin(2, [0.0, 1.0, 0.0], FRAC_PI_2).unwrap()).unwrap();
    assert!((&(&rx * &ry) - &(&ry * &rx)).frobenius_norm() > 0.1);
    let zero = rotation_operator(&RotationSpec::spin(3, [0.0, 0.6, 0.8], 0.0).unwrap()).unwrap();
    assert_eq!(zero.entries(), Operator::identity(3).entries());
}

#[test]
fn cnot_is_a_permutation_involution() {
    let m = cnot_matrix();
    for i in 0..4 {
        let row_ones = (0..4).filter(|&j| m.get(i, j) == c(1.0, 0.0)).count();
        let col_ones = (0..4).filter(|&j| m.get(j, i) == c(1.0, 0.0)).count();
        let zeros = (0..4).filter(|&j| m.get(i, j) == c(0.0, 0.0)).count();
        assert_eq!((row_ones, col_ones, zeros), (1, 1, 3));
    }
    assert_eq!((&m * &m).entries(), Operator::identity(4).entries());
    let ten = QuantumState::basis(4, 2).unwrap();
    assert_eq!(apply_operator(&ten, &m, false).unwrap(), QuantumState::basis(4, 3).unwrap());
}

#[test]
fn controlled_not_semantics() {
    let s = QuantumState::normalized(vec![c(1.0, 0.0), c(0.0, 2.0), c(3.0, -1.0)], "t").unwrap();
    assert_eq!(classically_controlled_not(&s, (0, 2), false).unwrap(), s);
    let once = classically_controlled_not(&s, (0, 2), true).unwrap();
    assert_eq!(once.amplitudes()[0], s.amplitudes()[2]);
    assert_eq!(once.amplitudes()[1], s.amplitudes()[1]);
    assert_eq!(classically_controlled_not(&once, (0, 2), true).unwrap(), s);
}

#[test]
fn measurement_examples() {
    let shots = 100_000;
    let h = measure(&QuantumState::basis(5, 3).unwrap(), shots, 1);
    assert_eq!(h.counts, vec![0, 0, 0, shots, 0]);
    let u = measure(&QuantumState::uniform(4).unwrap(), shots, 2);
    for &count in &u.counts {
        assert!((count as f64 - 25_000.0).abs() < 411.0, "{count}");
    }
    assert_eq!(u, measure(&QuantumState::uniform(4).unwrap(), shots, 2));
}

#[test]
fn measured_distribution_converges() {
    let shots = 10_000u64;
    let mut failures = 0;
    for seed in 0..200u64 {
        let d = 2 + (seed % 7) as usize;
        let amps: Vec<Complex64> =
            (0..d).map(|k| c(((seed + 1) * (k as u64 + 3) % 11) as f64 + 0.5, (k as f64).sin())).collect();
        let state = QuantumState::normalized(amps, "random").unwrap();
        let freqs = measure(&state, shots, seed).frequencies();
        let tv: f64 = 0.5 * state.probabilities().iter().zip(&freqs).map(|(p, f)| (p - f).abs()).sum::<f64>();
        if tv >= 4.0 * (d as f64 / shots as f64).sqrt() {
            failures += 1;
        }
    }
    assert!(failures <= 2, "{failures} of 200 seeds exceeded the bound");
}

#[test]
fn operator_examples() {
    let s = QuantumState::normalized(vec![c(0.3, 0.1), c(-0.2, 0.7), c(0.0, 0.4)], "t").unwrap();
    assert_eq!(apply_operator(&s, &Operator::identity(3), false).unwrap(), s);
    let half = apply_operator(&s, &Operator::scaled_identity(3, c(0.5, 0.0)), true).unwrap();
    assert!(max_diff(half.amplitudes(), s.amplitudes()) < 1e-15);
}

fn hermitian_strategy() -> impl Strategy<Value = Operator> {
    (1usize..=16).prop_flat_map(|d| {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), d * (d + 1) / 2)
            .prop_map(move |raw| hermitian_from(d, &raw))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exponential_is_unitary(h in hermitian_strategy(), s in -20.0f64..20.0) {
        let u = expm_hermitian(&h, s).unwrap();
        prop_assert!(u.unitary_defect() < 1e-10);
    }

    #[test]
    fn exponential_semigroup(h in hermitian_strategy(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let lhs = &expm_hermitian(&h, a).unwrap() * &expm_hermitian(&h, b).unwrap();
        let rhs = expm_hermitian(&h, a + b).unwrap();
        prop_assert!((&lhs - &rhs).frobenius_norm() < 1e-9);
    }

    #[test]
    fn unitary_application_keeps_norm(
        h in hermitian_strategy(),
        s in -5.0f64..5.0,
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
    ) {
        let d = h.dim();
        let amps: Vec<Complex64> = raw[..d].iter().map(|&(a, b)| c(a, b)).collect();
        prop_assume!(amps.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6);
        let state = QuantumState::normalized(amps, "random").unwrap();
        let out = apply_operator(&state, &expm_hermitian(&h, s).unwrap(), false).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < NORM_TOLERANCE);
    }
}
