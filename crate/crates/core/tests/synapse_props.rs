// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use proptest::prelude::*;
use qsynapse_core::calibration::{calibrate, ks_statistic, tv_distance, CalibrationReport, CalibrationSetup};
use qsynapse_core::lif::{simulate, LifParams, NetworkTopology, Trajectory, UpstreamLink};
use qsynapse_core::quantum::{
    apply_operator, expm_hermitian, Complex64, Operator, OperatorKind, QuantumState, NORM_TOLERANCE,
};
use qsynapse_core::spike::{generate_poisson, RateProfile, SpikeTrain};
use qsynapse_core::synapse::{
    evolve_down, gate_by_tag, prepare_upstream, run_circuit, ColorTable, ColorTag, Mode, SynapseCircuit, TaggedState,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Neurons that fire on every input impulse, one Poisson-driven neuron per link,
/// with rates chosen so a `window` ms window holds an impulse with probability `p_k`.
fn firing_network(probs: &[f64], window: f64, dt: f64, windows: usize, seed: u64) -> (Trajectory, LifParams) {
    let mut p = LifParams::default();
    p.spike_jump = 30.0;
    p.delta_g = 0.0;
    let horizon = window * windows as f64;
    let trains: Vec<SpikeTrain> = probs
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            let rate = -(1.0 - q).ln() / window;
            generate_poisson(&RateProfile::Constant(rate), horizon, seed, k as u64).unwrap()
        })
        .collect();
    let links = (0..probs.len()).map(|k| vec![UpstreamLink { train: k as u64 }]).collect();
    let topo = NetworkTopology::new(links, vec![]).unwrap();
    let traj = simulate(&topo, &p, &trains, &vec![0.0; probs.len()], dt, horizon).unwrap();
    (traj, p)
}

fn identity_calibration(probs: &[f64], windows: usize, shots: u64, seed: u64) -> CalibrationReport {
    let (traj, p) = firing_network(probs, 1.0, 0.5, windows, seed);
    let circuit = SynapseCircuit::unidirectional(probs.len(), probs.len()).unwrap();
    let setup = CalibrationSetup::new((0..probs.len()).collect(), 1.0, shots, seed);
    calibrate(&traj, &circuit, &p, &setup).unwrap()
}

#[test]
fn always_firing_single_link_is_exact() {
    let mut p = LifParams::default();
    p.spike_jump = 30.0;
    let train = SpikeTrain::new(0, (0..200).map(|k| k as f64 + 0.25).collect(), 200.0).unwrap();
    let topo = NetworkTopology::new(vec![vec![UpstreamLink { train: 0 }]], vec![]).unwrap();
    let traj = simulate(&topo, &p, &[train], &[0.0], 0.5, 200.0).unwrap();
    let circuit = SynapseCircuit::unidirectional(1, 1).unwrap();
    let r = calibrate(&traj, &circuit, &p, &CalibrationSetup::new(vec![0], 1.0, 10_000, 3)).unwrap();
    assert_eq!(r.classical_probs, vec![1.0]);
    assert_eq!(r.quantum_freqs, vec![1.0]);
    assert_eq!(r.tv_distance, 0.0);
    assert!(r.pass);
}

#[test]
fn identity_circuit_closes() {
    let r = identity_calibration(&[0.2, 0.3, 0.5], 20_000, 100_000, 4);
    assert_eq!(r.windows, 20_000);
    for (p, q) in r.classical_probs.iter().zip([0.2, 0.3, 0.5]) {
        assert!((p - q).abs() < 4.0 * (q * (1.0 - q) / 20_000.0f64).sqrt(), "{p} vs {q}");
    }
    assert!(r.tv_distance < 0.01 && r.pass, "{r:?}");
    assert!(r.ks_statistic <= 2.0 * r.tv_distance + 1e-15);
}

#[test]
fn shut_link_bounds_distance_from_below() {
    let probs = [0.3, 0.3, 0.3];
    let (traj, p) = firing_network(&probs, 1.0, 0.5, 2000, 9);
    let mut circuit = SynapseCircuit::unidirectional(3, 3).unwrap();
    circuit.shutdown.insert(1);
    let mut setup = CalibrationSetup::new(vec![0, 1, 2], 1.0, 20_000, 9);
    setup.epsilon = 0.1;
    let r = calibrate(&traj, &circuit, &p, &setup).unwrap();
    let p_hat1 = r.normalized_classical()[1];
    assert_eq!(r.quantum_freqs[1], 0.0);
    assert!(r.tv_distance >= p_hat1 - 1e-12, "{} < {p_hat1}", r.tv_distance);
    assert!(!r.pass && p_hat1 > setup.epsilon);
}

#[test]
fn silent_links_fail_without_crashing() {
    let p = LifParams::default();
    let topo = NetworkTopology::new(vec![vec![], vec![]], vec![]).unwrap();
    let traj = simulate(&topo, &p, &[], &[0.0, 0.0], 0.5, 200.0).unwrap();
    let circuit = SynapseCircuit::unidirectional(2, 2).unwrap();
    let r = calibrate(&traj, &circuit, &p, &CalibrationSetup::new(vec![0, 1], 1.0, 10_000, 1)).unwrap();
    assert!(!r.pass);
    assert!(r.failure.is_some());
}

#[test]
fn doubling_shots_reduces_distance_on_average() {
    let probs = [0.2, 0.3, 0.5];
    let (traj, p) = firing_network(&probs, 1.0, 0.5, 2000, 77);
    let circuit = SynapseCircuit::unidirectional(3, 3).unwrap();
    let mean = |shots: u64| -> f64 {
        (0..40u64)
            .map(|seed| {
                let setup = CalibrationSetup::new(vec![0, 1, 2], 1.0, shots, 1000 + seed);
                calibrate(&traj, &circuit, &p, &setup).unwrap().tv_distance
            })
            .sum::<f64>()
            / 40.0
    };
    let (small, large) = (mean(10_000), mean(20_000));
    assert!(large < small, "{large} ≥ {small}");
}

#[test]
fn evolve_down_is_first_order() {
    let p = LifParams::default();
    let drive = [c(1.0, 0.0), c(0.0, 0.0)];
    let run = |dt: f64| {
        let mut psi = QuantumState::basis(2, 1).unwrap();
        for _ in 0..(2.0 / dt).round() as usize {
            psi = evolve_down(&psi, &drive, p.v_rest + 5.0, &p, 1.0, dt).unwrap();
        }
        psi
    };
    let states: Vec<QuantumState> = [0.1, 0.05, 0.025].iter().map(|&dt| run(dt)).collect();
    let diff = |a: &QuantumState, b: &QuantumState| -> f64 {
        a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    };
    let ratio = diff(&states[0], &states[1]) / diff(&states[1], &states[2]);
    assert!((1.7..2.3).contains(&ratio), "ratio {ratio}");
}

#[test]
fn unitary_feedback_keeps_norm_before_renormalising() {
    let h =
        Operator::new(2, vec![c(0.4, 0.0), c(0.1, -0.3), c(0.1, 0.3), c(-0.2, 0.0)], OperatorKind::Hermitian).unwrap();
    let k = expm_hermitian(&h, 1.3).unwrap();
    let circuit = SynapseCircuit::new(Mode::Bidirectional, 2, 2, k.clone()).unwrap();
    let psi = QuantumState::normalized(vec![c(0.6, 0.1), c(-0.3, 0.7)], "t").unwrap();
    let out = apply_operator(&psi, &circuit.k_operator, false).unwrap();
    assert!((out.norm() - 1.0).abs() < NORM_TOLERANCE);
}

#[test]
fn synapse_types_are_thread_safe() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<SynapseCircuit>();
    assert_send_sync::<QuantumState>();
    assert_send_sync::<Trajectory>();
    assert_send_sync::<CalibrationReport>();
    assert_send_sync::<ColorTable>();
}

fn probs_strategy() -> impl Strategy<Value = Vec<f64>> {
    (2usize..6).prop_flat_map(|d| prop::collection::vec(0.0f64..1.0, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_way_pipeline_stays_normalised(
        rates in prop::collection::vec(0.05f64..1.0, 3),
        seed in 0u64..1000,
        scale in 0.0f64..3.0,
    ) {
        let mut p = LifParams::default();
        p.spike_jump = 12.0;
        let horizon = 100.0;
        let trains: Vec<SpikeTrain> = rates
            .iter()
            .enumerate()
            .map(|(k, &r)| generate_poisson(&RateProfile::Constant(r), horizon, seed, k as u64).unwrap())
            .collect();
        let links = vec![vec![UpstreamLink { train: 0 }, UpstreamLink { train: 1 }], vec![UpstreamLink { train: 2 }]];
        let topo = NetworkTopology::new(links, vec![]).unwrap();
        let traj = simulate(&topo, &p, &trains, &[0.0, 0.0], 0.1, horizon).unwrap();
        let mut circuit = SynapseCircuit::unidirectional(3, 3).unwrap();
        circuit.gate_pair = Some((0, 2));
        circuit.drive_scale = scale;
        let (up, _) = prepare_upstream(&circuit, &[0.2, 0.5, 0.3], None).unwrap();
        let pre: Vec<f64> = traj.potentials(0).skip(1).collect();
        let post: Vec<f64> = traj.potentials(1).skip(1).collect();
        let run = run_circuit(&circuit, &up, &QuantumState::basis(3, 0).unwrap(), &pre, &post, &p, 0.1).unwrap();
        for s in run.down_states.iter().chain(&run.up_states) {
            prop_assert!((s.norm() - 1.0).abs() < NORM_TOLERANCE);
        }
    }

    #[test]
    fn tag_gating_is_idempotent_and_closed(
        raw in prop::collection::vec(((-1.0f64..1.0, -1.0f64..1.0), 0usize..4), 1..12),
        blocked in prop::collection::btree_set(0usize..4, 0..4),
    ) {
        let table = ColorTable::default();
        let amps: Vec<Complex64> = raw.iter().map(|&((a, b), _)| c(a, b)).collect();
        prop_assume!(amps.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6);
        let tags: Vec<ColorTag> = raw.iter().map(|&(_, t)| ColorTag(t)).collect();
        let state = QuantumState::normalized(amps, "random").unwrap();
        let tagged = TaggedState::new(state, tags, &table).unwrap();
        let blocked: BTreeSet<ColorTag> = blocked.into_iter().map(ColorTag).collect();
        if let Ok(once) = gate_by_tag(&tagged, &blocked) {
            prop_assert!(once.tags.as_ref().unwrap().iter().all(|t| table.contains(*t)));
            prop_assert!((once.state.norm() - 1.0).abs() < NORM_TOLERANCE);
            prop_assert_eq!(gate_by_tag(&once, &blocked).unwrap(), once);
        }
    }

    #[test]
    fn distance_axioms(a in probs_strategy(), seed in 0u64..u64::MAX) {
        let d = a.len();
        let rot = |k: u64| -> Vec<f64> { (0..d).map(|i| (((seed ^ k).wrapping_mul(i as u64 + 7)) % 97) as f64 / 97.0).collect() };
        let (b, c3) = (rot(1), rot(2));
        prop_assert_eq!(tv_distance(&a, &a), 0.0);
        prop_assert_eq!(tv_distance(&a, &b), tv_distance(&b, &a));
        prop_assert!(tv_distance(&a, &c3) <= tv_distance(&a, &b) + tv_distance(&b, &c3) + 1e-12);
        prop_assert!(ks_statistic(&a, &b) >= 0.0);
    }
}
