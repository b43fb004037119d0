// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Quantum synapse circuits.
//!
//! Upstream links are the components of `ψ_UP`, whose squared magnitudes are
//! the presynaptic threshold-crossing probabilities. A threshold-conditioned
//! bit flip gates `ψ_UP`; the downstream state follows
//!
//! ```text
//! ∂ψ_DOWN/∂t = i·λ·(g_leak/cm)·(V − v_rest)·|0⟩ + W·ψ_UP
//! ```
//!
//! discretised with forward Euler and renormalised after every step (the
//! equation does not conserve norm). The bidirectional circuit additionally
//! mixes feedback `K·ψ_DOWN` into the upstream side and folds the weighted
//! upstream result back into `ψ_DOWN`.

mod circuit;
mod run;
mod tags;

pub use circuit::{Coupling, Mode, ProbabilityBounds, SynapseCircuit, TagSetup};
pub use run::{prepare_upstream, run_circuit, CircuitRun};
pub use tags::{compose_tags, gate_by_tag, ColorTable, ColorTag, TaggedState, DEFAULT_TABLE};

use num_complex::Complex64;
use thiserror::Error;

use crate::lif::LifParams;
use crate::quantum::{classically_controlled_not, QuantumError, QuantumState};

/// Which combination inside [`bidirectional_step`] lost all amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BidiStage {
    /// `ψ_UP + K·ψ_DOWN`.
    Feedback,
    /// Euler step of the upstream state.
    UpstreamEvolution,
    /// `diag(b)·W·ψ_UP(2) + ψ_DOWN`.
    Recombination,
}

impl std::fmt::Display for BidiStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BidiStage::Feedback => "feedback mixing",
            BidiStage::UpstreamEvolution => "upstream evolution",
            BidiStage::Recombination => "downstream recombination",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynapseError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("probability {value} at link {index} is outside [0, 1]")]
    InvalidProbability { index: usize, value: f64 },
    #[error("all link probabilities are zero; nothing to encode")]
    DegenerateEncoding,
    #[error("{stage} collapsed the state: {source}")]
    Collapsed { stage: BidiStage, source: QuantumError },
    #[error("every component is blocked")]
    AllBlocked,
    #[error("invalid circuit: {0}")]
    Circuit(String),
    #[error("colour tags: {0}")]
    Tag(String),
    #[error("timestep must be > 0, got {0}")]
    Timestep(f64),
}

/// Upstream state with the raw probabilities it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub state: QuantumState,
    /// Probabilities as supplied.
    pub raw: Vec<f64>,
    /// `Σ raw`; `raw_k = total · |a_k|²`.
    pub total: f64,
}

impl Encoding {
    /// Recover raw probabilities from the normalised amplitudes.
    pub fn raw_from_state(&self) -> Vec<f64> {
        self.state.probabilities().iter().map(|p| p * self.total).collect()
    }
}

/// `a_k = sqrt(p_k / Σ p)·exp(i·phase_k)`; missing phases default to zero.
pub fn encode_up(probabilities: &[f64], phases: Option<&[f64]>) -> Result<Encoding, SynapseError> {
    if probabilities.is_empty() {
        return Err(SynapseError::DegenerateEncoding);
    }
    if let Some((index, &value)) = probabilities.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
        return Err(SynapseError::InvalidProbability { index, value });
    }
    if let Some(ph) = phases {
        if ph.len() != probabilities.len() {
            return Err(QuantumError::DimensionMismatch { expected: probabilities.len(), found: ph.len() }.into());
        }
        if ph.iter().any(|x| !x.is_finite()) {
            return Err(QuantumError::NonFinite.into());
        }
    }
    let total: f64 = probabilities.iter().sum();
    if total <= 0.0 {
        return Err(SynapseError::DegenerateEncoding);
    }
    let amps = probabilities
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let magnitude = (p / total).sqrt();
            match phases {
                Some(ph) if ph[k] != 0.0 => Complex64::from_polar(magnitude, ph[k]),
                _ => Complex64::new(magnitude, 0.0),
            }
        })
        .collect();
    let state = QuantumState::normalized(amps, "upstream encoding")?;
    Ok(Encoding { state, raw: probabilities.to_vec(), total })
}

/// Flip `link_pair` when the presynaptic potential is strictly above threshold.
pub fn gate_up(
    state: &QuantumState,
    v_now: f64,
    v_thres: f64,
    link_pair: (usize, usize),
) -> Result<QuantumState, SynapseError> {
    Ok(classically_controlled_not(state, link_pair, v_now > v_thres)?)
}

/// One forward-Euler step of the driven downstream equation, renormalised.
///
/// `drive` is the additive source (usually `W·ψ_UP`); it may be the zero
/// vector. With no source at all the state is returned unchanged.
pub fn evolve_down(
    psi_down: &QuantumState,
    drive: &[Complex64],
    v_now: f64,
    params: &LifParams,
    drive_scale: f64,
    dt: f64,
) -> Result<QuantumState, SynapseError> {
    if !(dt > 0.0) {
        return Err(SynapseError::Timestep(dt));
    }
    if drive.len() != psi_down.dim() {
        return Err(QuantumError::DimensionMismatch { expected: psi_down.dim(), found: drive.len() }.into());
    }
    let potential = drive_scale * (params.g_leak / params.cm) * (v_now - params.v_rest);
    if potential == 0.0 && drive.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return Ok(psi_down.clone());
    }
    let mut next: Vec<Complex64> = psi_down.amplitudes().iter().zip(drive).map(|(&psi, &src)| psi + src * dt).collect();
    next[0] += Complex64::new(0.0, potential * dt);
    Ok(psi_down.replace_normalized(next, "downstream evolution")?)
}

fn is_zero(v: &[Complex64]) -> bool {
    v.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

/// Feedback loop of the bidirectional circuit. Returns `(ψ_UP(2), ψ_DOWN(2))`.
///
/// 1. `ψ_UP(2) = normalize(ψ_UP + K·ψ_DOWN)`
/// 2. one Euler step of `ψ_UP(2)` driven by `ψ_DOWN`
/// 3. `ψ_DOWN(2) = normalize(diag(b)·W·ψ_UP(2) + ψ_DOWN)`
///
/// A combination whose added term is exactly zero leaves its base state
/// untouched, so `K = 0, b = 0` reduces to the one-way circuit bit for bit.
pub fn bidirectional_step(
    circuit: &SynapseCircuit,
    psi_up: &QuantumState,
    psi_down: &QuantumState,
    v_now: f64,
    params: &LifParams,
    dt: f64,
) -> Result<(QuantumState, QuantumState), SynapseError> {
    if circuit.mode != Mode::Bidirectional {
        return Err(SynapseError::Circuit("bidirectional step on a unidirectional circuit".into()));
    }
    if psi_up.dim() != circuit.up_dim || psi_down.dim() != circuit.down_dim {
        return Err(QuantumError::DimensionMismatch { expected: circuit.up_dim, found: psi_up.dim() }.into());
    }
    let feedback = circuit.k_operator.apply(psi_down.amplitudes());
    let mixed = if is_zero(&feedback) {
        psi_up.clone()
    } else {
        let sum = psi_up.amplitudes().iter().zip(&feedback).map(|(a, b)| a + b).collect();
        psi_up
            .replace_normalized(sum, "feedback mixing")
            .map_err(|source| SynapseError::Collapsed { stage: BidiStage::Feedback, source })?
    };

    let up2 =
        evolve_down(&mixed, psi_down.amplitudes(), v_now, params, circuit.drive_scale, dt).map_err(|e| match e {
            SynapseError::Quantum(source) => SynapseError::Collapsed { stage: BidiStage::UpstreamEvolution, source },
            other => other,
        })?;

    let weighted: Vec<Complex64> =
        circuit.couple(up2.amplitudes()).iter().zip(&circuit.b_weights).map(|(x, b)| x * b).collect();
    let down2 = if is_zero(&weighted) {
        psi_down.clone()
    } else {
        let sum = psi_down.amplitudes().iter().zip(&weighted).map(|(a, b)| a + b).collect();
        psi_down
            .replace_normalized(sum, "downstream recombination")
            .map_err(|source| SynapseError::Collapsed { stage: BidiStage::Recombination, source })?
    };
    Ok((up2, down2))
}

/// Close one link: zero its amplitude and renormalise.
pub fn shutdown_link(state: &QuantumState, link: usize) -> Result<QuantumState, SynapseError> {
    if link >= state.dim() {
        return Err(QuantumError::IndexOutOfRange { index: link, dim: state.dim() }.into());
    }
    let amps = state.amplitudes();
    if amps[link].norm_sqr() == 0.0 {
        return Ok(state.clone());
    }
    let mut next = amps.to_vec();
    next[link] = Complex64::new(0.0, 0.0);
    Ok(state.replace_normalized(next, "link shutdown")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{measure, Operator};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn encoding_examples() {
        let e = encode_up(&[1.0, 0.0, 0.0, 0.0], None).unwrap();
        assert_eq!(e.state, QuantumState::basis(4, 0).unwrap());

        let e = encode_up(&[0.5, 0.5], None).unwrap();
        for a in e.state.amplitudes() {
            assert!((a.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15 && a.im == 0.0);
        }

        let e = encode_up(&[0.2, 0.3, 0.5], None).unwrap();
        for (p, q) in e.state.probabilities().iter().zip([0.2, 0.3, 0.5]) {
            assert!((p - q).abs() < 1e-15);
        }

        // Raw values survive normalisation.
        let e = encode_up(&[0.1, 0.3], Some(&[0.0, 1.0])).unwrap();
        assert!((e.total - 0.4).abs() < 1e-15);
        for (a, b) in e.raw_from_state().iter().zip(&e.raw) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((e.state.amplitudes()[1].arg() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn encoding_errors() {
        assert_eq!(encode_up(&[0.0, 0.0], None), Err(SynapseError::DegenerateEncoding));
        assert!(matches!(encode_up(&[0.5, 1.5], None), Err(SynapseError::InvalidProbability { index: 1, .. })));
        assert!(encode_up(&[0.5], Some(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn encoded_distribution_sampled() {
        let e = encode_up(&[0.2, 0.3, 0.5], None).unwrap();
        let shots = 100_000u64;
        let h = measure(&e.state, shots, 17);
        for (count, p) in h.counts.iter().zip([0.2, 0.3, 0.5]) {
            let sigma = (shots as f64 * p * (1.0 - p)).sqrt();
            assert!((*count as f64 - shots as f64 * p).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn gating_threshold_is_strict() {
        let s = QuantumState::normalized(vec![c(1.0, 0.0), c(2.0, 0.0)], "t").unwrap();
        assert_eq!(gate_up(&s, -65.0, -50.0, (0, 1)).unwrap(), s);
        assert_eq!(gate_up(&s, -50.0, -50.0, (0, 1)).unwrap(), s);
        let g = gate_up(&s, -49.0, -50.0, (0, 1)).unwrap();
        assert_eq!(g.amplitudes(), &[s.amplitudes()[1], s.amplitudes()[0]]);
    }

    #[test]
    fn evolve_examples() {
        let p = LifParams::default();
        let down = QuantumState::basis(2, 1).unwrap();
        assert_eq!(evolve_down(&down, &[c(0.0, 0.0); 2], p.v_rest, &p, 1.0, 0.1).unwrap(), down);

        let up = QuantumState::basis(2, 0).unwrap();
        let out = evolve_down(&down, up.amplitudes(), p.v_rest, &p, 1.0, 0.1).unwrap();
        let norm = (0.01f64 + 1.0).sqrt();
        assert!((out.amplitudes()[0].re - 0.1 / norm).abs() < 1e-15);
        assert!((out.amplitudes()[1].re - 1.0 / norm).abs() < 1e-15);
        assert!((out.amplitudes()[0].re - 0.0995).abs() < 1e-3);
        assert!((out.amplitudes()[1].re - 0.995).abs() < 1e-3);

        assert!(matches!(evolve_down(&down, up.amplitudes(), p.v_rest, &p, 1.0, 0.0), Err(SynapseError::Timestep(_))));
    }

    #[test]
    fn potential_term_drives_ground_component() {
        let p = LifParams::default();
        let down = QuantumState::basis(2, 1).unwrap();
        let out = evolve_down(&down, &[c(0.0, 0.0); 2], p.v_rest + 10.0, &p, 1.0, 0.1).unwrap();
        let kick = 10.0 * p.g_leak / p.cm * 0.1;
        assert!((out.amplitudes()[0].im * (1.0 + kick * kick).sqrt() - kick).abs() < 1e-14);
    }

    fn bidi(k: Operator, b: Vec<Complex64>, dim: usize) -> SynapseCircuit {
        let mut circ = SynapseCircuit::new(Mode::Bidirectional, dim, dim, k).unwrap();
        circ.b_weights = b;
        circ
    }

    #[test]
    fn feedback_removed_reduces_to_one_way() {
        let p = LifParams::default();
        let circ = bidi(Operator::zeros(3), vec![c(0.0, 0.0); 3], 3);
        let up = encode_up(&[0.2, 0.3, 0.5], None).unwrap().state;
        let down = QuantumState::basis(3, 1).unwrap();
        let (up2, down2) = bidirectional_step(&circ, &up, &down, p.v_rest, &p, 0.1).unwrap();
        assert_eq!(down2, down);
        assert_eq!(up2, evolve_down(&up, down.amplitudes(), p.v_rest, &p, 1.0, 0.1).unwrap());
    }

    #[test]
    fn global_phase_feedback_keeps_distribution() {
        let p = LifParams::default();
        let psi = encode_up(&[0.2, 0.3, 0.5], Some(&[0.0, 0.4, -1.1])).unwrap().state;
        let mut reference = None;
        for theta in [0.0, 0.5, 1.3, 2.0, 3.0] {
            let k = Operator::scaled_identity(3, Complex64::from_polar(1.0, theta));
            let circ = bidi(k, vec![c(0.0, 0.0); 3], 3);
            let (up2, _) = bidirectional_step(&circ, &psi, &psi, p.v_rest, &p, 0.1).unwrap();
            for (a, b) in up2.probabilities().iter().zip(psi.probabilities()) {
                assert!((a - b).abs() < 1e-12);
            }
            let h = measure(&up2, 50_000, 3);
            match &reference {
                None => reference = Some(h),
                Some(r) => assert_eq!(&h, r, "theta {theta}"),
            }
        }
    }

    #[test]
    fn scalar_feedback_keeps_uniformity() {
        let p = LifParams::default();
        let circ = bidi(Operator::scaled_identity(4, c(0.5, 0.0)), vec![c(0.0, 0.0); 4], 4);
        let u = QuantumState::uniform(4).unwrap();
        let (up2, _) = bidirectional_step(&circ, &u, &u, p.v_rest, &p, 0.1).unwrap();
        for a in up2.amplitudes() {
            assert!((a.re - 0.5).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn collapse_names_the_stage() {
        let p = LifParams::default();
        let circ = bidi(Operator::scaled_identity(2, c(-1.0, 0.0)), vec![c(0.0, 0.0); 2], 2);
        let u = QuantumState::uniform(2).unwrap();
        let err = bidirectional_step(&circ, &u, &u, p.v_rest, &p, 0.1).unwrap_err();
        assert!(matches!(err, SynapseError::Collapsed { stage: BidiStage::Feedback, .. }));

        let circ = bidi(Operator::zeros(2), vec![c(-1.0, 0.0); 2], 2);
        let up = QuantumState::basis(2, 0).unwrap();
        // ψ_UP(2) = normalize(|0⟩ + 0.1·|0⟩) = |0⟩; recombination gives −|0⟩ + |0⟩ = 0.
        let err = bidirectional_step(&circ, &up, &up, p.v_rest, &p, 0.1).unwrap_err();
        assert!(matches!(err, SynapseError::Collapsed { stage: BidiStage::Recombination, .. }), "{err}");
    }

    #[test]
    fn shutdown_examples() {
        let u = QuantumState::uniform(4).unwrap();
        let s = shutdown_link(&u, 2).unwrap();
        assert_eq!(s.probabilities()[2], 0.0);
        for (i, p) in s.probabilities().iter().enumerate() {
            if i != 2 {
                assert!((p - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        assert_eq!(shutdown_link(&s, 2).unwrap(), s);
        assert_eq!(measure(&s, 100_000, 1).counts[2], 0);

        let b = QuantumState::basis(3, 1).unwrap();
        assert!(matches!(shutdown_link(&b, 1), Err(SynapseError::Quantum(QuantumError::Degenerate { .. }))));
        assert!(shutdown_link(&b, 5).is_err());
    }
}
