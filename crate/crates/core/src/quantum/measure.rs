// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::rng::{self, Seed};

use super::QuantumState;

/// Shot counts per basis label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Empirical frequencies `count / shots`.
    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.shots() as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }
}

/// Projective measurement in the computational basis, `shots` i.i.d. samples.
///
/// A basis state with zero amplitude is never selected.
pub fn measure(state: &QuantumState, shots: u64, seed: Seed) -> Histogram {
    let mut cumulative = Vec::with_capacity(state.dim());
    let mut acc = 0.0;
    for p in state.probabilities() {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;
    let last_nonzero = state.amplitudes().iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0);
    let mut counts = vec![0u64; state.dim()];
    let mut rng = rng::stream_rng(seed, rng::streams::MEASUREMENT);
    for _ in 0..shots {
        let target = rng::open_unit(&mut rng) * total;
        // First index whose cumulative mass exceeds the target; zero-mass
        // entries share their predecessor's value and are skipped.
        let k = cumulative.partition_point(|&c| c <= target).min(last_nonzero);
        counts[k] += 1;
    }
    Histogram { labels: state.labels().to_vec(), counts }
}
