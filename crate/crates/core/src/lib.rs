// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Classical LIF neurons coupled through a simulated quantum synapse.
//!
//! - [`lif`]: leaky integrate-and-fire neurons with chemical and electrical synapses
//! - [`spike`]: seeded Poisson spike trains
//! - [`quantum`]: dense statevector engine
//! - [`synapse`]: synapse circuits linking presynaptic firing to downstream states
//! - [`calibration`]: classical versus quantum distribution comparison

pub mod calibration;
pub mod lif;
pub mod quantum;
pub mod rng;
pub mod spike;
pub mod synapse;
