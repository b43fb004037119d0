// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Leaky integrate-and-fire neurons with saturating synaptic conductances and
//! gap-junction coupling.
//!
//! ```text
//! cm·dV/dt = −g_leak·(V − v_rest) + Σ_j gs_j·(e_syn − V) + Σ_k g_k·(V_k − V) + I
//! dgs_j/dt = −gs_j / tau_syn,   0 ≤ gs_j ≤ gs_max
//! ```
//!
//! Presynaptic impulses are instantaneous jumps (`V += spike_jump`,
//! `gs_j += delta_g`) applied at the start of the step they fall in. The
//! continuous part is integrated with RK4 (or forward Euler) while the
//! conductances follow their exact exponential decay inside the step.
//! Crossing `v_thres` resets the membrane to `v_rest`; there is no
//! refractory period.
//!
//! Units are mV, ms, mS/cm², μF/cm² and μA/cm², so `cm / g_leak` is a time
//! constant in ms.

use std::collections::HashMap;

use thiserror::Error;

use crate::spike::SpikeTrain;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LifError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("membrane potential of neuron {neuron} diverged at t = {t} ms")]
    Divergence { neuron: usize, t: f64 },
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("input shape mismatch: {0}")]
    Shape(String),
    #[error("no spike train with link id {0}")]
    UnknownTrain(u64),
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("invalid measurement window: {0}")]
    Window(String),
}

/// Continuous-part integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

/// How upstream currents enter the membrane equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputMode {
    /// Leak on `V`, synaptic and gap-junction currents added separately.
    #[default]
    Standard,
    /// `cm·dV/dt = −g_leak·Σ_j [(gs_j·(e_syn − V) − v_rest) + I + Σ_k g_k·(V_k − V)]`,
    /// summing over upstream links (one term when a neuron has none). Kept
    /// only for comparison runs.
    LiteralSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifParams {
    pub cm: f64,
    pub g_leak: f64,
    pub v_rest: f64,
    pub v_thres: f64,
    pub v_init: f64,
    pub e_syn: f64,
    pub tau_syn: f64,
    pub gs_max: f64,
    /// Default gap-junction conductance for pairs that do not set their own.
    pub g_elec: f64,
    pub spike_jump: f64,
    /// Conductance increment per presynaptic impulse.
    pub delta_g: f64,
    /// Gap-junction conductances above this only raise a warning.
    pub g_elec_warn_max: f64,
    pub integrator: Integrator,
    pub input_mode: InputMode,
}

impl Default for LifParams {
    fn default() -> Self {
        Self {
            cm: 1.0,
            g_leak: 0.0551,
            v_rest: -65.0,
            v_thres: -50.0,
            v_init: -70.6837,
            e_syn: 0.0225,
            tau_syn: 5.0,
            gs_max: 0.1,
            g_elec: 0.0,
            spike_jump: 5.0,
            delta_g: 0.01,
            g_elec_warn_max: 0.025,
            integrator: Integrator::Rk4,
            input_mode: InputMode::Standard,
        }
    }
}

/// Non-fatal parameter findings.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamWarning {
    GapConductanceOutOfRange { g: f64, bound: f64 },
}

impl std::fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamWarning::GapConductanceOutOfRange { g, bound } => {
                write!(f, "gap-junction conductance {g} outside [0, {bound}] mS/cm²")
            }
        }
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> LifError {
    LifError::InvalidParameter { name, reason: reason.into() }
}

impl LifParams {
    /// Membrane time constant `cm / g_leak` in ms.
    pub fn tau_membrane(&self) -> f64 {
        self.cm / self.g_leak
    }

    /// Checks hard invariants; soft bounds come back as warnings.
    pub fn validate(&self) -> Result<Vec<ParamWarning>, LifError> {
        let named = [
            ("cm", self.cm),
            ("g_leak", self.g_leak),
            ("v_rest", self.v_rest),
            ("v_thres", self.v_thres),
            ("v_init", self.v_init),
            ("e_syn", self.e_syn),
            ("tau_syn", self.tau_syn),
            ("gs_max", self.gs_max),
            ("g_elec", self.g_elec),
            ("spike_jump", self.spike_jump),
            ("delta_g", self.delta_g),
            ("g_elec_warn_max", self.g_elec_warn_max),
        ];
        for (name, value) in named {
            if !value.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        for (name, value) in
            [("cm", self.cm), ("g_leak", self.g_leak), ("tau_syn", self.tau_syn), ("gs_max", self.gs_max)]
        {
            if value <= 0.0 {
                return Err(invalid(name, format!("must be > 0, got {value}")));
            }
        }
        if self.delta_g < 0.0 {
            return Err(invalid("delta_g", "must be ≥ 0"));
        }
        if self.v_thres <= self.v_rest {
            return Err(invalid("v_thres", format!("must exceed v_rest ({} ≤ {})", self.v_thres, self.v_rest)));
        }
        Ok(self.gap_warning(self.g_elec).into_iter().collect())
    }

    pub(crate) fn gap_warning(&self, g: f64) -> Option<ParamWarning> {
        (g < 0.0 || g > self.g_elec_warn_max)
            .then_some(ParamWarning::GapConductanceOutOfRange { g, bound: self.g_elec_warn_max })
    }
}

/// Dynamic state of one neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronState {
    pub v: f64,
    /// Synaptic conductance per upstream link.
    pub gs: Vec<f64>,
    pub last_reset_time: Option<f64>,
    pub spike_count: u64,
}

impl NeuronState {
    /// Fresh neuron at `v_init` with closed synapses.
    pub fn new(params: &LifParams, links: usize) -> Self {
        Self::with_potential(params.v_init, links)
    }

    pub fn with_potential(v: f64, links: usize) -> Self {
        Self { v, gs: vec![0.0; links], last_reset_time: None, spike_count: 0 }
    }
}

/// Exact solution of `dgs/dt = −gs/tau_syn` over `dt`.
pub fn decay_conductance(gs: f64, tau_syn: f64, dt: f64) -> f64 {
    gs * (-dt / tau_syn).exp()
}

/// Everything that drives one neuron through one step.
#[derive(Debug, Clone, Copy)]
pub struct NeuronInput<'a> {
    /// External current (μA/cm²).
    pub drive: f64,
    /// `(potential, conductance)` of each gap-junction partner, frozen at step start.
    pub neighbors: &'a [(f64, f64)],
    /// Impulses per upstream link arriving in this step.
    pub spikes: &'a [u32],
}

/// Where in the run a step happens; used for error reports and reset times.
#[derive(Debug, Clone, Copy)]
pub struct StepClock {
    pub neuron: usize,
    pub t: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: NeuronState,
    /// Threshold crossings inside the step (0, 1, or 2 when both the impulse
    /// jump and the continuous part cross).
    pub crossings: u32,
}

impl StepOutcome {
    pub fn fired(&self) -> bool {
        self.crossings > 0
    }
}

/// Right-hand side of the membrane equation with all currents linearised in `v`:
/// `dV/dt = (a + g_syn(s)·e_syn − (b + g_syn(s))·v) / cm` in standard mode.
struct Membrane<'p> {
    params: &'p LifParams,
    /// Σ gs_j at step start.
    g_syn0: f64,
    /// Σ_k g_k.
    g_gap: f64,
    /// Σ_k g_k·V_k.
    i_gap: f64,
    drive: f64,
    terms: f64,
}

impl Membrane<'_> {
    fn g_syn(&self, s: f64) -> f64 {
        if self.g_syn0 == 0.0 {
            0.0
        } else {
            self.g_syn0 * (-s / self.params.tau_syn).exp()
        }
    }

    fn rate(&self, s: f64, v: f64) -> f64 {
        let p = self.params;
        let g_syn = self.g_syn(s);
        match p.input_mode {
            InputMode::Standard => {
                (-p.g_leak * (v - p.v_rest) + g_syn * (p.e_syn - v) + self.i_gap - self.g_gap * v + self.drive) / p.cm
            }
            InputMode::LiteralSum => {
                let per_term = -p.v_rest + self.drive + self.i_gap - self.g_gap * v;
                -p.g_leak * (g_syn * (p.e_syn - v) + self.terms * per_term) / p.cm
            }
        }
    }

    fn advance(&self, v: f64, dt: f64) -> f64 {
        match self.params.integrator {
            Integrator::Euler => v + dt * self.rate(0.0, v),
            Integrator::Rk4 => {
                let h = 0.5 * dt;
                let k1 = self.rate(0.0, v);
                let k2 = self.rate(h, v + h * k1);
                let k3 = self.rate(h, v + h * k2);
                let k4 = self.rate(dt, v + dt * k3);
                v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            }
        }
    }
}

/// Sum gap-junction partners in a canonical order so the result does not
/// depend on how neurons are numbered.
fn gap_sums(neighbors: &[(f64, f64)]) -> (f64, f64) {
    let mut sorted = neighbors.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    sorted.iter().fold((0.0, 0.0), |(g, i), &(v_k, g_k)| (g + g_k, i + g_k * v_k))
}

/// Advance one neuron by `clock.dt`.
pub fn step_neuron(
    state: &NeuronState,
    params: &LifParams,
    input: &NeuronInput<'_>,
    clock: StepClock,
) -> Result<StepOutcome, LifError> {
    if input.spikes.len() != state.gs.len() {
        return Err(LifError::Shape(format!(
            "neuron {} has {} links but received {} spike indicators",
            clock.neuron,
            state.gs.len(),
            input.spikes.len()
        )));
    }
    let mut next = state.clone();
    let mut crossings = 0;

    for (g, &count) in next.gs.iter_mut().zip(input.spikes) {
        for _ in 0..count {
            *g = (*g + params.delta_g).min(params.gs_max);
            next.v += params.spike_jump;
        }
    }
    if next.v > params.v_thres {
        next.v = params.v_rest;
        next.spike_count += 1;
        next.last_reset_time = Some(clock.t);
        crossings += 1;
    }

    let (g_gap, i_gap) = gap_sums(input.neighbors);
    let membrane = Membrane {
        params,
        g_syn0: next.gs.iter().sum(),
        g_gap,
        i_gap,
        drive: input.drive,
        terms: next.gs.len().max(1) as f64,
    };
    next.v = membrane.advance(next.v, clock.dt);
    if !next.v.is_finite() {
        return Err(LifError::Divergence { neuron: clock.neuron, t: clock.t + clock.dt });
    }
    for g in &mut next.gs {
        *g = decay_conductance(*g, params.tau_syn, clock.dt).clamp(0.0, params.gs_max);
    }
    if next.v > params.v_thres {
        next.v = params.v_rest;
        next.spike_count += 1;
        next.last_reset_time = Some(clock.t + clock.dt);
        crossings += 1;
    }
    Ok(StepOutcome { state: next, crossings })
}

/// One upstream link feeding a neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpstreamLink {
    /// Link id of the spike train driving this synapse.
    pub train: u64,
}

/// Symmetric electrical synapse between two distinct neurons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapJunction {
    pub a: usize,
    pub b: usize,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    neuron_count: usize,
    upstream_links: Vec<Vec<UpstreamLink>>,
    elec_pairs: Vec<GapJunction>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl NetworkTopology {
    pub fn new(upstream_links: Vec<Vec<UpstreamLink>>, elec_pairs: Vec<GapJunction>) -> Result<Self, LifError> {
        let neuron_count = upstream_links.len();
        if neuron_count == 0 {
            return Err(LifError::Topology("network has no neurons".into()));
        }
        let mut adjacency = vec![Vec::new(); neuron_count];
        let mut seen = std::collections::HashSet::new();
        for pair in &elec_pairs {
            if pair.a == pair.b {
                return Err(LifError::Topology(format!("self junction on neuron {}", pair.a)));
            }
            if pair.a >= neuron_count || pair.b >= neuron_count {
                return Err(LifError::Topology(format!(
                    "junction ({}, {}) references a neuron outside 0..{neuron_count}",
                    pair.a, pair.b
                )));
            }
            if !pair.g.is_finite() || pair.g < 0.0 {
                return Err(LifError::Topology(format!(
                    "junction ({}, {}) has invalid conductance {}",
                    pair.a, pair.b, pair.g
                )));
            }
            if !seen.insert((pair.a.min(pair.b), pair.a.max(pair.b))) {
                return Err(LifError::Topology(format!("duplicate junction between {} and {}", pair.a, pair.b)));
            }
            adjacency[pair.a].push((pair.b, pair.g));
            adjacency[pair.b].push((pair.a, pair.g));
        }
        Ok(Self { neuron_count, upstream_links, elec_pairs, adjacency })
    }

    pub fn neuron_count(&self) -> usize {
        self.neuron_count
    }

    pub fn upstream_links(&self, neuron: usize) -> &[UpstreamLink] {
        &self.upstream_links[neuron]
    }

    pub fn elec_pairs(&self) -> &[GapJunction] {
        &self.elec_pairs
    }

    /// Gap-junction partners of `neuron` with their conductances.
    pub fn neighbors(&self, neuron: usize) -> &[(usize, f64)] {
        &self.adjacency[neuron]
    }

    pub fn initial_states(&self, params: &LifParams) -> Vec<NeuronState> {
        self.upstream_links.iter().map(|links| NeuronState::new(params, links.len())).collect()
    }

    /// Soft-bound findings for every junction.
    pub fn warnings(&self, params: &LifParams) -> Vec<ParamWarning> {
        self.elec_pairs.iter().filter_map(|p| params.gap_warning(p.g)).collect()
    }
}

/// Threshold crossing emitted by a neuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputSpike {
    pub neuron: usize,
    /// Index of the step `(t_step, t_step + dt]` in which the crossing happened.
    pub step: usize,
    /// Step end time (ms).
    pub t: f64,
}

/// Per-step network input.
#[derive(Debug, Clone, Copy)]
pub struct NetworkInput<'a> {
    /// For each neuron, impulses per upstream link.
    pub spikes: &'a [Vec<u32>],
    /// External current per neuron.
    pub drives: &'a [f64],
}

/// Synchronously advance every neuron; neighbour potentials are read at the
/// start of the step.
pub fn step_network(
    states: &[NeuronState],
    topology: &NetworkTopology,
    params: &LifParams,
    input: &NetworkInput<'_>,
    step: usize,
    dt: f64,
) -> Result<(Vec<NeuronState>, Vec<OutputSpike>), LifError> {
    let n = topology.neuron_count();
    if states.len() != n || input.spikes.len() != n || input.drives.len() != n {
        return Err(LifError::Shape(format!(
            "expected {n} neurons, got {} states, {} spike rows, {} drives",
            states.len(),
            input.spikes.len(),
            input.drives.len()
        )));
    }
    let t = step as f64 * dt;
    let mut next = Vec::with_capacity(n);
    let mut events = Vec::new();
    let mut partners = Vec::new();
    for (i, state) in states.iter().enumerate() {
        partners.clear();
        partners.extend(topology.neighbors(i).iter().map(|&(k, g)| (states[k].v, g)));
        let outcome = step_neuron(
            state,
            params,
            &NeuronInput { drive: input.drives[i], neighbors: &partners, spikes: &input.spikes[i] },
            StepClock { neuron: i, t, dt },
        )?;
        if outcome.fired() {
            events.push(OutputSpike { neuron: i, step, t: t + dt });
        }
        next.push(outcome.state);
    }
    Ok((next, events))
}

/// Recorded run: samples at `t = 0, dt, …, steps·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dt: f64,
    neuron_count: usize,
    link_counts: Vec<usize>,
    link_total: usize,
    v: Vec<f64>,
    gs: Vec<f64>,
    fired: Vec<bool>,
    events: Vec<OutputSpike>,
}

impl Trajectory {
    fn start(dt: f64, states: &[NeuronState]) -> Self {
        let link_counts: Vec<usize> = states.iter().map(|s| s.gs.len()).collect();
        let link_total = link_counts.iter().sum();
        let mut traj = Self {
            dt,
            neuron_count: states.len(),
            link_counts,
            link_total,
            v: Vec::new(),
            gs: Vec::new(),
            fired: Vec::new(),
            events: Vec::new(),
        };
        traj.push(states, &[]);
        traj
    }

    fn push(&mut self, states: &[NeuronState], events: &[OutputSpike]) {
        self.v.extend(states.iter().map(|s| s.v));
        self.gs.extend(states.iter().flat_map(|s| s.gs.iter().copied()));
        let row = self.fired.len();
        self.fired.resize(row + self.neuron_count, false);
        for e in events {
            self.fired[row + e.neuron] = true;
        }
        self.events.extend_from_slice(events);
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn neuron_count(&self) -> usize {
        self.neuron_count
    }

    pub fn link_counts(&self) -> &[usize] {
        &self.link_counts
    }

    /// Number of recorded samples (steps + 1).
    pub fn samples(&self) -> usize {
        self.v.len() / self.neuron_count.max(1)
    }

    pub fn steps(&self) -> usize {
        self.samples().saturating_sub(1)
    }

    pub fn duration(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn time(&self, sample: usize) -> f64 {
        sample as f64 * self.dt
    }

    pub fn potential(&self, sample: usize, neuron: usize) -> f64 {
        self.v[sample * self.neuron_count + neuron]
    }

    /// Membrane potential series of one neuron.
    pub fn potentials(&self, neuron: usize) -> impl Iterator<Item = f64> + '_ {
        self.v.iter().skip(neuron).step_by(self.neuron_count).copied()
    }

    /// All link conductances at `sample`, neuron-major.
    pub fn conductances(&self, sample: usize) -> &[f64] {
        &self.gs[sample * self.link_total..(sample + 1) * self.link_total]
    }

    /// Whether `neuron` crossed threshold in the step ending at `sample`.
    pub fn fired(&self, sample: usize, neuron: usize) -> bool {
        self.fired[sample * self.neuron_count + neuron]
    }

    pub fn events(&self) -> &[OutputSpike] {
        &self.events
    }

    /// Steps per window, requiring the window to be a whole number of steps.
    pub fn window_steps(&self, window: f64) -> Result<usize, LifError> {
        if !(window > 0.0) || !window.is_finite() {
            return Err(LifError::Window(format!("window must be > 0, got {window}")));
        }
        let ratio = window / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) || steps < 1.0 {
            return Err(LifError::Window(format!("window {window} ms is not a whole number of {} ms steps", self.dt)));
        }
        Ok(steps as usize)
    }
}

/// A run that stopped early; `trajectory` holds everything up to the failure.
#[derive(Debug, Error)]
#[error("simulation stopped after {} steps: {error}", trajectory.steps())]
pub struct DivergedRun {
    pub trajectory: Trajectory,
    #[source]
    pub error: LifError,
}

/// Integrate a network driven by spike trains and constant per-neuron drives.
///
/// Impulse times are rounded down to the step grid.
#[allow(clippy::result_large_err)]
pub fn simulate(
    topology: &NetworkTopology,
    params: &LifParams,
    trains: &[SpikeTrain],
    drives: &[f64],
    dt: f64,
    t_end: f64,
) -> Result<Trajectory, DivergedRun> {
    let initial = topology.initial_states(params);
    let fail = |error| DivergedRun { trajectory: Trajectory::start(dt, &initial), error };
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(fail(LifError::Shape(format!("need dt > 0 and t_end > 0, got {dt}, {t_end}"))));
    }
    if drives.len() != topology.neuron_count() {
        return Err(fail(LifError::Shape(format!("{} drives for {} neurons", drives.len(), topology.neuron_count()))));
    }
    let steps = (t_end / dt).round() as usize;

    // Per-train list of step indices, ascending.
    let index: HashMap<u64, usize> = trains.iter().enumerate().map(|(i, tr)| (tr.link_id, i)).collect();
    let mut route = Vec::with_capacity(topology.neuron_count());
    for n in 0..topology.neuron_count() {
        let mut links = Vec::new();
        for link in topology.upstream_links(n) {
            match index.get(&link.train) {
                Some(&i) => links.push(i),
                None => return Err(fail(LifError::UnknownTrain(link.train))),
            }
        }
        route.push(links);
    }
    let arrivals: Vec<Vec<usize>> =
        trains.iter().map(|tr| tr.times.iter().map(|&t| (t / dt).floor() as usize).collect()).collect();
    let mut cursors = vec![0usize; trains.len()];
    let mut counts = vec![0u32; trains.len()];
    let mut spikes: Vec<Vec<u32>> = route.iter().map(|l| vec![0; l.len()]).collect();

    let mut states = initial;
    let mut traj = Trajectory::start(dt, &states);
    for step in 0..steps {
        for (i, steps_of) in arrivals.iter().enumerate() {
            let mut c = 0;
            while cursors[i] < steps_of.len() && steps_of[cursors[i]] <= step {
                if steps_of[cursors[i]] == step {
                    c += 1;
                }
                cursors[i] += 1;
            }
            counts[i] = c;
        }
        for (row, links) in spikes.iter_mut().zip(&route) {
            for (slot, &i) in row.iter_mut().zip(links) {
                *slot = counts[i];
            }
        }
        let input = NetworkInput { spikes: &spikes, drives };
        match step_network(&states, topology, params, &input, step, dt) {
            Ok((next, events)) => {
                traj.push(&next, &events);
                states = next;
            }
            Err(error) => return Err(DivergedRun { trajectory: traj, error }),
        }
    }
    Ok(traj)
}

/// Fraction of consecutive non-overlapping windows in which `neuron` crossed
/// threshold at least once. Windows must be a whole number of steps; a
/// trailing partial window is ignored.
pub fn measure_firing_probability(trajectory: &Trajectory, window: f64, neuron: usize) -> Result<f64, LifError> {
    if trajectory.steps() == 0 {
        return Err(LifError::EmptyTrajectory);
    }
    if neuron >= trajectory.neuron_count() {
        return Err(LifError::Shape(format!(
            "neuron {neuron} not in trajectory of {} neurons",
            trajectory.neuron_count()
        )));
    }
    let per_window = trajectory.window_steps(window)?;
    let windows = trajectory.steps() / per_window;
    if windows == 0 {
        return Err(LifError::Window(format!(
            "trajectory of {} ms is shorter than the {window} ms window",
            trajectory.duration()
        )));
    }
    let mut hit = vec![false; windows];
    for e in trajectory.events().iter().filter(|e| e.neuron == neuron) {
        let w = e.step / per_window;
        if w < windows {
            hit[w] = true;
        }
    }
    Ok(hit.iter().filter(|&&h| h).count() as f64 / windows as f64)
}
