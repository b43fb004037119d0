// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Synthetic sensor-fusion demo.
//!
//! Each sensor `k` detects a true event with probability `p_k`. A detection
//! raises the presynaptic spike rate of sensor neuron `k` for that event's
//! window. Estimated firing probabilities feed `ψ_UP`; the coupling
//! `W = diag(√w_k)` weights the downstream drive, and `ψ_DOWN` is relaxed at
//! rest potential until it points along `W·ψ_UP`, so its measurement
//! frequencies estimate `w_k·p_k / Σ_j w_j·p_j`.

use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use qsynapse_core::calibration::tv_distance;
use qsynapse_core::lif::{measure_firing_probability, simulate, LifParams, NetworkTopology, UpstreamLink};
use qsynapse_core::quantum::{measure, Complex64, QuantumState};
use qsynapse_core::rng::{derive_seed, open_unit, stream_rng, streams};
use qsynapse_core::spike::{generate_poisson, RateProfile, RateSegment};
use qsynapse_core::synapse::{prepare_upstream, run_circuit, Coupling, SynapseCircuit};

use crate::config::ConfigError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionFile {
    pub fusion: FusionScenario,
    pub sensors: Vec<Sensor>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Sensor {
    /// Probability of detecting a true event.
    pub detection: f64,
    /// Reliability weight.
    pub weight: f64,
    #[serde(default)]
    pub shutdown: bool,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FusionScenario {
    pub seed: u64,
    /// Number of event windows; ignored when `truth` is given.
    #[serde(default = "default_events")]
    pub events: usize,
    /// Explicit event truth sequence.
    pub truth: Option<Vec<bool>>,
    #[serde(default = "half")]
    pub truth_probability: f64,
    #[serde(default = "default_event_ms")]
    pub event_ms: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Spikes/ms while a sensor reports a detection.
    #[serde(default = "default_rate_on")]
    pub rate_on: f64,
    /// Spikes/ms otherwise.
    #[serde(default)]
    pub rate_off: f64,
    /// Membrane jump per impulse; large enough that every impulse fires.
    #[serde(default = "default_jump")]
    pub spike_jump: f64,
    #[serde(default = "default_shots")]
    pub shots: u64,
    /// Downstream relaxation steps and step size.
    #[serde(default = "default_settle_steps")]
    pub settle_steps: usize,
    #[serde(default = "default_settle_dt")]
    pub settle_dt: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_events() -> usize {
    20_000
}
fn half() -> f64 {
    0.5
}
fn default_event_ms() -> f64 {
    5.0
}
fn default_dt() -> f64 {
    0.5
}
fn default_rate_on() -> f64 {
    2.0
}
fn default_jump() -> f64 {
    30.0
}
fn default_shots() -> u64 {
    100_000
}
fn default_settle_steps() -> usize {
    600
}
fn default_settle_dt() -> f64 {
    0.1
}
fn default_epsilon() -> f64 {
    0.03
}

impl FusionFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let file: FusionFile = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let f = &self.fusion;
        if self.sensors.len() < 2 {
            return bad("fusion needs at least 2 sensors".into());
        }
        for (k, s) in self.sensors.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.detection) {
                return bad(format!("sensor {k}: detection {} outside [0, 1]", s.detection));
            }
            if !(s.weight.is_finite() && s.weight >= 0.0) {
                return bad(format!("sensor {k}: weight must be finite and ≥ 0"));
            }
        }
        if self.sensors.iter().all(|s| s.shutdown) {
            return bad("every sensor is shut down".into());
        }
        if f.truth.as_ref().map_or(f.events, Vec::len) == 0 {
            return bad("fusion needs at least one event".into());
        }
        if !(0.0..=1.0).contains(&f.truth_probability) {
            return bad("truth_probability outside [0, 1]".into());
        }
        for (name, v) in [("event_ms", f.event_ms), ("dt", f.dt), ("settle_dt", f.settle_dt), ("epsilon", f.epsilon)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be > 0"));
            }
        }
        for (name, v) in [("rate_on", f.rate_on), ("rate_off", f.rate_off)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be ≥ 0"));
            }
        }
        let ratio = f.event_ms / f.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return bad("event_ms must be a whole number of dt steps".into());
        }
        if f.shots == 0 || f.settle_steps == 0 {
            return bad("shots and settle_steps must be ≥ 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionReport {
    pub sensors: Vec<Sensor>,
    pub true_events: usize,
    pub events: usize,
    /// Fraction of event windows in which each sensor neuron fired.
    pub estimated: Vec<f64>,
    pub reference: Vec<f64>,
    pub fused: Vec<f64>,
    pub tv_distance: f64,
    pub shots: u64,
    pub epsilon: f64,
    pub pass: bool,
    pub failure: Option<String>,
}

impl FusionReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "sensor,detection,weight,shutdown,estimated_firing,reference,fused")?;
        for k in 0..self.sensors.len() {
            let s = &self.sensors[k];
            writeln!(
                out,
                "{k},{},{},{},{},{},{}",
                s.detection, s.weight, s.shutdown, self.estimated[k], self.reference[k], self.fused[k]
            )?;
        }
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "key,value")?;
        writeln!(out, "events,{}", self.events)?;
        writeln!(out, "true_events,{}", self.true_events)?;
        writeln!(out, "tv_distance,{}", self.tv_distance)?;
        writeln!(out, "shots,{}", self.shots)?;
        writeln!(out, "epsilon,{}", self.epsilon)?;
        writeln!(out, "pass,{}", self.pass)?;
        if let Some(f) = &self.failure {
            writeln!(out, "failure,\"{}\"", f.replace('"', "\"\""))?;
        }
        Ok(())
    }
}

/// `w_k·p_k / Σ_j w_j·p_j` over active sensors; shut sensors get 0.
pub fn reference_combiner(sensors: &[Sensor]) -> Option<Vec<f64>> {
    let products: Vec<f64> = sensors.iter().map(|s| if s.shutdown { 0.0 } else { s.weight * s.detection }).collect();
    let total: f64 = products.iter().sum();
    (total > 0.0).then(|| products.iter().map(|x| x / total).collect())
}

/// Per-sensor piecewise rate profiles from the detection draws.
fn detection_profiles(file: &FusionFile, seed: u64) -> (Vec<RateProfile>, usize, usize) {
    let f = &file.fusion;
    let mut rng = stream_rng(seed, streams::DETECTION);
    let events = f.truth.as_ref().map_or(f.events, Vec::len);
    let mut segments: Vec<Vec<RateSegment>> = vec![Vec::new(); file.sensors.len()];
    let mut true_events = 0;
    for e in 0..events {
        let truth = match &f.truth {
            Some(t) => t[e],
            None => open_unit(&mut rng) < f.truth_probability,
        };
        true_events += truth as usize;
        let start = e as f64 * f.event_ms;
        let end = (e + 1) as f64 * f.event_ms;
        for (k, sensor) in file.sensors.iter().enumerate() {
            // Always draw so sensor streams stay aligned across truth values.
            let detected = open_unit(&mut rng) < sensor.detection && truth;
            if !detected {
                continue;
            }
            match segments[k].last_mut() {
                Some(last) if last.end == start => last.end = end,
                _ => segments[k].push(RateSegment { start, end, rate: f.rate_on }),
            }
        }
    }
    let profiles =
        segments.into_iter().map(|segments| RateProfile::Piecewise { base_rate: f.rate_off, segments }).collect();
    (profiles, events, true_events)
}

pub fn run_fusion_demo(file: &FusionFile, seed: u64) -> Result<FusionReport, String> {
    file.validate().map_err(|e| e.to_string())?;
    let f = &file.fusion;
    let k = file.sensors.len();
    let (profiles, events, true_events) = detection_profiles(file, seed);
    let horizon = events as f64 * f.event_ms;
    let trains = profiles
        .iter()
        .enumerate()
        .map(|(link, p)| generate_poisson(p, horizon, seed, link as u64))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;

    let mut params = LifParams::default();
    params.spike_jump = f.spike_jump;
    params.delta_g = 0.0;
    let topology = NetworkTopology::new((0..k as u64).map(|train| vec![UpstreamLink { train }]).collect(), vec![])
        .map_err(|e| e.to_string())?;
    let traj = simulate(&topology, &params, &trains, &vec![0.0; k], f.dt, horizon).map_err(|e| e.to_string())?;
    let estimated = (0..k)
        .map(|n| measure_firing_probability(&traj, f.event_ms, n))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;

    let mut report = FusionReport {
        sensors: file.sensors.clone(),
        true_events,
        events,
        estimated: estimated.clone(),
        reference: reference_combiner(&file.sensors).unwrap_or_else(|| vec![0.0; k]),
        fused: vec![0.0; k],
        tv_distance: 1.0,
        shots: f.shots,
        epsilon: f.epsilon,
        pass: false,
        failure: None,
    };
    if reference_combiner(&file.sensors).is_none() {
        report.failure = Some("every active sensor has zero weight or detection probability".into());
        return Ok(report);
    }

    let mut circuit = SynapseCircuit::unidirectional(k, k).map_err(|e| e.to_string())?;
    let roots: Vec<Complex64> = file.sensors.iter().map(|s| Complex64::new(s.weight.sqrt(), 0.0)).collect();
    circuit.coupling = Some(Coupling::diagonal(&roots));
    circuit.shutdown = file.sensors.iter().enumerate().filter(|(_, s)| s.shutdown).map(|(i, _)| i).collect();
    let psi_up = match prepare_upstream(&circuit, &estimated, None) {
        Ok((s, _)) => s,
        Err(e) => {
            report.failure = Some(e.to_string());
            return Ok(report);
        }
    };
    let active: Vec<Complex64> =
        file.sensors.iter().map(|s| Complex64::new(if s.shutdown { 0.0 } else { 1.0 }, 0.0)).collect();
    let psi_down0 = QuantumState::normalized(active, "fusion start").map_err(|e| e.to_string())?;
    let rest = vec![params.v_rest; f.settle_steps];
    let run = match run_circuit(&circuit, &psi_up, &psi_down0, &rest, &rest, &params, f.settle_dt) {
        Ok(run) => run,
        Err(e) => {
            report.failure = Some(e.to_string());
            return Ok(report);
        }
    };
    let fused_state = run.down_states.last().cloned().unwrap_or(psi_down0);
    report.fused = measure(&fused_state, f.shots, derive_seed(seed, 1)).frequencies();
    report.tv_distance = tv_distance(&report.reference, &report.fused);
    report.pass = report.tv_distance < f.epsilon;
    Ok(report)
}
