// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Scenario execution and artifact emission.
//!
//! Files written to the run directory:
//!
//! - `trace.csv`: `t_ms, v_<n>…, gs_<n>_<j>…, spike_<n>…`, one row per sample
//! - `quantum.csv`: per window, `|a_k|²`, `|b_l|²` and both measurement histograms
//! - `calibration.csv`: `key,value` report (calibrate only)
//! - `spikes.csv`: generated trains when `output.spikes` is set
//! - `meta.toml`: config hash, seed, versions, parameters, warnings, wall clock
//! - `error.txt`: present only when the run stopped early
//!
//! Every float is written in shortest round-trip form, and nothing except
//! `meta.toml` depends on the wall clock.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use qsynapse_core::calibration::{calibrate, CalibrationReport, CalibrationSetup};
use qsynapse_core::lif::{measure_firing_probability, simulate, LifParams, Trajectory};
use qsynapse_core::quantum::{measure, QuantumState};
use qsynapse_core::rng::derive_seed;
use qsynapse_core::spike::{generate_poisson, write_trains_csv, SpikeTrain};
use qsynapse_core::synapse::{prepare_upstream, run_circuit, SynapseCircuit, SynapseError};

use crate::config::Scenario;

/// Bumped whenever the column layout of `trace.csv` changes.
pub const TRACE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Runtime(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub calibrate: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    pub calibration: Option<CalibrationReport>,
}

struct Emitter<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Emitter<'_> {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>, RunError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|source| RunError::Io { path, source })?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(file))
    }

    fn io(&self, name: &str) -> impl Fn(std::io::Error) -> RunError {
        let path = self.dir.join(name);
        move |source| RunError::Io { path: path.clone(), source }
    }

    fn csv(&self, name: &str) -> impl Fn(csv::Error) -> RunError {
        let path = self.dir.join(name);
        move |e| RunError::Io { path: path.clone(), source: std::io::Error::other(e) }
    }
}

/// Seed index reserved for calibration sampling; windows use `1 + 2w` and `2 + 2w`.
const CALIBRATION_SEED_INDEX: u64 = 0;

pub fn generate_trains(scenario: &Scenario, seed: u64) -> Result<Vec<SpikeTrain>, RunError> {
    let horizon = scenario.config.simulation.t_end;
    scenario
        .profiles
        .iter()
        .map(|(id, profile)| {
            generate_poisson(profile, horizon, seed, *id)
                .map_err(|e| RunError::Runtime(format!("spike link {id}: {e}")))
        })
        .collect()
}

/// Run a validated scenario and write its artifacts into `out_dir`.
pub fn run_scenario(
    scenario: &Scenario,
    seed: u64,
    out_dir: &Path,
    options: RunOptions,
) -> Result<RunSummary, RunError> {
    if options.calibrate && scenario.config.calibration.is_none() {
        return Err(RunError::Runtime("scenario has no [calibration] section".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|source| RunError::Io { path: out_dir.into(), source })?;
    let mut out = Emitter { dir: out_dir, files: Vec::new() };
    let mut warnings = scenario.warnings.clone();
    let sim = &scenario.config.simulation;
    let output = &scenario.config.output;

    let trains = generate_trains(scenario, seed)?;
    if output.spikes {
        let w = out.create("spikes.csv")?;
        write_trains_csv(&trains, w).map_err(|e| RunError::Runtime(format!("spikes.csv: {e}")))?;
    }
    let (trajectory, failure) =
        match simulate(&scenario.topology, &scenario.params, &trains, &scenario.drives, sim.dt, sim.t_end) {
            Ok(t) => (t, None),
            Err(run) => (run.trajectory, Some(run.error.to_string())),
        };
    if output.trace {
        write_trace(&mut out, &trajectory)?;
    }

    let mut calibration = None;
    let mut failure = failure;
    if failure.is_none() {
        if let Some(circuit) = &scenario.circuit {
            if output.quantum {
                if let Err(e) = write_quantum(&mut out, scenario, circuit, &trajectory, seed, &mut warnings) {
                    match e {
                        QuantumFailure::Io(e) => return Err(e),
                        QuantumFailure::Synapse(e) => failure = Some(format!("quantum circuit: {e}")),
                    }
                }
            }
            if options.calibrate && failure.is_none() {
                let report = run_calibration(scenario, circuit, &trajectory, seed)
                    .map_err(|e| RunError::Runtime(format!("calibration: {e}")))?;
                warnings.extend(report.warnings.iter().cloned());
                if output.calibration {
                    let mut w = out.create("calibration.csv")?;
                    report.write_csv(&mut w).map_err(out.io("calibration.csv"))?;
                    w.flush().map_err(out.io("calibration.csv"))?;
                }
                calibration = Some(report);
            }
        }
    }

    if let Some(message) = &failure {
        let mut w = out.create("error.txt")?;
        writeln!(w, "{message}").map_err(out.io("error.txt"))?;
        w.flush().map_err(out.io("error.txt"))?;
    }
    write_meta(&mut out, scenario, seed, &warnings, failure.as_deref())?;
    match failure {
        Some(message) => Err(RunError::Runtime(message)),
        None => Ok(RunSummary { out_dir: out_dir.into(), seed, files: out.files, warnings, calibration }),
    }
}

/// Calibration report for one seed without writing any files.
pub fn calibration_only(scenario: &Scenario, seed: u64) -> Result<CalibrationReport, RunError> {
    let circuit =
        scenario.circuit.as_ref().ok_or_else(|| RunError::Runtime("scenario has no [quantum] section".into()))?;
    let sim = &scenario.config.simulation;
    let trains = generate_trains(scenario, seed)?;
    let trajectory = simulate(&scenario.topology, &scenario.params, &trains, &scenario.drives, sim.dt, sim.t_end)
        .map_err(|e| RunError::Runtime(e.to_string()))?;
    run_calibration(scenario, circuit, &trajectory, seed).map_err(|e| RunError::Runtime(format!("calibration: {e}")))
}

fn run_calibration(
    scenario: &Scenario,
    circuit: &SynapseCircuit,
    trajectory: &Trajectory,
    seed: u64,
) -> Result<CalibrationReport, qsynapse_core::calibration::CalibrationError> {
    let cal = scenario.config.calibration.as_ref().expect("checked by caller");
    let q = scenario.config.quantum.as_ref().expect("circuit implies quantum section");
    let mut setup =
        CalibrationSetup::new(q.up_neurons.clone(), cal.window, cal.shots, derive_seed(seed, CALIBRATION_SEED_INDEX));
    setup.gate_neuron = q.gate_neuron;
    setup.post_neuron = q.post_neuron;
    setup.phases = q.phases.clone();
    setup.epsilon = cal.epsilon;
    calibrate(trajectory, circuit, &scenario.params, &setup)
}

fn write_trace(out: &mut Emitter<'_>, traj: &Trajectory) -> Result<(), RunError> {
    let name = "trace.csv";
    let err = out.csv(name);
    let mut w = csv::Writer::from_writer(out.create(name)?);
    let n = traj.neuron_count();
    let mut header = vec!["t_ms".to_string()];
    header.extend((0..n).map(|i| format!("v_{i}")));
    for (i, &links) in traj.link_counts().iter().enumerate() {
        header.extend((0..links).map(|j| format!("gs_{i}_{j}")));
    }
    header.extend((0..n).map(|i| format!("spike_{i}")));
    w.write_record(&header).map_err(&err)?;
    let mut row = Vec::with_capacity(header.len());
    for s in 0..traj.samples() {
        row.clear();
        row.push(traj.time(s).to_string());
        row.extend((0..n).map(|i| traj.potential(s, i).to_string()));
        row.extend(traj.conductances(s).iter().map(|g| g.to_string()));
        row.extend((0..n).map(|i| (traj.fired(s, i) as u8).to_string()));
        w.write_record(&row).map_err(&err)?;
    }
    w.flush().map_err(out.io(name))
}

enum QuantumFailure {
    Io(RunError),
    Synapse(SynapseError),
}

impl From<RunError> for QuantumFailure {
    fn from(e: RunError) -> Self {
        QuantumFailure::Io(e)
    }
}

fn potentials(
    traj: &Trajectory,
    neuron: Option<usize>,
    params: &LifParams,
    samples: std::ops::Range<usize>,
) -> Vec<f64> {
    samples.map(|s| neuron.map_or(params.v_rest, |n| traj.potential(s, n))).collect()
}

fn write_quantum(
    out: &mut Emitter<'_>,
    scenario: &Scenario,
    circuit: &SynapseCircuit,
    traj: &Trajectory,
    seed: u64,
    warnings: &mut Vec<String>,
) -> Result<(), QuantumFailure> {
    let q = scenario.config.quantum.as_ref().expect("circuit implies quantum section");
    let name = "quantum.csv";
    let err = out.csv(name);
    let mut w = csv::Writer::from_writer(out.create(name)?);
    let (up, down) = (circuit.up_dim, circuit.down_dim);
    let mut header = vec!["window".to_string(), "t_start_ms".into(), "t_end_ms".into()];
    header.extend((0..up).map(|k| format!("a2_{k}")));
    header.extend((0..down).map(|l| format!("b2_{l}")));
    header.extend((0..up).map(|k| format!("up_count_{k}")));
    header.extend((0..down).map(|l| format!("down_count_{l}")));
    w.write_record(&header).map_err(&err)?;

    let per_window = traj.window_steps(q.window).map_err(|e| RunError::Runtime(e.to_string()))?;
    let windows = traj.steps() / per_window;
    if windows == 0 {
        warnings.push(format!("run shorter than one {} ms quantum window", q.window));
        return Ok(w.flush().map_err(out.io(name))?);
    }
    let probabilities = q
        .up_neurons
        .iter()
        .map(|&n| measure_firing_probability(traj, q.window, n))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| RunError::Runtime(e.to_string()))?;
    let (psi_up, prep_warnings) = match prepare_upstream(circuit, &probabilities, q.phases.as_deref()) {
        Ok(x) => x,
        Err(e @ (SynapseError::DegenerateEncoding | SynapseError::AllBlocked)) => {
            warnings.push(format!("quantum.csv left empty: {e}"));
            return Ok(w.flush().map_err(out.io(name))?);
        }
        Err(e) => return Err(QuantumFailure::Synapse(e)),
    };
    warnings.extend(prep_warnings);

    let mut psi_down = QuantumState::basis(down, 0).map_err(|e| QuantumFailure::Synapse(e.into()))?;
    let mut row = Vec::with_capacity(header.len());
    for win in 0..windows {
        let samples = win * per_window + 1..(win + 1) * per_window + 1;
        let pre = potentials(traj, q.gate_neuron, &scenario.params, samples.clone());
        let post = potentials(traj, q.post_neuron, &scenario.params, samples);
        let run = run_circuit(circuit, &psi_up, &psi_down, &pre, &post, &scenario.params, traj.dt())
            .map_err(QuantumFailure::Synapse)?;
        let up_out = run.up_states.last().cloned().unwrap_or_else(|| psi_up.clone());
        psi_down = run.down_states.last().cloned().unwrap_or(psi_down);
        let index = win as u64;
        let up_hist = measure(&up_out, q.shots, derive_seed(seed, 1 + 2 * index));
        let down_hist = measure(&psi_down, q.shots, derive_seed(seed, 2 + 2 * index));

        row.clear();
        row.push(win.to_string());
        row.push(traj.time(win * per_window).to_string());
        row.push(traj.time((win + 1) * per_window).to_string());
        row.extend(up_out.probabilities().iter().map(|p| p.to_string()));
        row.extend(psi_down.probabilities().iter().map(|p| p.to_string()));
        row.extend(up_hist.counts.iter().map(|c| c.to_string()));
        row.extend(down_hist.counts.iter().map(|c| c.to_string()));
        w.write_record(&row).map_err(&err)?;
    }
    Ok(w.flush().map_err(out.io(name))?)
}

#[derive(Serialize)]
struct Meta<'a> {
    software_version: &'a str,
    trace_format_version: u32,
    config_sha256: String,
    seed: u64,
    config_seed: u64,
    created_unix_s: u64,
    status: &'a str,
    error: Option<&'a str>,
    warnings: &'a [String],
    simulation: MetaSimulation,
    lif: MetaLif,
}

#[derive(Serialize)]
struct MetaSimulation {
    dt: f64,
    t_end: f64,
    neurons: usize,
}

#[derive(Serialize)]
struct MetaLif {
    cm: f64,
    g_leak: f64,
    v_rest: f64,
    v_thres: f64,
    v_init: f64,
    e_syn: f64,
    tau_syn: f64,
    gs_max: f64,
    g_elec: f64,
    spike_jump: f64,
    delta_g: f64,
    g_elec_warn_max: f64,
    integrator: String,
    input_mode: String,
}

impl From<&LifParams> for MetaLif {
    fn from(p: &LifParams) -> Self {
        Self {
            cm: p.cm,
            g_leak: p.g_leak,
            v_rest: p.v_rest,
            v_thres: p.v_thres,
            v_init: p.v_init,
            e_syn: p.e_syn,
            tau_syn: p.tau_syn,
            gs_max: p.gs_max,
            g_elec: p.g_elec,
            spike_jump: p.spike_jump,
            delta_g: p.delta_g,
            g_elec_warn_max: p.g_elec_warn_max,
            integrator: format!("{:?}", p.integrator).to_lowercase(),
            input_mode: format!("{:?}", p.input_mode).to_lowercase(),
        }
    }
}

pub fn config_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_meta(
    out: &mut Emitter<'_>,
    scenario: &Scenario,
    seed: u64,
    warnings: &[String],
    error: Option<&str>,
) -> Result<(), RunError> {
    let sim = &scenario.config.simulation;
    let meta = Meta {
        software_version: env!("CARGO_PKG_VERSION"),
        trace_format_version: TRACE_FORMAT_VERSION,
        config_sha256: config_digest(&scenario.source),
        seed,
        config_seed: sim.seed,
        created_unix_s: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        status: if error.is_some() { "failed" } else { "ok" },
        error,
        warnings,
        simulation: MetaSimulation { dt: sim.dt, t_end: sim.t_end, neurons: scenario.topology.neuron_count() },
        lif: MetaLif::from(&scenario.params),
    };
    let text = toml::to_string(&meta).map_err(|e| RunError::Runtime(format!("meta.toml: {e}")))?;
    let mut w = out.create("meta.toml")?;
    w.write_all(text.as_bytes()).map_err(out.io("meta.toml"))?;
    w.flush().map_err(out.io("meta.toml"))
}
