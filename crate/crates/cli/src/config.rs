// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Scenario files (TOML). Every table rejects unknown keys; file paths are
//! resolved against the directory holding the scenario.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use qsynapse_core::lif::{GapJunction, InputMode, Integrator, LifParams, NetworkTopology, UpstreamLink};
use qsynapse_core::quantum::{parse_matrix, parse_rect_matrix, Complex64, Operator, OperatorKind};
use qsynapse_core::spike::{RateProfile, RateSegment};
use qsynapse_core::synapse::{ColorTable, Coupling, Mode, SynapseCircuit, TagSetup};

/// Fallback spike rate (spikes/ms) for links without an explicit one.
pub const DEFAULT_RATE: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Syntax(String),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub simulation: SimulationSection,
    #[serde(default)]
    pub lif: LifSection,
    pub topology: TopologySection,
    #[serde(default)]
    pub spikes: SpikeSection,
    pub quantum: Option<QuantumSection>,
    pub calibration: Option<CalibrationSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorName {
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum InputModeName {
    Standard,
    LiteralSum,
}

/// Overrides for [`LifParams`]; absent keys keep the defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifSection {
    pub cm: Option<f64>,
    pub g_leak: Option<f64>,
    pub v_rest: Option<f64>,
    pub v_thres: Option<f64>,
    pub v_init: Option<f64>,
    pub e_syn: Option<f64>,
    pub tau_syn: Option<f64>,
    pub gs_max: Option<f64>,
    pub g_elec: Option<f64>,
    pub spike_jump: Option<f64>,
    pub delta_g: Option<f64>,
    pub g_elec_warn_max: Option<f64>,
    pub integrator: Option<IntegratorName>,
    pub input_mode: Option<InputModeName>,
}

impl LifSection {
    pub fn params(&self) -> LifParams {
        let mut p = LifParams::default();
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.cm, self.cm);
        set(&mut p.g_leak, self.g_leak);
        set(&mut p.v_rest, self.v_rest);
        set(&mut p.v_thres, self.v_thres);
        set(&mut p.v_init, self.v_init);
        set(&mut p.e_syn, self.e_syn);
        set(&mut p.tau_syn, self.tau_syn);
        set(&mut p.gs_max, self.gs_max);
        set(&mut p.g_elec, self.g_elec);
        set(&mut p.spike_jump, self.spike_jump);
        set(&mut p.delta_g, self.delta_g);
        set(&mut p.g_elec_warn_max, self.g_elec_warn_max);
        if let Some(i) = self.integrator {
            p.integrator = match i {
                IntegratorName::Rk4 => Integrator::Rk4,
                IntegratorName::Euler => Integrator::Euler,
            };
        }
        if let Some(m) = self.input_mode {
            p.input_mode = match m {
                InputModeName::Standard => InputMode::Standard,
                InputModeName::LiteralSum => InputMode::LiteralSum,
            };
        }
        p
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    /// Spike-train link ids feeding each neuron.
    pub upstream: Vec<Vec<u64>>,
    /// Constant external current per neuron; zeros when absent.
    pub drives: Option<Vec<f64>>,
    #[serde(default)]
    pub gap_junctions: Vec<JunctionEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionEntry {
    pub a: usize,
    pub b: usize,
    /// Defaults to `lif.g_elec`.
    pub g: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpikeSection {
    /// Rate for links referenced by the topology but not listed below.
    pub default_rate: Option<f64>,
    #[serde(default)]
    pub links: Vec<LinkEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub id: u64,
    /// Constant rate, or the base rate outside `segments`.
    pub rate: f64,
    #[serde(default)]
    pub segments: Vec<SegmentEntry>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentEntry {
    pub start: f64,
    pub end: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Unidirectional,
    Bidirectional,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Hermitian,
    Unitary,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumSection {
    pub mode: ModeName,
    /// Presynaptic neuron behind each upstream link.
    pub up_neurons: Vec<usize>,
    /// Downstream link count; defaults to the upstream count.
    pub down_links: Option<usize>,
    pub gate_neuron: Option<usize>,
    pub gate_pair: Option<[usize; 2]>,
    pub post_neuron: Option<usize>,
    #[serde(default = "one")]
    pub drive_scale: f64,
    /// `"zero"`, `"identity"` or a matrix file.
    #[serde(default = "zero_k")]
    pub k: String,
    pub k_kind: Option<KindName>,
    /// Rectangular matrix file for W; identity when absent.
    pub coupling: Option<PathBuf>,
    /// `[re, im]` per downstream link.
    pub b_weights: Option<Vec<[f64; 2]>>,
    /// Alternative to `b_weights`: postsynaptic probabilities to encode.
    pub b_probabilities: Option<Vec<f64>>,
    pub phases: Option<Vec<f64>>,
    /// Colour table file; the built-in table when absent.
    pub color_table: Option<PathBuf>,
    pub up_tags: Option<Vec<String>>,
    pub down_tags: Option<Vec<String>>,
    #[serde(default)]
    pub blocked: Vec<String>,
    #[serde(default)]
    pub shutdown: Vec<usize>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    /// Length of each quantum.csv window (ms).
    pub window: f64,
    pub up_bounds: Option<[f64; 2]>,
    pub down_bounds: Option<[f64; 2]>,
}

fn one() -> f64 {
    1.0
}

fn zero_k() -> String {
    "zero".into()
}

fn default_shots() -> u64 {
    10_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    pub window: f64,
    #[serde(default = "calibration_shots")]
    pub shots: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn calibration_shots() -> u64 {
    100_000
}

fn default_epsilon() -> f64 {
    qsynapse_core::calibration::DEFAULT_EPSILON
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
    #[serde(default = "yes")]
    pub trace: bool,
    #[serde(default = "yes")]
    pub quantum: bool,
    #[serde(default = "yes")]
    pub calibration: bool,
    /// Also write the generated spike trains.
    #[serde(default)]
    pub spikes: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: None, trace: true, quantum: true, calibration: true, spikes: false }
    }
}

fn yes() -> bool {
    true
}

/// A scenario checked against every module invariant, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Raw file bytes, hashed into the run metadata.
    pub source: Vec<u8>,
    pub base_dir: PathBuf,
    pub params: LifParams,
    pub topology: NetworkTopology,
    pub drives: Vec<f64>,
    /// `(link id, profile)` in ascending id order.
    pub profiles: Vec<(u64, RateProfile)>,
    pub circuit: Option<SynapseCircuit>,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let source = std::fs::read(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_bytes(source, &base)
    }

    pub fn from_bytes(source: Vec<u8>, base_dir: &Path) -> Result<Self, ConfigError> {
        let text = std::str::from_utf8(&source).map_err(|e| ConfigError::Syntax(format!("not UTF-8: {e}")))?;
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        Self::build(config, source, base_dir)
    }

    pub fn seed(&self) -> u64 {
        self.config.simulation.seed
    }

    fn build(config: ScenarioConfig, source: Vec<u8>, base_dir: &Path) -> Result<Self, ConfigError> {
        let sim = &config.simulation;
        if !(sim.dt > 0.0 && sim.dt.is_finite()) {
            return Err(invalid(format!("simulation.dt must be > 0, got {}", sim.dt)));
        }
        if !(sim.t_end > 0.0 && sim.t_end.is_finite()) {
            return Err(invalid(format!("simulation.t_end must be > 0, got {}", sim.t_end)));
        }
        let steps = sim.t_end / sim.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(invalid("simulation.t_end must be a whole number of steps"));
        }

        let params = config.lif.params();
        let mut warnings: Vec<String> =
            params.validate().map_err(|e| invalid(format!("lif: {e}")))?.iter().map(|w| w.to_string()).collect();

        let topo = &config.topology;
        let upstream =
            topo.upstream.iter().map(|ids| ids.iter().map(|&train| UpstreamLink { train }).collect()).collect();
        let pairs = topo
            .gap_junctions
            .iter()
            .map(|j| GapJunction { a: j.a, b: j.b, g: j.g.unwrap_or(params.g_elec) })
            .collect();
        let topology = NetworkTopology::new(upstream, pairs).map_err(|e| invalid(format!("topology: {e}")))?;
        warnings.extend(topology.warnings(&params).iter().map(|w| w.to_string()));
        let neurons = topology.neuron_count();
        let drives = topo.drives.clone().unwrap_or_else(|| vec![0.0; neurons]);
        if drives.len() != neurons {
            return Err(invalid(format!("topology.drives has {} entries for {neurons} neurons", drives.len())));
        }
        if drives.iter().any(|d| !d.is_finite()) {
            return Err(invalid("topology.drives must be finite"));
        }

        let profiles = build_profiles(&config.spikes, &topology)?;
        let circuit = match &config.quantum {
            Some(q) => Some(build_circuit(q, neurons, base_dir, sim.dt)?),
            None => None,
        };
        if let Some(cal) = &config.calibration {
            if circuit.is_none() {
                return Err(invalid("calibration needs a [quantum] section"));
            }
            check_window("calibration.window", cal.window, sim.dt, sim.t_end)?;
            if cal.shots == 0 {
                return Err(invalid("calibration.shots must be ≥ 1"));
            }
            if !(cal.epsilon > 0.0) {
                return Err(invalid("calibration.epsilon must be > 0"));
            }
        }
        Ok(Self {
            config,
            source,
            base_dir: base_dir.to_path_buf(),
            params,
            topology,
            drives,
            profiles,
            circuit,
            warnings,
        })
    }
}

fn check_window(name: &str, window: f64, dt: f64, t_end: f64) -> Result<(), ConfigError> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(invalid(format!("{name} must be > 0, got {window}")));
    }
    let ratio = window / dt;
    if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
        return Err(invalid(format!("{name} = {window} is not a whole number of {dt} ms steps")));
    }
    if window > t_end {
        return Err(invalid(format!("{name} = {window} exceeds simulation.t_end")));
    }
    Ok(())
}

fn build_profiles(spikes: &SpikeSection, topology: &NetworkTopology) -> Result<Vec<(u64, RateProfile)>, ConfigError> {
    let mut ids = BTreeSet::new();
    for n in 0..topology.neuron_count() {
        ids.extend(topology.upstream_links(n).iter().map(|l| l.train));
    }
    let mut listed = BTreeSet::new();
    for link in &spikes.links {
        if !listed.insert(link.id) {
            return Err(invalid(format!("spikes.links lists id {} twice", link.id)));
        }
        if !ids.contains(&link.id) {
            return Err(invalid(format!("spikes.links id {} is not used by any neuron", link.id)));
        }
    }
    let default = spikes.default_rate.unwrap_or(DEFAULT_RATE);
    ids.into_iter()
        .map(|id| {
            let profile = match spikes.links.iter().find(|l| l.id == id) {
                None => RateProfile::Constant(default),
                Some(l) if l.segments.is_empty() => RateProfile::Constant(l.rate),
                Some(l) => RateProfile::Piecewise {
                    base_rate: l.rate,
                    segments: l
                        .segments
                        .iter()
                        .map(|s| RateSegment { start: s.start, end: s.end, rate: s.rate })
                        .collect(),
                },
            };
            profile.validate().map_err(|e| invalid(format!("spikes link {id}: {e}")))?;
            Ok((id, profile))
        })
        .collect()
}

fn read_file(base: &Path, path: &Path) -> Result<String, ConfigError> {
    let full = base.join(path);
    std::fs::read_to_string(&full).map_err(|source| ConfigError::Read { path: full, source })
}

fn build_circuit(q: &QuantumSection, neurons: usize, base: &Path, dt: f64) -> Result<SynapseCircuit, ConfigError> {
    let up = q.up_neurons.len();
    if up == 0 {
        return Err(invalid("quantum.up_neurons must name at least one neuron"));
    }
    let down = q.down_links.unwrap_or(up);
    for (name, n) in q.up_neurons.iter().map(|&n| ("up_neurons", n)).chain(
        [("gate_neuron", q.gate_neuron), ("post_neuron", q.post_neuron)]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k, v))),
    ) {
        if n >= neurons {
            return Err(invalid(format!("quantum.{name}: neuron {n} does not exist")));
        }
    }
    if q.gate_pair.is_some() != q.gate_neuron.is_some() {
        return Err(invalid("quantum.gate_pair and quantum.gate_neuron must be given together"));
    }
    if q.shots == 0 {
        return Err(invalid("quantum.shots must be ≥ 1"));
    }
    check_window("quantum.window", q.window, dt, f64::INFINITY)?;

    let mode = match q.mode {
        ModeName::Unidirectional => Mode::Unidirectional,
        ModeName::Bidirectional => Mode::Bidirectional,
    };
    let k = match q.k.as_str() {
        "zero" => Operator::zeros(down),
        "identity" => Operator::identity(down),
        path => {
            let kind = match q.k_kind {
                Some(KindName::Hermitian) => OperatorKind::Hermitian,
                Some(KindName::Unitary) => OperatorKind::Unitary,
                None => return Err(invalid("quantum.k_kind is required when K comes from a file")),
            };
            parse_matrix(&read_file(base, Path::new(path))?, kind).map_err(|e| invalid(format!("quantum.k: {e}")))?
        }
    };
    let quantum_err = |e: qsynapse_core::synapse::SynapseError| invalid(format!("quantum: {e}"));
    let mut circuit = SynapseCircuit {
        mode,
        up_dim: up,
        down_dim: down,
        k_operator: k,
        coupling: None,
        drive_scale: q.drive_scale,
        b_weights: vec![Complex64::new(0.0, 0.0); down],
        gate_pair: q.gate_pair.map(|[i, j]| (i, j)),
        shutdown: q.shutdown.iter().copied().collect(),
        tags: None,
        bounds: Default::default(),
    };
    circuit.bounds.up = q.up_bounds.map(|[a, b]| (a, b));
    circuit.bounds.down = q.down_bounds.map(|[a, b]| (a, b));
    if let Some(path) = &q.coupling {
        let (rows, cols, entries) =
            parse_rect_matrix(&read_file(base, path)?).map_err(|e| invalid(format!("quantum.coupling: {e}")))?;
        circuit.coupling = Some(Coupling::new(rows, cols, entries).map_err(quantum_err)?);
    }
    match (&q.b_weights, &q.b_probabilities) {
        (Some(_), Some(_)) => return Err(invalid("give quantum.b_weights or quantum.b_probabilities, not both")),
        (Some(b), None) => {
            if b.iter().flatten().any(|x| !x.is_finite()) {
                return Err(invalid("quantum.b_weights must be finite"));
            }
            circuit.b_weights = b.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        }
        (None, Some(p)) => {
            if p.len() != down {
                return Err(invalid(format!("quantum.b_probabilities has {} entries for {down} links", p.len())));
            }
            circuit.set_b_from_probabilities(p).map_err(quantum_err)?;
        }
        (None, None) => {}
    }
    if let Some(ph) = &q.phases {
        if ph.len() != up {
            return Err(invalid(format!("quantum.phases has {} entries for {up} links", ph.len())));
        }
    }
    let wants_tags = q.up_tags.is_some() || q.down_tags.is_some() || !q.blocked.is_empty();
    if wants_tags || q.color_table.is_some() {
        let table = match &q.color_table {
            Some(path) => ColorTable::parse(&read_file(base, path)?).map_err(quantum_err)?,
            None => ColorTable::default(),
        };
        let lookup = |names: &[String]| -> Result<Vec<_>, ConfigError> {
            names.iter().map(|n| table.tag(n).map_err(quantum_err)).collect()
        };
        let up_tags = match &q.up_tags {
            Some(names) => lookup(names)?,
            None => vec![table.identity(); up],
        };
        let down_tags = q.down_tags.as_deref().map(lookup).transpose()?;
        let blocked = lookup(&q.blocked)?.into_iter().collect();
        circuit.tags = Some(TagSetup { table, up_tags, down_tags, blocked });
    }
    circuit.validate().map_err(quantum_err)?;
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[simulation]\ndt = 0.1\nt_end = 10.0\nseed = 1\n[topology]\nupstream = [[]]\n";

    #[test]
    fn minimal_scenario_loads() {
        let s = Scenario::from_bytes(MINIMAL.as_bytes().to_vec(), Path::new(".")).unwrap();
        assert_eq!(s.topology.neuron_count(), 1);
        assert!(s.profiles.is_empty());
        assert!(s.circuit.is_none());
    }

    #[test]
    fn unknown_field_is_named() {
        let text = MINIMAL.replace("seed = 1", "seed = 1\nsped = 2");
        let err = Scenario::from_bytes(text.into_bytes(), Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("sped"), "{err}");
    }

    #[test]
    fn window_must_align() {
        let text = format!("{MINIMAL}[quantum]\nmode = \"unidirectional\"\nup_neurons = [0]\nwindow = 0.25\n");
        let err = Scenario::from_bytes(text.into_bytes(), Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("whole number"), "{err}");
    }

    #[test]
    fn unlisted_links_take_default_rate() {
        let text = MINIMAL.replace("upstream = [[]]", "upstream = [[3, 9]]")
            + "[spikes]\n[[spikes.links]]\nid = 9\nrate = 0.4\n";
        let s = Scenario::from_bytes(text.into_bytes(), Path::new(".")).unwrap();
        assert_eq!(s.profiles, vec![(3, RateProfile::Constant(DEFAULT_RATE)), (9, RateProfile::Constant(0.4))]);
    }
}
