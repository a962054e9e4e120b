//! Run configuration: a strict JSON file with SI units, and its translation
//! into domain objects.
//!
//! Keys carry their unit as a suffix (`_a`, `_f`, `_m`, `_m_s`, `_per_m`,
//! `_rad_s`, ...). Flux values are in flux quanta (`_quanta`). Unknown keys
//! are rejected with a suggestion for the closest valid key.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bias::{calibrate_broadening, BiasField, FluxPulse, PulseShape};
use crate::circuit::{cell_velocity, ArrayParams, Flux, JunctionParams, SquidParams};
use crate::geometry::calibrate_steepness;
use crate::lattice::{inject_sine, Boundary, Direction, LineModel, PacketSpec, SineDrive, SolverConfig};

/// The shipped defaults: the experimental-realization parameter set.
pub const DEFAULT_CONFIG: &str = include_str!("../config/defaults.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error at line {line}, column {column}{}: {message}", at_path(path))]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown key `{key}`{}{}", at_path(path), suggestion.as_ref().map(|s| format!("; did you mean `{s}`?")).unwrap_or_default())]
    UnknownKey {
        key: String,
        path: String,
        suggestion: Option<String>,
        line: usize,
        column: usize,
    },

    #[error("invalid value at `{path}`: {message}")]
    Invalid { path: String, message: String },

    #[error("parameter path `{path}` does not resolve against the configuration")]
    UnresolvedPath { path: String },
}

fn at_path(path: &str) -> String {
    if path.is_empty() || path == "." {
        String::new()
    } else {
        format!(" (at `{path}`)")
    }
}

fn invalid_at(path: &str, err: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid { path: path.to_string(), message: err.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionSection {
    pub critical_current_a: f64,
    /// Give exactly one of `capacitance_f` and `plasma_frequency_hz`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacitance_f: Option<f64>,
    /// ω_p / 2π.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plasma_frequency_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_resistance_ohm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquidSection {
    pub loop_inductance_h: f64,
}

impl Default for SquidSection {
    fn default() -> Self {
        SquidSection { loop_inductance_h: 1e-12 }
    }
}

fn default_environment() -> f64 {
    50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    pub n_cells: usize,
    pub cell_length_m: f64,
    pub ground_capacitance_f: f64,
    #[serde(default = "default_environment")]
    pub environment_impedance_ohm: f64,
}

fn default_decay_cells() -> f64 {
    1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    #[serde(default)]
    pub shape: PulseShape,
    pub amplitude_quanta: f64,
    #[serde(default)]
    pub dc_offset_quanta: f64,
    /// Give exactly one of `velocity_m_s` and `velocity_fraction` (of the
    /// unbiased line velocity).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity_m_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity_fraction: Option<f64>,
    /// Give exactly one of `steepness_per_m` and `horizon_gradient_per_s`;
    /// the latter calibrates the steepness to the requested |∂c/∂x|.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steepness_per_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_gradient_per_s: Option<f64>,
    /// Give at most one of `broadening_per_m` and `decay_fraction`; the latter
    /// calibrates the broadening so T_H drops by that fraction over
    /// `decay_cells` cells of travel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub broadening_per_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_fraction: Option<f64>,
    #[serde(default = "default_decay_cells")]
    pub decay_cells: f64,
    #[serde(default)]
    pub front_position_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSection {
    pub center_cell: f64,
    pub sigma_cells: f64,
    pub ka: f64,
    pub amplitude_v: f64,
    #[serde(default = "default_direction")]
    pub direction: Direction,
}

fn default_direction() -> Direction {
    Direction::Forward
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    #[serde(default)]
    pub node: usize,
    pub amplitude_v: f64,
    pub omega_rad_s: f64,
}

fn default_courant() -> f64 {
    0.2
}
fn default_steps() -> usize {
    2000
}
fn default_record_every() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_courant")]
    pub courant_fraction: f64,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub current_dependent: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_packet: Option<PacketSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSection>,
    #[serde(default)]
    pub probes: Vec<usize>,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            courant_fraction: default_courant(),
            n_steps: default_steps(),
            boundary: Boundary::default(),
            record_every: default_record_every(),
            current_dependent: false,
            dt_s: None,
            initial_packet: None,
            drive: None,
            probes: Vec::new(),
        }
    }
}

fn default_ka() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.3, 1.0, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionSection {
    /// Target wavenumbers in units of 1/a; ignored when frequencies are given.
    #[serde(default = "default_ka")]
    pub ka: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies_rad_s: Option<Vec<f64>>,
    #[serde(default)]
    pub flux_dc_quanta: f64,
}

impl Default for DispersionSection {
    fn default() -> Self {
        DispersionSection { ka: default_ka(), frequencies_rad_s: None, flux_dc_quanta: 0.0 }
    }
}

fn default_signal() -> f64 {
    1e11
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_signal")]
    pub max_signal_frequency_rad_s: f64,
    /// Line length for the photon budget; defaults to `array.n_cells`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_cells: Option<usize>,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection { max_signal_frequency_rad_s: default_signal(), budget_cells: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    Csv,
    Svg,
    Bin,
}

impl std::str::FromStr for Emit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "csv" => Ok(Emit::Csv),
            "svg" => Ok(Emit::Svg),
            "bin" => Ok(Emit::Bin),
            other => Err(format!("unknown output kind `{other}` (expected csv, svg or bin)")),
        }
    }
}

fn default_emit() -> Vec<Emit> {
    vec![Emit::Csv, Emit::Svg]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(default = "default_emit")]
    pub emit: Vec<Emit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: None, emit: default_emit(), workers: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub junction: JunctionSection,
    #[serde(default)]
    pub squid: SquidSection,
    pub array: ArraySection,
    pub pulse: PulseSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub dispersion: DispersionSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Turns a deserialization failure into a located `ConfigError`.
fn classify(err: serde_path_to_error::Error<serde_json::Error>) -> ConfigError {
    let path = err.path().to_string();
    let inner = err.into_inner();
    let (line, column) = (inner.line(), inner.column());
    let text = inner.to_string();
    let message = text
        .rsplit_once(" at line ")
        .map(|(m, _)| m.to_string())
        .unwrap_or(text.clone());
    if let Some(rest) = message.strip_prefix("unknown field `") {
        let quoted: Vec<&str> = rest.split('`').step_by(2).collect();
        let key = quoted.first().copied().unwrap_or_default().to_string();
        let suggestion = quoted
            .iter()
            .skip(1)
            .map(|c| (strsim::levenshtein(&key, c), *c))
            .min()
            .map(|(_, c)| c.to_string());
        let parent = path.strip_suffix(&format!(".{key}")).unwrap_or(&path);
        let parent = if parent == key { "" } else { parent };
        return ConfigError::UnknownKey {
            key,
            path: parent.trim_start_matches('.').to_string(),
            suggestion,
            line,
            column,
        };
    }
    ConfigError::Parse { path, line, column, message }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(classify)?;
    de.end().map_err(|e| ConfigError::Parse {
        path: String::new(),
        line: e.line(),
        column: e.column(),
        message: "trailing characters after configuration".into(),
    })?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

impl RunConfig {
    pub fn defaults() -> Self {
        parse_config(DEFAULT_CONFIG).expect("shipped defaults are valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// Copy with the numeric value at a dotted path (e.g.
    /// `pulse.dc_offset_quanta`) replaced. The path must name a key of the
    /// schema; the result is re-validated strictly.
    pub fn with_value(&self, path: &str, value: f64) -> Result<RunConfig, ConfigError> {
        let unresolved = || ConfigError::UnresolvedPath { path: path.to_string() };
        let mut root = serde_json::to_value(self).expect("configuration serializes");
        let parts: Vec<&str> = path.split('.').collect();
        let (last, parents) = parts.split_last().ok_or_else(unresolved)?;
        let mut node = &mut root;
        for p in parents {
            node = node.get_mut(*p).filter(|v| v.is_object()).ok_or_else(unresolved)?;
        }
        let obj = node.as_object_mut().ok_or_else(unresolved)?;
        let number = if value.fract() == 0.0 && (0.0..9.0e15).contains(&value) {
            let wants_int = obj.get(*last).is_some_and(|v| v.is_u64());
            if wants_int {
                Value::from(value as u64)
            } else {
                Value::from(value)
            }
        } else {
            Value::from(value)
        };
        obj.insert(last.to_string(), number);
        serde_path_to_error::deserialize(root).map_err(|e| {
            let inner = e.inner().to_string();
            if inner.starts_with("unknown field") {
                unresolved()
            } else {
                invalid_at(path, inner)
            }
        })
    }

    pub fn junction(&self) -> Result<JunctionParams, ConfigError> {
        let j = &self.junction;
        let junction = match (j.capacitance_f, j.plasma_frequency_hz) {
            (Some(c), None) => JunctionParams::new(j.critical_current_a, c),
            (None, Some(f)) => JunctionParams::from_plasma_frequency(j.critical_current_a, 2.0 * PI * f),
            _ => {
                return Err(invalid_at(
                    "junction",
                    "give exactly one of capacitance_f and plasma_frequency_hz",
                ))
            }
        }
        .map_err(|e| invalid_at("junction", e))?;
        match j.normal_resistance_ohm {
            Some(r) => junction.with_normal_resistance(r).map_err(|e| invalid_at("junction.normal_resistance_ohm", e)),
            None => Ok(junction),
        }
    }

    pub fn squid(&self) -> Result<SquidParams, ConfigError> {
        SquidParams::new(self.junction()?, self.squid.loop_inductance_h).map_err(|e| invalid_at("squid", e))
    }

    pub fn array(&self) -> Result<ArrayParams, ConfigError> {
        let a = &self.array;
        ArrayParams::new(a.n_cells, a.cell_length_m, a.ground_capacitance_f, a.environment_impedance_ohm)
            .map_err(|e| invalid_at("array", e))
    }

    /// The flux pulse, with steepness and broadening calibrated when the
    /// configuration asks for a horizon gradient or a decay fraction.
    pub fn pulse(&self) -> Result<FluxPulse, ConfigError> {
        let array = self.array()?;
        let squid = self.squid()?;
        let p = &self.pulse;
        let velocity = match (p.velocity_m_s, p.velocity_fraction) {
            (Some(u), None) => u,
            (None, Some(f)) => {
                let c0 = cell_velocity(&array, &squid, Flux::ZERO, 0.0).map_err(|e| invalid_at("pulse", e))?;
                f * c0
            }
            _ => return Err(invalid_at("pulse", "give exactly one of velocity_m_s and velocity_fraction")),
        };
        let seed_steepness = match (p.steepness_per_m, p.horizon_gradient_per_s) {
            (Some(s), None) => s,
            (None, Some(_)) => 0.1 / array.cell_length,
            _ => {
                return Err(invalid_at(
                    "pulse",
                    "give exactly one of steepness_per_m and horizon_gradient_per_s",
                ))
            }
        };
        let base = FluxPulse {
            shape: p.shape,
            amplitude: p.amplitude_quanta,
            dc_offset: p.dc_offset_quanta,
            velocity,
            steepness: seed_steepness,
            front_position: p.front_position_m,
            broadening_rate: 0.0,
        };
        base.validate().map_err(|e| invalid_at("pulse", e))?;
        let pulse = match p.horizon_gradient_per_s {
            Some(g) => calibrate_steepness(&array, &squid, &base, g)
                .map_err(|e| invalid_at("pulse.horizon_gradient_per_s", e))?,
            None => base,
        };
        let rate = match (p.broadening_per_m, p.decay_fraction) {
            (Some(b), None) => b,
            (None, Some(d)) => calibrate_broadening(d, p.decay_cells, &array, &squid, &pulse)
                .map_err(|e| invalid_at("pulse.decay_fraction", e))?,
            (None, None) => 0.0,
            _ => return Err(invalid_at("pulse", "give at most one of broadening_per_m and decay_fraction")),
        };
        pulse.with_broadening(rate).map_err(|e| invalid_at("pulse.broadening_per_m", e))
    }

    pub fn solver(&self) -> Result<SolverConfig, ConfigError> {
        let s = &self.solver;
        if !(s.courant_fraction > 0.0 && s.courant_fraction <= 0.5) {
            return Err(invalid_at("solver.courant_fraction", "must lie in (0, 0.5]"));
        }
        if s.record_every == 0 {
            return Err(invalid_at("solver.record_every", "must be at least 1"));
        }
        Ok(SolverConfig {
            dt: s.dt_s,
            n_steps: s.n_steps,
            courant_fraction: s.courant_fraction,
            boundary: s.boundary,
            record_every: s.record_every,
            current_dependent: s.current_dependent,
        })
    }

    /// Resolves every section into domain objects.
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        let junction = self.junction()?;
        let squid = self.squid()?;
        let array = self.array()?;
        let pulse = self.pulse()?;
        let solver = self.solver()?;
        let model = LineModel::new(array, squid, BiasField::Pulse(pulse)).map_err(|e| invalid_at("pulse", e))?;
        let packet = self.solver.initial_packet.as_ref().map(|p| PacketSpec {
            center_cell: p.center_cell,
            sigma_cells: p.sigma_cells,
            ka: p.ka,
            amplitude: p.amplitude_v,
            direction: p.direction,
        });
        let drive = match &self.solver.drive {
            Some(d) => Some(
                inject_sine(&model, d.node, d.amplitude_v, d.omega_rad_s)
                    .map_err(|e| invalid_at("solver.drive", e))?,
            ),
            None => None,
        };
        if drive.is_some() && solver.boundary != Boundary::DrivenLeftAbsorbingRight {
            return Err(invalid_at("solver.boundary", "a drive needs boundary = driven_left_absorbing_right"));
        }
        if let Some(&p) = self.solver.probes.iter().find(|&&p| p >= array.n_cells) {
            return Err(invalid_at("solver.probes", format!("node {p} outside the line")));
        }
        let dispersion_flux = Flux::quanta(self.dispersion.flux_dc_quanta)
            .check_domain()
            .map_err(|e| invalid_at("dispersion.flux_dc_quanta", e))?;
        let dispersion_frequencies = match &self.dispersion.frequencies_rad_s {
            Some(f) => f.clone(),
            None => {
                let l = squid.linear_inductance(dispersion_flux).map_err(|e| invalid_at("dispersion", e))?;
                crate::dispersion::validate_ka(&self.dispersion.ka).map_err(|e| invalid_at("dispersion.ka", e))?;
                self.dispersion
                    .ka
                    .iter()
                    .map(|&ka| crate::dispersion::frequency_for_ka(ka, l, array.ground_capacitance))
                    .collect()
            }
        };
        let max_signal_frequency = self.analysis.max_signal_frequency_rad_s;
        if !(max_signal_frequency > 0.0) {
            return Err(invalid_at("analysis.max_signal_frequency_rad_s", "must be positive"));
        }
        Ok(Scenario {
            junction,
            squid,
            array,
            pulse,
            model,
            solver,
            packet,
            drive,
            probes: self.solver.probes.clone(),
            max_signal_frequency,
            budget_cells: self.analysis.budget_cells.unwrap_or(array.n_cells),
            dispersion_flux,
            dispersion_frequencies,
        })
    }
}

/// A configuration resolved into domain objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub junction: JunctionParams,
    pub squid: SquidParams,
    pub array: ArrayParams,
    pub pulse: FluxPulse,
    /// The line under the moving pulse.
    pub model: LineModel,
    pub solver: SolverConfig,
    pub packet: Option<PacketSpec>,
    pub drive: Option<SineDrive>,
    pub probes: Vec<usize>,
    pub max_signal_frequency: f64,
    pub budget_cells: usize,
    pub dispersion_flux: Flux,
    pub dispersion_frequencies: Vec<f64>,
}
