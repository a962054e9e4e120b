//! Canned reproductions, the wave-packet trapping demonstration and the
//! parameter-sweep engine.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bias::{BiasField, FluxPulse};
use crate::circuit::{array_impedance, cell_velocity, presets, ArrayParams, Flux, SquidParams};
use crate::config::{ConfigError, RunConfig};
use crate::constants::RESISTANCE_QUANTUM;
use crate::error::{invalid, Result};
use crate::geometry::{
    find_horizons, photons_per_pulse, pulse_horizon, velocity_profile_window, HorizonKind, HorizonReport,
    HorizonSample,
};
use crate::io::{write_table, LinePlot, Marker, Series};
use crate::lattice::{energy_centroid, Direction, LatticeState, LineModel, PacketSpec, Simulation, SolverConfig};

/// Comoving velocity profile of a step pulse, normalized to the unbiased line.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig2 {
    /// ξ, m.
    pub xi: Vec<f64>,
    pub flux_quanta: Vec<f64>,
    pub c_ratio: Vec<f64>,
    /// u / c(0).
    pub u_ratio: f64,
    pub horizons: Vec<HorizonReport>,
    /// Flux at the black-hole horizon, Φ₀.
    pub horizon_flux: Option<f64>,
    /// c/c(0) on the plateau behind the front.
    pub plateau_ratio: f64,
}

pub fn reproduce_fig2(array: &ArrayParams, squid: &SquidParams, pulse: &FluxPulse) -> Result<Fig2> {
    let c0 = cell_velocity(array, squid, Flux::ZERO, 0.0)?;
    let profile = velocity_profile_window(array, squid, pulse, 0.0, 64)?;
    let horizons = find_horizons(&profile);
    let horizon_flux = horizons
        .iter()
        .find(|h| h.kind == HorizonKind::Black)
        .map(|h| pulse.comoving_flux(h.position, 0.0).as_quanta());
    Ok(Fig2 {
        flux_quanta: profile.x.iter().map(|&x| pulse.comoving_flux(x, 0.0).as_quanta()).collect(),
        c_ratio: profile.c.iter().map(|c| c / c0).collect(),
        xi: profile.x,
        u_ratio: pulse.velocity / c0,
        horizons,
        horizon_flux,
        plateau_ratio: cell_velocity(array, squid, pulse.peak_flux(), 0.0)? / c0,
    })
}

impl Fig2 {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<Vec<f64>> = (0..self.xi.len())
            .map(|i| vec![self.xi[i], self.flux_quanta[i], self.c_ratio[i], self.u_ratio])
            .collect();
        write_table(out, &["xi_m", "flux_quanta", "c_over_c0", "u_over_c0"], &rows)
    }

    pub fn plot(&self) -> LinePlot {
        let um: Vec<f64> = self.xi.iter().map(|x| x * 1e6).collect();
        let mut plot = LinePlot::new("Comoving velocity profile", "xi (um)", "c / c(0)")
            .series(Series::new("c(xi)/c(0)", um.iter().copied().zip(self.c_ratio.iter().copied()).collect()))
            .marker(Marker::Horizontal { y: self.u_ratio, label: format!("u/c(0) = {:.3}", self.u_ratio) });
        for h in &self.horizons {
            let kind = match h.kind {
                HorizonKind::Black => "black",
                HorizonKind::White => "white",
            };
            plot = plot.marker(Marker::Vertical { x: h.position * 1e6, label: format!("{kind} horizon") });
        }
        plot
    }
}

/// Ground capacitances of the four impedance curves, F.
pub const FIG3_CAPACITANCES: [f64; 4] = [1e-16, 5e-17, 1e-17, 5e-18];

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3 {
    pub flux_quanta: Vec<f64>,
    pub capacitances: Vec<f64>,
    /// Z_A/R_Q, one curve per capacitance.
    pub curves: Vec<Vec<f64>>,
}

/// Z_A/R_Q against Φ/Φ₀ ∈ [0, 0.49] at I_c = 2 μA.
pub fn reproduce_fig3() -> Result<Fig3> {
    let squid = presets::squid();
    let flux_quanta: Vec<f64> = (0..=49).map(|i| i as f64 * 0.01).collect();
    let curves = FIG3_CAPACITANCES
        .iter()
        .map(|&c| {
            let array = ArrayParams { ground_capacitance: c, ..presets::array() };
            flux_quanta
                .iter()
                .map(|&f| Ok(array_impedance(&array, &squid, Flux::quanta(f))? / RESISTANCE_QUANTUM))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(Fig3 { flux_quanta, capacitances: FIG3_CAPACITANCES.to_vec(), curves })
}

impl Fig3 {
    pub fn intercepts(&self) -> Vec<f64> {
        self.curves.iter().map(|c| c[0]).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let names: Vec<String> = self.capacitances.iter().map(|c| format!("z_over_rq_c0_{c:e}")).collect();
        let mut header = vec!["flux_quanta"];
        header.extend(names.iter().map(String::as_str));
        let rows: Vec<Vec<f64>> = (0..self.flux_quanta.len())
            .map(|i| {
                let mut row = vec![self.flux_quanta[i]];
                row.extend(self.curves.iter().map(|c| c[i]));
                row
            })
            .collect();
        write_table(out, &header, &rows)
    }

    pub fn plot(&self) -> LinePlot {
        let mut plot = LinePlot::new("Array impedance", "flux / flux quantum", "Z_A / R_Q")
            .marker(Marker::Horizontal { y: 1.0, label: "Z_A = R_Q".into() });
        for (c, curve) in self.capacitances.iter().zip(&self.curves) {
            let pts = self.flux_quanta.iter().copied().zip(curve.iter().copied()).collect();
            plot = plot.series(Series::new(format!("C0 = {c:e} F"), pts));
        }
        plot.y_range = Some((0.0, 6.0));
        plot
    }
}

/// A computed number set against the estimate it should reproduce.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub name: String,
    pub expected: String,
    pub computed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureBudget {
    /// T_H at launch, K.
    pub initial_temperature: f64,
    /// T_H(1000 cells) / T_H(0).
    pub decay_ratio: f64,
    pub photons: f64,
    pub trace: Vec<HorizonSample>,
    pub claims: Vec<Claim>,
}

/// T_H at launch, its decay over 1000 cells of travel and the photon count
/// over `line_cells` cells.
pub fn temperature_budget(
    array: &ArrayParams,
    squid: &SquidParams,
    pulse: &FluxPulse,
    line_cells: usize,
) -> Result<TemperatureBudget> {
    let t0 = pulse_horizon(array, squid, pulse, 0.0)?.temperature;
    let t_1000 = 1000.0 * array.cell_length / pulse.velocity;
    let decay_ratio = pulse_horizon(array, squid, pulse, t_1000)?.temperature / t0;
    let budget = photons_per_pulse(array, squid, pulse, line_cells)?;
    let claims = vec![
        Claim {
            name: "hawking_temperature_mK".into(),
            expected: "121 +/- 2".into(),
            computed: t0 * 1e3,
            pass: (t0 * 1e3 - 121.0).abs() <= 2.0,
        },
        Claim {
            name: "decay_per_1000_cells".into(),
            expected: "0.90 +/- 0.01".into(),
            computed: decay_ratio,
            pass: (decay_ratio - 0.90).abs() <= 0.01,
        },
        Claim {
            name: "photons_per_pulse".into(),
            expected: "[0.7, 1.3]".into(),
            computed: budget.photons,
            pass: (0.7..=1.3).contains(&budget.photons),
        },
    ];
    Ok(TemperatureBudget {
        initial_temperature: t0,
        decay_ratio,
        photons: budget.photons,
        trace: budget.trace,
        claims,
    })
}

impl TemperatureBudget {
    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }

    pub fn plot(&self) -> LinePlot {
        let pts = self.trace.iter().map(|s| (s.t * 1e9, s.temperature * 1e3)).collect();
        LinePlot::new("Hawking temperature along the line", "t (ns)", "T_H (mK)")
            .series(Series::new("T_H(t)", pts))
    }
}

/// Two packets launched on either side of the horizon of a pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct TrappingScenario {
    pub array: ArrayParams,
    pub squid: SquidParams,
    pub pulse: FluxPulse,
    /// With `false` the same front is held still (no flow, no horizon).
    pub moving: bool,
    pub front_cell: usize,
    pub offset_cells: usize,
    pub sigma_cells: f64,
    pub ka: f64,
    /// Observation window, in traversal times `offset·a / c(Φ_dc)`.
    pub traversals: f64,
    pub records: usize,
}

impl TrappingScenario {
    /// The reference front (0.2 Φ₀, u = 0.95 c(0), horizon gradient 10¹¹ s⁻¹)
    /// without broadening.
    pub fn reference() -> Result<Self> {
        let array = presets::array();
        let squid = presets::squid();
        let c0 = cell_velocity(&array, &squid, Flux::ZERO, 0.0)?;
        let seed = FluxPulse::step(0.2, 0.0, 0.95 * c0, 0.1 / array.cell_length, 0.0)?;
        let pulse = crate::geometry::calibrate_steepness(&array, &squid, &seed, 1e11)?;
        Ok(TrappingScenario {
            array,
            squid,
            pulse,
            moving: true,
            front_cell: 450,
            offset_cells: 250,
            sigma_cells: 20.0,
            ka: 0.1,
            traversals: 5.0,
            records: 200,
        })
    }

    pub fn without_flow(mut self) -> Self {
        self.moving = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketTrack {
    pub label: String,
    pub direction: Direction,
    /// Lab time of each centroid sample, s.
    pub times: Vec<f64>,
    /// Comoving centroid ξ − ξ_ref, m.
    pub offset: Vec<f64>,
    pub crossed: bool,
    pub crossing_time: Option<f64>,
}

impl PacketTrack {
    pub fn trapped(&self) -> bool {
        !self.crossed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrappingReport {
    /// Comoving reference point: the horizon, or the front when there is none.
    pub reference: f64,
    pub has_horizon: bool,
    pub traversal_time: f64,
    pub window: f64,
    /// Packet starting in the fast region, heading into the slow one.
    pub ahead: PacketTrack,
    /// Packet starting in the slow region, heading into the fast one.
    pub behind: PacketTrack,
}

impl TrappingReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut rows = Vec::new();
        for (id, track) in [(0.0, &self.ahead), (1.0, &self.behind)] {
            for (t, x) in track.times.iter().zip(&track.offset) {
                rows.push(vec![id, *t, *x]);
            }
        }
        write_table(out, &["packet", "t", "xi_minus_ref_m"], &rows)
    }

    pub fn plot(&self) -> LinePlot {
        let to_pts = |t: &PacketTrack| t.times.iter().zip(&t.offset).map(|(t, x)| (t * 1e9, x * 1e6)).collect();
        LinePlot::new("Packet centroids, comoving frame", "t (ns)", "xi - xi_h (um)")
            .series(Series::new("ahead, moving backward", to_pts(&self.ahead)))
            .series(Series::new("behind, moving forward", to_pts(&self.behind)).dashed())
            .marker(Marker::Horizontal { y: 0.0, label: "horizon".into() })
    }
}

/// Launches the two packets of the scenario in separate lab-frame runs and
/// follows their energy centroids in the comoving frame, ξ = x − ut.
pub fn wavepacket_trapping(s: &TrappingScenario) -> Result<TrappingReport> {
    let a = s.array.cell_length;
    let pulse = FluxPulse { front_position: (s.front_cell as f64 + 0.5) * a, broadening_rate: 0.0, ..s.pulse };
    let c_dc = cell_velocity(&s.array, &s.squid, pulse.dc_flux(), 0.0)?;
    let traversal_time = s.offset_cells as f64 * a / c_dc;
    let window = s.traversals * traversal_time;
    let u = if s.moving { pulse.velocity } else { 0.0 };
    let drift_cells = (u * window / a).ceil() as usize;
    let n_cells = s.front_cell + drift_cells + s.offset_cells + 200;
    let array = s.array.with_cells(n_cells);

    let (bias, reference, has_horizon) = if s.moving {
        let h = pulse_horizon(&array, &s.squid, &pulse, 0.0)?;
        (BiasField::Pulse(pulse), h.position, true)
    } else {
        let bias = BiasField::StaticStep {
            position: pulse.front_position,
            low: pulse.dc_offset + pulse.amplitude,
            high: pulse.dc_offset,
            steepness: Some(pulse.steepness),
        };
        (bias, pulse.front_position, false)
    };
    let model = LineModel::new(array, s.squid, bias)?;
    let ref_cell = reference / a - 0.5;
    let launch = |centre: f64, direction: Direction, label: &str| -> Result<PacketTrack> {
        let spec = PacketSpec { center_cell: centre, sigma_cells: s.sigma_cells, ka: s.ka, amplitude: 1e-6, direction };
        track_packet(&model, &spec, reference, u, window, s.records, label)
    };
    let off = s.offset_cells as f64;
    let (ahead, behind) = rayon::join(
        || launch(ref_cell + off, Direction::Backward, "ahead"),
        || launch(ref_cell - off, Direction::Forward, "behind"),
    );
    Ok(TrappingReport { reference, has_horizon, traversal_time, window, ahead: ahead?, behind: behind? })
}

fn track_packet(
    model: &LineModel,
    spec: &PacketSpec,
    reference: f64,
    u: f64,
    window: f64,
    records: usize,
    label: &str,
) -> Result<PacketTrack> {
    let init = LatticeState::packet(model, spec)?;
    let config = SolverConfig::default();
    let mut sim = Simulation::new(*model, &config, &init, None)?;
    let n_steps = (window / sim.dt()).ceil() as usize;
    let every = (n_steps / records.max(1)).max(1);
    let a = model.array.cell_length;
    let start_side = (spec.center_cell + 0.5) * a - reference;
    let e0 = sim.state().total_energy();
    let mut track = PacketTrack {
        label: label.to_string(),
        direction: spec.direction,
        times: Vec::new(),
        offset: Vec::new(),
        crossed: false,
        crossing_time: None,
    };
    for step in 0..=n_steps {
        if step > 0 {
            sim.step()?;
        }
        if step % every != 0 && step != n_steps {
            continue;
        }
        let state = sim.state();
        // Stop following a packet once most of it has left the line.
        if state.total_energy() < 0.2 * e0 {
            break;
        }
        let Some((x, _)) = energy_centroid(&state, a) else { break };
        let offset = x - u * state.t - reference;
        track.times.push(state.t);
        track.offset.push(offset);
        if !track.crossed && offset * start_side < 0.0 {
            track.crossed = true;
            track.crossing_time = Some(state.t);
        }
    }
    Ok(track)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOutput {
    /// T_H at launch, K.
    HawkingTemperature,
    /// Z_A(Φ_dc) / R_Q.
    ImpedanceRatio,
    /// c(Φ_dc), m/s.
    Velocity,
    HorizonCount,
    PhotonCount,
}

impl SweepOutput {
    pub fn column(self) -> &'static str {
        match self {
            SweepOutput::HawkingTemperature => "T_H_K",
            SweepOutput::ImpedanceRatio => "Z_A_over_R_Q",
            SweepOutput::Velocity => "c_m_s",
            SweepOutput::HorizonCount => "horizon_count",
            SweepOutput::PhotonCount => "photon_count",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted configuration path, e.g. `pulse.dc_offset_quanta`.
    pub path: String,
    pub values: Vec<f64>,
}

fn all_outputs() -> Vec<SweepOutput> {
    vec![
        SweepOutput::HawkingTemperature,
        SweepOutput::ImpedanceRatio,
        SweepOutput::Velocity,
        SweepOutput::HorizonCount,
        SweepOutput::PhotonCount,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Base configuration; the shipped defaults when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<RunConfig>,
    pub axes: Vec<SweepAxis>,
    #[serde(default = "all_outputs")]
    pub outputs: Vec<SweepOutput>,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| ConfigError::Parse {
            path: e.path().to_string(),
            line: e.inner().line(),
            column: e.inner().column(),
            message: e.inner().to_string(),
        })
    }

    fn base_config(&self) -> RunConfig {
        self.base.clone().unwrap_or_else(RunConfig::defaults)
    }

    /// Checks axis count, non-empty value lists and that every path resolves.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(ConfigError::Invalid { path: "axes".into(), message: "give one or two axes".into() });
        }
        let base = self.base_config();
        for axis in &self.axes {
            let first = axis.values.first().ok_or_else(|| ConfigError::Invalid {
                path: axis.path.clone(),
                message: "empty value list".into(),
            })?;
            if let Err(e @ ConfigError::UnresolvedPath { .. }) = base.with_value(&axis.path, *first) {
                return Err(e);
            }
        }
        if self.outputs.is_empty() {
            return Err(ConfigError::Invalid { path: "outputs".into(), message: "no outputs requested".into() });
        }
        Ok(())
    }

    fn grid(&self) -> Vec<Vec<f64>> {
        let mut points = vec![Vec::new()];
        for axis in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub axes: Vec<String>,
    pub outputs: Vec<SweepOutput>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn column(&self, output: SweepOutput) -> Option<Vec<Option<f64>>> {
        let j = self.outputs.iter().position(|o| *o == output)?;
        Some(self.rows.iter().map(|r| r.values[j]).collect())
    }

    /// Axis columns, then outputs, then an `error` column; failed values are empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = self.axes.clone();
        header.extend(self.outputs.iter().map(|o| o.column().to_string()));
        header.push("error".into());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.coords.iter().map(|v| crate::io::fmt_num(*v)).collect();
            rec.extend(row.values.iter().map(|v| v.map(crate::io::fmt_num).unwrap_or_default()));
            rec.push(row.errors.join("; "));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One grid point of a sweep. Each output is evaluated independently so a
/// missing horizon does not hide, say, the velocity.
pub fn evaluate_point(config: &RunConfig, outputs: &[SweepOutput]) -> (Vec<Option<f64>>, Vec<String>) {
    let mut errors = Vec::new();
    let mut pulse_cache: Option<std::result::Result<FluxPulse, String>> = None;
    let base = config.array().and_then(|a| Ok((a, config.squid()?)));
    let values = outputs
        .iter()
        .map(|&out| {
            let (array, squid) = match &base {
                Ok(v) => *v,
                Err(e) => {
                    errors.push(e.to_string());
                    return None;
                }
            };
            let dc = Flux::quanta(config.pulse.dc_offset_quanta);
            let mut pulse = || -> std::result::Result<FluxPulse, String> {
                pulse_cache.get_or_insert_with(|| config.pulse().map_err(|e| e.to_string())).clone()
            };
            let value: std::result::Result<f64, String> = match out {
                SweepOutput::Velocity => cell_velocity(&array, &squid, dc, 0.0).map_err(|e| e.to_string()),
                SweepOutput::ImpedanceRatio => array_impedance(&array, &squid, dc)
                    .map(|z| z / RESISTANCE_QUANTUM)
                    .map_err(|e| e.to_string()),
                SweepOutput::HawkingTemperature => pulse().and_then(|p| {
                    pulse_horizon(&array, &squid, &p, 0.0).map(|h| h.temperature).map_err(|e| e.to_string())
                }),
                SweepOutput::HorizonCount => pulse().and_then(|p| {
                    velocity_profile_window(&array, &squid, &p, 0.0, 64)
                        .map(|prof| find_horizons(&prof).len() as f64)
                        .map_err(|e| e.to_string())
                }),
                SweepOutput::PhotonCount => pulse().and_then(|p| {
                    let cells = config.analysis.budget_cells.unwrap_or(array.n_cells);
                    photons_per_pulse(&array, &squid, &p, cells).map(|b| b.photons).map_err(|e| e.to_string())
                }),
            };
            match value {
                Ok(v) => Some(v),
                Err(e) => {
                    let msg = format!("{}: {e}", out.column());
                    if !errors.contains(&msg) {
                        errors.push(msg);
                    }
                    None
                }
            }
        })
        .collect();
    (values, errors)
}

/// Evaluates the requested outputs over the full grid on `workers` threads.
/// Row order follows the grid (last axis fastest) whatever the schedule.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepTable> {
    spec.validate()?;
    let base = spec.base_config();
    let grid = spec.grid();
    let eval = |coords: &Vec<f64>| -> SweepRow {
        let mut cfg = Ok(base.clone());
        for (axis, v) in spec.axes.iter().zip(coords) {
            cfg = cfg.and_then(|c: RunConfig| c.with_value(&axis.path, *v));
        }
        let (values, errors) = match cfg {
            Ok(c) => evaluate_point(&c, &spec.outputs),
            Err(e) => (vec![None; spec.outputs.len()], vec![e.to_string()]),
        };
        SweepRow { coords: coords.clone(), values, errors }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| grid.par_iter().map(eval).collect());
    Ok(SweepTable {
        axes: spec.axes.iter().map(|a| a.path.clone()).collect(),
        outputs: spec.outputs.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig3_intercepts() {
        let f = reproduce_fig3().unwrap();
        let expected = [0.624, 0.883, 1.974, 2.791];
        for (got, want) in f.intercepts().iter().zip(expected) {
            assert!((got - want).abs() / want < 0.01, "{got} vs {want}");
        }
        for c in &f.curves {
            assert!(c.windows(2).all(|w| w[1] > w[0]));
            assert!(c[49] > 5.0 * c[0]);
        }
    }

    #[test]
    fn grid_order_is_row_major() {
        let spec = SweepSpec {
            base: None,
            axes: vec![
                SweepAxis { path: "a".into(), values: vec![1.0, 2.0] },
                SweepAxis { path: "b".into(), values: vec![3.0, 4.0, 5.0] },
            ],
            outputs: all_outputs(),
        };
        let g = spec.grid();
        assert_eq!(g.len(), 6);
        assert_eq!(g[1], vec![1.0, 4.0]);
        assert_eq!(g[3], vec![2.0, 3.0]);
    }

    #[test]
    fn sweep_validation() {
        let bad = SweepSpec { base: None, axes: vec![SweepAxis { path: "pulse.bogus".into(), values: vec![1.0] }], outputs: all_outputs() };
        assert!(matches!(bad.validate(), Err(ConfigError::UnresolvedPath { .. })));
        let empty = SweepSpec { base: None, axes: vec![SweepAxis { path: "pulse.dc_offset_quanta".into(), values: vec![] }], outputs: all_outputs() };
        assert!(empty.validate().is_err());
        assert!(SweepSpec { base: None, axes: vec![], outputs: all_outputs() }.validate().is_err());
    }
}
