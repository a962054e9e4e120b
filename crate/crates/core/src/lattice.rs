//! Time-domain solver for the discrete SQUID-array line.
//!
//! With node potentials `A_n` (`I_n = −C₀ dA_n/dt`, `V_n = A_n − A_{n−1}`)
//! the Kirchhoff equations of the line combine into
//!
//! ```text
//! d/dt (L_n C₀ dA_n/dt) = A_{n+1} − 2A_n + A_{n−1}
//! ```
//!
//! which is integrated with a staggered leapfrog on the pair
//! `(A_n, q_n = L_n C₀ dA_n/dt)`: `q` lives on half steps and each cell
//! inductance is sampled from the bias field at the half step. For a static
//! bias the scheme conserves a discrete energy to round-off.
//!
//! Internally time is measured in cell transit times `√(L₀C₀)` and
//! inductance in `L₀ = L(I = 0, Φ = 0)`; potentials stay in volts. Every
//! public quantity is SI.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bias::BiasField;
use crate::circuit::{ArrayParams, Flux, SquidParams};
use crate::constants::FLUX_QUANTUM;
use crate::error::{invalid, Error, Result};
use crate::numeric::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// First-order one-way (Mur) extrapolation at both ends.
    #[default]
    Absorbing,
    /// Zero end voltage; closed system.
    Reflecting,
    /// Left end held by a drive, right end absorbing.
    DrivenLeftAbsorbingRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Explicit time step, s; `None` picks `courant_fraction·√(L_min C₀)`.
    pub dt: Option<f64>,
    pub n_steps: usize,
    pub courant_fraction: f64,
    pub boundary: Boundary,
    pub record_every: usize,
    /// Use the full arcsin current dependence of the junction inductance.
    pub current_dependent: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: None,
            n_steps: 1000,
            courant_fraction: 0.2,
            boundary: Boundary::Absorbing,
            record_every: 100,
            current_dependent: false,
        }
    }
}

/// Array, SQUID and bias together: everything the solver needs to know
/// about the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineModel {
    pub array: ArrayParams,
    pub squid: SquidParams,
    pub bias: BiasField,
}

impl LineModel {
    pub fn new(array: ArrayParams, squid: SquidParams, bias: BiasField) -> Result<Self> {
        array.validate()?;
        squid.validate()?;
        bias.validate()?;
        Ok(LineModel { array, squid, bias })
    }

    pub fn n_cells(&self) -> usize {
        self.array.n_cells
    }

    /// Lab-frame position of node `n`, taken at the cell centre.
    pub fn cell_center(&self, n: usize) -> f64 {
        (n as f64 + 0.5) * self.array.cell_length
    }

    /// L₀, the zero-flux small-signal inductance.
    pub fn unbiased_inductance(&self) -> f64 {
        self.squid
            .linear_inductance(Flux::ZERO)
            .expect("zero flux is always in domain")
    }

    /// √(L₀C₀), the unbiased cell transit time.
    pub fn cell_time(&self) -> f64 {
        (self.unbiased_inductance() * self.array.ground_capacitance).sqrt()
    }

    pub fn unbiased_velocity(&self) -> f64 {
        self.array.cell_length / self.cell_time()
    }

    /// L₀/L_n(t) = cos(πΦ_n/Φ₀): inverse relative inductance of each cell.
    fn fill_inverse_inductance(&self, t: f64, out: &mut [f64]) {
        for (n, r) in out.iter_mut().enumerate() {
            let flux = self.bias.flux(self.cell_center(n), t);
            *r = (PI * flux.as_quanta()).cos();
        }
    }

    /// Largest stable step for a Courant fraction: `fraction·√(L_min C₀)`.
    pub fn stable_dt(&self, courant_fraction: f64) -> f64 {
        let r_max = (PI * self.bias.min_abs_quanta()).cos();
        courant_fraction * self.cell_time() / r_max.sqrt()
    }
}

/// Synchronous snapshot of the line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LatticeState {
    pub t: f64,
    /// Node potentials A_n, V.
    pub a: Vec<f64>,
    /// q_n = L_n C₀ dA_n/dt, V·s.
    pub q: Vec<f64>,
    /// Junction currents I_n = −C₀ dA_n/dt, A.
    pub current: Vec<f64>,
    /// Per-cell energy, J.
    pub energy_density: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// Gaussian wave packet `amp·exp(−ξ²/2σ²)·cos(kξ)`, ξ = n − centre (cells).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub center_cell: f64,
    pub sigma_cells: f64,
    /// Carrier wavenumber times cell length.
    pub ka: f64,
    /// Peak potential, V.
    pub amplitude: f64,
    pub direction: Direction,
}

impl LatticeState {
    pub fn zeros(n: usize) -> Self {
        LatticeState {
            t: 0.0,
            a: vec![0.0; n],
            q: vec![0.0; n],
            current: vec![0.0; n],
            energy_density: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Node voltages `V_n = A_n − A_{n−1}`, with `V_0 = A_0`.
    pub fn voltage(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.a
            .iter()
            .map(|&a| {
                let v = a - prev;
                prev = a;
                v
            })
            .collect()
    }

    pub fn total_energy(&self) -> f64 {
        self.energy_density.iter().sum()
    }

    /// Packet travelling in `spec.direction` through the local medium at
    /// its centre at t = 0, using the lattice dispersion relation for the
    /// carrier and the group velocity for the envelope.
    pub fn packet(model: &LineModel, spec: &PacketSpec) -> Result<Self> {
        if !(spec.sigma_cells > 0.0) {
            return Err(invalid("packet width must be positive"));
        }
        if !(spec.ka.abs() <= PI) {
            return Err(invalid("packet carrier must satisfy |ka| <= π"));
        }
        let n = model.n_cells();
        let mut r = vec![0.0; n];
        model.fill_inverse_inductance(0.0, &mut r);
        let centre = (spec.center_cell.round().max(0.0) as usize).min(n - 1);
        let rc = r[centre];
        let k = spec.ka;
        let omega = 2.0 * rc.sqrt() * (0.5 * k).sin();
        let v_group = rc.sqrt() * (0.5 * k).cos();
        let sign = spec.direction.sign();
        let t0 = model.cell_time();

        let mut state = LatticeState::zeros(n);
        for i in 0..n {
            let xi = i as f64 - spec.center_cell;
            let env = spec.amplitude * (-0.5 * xi * xi / (spec.sigma_cells * spec.sigma_cells)).exp();
            let (s, c) = (k * xi).sin_cos();
            state.a[i] = env * c;
            // dA/dτ in internal time units, then q = L_n C₀ dA/dt.
            let a_dot = sign * env * (omega * s + v_group * xi / (spec.sigma_cells * spec.sigma_cells) * c);
            state.q[i] = t0 * a_dot / r[i];
        }
        Ok(state)
    }
}

/// Sinusoidal potential imposed on one node, with a raised-cosine turn-on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineDrive {
    pub node: usize,
    /// V.
    pub amplitude: f64,
    /// rad/s.
    pub omega: f64,
    /// s.
    pub ramp_time: f64,
}

impl SineDrive {
    pub fn value(&self, t: f64) -> f64 {
        let ramp = if t >= self.ramp_time {
            1.0
        } else if t <= 0.0 {
            0.0
        } else {
            0.5 * (1.0 - (PI * t / self.ramp_time).cos())
        };
        self.amplitude * ramp * (self.omega * t).sin()
    }
}

/// Sine drive at `node`, turned on over five periods. The frequency must lie
/// inside the pass band `ω < 2/√(L C₀)` of the cell at the drive node.
pub fn inject_sine(model: &LineModel, node: usize, amplitude: f64, omega: f64) -> Result<SineDrive> {
    if node >= model.n_cells() {
        return Err(invalid(format!("drive node {node} outside the line")));
    }
    let flux = model.bias.flux(model.cell_center(node), 0.0);
    let l = model.squid.linear_inductance(flux)?;
    let limit = 2.0 / (l * model.array.ground_capacitance).sqrt();
    if !(omega > 0.0 && omega < limit) {
        return Err(Error::BandLimit { omega, limit });
    }
    Ok(SineDrive {
        node,
        amplitude,
        omega,
        ramp_time: 5.0 * 2.0 * PI / omega,
    })
}

/// Leapfrog integrator owning one line's state.
#[derive(Debug, Clone)]
pub struct Simulation {
    model: LineModel,
    boundary: Boundary,
    current_dependent: bool,
    /// Step in internal units.
    dt: f64,
    /// Cell transit time, s.
    t_unit: f64,
    t_origin: f64,
    /// Internal time of `a`.
    t: f64,
    a: Vec<f64>,
    /// q at t + dt/2, internal units (V).
    q_half: Vec<f64>,
    /// q at t − dt/2.
    q_prev: Vec<f64>,
    /// L₀/L_n at the most recent half step.
    r: Vec<f64>,
    lap: Vec<f64>,
    drive: Option<SineDrive>,
    /// 2π t_unit/Φ₀: phase per unit internal q.
    kappa: f64,
    steps_taken: usize,
}

impl Simulation {
    pub fn new(
        model: LineModel,
        config: &SolverConfig,
        initial: &LatticeState,
        drive: Option<SineDrive>,
    ) -> Result<Self> {
        let n = model.n_cells();
        if initial.a.len() != n || initial.q.len() != n {
            return Err(invalid(format!(
                "initial state has {} / {} entries, line has {n} cells",
                initial.a.len(),
                initial.q.len()
            )));
        }
        if !(config.courant_fraction > 0.0 && config.courant_fraction <= 0.5) {
            return Err(invalid("courant fraction must lie in (0, 0.5]"));
        }
        if let Some(d) = &drive {
            if d.node >= n {
                return Err(invalid("drive node outside the line"));
            }
        }
        let limit = model.stable_dt(config.courant_fraction);
        let dt_si = config.dt.unwrap_or(limit);
        if !(dt_si > 0.0) || dt_si > limit * (1.0 + 1e-12) {
            return Err(Error::CourantViolation { dt: dt_si, limit });
        }
        let t_unit = model.cell_time();
        let mut sim = Simulation {
            model,
            boundary: config.boundary,
            current_dependent: config.current_dependent,
            dt: dt_si / t_unit,
            t_unit,
            t_origin: initial.t,
            t: 0.0,
            a: initial.a.clone(),
            q_half: initial.q.iter().map(|q| q / t_unit).collect(),
            q_prev: vec![0.0; n],
            r: vec![0.0; n],
            lap: vec![0.0; n],
            drive,
            kappa: 2.0 * PI * t_unit / FLUX_QUANTUM,
            steps_taken: 0,
        };
        sim.refresh_inductance(0.0);
        // Half kicks from the synchronous initial data.
        sim.laplacian();
        let h = 0.5 * sim.dt;
        for i in 0..n {
            let q0 = sim.q_half[i];
            sim.q_prev[i] = q0 - h * sim.lap[i];
            sim.q_half[i] = q0 + h * sim.lap[i];
        }
        Ok(sim)
    }

    pub fn model(&self) -> &LineModel {
        &self.model
    }

    /// Lab time of the potentials, s.
    pub fn time(&self) -> f64 {
        self.t_origin + self.t * self.t_unit
    }

    pub fn dt(&self) -> f64 {
        self.dt * self.t_unit
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn potentials(&self) -> &[f64] {
        &self.a
    }

    fn refresh_inductance(&mut self, t_internal: f64) {
        let t = self.t_origin + t_internal * self.t_unit;
        self.model.fill_inverse_inductance(t, &mut self.r);
    }

    fn laplacian(&mut self) {
        let a = &self.a;
        let n = a.len();
        for i in 1..n - 1 {
            self.lap[i] = a[i + 1] - 2.0 * a[i] + a[i - 1];
        }
        self.lap[0] = a[1] - a[0];
        self.lap[n - 1] = a[n - 2] - a[n - 1];
    }

    fn drift_rate(&self, i: usize) -> f64 {
        if self.current_dependent {
            self.r[i] / self.kappa * (self.kappa * self.q_half[i]).sin()
        } else {
            self.r[i] * self.q_half[i]
        }
    }

    fn left_absorbing(&self) -> bool {
        self.boundary == Boundary::Absorbing
    }

    fn right_absorbing(&self) -> bool {
        matches!(
            self.boundary,
            Boundary::Absorbing | Boundary::DrivenLeftAbsorbingRight
        )
    }

    fn mur_coefficient(&self, i: usize) -> f64 {
        let cdt = self.r[i].sqrt() * self.dt;
        (cdt - 1.0) / (cdt + 1.0)
    }

    /// Advances the line by one time step.
    pub fn step(&mut self) -> Result<()> {
        let n = self.a.len();
        if !self.model.bias.is_static() {
            self.refresh_inductance(self.t + 0.5 * self.dt);
        }
        let (a0, a1) = (self.a[0], self.a[1]);
        let (am, am1) = (self.a[n - 1], self.a[n - 2]);

        for i in 0..n {
            self.a[i] += self.dt * self.drift_rate(i);
        }
        self.t += self.dt;

        let mut fixed = [None, None, None];
        if self.left_absorbing() {
            let k = self.mur_coefficient(0);
            self.a[0] = a1 + k * (self.a[1] - a0);
            fixed[0] = Some((0, a0));
        }
        if self.right_absorbing() {
            let k = self.mur_coefficient(n - 1);
            self.a[n - 1] = am1 + k * (self.a[n - 2] - am);
            fixed[1] = Some((n - 1, am));
        }
        if let Some(d) = self.drive {
            let old = if d.node == 0 {
                a0
            } else if d.node == n - 1 {
                am
            } else {
                self.a[d.node] - self.dt * self.drift_rate(d.node)
            };
            self.a[d.node] = d.value(self.t_origin + self.t * self.t_unit);
            fixed[2] = Some((d.node, old));
        }

        self.laplacian();
        std::mem::swap(&mut self.q_prev, &mut self.q_half);
        for i in 0..n {
            self.q_half[i] = self.q_prev[i] + self.dt * self.lap[i];
        }
        // Prescribed nodes carry the momentum implied by their motion.
        for (i, old) in fixed.into_iter().flatten() {
            let q = (self.a[i] - old) / (self.dt * self.r[i]);
            self.q_prev[i] = q;
            self.q_half[i] = q;
        }

        self.steps_taken += 1;
        if self.steps_taken % 64 == 0 && !self.is_finite() {
            return Err(Error::NonFinite { t: self.time() });
        }
        Ok(())
    }

    fn is_finite(&self) -> bool {
        self.a.iter().chain(&self.q_half).all(|v| v.is_finite())
    }

    fn kinetic(&self, i: usize, q: f64) -> f64 {
        if self.current_dependent {
            let half = (0.5 * self.kappa * q).sin();
            2.0 * self.r[i] * half * half / (self.kappa * self.kappa)
        } else {
            0.5 * self.r[i] * q * q
        }
    }

    /// Energy of the line, J.
    ///
    /// In the linear model the kinetic part uses the product of the two
    /// half-step momenta around the current time, which the leapfrog map
    /// conserves exactly for a static bias.
    pub fn energy(&self) -> f64 {
        let c0 = self.model.array.ground_capacitance;
        let mut e = 0.0;
        for i in 0..self.a.len() {
            e += if self.current_dependent {
                self.kinetic(i, 0.5 * (self.q_prev[i] + self.q_half[i]))
            } else {
                0.5 * self.r[i] * self.q_prev[i] * self.q_half[i]
            };
            if i > 0 {
                let d = self.a[i] - self.a[i - 1];
                e += 0.5 * d * d;
            }
        }
        c0 * e
    }

    /// Synchronous SI snapshot at the current time.
    pub fn state(&self) -> LatticeState {
        let n = self.a.len();
        let c0 = self.model.array.ground_capacitance;
        let l0 = self.model.unbiased_inductance();
        let ic0 = FLUX_QUANTUM / (2.0 * PI * l0);
        let mut s = LatticeState {
            t: self.time(),
            a: self.a.clone(),
            q: vec![0.0; n],
            current: vec![0.0; n],
            energy_density: vec![0.0; n],
        };
        for i in 0..n {
            let q = 0.5 * (self.q_prev[i] + self.q_half[i]);
            s.q[i] = q * self.t_unit;
            s.current[i] = if self.current_dependent {
                -ic0 * self.r[i] * (self.kappa * q).sin()
            } else {
                -s.q[i] * self.r[i] / l0
            };
            let mut e = self.kinetic(i, q);
            if i > 0 {
                let d = self.a[i] - self.a[i - 1];
                e += 0.5 * d * d;
            }
            s.energy_density[i] = c0 * e;
        }
        s
    }
}

/// Recorded run of the solver.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub records: Vec<LatticeState>,
    /// (t, E) at each record.
    pub energy: Vec<(f64, f64)>,
    pub probes: Vec<usize>,
    /// Potential at each probe node, one series per probe, one entry per record.
    pub probe_series: Vec<Vec<f64>>,
    pub cell_length: f64,
}

impl Trajectory {
    /// Largest relative departure of the recorded energy from its initial value.
    pub fn energy_drift(&self) -> f64 {
        let Some(&(_, e0)) = self.energy.first() else {
            return 0.0;
        };
        let scale = if e0.abs() > 0.0 { e0.abs() } else { 1.0 };
        self.energy
            .iter()
            .map(|&(_, e)| (e - e0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Runs `config.n_steps` steps, recording every `config.record_every` steps
/// (and always the first and last state).
pub fn run(
    initial: &LatticeState,
    model: &LineModel,
    config: &SolverConfig,
    drive: Option<SineDrive>,
    probes: &[usize],
) -> Result<Trajectory> {
    if let Some(&p) = probes.iter().find(|&&p| p >= model.n_cells()) {
        return Err(invalid(format!("probe node {p} outside the line")));
    }
    let every = config.record_every.max(1);
    let mut sim = Simulation::new(*model, config, initial, drive)?;
    let mut traj = Trajectory {
        probes: probes.to_vec(),
        probe_series: vec![Vec::new(); probes.len()],
        cell_length: model.array.cell_length,
        ..Default::default()
    };
    let record = |sim: &Simulation, traj: &mut Trajectory| {
        let s = sim.state();
        for (series, &p) in traj.probe_series.iter_mut().zip(probes) {
            series.push(s.a[p]);
        }
        traj.energy.push((s.t, sim.energy()));
        traj.records.push(s);
    };
    record(&sim, &mut traj);
    for step in 1..=config.n_steps {
        sim.step()?;
        if step % every == 0 || step == config.n_steps {
            if !sim.is_finite() {
                return Err(Error::NonFinite { t: sim.time() });
            }
            record(&sim, &mut traj);
        }
    }
    Ok(traj)
}

/// Energy centroid and participation number of a snapshot.
pub fn energy_centroid(state: &LatticeState, cell_length: f64) -> Option<(f64, f64)> {
    let total: f64 = state.energy_density.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut first = 0.0;
    let mut second = 0.0;
    for (i, e) in state.energy_density.iter().enumerate() {
        first += (i as f64 + 0.5) * cell_length * e;
        second += e * e;
    }
    Some((first / total, total * total / second))
}

/// Velocity of a localized packet: least-squares slope of its energy
/// centroid against time.
pub fn measure_pulse_speed(trajectory: &Trajectory) -> Result<f64> {
    let mut t = Vec::with_capacity(trajectory.records.len());
    let mut x = Vec::with_capacity(trajectory.records.len());
    for rec in &trajectory.records {
        let (centroid, participation) =
            energy_centroid(rec, trajectory.cell_length).ok_or(Error::NoPacket)?;
        if participation > 0.25 * rec.len() as f64 {
            return Err(Error::NoPacket);
        }
        t.push(rec.t);
        x.push(centroid);
    }
    linear_fit(&t, &x).map(|(slope, _, _)| slope).ok_or(Error::NoPacket)
}
