//! Effective geometry seen by long-wavelength excitations of the line.
//!
//! In the frame comoving with the bias pulse the wave operator is that of a
//! 1+1 dimensional metric with inverse components
//! `g^{μν} = (1/c²) [[1, −u], [−u, u² − c²]]`. Horizons sit where
//! `c(ξ) = u`; the Hawking temperature follows from the velocity gradient
//! there, `T_H = ħ |∂c/∂ξ| / (2π k_B)`, and the comoving-frame power from the
//! single-channel 1-D bosonic heat-flow bound `(π/12ħ)(k_B T_H)²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bias::FluxPulse;
use crate::circuit::{cell_velocity, ArrayParams, Flux, SquidParams};
use crate::constants::{BOLTZMANN, REDUCED_PLANCK};
use crate::error::{invalid, Error, Result};
use crate::numeric::{bisect, simpson};

/// Analytic comoving velocity c(ξ) = c(0)·√cos(πΦ(ξ)/Φ₀) of a pulse snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ProfileModel {
    unbiased_velocity: f64,
    pulse: FluxPulse,
    t: f64,
}

impl ProfileModel {
    fn velocity(&self, xi: f64) -> f64 {
        let phi = self.pulse.comoving_flux(xi, self.t).as_quanta();
        self.unbiased_velocity * (PI * phi).cos().sqrt()
    }

    /// Centred difference with one Richardson step.
    fn gradient(&self, xi: f64, h: f64) -> f64 {
        let d = |h: f64| (self.velocity(xi + h) - self.velocity(xi - h)) / (2.0 * h);
        (4.0 * d(0.5 * h) - d(h)) / 3.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile {
    /// Comoving coordinate ξ = x − ut of each sample, m.
    pub x: Vec<f64>,
    /// Local propagation velocity, m/s.
    pub c: Vec<f64>,
    /// Pulse velocity, m/s.
    pub u: f64,
    /// Snapshot time, s.
    pub t: f64,
    model: Option<ProfileModel>,
    spacing: f64,
}

impl VelocityProfile {
    /// Profile from raw samples; horizons are then located by linear
    /// interpolation and gradients by finite differences of the samples.
    pub fn from_samples(x: Vec<f64>, c: Vec<f64>, u: f64, t: f64) -> Result<Self> {
        if x.len() != c.len() || x.len() < 2 {
            return Err(invalid("profile needs at least two matching samples"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("profile grid must be strictly increasing"));
        }
        if c.iter().any(|v| !(*v > 0.0)) {
            return Err(invalid("profile velocity must be positive"));
        }
        let spacing = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
        Ok(VelocityProfile {
            x,
            c,
            u,
            t,
            model: None,
            spacing,
        })
    }

    fn from_model(model: ProfileModel, x: Vec<f64>, spacing: f64) -> Result<Self> {
        let c: Vec<f64> = x.iter().map(|&xi| model.velocity(xi)).collect();
        if c.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::FluxOutOfRange {
                quanta: model.pulse.peak_flux().as_quanta(),
            });
        }
        Ok(VelocityProfile {
            x,
            c,
            u: model.pulse.velocity,
            t: model.t,
            model: Some(model),
            spacing,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// c(ξ): analytic when the profile came from a pulse, else linear
    /// interpolation of the samples.
    pub fn velocity_at(&self, xi: f64) -> Result<f64> {
        let (min, max) = self.range();
        if !(xi >= min && xi <= max) {
            return Err(Error::OutOfRange { x: xi, min, max });
        }
        if let Some(m) = &self.model {
            return Ok(m.velocity(xi));
        }
        let i = self.x.partition_point(|&v| v <= xi).clamp(1, self.x.len() - 1);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let w = (xi - x0) / (x1 - x0);
        Ok(self.c[i - 1] * (1.0 - w) + self.c[i] * w)
    }

    fn gradient_at(&self, xi: f64, bracket: usize) -> f64 {
        match &self.model {
            Some(m) => m.gradient(xi, 0.25 * self.spacing),
            None => {
                let (i, j) = (bracket, bracket + 1);
                (self.c[j] - self.c[i]) / (self.x[j] - self.x[i])
            }
        }
    }
}

fn unbiased_velocity(array: &ArrayParams, squid: &SquidParams) -> Result<f64> {
    cell_velocity(array, squid, Flux::ZERO, 0.0)
}

/// Comoving velocity profile sampled at the array's cell centres,
/// ξ_n = (n + ½)a − ut.
pub fn velocity_profile(
    array: &ArrayParams,
    squid: &SquidParams,
    pulse: &FluxPulse,
    t: f64,
) -> Result<VelocityProfile> {
    let model = ProfileModel {
        unbiased_velocity: unbiased_velocity(array, squid)?,
        pulse: *pulse,
        t,
    };
    let a = array.cell_length;
    let shift = pulse.velocity * t;
    let x = (0..array.n_cells)
        .map(|n| (n as f64 + 0.5) * a - shift)
        .collect();
    VelocityProfile::from_model(model, x, a)
}

/// Comoving profile on a cell-spaced grid centred on the pulse front,
/// spanning at least `half_width_cells` cells and twelve front widths on
/// each side.
pub fn velocity_profile_window(
    array: &ArrayParams,
    squid: &SquidParams,
    pulse: &FluxPulse,
    t: f64,
    half_width_cells: usize,
) -> Result<VelocityProfile> {
    let model = ProfileModel {
        unbiased_velocity: unbiased_velocity(array, squid)?,
        pulse: *pulse,
        t,
    };
    let a = array.cell_length;
    let width_cells = (12.0 / (pulse.steepness_at(t) * a)).ceil() as usize;
    let half = half_width_cells.max(width_cells).max(1) as isize;
    let x = (-half..=half)
        .map(|j| pulse.front_position + j as f64 * a)
        .collect();
    VelocityProfile::from_model(model, x, a)
}

/// Inverse effective metric at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveMetric {
    pub tt: f64,
    pub tx: f64,
    pub xx: f64,
}

impl EffectiveMetric {
    pub fn new(c: f64, u: f64) -> Self {
        let inv = 1.0 / (c * c);
        EffectiveMetric {
            tt: inv,
            tx: -u * inv,
            xx: (u * u - c * c) * inv,
        }
    }

    pub fn determinant(&self) -> f64 {
        self.tt * self.xx - self.tx * self.tx
    }
}

pub fn effective_metric(profile: &VelocityProfile, xi: f64) -> Result<EffectiveMetric> {
    Ok(EffectiveMetric::new(profile.velocity_at(xi)?, profile.u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonKind {
    Black,
    White,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonReport {
    /// ξ_h, m.
    pub position: f64,
    pub kind: HorizonKind,
    /// |∂c/∂ξ| at the horizon, 1/s.
    pub velocity_gradient: f64,
    /// T_H, K.
    pub temperature: f64,
    /// Comoving-frame radiated power, W.
    pub power: f64,
}

/// Locates every sign change of c(ξ) − u.
///
/// Crossings are bracketed on the grid and refined by bisection on the
/// analytic profile (or linear interpolation for sampled profiles). The
/// medium flows at −u in the comoving frame, so a horizon with
/// u·∂c/∂ξ > 0 (slow region trailing) is a black-hole horizon.
pub fn find_horizons(profile: &VelocityProfile) -> Vec<HorizonReport> {
    let u = profile.u;
    let diff: Vec<f64> = profile.c.iter().map(|c| c - u.abs()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < diff.len() {
        let (d0, d1) = (diff[i], diff[i + 1]);
        let crosses = (d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0) || (d1 == 0.0 && d0 != 0.0);
        if crosses {
            let (x0, x1) = (profile.x[i], profile.x[i + 1]);
            let position = match &profile.model {
                Some(m) => bisect(
                    |xi| Ok(m.velocity(xi) - u.abs()),
                    x0,
                    x1,
                    0.0,
                    1e-14 * profile.spacing,
                )
                .unwrap_or(x0 + (x1 - x0) * d0 / (d0 - d1)),
                None => x0 + (x1 - x0) * d0 / (d0 - d1),
            };
            let gradient = profile.gradient_at(position, i);
            let kind = if gradient * u > 0.0 {
                HorizonKind::Black
            } else {
                HorizonKind::White
            };
            let temperature = hawking_temperature(gradient);
            out.push(HorizonReport {
                position,
                kind,
                velocity_gradient: gradient.abs(),
                temperature,
                power: radiated_power(temperature),
            });
        }
        i += 1;
    }
    out
}

/// T_H = ħ |∂c/∂x| / (2π k_B), K.
pub fn hawking_temperature(velocity_gradient: f64) -> f64 {
    REDUCED_PLANCK * velocity_gradient.abs() / (2.0 * PI * BOLTZMANN)
}

/// Temperature of the black-hole horizon of a profile.
pub fn profile_temperature(profile: &VelocityProfile) -> Result<f64> {
    find_horizons(profile)
        .into_iter()
        .find(|h| h.kind == HorizonKind::Black)
        .map(|h| h.temperature)
        .ok_or(Error::NoHorizon)
}

/// dE/dt = (π / 12ħ)(k_B T_H)², W.
pub fn radiated_power(temperature: f64) -> f64 {
    let e = BOLTZMANN * temperature;
    PI * e * e / (12.0 * REDUCED_PLANCK)
}

/// Photon emission rate, taking each emitted quantum to carry k_B T_H.
pub fn photon_rate(temperature: f64) -> f64 {
    if temperature <= 0.0 {
        0.0
    } else {
        radiated_power(temperature) / (BOLTZMANN * temperature)
    }
}

/// Black-hole horizon of the pulse's comoving profile at time `t`.
pub fn pulse_horizon(
    array: &ArrayParams,
    squid: &SquidParams,
    pulse: &FluxPulse,
    t: f64,
) -> Result<HorizonReport> {
    let profile = velocity_profile_window(array, squid, pulse, t, 64)?;
    find_horizons(&profile)
        .into_iter()
        .find(|h| h.kind == HorizonKind::Black)
        .ok_or(Error::NoHorizon)
}

pub fn pulse_temperature(
    array: &ArrayParams,
    squid: &SquidParams,
    pulse: &FluxPulse,
    t: f64,
) -> Result<f64> {
    pulse_horizon(array, squid, pulse, t).map(|h| h.temperature)
}

/// Rescales the pulse steepness so the black-hole horizon gradient at t = 0
/// equals `target_gradient` (1/s). The gradient is linear in s₀.
pub fn calibrate_steepness(
    array: &ArrayParams,
    squid: &SquidParams,
    pulse: &FluxPulse,
    target_gradient: f64,
) -> Result<FluxPulse> {
    if !(target_gradient > 0.0) {
        return Err(invalid("target gradient must be positive"));
    }
    let mut p = *pulse;
    for _ in 0..3 {
        let g = pulse_horizon(array, squid, &p, 0.0)?.velocity_gradient;
        p = p.with_steepness(p.steepness * target_gradient / g)?;
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonSample {
    pub t: f64,
    pub position: f64,
    pub velocity_gradient: f64,
    pub temperature: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonBudget {
    pub photons: f64,
    pub traversal_time: f64,
    pub trace: Vec<HorizonSample>,
}

const BUDGET_INTERVALS: usize = 256;

/// Expected photon count emitted while the pulse crosses `line_length_cells`
/// cells: `∫ P(T_H(t)) / (k_B T_H(t)) dt` over `[0, N a / u]`, with T_H(t)
/// taken from the broadened profile.
pub fn photons_per_pulse(
    array: &ArrayParams,
    squid: &SquidParams,
    pulse: &FluxPulse,
    line_length_cells: usize,
) -> Result<PhotonBudget> {
    pulse_horizon(array, squid, pulse, 0.0)?;
    let traversal_time = line_length_cells as f64 * array.cell_length / pulse.velocity;
    let h = traversal_time / BUDGET_INTERVALS as f64;
    let mut trace = Vec::with_capacity(BUDGET_INTERVALS + 1);
    for i in 0..=BUDGET_INTERVALS {
        let t = i as f64 * h;
        let sample = match pulse_horizon(array, squid, pulse, t) {
            Ok(r) => HorizonSample {
                t,
                position: r.position,
                velocity_gradient: r.velocity_gradient,
                temperature: r.temperature,
                power: r.power,
            },
            Err(Error::NoHorizon) => HorizonSample {
                t,
                position: f64::NAN,
                velocity_gradient: 0.0,
                temperature: 0.0,
                power: 0.0,
            },
            Err(e) => return Err(e),
        };
        trace.push(sample);
    }
    let rates: Vec<f64> = trace.iter().map(|s| photon_rate(s.temperature)).collect();
    let photons = if traversal_time > 0.0 {
        simpson(&rates, h)
    } else {
        0.0
    };
    Ok(PhotonBudget {
        photons,
        traversal_time,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::PulseShape;
    use crate::circuit::presets;

    fn c0() -> f64 {
        unbiased_velocity(&presets::array(), &presets::squid()).unwrap()
    }

    fn fig2_pulse() -> FluxPulse {
        FluxPulse::step(0.2, 0.0, 0.95 * c0(), 4.0e5, 2.0e-4).unwrap()
    }

    fn window(p: &FluxPulse) -> VelocityProfile {
        velocity_profile_window(&presets::array(), &presets::squid(), p, 0.0, 100).unwrap()
    }

    #[test]
    fn unbiased_profile_is_flat() {
        let p = FluxPulse::step(0.0, 0.0, 0.95 * c0(), 4e5, 0.0).unwrap();
        let prof = window(&p);
        assert!(prof.c.iter().all(|&c| (c / c0() - 1.0).abs() < 1e-15));
        assert!(find_horizons(&prof).is_empty());
    }

    #[test]
    fn plateaus_follow_sqrt_cos() {
        let prof = window(&fig2_pulse());
        let first = prof.c[0] / c0();
        let last = prof.c[prof.len() - 1] / c0();
        assert!((first - (0.2 * PI).cos().sqrt()).abs() < 1e-9);
        assert!((last - 1.0).abs() < 1e-9);
        assert!((first - 0.8995).abs() < 1e-4);
    }

    #[test]
    fn profile_matches_cell_velocity() {
        let (a, s) = (presets::array(), presets::squid());
        let p = fig2_pulse();
        let prof = velocity_profile(&a, &s, &p, 1e-11).unwrap();
        assert_eq!(prof.len(), a.n_cells);
        for i in (0..prof.len()).step_by(373) {
            let flux = p.comoving_flux(prof.x[i], prof.t);
            let direct = cell_velocity(&a, &s, flux, 0.0).unwrap();
            assert!((prof.c[i] / direct - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_black_horizon_at_inverted_flux() {
        let p = fig2_pulse();
        let hs = find_horizons(&window(&p));
        assert_eq!(hs.len(), 1);
        assert_eq!(hs[0].kind, HorizonKind::Black);
        let flux = p.comoving_flux(hs[0].position, 0.0).as_quanta();
        let expected = (0.95f64 * 0.95).acos() / PI;
        assert!((flux - expected).abs() < 1e-9, "{flux} vs {expected}");
        assert!((flux - 0.1412).abs() < 1e-3);
    }

    #[test]
    fn no_horizon_when_pulse_outruns_line() {
        let p = FluxPulse::step(0.2, 0.0, 1.05 * c0(), 4e5, 0.0).unwrap();
        assert!(find_horizons(&window(&p)).is_empty());
        assert!(matches!(profile_temperature(&window(&p)), Err(Error::NoHorizon)));
    }

    #[test]
    fn gaussian_pulse_gives_black_white_pair() {
        let p = FluxPulse {
            shape: PulseShape::Gaussian,
            ..fig2_pulse()
        };
        let hs = find_horizons(&window(&p));
        assert_eq!(hs.len(), 2);
        assert_eq!(hs[0].kind, HorizonKind::White);
        assert_eq!(hs[1].kind, HorizonKind::Black);
        assert!((hs[0].temperature / hs[1].temperature - 1.0).abs() < 1e-6);
    }

    #[test]
    fn metric_identities() {
        let m = EffectiveMetric::new(2.0, 0.0);
        assert_eq!((m.tt, m.tx, m.xx), (0.25, 0.0, -1.0));
        let p = fig2_pulse();
        let prof = window(&p);
        let h = find_horizons(&prof)[0];
        let g = effective_metric(&prof, h.position).unwrap();
        assert!(g.xx.abs() <= 1e-10 * g.tt * p.velocity * p.velocity);
        assert!(effective_metric(&prof, prof.x[0] - 1.0).is_err());
        let before = effective_metric(&prof, h.position - prof.spacing).unwrap();
        let after = effective_metric(&prof, h.position + prof.spacing).unwrap();
        assert!(before.xx > 0.0 && after.xx < 0.0);
    }

    #[test]
    fn temperature_and_power_values() {
        assert!((hawking_temperature(1e11) - 0.1216).abs() < 5e-4);
        assert_eq!(hawking_temperature(0.0), 0.0);
        assert!((radiated_power(0.12) / 6.8e-15 - 1.0).abs() < 0.01);
        assert_eq!(radiated_power(0.0), 0.0);
        assert!((radiated_power(0.24) / radiated_power(0.12) - 4.0).abs() < 1e-12);
        assert_eq!(photon_rate(0.0), 0.0);
    }

    #[test]
    fn sampled_profiles_use_interpolation() {
        let x = vec![0.0, 1.0, 2.0, 3.0];
        let c = vec![1.0, 2.0, 3.0, 4.0];
        let prof = VelocityProfile::from_samples(x, c, 2.5, 0.0).unwrap();
        let h = find_horizons(&prof);
        assert_eq!(h.len(), 1);
        assert!((h[0].position - 1.5).abs() < 1e-15);
        assert!((h[0].velocity_gradient - 1.0).abs() < 1e-15);
        assert!(VelocityProfile::from_samples(vec![0.0, 0.0], vec![1.0, 1.0], 1.0, 0.0).is_err());
    }

    #[test]
    fn steepness_calibration_hits_target() {
        let (a, s) = (presets::array(), presets::squid());
        let p = calibrate_steepness(&a, &s, &fig2_pulse(), 1e11).unwrap();
        let h = pulse_horizon(&a, &s, &p, 0.0).unwrap();
        assert!((h.velocity_gradient / 1e11 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn photon_count_is_linear_in_length_without_broadening() {
        let (a, s) = (presets::array(), presets::squid());
        let p = fig2_pulse();
        let full = photons_per_pulse(&a, &s, &p, 4800).unwrap();
        let half = photons_per_pulse(&a, &s, &p, 2400).unwrap();
        assert!((full.photons / half.photons - 2.0).abs() < 1e-9);
    }
}
