//! Lattice dispersion relation `ω(k) = (2/√(LC₀))·|sin(ka/2)|` and its
//! measurement on the time-domain solver.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bias::{BiasField, FluxPulse, PulseShape};
use crate::circuit::{cell_velocity, ArrayParams, Flux, SquidParams};
use crate::error::{invalid, Error, Result};
use crate::lattice::{inject_sine, Boundary, LatticeState, LineModel, Simulation, SolverConfig};
use crate::numeric::{linear_fit, simpson};

/// Largest usable drive frequency as a fraction of the band edge.
pub const MAX_BAND_FRACTION: f64 = 0.95;
/// RMS phase residual (rad) above which a wavenumber fit is rejected.
pub const MAX_PHASE_RESIDUAL: f64 = 0.1;
/// Bias fronts with more than this fraction of their gradient power above
/// ka = 0.5 are flagged as too sharp for the continuum picture.
pub const FRONT_POWER_THRESHOLD: f64 = 1e-3;

fn check_band(k: f64, a: f64) -> Result<()> {
    let limit = PI / a;
    if !(k.abs() <= limit * (1.0 + 1e-12)) {
        return Err(Error::OutOfBand { k, limit });
    }
    Ok(())
}

pub fn omega_analytic(k: f64, inductance: f64, capacitance: f64, cell_length: f64) -> Result<f64> {
    check_band(k, cell_length)?;
    Ok(2.0 / (inductance * capacitance).sqrt() * (0.5 * k * cell_length).sin().abs())
}

/// dω/dk for k ≥ 0: `c·cos(ka/2)`.
pub fn group_velocity(k: f64, inductance: f64, capacitance: f64, cell_length: f64) -> Result<f64> {
    check_band(k, cell_length)?;
    let c = cell_length / (inductance * capacitance).sqrt();
    Ok(c * (0.5 * k * cell_length).cos())
}

/// Relative shortfall of ω(k) below the linear law ck: `1 − sin(ka/2)/(ka/2)`.
pub fn continuum_error(ka: f64) -> f64 {
    let h = 0.5 * ka.abs();
    if h < 1e-4 {
        h * h / 6.0
    } else {
        1.0 - h.sin() / h
    }
}

/// Short-distance scale `c/ω_p^s` below which the inductive description fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffScale {
    /// m.
    pub length: f64,
    pub cell_length: f64,
}

impl CutoffScale {
    pub fn ratio(&self) -> f64 {
        self.length / self.cell_length
    }

    /// Whether the cutoff lies above the lattice spacing.
    pub fn exceeds_cell(&self) -> bool {
        self.length > self.cell_length
    }
}

pub fn cutoff_scale(array: &ArrayParams, squid: &SquidParams, flux: Flux) -> Result<CutoffScale> {
    let c = cell_velocity(array, squid, flux, 0.0)?;
    let wp = squid.plasma_frequency(flux)?;
    Ok(CutoffScale {
        length: c / wp,
        cell_length: array.cell_length,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    /// 1/m.
    pub k: f64,
    pub omega_analytic: f64,
    pub omega_measured: Option<f64>,
}

impl DispersionPoint {
    pub fn rel_error(&self) -> Option<f64> {
        self.omega_measured
            .map(|w| (w - self.omega_analytic) / self.omega_analytic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionCurve {
    pub points: Vec<DispersionPoint>,
    /// H.
    pub inductance: f64,
    /// F.
    pub capacitance: f64,
    /// m.
    pub cell_length: f64,
}

impl DispersionCurve {
    /// Analytic curve on `n` evenly spaced wavenumbers in [0, π/a].
    pub fn analytic(inductance: f64, capacitance: f64, cell_length: f64, n: usize) -> Result<Self> {
        let k_max = PI / cell_length;
        let points = (0..n)
            .map(|i| {
                let k = if n > 1 { k_max * i as f64 / (n - 1) as f64 } else { 0.0 };
                Ok(DispersionPoint {
                    k,
                    omega_analytic: omega_analytic(k, inductance, capacitance, cell_length)?,
                    omega_measured: None,
                })
            })
            .collect::<Result<_>>()?;
        Ok(DispersionCurve { points, inductance, capacitance, cell_length })
    }

    pub fn band_edge(&self) -> f64 {
        2.0 / (self.inductance * self.capacitance).sqrt()
    }

    pub fn max_rel_error(&self) -> Option<f64> {
        self.points
            .iter()
            .filter_map(|p| p.rel_error())
            .map(f64::abs)
            .reduce(f64::max)
    }
}

/// Wavenumber of a steady drive, extracted from a lattice run.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PhaseFit {
    k: f64,
}

fn unwrap_phase(phases: &mut [f64]) {
    for i in 1..phases.len() {
        let mut d = phases[i] - phases[i - 1];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        phases[i] = phases[i - 1] + d;
    }
}

/// Drives a long uniform line at `omega` from the left end and fits the
/// spatial phase of the steady wave over at least twenty wavelengths.
fn measure_wavenumber(model: &LineModel, omega: f64) -> Result<PhaseFit> {
    let l = model.squid.linear_inductance(model.bias.flux(0.0, 0.0))?;
    let t_cell = (l * model.array.ground_capacitance).sqrt();
    let w = omega * t_cell;
    let ka = 2.0 * (0.5 * w).asin();
    let v_group = (0.5 * ka).cos();
    let wavelength = 2.0 * PI / ka;

    let fit_start = 16usize;
    let fit_len = ((20.0 * wavelength).ceil() as usize).max(64);
    let fit_end = fit_start + fit_len;

    // Whole number of steps per period, so demodulation over whole periods
    // removes the counter-rotating component exactly.
    let steps_per_period = ((2.0 * PI / (w * 0.1)).ceil() as usize).max(8);
    let period = 2.0 * PI / w;
    let dt = period / steps_per_period as f64;
    let ramp_periods = 20.0;
    let settle = ramp_periods * period + fit_end as f64 / v_group + 10.0 * period;
    let settle_periods = (settle / period).ceil() as usize;
    let window_periods = 10usize;
    let total = (settle_periods + window_periods) as f64 * period;
    // Keep the first reflection off the right end out of the fit window.
    let n_cells = ((v_group * total + fit_end as f64) / 2.0).ceil() as usize + 64;

    let mut model = *model;
    model.array = model.array.with_cells(n_cells);
    let mut drive = inject_sine(&model, 0, 1e-6, omega)?;
    drive.ramp_time = ramp_periods * 2.0 * PI / omega;
    let config = SolverConfig {
        dt: Some(dt * t_cell),
        n_steps: 0,
        courant_fraction: 0.5,
        boundary: Boundary::DrivenLeftAbsorbingRight,
        record_every: 1,
        current_dependent: false,
    };
    let mut sim = Simulation::new(model, &config, &LatticeState::zeros(n_cells), Some(drive))?;
    for _ in 0..settle_periods * steps_per_period {
        sim.step()?;
    }
    let mut re = vec![0.0; fit_len];
    let mut im = vec![0.0; fit_len];
    for _ in 0..window_periods * steps_per_period {
        sim.step()?;
        let (s, c) = (omega * sim.time()).sin_cos();
        let a = &sim.potentials()[fit_start..fit_end];
        for i in 0..fit_len {
            re[i] += a[i] * c;
            im[i] -= a[i] * s;
        }
    }
    let mut phase: Vec<f64> = re.iter().zip(&im).map(|(r, i)| i.atan2(*r)).collect();
    unwrap_phase(&mut phase);
    let nodes: Vec<f64> = (fit_start..fit_end).map(|n| n as f64).collect();
    let (slope, _, rms) = linear_fit(&nodes, &phase)
        .ok_or_else(|| Error::FitFailure("degenerate phase fit".into()))?;
    if !(rms <= MAX_PHASE_RESIDUAL) {
        return Err(Error::FitFailure(format!(
            "phase residual {rms:.3e} rad at omega = {omega:.6e} rad/s"
        )));
    }
    Ok(PhaseFit { k: -slope / model.array.cell_length })
}

/// Measures ω(k) on a uniformly biased line, one lattice run per drive
/// frequency (run in parallel), and pairs each with the analytic curve at
/// the measured wavenumber. Points are sorted by k.
pub fn measure_dispersion(
    array: &ArrayParams,
    squid: &SquidParams,
    flux_dc: Flux,
    frequencies: &[f64],
) -> Result<DispersionCurve> {
    let l = squid.linear_inductance(flux_dc.check_domain()?)?;
    let c0 = array.ground_capacitance;
    let limit = MAX_BAND_FRACTION * 2.0 / (l * c0).sqrt();
    for &omega in frequencies {
        if !(omega > 0.0 && omega <= limit) {
            return Err(Error::BandLimit { omega, limit });
        }
    }
    let model = LineModel::new(*array, *squid, BiasField::uniform(flux_dc))?;
    let mut points = frequencies
        .par_iter()
        .map(|&omega| {
            let fit = measure_wavenumber(&model, omega)?;
            Ok(DispersionPoint {
                k: fit.k,
                omega_analytic: omega_analytic(fit.k, l, c0, array.cell_length)?,
                omega_measured: Some(omega),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.k.total_cmp(&b.k));
    Ok(DispersionCurve { points, inductance: l, capacitance: c0, cell_length: array.cell_length })
}

/// Drive frequency whose lattice wavenumber is `ka / a` on a line with
/// inductance `l`.
pub fn frequency_for_ka(ka: f64, inductance: f64, capacitance: f64) -> f64 {
    2.0 / (inductance * capacitance).sqrt() * (0.5 * ka).sin()
}

/// Share of a pulse front's gradient power at wavenumbers above ka = 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontSpectrum {
    pub power_above_limit: f64,
    pub flagged: bool,
}

pub fn front_spectrum(pulse: &FluxPulse, cell_length: f64, t: f64) -> FrontSpectrum {
    let s = pulse.steepness_at(t);
    let k_lim = 0.5 / cell_length;
    // Gradient power spectra of the two front shapes, in a scaled variable y,
    // with their total integrals.
    let (y0, density, total): (f64, fn(f64) -> f64, f64) = match pulse.shape {
        PulseShape::Step => (
            0.5 * PI * k_lim / s,
            |y| if y == 0.0 { 1.0 } else { (y / y.sinh()).powi(2) },
            PI * PI / 6.0,
        ),
        PulseShape::Gaussian => (k_lim / s, |y| y * y * (-y * y).exp(), 0.25 * PI.sqrt()),
    };
    let n = 4000;
    let h = 40.0 / n as f64;
    let samples: Vec<f64> = (0..=n).map(|i| density(y0 + i as f64 * h)).collect();
    let tail = simpson(&samples, h) / total;
    FrontSpectrum { power_above_limit: tail, flagged: tail > FRONT_POWER_THRESHOLD }
}

/// Checks a list of ka values for the [0, π] band.
pub fn validate_ka(values: &[f64]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && **v <= PI)) {
        return Err(invalid(format!("ka = {v} outside (0, π]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::presets;

    const L: f64 = 8.228e-11;
    const C: f64 = 5e-17;
    const A: f64 = 0.25e-6;

    #[test]
    fn analytic_values() {
        assert_eq!(omega_analytic(0.0, L, C, A).unwrap(), 0.0);
        let edge = omega_analytic(PI / A, L, C, A).unwrap();
        assert!((edge - 2.0 / (L * C).sqrt()).abs() / edge < 1e-14);
        let k = 0.3 / A;
        let c = A / (L * C).sqrt();
        let ratio = omega_analytic(k, L, C, A).unwrap() / (c * k);
        assert!((ratio - 0.99626).abs() < 1e-5);
        assert!(matches!(omega_analytic(1.01 * PI / A, L, C, A), Err(Error::OutOfBand { .. })));
        assert_eq!(omega_analytic(-k, L, C, A).unwrap(), omega_analytic(k, L, C, A).unwrap());
    }

    #[test]
    fn group_velocity_matches_finite_difference() {
        let k = 0.2 / A;
        let h = 1e-5 * k;
        let fd = (omega_analytic(k + h, L, C, A).unwrap() - omega_analytic(k - h, L, C, A).unwrap()) / (2.0 * h);
        let g = group_velocity(k, L, C, A).unwrap();
        assert!((fd - g).abs() / g < 1e-8);
        assert!(group_velocity(PI / A, L, C, A).unwrap().abs() < 1e-6);
        let c = A / (L * C).sqrt();
        assert!((group_velocity(0.0, L, C, A).unwrap() - c).abs() / c < 1e-15);
    }

    #[test]
    fn cutoff_is_above_cell() {
        let s = cutoff_scale(&presets::array(), &presets::squid(), Flux::ZERO).unwrap();
        assert!((s.length - 0.62e-6).abs() < 0.005e-6, "{}", s.length);
        assert!(s.exceeds_cell());
        let s2 = cutoff_scale(&presets::array(), &presets::squid(), Flux::quanta(0.2)).unwrap();
        assert!((s2.length - s.length).abs() / s.length < 1e-12);
        // Refining the lattice at fixed wave speed leaves c/ω_p unchanged.
        let base = presets::array();
        let fine = ArrayParams {
            cell_length: base.cell_length * 1e-6,
            ground_capacitance: base.ground_capacitance * 1e-12,
            ..base
        };
        let f = cutoff_scale(&fine, &presets::squid(), Flux::ZERO).unwrap();
        assert!((f.length - s.length).abs() / s.length < 1e-9);
        assert!(f.ratio() > 1e6);
    }

    #[test]
    fn continuum_error_is_monotone() {
        let mut prev = 0.0;
        for i in 1..=100 {
            let e = continuum_error(PI * i as f64 / 100.0);
            assert!(e > prev);
            prev = e;
        }
        assert!((continuum_error(0.3) - (1.0 - 0.15f64.sin() / 0.15)).abs() < 1e-15);
    }

    #[test]
    fn empty_measurement() {
        let c = measure_dispersion(&presets::array(), &presets::squid(), Flux::ZERO, &[]).unwrap();
        assert!(c.points.is_empty());
        assert!(c.max_rel_error().is_none());
    }

    #[test]
    fn out_of_band_drive_rejected() {
        let l = presets::squid().linear_inductance(Flux::ZERO).unwrap();
        let w = 0.99 * 2.0 / (l * C).sqrt();
        assert!(matches!(
            measure_dispersion(&presets::array(), &presets::squid(), Flux::ZERO, &[w]),
            Err(Error::BandLimit { .. })
        ));
    }

    #[test]
    fn analytic_curve_is_monotone() {
        let c = DispersionCurve::analytic(L, C, A, 65).unwrap();
        assert_eq!(c.points[0].omega_analytic, 0.0);
        assert!(c.points.windows(2).all(|w| w[1].omega_analytic >= w[0].omega_analytic));
        assert!((c.points[64].omega_analytic - c.band_edge()).abs() / c.band_edge() < 1e-14);
    }

    #[test]
    fn sharp_fronts_are_flagged() {
        let a = presets::CELL_LENGTH;
        let smooth = FluxPulse::step(0.2, 0.0, 3.7e6, 4.4e5, 0.0).unwrap();
        assert!(!front_spectrum(&smooth, a, 0.0).flagged);
        let sharp = smooth.with_steepness(2.0 / a).unwrap();
        assert!(front_spectrum(&sharp, a, 0.0).flagged);
        let g = FluxPulse::gaussian(0.2, 0.0, 3.7e6, 0.05 / a, 0.0).unwrap();
        assert!(!front_spectrum(&g, a, 0.0).flagged);
        let g = g.with_steepness(1.0 / a).unwrap();
        assert!(front_spectrum(&g, a, 0.0).flagged);
    }
}
