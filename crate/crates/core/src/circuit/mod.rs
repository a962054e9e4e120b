//! Junction and dc-SQUID physics.
//!
//! A dc-SQUID with a small loop (β_L ≪ 1) behaves as a single Josephson
//! junction whose critical current is tuned by the external flux,
//! `I_c^s(Φ) = 2 I_c cos(πΦ/Φ₀)`. Below the plasma frequency and the critical
//! current each junction acts as a passive nonlinear inductor; this module
//! provides that inductance, the derived energies and impedances, the
//! semiclassical validity audit, and ODE integrators for the full and reduced
//! SQUID phase dynamics.

mod dynamics;
mod validity;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{ELECTRON_CHARGE, FLUX_QUANTUM, RESISTANCE_QUANTUM};
use crate::error::{invalid, Error, Result};

pub use dynamics::{
    reduced_junction_dynamics, single_squid_dynamics, static_gamma_minus, ReducedTrajectory,
    SquidState,
};
pub use validity::{validity_report, validity_report_with, Comparison, ValidityCheck, ValidityReport, ValidityThresholds};

/// Below this |I/I_c^s| the arcsin(x)/x factor is replaced by its series.
const SMALL_RATIO: f64 = 1e-6;

/// External magnetic flux through a SQUID loop.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct Flux(f64);

impl Flux {
    pub const ZERO: Flux = Flux(0.0);

    pub fn webers(value: f64) -> Self {
        Flux(value)
    }

    /// Flux given in units of the flux quantum Φ₀.
    pub fn quanta(fraction: f64) -> Self {
        Flux(fraction * FLUX_QUANTUM)
    }

    pub fn as_webers(self) -> f64 {
        self.0
    }

    pub fn as_quanta(self) -> f64 {
        self.0 / FLUX_QUANTUM
    }

    /// Fails with `FluxOutOfRange` unless |Φ| < Φ₀/2.
    pub fn check_domain(self) -> Result<Self> {
        let q = self.as_quanta();
        if q.is_finite() && q.abs() < 0.5 {
            Ok(self)
        } else {
            Err(Error::FluxOutOfRange { quanta: q })
        }
    }

    /// cos(πΦ/Φ₀), the flux modulation factor of the SQUID critical current.
    pub fn modulation(self) -> Result<f64> {
        self.check_domain()
            .map(|f| (PI * f.as_quanta()).cos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionParams {
    /// I_c, A.
    pub critical_current: f64,
    /// C_J, F.
    pub capacitance: f64,
    /// R_N, Ω. Only enters the damping term of the full SQUID equations.
    pub normal_resistance: Option<f64>,
}

impl JunctionParams {
    pub fn new(critical_current: f64, capacitance: f64) -> Result<Self> {
        let junction = JunctionParams {
            critical_current,
            capacitance,
            normal_resistance: None,
        };
        junction.validate()?;
        Ok(junction)
    }

    /// Junction whose capacitance reproduces the plasma frequency
    /// `ω_p = √(2π I_c / (C_J Φ₀))`.
    pub fn from_plasma_frequency(critical_current: f64, plasma_frequency: f64) -> Result<Self> {
        if !(plasma_frequency > 0.0) {
            return Err(invalid("plasma frequency must be positive"));
        }
        let capacitance =
            2.0 * PI * critical_current / (FLUX_QUANTUM * plasma_frequency * plasma_frequency);
        Self::new(critical_current, capacitance)
    }

    pub fn with_normal_resistance(mut self, resistance: f64) -> Result<Self> {
        self.normal_resistance = Some(resistance);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.critical_current > 0.0 && self.critical_current.is_finite()) {
            return Err(invalid("junction critical current must be positive"));
        }
        if !(self.capacitance > 0.0 && self.capacitance.is_finite()) {
            return Err(invalid("junction capacitance must be positive"));
        }
        if let Some(r) = self.normal_resistance {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("junction normal resistance must be positive"));
            }
        }
        Ok(())
    }

    /// ω_p = √(2π I_c / (C_J Φ₀)), rad/s.
    pub fn plasma_frequency(&self) -> f64 {
        (2.0 * PI * self.critical_current / (self.capacitance * FLUX_QUANTUM)).sqrt()
    }

    /// ω_c = 2π I_c R_N / Φ₀, rad/s; `None` when the junction is undamped.
    pub fn characteristic_frequency(&self) -> Option<f64> {
        self.normal_resistance
            .map(|r| 2.0 * PI * self.critical_current * r / FLUX_QUANTUM)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquidParams {
    pub junction: JunctionParams,
    /// Geometric loop inductance, H.
    pub loop_inductance: f64,
}

impl SquidParams {
    pub fn new(junction: JunctionParams, loop_inductance: f64) -> Result<Self> {
        let squid = SquidParams {
            junction,
            loop_inductance,
        };
        squid.validate()?;
        Ok(squid)
    }

    pub fn validate(&self) -> Result<()> {
        self.junction.validate()?;
        if !(self.loop_inductance >= 0.0 && self.loop_inductance.is_finite()) {
            return Err(invalid("loop inductance must be non-negative"));
        }
        Ok(())
    }

    /// β_L = 2π L_loop I_c / Φ₀.
    pub fn beta_l(&self) -> f64 {
        2.0 * PI * self.loop_inductance * self.junction.critical_current / FLUX_QUANTUM
    }

    /// I_c^s(Φ) = 2 I_c cos(πΦ/Φ₀).
    pub fn critical_current(&self, flux: Flux) -> Result<f64> {
        Ok(2.0 * self.junction.critical_current * flux.modulation()?)
    }

    /// ω_p^s(Φ) = √(2π I_c^s / (2 C_J Φ₀)).
    pub fn plasma_frequency(&self, flux: Flux) -> Result<f64> {
        let ic = self.critical_current(flux)?;
        Ok((2.0 * PI * ic / (2.0 * self.junction.capacitance * FLUX_QUANTUM)).sqrt())
    }

    /// Josephson inductance `Φ₀ arcsin(I/I_c^s) / (2π I)`.
    ///
    /// This is the dimensionally consistent form of the junction inductance;
    /// at `I → 0` it tends to `Φ₀ / (2π I_c^s)`, which is used directly for
    /// `|I/I_c^s| < 1e-6`.
    pub fn inductance(&self, current: f64, flux: Flux) -> Result<f64> {
        let ic = self.critical_current(flux)?;
        let ratio = current / ic;
        if !(ratio.abs() <= 1.0) {
            return Err(Error::OverCritical {
                current,
                critical: ic,
            });
        }
        Ok(FLUX_QUANTUM / (2.0 * PI * ic) * arcsin_over_x(ratio))
    }

    /// Lowest-order (zero current) inductance.
    pub fn linear_inductance(&self, flux: Flux) -> Result<f64> {
        self.inductance(0.0, flux)
    }

    /// Josephson energy E_J = Φ₀ I_c^s / 2π and charging energy E_C = e²/4C_J.
    pub fn energies(&self, flux: Flux) -> Result<Energies> {
        let ic = self.critical_current(flux)?;
        Ok(Energies {
            josephson: FLUX_QUANTUM * ic / (2.0 * PI),
            charging: ELECTRON_CHARGE * ELECTRON_CHARGE / (4.0 * self.junction.capacitance),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energies {
    pub josephson: f64,
    pub charging: f64,
}

impl Energies {
    pub fn ratio(&self) -> f64 {
        self.josephson / self.charging
    }
}

fn arcsin_over_x(x: f64) -> f64 {
    if x.abs() < SMALL_RATIO {
        1.0 + x * x / 6.0
    } else {
        x.asin() / x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayParams {
    pub n_cells: usize,
    /// Cell length a, m.
    pub cell_length: f64,
    /// Capacitance to ground per cell C₀, F.
    pub ground_capacitance: f64,
    /// Lead impedance Z_E, Ω.
    pub environment_impedance: f64,
}

impl ArrayParams {
    pub fn new(
        n_cells: usize,
        cell_length: f64,
        ground_capacitance: f64,
        environment_impedance: f64,
    ) -> Result<Self> {
        let array = ArrayParams {
            n_cells,
            cell_length,
            ground_capacitance,
            environment_impedance,
        };
        array.validate()?;
        Ok(array)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 2 {
            return Err(invalid("array needs at least two cells"));
        }
        if !(self.cell_length > 0.0 && self.cell_length.is_finite()) {
            return Err(invalid("cell length must be positive"));
        }
        if !(self.ground_capacitance > 0.0 && self.ground_capacitance.is_finite()) {
            return Err(invalid("ground capacitance must be positive"));
        }
        if !(self.environment_impedance >= 0.0 && self.environment_impedance.is_finite()) {
            return Err(invalid("environment impedance must be non-negative"));
        }
        Ok(())
    }

    pub fn with_cells(mut self, n_cells: usize) -> Self {
        self.n_cells = n_cells;
        self
    }
}

/// Propagation velocity `c = a / √(L C₀)` of a cell at the given flux and current.
pub fn cell_velocity(array: &ArrayParams, squid: &SquidParams, flux: Flux, current: f64) -> Result<f64> {
    let l = squid.inductance(current, flux)?;
    Ok(array.cell_length / (l * array.ground_capacitance).sqrt())
}

/// Array impedance seen by a single junction,
/// `Z_A = R_Q √(2πe² / (Φ₀ C₀ I_c) · sec(πΦ/Φ₀))`.
pub fn array_impedance(array: &ArrayParams, squid: &SquidParams, flux: Flux) -> Result<f64> {
    let m = flux.modulation()?;
    let base = 2.0 * PI * ELECTRON_CHARGE * ELECTRON_CHARGE
        / (FLUX_QUANTUM * array.ground_capacitance * squid.junction.critical_current);
    Ok(RESISTANCE_QUANTUM * (base / m).sqrt())
}

/// Parameters used by the experimental-realization estimates: I_c = 2 μA,
/// ω_p = 2π × 10¹² rad/s, C₀ = 5 × 10⁻¹⁷ F, a = 0.25 μm.
pub mod presets {
    use super::*;

    pub const CRITICAL_CURRENT: f64 = 2e-6;
    pub const PLASMA_FREQUENCY_HZ: f64 = 1e12;
    pub const GROUND_CAPACITANCE: f64 = 5e-17;
    pub const CELL_LENGTH: f64 = 0.25e-6;
    pub const LOOP_INDUCTANCE: f64 = 1e-12;
    pub const ENVIRONMENT_IMPEDANCE: f64 = 50.0;
    pub const N_CELLS: usize = 4800;

    pub fn junction() -> JunctionParams {
        JunctionParams::from_plasma_frequency(CRITICAL_CURRENT, 2.0 * PI * PLASMA_FREQUENCY_HZ)
            .expect("preset junction is valid")
    }

    pub fn squid() -> SquidParams {
        SquidParams::new(junction(), LOOP_INDUCTANCE).expect("preset squid is valid")
    }

    pub fn array() -> ArrayParams {
        ArrayParams::new(N_CELLS, CELL_LENGTH, GROUND_CAPACITANCE, ENVIRONMENT_IMPEDANCE)
            .expect("preset array is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;
    use approx::assert_relative_eq;

    fn squid_with_ic(ic: f64) -> SquidParams {
        SquidParams::new(JunctionParams::new(ic, 1.539e-16).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn critical_current_examples() {
        let s = squid_with_ic(2e-6);
        assert_relative_eq!(s.critical_current(Flux::ZERO).unwrap(), 4e-6, max_relative = 1e-15);
        let expected = 4e-6 * (0.2 * PI).cos();
        assert_relative_eq!(s.critical_current(Flux::quanta(0.2)).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 3.236e-6, max_relative = 1e-4);
        assert!(matches!(
            s.critical_current(Flux::quanta(0.5)),
            Err(Error::FluxOutOfRange { .. })
        ));
        assert!(s.critical_current(Flux::quanta(-0.5)).is_err());
    }

    #[test]
    fn plasma_frequency_examples() {
        let s = squid_with_ic(2e-6);
        let w0 = s.plasma_frequency(Flux::ZERO).unwrap();
        assert!((w0 / (2.0 * PI * 1e12) - 1.0).abs() < 5e-3);
        let w2 = s.plasma_frequency(Flux::quanta(0.2)).unwrap();
        assert_relative_eq!(w2 / w0, 0.8995, max_relative = 1e-4);
        let heavy = SquidParams::new(JunctionParams::new(2e-6, 4.0 * 1.539e-16).unwrap(), 0.0).unwrap();
        assert_relative_eq!(heavy.plasma_frequency(Flux::ZERO).unwrap(), w0 / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn preset_capacitance_back_computed() {
        let j = presets::junction();
        assert_relative_eq!(j.capacitance, 1.539e-16, max_relative = 1e-3);
        assert_relative_eq!(j.plasma_frequency(), 2.0 * PI * 1e12, max_relative = 1e-12);
    }

    #[test]
    fn inductance_examples() {
        let s = squid_with_ic(2e-6);
        let l0 = s.inductance(1e-12, Flux::ZERO).unwrap();
        assert_relative_eq!(l0, 82.28e-12, max_relative = 1e-4);
        assert_relative_eq!(l0, FLUX_QUANTUM / (2.0 * PI * 4e-6), max_relative = 1e-12);
        let lc = s.inductance(4e-6, Flux::ZERO).unwrap();
        assert_relative_eq!(lc, PI / 2.0 * l0, max_relative = 1e-12);
        assert!(matches!(
            s.inductance(4.4e-6, Flux::ZERO),
            Err(Error::OverCritical { .. })
        ));
    }

    #[test]
    fn inductance_series_is_continuous() {
        let s = squid_with_ic(2e-6);
        let ic = 4e-6;
        let below = s.inductance(0.999e-6 * ic, Flux::ZERO).unwrap();
        let above = s.inductance(1.001e-6 * ic, Flux::ZERO).unwrap();
        assert_relative_eq!(below, above, max_relative = 1e-12);
    }

    #[test]
    fn velocity_examples() {
        let s = squid();
        let a = array();
        let c0 = cell_velocity(&a, &s, Flux::ZERO, 0.0).unwrap();
        assert_relative_eq!(c0, 3.90e6, max_relative = 3e-3);
        let c2 = cell_velocity(&a, &s, Flux::quanta(0.2), 0.0).unwrap();
        assert_relative_eq!(c2 / c0, (0.2 * PI).cos().sqrt(), max_relative = 1e-12);
        let heavy = ArrayParams { ground_capacitance: 4.0 * a.ground_capacitance, ..a };
        assert_relative_eq!(cell_velocity(&heavy, &s, Flux::ZERO, 0.0).unwrap(), c0 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn energy_examples() {
        let s = squid();
        let e = s.energies(Flux::ZERO).unwrap();
        assert_relative_eq!(e.josephson, 1.316e-21, max_relative = 1e-3);
        assert_relative_eq!(e.charging, 4.17e-23, max_relative = 2e-3);
        assert!((e.ratio() - 31.6).abs() < 0.1);
        let near = s.energies(Flux::quanta(0.4999999)).unwrap();
        assert!(near.josephson > 0.0 && near.josephson < 1e-27);
        let mut fat = s;
        fat.junction.capacitance *= 2.0;
        let e2 = fat.energies(Flux::ZERO).unwrap();
        assert_relative_eq!(e2.charging, e.charging / 2.0, max_relative = 1e-14);
        assert_eq!(e2.josephson, e.josephson);
    }

    #[test]
    fn beta_l_examples() {
        let j = JunctionParams::new(2e-6, 1e-16).unwrap();
        assert_eq!(SquidParams::new(j, 0.0).unwrap().beta_l(), 0.0);
        assert_relative_eq!(SquidParams::new(j, 10e-12).unwrap().beta_l(), 0.0608, max_relative = 1e-3);
        assert_relative_eq!(SquidParams::new(j, 1e-9).unwrap().beta_l(), 6.08, max_relative = 1e-3);
    }

    #[test]
    fn impedance_examples() {
        let s = squid();
        let a = array();
        let z0 = array_impedance(&a, &s, Flux::ZERO).unwrap();
        assert_relative_eq!(z0 / RESISTANCE_QUANTUM, 0.883, max_relative = 1e-3);
        assert!((z0 - 5.70e3).abs() < 10.0);
        let big = ArrayParams { ground_capacitance: 1e-16, ..a };
        assert_relative_eq!(array_impedance(&big, &s, Flux::ZERO).unwrap() / RESISTANCE_QUANTUM, 0.624, max_relative = 1e-3);
        let z45 = array_impedance(&a, &s, Flux::quanta(0.45)).unwrap();
        assert_relative_eq!(z45 / RESISTANCE_QUANTUM, 2.23, max_relative = 2e-3);
        assert!(array_impedance(&a, &s, Flux::quanta(0.5)).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(JunctionParams::new(0.0, 1e-16).is_err());
        assert!(JunctionParams::new(1e-6, -1.0).is_err());
        assert!(ArrayParams::new(1, 1e-6, 1e-17, 0.0).is_err());
        assert!(ArrayParams::new(10, 1e-6, 1e-17, -1.0).is_err());
        assert!(JunctionParams::new(1e-6, 1e-16).unwrap().with_normal_resistance(0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn critical_current_even_and_decreasing(f in 0.0f64..0.49, df in 1e-4f64..0.009) {
                let s = squid();
                let a = s.critical_current(Flux::quanta(f)).unwrap();
                prop_assert_eq!(a, s.critical_current(Flux::quanta(-f)).unwrap());
                let b = s.critical_current(Flux::quanta(f + df)).unwrap();
                prop_assert!(b < a);
            }

            #[test]
            fn inductance_even_and_increasing(x in 0.0f64..0.99, dx in 1e-3f64..0.01, f in -0.45f64..0.45) {
                let s = squid();
                let flux = Flux::quanta(f);
                let ic = s.critical_current(flux).unwrap();
                let l1 = s.inductance(x * ic, flux).unwrap();
                prop_assert_eq!(l1, s.inductance(-x * ic, flux).unwrap());
                let l2 = s.inductance((x + dx) * ic, flux).unwrap();
                prop_assert!(l2 > l1);
                let product = s.linear_inductance(flux).unwrap() * ic;
                prop_assert!((product / (FLUX_QUANTUM / (2.0 * PI)) - 1.0).abs() < 1e-14);
            }

            #[test]
            fn impedance_secant_identity(f in -0.49f64..0.49) {
                let s = squid();
                let a = array();
                let z = array_impedance(&a, &s, Flux::quanta(f)).unwrap();
                let z0 = array_impedance(&a, &s, Flux::ZERO).unwrap();
                let invariant = z * z * (PI * f).cos();
                prop_assert!((invariant / (z0 * z0) - 1.0).abs() < 1e-12);
            }

            #[test]
            fn impedance_monotone_in_flux(f in 0.0f64..0.48, df in 1e-4f64..0.01) {
                let s = squid();
                let a = array();
                let lo = array_impedance(&a, &s, Flux::quanta(f)).unwrap();
                let hi = array_impedance(&a, &s, Flux::quanta(f + df)).unwrap();
                prop_assert!(hi > lo);
            }
        }
    }
}
