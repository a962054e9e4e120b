//! Physical constants (CODATA 2018 exact and recommended values).

use std::f64::consts::PI;

/// SI constants used throughout the toolkit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Φ₀ = h/2e, Wb.
    pub flux_quantum: f64,
    /// e, C.
    pub electron_charge: f64,
    /// ħ, J·s.
    pub reduced_planck: f64,
    /// k_B, J/K.
    pub boltzmann: f64,
    /// R_Q = h/4e², Ω.
    pub resistance_quantum: f64,
    /// c₀, m/s.
    pub vacuum_light_speed: f64,
}

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELECTRON_CHARGE);
pub const REDUCED_PLANCK: f64 = PLANCK / (2.0 * PI);
pub const RESISTANCE_QUANTUM: f64 = PLANCK / (4.0 * ELECTRON_CHARGE * ELECTRON_CHARGE);

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    flux_quantum: FLUX_QUANTUM,
    electron_charge: ELECTRON_CHARGE,
    reduced_planck: REDUCED_PLANCK,
    boltzmann: BOLTZMANN,
    resistance_quantum: RESISTANCE_QUANTUM,
    vacuum_light_speed: SPEED_OF_LIGHT,
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA_2018
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resistance_quantum_matches_nominal() {
        let rel = (RESISTANCE_QUANTUM - 6450.0).abs() / 6450.0;
        assert!(rel < 1e-3, "R_Q = {RESISTANCE_QUANTUM}");
    }

    #[test]
    fn flux_quantum_value() {
        assert!((FLUX_QUANTUM - 2.067_833_848e-15).abs() < 1e-23);
    }

    #[test]
    fn all_positive() {
        let c = CODATA_2018;
        for v in [
            c.flux_quantum,
            c.electron_charge,
            c.reduced_planck,
            c.boltzmann,
            c.resistance_quantum,
            c.vacuum_light_speed,
        ] {
            assert!(v > 0.0 && v.is_finite());
        }
    }
}
