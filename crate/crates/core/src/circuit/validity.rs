use std::fmt;

use serde::{Deserialize, Serialize};

use super::{array_impedance, cell_velocity, ArrayParams, Flux, SquidParams};
use crate::bias::FluxPulse;
use crate::constants::RESISTANCE_QUANTUM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    LessThan,
    GreaterThan,
}

impl Comparison {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtMost => value <= threshold,
            Comparison::LessThan => value < threshold,
            Comparison::GreaterThan => value > threshold,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparison::AtMost => "<=",
            Comparison::LessThan => "<",
            Comparison::GreaterThan => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityCheck {
    pub name: String,
    /// Dimensionless quantity being audited.
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl ValidityCheck {
    fn new(name: &str, value: f64, comparison: Comparison, threshold: f64) -> Self {
        ValidityCheck {
            name: name.to_string(),
            value,
            threshold,
            comparison,
            pass: comparison.holds(value, threshold),
        }
    }

    /// Signed distance to the threshold; positive when the check passes.
    pub fn margin(&self) -> f64 {
        match self.comparison {
            Comparison::AtMost | Comparison::LessThan => self.threshold - self.value,
            Comparison::GreaterThan => self.value - self.threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityThresholds {
    pub max_beta_l: f64,
    /// Largest allowed ω / ω_p^s(Φ_max).
    pub max_signal_fraction: f64,
    /// Largest allowed peak flux, in Φ₀.
    pub max_flux_quanta: f64,
    /// Largest allowed (Z_E + Z_A) / R_Q.
    pub max_impedance_ratio: f64,
    pub min_energy_ratio: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        ValidityThresholds {
            max_beta_l: 0.1,
            max_signal_fraction: 0.1,
            max_flux_quanta: 0.45,
            max_impedance_ratio: 1.0,
            min_energy_ratio: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub checks: Vec<ValidityCheck>,
}

impl ValidityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&ValidityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidityCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<18} {:>12} {:>4} {:>10} {:>12}  status",
            "check", "value", "", "threshold", "margin"
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<18} {:>12.5e} {:>4} {:>10.4} {:>12.4e}  {}",
                c.name,
                c.value,
                c.comparison.symbol(),
                c.threshold,
                c.margin(),
                if c.pass { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Audits the assumptions behind the inductive, semiclassical array model
/// for a given pulse. Failures are reported, never raised.
pub fn validity_report(
    array: &ArrayParams,
    squid: &SquidParams,
    pulse: &FluxPulse,
    max_signal_frequency: f64,
) -> ValidityReport {
    validity_report_with(array, squid, pulse, max_signal_frequency, &ValidityThresholds::default())
}

pub fn validity_report_with(
    array: &ArrayParams,
    squid: &SquidParams,
    pulse: &FluxPulse,
    max_signal_frequency: f64,
    limits: &ValidityThresholds,
) -> ValidityReport {
    let peak = pulse.peak_flux();
    let dc = Flux::quanta(pulse.dc_offset);
    let or_inf = |r: crate::Result<f64>| r.unwrap_or(f64::INFINITY);

    let signal = or_inf(squid.plasma_frequency(peak).map(|w| max_signal_frequency / w));
    let impedance = or_inf(
        array_impedance(array, squid, peak)
            .map(|z| (array.environment_impedance + z) / RESISTANCE_QUANTUM),
    );
    let energy_ratio = squid.energies(peak).map(|e| e.ratio()).unwrap_or(0.0);
    let velocity = or_inf(cell_velocity(array, squid, dc, 0.0).map(|c| pulse.velocity / c));

    ValidityReport {
        checks: vec![
            ValidityCheck::new("beta_l", squid.beta_l(), Comparison::AtMost, limits.max_beta_l),
            ValidityCheck::new(
                "signal_frequency",
                signal,
                Comparison::AtMost,
                limits.max_signal_fraction,
            ),
            ValidityCheck::new(
                "peak_flux",
                peak.as_quanta().abs(),
                Comparison::AtMost,
                limits.max_flux_quanta,
            ),
            ValidityCheck::new(
                "impedance",
                impedance,
                Comparison::LessThan,
                limits.max_impedance_ratio,
            ),
            ValidityCheck::new(
                "energy_ratio",
                energy_ratio,
                Comparison::GreaterThan,
                limits.min_energy_ratio,
            ),
            ValidityCheck::new("pulse_velocity", velocity, Comparison::LessThan, 1.0),
        ],
    }
}
