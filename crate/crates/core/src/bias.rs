//! External flux bias Φ_ext(x, t).
//!
//! The canonical bias is a tanh step travelling at velocity `u`, with the
//! flux high behind the front and low ahead of it:
//!
//! ```text
//! Φ(x, t) = Φ₀ [dc + (amp/2)(1 − tanh(s(t)(x − x₀ − ut)))],   s(t) = s₀ / (1 + b·u·t)
//! ```
//!
//! `b` is a phenomenological broadening rate standing in for dispersion on
//! the bias line: the front width grows linearly with distance travelled.

use serde::{Deserialize, Serialize};

use crate::circuit::{ArrayParams, Flux, SquidParams};
use crate::error::{invalid, Error, Result};
use crate::geometry;
use crate::numeric::bisect;

/// Upper end of the bracket searched by [`calibrate_broadening`], 1/m.
pub const MAX_BROADENING_RATE: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    /// Step-like tanh front: a single (black-hole) horizon.
    #[default]
    Step,
    /// Gaussian bump `amp·exp(−(s·ξ)²/2)`: produces a black/white horizon pair.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxPulse {
    pub shape: PulseShape,
    /// Pulse height, in Φ₀.
    pub amplitude: f64,
    /// Uniform background flux, in Φ₀.
    pub dc_offset: f64,
    /// u, m/s.
    pub velocity: f64,
    /// s₀, 1/m.
    pub steepness: f64,
    /// x₀, lab-frame front position at t = 0, m.
    pub front_position: f64,
    /// b, fractional width growth per metre travelled, 1/m.
    pub broadening_rate: f64,
}

impl FluxPulse {
    pub fn step(
        amplitude: f64,
        dc_offset: f64,
        velocity: f64,
        steepness: f64,
        front_position: f64,
    ) -> Result<Self> {
        let pulse = FluxPulse {
            shape: PulseShape::Step,
            amplitude,
            dc_offset,
            velocity,
            steepness,
            front_position,
            broadening_rate: 0.0,
        };
        pulse.validate()?;
        Ok(pulse)
    }

    pub fn gaussian(
        amplitude: f64,
        dc_offset: f64,
        velocity: f64,
        steepness: f64,
        front_position: f64,
    ) -> Result<Self> {
        let pulse = FluxPulse {
            shape: PulseShape::Gaussian,
            ..Self::step(amplitude, dc_offset, velocity, steepness, front_position)?
        };
        Ok(pulse)
    }

    pub fn with_broadening(mut self, rate: f64) -> Result<Self> {
        self.broadening_rate = rate;
        self.validate()?;
        Ok(self)
    }

    pub fn with_steepness(mut self, steepness: f64) -> Result<Self> {
        self.steepness = steepness;
        self.validate()?;
        Ok(self)
    }

    pub fn with_velocity(mut self, velocity: f64) -> Result<Self> {
        self.velocity = velocity;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let peak = self.dc_offset + self.amplitude;
        if !(self.dc_offset >= 0.0 && self.amplitude >= 0.0 && peak < 0.5) {
            return Err(invalid(format!(
                "pulse flux must satisfy 0 <= dc_offset, 0 <= amplitude and dc_offset + amplitude < 0.5 (got {} + {})",
                self.dc_offset, self.amplitude
            )));
        }
        if !(self.velocity > 0.0 && self.velocity.is_finite()) {
            return Err(invalid("pulse velocity must be positive"));
        }
        if !(self.steepness > 0.0 && self.steepness.is_finite()) {
            return Err(invalid("pulse steepness must be positive"));
        }
        if !(self.broadening_rate >= 0.0 && self.broadening_rate.is_finite()) {
            return Err(invalid("broadening rate must be non-negative"));
        }
        if !self.front_position.is_finite() {
            return Err(invalid("front position must be finite"));
        }
        Ok(())
    }

    /// s(t) = s₀ / (1 + b·u·t).
    pub fn steepness_at(&self, t: f64) -> f64 {
        self.steepness / (1.0 + self.broadening_rate * self.velocity * t)
    }

    /// Profile in Φ₀ as a function of the offset from the front centre.
    fn profile_quanta(&self, offset: f64, steepness: f64) -> f64 {
        let z = steepness * offset;
        match self.shape {
            PulseShape::Step => self.dc_offset + 0.5 * self.amplitude * (1.0 - z.tanh()),
            PulseShape::Gaussian => self.dc_offset + self.amplitude * (-0.5 * z * z).exp(),
        }
    }

    /// Lab-frame flux at position `x` and time `t`.
    pub fn flux_at(&self, x: f64, t: f64) -> Flux {
        Flux::quanta(self.profile_quanta(
            x - self.front_position - self.velocity * t,
            self.steepness_at(t),
        ))
    }

    /// Flux in the frame comoving with the pulse, ξ = x − ut.
    pub fn comoving_flux(&self, xi: f64, t: f64) -> Flux {
        Flux::quanta(self.profile_quanta(xi - self.front_position, self.steepness_at(t)))
    }

    pub fn peak_flux(&self) -> Flux {
        Flux::quanta(self.dc_offset + self.amplitude)
    }

    pub fn dc_flux(&self) -> Flux {
        Flux::quanta(self.dc_offset)
    }
}

/// Any flux bias the lattice can run under.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasField {
    /// Constant flux, in Φ₀.
    Uniform { flux_quanta: f64 },
    Pulse(FluxPulse),
    /// Time-independent front at `position` (m), `low` for x < position and
    /// `high` beyond it (both in Φ₀). `steepness = None` gives an abrupt step;
    /// otherwise a tanh of the given steepness (1/m).
    StaticStep {
        position: f64,
        low: f64,
        high: f64,
        steepness: Option<f64>,
    },
}

impl BiasField {
    pub fn uniform(flux: Flux) -> Self {
        BiasField::Uniform {
            flux_quanta: flux.as_quanta(),
        }
    }

    pub fn flux(&self, x: f64, t: f64) -> Flux {
        match *self {
            BiasField::Uniform { flux_quanta } => Flux::quanta(flux_quanta),
            BiasField::Pulse(ref p) => p.flux_at(x, t),
            BiasField::StaticStep {
                position,
                low,
                high,
                steepness,
            } => {
                let q = match steepness {
                    None if x < position => low,
                    None => high,
                    Some(s) => low + 0.5 * (high - low) * (1.0 + (s * (x - position)).tanh()),
                };
                Flux::quanta(q)
            }
        }
    }

    pub fn is_static(&self) -> bool {
        !matches!(self, BiasField::Pulse(_))
    }

    /// Smallest and largest flux (in Φ₀) the field takes anywhere.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            BiasField::Uniform { flux_quanta } => (flux_quanta, flux_quanta),
            BiasField::Pulse(ref p) => (p.dc_offset, p.dc_offset + p.amplitude),
            BiasField::StaticStep { low, high, .. } => (low.min(high), low.max(high)),
        }
    }

    /// Smallest |Φ| reached, in Φ₀; sets the fastest cell on the line.
    pub fn min_abs_quanta(&self) -> f64 {
        let (lo, hi) = self.bounds();
        if lo <= 0.0 && hi >= 0.0 {
            0.0
        } else {
            lo.abs().min(hi.abs())
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let BiasField::Pulse(p) = self {
            p.validate()?;
        }
        if let BiasField::StaticStep { steepness: Some(s), .. } = self {
            if !(*s > 0.0) {
                return Err(invalid("static step steepness must be positive"));
            }
        }
        let (lo, hi) = self.bounds();
        for q in [lo, hi] {
            Flux::quanta(q).check_domain()?;
        }
        Ok(())
    }
}

/// Broadening rate `b` for which the Hawking temperature of the comoving
/// profile falls by `target_decay` after the pulse has travelled
/// `n_cells` cells. Found by bisection on `b ∈ [0, 10⁶] /m` to 10⁻⁶ relative.
pub fn calibrate_broadening(
    target_decay: f64,
    n_cells: f64,
    array: &ArrayParams,
    squid: &SquidParams,
    pulse: &FluxPulse,
) -> Result<f64> {
    if target_decay == 0.0 {
        return Ok(0.0);
    }
    if !(target_decay > 0.0 && target_decay < 1.0) {
        return Err(invalid("target decay must lie in (0, 1)"));
    }
    if !(n_cells > 0.0) {
        return Err(invalid("decay distance must be positive"));
    }
    let t_travel = n_cells * array.cell_length / pulse.velocity;
    let t_h0 = geometry::pulse_temperature(array, squid, pulse, 0.0)?;
    let residual = |b: f64| -> Result<f64> {
        let broadened = pulse.with_broadening(b)?;
        let t_h = geometry::pulse_temperature(array, squid, &broadened, t_travel)?;
        Ok(t_h / t_h0 - (1.0 - target_decay))
    };
    let hi = residual(MAX_BROADENING_RATE)?;
    if hi > 0.0 {
        return Err(Error::NoRoot(format!(
            "decay of {target_decay} per {n_cells} cells needs b > {MAX_BROADENING_RATE:e} /m"
        )));
    }
    bisect(residual, 0.0, MAX_BROADENING_RATE, 1e-6, 0.0)
}
