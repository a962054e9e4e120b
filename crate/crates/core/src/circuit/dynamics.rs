use std::f64::consts::PI;

use super::{Flux, SquidParams};
use crate::error::{invalid, Error, Result};

/// Phase state of a dc-SQUID, γ± = (φ₁ ± φ₂)/2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SquidState {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// dγ₊/dt, rad/s.
    pub gamma_plus_dot: f64,
    /// dγ₋/dt, rad/s.
    pub gamma_minus_dot: f64,
    pub t: f64,
}

impl SquidState {
    pub fn at_rest(gamma_plus: f64, gamma_minus: f64) -> Self {
        SquidState {
            gamma_plus,
            gamma_minus,
            ..Default::default()
        }
    }

    fn is_finite(&self) -> bool {
        self.gamma_plus.is_finite()
            && self.gamma_minus.is_finite()
            && self.gamma_plus_dot.is_finite()
            && self.gamma_minus_dot.is_finite()
    }
}

/// Integrates the coupled γ± equations of a dc-SQUID with classical RK4:
///
/// ```text
/// γ̈₊/ω_p² + γ̇₊/ω_c + cos γ₋ sin γ₊ = I / 2I_c
/// γ̈₋/ω_p² + γ̇₋/ω_c + cos γ₊ sin γ₋ + 2γ₋/β_L = (2πΦ/Φ₀) / β_L
/// ```
///
/// The damping terms vanish when the junction has no normal resistance.
/// Returns `n_steps + 1` states starting with `initial`.
pub fn single_squid_dynamics<I, F>(
    squid: &SquidParams,
    drive_current: I,
    flux_ext: F,
    initial: SquidState,
    dt: f64,
    n_steps: usize,
) -> Result<Vec<SquidState>>
where
    I: Fn(f64) -> f64,
    F: Fn(f64) -> Flux,
{
    let wp = squid.junction.plasma_frequency();
    let limit = 0.05 / wp;
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let beta = squid.beta_l();
    if !(beta > 0.0) {
        return Err(invalid("full SQUID dynamics requires a positive loop inductance"));
    }
    let eta = squid
        .junction
        .characteristic_frequency()
        .map_or(0.0, |wc| wp / wc);
    let ic = squid.junction.critical_current;

    // Dimensionless time τ = ω_p t; y = [γ₊, γ₋, γ₊', γ₋'].
    let t0 = initial.t;
    let rhs = |tau: f64, y: [f64; 4]| -> [f64; 4] {
        let t = t0 + tau / wp;
        let drive = drive_current(t) / (2.0 * ic);
        let phi = 2.0 * PI * flux_ext(t).as_quanta();
        let (sp, cp) = y[0].sin_cos();
        let (sm, cm) = y[1].sin_cos();
        [
            y[2],
            y[3],
            drive - cm * sp - eta * y[2],
            phi / beta - cp * sm - 2.0 * y[1] / beta - eta * y[3],
        ]
    };

    let h = dt * wp;
    let mut y = [
        initial.gamma_plus,
        initial.gamma_minus,
        initial.gamma_plus_dot / wp,
        initial.gamma_minus_dot / wp,
    ];
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(initial);
    for step in 0..n_steps {
        let tau = step as f64 * h;
        let k1 = rhs(tau, y);
        let k2 = rhs(tau + 0.5 * h, axpy(&y, 0.5 * h, &k1));
        let k3 = rhs(tau + 0.5 * h, axpy(&y, 0.5 * h, &k2));
        let k4 = rhs(tau + h, axpy(&y, h, &k3));
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let state = SquidState {
            gamma_plus: y[0],
            gamma_minus: y[1],
            gamma_plus_dot: y[2] * wp,
            gamma_minus_dot: y[3] * wp,
            t: t0 + (step + 1) as f64 * dt,
        };
        if !state.is_finite() {
            return Err(Error::NonFinite { t: state.t });
        }
        out.push(state);
    }
    Ok(out)
}

fn axpy(y: &[f64; 4], a: f64, k: &[f64; 4]) -> [f64; 4] {
    [
        y[0] + a * k[0],
        y[1] + a * k[1],
        y[2] + a * k[2],
        y[3] + a * k[3],
    ]
}

/// Static γ₋ for a given flux and γ₊, from
/// `2γ₋/β_L + cos γ₊ sin γ₋ = (2πΦ/Φ₀)/β_L` (Newton iteration).
pub fn static_gamma_minus(beta_l: f64, flux: Flux, gamma_plus: f64) -> f64 {
    let target = 2.0 * PI * flux.as_quanta() / beta_l;
    let cp = gamma_plus.cos();
    let mut g = PI * flux.as_quanta();
    for _ in 0..50 {
        let f = 2.0 * g / beta_l + cp * g.sin() - target;
        let df = 2.0 / beta_l + cp * g.cos();
        let delta = f / df;
        g -= delta;
        if delta.abs() < 1e-16 {
            break;
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTrajectory {
    pub times: Vec<f64>,
    pub gamma: Vec<f64>,
    /// dγ₊/dt, rad/s.
    pub gamma_dot: Vec<f64>,
    /// Maximum of |E(t) − E(0)| / |E(0)| for the tilted-washboard energy.
    pub energy_drift: f64,
    /// The phase slipped by more than 2π: no bound state exists for the drive.
    pub running: bool,
}

// Omelyan–Mryglod–Folk position-extended Forest–Ruth-like coefficients.
const PEFRL_XI: f64 = 0.178_617_895_844_809_1;
const PEFRL_LAMBDA: f64 = -0.212_341_831_062_605_4;
const PEFRL_CHI: f64 = -0.066_264_582_669_818_49;

/// Integrates the undamped flux-tunable junction
/// `γ̈₊/(ω_p^s)² + sin γ₊ = I/I_c^s` with a fourth-order symplectic scheme.
pub fn reduced_junction_dynamics<I, F>(
    squid: &SquidParams,
    drive_current: I,
    flux_ext: F,
    initial_gamma: f64,
    initial_gamma_dot: f64,
    dt: f64,
    n_steps: usize,
) -> Result<ReducedTrajectory>
where
    I: Fn(f64) -> f64,
    F: Fn(f64) -> Flux,
{
    let w_ref = squid.plasma_frequency(flux_ext(0.0))?;
    let limit = 0.05 / w_ref;
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let ic_total = 2.0 * squid.junction.critical_current;

    // Time-dependent parameters in units of ω_ref: (ω_s²/ω_ref², I/I_c^s).
    let params = |t: f64| -> Result<(f64, f64)> {
        let m = flux_ext(t).modulation()?;
        let w2 = m * (PI * flux_ext(0.0).as_quanta()).cos().recip();
        Ok((w2, drive_current(t) / (ic_total * m)))
    };
    let energy = |g: f64, v: f64, w2: f64, tilt: f64| -> f64 {
        let half = (0.5 * g).sin();
        0.5 * v * v / w2 + 2.0 * half * half - tilt * g
    };

    let h = dt * w_ref;
    let mut g = initial_gamma;
    let mut v = initial_gamma_dot / w_ref;
    let mut tau = 0.0;
    let to_t = |tau: f64| tau / w_ref;

    let (w2, tilt) = params(0.0)?;
    let e0 = energy(g, v, w2, tilt);
    let mut max_dev: f64 = 0.0;
    let mut running = false;

    let mut out = ReducedTrajectory {
        times: Vec::with_capacity(n_steps + 1),
        gamma: Vec::with_capacity(n_steps + 1),
        gamma_dot: Vec::with_capacity(n_steps + 1),
        energy_drift: 0.0,
        running: false,
    };
    out.times.push(0.0);
    out.gamma.push(g);
    out.gamma_dot.push(v * w_ref);

    let accel = |g: f64, tau: f64| -> Result<f64> {
        let (w2, tilt) = params(to_t(tau))?;
        Ok(w2 * (tilt - g.sin()))
    };

    for _ in 0..n_steps {
        g += PEFRL_XI * h * v;
        tau += PEFRL_XI * h;
        v += (1.0 - 2.0 * PEFRL_LAMBDA) * 0.5 * h * accel(g, tau)?;
        g += PEFRL_CHI * h * v;
        tau += PEFRL_CHI * h;
        v += PEFRL_LAMBDA * h * accel(g, tau)?;
        let mid = 1.0 - 2.0 * (PEFRL_CHI + PEFRL_XI);
        g += mid * h * v;
        tau += mid * h;
        v += PEFRL_LAMBDA * h * accel(g, tau)?;
        g += PEFRL_CHI * h * v;
        tau += PEFRL_CHI * h;
        v += (1.0 - 2.0 * PEFRL_LAMBDA) * 0.5 * h * accel(g, tau)?;
        g += PEFRL_XI * h * v;
        tau += PEFRL_XI * h;

        let t = to_t(tau);
        if !(g.is_finite() && v.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        let (w2, tilt) = params(t)?;
        max_dev = max_dev.max((energy(g, v, w2, tilt) - e0).abs());
        running |= (g - initial_gamma).abs() > 2.0 * PI;
        out.times.push(t);
        out.gamma.push(g);
        out.gamma_dot.push(v * w_ref);
    }
    out.energy_drift = if e0.abs() > 0.0 { max_dev / e0.abs() } else { max_dev };
    out.running = running;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{presets, JunctionParams};

    fn squid(beta_l: f64) -> SquidParams {
        let j = presets::junction();
        let l = beta_l * crate::constants::FLUX_QUANTUM / (2.0 * PI * j.critical_current);
        SquidParams::new(j, l).unwrap()
    }

    #[test]
    fn rest_is_a_fixed_point() {
        let s = squid(0.01);
        let dt = 0.05 / s.junction.plasma_frequency();
        let traj =
            single_squid_dynamics(&s, |_| 0.0, |_| Flux::ZERO, SquidState::default(), dt, 2000).unwrap();
        for st in &traj {
            assert_eq!(st.gamma_plus, 0.0);
            assert_eq!(st.gamma_minus, 0.0);
        }
    }

    #[test]
    fn rejects_coarse_steps_and_zero_loop() {
        let s = squid(0.01);
        let wp = s.junction.plasma_frequency();
        assert!(matches!(
            single_squid_dynamics(&s, |_| 0.0, |_| Flux::ZERO, SquidState::default(), 0.1 / wp, 10),
            Err(Error::StepTooLarge { .. })
        ));
        let flat = SquidParams::new(s.junction, 0.0).unwrap();
        assert!(single_squid_dynamics(&flat, |_| 0.0, |_| Flux::ZERO, SquidState::default(), 0.01 / wp, 10).is_err());
        assert!(reduced_junction_dynamics(&s, |_| 0.0, |_| Flux::ZERO, 0.0, 0.0, 0.1 / wp, 10).is_err());
    }

    /// Independent oracle: semi-implicit Euler at a much finer step, with
    /// the quasi-static γ₋ = 0 branch valid at zero flux.
    fn damped_pendulum_oracle(drive: f64, eta: f64, tau_end: f64) -> f64 {
        let h = 1e-4;
        let (mut g, mut v) = (0.0f64, 0.0f64);
        let n = (tau_end / h) as usize;
        for _ in 0..n {
            v += h * (drive - g.sin() - eta * v);
            g += h * v;
        }
        g
    }

    #[test]
    fn damped_drive_settles_to_arcsin() {
        let j = presets::junction();
        let wp = j.plasma_frequency();
        // ω_c = ω_p: quality factor of one.
        let r = wp * crate::constants::FLUX_QUANTUM / (2.0 * PI * j.critical_current);
        let j = j.with_normal_resistance(r).unwrap();
        let s = SquidParams::new(j, squid(0.01).loop_inductance).unwrap();
        let current = 0.1 * j.critical_current;
        let dt = 0.05 / wp;
        let n = 1200; // 60 plasma times
        let traj = single_squid_dynamics(&s, |_| current, |_| Flux::ZERO, SquidState::default(), dt, n).unwrap();
        let last = traj.last().unwrap();
        let exact = (current / (2.0 * j.critical_current)).asin();
        assert!((last.gamma_plus - exact).abs() < 1e-6, "{} vs {}", last.gamma_plus, exact);
        let oracle = damped_pendulum_oracle(0.05, 1.0, n as f64 * 0.05);
        assert!((last.gamma_plus - oracle).abs() < 1e-5);
    }

    #[test]
    fn gamma_minus_tracks_slow_flux_ramp() {
        let s = squid(0.01);
        let wp = s.junction.plasma_frequency();
        let dt = 0.05 / wp;
        let n = 20_000;
        let t_end = n as f64 * dt;
        let ramp = move |t: f64| Flux::quanta(0.2 * t / t_end);
        let traj = single_squid_dynamics(&s, |_| 0.0, ramp, SquidState::default(), dt, n).unwrap();
        for st in traj.iter().skip(n / 4).step_by(97) {
            let target = PI * ramp(st.t).as_quanta();
            assert!(
                (st.gamma_minus - target).abs() <= 0.02 * target.abs(),
                "t={} γ₋={} target={}",
                st.t,
                st.gamma_minus,
                target
            );
        }
    }

    #[test]
    fn static_gamma_minus_solves_balance() {
        let g = static_gamma_minus(0.01, Flux::quanta(0.2), 0.3);
        let resid = 2.0 * g / 0.01 + 0.3f64.cos() * g.sin() - 2.0 * PI * 0.2 / 0.01;
        assert!(resid.abs() < 1e-10);
    }

    #[test]
    fn small_oscillation_frequency_is_plasma_frequency() {
        let s = squid(0.01);
        let flux = Flux::quanta(0.2);
        let ws = s.plasma_frequency(flux).unwrap();
        let dt = 0.02 / ws;
        let n = 20_000;
        let traj = reduced_junction_dynamics(&s, |_| 0.0, |_| flux, 1e-3, 0.0, dt, n).unwrap();
        // Downward zero crossings, linearly interpolated.
        let mut crossings = Vec::new();
        for i in 1..traj.gamma.len() {
            let (a, b) = (traj.gamma[i - 1], traj.gamma[i]);
            if a > 0.0 && b <= 0.0 {
                let frac = a / (a - b);
                crossings.push(traj.times[i - 1] + frac * (traj.times[i] - traj.times[i - 1]));
            }
        }
        let periods = (crossings.len() - 1) as f64;
        let period = (crossings.last().unwrap() - crossings[0]) / periods;
        let measured = 2.0 * PI / period;
        assert!((measured / ws - 1.0).abs() < 1e-3, "{measured} vs {ws}");
    }

    #[test]
    fn over_critical_drive_runs_away() {
        let s = squid(0.01);
        let ws = s.plasma_frequency(Flux::ZERO).unwrap();
        let ic = s.critical_current(Flux::ZERO).unwrap();
        let traj = reduced_junction_dynamics(&s, |_| 1.2 * ic, |_| Flux::ZERO, 0.0, 0.0, 0.02 / ws, 5000).unwrap();
        assert!(traj.running);
        let bound = reduced_junction_dynamics(&s, |_| 0.5 * ic, |_| Flux::ZERO, 0.0, 0.0, 0.02 / ws, 5000).unwrap();
        assert!(!bound.running);
    }

    #[test]
    fn symplectic_energy_drift_is_tiny() {
        let s = squid(0.01);
        let flux = Flux::quanta(0.1);
        let ws = s.plasma_frequency(flux).unwrap();
        let ic = s.critical_current(flux).unwrap();
        let traj = reduced_junction_dynamics(&s, |_| 0.2 * ic, |_| flux, 0.5, 0.0, 0.02 / ws, 10_000).unwrap();
        assert!(traj.energy_drift < 1e-8, "drift {}", traj.energy_drift);
    }

    #[test]
    fn junction_from_plasma_frequency_round_trips() {
        let j = JunctionParams::from_plasma_frequency(3e-6, 1e12).unwrap();
        assert!((j.plasma_frequency() / 1e12 - 1.0).abs() < 1e-14);
    }
}
