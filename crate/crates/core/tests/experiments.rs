use std::f64::consts::PI;

use squid_horizon::circuit::{cell_velocity, presets, Flux};
use squid_horizon::config::RunConfig;
use squid_horizon::experiments::{
    evaluate_point, reproduce_fig2, run_sweep, temperature_budget, wavepacket_trapping, SweepAxis, SweepOutput,
    SweepSpec, TrappingScenario,
};
use squid_horizon::geometry::HorizonKind;

#[test]
fn fig2_from_defaults() {
    let s = RunConfig::defaults().build().unwrap();
    let f = reproduce_fig2(&s.array, &s.squid, &s.pulse).unwrap();
    assert_eq!(f.horizons.len(), 1);
    assert_eq!(f.horizons[0].kind, HorizonKind::Black);
    let expected_flux = 0.9025f64.acos() / PI;
    assert!((f.horizon_flux.unwrap() - expected_flux).abs() < 1e-6);
    assert!((f.plateau_ratio - 0.8995).abs() < 1e-3);
    assert!((f.u_ratio - 0.95).abs() < 1e-12);
    let mut csv = Vec::new();
    f.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("xi_m,flux_quanta,c_over_c0,u_over_c0\n"));
    assert!(f.plot().to_svg().contains("black horizon"));
}

#[test]
fn fig2_csv_is_deterministic() {
    let s = RunConfig::defaults().build().unwrap();
    let render = || {
        let mut buf = Vec::new();
        reproduce_fig2(&s.array, &s.squid, &s.pulse).unwrap().write_csv(&mut buf).unwrap();
        buf
    };
    assert_eq!(render(), render());
}

#[test]
fn budget_matches_estimates() {
    let s = RunConfig::defaults().build().unwrap();
    let b = temperature_budget(&s.array, &s.squid, &s.pulse, 4800).unwrap();
    assert!(b.all_pass(), "{:?}", b.claims);
    assert!((b.initial_temperature - 0.1216).abs() < 5e-4);
}

#[test]
fn packet_behind_horizon_is_trapped() {
    let r = wavepacket_trapping(&TrappingScenario::reference().unwrap()).unwrap();
    assert!(r.has_horizon);
    assert!(r.ahead.crossed, "ahead packet should cross");
    assert!(r.behind.trapped(), "behind packet should stay behind");
    // The trapped packet falls further behind the horizon.
    let first = r.behind.offset[0];
    let last = *r.behind.offset.last().unwrap();
    assert!(last < first);
    assert!((r.behind.times.last().unwrap() - r.window).abs() / r.window < 0.01);
}

#[test]
fn without_flow_both_packets_cross() {
    let r = wavepacket_trapping(&TrappingScenario::reference().unwrap().without_flow()).unwrap();
    assert!(!r.has_horizon);
    assert!(r.ahead.crossed);
    assert!(r.behind.crossed);
}

fn dc_sweep(values: Vec<f64>) -> SweepSpec {
    let mut base = RunConfig::defaults();
    base.pulse.amplitude_quanta = 0.1;
    SweepSpec {
        base: Some(base),
        axes: vec![SweepAxis { path: "pulse.dc_offset_quanta".into(), values }],
        outputs: vec![SweepOutput::Velocity, SweepOutput::ImpedanceRatio, SweepOutput::HawkingTemperature],
    }
}

#[test]
fn sweep_reproduces_velocity_law() {
    let values: Vec<f64> = (0..8).map(|i| 0.05 * i as f64).collect();
    let table = run_sweep(&dc_sweep(values.clone()), 4).unwrap();
    let c0 = cell_velocity(&presets::array(), &presets::squid(), Flux::ZERO, 0.0).unwrap();
    let col = table.column(SweepOutput::Velocity).unwrap();
    for (v, c) in values.iter().zip(col) {
        let expected = c0 * (PI * v).cos().sqrt();
        assert!((c.unwrap() - expected).abs() / expected < 1e-12);
    }
    // Past Φ_dc where c(Φ_dc) < u the front has no horizon: recorded, not fatal.
    let last = table.rows.last().unwrap();
    assert!(last.values[2].is_none());
    assert!(!last.errors.is_empty());
    assert!(last.values[0].is_some());
}

#[test]
fn single_point_sweep_equals_direct_evaluation() {
    let spec = dc_sweep(vec![0.05]);
    let table = run_sweep(&spec, 1).unwrap();
    let cfg = spec.base.clone().unwrap().with_value("pulse.dc_offset_quanta", 0.05).unwrap();
    let (values, errors) = evaluate_point(&cfg, &spec.outputs);
    assert_eq!(table.rows[0].values, values);
    assert_eq!(table.rows[0].errors, errors);
}

#[test]
fn sweep_is_schedule_independent() {
    let mut spec = dc_sweep(vec![0.0, 0.02, 0.04, 0.06]);
    spec.axes.push(SweepAxis { path: "pulse.velocity_fraction".into(), values: vec![0.93, 0.95, 0.97] });
    let one = run_sweep(&spec, 1).unwrap();
    let many = run_sweep(&spec, 6).unwrap();
    assert_eq!(one, many);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    one.write_csv(&mut a).unwrap();
    many.write_csv(&mut b).unwrap();
    assert_eq!(a, b);
    assert_eq!(one.rows.len(), 12);
}

#[test]
fn sweep_spec_parses_strictly() {
    let spec = SweepSpec::parse(r#"{"axes": [{"path": "array.ground_capacitance_f", "values": [1e-17]}]}"#).unwrap();
    assert_eq!(spec.outputs.len(), 5);
    assert!(SweepSpec::parse(r#"{"axes": [], "colour": 1}"#).is_err());
}
