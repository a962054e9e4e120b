use squid_horizon::circuit::{presets, Flux};
use squid_horizon::dispersion::{continuum_error, frequency_for_ka, measure_dispersion};

fn measure(flux: f64, kas: &[f64]) -> squid_horizon::dispersion::DispersionCurve {
    let array = presets::array();
    let squid = presets::squid();
    let l = squid.linear_inductance(Flux::quanta(flux)).unwrap();
    let freqs: Vec<f64> = kas.iter().map(|&ka| frequency_for_ka(ka, l, array.ground_capacitance)).collect();
    measure_dispersion(&array, &squid, Flux::quanta(flux), &freqs).unwrap()
}

#[test]
fn long_wavelengths_follow_lattice_relation() {
    let curve = measure(0.0, &[0.3, 0.05, 0.2, 0.1]);
    assert_eq!(curve.points.len(), 4);
    assert!(curve.points.windows(2).all(|w| w[0].k < w[1].k));
    for p in &curve.points {
        let e = p.rel_error().unwrap();
        assert!(e.abs() < 0.01, "k a = {}: rel error {e}", p.k * curve.cell_length);
    }
}

#[test]
fn drive_at_tenth_of_cell_rate_has_lattice_wavelength() {
    let array = presets::array();
    let squid = presets::squid();
    let l = squid.linear_inductance(Flux::ZERO).unwrap();
    let t0 = (l * array.ground_capacitance).sqrt();
    let omega = 0.1 / t0;
    let curve = measure_dispersion(&array, &squid, Flux::ZERO, &[omega]).unwrap();
    let expected_k = 2.0 * (0.5 * omega * t0).asin() / array.cell_length;
    let k = curve.points[0].k;
    assert!((k - expected_k).abs() / expected_k < 0.01, "k {k} vs {expected_k}");
}

#[test]
fn short_wavelength_deviation_from_linear_law() {
    let curve = measure(0.2, &[2.0]);
    let p = curve.points[0];
    let ka = p.k * curve.cell_length;
    let c = curve.cell_length / (curve.inductance * curve.capacitance).sqrt();
    let measured_ratio = p.omega_measured.unwrap() / (c * p.k);
    let analytic_ratio = 1.0 - continuum_error(ka);
    assert!((measured_ratio - analytic_ratio).abs() / analytic_ratio < 0.02);
    assert!((ka - 2.0).abs() < 0.04, "ka {ka}");
    assert!(p.rel_error().unwrap().abs() < 0.02);
}
