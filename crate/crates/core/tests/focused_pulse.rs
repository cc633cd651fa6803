use std::path::Path;

use wpr::app::single_trajectory;
use wpr::config::RunConfig;
use wpr::dynamics::{drift_momentum, ExternalField, PERIOD};
use wpr::grid::linspace;
use wpr::radiation::{band_energy, radiation_map, total_energy, RadiationSettings};
use wpr::AngularSpectralGrid;

fn focus_config() -> RunConfig {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/fig3.cfg")).unwrap();
    RunConfig::parse(&text).unwrap()
}

#[test]
fn electron_leaves_the_focus_with_constant_energy() {
    let (field, traj) = single_trajectory(&focus_config()).unwrap();
    let states = traj.states();
    let per_period = (PERIOD / traj.dt()).round() as usize;
    let tail = &states[states.len() - 10 * per_period..];
    for s in tail {
        assert!(field.field_at(s.position, s.time).e_field.norm() < 1e-6, "field not negligible at t = {}", s.time);
    }
    // transverse distance grows monotonically once the pulse has passed
    let rho = |i: usize| tail[i].position.y.hypot(tail[i].position.z);
    for i in 1..tail.len() {
        assert!(rho(i) > rho(i - 1), "transverse distance not increasing at tail step {i}");
    }
    for w in tail.chunks(per_period) {
        let (g0, g1) = (w[0].gamma(), w[w.len() - 1].gamma());
        assert!((g1 - g0).abs() <= 1e-9, "gamma drifts by {} within a period", g1 - g0);
    }
    let drift = drift_momentum(&traj).unwrap();
    assert!((drift - traj.last().momentum).norm() <= 1e-9);
    assert!(traj.last().gamma() > 1.0 + 1e-3, "electron should keep net energy");
}

#[test]
fn spectrum_total_is_resolved_in_frequency() {
    let cfg = focus_config();
    let (_, traj) = single_trajectory(&cfg).unwrap();
    let settings = RadiationSettings::new(cfg.beam.units().unwrap()).with_samples_per_period(cfg.grids.samples_per_period);
    let total = |n_omega: usize| {
        let grid = AngularSpectralGrid::sphere(16, 32, linspace(0.05, 10.0, n_omega)).unwrap();
        let map = radiation_map(&traj, &grid, &settings).unwrap();
        assert!(band_energy(&map, 1.0, 1e6).is_err(), "band beyond the grid must be refused");
        (total_energy(&map), band_energy(&map, 80.0, 16000.0).unwrap(), band_energy(&map, 900.0, 900.0).unwrap())
    };
    let (coarse, _, _) = total(128);
    let (fine, full_band, empty_band) = total(256);
    assert!(((fine - coarse) / fine).abs() < 0.01, "{coarse} vs {fine}");
    // the band spanning the grid is the whole spectrum; a zero-width one is empty
    assert!((full_band - fine).abs() <= 1e-12 * fine);
    assert_eq!(empty_band, 0.0);
}
