//! Point electron, sampled wavepacket and rigid cloud side by side.
//!
//! Efficiencies are relative to a point electron at the packet centre. The
//! cloud uses the radius whose form factor matches a Gaussian of width σ.
//!
//! ```bash
//! cargo run --release --example compare_models -- 400e-9
//! ```

use std::f64::consts::FRAC_PI_4;

use wpr::dynamics::PERIOD;
use wpr::ensemble::{compare_models, EnsembleOptions};
use wpr::grid::linspace;
use wpr::radiation::RadiationSettings;
use wpr::units::intensity_from_a0;
use wpr::wigner::GaussianWavePacket;
use wpr::{AngularSpectralGrid, BeamConfig, Direction, UnitSystem};

fn main() -> wpr::Result<()> {
    let sigma: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(400e-9);
    let beam = BeamConfig::plane_pulsed(800.0, intensity_from_a0(0.05, 800.0), 10.0);
    let grid = AngularSpectralGrid::from_directions(
        vec![Direction::FORWARD, Direction::new(FRAC_PI_4, 0.0)?, Direction::PERPENDICULAR_Y],
        linspace(0.9, 1.1, 5),
    )?;
    let mut options = EnsembleOptions::new(RadiationSettings::new(UnitSystem::new(800.0)?).with_samples_per_period(50.0))
        .with_dt(PERIOD / 250.0);
    options.margin = 2.0 * PERIOD;

    let (report, _) = compare_models(&GaussianWavePacket::isotropic(sigma)?, &beam, &grid, &options, 2048, 3)?;
    println!("sigma = {:.3} lambda at omega = {}", report.sigma_over_lambda, report.omega);
    println!("{:>7} {:>7}  {:>20}  {:>20}  {:>10}", "theta", "phi", "incoherent", "coherent", "cloud");
    for r in &report.rows {
        println!(
            "{:>7.4} {:>7.4}  {:>10.4e} ± {:.1e}  {:>10.4e} ± {:.1e}  {:>10.4e}",
            r.theta,
            r.phi,
            r.incoherent_efficiency.value,
            r.incoherent_efficiency.std_error,
            r.coherent_efficiency.value,
            r.coherent_efficiency.std_error,
            r.extended_cloud_efficiency
        );
    }
    Ok(())
}
