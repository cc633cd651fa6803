//! Incoherent and coherent emission of a sampled wavepacket in a weak pulse.
//!
//! Each phase-space sample is pushed as a classical electron. The incoherent
//! map averages |A|², the coherent one squares the averaged amplitude.
//! Errors come from a delete-one-batch jackknife.
//!
//! ```bash
//! cargo run --release --example ensemble_emission -- 400e-9 2048
//! ```

use std::f64::consts::FRAC_PI_2;

use wpr::dynamics::PERIOD;
use wpr::ensemble::{ensemble_radiation, sample_gaussian, EnsembleOptions};
use wpr::grid::linspace;
use wpr::radiation::RadiationSettings;
use wpr::units::intensity_from_a0;
use wpr::wigner::GaussianWavePacket;
use wpr::{AngularSpectralGrid, BeamConfig, Direction, UnitSystem};

fn main() -> wpr::Result<()> {
    let mut args = std::env::args().skip(1);
    let sigma: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(400e-9);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1024);

    let beam = BeamConfig::plane_pulsed(800.0, intensity_from_a0(0.05, 800.0), 10.0);
    let directions = vec![Direction::FORWARD, Direction::new(FRAC_PI_2 / 2.0, 0.0)?, Direction::PERPENDICULAR_Y];
    let grid = AngularSpectralGrid::from_directions(directions.clone(), linspace(0.8, 1.2, 21))?;
    let mut options = EnsembleOptions::new(RadiationSettings::new(UnitSystem::new(800.0)?).with_samples_per_period(50.0))
        .with_dt(PERIOD / 250.0);
    options.margin = 2.0 * PERIOD;

    let samples = sample_gaussian(&GaussianWavePacket::isotropic(sigma)?, n, 7)?;
    let result = ensemble_radiation(&samples, &beam, &grid, &options)?;
    println!("sigma_r = {sigma:e} m, {n} samples, {} batches", result.n_batches());
    for (i, d) in directions.iter().enumerate() {
        let k = i * grid.omegas().len() + 10;
        println!(
            "theta {:.3} phi {:.3}: incoherent {:.4e} ± {:.1e}, coherent {:.4e} ± {:.1e} eV per unit solid angle and omega",
            d.theta(),
            d.phi(),
            result.incoherent_map.values()[k],
            result.incoherent_se[k],
            result.coherent_map.values()[k],
            result.coherent_se[k]
        );
    }
    Ok(())
}
