//! Radiation from one electron born on axis in a tightly focused pulse.
//!
//! Reads a run configuration (default `configs/fig3.cfg`), pushes the
//! electron until the pulse has passed and integrates the far-field spectrum
//! on a coarse sphere. `wpr radiate` does the same on the configured grid.
//!
//! ```bash
//! cargo run --release --example focused_pulse_spectrum -- configs/fig3.cfg
//! ```

use wpr::app::single_trajectory;
use wpr::config::RunConfig;
use wpr::grid::linspace;
use wpr::radiation::{
    larmor_total, photon_count_estimate, radiation_map, total_energy, EmissionSpectrum, RadiationSettings,
};
use wpr::AngularSpectralGrid;

fn main() -> wpr::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/fig3.cfg".into());
    let config = RunConfig::parse(&std::fs::read_to_string(&path)?)?;
    let (field, traj) = single_trajectory(&config)?;
    let units = field.units();
    println!(
        "a0 = {:.2}, born at {:.1} fs, {} steps, final gamma {:.4}",
        field.a0(),
        units.normalized_to_fs(traj.start_time()),
        traj.len(),
        traj.last().gamma()
    );

    let g = &config.grids;
    let grid = AngularSpectralGrid::sphere(16, 32, linspace(g.omega_min, g.omega_max, g.n_omega))?;
    let settings = RadiationSettings::new(units).with_samples_per_period(g.samples_per_period);
    let map = radiation_map(&traj, &grid, &settings)?;

    let spectrum = EmissionSpectrum::integrated(&map);
    let (lo, hi) = g.band_nm;
    let band = spectrum.band_energy(lo, hi)?;
    let total = total_energy(&map);
    println!("radiated {total:.4e} eV (Larmor {:.4e} eV)", larmor_total(&traj, units));
    println!("{lo}-{hi} nm: {band:.4e} eV, {:.1}% of the total", 100.0 * band / total);
    println!("peak of the integrated spectrum at {:.0} nm", spectrum.peak_wavelength_nm());
    println!(
        "photons in band at {:.0}% collection: {:.3e}",
        100.0 * g.collection_efficiency,
        photon_count_estimate(&spectrum, Some(g.band_nm), g.collection_efficiency)?
    );
    Ok(())
}
