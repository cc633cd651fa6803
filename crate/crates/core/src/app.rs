//! Batch runs driven by a [`RunConfig`]: one function per subcommand, each
//! writing its tables and a `manifest.json` into the output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::{BirthMode, EnsembleModel, RawConfig, RunConfig};
use crate::dynamics::{drift_momentum, find_birth_time, push_trajectory, push_until_field_free, ElectronState, Trajectory, PERIOD};
use crate::ensemble::{compare_models, ensemble_radiation, sample_phase_space, EnsembleOptions, EnsembleResult, Estimate};
use crate::error::{Error, Result};
use crate::extended::efficiency_scan;
use crate::grid::{linspace, AngularSpectralGrid};
use crate::laser::{BeamModel, LaserField};
use crate::output::{standard_meta, write_csv, write_json, CsvWriter, Manifest};
use crate::radiation::{
    band_energy, larmor_total, photon_count_estimate, radiation_map, total_energy, EmissionSpectrum, RadiationMap,
    RadiationSettings,
};
use crate::vec3::Vec3;
use crate::wigner::{
    free_evolve, mass_in_box, negativity_report, wigner_slice, GaussianWavePacket, MomentumSuperposition,
    NegativityReport, PhaseSpaceBox, WignerState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Trajectory,
    Radiate,
    ThomsonScan,
    Wigner,
    Ensemble,
    Compare,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Trajectory,
        Command::Radiate,
        Command::ThomsonScan,
        Command::Wigner,
        Command::Ensemble,
        Command::Compare,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Trajectory => "trajectory",
            Command::Radiate => "radiate",
            Command::ThomsonScan => "thomson-scan",
            Command::Wigner => "wigner",
            Command::Ensemble => "ensemble",
            Command::Compare => "compare",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    fn uses_seed(&self) -> bool {
        matches!(self, Command::Ensemble | Command::Compare)
    }
}

/// Reads a config file and applies `--seed` and `--set` overrides.
pub fn load_config(path: &Path, seed: Option<u64>, overrides: &[String]) -> Result<RunConfig> {
    let mut raw = RawConfig::load(path)?;
    for o in overrides {
        raw.set(o)?;
    }
    if let Some(s) = seed {
        raw.set(&format!("ensemble.seed={s}"))?;
    }
    RunConfig::from_raw(&raw)
}

/// Files written by a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Runs `command` with outputs in `out_dir` (created if missing).
pub fn run(command: Command, config: &RunConfig, out_dir: &Path) -> Result<RunOutput> {
    std::fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    let mut files = match command {
        Command::Trajectory => run_trajectory(config, out_dir)?,
        Command::Radiate => run_radiate(config, out_dir)?,
        Command::ThomsonScan => run_thomson_scan(config, out_dir)?,
        Command::Wigner => run_wigner(config, out_dir)?,
        Command::Ensemble => run_ensemble(config, out_dir)?,
        Command::Compare => run_compare(config, out_dir)?,
    };
    let seed = command.uses_seed().then_some(config.ensemble.seed);
    let manifest = Manifest::new(command.name(), config, seed, start.elapsed().as_secs_f64(), &files);
    files.push(write_json(&out_dir.join("manifest.json"), &manifest)?);
    Ok(RunOutput { dir: out_dir.to_path_buf(), files })
}

/// As [`run`], inside a dedicated pool of `threads` workers.
pub fn run_with_threads(command: Command, config: &RunConfig, out_dir: &Path, threads: usize) -> Result<RunOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("--threads: {e}")))?;
    pool.install(|| run(command, config, out_dir))
}

/// The configured single-electron trajectory.
pub fn single_trajectory(config: &RunConfig) -> Result<(LaserField, Trajectory)> {
    let field = LaserField::new(&config.beam)?;
    let units = field.units();
    let e = &config.electron;
    let um = |v: f64| units.metres_to_normalized(v * 1e-6);
    let position = Vec3::new(um(e.birth_position_um.x), um(e.birth_position_um.y), um(e.birth_position_um.z));
    let time = match e.birth {
        BirthMode::Threshold(t) => find_birth_time(&field, position, t)?,
        BirthMode::ExplicitTime(fs) => units.fs_to_normalized(fs),
    };
    let initial = ElectronState { position, momentum: e.initial_momentum, time };
    let dt = e.dt_over_period * PERIOD;
    let mut traj = if config.beam.model == BeamModel::PlaneInfinite {
        push_trajectory(&field, initial, time + e.duration_periods * PERIOD, dt)?
    } else {
        push_until_field_free(&field, initial, dt, e.margin_periods * PERIOD, 1e5 * PERIOD)?
    };
    traj.set_config_hash(config.hash());
    Ok((field, traj))
}

fn build_grid(config: &RunConfig) -> Result<AngularSpectralGrid> {
    let g = &config.grids;
    let omegas = linspace(g.omega_min, g.omega_max, g.n_omega);
    if g.directions.is_empty() {
        AngularSpectralGrid::sphere(g.n_theta, g.n_phi, omegas)
    } else {
        AngularSpectralGrid::from_directions(g.directions.clone(), omegas)
    }
}

fn radiation_settings(config: &RunConfig) -> Result<RadiationSettings> {
    Ok(RadiationSettings::new(config.beam.units()?)
        .with_window(config.grids.window)
        .with_samples_per_period(config.grids.samples_per_period))
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct TrajectorySummary {
    birth_time_fs: f64,
    end_time_fs: f64,
    samples: usize,
    final_position_um: Vec3,
    final_momentum_mec: Vec3,
    final_gamma: f64,
    drift_momentum_mec: Option<Vec3>,
    larmor_eV: f64,
}

fn run_trajectory(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let (field, traj) = single_trajectory(config)?;
    let units = field.units();
    let um = |x: f64| units.normalized_to_metres(x) * 1e6;
    let mut meta = standard_meta("trajectory", config, None);
    meta.push(("integrator", format!("{} dt={} (1/omega0)", traj.meta().integrator, traj.dt())));
    meta.push(("stride", config.output.trajectory_stride.to_string()));
    let rows = traj.states().iter().step_by(config.output.trajectory_stride).map(|s| {
        vec![
            units.normalized_to_fs(s.time),
            um(s.position.x),
            um(s.position.y),
            um(s.position.z),
            s.momentum.x,
            s.momentum.y,
            s.momentum.z,
            s.gamma(),
        ]
    });
    let header = ["t_fs", "x_um", "y_um", "z_um", "px_mec", "py_mec", "pz_mec", "gamma"];
    let csv = write_csv(&dir.join("trajectory.csv"), &meta, &header, rows)?;
    let last = traj.last();
    let summary = TrajectorySummary {
        birth_time_fs: units.normalized_to_fs(traj.start_time()),
        end_time_fs: units.normalized_to_fs(traj.end_time()),
        samples: traj.len(),
        final_position_um: Vec3::new(um(last.position.x), um(last.position.y), um(last.position.z)),
        final_momentum_mec: last.momentum,
        final_gamma: last.gamma(),
        drift_momentum_mec: drift_momentum(&traj).ok(),
        larmor_eV: larmor_total(&traj, units),
    };
    Ok(vec![csv, write_json(&dir.join("trajectory_summary.json"), &summary)?])
}

fn map_csv(path: &Path, meta: &[(&str, String)], map: &RadiationMap) -> Result<PathBuf> {
    let grid = map.grid();
    let nw = grid.omegas().len();
    let header = ["theta_rad", "phi_rad", "omega_over_omega0", "d2e_dOmega_domega_eV"];
    let mut w = CsvWriter::create(path, meta, &header)?;
    for d in 0..grid.n_directions() {
        let dir = grid.direction(d);
        for (k, &om) in grid.omegas().iter().enumerate() {
            w.row(&[dir.theta(), dir.phi(), om, map.values()[d * nw + k]])?;
        }
    }
    w.finish()
}

fn spectrum_csv(path: &Path, meta: &[(&str, String)], s: &EmissionSpectrum, column: &str) -> Result<PathBuf> {
    let units = crate::units::UnitSystem::new(s.wavelength_nm)?;
    let rows = s.omegas.iter().zip(&s.values).map(|(&w, &v)| vec![w, units.omega_to_wavelength(w), v]);
    write_csv(path, meta, &["omega_over_omega0", "wavelength_nm", column], rows)
}

fn band_key(band: (f64, f64)) -> String {
    format!("band_{}_{}_eV", band.0, band.1)
}

fn run_radiate(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let (field, traj) = single_trajectory(config)?;
    let units = field.units();
    let grid = build_grid(config)?;
    let map = radiation_map(&traj, &grid, &radiation_settings(config)?)?;
    let mut meta = standard_meta("radiate", config, None);
    meta.push(("grid", crate::radiation::describe_grid(&grid)));
    meta.push(("observation_radius_um", map.observation_radius_um.to_string()));
    let mut files = vec![map_csv(&dir.join("radiation.csv"), &meta, &map)?];

    let band = config.grids.band_nm;
    let mut totals = serde_json::Map::new();
    let mut put = |k: &str, v: serde_json::Value| {
        totals.insert(k.to_string(), v);
    };
    put("birth_time_fs", units.normalized_to_fs(traj.start_time()).into());
    put("larmor_eV", larmor_total(&traj, units).into());
    if grid.is_full_sphere() {
        let total = total_energy(&map);
        let band_e = band_energy(&map, band.0, band.1)?;
        let spectrum = EmissionSpectrum::integrated(&map);
        put("total_eV", total.into());
        put(&band_key(band), band_e.into());
        put("band_fraction", (band_e / total).into());
        put("photons_in_band", photon_count_estimate(&map, Some(band), config.grids.collection_efficiency)?.into());
        put("collection_efficiency", config.grids.collection_efficiency.into());
        put("peak_wavelength_nm", spectrum.peak_wavelength_nm().into());
        files.push(spectrum_csv(&dir.join("spectrum.csv"), &meta, &spectrum, "de_domega_eV")?);
    } else {
        let per: Vec<serde_json::Value> = (0..grid.n_directions())
            .map(|d| {
                let s = EmissionSpectrum::for_direction(&map, d);
                let dir_ = grid.direction(d);
                serde_json::json!({
                    "theta_rad": dir_.theta(),
                    "phi_rad": dir_.phi(),
                    "energy_eV_per_sr": map.direction_energy(d),
                    "band_eV_per_sr": s.band_energy(band.0, band.1).ok(),
                    "peak_wavelength_nm": s.peak_wavelength_nm(),
                })
            })
            .collect();
        put("directions", per.into());
    }
    files.push(write_json(&dir.join("totals.json"), &totals)?);
    Ok(files)
}

fn run_thomson_scan(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let g = &config.grids;
    let sizes = linspace(0.0, g.r0_over_lambda_max, g.n_r0);
    let table = efficiency_scan(&sizes, &g.directions)?;
    let names = table.column_names();
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    let meta = standard_meta("thomson-scan", config, None);
    Ok(vec![write_csv(&dir.join("thomson_scan.csv"), &meta, &header, table.rows())?])
}

/// The configured wave packet.
pub fn wavepacket_state(config: &RunConfig) -> Result<WignerState> {
    let w = &config.wavepacket;
    let s = w.sigma_m;
    let base = GaussianWavePacket::new(w.center_position_m, w.center_momentum, Vec3::new(s, s, s))?;
    if w.components.is_empty() {
        Ok(base.into())
    } else {
        Ok(MomentumSuperposition::from_offsets(base, &w.components)?.into())
    }
}

#[derive(Serialize)]
struct WignerReport {
    sigma_r_m: f64,
    sigma_p_mec: f64,
    components: usize,
    evolve_time_fs: f64,
    evolved_sigma_m: Option<f64>,
    evolved_sigma_over_lambda: Option<f64>,
    box_widths: f64,
    mass_in_box: f64,
    negativity: NegativityReport,
}

fn run_wigner(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let w = &config.wavepacket;
    let state = wavepacket_state(config)?;
    let region = PhaseSpaceBox::around(&state, w.box_widths);
    let axis = w.slice_axis;
    let meta = standard_meta("wigner", config, None);
    let header = ["r_m", "p_mec", "rho_w"];
    let dump = |name: &str, pts: Vec<crate::wigner::SlicePoint>| {
        write_csv(&dir.join(name), &meta, &header, pts.into_iter().map(|p| vec![p.r, p.p, p.rho_w]))
    };
    let (anchor_r, anchor_p) = (w.center_position_m, w.center_momentum);
    let mut files = vec![dump(
        "wigner_initial.csv",
        wigner_slice(&state, axis, &region, anchor_r, anchor_p, w.slice_points)?,
    )?];

    let t_s = w.evolve_time_fs * 1e-15;
    let mut evolved_sigma = None;
    if t_s > 0.0 {
        let evolved = free_evolve(&state, t_s)?;
        let c = crate::units::consts::SPEED_OF_LIGHT;
        let grow = evolved.evolved_width().unwrap_or_else(|| state.sigma_r()) * (1.0 / w.sigma_m);
        let shift = w.center_momentum * (c * t_s);
        let half_r = (region.r_max - region.r_min) * 0.5;
        let mid_r = (region.r_max + region.r_min) * 0.5 + shift;
        let half = Vec3::new(half_r.x * grow.x, half_r.y * grow.y, half_r.z * grow.z)
            + Vec3::new(1.0, 1.0, 1.0) * (region.p_max - region.p_min).norm() * c * t_s;
        let moved = PhaseSpaceBox { r_min: mid_r - half, r_max: mid_r + half, ..region };
        files.push(dump(
            "wigner_evolved.csv",
            wigner_slice(&evolved, axis, &moved, anchor_r + shift, anchor_p, w.slice_points)?,
        )?);
        evolved_sigma = evolved.evolved_width().map(|v| v[axis]);
    }
    let lambda_m = config.beam.wavelength_nm * 1e-9;
    let report = WignerReport {
        sigma_r_m: w.sigma_m,
        sigma_p_mec: crate::wigner::HBAR / (2.0 * w.sigma_m),
        components: w.components.len().max(1),
        evolve_time_fs: w.evolve_time_fs,
        evolved_sigma_m: evolved_sigma,
        evolved_sigma_over_lambda: evolved_sigma.map(|s| s / lambda_m),
        box_widths: w.box_widths,
        mass_in_box: mass_in_box(&state, &region),
        negativity: negativity_report(&state, &region, w.negativity_resolution)?,
    };
    files.push(write_json(&dir.join("wigner_report.json"), &report)?);
    Ok(files)
}

fn ensemble_options(config: &RunConfig) -> Result<EnsembleOptions> {
    let mut o = EnsembleOptions::new(radiation_settings(config)?).with_dt(config.electron.dt_over_period * PERIOD);
    o.margin = config.electron.margin_periods * PERIOD;
    o.batches = config.ensemble.batches;
    Ok(o)
}

fn ensemble_csv(path: &Path, meta: &[(&str, String)], r: &EnsembleResult, model: EnsembleModel) -> Result<PathBuf> {
    let grid = r.grid();
    let nw = grid.omegas().len();
    let mut header = vec!["theta_rad", "phi_rad", "omega_over_omega0"];
    let inc = model != EnsembleModel::Coherent;
    let coh = model != EnsembleModel::Incoherent;
    if inc {
        header.extend(["incoherent_eV", "incoherent_se_eV"]);
    }
    if coh {
        header.extend(["coherent_eV", "coherent_se_eV"]);
    }
    let mut w = CsvWriter::create(path, meta, &header)?;
    let mut row = Vec::with_capacity(header.len());
    for d in 0..grid.n_directions() {
        let dir = grid.direction(d);
        for (k, &om) in grid.omegas().iter().enumerate() {
            let i = d * nw + k;
            row.clear();
            row.extend([dir.theta(), dir.phi(), om]);
            if inc {
                row.extend([r.incoherent_map.values()[i], r.incoherent_se[i]]);
            }
            if coh {
                row.extend([r.coherent_map.values()[i], r.coherent_se[i]]);
            }
            w.row(&row)?;
        }
    }
    w.finish()
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct DirectionSummary {
    theta_rad: f64,
    phi_rad: f64,
    incoherent_eV_per_sr: Estimate,
    coherent_eV_per_sr: Estimate,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct EnsembleSummary {
    n_samples: usize,
    seed: u64,
    batches: usize,
    incoherent_total_eV: Option<Estimate>,
    coherent_total_eV: Option<Estimate>,
    directions: Vec<DirectionSummary>,
}

fn summarize(r: &EnsembleResult, seed: u64) -> EnsembleSummary {
    let grid = r.grid().clone();
    let nw = grid.omegas().len();
    let wts = grid.omega_weights().to_vec();
    let dir_energy = |vals: &[f64], d: usize| (0..nw).map(|k| wts[k] * vals[d * nw + k]).sum::<f64>();
    let directions = if grid.is_full_sphere() {
        Vec::new()
    } else {
        (0..grid.n_directions())
            .map(|d| DirectionSummary {
                theta_rad: grid.direction(d).theta(),
                phi_rad: grid.direction(d).phi(),
                incoherent_eV_per_sr: r.jackknife(|inc, _| dir_energy(inc, d)),
                coherent_eV_per_sr: r.jackknife(|_, coh| dir_energy(coh, d)),
            })
            .collect()
    };
    let total = |vals: &[f64]| (0..grid.n_directions()).map(|d| grid.solid_angle_weight(d) * dir_energy(vals, d)).sum::<f64>();
    let sphere = grid.is_full_sphere();
    EnsembleSummary {
        n_samples: r.n_samples,
        seed,
        batches: r.n_batches(),
        incoherent_total_eV: sphere.then(|| r.jackknife(|inc, _| total(inc))),
        coherent_total_eV: sphere.then(|| r.jackknife(|_, coh| total(coh))),
        directions,
    }
}

fn run_ensemble(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let e = &config.ensemble;
    let state = wavepacket_state(config)?;
    let samples = sample_phase_space(&state, e.n_samples, e.seed)?;
    let grid = build_grid(config)?;
    let mut result = ensemble_radiation(&samples, &config.beam, &grid, &ensemble_options(config)?)?;
    result.seed = Some(e.seed);
    let mut meta = standard_meta("ensemble", config, Some(e.seed));
    meta.push(("grid", crate::radiation::describe_grid(&grid)));
    meta.push(("n_samples", e.n_samples.to_string()));
    Ok(vec![
        ensemble_csv(&dir.join("ensemble.csv"), &meta, &result, e.model)?,
        write_json(&dir.join("ensemble_summary.json"), &summarize(&result, e.seed))?,
    ])
}

fn run_compare(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let e = &config.ensemble;
    let g = match wavepacket_state(config)?.as_gaussian() {
        Some(g) => g,
        None => return Err(Error::NegativeWigner),
    };
    let grid = build_grid(config)?;
    let (report, result) = compare_models(&g, &config.beam, &grid, &ensemble_options(config)?, e.n_samples, e.seed)?;
    let mut meta = standard_meta("compare", config, Some(e.seed));
    meta.push(("grid", crate::radiation::describe_grid(&grid)));
    meta.push(("n_samples", e.n_samples.to_string()));
    Ok(vec![
        ensemble_csv(&dir.join("ensemble.csv"), &meta, &result, EnsembleModel::Both)?,
        write_json(&dir.join("compare.json"), &report)?,
    ])
}
