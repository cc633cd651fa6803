//! Classical far-field radiation of a trajectory.
//!
//! The spectral-angular energy uses the velocity form
//!
//! ```text
//! d²ε/dΩdω = (αħω₀ / 4π²) ω² |A|²,   A = n × (n × ∫ β e^{iω(t − n·r)} dt)
//! ```
//!
//! in normalized units. The integral is a uniform-step sum over the (possibly
//! decimated) trajectory, continued analytically past both ends as a
//! constant-velocity geometric series. For a band-limited integrand with
//! field-free ends this is exact up to aliasing, so a few dozen samples per
//! laser period suffice even at ω = 10 ω₀.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{Trajectory, PERIOD};
use crate::error::{domain, Error, Result};
use crate::grid::AngularSpectralGrid;
use crate::units::{consts::FINE_STRUCTURE, Direction, UnitSystem};
use crate::vec3::Vec3;

/// Complex far-field vector amplitude n × (n × ∫β e^{iωφ} dt).
pub type Amplitude = [Complex64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// Field-free ends, continued as constant-velocity tails.
    None,
    /// Hann taper across the whole trajectory, for truncated trajectories.
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiationSettings {
    pub units: UnitSystem,
    pub window: Window,
    /// Minimum number of quadrature samples per laser period; the trajectory
    /// is decimated down to this density.
    pub samples_per_period: f64,
    /// Largest |dβ/dt| accepted at a trajectory end without a window.
    pub endpoint_tolerance: f64,
    /// Presentation distance for intensities.
    pub observation_radius_um: f64,
}

impl RadiationSettings {
    pub fn new(units: UnitSystem) -> Self {
        RadiationSettings {
            units,
            window: Window::None,
            samples_per_period: 100.0,
            endpoint_tolerance: 1e-8,
            observation_radius_um: 100.0,
        }
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn with_samples_per_period(mut self, spp: f64) -> Self {
        self.samples_per_period = spp;
        self
    }

    /// eV per (sr · unit ω/ω₀) per ω²|A|².
    pub fn spectral_prefactor(&self) -> f64 {
        FINE_STRUCTURE * self.units.photon_energy_ev() / (4.0 * PI * PI)
    }
}

/// Decimated trajectory samples in structure-of-arrays layout.
#[derive(Debug, Clone)]
pub struct PreparedTrajectory {
    h: f64,
    t: Vec<f64>,
    r: [Vec<f64>; 3],
    b: [Vec<f64>; 3],
    tails: bool,
}

impl PreparedTrajectory {
    pub fn new(traj: &Trajectory, settings: &RadiationSettings) -> Result<Self> {
        if traj.len() < 2 {
            return domain("trajectory too short for a radiation integral");
        }
        if !(settings.samples_per_period > 2.0) {
            return domain("samples_per_period must exceed 2");
        }
        let target = PERIOD / settings.samples_per_period;
        let stride = ((target / traj.dt()).floor() as usize).clamp(1, (traj.len() - 1).max(1));
        let last = (traj.len() - 1) / stride * stride;
        let idx: Vec<usize> = (0..=last).step_by(stride).collect();
        if idx.len() < 2 {
            return domain("trajectory too short for a radiation integral");
        }
        let acc = traj.accelerations();
        let vel = traj.velocities();
        let tails = settings.window == Window::None;
        if tails {
            let tol = settings.endpoint_tolerance;
            let a_end = acc[last].norm();
            if !(a_end < tol) {
                return Err(Error::EndpointArtifact { end: "final", accel: a_end });
            }
            // an electron born at rest has no pre-birth tail to misrepresent
            let a_start = acc[0].norm();
            if vel[0].norm() > 0.0 && !(a_start < tol) {
                return Err(Error::EndpointArtifact { end: "initial", accel: a_start });
            }
        }
        let n = idx.len();
        let mut out = PreparedTrajectory {
            h: traj.dt() * stride as f64,
            t: Vec::with_capacity(n),
            r: [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)],
            b: [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)],
            tails,
        };
        for (m, &i) in idx.iter().enumerate() {
            let s = &traj.states()[i];
            let w = match settings.window {
                Window::None => 1.0,
                Window::Hann => (PI * m as f64 / (n - 1) as f64).sin().powi(2),
            };
            out.t.push(s.time);
            for c in 0..3 {
                out.r[c].push(s.position[c]);
                out.b[c].push(vel[i][c] * w);
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Quadrature step after decimation.
    pub fn step(&self) -> f64 {
        self.h
    }

    fn phases(&self, n: Vec3) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.t[k] - (n.x * self.r[0][k] + n.y * self.r[1][k] + n.z * self.r[2][k]))
            .collect()
    }

    fn beta(&self, k: usize) -> Vec3 {
        Vec3::new(self.b[0][k], self.b[1][k], self.b[2][k])
    }

    /// Adds the constant-velocity continuations beyond both ends and applies
    /// the transverse projection.
    fn finish(&self, n: Vec3, omega: f64, mut sum: [Complex64; 3], z_first: Complex64, z_last: Complex64) -> Amplitude {
        if self.tails {
            let last = self.len() - 1;
            let b_end = self.beta(last);
            let b_start = self.beta(0);
            // Σ_{m≥1} q^m = q/(1-q) = -1/2 + (i/2) cot(θ/2)
            let theta_end = omega * (1.0 - n.dot(b_end)) * self.h;
            let theta_start = omega * (1.0 - n.dot(b_start)) * self.h;
            let tail_end = Complex64::new(-0.5, 0.5 / (0.5 * theta_end).tan()) * z_last;
            let tail_start = Complex64::new(-0.5, -0.5 / (0.5 * theta_start).tan()) * z_first;
            for c in 0..3 {
                sum[c] += tail_end * b_end[c] + tail_start * b_start[c];
            }
        }
        for s in sum.iter_mut() {
            *s *= self.h;
        }
        project(n, sum)
    }

    /// Amplitudes at every frequency of `omegas` for one direction.
    pub fn amplitudes(&self, direction: Direction, omegas: &[f64]) -> Vec<Amplitude> {
        let n = direction.unit_vector();
        let phi = self.phases(n);
        let len = self.len();
        let uniform = uniform_step(omegas);
        let mut out = Vec::with_capacity(omegas.len());
        match uniform {
            Some(step) => {
                // Blocks of samples small enough to stay in L1 while the
                // recurrence sweeps the whole frequency axis.
                const BLOCK: usize = 512;
                let nw = omegas.len();
                let mut sums = vec![[Complex64::new(0.0, 0.0); 3]; nw];
                let mut zr = [0.0; BLOCK];
                let mut zi = [0.0; BLOCK];
                let mut rr = [0.0; BLOCK];
                let mut ri = [0.0; BLOCK];
                for start in (0..len).step_by(BLOCK) {
                    let end = (start + BLOCK).min(len);
                    let m = end - start;
                    let block_phi = &phi[start..end];
                    for (k, &p) in block_phi.iter().enumerate() {
                        let (s, c) = (step * p).sin_cos();
                        rr[k] = c;
                        ri[k] = s;
                    }
                    let b = [&self.b[0][start..end], &self.b[1][start..end], &self.b[2][start..end]];
                    for (j, &omega) in omegas.iter().enumerate() {
                        if j % 64 == 0 {
                            // restart the recurrence to bound rounding drift
                            for (k, &p) in block_phi.iter().enumerate() {
                                let (s, c) = (omega * p).sin_cos();
                                zr[k] = c;
                                zi[k] = s;
                            }
                        }
                        let part = accumulate_and_rotate(&mut zr[..m], &mut zi[..m], &rr[..m], &ri[..m], b);
                        for c in 0..3 {
                            sums[j][c] += part[c];
                        }
                    }
                }
                for (j, &omega) in omegas.iter().enumerate() {
                    let z_first = Complex64::from_polar(1.0, omega * phi[0]);
                    let z_last = Complex64::from_polar(1.0, omega * phi[len - 1]);
                    out.push(self.finish(n, omega, sums[j], z_first, z_last));
                }
            }
            None => {
                for &omega in omegas {
                    let mut sum = [Complex64::new(0.0, 0.0); 3];
                    for k in 0..len {
                        let z = Complex64::from_polar(1.0, omega * phi[k]);
                        for c in 0..3 {
                            sum[c] += z * self.b[c][k];
                        }
                    }
                    let z_first = Complex64::from_polar(1.0, omega * phi[0]);
                    let z_last = Complex64::from_polar(1.0, omega * phi[len - 1]);
                    out.push(self.finish(n, omega, sum, z_first, z_last));
                }
            }
        }
        out
    }
}

/// Σ_k b_k z_k for the three components, then z_k ← z_k r_k.
pub fn accumulate_and_rotate(zr: &mut [f64], zi: &mut [f64], rr: &[f64], ri: &[f64], b: [&[f64]; 3]) -> [Complex64; 3] {
    let n = zr.len();
    let (zi, rr, ri) = (&mut zi[..n], &rr[..n], &ri[..n]);
    let (bx, by, bz) = (&b[0][..n], &b[1][..n], &b[2][..n]);
    let (mut xr, mut xi, mut yr, mut yi, mut wr, mut wi) = ([0.0f64; 4], [0.0f64; 4], [0.0f64; 4], [0.0f64; 4], [0.0f64; 4], [0.0f64; 4]);
    let split = n / 4 * 4;
    let mut k = 0;
    while k < split {
        for l in 0..4 {
            let i = k + l;
            let (a, s) = (zr[i], zi[i]);
            xr[l] += bx[i] * a;
            xi[l] += bx[i] * s;
            yr[l] += by[i] * a;
            yi[l] += by[i] * s;
            wr[l] += bz[i] * a;
            wi[l] += bz[i] * s;
            zr[i] = a * rr[i] - s * ri[i];
            zi[i] = a * ri[i] + s * rr[i];
        }
        k += 4;
    }
    let fold = |v: [f64; 4]| (v[0] + v[1]) + (v[2] + v[3]);
    let mut tot = [fold(xr), fold(xi), fold(yr), fold(yi), fold(wr), fold(wi)];
    for i in split..n {
        let (a, s) = (zr[i], zi[i]);
        tot[0] += bx[i] * a;
        tot[1] += bx[i] * s;
        tot[2] += by[i] * a;
        tot[3] += by[i] * s;
        tot[4] += bz[i] * a;
        tot[5] += bz[i] * s;
        zr[i] = a * rr[i] - s * ri[i];
        zi[i] = a * ri[i] + s * rr[i];
    }
    [
        Complex64::new(tot[0], tot[1]),
        Complex64::new(tot[2], tot[3]),
        Complex64::new(tot[4], tot[5]),
    ]
}

fn uniform_step(omegas: &[f64]) -> Option<f64> {
    let n = omegas.len();
    if n < 2 {
        return None;
    }
    let step = (omegas[n - 1] - omegas[0]) / (n - 1) as f64;
    omegas
        .iter()
        .enumerate()
        .all(|(i, w)| (w - (omegas[0] + step * i as f64)).abs() <= 1e-9 * step.max(1.0))
        .then_some(step)
}

/// n × (n × v) = n (n·v) − v.
fn project(n: Vec3, v: [Complex64; 3]) -> Amplitude {
    let nv = v[0] * n.x + v[1] * n.y + v[2] * n.z;
    [nv * n.x - v[0], nv * n.y - v[1], nv * n.z - v[2]]
}

pub fn amplitude_norm_sqr(a: &Amplitude) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum()
}

/// Far-field amplitude for a single direction and frequency (units of ω₀).
pub fn farfield_amplitude(
    trajectory: &Trajectory,
    direction: Direction,
    omega: f64,
    settings: &RadiationSettings,
) -> Result<Amplitude> {
    if !(omega > 0.0) {
        return domain("frequency must be positive");
    }
    let prepared = PreparedTrajectory::new(trajectory, settings)?;
    Ok(prepared.amplitudes(direction, &[omega])[0])
}

/// d²ε/dΩdω on an angle-frequency grid.
#[derive(Debug, Clone)]
pub struct RadiationMap {
    grid: AngularSpectralGrid,
    /// eV per steradian per unit ω/ω₀, direction-major.
    values: Vec<f64>,
    units: UnitSystem,
    pub observation_radius_um: f64,
}

impl RadiationMap {
    pub fn from_values(grid: AngularSpectralGrid, values: Vec<f64>, units: UnitSystem) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return domain("map values do not match the grid");
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return domain("map values must be finite and non-negative");
        }
        Ok(RadiationMap { grid, values, units, observation_radius_um: 100.0 })
    }

    pub fn zeros(grid: AngularSpectralGrid, units: UnitSystem) -> Self {
        let n = grid.n_nodes();
        RadiationMap { grid, values: vec![0.0; n], units, observation_radius_um: 100.0 }
    }

    pub fn grid(&self) -> &AngularSpectralGrid {
        &self.grid
    }

    pub fn units(&self) -> UnitSystem {
        self.units
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, direction: usize, omega: usize) -> f64 {
        self.values[direction * self.grid.omegas().len() + omega]
    }

    /// Spectrum of one grid direction, eV/sr per unit ω/ω₀.
    pub fn direction_spectrum(&self, direction: usize) -> &[f64] {
        let n = self.grid.omegas().len();
        &self.values[direction * n..(direction + 1) * n]
    }

    /// dε/dΩ of one grid direction (eV/sr), integrated over the frequency axis.
    pub fn direction_energy(&self, direction: usize) -> f64 {
        dot(self.direction_spectrum(direction), self.grid.omega_weights())
    }

    /// Fluence-like presentation at the observation radius, eV/µm².
    pub fn direction_fluence_ev_per_um2(&self, direction: usize) -> f64 {
        self.direction_energy(direction) / self.observation_radius_um.powi(2)
    }

    /// Solid-angle-integrated spectrum.
    pub fn integrated_spectrum(&self) -> Vec<f64> {
        let nw = self.grid.omegas().len();
        let mut out = vec![0.0; nw];
        for d in 0..self.grid.n_directions() {
            let w = self.grid.solid_angle_weight(d);
            for (o, v) in out.iter_mut().zip(self.direction_spectrum(d)) {
                *o += w * v;
            }
        }
        out
    }

    /// Integral of `weight(ω) · d²ε/dΩdω` over the sphere and the part of the
    /// frequency axis between `omega_lo` and `omega_hi`.
    fn band_integral<F: Fn(f64) -> f64>(&self, omega_lo: f64, omega_hi: f64, weight: F) -> f64 {
        let spectrum = self.integrated_spectrum();
        band_integral(self.grid.omegas(), &spectrum, omega_lo, omega_hi, weight)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Integrates the piecewise-linear interpolant of `values · weight` over
/// [lo, hi] ∩ [omegas[0], omegas[n-1]], with partial weighting of edge bins.
fn band_integral<F: Fn(f64) -> f64>(omegas: &[f64], values: &[f64], lo: f64, hi: f64, weight: F) -> f64 {
    let f: Vec<f64> = omegas.iter().zip(values).map(|(w, v)| v * weight(*w)).collect();
    let mut total = 0.0;
    for i in 0..omegas.len().saturating_sub(1) {
        let (x0, x1) = (omegas[i], omegas[i + 1]);
        let l = lo.max(x0);
        let r = hi.min(x1);
        if r <= l {
            continue;
        }
        let interp = |x: f64| f[i] + (f[i + 1] - f[i]) * (x - x0) / (x1 - x0);
        total += 0.5 * (r - l) * (interp(l) + interp(r));
    }
    total
}

/// Converts a wavelength band to a frequency band inside the grid, allowing
/// for rounding at the grid edges.
fn band_to_omegas(omegas: &[f64], units: UnitSystem, lambda_min_nm: f64, lambda_max_nm: f64) -> Result<Option<(f64, f64)>> {
    if !(lambda_min_nm > 0.0 && lambda_max_nm > 0.0) {
        return domain("band edges must be positive wavelengths");
    }
    if lambda_min_nm > lambda_max_nm {
        return domain("band lower wavelength exceeds the upper one");
    }
    if lambda_min_nm == lambda_max_nm {
        return Ok(None);
    }
    let lo = units.wavelength_to_omega(lambda_max_nm);
    let hi = units.wavelength_to_omega(lambda_min_nm);
    let (gmin, gmax) = (omegas[0], omegas[omegas.len() - 1]);
    let slack = 1e-12 * gmax;
    if lo < gmin - slack || hi > gmax + slack {
        return domain(format!(
            "band {}-{} nm lies outside the grid's {:.1}-{:.1} nm range",
            lambda_min_nm,
            lambda_max_nm,
            units.omega_to_wavelength(gmax),
            units.omega_to_wavelength(gmin)
        ));
    }
    Ok(Some((lo.max(gmin), hi.min(gmax))))
}

/// Total radiated energy in eV over the sphere and the whole frequency axis.
pub fn total_energy(map: &RadiationMap) -> f64 {
    dot(&map.integrated_spectrum(), map.grid.omega_weights())
}

/// Energy in eV radiated between two wavelengths (nm).
pub fn band_energy(map: &RadiationMap, lambda_min_nm: f64, lambda_max_nm: f64) -> Result<f64> {
    match band_to_omegas(map.grid.omegas(), map.units, lambda_min_nm, lambda_max_nm)? {
        None => Ok(0.0),
        Some((lo, hi)) => Ok(map.band_integral(lo, hi, |_| 1.0)),
    }
}

/// Fills a radiation map. Directions are evaluated in parallel; the result
/// does not depend on the thread count.
pub fn radiation_map(
    trajectory: &Trajectory,
    grid: &AngularSpectralGrid,
    settings: &RadiationSettings,
) -> Result<RadiationMap> {
    let prepared = PreparedTrajectory::new(trajectory, settings)?;
    let pref = settings.spectral_prefactor();
    let omegas = grid.omegas();
    let rows: Vec<Vec<f64>> = (0..grid.n_directions())
        .into_par_iter()
        .map(|d| {
            prepared
                .amplitudes(grid.direction(d), omegas)
                .iter()
                .zip(omegas)
                .map(|(a, w)| pref * w * w * amplitude_norm_sqr(a))
                .collect()
        })
        .collect();
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    let mut map = RadiationMap::from_values(grid.clone(), values, settings.units)?;
    map.observation_radius_um = settings.observation_radius_um;
    Ok(map)
}

/// Time-domain total from the relativistic Larmor formula, in eV:
/// (2/3) αħω₀ ∫ γ⁶ [β̇² − (β × β̇)²] dt.
pub fn larmor_total(trajectory: &Trajectory, units: UnitSystem) -> f64 {
    let power: Vec<f64> = trajectory
        .states()
        .iter()
        .zip(trajectory.velocities())
        .zip(trajectory.accelerations())
        .map(|((s, b), a)| {
            let g2 = 1.0 + s.momentum.norm_sqr();
            g2 * g2 * g2 * (a.norm_sqr() - b.cross(*a).norm_sqr())
        })
        .collect();
    let h = trajectory.dt();
    let n = power.len();
    let integral = h * (power.iter().sum::<f64>() - 0.5 * (power[0] + power[n - 1]));
    2.0 / 3.0 * FINE_STRUCTURE * units.photon_energy_ev() * integral
}

/// Spectral energy per unit ω/ω₀, either for one direction (eV/sr) or
/// integrated over the sphere (eV).
#[derive(Debug, Clone, Serialize)]
pub struct EmissionSpectrum {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    /// `None` for a solid-angle-integrated spectrum.
    pub direction: Option<(f64, f64)>,
    pub wavelength_nm: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Provenance {
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub grid: String,
}

impl EmissionSpectrum {
    pub fn integrated(map: &RadiationMap) -> Self {
        EmissionSpectrum {
            omegas: map.grid.omegas().to_vec(),
            values: map.integrated_spectrum(),
            direction: None,
            wavelength_nm: map.units.wavelength_nm(),
            provenance: Provenance { grid: describe_grid(map.grid()), ..Default::default() },
        }
    }

    pub fn for_direction(map: &RadiationMap, direction: usize) -> Self {
        let d = map.grid.direction(direction);
        EmissionSpectrum {
            omegas: map.grid.omegas().to_vec(),
            values: map.direction_spectrum(direction).to_vec(),
            direction: Some((d.theta(), d.phi())),
            wavelength_nm: map.units.wavelength_nm(),
            provenance: Provenance { grid: describe_grid(map.grid()), ..Default::default() },
        }
    }

    pub fn total(&self) -> f64 {
        dot(&self.values, &crate::grid::trapezoid_weights(&self.omegas))
    }

    /// Frequency (ω/ω₀) of the spectral maximum, refined by a parabola
    /// through the neighbouring nodes.
    pub fn peak_omega(&self) -> f64 {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
        if i == 0 || i + 1 == self.values.len() {
            return self.omegas[i];
        }
        let (y0, y1, y2) = (self.values[i - 1], self.values[i], self.values[i + 1]);
        let denom = y0 - 2.0 * y1 + y2;
        let h = self.omegas[i + 1] - self.omegas[i];
        if denom == 0.0 {
            self.omegas[i]
        } else {
            self.omegas[i] + 0.5 * h * (y0 - y2) / denom
        }
    }

    pub fn peak_wavelength_nm(&self) -> f64 {
        self.wavelength_nm / self.peak_omega()
    }

    pub fn band_energy(&self, lambda_min_nm: f64, lambda_max_nm: f64) -> Result<f64> {
        let units = UnitSystem::new(self.wavelength_nm)?;
        match band_to_omegas(&self.omegas, units, lambda_min_nm, lambda_max_nm)? {
            None => Ok(0.0),
            Some((lo, hi)) => Ok(band_integral(&self.omegas, &self.values, lo, hi, |_| 1.0)),
        }
    }
}

pub(crate) fn describe_grid(grid: &AngularSpectralGrid) -> String {
    let w = grid.omegas();
    let angles = if grid.is_full_sphere() {
        format!("{}x{} sphere", grid.thetas().len(), grid.phis().len())
    } else {
        format!("{} explicit", grid.n_directions())
    };
    format!(
        "{angles} directions, {} frequencies {}..{} w0",
        w.len(),
        w[0],
        w[w.len() - 1]
    )
}

/// Anything carrying spectral energy that can be converted to photons.
pub trait PhotonSource {
    /// Integral of `weight(ω) × spectral energy` (eV) over a frequency band.
    fn weighted_band(&self, band: Option<(f64, f64)>, weight: &dyn Fn(f64) -> f64) -> Result<f64>;
    fn units(&self) -> UnitSystem;
}

fn resolve_band(omegas: &[f64], units: UnitSystem, band_nm: Option<(f64, f64)>) -> Result<Option<(f64, f64)>> {
    match band_nm {
        None => Ok(Some((omegas[0], omegas[omegas.len() - 1]))),
        Some((a, b)) => band_to_omegas(omegas, units, a, b),
    }
}

impl PhotonSource for RadiationMap {
    fn weighted_band(&self, band: Option<(f64, f64)>, weight: &dyn Fn(f64) -> f64) -> Result<f64> {
        Ok(match resolve_band(self.grid.omegas(), self.units, band)? {
            None => 0.0,
            Some((lo, hi)) => self.band_integral(lo, hi, weight),
        })
    }

    fn units(&self) -> UnitSystem {
        self.units
    }
}

impl PhotonSource for EmissionSpectrum {
    fn weighted_band(&self, band: Option<(f64, f64)>, weight: &dyn Fn(f64) -> f64) -> Result<f64> {
        let units = UnitSystem::new(self.wavelength_nm)?;
        Ok(match resolve_band(&self.omegas, units, band)? {
            None => 0.0,
            Some((lo, hi)) => band_integral(&self.omegas, &self.values, lo, hi, weight),
        })
    }

    fn units(&self) -> UnitSystem {
        UnitSystem::new(self.wavelength_nm).expect("spectrum wavelength is valid")
    }
}

/// Expected photon number ∫ (d²ε/dΩdω)/(ħω), optionally restricted to a
/// wavelength band (nm) and scaled by a collection efficiency.
pub fn photon_count_estimate(source: &dyn PhotonSource, band_nm: Option<(f64, f64)>, collection_efficiency: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&collection_efficiency) {
        return domain("collection efficiency must lie in [0, 1]");
    }
    let quantum = source.units().photon_energy_ev();
    let photons = source.weighted_band(band_nm, &|w| 1.0 / (quantum * w))?;
    Ok(collection_efficiency * photons)
}

/// Photons in a quasi-monochromatic packet of energy `energy_ev` at `wavelength_nm`.
pub fn photons_at_wavelength(energy_ev: f64, wavelength_nm: f64, collection_efficiency: f64) -> f64 {
    let photon_ev = crate::units::consts::HBAR * 2.0 * PI * crate::units::consts::SPEED_OF_LIGHT
        / (wavelength_nm * 1e-9)
        / crate::units::consts::ELEMENTARY_CHARGE;
    collection_efficiency * energy_ev / photon_ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{push_trajectory, ElectronState, ZeroField};
    use crate::grid::linspace;

    fn units() -> UnitSystem {
        UnitSystem::new(800.0).unwrap()
    }

    /// β_z = β₀ w(t) sin t with w a sin² window over `periods` cycles, so
    /// velocity and acceleration vanish at both ends.
    fn dipole(beta0: f64, periods: usize, per_period: usize) -> Trajectory {
        let dt = PERIOD / per_period as f64;
        let n = periods * per_period + 1;
        let span = PERIOD * periods as f64;
        let mut z = 0.0;
        let mut pos = Vec::with_capacity(n);
        let mut mom = Vec::with_capacity(n);
        let mut acc = Vec::with_capacity(n);
        let beta = |t: f64| beta0 * (PI * t / span).sin().powi(2) * t.sin();
        for i in 0..n {
            let t = dt * i as f64;
            let b = beta(t);
            if i > 0 {
                z += 0.5 * dt * (beta(t - dt) + b);
            }
            let w = (PI * t / span).sin().powi(2);
            let dw = PI / span * (2.0 * PI * t / span).sin();
            let db = beta0 * (dw * t.sin() + w * t.cos());
            let g = 1.0 / (1.0 - b * b).sqrt();
            pos.push(Vec3::new(0.0, 0.0, z));
            mom.push(Vec3::new(0.0, 0.0, g * b));
            acc.push(Vec3::new(0.0, 0.0, db));
        }
        Trajectory::from_kinematics(0.0, dt, pos, mom, acc).unwrap()
    }

    #[test]
    fn straight_line_radiates_nothing() {
        let start = ElectronState { position: Vec3::ZERO, momentum: Vec3::new(0.3, 0.1, -0.2), time: 0.0 };
        let traj = push_trajectory(&ZeroField, start, 40.0 * PERIOD, PERIOD / 200.0).unwrap();
        let settings = RadiationSettings::new(units());
        for &(theta, phi) in &[(0.3, 0.0), (PI / 2.0, 1.0), (2.5, 4.0)] {
            for &w in &[0.05, 0.7, 1.0, 3.3, 9.9] {
                let a = farfield_amplitude(&traj, Direction::new(theta, phi).unwrap(), w, &settings).unwrap();
                assert!(amplitude_norm_sqr(&a).sqrt() < 1e-12, "{theta} {phi} {w}: {a:?}");
            }
        }
    }

    #[test]
    fn larmor_matches_nonrelativistic_closed_form() {
        // constant-amplitude oscillation: ⟨β̇²⟩ = β₀²/2 over whole cycles
        let beta0 = 1e-4;
        let periods = 10;
        let per = 400;
        let dt = PERIOD / per as f64;
        let n = periods * per + 1;
        let (mut pos, mut mom, mut acc) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..n {
            let t = dt * i as f64;
            let b = beta0 * t.sin();
            pos.push(Vec3::new(0.0, 0.0, beta0 * (1.0 - t.cos())));
            mom.push(Vec3::new(0.0, 0.0, b / (1.0 - b * b).sqrt()));
            acc.push(Vec3::new(0.0, 0.0, beta0 * t.cos()));
        }
        let traj = Trajectory::from_kinematics(0.0, dt, pos, mom, acc).unwrap();
        let u = units();
        let duration = PERIOD * periods as f64;
        let expected = 2.0 / 3.0 * FINE_STRUCTURE * u.photon_energy_ev() * 0.5 * beta0 * beta0 * duration;
        let got = larmor_total(&traj, u);
        assert!((got / expected - 1.0).abs() < 1e-6, "{got} vs {expected}");
    }

    #[test]
    fn larmor_of_free_motion_is_zero() {
        let start = ElectronState { position: Vec3::ZERO, momentum: Vec3::new(0.0, 2.0, 0.0), time: 0.0 };
        let traj = push_trajectory(&ZeroField, start, 10.0, 0.01).unwrap();
        assert_eq!(larmor_total(&traj, units()), 0.0);
    }

    #[test]
    fn dipole_pattern_and_peak() {
        let traj = dipole(1e-7, 20, 200);
        let settings = RadiationSettings::new(units());
        let thetas = vec![0.2, 0.6, 1.0, PI / 2.0, 2.2, 2.9];
        let phis = vec![0.0, 1.3, 3.5];
        let grid = AngularSpectralGrid::directions(thetas, phis, linspace(0.5, 1.5, 201)).unwrap();
        let map = radiation_map(&traj, &grid, &settings).unwrap();
        let reference = map.direction_energy(grid.n_directions() / 2);
        let ref_dir = grid.direction(grid.n_directions() / 2);
        for d in 0..grid.n_directions() {
            let dir = grid.direction(d);
            let line = EmissionSpectrum::for_direction(&map, d);
            // the ω² factor pulls the peak slightly above ω₀
            assert!((line.peak_omega() - 1.0).abs() < 5e-3, "peak {}", line.peak_omega());
            let ratio = map.direction_energy(d) / reference;
            let expected = dir.theta().sin().powi(2) / ref_dir.theta().sin().powi(2);
            assert!((ratio / expected - 1.0).abs() < 1e-6, "θ={} φ={}: {ratio} vs {expected}", dir.theta(), dir.phi());
        }
    }

    #[test]
    fn dipole_spectral_total_matches_larmor() {
        let traj = dipole(0.01, 20, 200);
        let settings = RadiationSettings::new(units());
        let grid = AngularSpectralGrid::sphere(16, 8, linspace(0.05, 2.5, 981)).unwrap();
        let map = radiation_map(&traj, &grid, &settings).unwrap();
        let spectral = total_energy(&map);
        let larmor = larmor_total(&traj, units());
        assert!((spectral / larmor - 1.0).abs() < 0.01, "{spectral} vs {larmor}");
    }

    #[test]
    fn decimation_converges_to_full_resolution() {
        let traj = dipole(0.05, 8, 1000);
        let dir = Direction::new(1.1, 0.4).unwrap();
        let full = RadiationSettings::new(units()).with_samples_per_period(2000.0);
        let coarse = RadiationSettings::new(units());
        for &w in &[0.9, 1.0, 1.1, 2.0] {
            let a = farfield_amplitude(&traj, dir, w, &full).unwrap();
            let b = farfield_amplitude(&traj, dir, w, &coarse).unwrap();
            let diff: f64 = (0..3).map(|c| (a[c] - b[c]).norm_sqr()).sum::<f64>().sqrt();
            assert!(diff <= 1e-6 * amplitude_norm_sqr(&a).sqrt().max(1e-12), "ω={w}: {diff}");
        }
    }

    #[test]
    fn blocked_recurrence_matches_direct_sum() {
        let traj = dipole(0.3, 12, 500);
        let settings = RadiationSettings::new(units());
        let prepared = PreparedTrajectory::new(&traj, &settings).unwrap();
        let dir = Direction::new(0.8, 2.0).unwrap();
        let uniform = linspace(0.1, 9.0, 300);
        let mut skewed = uniform.clone();
        skewed[1] += 1e-3;
        let a = prepared.amplitudes(dir, &uniform);
        let b = prepared.amplitudes(dir, &skewed);
        for j in (0..300).filter(|&j| j != 1) {
            let diff: f64 = (0..3).map(|c| (a[j][c] - b[j][c]).norm_sqr()).sum::<f64>().sqrt();
            assert!(diff < 1e-10 * (1.0 + amplitude_norm_sqr(&a[j]).sqrt()), "j={j}: {diff}");
        }
    }

    #[test]
    fn truncated_trajectory_needs_a_window() {
        let mut traj = dipole(0.01, 6, 200);
        let n = traj.len();
        let states = traj.states()[..n - 50].to_vec();
        let acc = traj.accelerations()[..n - 50].to_vec();
        traj = Trajectory::from_kinematics(
            0.0,
            traj.dt(),
            states.iter().map(|s| s.position).collect(),
            states.iter().map(|s| s.momentum).collect(),
            acc,
        )
        .unwrap();
        let settings = RadiationSettings::new(units());
        let err = farfield_amplitude(&traj, Direction::FORWARD, 1.0, &settings).unwrap_err();
        assert!(matches!(err, Error::EndpointArtifact { end: "final", .. }), "{err}");
        let windowed = settings.with_window(Window::Hann);
        assert!(farfield_amplitude(&traj, Direction::FORWARD, 1.0, &windowed).is_ok());
    }

    #[test]
    fn band_edges() {
        let traj = dipole(0.05, 10, 200);
        let settings = RadiationSettings::new(units());
        let grid = AngularSpectralGrid::sphere(8, 8, linspace(0.5, 1.5, 101)).unwrap();
        let map = radiation_map(&traj, &grid, &settings).unwrap();
        let total = total_energy(&map);
        let full = band_energy(&map, 800.0 / 1.5, 800.0 / 0.5).unwrap();
        assert!((full - total).abs() <= 1e-12 * total);
        assert_eq!(band_energy(&map, 900.0, 900.0).unwrap(), 0.0);
        assert!(band_energy(&map, 300.0, 900.0).is_err());
        assert!(band_energy(&map, 900.0, 850.0).is_err());
        let zero = RadiationMap::zeros(grid.clone(), units());
        assert_eq!(total_energy(&zero), 0.0);
        assert_eq!(photon_count_estimate(&zero, None, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn photon_counts() {
        assert!((photons_at_wavelength(1.377_602, 900.0, 1.0) - 1.0).abs() < 1e-5);
        let n = photons_at_wavelength(0.05, 900.0, 0.1);
        assert!((n - 0.00363).abs() < 1e-5, "{n}");
        // a narrow line at 900 nm carrying 0.05 eV
        let u = units();
        let w900 = u.wavelength_to_omega(900.0);
        let omegas = linspace(w900 - 0.01, w900 + 0.01, 2001);
        let values: Vec<f64> = omegas.iter().map(|w| (-((w - w900) / 1e-3).powi(2)).exp()).collect();
        let mut line = EmissionSpectrum {
            omegas,
            values,
            direction: None,
            wavelength_nm: 800.0,
            provenance: Provenance::default(),
        };
        let scale = 0.05 / line.total();
        line.values.iter_mut().for_each(|v| *v *= scale);
        let count = photon_count_estimate(&line, None, 0.1).unwrap();
        assert!((count / n - 1.0).abs() < 1e-4, "{count} vs {n}");
        assert!(photon_count_estimate(&line, None, 1.5).is_err());
    }
}
