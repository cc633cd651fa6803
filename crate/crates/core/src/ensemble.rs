//! Emission of a wave packet as an incoherent average of point emitters over
//! its Wigner distribution, against the coherent extended-source picture.
//!
//! Each phase-space sample is pushed as a classical electron and its complex
//! far-field amplitude recorded on a shared grid. The incoherent map is the
//! mean of |A|²; the coherent map is |mean A|². All amplitudes refer to one
//! spatial origin, so the mean carries the cloud's form factor.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{push_until_field_free, ElectronState, DEFAULT_DT, PERIOD};
use crate::error::{config, domain, Error, Result};
use crate::grid::{gauss_legendre, AngularSpectralGrid};
use crate::laser::{BeamConfig, LaserField};
use crate::radiation::{amplitude_norm_sqr, Amplitude, EmissionSpectrum, PreparedTrajectory, RadiationMap, RadiationSettings};
use crate::units::Direction;
use crate::vec3::Vec3;
use crate::wigner::{GaussianWavePacket, WignerState};

/// Samples drawn from a non-negative Wigner function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSpaceSample {
    /// Position (m).
    pub position: Vec3,
    /// Momentum (mₑc).
    pub momentum: Vec3,
    pub weight: f64,
}

/// `n` independent draws from the product Gaussian of a non-negative state.
/// States with negative regions are refused.
pub fn sample_phase_space(state: &WignerState, n: usize, seed: u64) -> Result<Vec<PhaseSpaceSample>> {
    let g = state.as_gaussian().ok_or(Error::NegativeWigner)?;
    sample_gaussian(&g, n, seed)
}

pub fn sample_gaussian(g: &GaussianWavePacket, n: usize, seed: u64) -> Result<Vec<PhaseSpaceSample>> {
    if n == 0 {
        return domain("sample count must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let sp = g.sigma_p();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut draw = |c: Vec3, s: Vec3| {
            Vec3::new(
                c.x + s.x * unit.sample(&mut rng),
                c.y + s.y * unit.sample(&mut rng),
                c.z + s.z * unit.sample(&mut rng),
            )
        };
        let position = draw(g.center_r, g.sigma_r);
        let momentum = draw(g.center_p, sp);
        out.push(PhaseSpaceSample { position, momentum, weight: 1.0 });
    }
    Ok(out)
}

/// Integration controls for per-sample trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleOptions {
    pub radiation: RadiationSettings,
    /// Pusher step (normalized time).
    pub dt: f64,
    /// Field-free flight appended after the pulse has passed (normalized).
    pub margin: f64,
    /// Upper bound on the flight time (normalized).
    pub max_time: f64,
    /// Upper bound on the number of jackknife batches.
    pub batches: usize,
}

impl EnsembleOptions {
    pub fn new(radiation: RadiationSettings) -> Self {
        EnsembleOptions { radiation, dt: DEFAULT_DT, margin: 2.0 * PERIOD, max_time: 1e5 * PERIOD, batches: 32 }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }
}

/// Amplitudes of one electron starting at normalized `position` with
/// `momentum`, ahead of the pulse by the same laser phase for every sample.
fn electron_amplitudes(
    field: &LaserField,
    position: Vec3,
    momentum: Vec3,
    grid: &AngularSpectralGrid,
    options: &EnsembleOptions,
) -> Result<Vec<Amplitude>> {
    let eta_start = -field.envelope_cutoff() - 1.0;
    let start = ElectronState { position, momentum, time: position.x + eta_start };
    let traj = push_until_field_free(field, start, options.dt, options.margin, options.max_time)?;
    let prepared = PreparedTrajectory::new(&traj, &options.radiation)?;
    let mut out = Vec::with_capacity(grid.n_nodes());
    for d in 0..grid.n_directions() {
        out.extend(prepared.amplitudes(grid.direction(d), grid.omegas()));
    }
    Ok(out)
}

fn pulsed_field(beam: &BeamConfig) -> Result<LaserField> {
    let field = LaserField::new(beam)?;
    if !field.envelope_cutoff().is_finite() {
        return config("beam.model: ensembles need a pulsed beam so every trajectory ends field-free");
    }
    Ok(field)
}

/// Weighted sums over one batch of samples.
#[derive(Debug, Clone)]
struct BatchSums {
    weight: f64,
    amplitude: Vec<Amplitude>,
    power: Vec<f64>,
}

impl BatchSums {
    fn zeros(nodes: usize) -> Self {
        BatchSums { weight: 0.0, amplitude: vec![[Complex64::new(0.0, 0.0); 3]; nodes], power: vec![0.0; nodes] }
    }

    fn add(&mut self, w: f64, amps: &[Amplitude]) {
        self.weight += w;
        for (k, a) in amps.iter().enumerate() {
            for c in 0..3 {
                self.amplitude[k][c] += a[c] * w;
            }
            self.power[k] += w * amplitude_norm_sqr(a);
        }
    }

    fn absorb(&mut self, other: &BatchSums, sign: f64) {
        self.weight += sign * other.weight;
        for k in 0..self.power.len() {
            for c in 0..3 {
                self.amplitude[k][c] += other.amplitude[k][c] * sign;
            }
            self.power[k] += sign * other.power[k];
        }
    }
}

/// A value with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub incoherent_map: RadiationMap,
    pub coherent_map: RadiationMap,
    /// Jackknife standard error at each node of each map.
    pub incoherent_se: Vec<f64>,
    pub coherent_se: Vec<f64>,
    pub n_samples: usize,
    pub seed: Option<u64>,
    batches: Vec<BatchSums>,
    prefactor: Vec<f64>,
}

impl EnsembleResult {
    fn maps_from(sums: &BatchSums, prefactor: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let inv = 1.0 / sums.weight;
        let inc = sums.power.iter().zip(prefactor).map(|(p, f)| f * p * inv).collect();
        let coh = sums
            .amplitude
            .iter()
            .zip(prefactor)
            .map(|(a, f)| {
                let m = [a[0] * inv, a[1] * inv, a[2] * inv];
                f * amplitude_norm_sqr(&m)
            })
            .collect();
        (inc, coh)
    }

    fn total(&self) -> BatchSums {
        let mut t = BatchSums::zeros(self.prefactor.len());
        for b in &self.batches {
            t.absorb(b, 1.0);
        }
        t
    }

    pub fn grid(&self) -> &AngularSpectralGrid {
        self.incoherent_map.grid()
    }

    pub fn n_batches(&self) -> usize {
        self.batches.len()
    }

    /// Delete-one-batch jackknife of any statistic of the two maps
    /// (direction-major node values). The error is NaN with a single batch.
    pub fn jackknife<F: Fn(&[f64], &[f64]) -> f64>(&self, f: F) -> Estimate {
        let value = f(self.incoherent_map.values(), self.coherent_map.values());
        let b = self.batches.len();
        if b < 2 {
            return Estimate { value, std_error: f64::NAN };
        }
        let total = self.total();
        let leave_out: Vec<f64> = self
            .batches
            .iter()
            .map(|batch| {
                let mut s = total.clone();
                s.absorb(batch, -1.0);
                let (inc, coh) = Self::maps_from(&s, &self.prefactor);
                f(&inc, &coh)
            })
            .collect();
        let mean = leave_out.iter().sum::<f64>() / b as f64;
        let var = leave_out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (b - 1) as f64 / b as f64;
        Estimate { value, std_error: var.sqrt() }
    }

    /// Incoherent band energy of one direction (eV/sr) between two
    /// wavelengths, with its standard error.
    pub fn band_energy_estimate(&self, direction: usize, lambda_min_nm: f64, lambda_max_nm: f64) -> Result<Estimate> {
        let units = self.incoherent_map.units();
        let omegas = self.grid().omegas();
        let (lo, hi) = (units.wavelength_to_omega(lambda_max_nm), units.wavelength_to_omega(lambda_min_nm));
        if !(lo < hi) || lo < omegas[0] || hi > omegas[omegas.len() - 1] {
            return domain("band must be non-empty and inside the frequency grid");
        }
        let nw = omegas.len();
        // trapezoid weights clipped to [lo, hi] on the piecewise-linear interpolant
        let mut w = vec![0.0; nw];
        for i in 0..nw - 1 {
            let (x0, x1) = (omegas[i], omegas[i + 1]);
            let (l, r) = (lo.max(x0), hi.min(x1));
            if r <= l {
                continue;
            }
            let h = x1 - x0;
            let frac = |x: f64| (x - x0) / h;
            let (fl, fr) = (frac(l), frac(r));
            w[i] += 0.5 * (r - l) * ((1.0 - fl) + (1.0 - fr));
            w[i + 1] += 0.5 * (r - l) * (fl + fr);
        }
        Ok(self.jackknife(|inc, _| (0..nw).map(|k| w[k] * inc[direction * nw + k]).sum()))
    }
}

/// Pushes every sample through `beam` and accumulates incoherent and
/// coherent maps on `grid`. The reduction runs in a fixed order, so results
/// do not depend on the thread count.
pub fn ensemble_radiation(
    samples: &[PhaseSpaceSample],
    beam: &BeamConfig,
    grid: &AngularSpectralGrid,
    options: &EnsembleOptions,
) -> Result<EnsembleResult> {
    if samples.is_empty() {
        return domain("ensemble needs at least one sample");
    }
    if samples.iter().any(|s| !(s.weight > 0.0 && s.weight.is_finite())) {
        return domain("sample weights must be positive");
    }
    let field = pulsed_field(beam)?;
    let units = field.units();
    let nodes = grid.n_nodes();
    let n = samples.len();
    let n_batches = options.batches.clamp(1, n);
    const CHUNK: usize = 8;
    let mut batches = Vec::with_capacity(n_batches);
    for b in 0..n_batches {
        let (lo, hi) = (b * n / n_batches, (b + 1) * n / n_batches);
        let mut sums = BatchSums::zeros(nodes);
        for chunk_start in (lo..hi).step_by(CHUNK) {
            let chunk_end = (chunk_start + CHUNK).min(hi);
            let amps: Vec<Vec<Amplitude>> = (chunk_start..chunk_end)
                .into_par_iter()
                .map(|i| {
                    let s = &samples[i];
                    let r = Vec3::new(
                        units.metres_to_normalized(s.position.x),
                        units.metres_to_normalized(s.position.y),
                        units.metres_to_normalized(s.position.z),
                    );
                    electron_amplitudes(&field, r, s.momentum, grid, options)
                        .map_err(|e| Error::Sample { index: i, source: Box::new(e) })
                })
                .collect::<Result<_>>()?;
            for (k, a) in amps.iter().enumerate() {
                sums.add(samples[chunk_start + k].weight, a);
            }
        }
        batches.push(sums);
    }
    let pref = options.radiation.spectral_prefactor();
    let nw = grid.omegas().len();
    let prefactor: Vec<f64> = (0..nodes).map(|k| pref * grid.omegas()[k % nw].powi(2)).collect();
    let mut total = BatchSums::zeros(nodes);
    for b in &batches {
        total.absorb(b, 1.0);
    }
    let (inc, coh) = EnsembleResult::maps_from(&total, &prefactor);
    let incoherent_map = RadiationMap::from_values(grid.clone(), inc, units)?;
    let coherent_map = RadiationMap::from_values(grid.clone(), coh, units)?;
    let mut result = EnsembleResult {
        incoherent_map,
        coherent_map,
        incoherent_se: Vec::new(),
        coherent_se: Vec::new(),
        n_samples: n,
        seed: None,
        batches,
        prefactor,
    };
    let (inc_se, coh_se) = node_errors(&result);
    result.incoherent_se = inc_se;
    result.coherent_se = coh_se;
    Ok(result)
}

fn node_errors(r: &EnsembleResult) -> (Vec<f64>, Vec<f64>) {
    let nodes = r.prefactor.len();
    let b = r.batches.len();
    if b < 2 {
        return (vec![f64::NAN; nodes], vec![f64::NAN; nodes]);
    }
    let total = r.total();
    let outs: Vec<(Vec<f64>, Vec<f64>)> = r
        .batches
        .iter()
        .map(|batch| {
            let mut s = total.clone();
            s.absorb(batch, -1.0);
            EnsembleResult::maps_from(&s, &r.prefactor)
        })
        .collect();
    let se = |pick: &dyn Fn(&(Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> Vec<f64> {
        (0..nodes)
            .map(|k| {
                let mean = outs.iter().map(|o| pick(o)[k]).sum::<f64>() / b as f64;
                let var = outs.iter().map(|o| (pick(o)[k] - mean).powi(2)).sum::<f64>();
                (var * (b - 1) as f64 / b as f64).sqrt()
            })
            .collect()
    };
    (se(&|o| &o.0), se(&|o| &o.1))
}

/// Discretized momentum density |α(p)|² as quadrature points and weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumDensity {
    pub momenta: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl MomentumDensity {
    pub fn delta(p: Vec3) -> Self {
        MomentumDensity { momenta: vec![p], weights: vec![1.0] }
    }

    /// Gaussian of width σ_p along one axis about `center`, on `n`
    /// Gauss–Legendre nodes spanning ±6σ_p.
    pub fn gaussian_axis(center: Vec3, sigma_p: f64, axis: usize, n: usize) -> Result<Self> {
        if axis > 2 || n < 2 || !(sigma_p > 0.0) {
            return domain("Gaussian momentum density needs an axis 0..2, two or more nodes and a positive width");
        }
        let (x, w) = gauss_legendre(n);
        let half = 6.0 * sigma_p;
        let norm = 1.0 / (sigma_p * (2.0 * std::f64::consts::PI).sqrt());
        let mut momenta = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (u, wu) in x.iter().zip(&w) {
            let q = half * u;
            let mut p = center;
            match axis {
                0 => p.x += q,
                1 => p.y += q,
                _ => p.z += q,
            }
            momenta.push(p);
            weights.push(wu * half * norm * (-0.5 * (q / sigma_p).powi(2)).exp());
        }
        // quadrature and the 6 sigma cut leave the sum a few 1e-6 short; the
        // discrete density itself is exactly normalized
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(MomentumDensity { momenta, weights })
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Incoherent superposition Σ w(p) ε(p) of single-electron spectra, each from
/// an electron at the origin with momentum p. Returns the solid-angle
/// integrated spectrum for a full-sphere grid, or the spectrum of the single
/// direction of an explicit grid.
pub fn plane_wave_reduction(
    density: &MomentumDensity,
    beam: &BeamConfig,
    grid: &AngularSpectralGrid,
    options: &EnsembleOptions,
) -> Result<EmissionSpectrum> {
    if !beam.model.is_plane() {
        return config("beam.model: the plane-wave reduction needs a plane-wave beam");
    }
    if density.momenta.len() != density.weights.len() || density.momenta.is_empty() {
        return domain("momentum density needs matching, non-empty points and weights");
    }
    if (density.total_weight() - 1.0).abs() > 1e-6 {
        return domain(format!("momentum density integrates to {}, not 1", density.total_weight()));
    }
    if !grid.is_full_sphere() && grid.n_directions() != 1 {
        return domain("plane-wave reduction needs a full sphere or a single direction");
    }
    let field = pulsed_field(beam)?;
    let pref = options.radiation.spectral_prefactor();
    let nw = grid.omegas().len();
    let per: Vec<Vec<f64>> = density
        .momenta
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            electron_amplitudes(&field, Vec3::ZERO, *p, grid, options)
                .map(|amps| {
                    amps.iter()
                        .enumerate()
                        .map(|(k, a)| pref * grid.omegas()[k % nw].powi(2) * amplitude_norm_sqr(a))
                        .collect()
                })
                .map_err(|e| Error::Sample { index: i, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; grid.n_nodes()];
    for (w, v) in density.weights.iter().zip(&per) {
        for (acc, x) in values.iter_mut().zip(v) {
            *acc += w * x;
        }
    }
    let map = RadiationMap::from_values(grid.clone(), values, field.units())?;
    Ok(if grid.is_full_sphere() { EmissionSpectrum::integrated(&map) } else { EmissionSpectrum::for_direction(&map, 0) })
}

/// One direction of a model comparison, at the fundamental frequency node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub theta: f64,
    pub phi: f64,
    /// Single electron at the packet centre (eV/sr per unit ω/ω₀).
    pub point: f64,
    pub incoherent: Estimate,
    pub coherent: Estimate,
    /// Ensemble values relative to the point electron.
    pub incoherent_efficiency: Estimate,
    pub coherent_efficiency: Estimate,
    /// Rigid-cloud form factor with r₀ = √2 σ_r.
    pub extended_cloud_efficiency: f64,
    /// Coherent value relative to the coherent forward value.
    pub coherent_over_forward: Estimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub sigma_r_m: f64,
    pub sigma_over_lambda: f64,
    pub omega: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn row(&self, d: Direction) -> Option<&ComparisonRow> {
        self.rows
            .iter()
            .find(|r| (r.theta - d.theta()).abs() < 1e-12 && (r.phi - d.phi()).abs() < 1e-12)
    }
}

/// Incoherent ensemble, coherent ensemble and the rigid-cloud formula side by
/// side for a low-intensity plane wave. `grid` must list the forward
/// direction explicitly.
pub fn compare_models(
    state: &GaussianWavePacket,
    beam: &BeamConfig,
    grid: &AngularSpectralGrid,
    options: &EnsembleOptions,
    n_samples: usize,
    seed: u64,
) -> Result<(ComparisonReport, EnsembleResult)> {
    if !beam.model.is_plane() {
        return config("beam.model: model comparison needs a plane-wave beam");
    }
    let field = pulsed_field(beam)?;
    if field.a0() > 0.1 {
        return config(format!("beam.peak_intensity_W_cm2: comparison needs a0 <= 0.1, got {:.3}", field.a0()));
    }
    let sigma = state.sigma_r;
    if sigma.x != sigma.y || sigma.y != sigma.z {
        return domain("model comparison needs an isotropic packet");
    }
    let forward = (0..grid.n_directions())
        .find(|&d| {
            let dir = grid.direction(d);
            (dir.theta() - Direction::FORWARD.theta()).abs() < 1e-12 && dir.phi().abs() < 1e-12
        })
        .ok_or_else(|| Error::Config("grids: comparison grid must include the forward direction".into()))?;
    let omegas = grid.omegas();
    let nw = omegas.len();
    let k1 = (0..nw)
        .min_by(|&a, &b| (omegas[a] - 1.0).abs().total_cmp(&(omegas[b] - 1.0).abs()))
        .expect("non-empty grid");
    let units = field.units();

    let samples = sample_gaussian(state, n_samples, seed)?;
    let mut ens = ensemble_radiation(&samples, beam, grid, options)?;
    ens.seed = Some(seed);
    let centre = Vec3::new(
        units.metres_to_normalized(state.center_r.x),
        units.metres_to_normalized(state.center_r.y),
        units.metres_to_normalized(state.center_r.z),
    );
    let point_amps = electron_amplitudes(&field, centre, state.center_p, grid, options)?;
    let pref = options.radiation.spectral_prefactor() * omegas[k1].powi(2);

    let sigma_norm = units.metres_to_normalized(sigma.x);
    let r0 = std::f64::consts::SQRT_2 * sigma_norm;
    let mut rows = Vec::with_capacity(grid.n_directions());
    for d in 0..grid.n_directions() {
        let dir = grid.direction(d);
        let node = d * nw + k1;
        let fwd = forward * nw + k1;
        let point = pref * amplitude_norm_sqr(&point_amps[node]);
        let ratio = |e: Estimate| Estimate { value: e.value / point, std_error: e.std_error / point };
        let incoherent = ens.jackknife(|inc, _| inc[node]);
        let coherent = ens.jackknife(|_, coh| coh[node]);
        let cloud = crate::extended::GaussianCloud::new(r0 * omegas[k1], 1.0)?;
        rows.push(ComparisonRow {
            theta: dir.theta(),
            phi: dir.phi(),
            point,
            incoherent,
            coherent,
            incoherent_efficiency: ratio(incoherent),
            coherent_efficiency: ratio(coherent),
            extended_cloud_efficiency: cloud.form_factor(dir),
            coherent_over_forward: ens.jackknife(|_, coh| coh[node] / coh[fwd]),
        });
    }
    let report = ComparisonReport {
        sigma_r_m: sigma.x,
        sigma_over_lambda: sigma.x / units.wavelength_m(),
        omega: omegas[k1],
        n_samples,
        seed,
        rows,
    };
    Ok((report, ens))
}
