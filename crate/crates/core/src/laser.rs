//! Driving laser fields: infinite plane wave, pulsed plane wave and a pulsed
//! paraxial Gaussian beam with first-order longitudinal corrections.
//!
//! The laser propagates along +x and is polarized along z. Fields are in units
//! of mₑcω₀/e, positions in 1/k₀ and times in 1/ω₀; the focus sits at the
//! origin and the envelope peak crosses it at t = 0.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::units::UnitSystem;
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamModel {
    PlaneInfinite,
    PlanePulsed,
    FocusedPulsed,
}

impl BeamModel {
    pub fn name(&self) -> &'static str {
        match self {
            BeamModel::PlaneInfinite => "plane_infinite",
            BeamModel::PlanePulsed => "plane_pulsed",
            BeamModel::FocusedPulsed => "focused_pulsed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "plane_infinite" => Some(BeamModel::PlaneInfinite),
            "plane_pulsed" => Some(BeamModel::PlanePulsed),
            "focused_pulsed" => Some(BeamModel::FocusedPulsed),
            _ => None,
        }
    }

    pub fn is_plane(&self) -> bool {
        !matches!(self, BeamModel::FocusedPulsed)
    }
}

/// Laser pulse description in laboratory units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamConfig {
    pub model: BeamModel,
    pub wavelength_nm: f64,
    pub peak_intensity_w_cm2: f64,
    /// Intensity FWHM of the Gaussian temporal envelope.
    pub fwhm_fs: f64,
    /// w₀/λ, focused model only.
    pub waist_over_lambda: f64,
    /// Carrier phase at the envelope peak; 0 puts a cosine crest there.
    pub carrier_phase: f64,
}

impl BeamConfig {
    pub fn plane_infinite(wavelength_nm: f64, peak_intensity_w_cm2: f64) -> Self {
        BeamConfig {
            model: BeamModel::PlaneInfinite,
            wavelength_nm,
            peak_intensity_w_cm2,
            fwhm_fs: 35.0,
            waist_over_lambda: 3.0,
            carrier_phase: 0.0,
        }
    }

    pub fn plane_pulsed(wavelength_nm: f64, peak_intensity_w_cm2: f64, fwhm_fs: f64) -> Self {
        BeamConfig {
            model: BeamModel::PlanePulsed,
            fwhm_fs,
            ..Self::plane_infinite(wavelength_nm, peak_intensity_w_cm2)
        }
    }

    pub fn focused_pulsed(
        wavelength_nm: f64,
        peak_intensity_w_cm2: f64,
        fwhm_fs: f64,
        waist_over_lambda: f64,
    ) -> Self {
        BeamConfig {
            model: BeamModel::FocusedPulsed,
            fwhm_fs,
            waist_over_lambda,
            ..Self::plane_infinite(wavelength_nm, peak_intensity_w_cm2)
        }
    }

    pub fn with_carrier_phase(mut self, phase: f64) -> Self {
        self.carrier_phase = phase;
        self
    }

    pub fn units(&self) -> Result<UnitSystem> {
        UnitSystem::new(self.wavelength_nm)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength_nm > 0.0 && self.wavelength_nm.is_finite()) {
            return config("beam.wavelength_nm must be positive");
        }
        if !(self.peak_intensity_w_cm2 > 0.0 && self.peak_intensity_w_cm2.is_finite()) {
            return config("beam.peak_intensity_W_cm2 must be positive");
        }
        if self.model != BeamModel::PlaneInfinite && !(self.fwhm_fs > 0.0 && self.fwhm_fs.is_finite()) {
            return config("beam.fwhm_fs must be positive for pulsed models");
        }
        if self.model == BeamModel::FocusedPulsed && !(self.waist_over_lambda >= 1.0) {
            return config(format!(
                "beam.waist_over_lambda = {} is below 1, outside the paraxial correction's validity",
                self.waist_over_lambda
            ));
        }
        if !self.carrier_phase.is_finite() {
            return config("beam.carrier_phase must be finite");
        }
        Ok(())
    }
}

/// Electric and magnetic field at one spacetime point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub e_field: Vec3,
    pub b_field: Vec3,
}

/// A validated beam with its normalized parameters precomputed.
#[derive(Debug, Clone)]
pub struct LaserField {
    config: BeamConfig,
    units: UnitSystem,
    a0: f64,
    /// Intensity FWHM in units of 1/ω₀.
    tau: f64,
    /// Waist in units of 1/k₀.
    w0: f64,
    rayleigh: f64,
}

impl LaserField {
    pub fn new(config: &BeamConfig) -> Result<Self> {
        config.validate()?;
        let units = config.units()?;
        let a0 = units.a0_from_intensity(config.peak_intensity_w_cm2)?;
        let tau = units.fs_to_normalized(config.fwhm_fs);
        let w0 = 2.0 * PI * config.waist_over_lambda;
        Ok(LaserField {
            config: config.clone(),
            units,
            a0,
            tau,
            w0,
            rayleigh: 0.5 * w0 * w0,
        })
    }

    pub fn config(&self) -> &BeamConfig {
        &self.config
    }

    pub fn units(&self) -> UnitSystem {
        self.units
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// Intensity FWHM in normalized time.
    pub fn fwhm(&self) -> f64 {
        self.tau
    }

    /// Waist in normalized length (1/k₀).
    pub fn waist(&self) -> f64 {
        self.w0
    }

    /// Rayleigh range k₀w₀²/2 in normalized length.
    pub fn rayleigh_range(&self) -> f64 {
        self.rayleigh
    }

    pub fn model(&self) -> BeamModel {
        self.config.model
    }

    /// Field-amplitude envelope g(η) and its derivative.
    fn envelope(&self, eta: f64) -> (f64, f64) {
        match self.config.model {
            BeamModel::PlaneInfinite => (1.0, 0.0),
            _ => {
                let k = 2.0 * LN_2 / (self.tau * self.tau);
                let g = (-k * eta * eta).exp();
                (g, -2.0 * k * eta * g)
            }
        }
    }

    /// Phase η beyond which the pulsed envelope is below 1e-8 of its peak.
    pub fn envelope_cutoff(&self) -> f64 {
        match self.config.model {
            BeamModel::PlaneInfinite => f64::INFINITY,
            _ => 4.0 * self.tau,
        }
    }

    pub fn evaluate(&self, r: Vec3, t: f64) -> FieldSample {
        let eta = t - r.x;
        let (g, dg) = self.envelope(eta);
        let phase = eta - self.config.carrier_phase;
        match self.config.model {
            BeamModel::PlaneInfinite | BeamModel::PlanePulsed => {
                let ez = self.a0 * g * phase.cos();
                FieldSample {
                    e_field: Vec3::new(0.0, 0.0, ez),
                    b_field: Vec3::new(0.0, -ez, 0.0),
                }
            }
            BeamModel::FocusedPulsed => {
                let w0sq = self.w0 * self.w0;
                let q = Complex64::new(1.0, r.x / self.rayleigh);
                let inv_q = q.inv();
                let rho2 = r.y * r.y + r.z * r.z;
                let carrier = Complex64::from_polar(1.0, -phase);
                let psi = (-rho2 / w0sq * inv_q).exp() * inv_q * carrier;
                let dz = psi * (-2.0 * r.z / w0sq) * inv_q;
                let dy = psi * (-2.0 * r.y / w0sq) * inv_q;
                let corr = Complex64::new(dg, g);
                let ez = self.a0 * g * psi.re;
                let ex = self.a0 * (corr * dz).re;
                let bx = -self.a0 * (corr * dy).re;
                FieldSample {
                    e_field: Vec3::new(ex, 0.0, ez),
                    b_field: Vec3::new(bx, -ez, 0.0),
                }
            }
        }
    }

    /// Cycle-averaged intensity in W/cm² from the local envelope amplitude.
    pub fn local_intensity(&self, r: Vec3, t: f64) -> f64 {
        let eta = t - r.x;
        let (g, _) = self.envelope(eta);
        let profile = match self.config.model {
            BeamModel::FocusedPulsed => {
                let s = r.x / self.rayleigh;
                let w2 = self.w0 * self.w0 * (1.0 + s * s);
                let rho2 = r.y * r.y + r.z * r.z;
                (self.w0 * self.w0 / w2) * (-2.0 * rho2 / w2).exp()
            }
            _ => 1.0,
        };
        self.config.peak_intensity_w_cm2 * g * g * profile
    }

    /// Normalized vector potential a_z(η) of the plane-wave models, with
    /// E_z = -da_z/dη and a_z → 0 ahead of a pulse. `None` for the focused beam.
    pub fn plane_vector_potential(&self, eta: f64) -> Option<f64> {
        let phi0 = self.config.carrier_phase;
        match self.config.model {
            BeamModel::PlaneInfinite => Some(-self.a0 * ((eta - phi0).sin() + phi0.sin())),
            BeamModel::PlanePulsed => {
                // a_z(η) = -∫ E_z dη' from far ahead of the pulse
                let start = -self.envelope_cutoff() - 2.0 * self.tau;
                if eta <= start {
                    return Some(0.0);
                }
                let panels = (((eta - start) / 0.5).ceil() as usize).max(1);
                let h = (eta - start) / panels as f64;
                let (nodes, weights) = crate::grid::gauss_legendre(8);
                let mut acc = 0.0;
                for k in 0..panels {
                    let a = start + h * k as f64;
                    for (x, w) in nodes.iter().zip(&weights) {
                        let s = a + 0.5 * h * (x + 1.0);
                        let (g, _) = self.envelope(s);
                        acc += 0.5 * h * w * self.a0 * g * (s - phi0).cos();
                    }
                }
                Some(-acc)
            }
            BeamModel::FocusedPulsed => None,
        }
    }
}

/// Field of `config` at a normalized position and time.
pub fn evaluate_field(config: &BeamConfig, position: Vec3, time: f64) -> Result<FieldSample> {
    Ok(LaserField::new(config)?.evaluate(position, time))
}

/// Cycle-averaged local intensity in W/cm².
pub fn local_intensity(config: &BeamConfig, position: Vec3, time: f64) -> Result<f64> {
    Ok(LaserField::new(config)?.local_intensity(position, time))
}
