//! Unit system, physical constants and angular conventions.
//!
//! Internally everything is normalized to the laser: time in 1/ω₀, length in
//! 1/k₀ = λ/2π, momentum in mₑc and fields in mₑcω₀/e. Inputs and outputs use
//! SI, with energies in eV and intensities in W/cm².

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::vec3::Vec3;

/// CODATA 2018 values.
pub mod consts {
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
    pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;
    pub const CLASSICAL_ELECTRON_RADIUS: f64 = 2.817_940_326_2e-15;
    /// ħ/(mₑc) in metres.
    pub const REDUCED_COMPTON_WAVELENGTH: f64 = 3.861_592_679_6e-13;
    /// Thomson cross-section (8π/3) r_e², m².
    pub const THOMSON_CROSS_SECTION: f64 = 6.652_458_732_1e-29;
}

use consts::*;

/// Laser-normalized unit system anchored to a reference wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitSystem {
    wavelength_nm: f64,
}

impl UnitSystem {
    pub fn new(wavelength_nm: f64) -> Result<Self> {
        if !(wavelength_nm > 0.0 && wavelength_nm.is_finite()) {
            return domain(format!("wavelength must be positive, got {} nm", wavelength_nm));
        }
        Ok(UnitSystem { wavelength_nm })
    }

    pub fn wavelength_nm(&self) -> f64 {
        self.wavelength_nm
    }

    pub fn wavelength_m(&self) -> f64 {
        self.wavelength_nm * 1e-9
    }

    /// Laser angular frequency ω₀ in rad/s.
    pub fn omega0(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength_m()
    }

    /// 1/ω₀ in seconds.
    pub fn time_unit_s(&self) -> f64 {
        1.0 / self.omega0()
    }

    /// 1/k₀ = λ/2π in metres.
    pub fn length_unit_m(&self) -> f64 {
        self.wavelength_m() / (2.0 * PI)
    }

    /// mₑcω₀/e in V/m: the field that gives a₀ = 1.
    pub fn field_unit_v_per_m(&self) -> f64 {
        ELECTRON_MASS * SPEED_OF_LIGHT * self.omega0() / ELEMENTARY_CHARGE
    }

    /// ħω₀ in eV.
    pub fn photon_energy_ev(&self) -> f64 {
        HBAR * self.omega0() / ELEMENTARY_CHARGE
    }

    pub fn seconds_to_normalized(&self, t_s: f64) -> f64 {
        t_s * self.omega0()
    }

    pub fn normalized_to_seconds(&self, t: f64) -> f64 {
        t / self.omega0()
    }

    pub fn fs_to_normalized(&self, t_fs: f64) -> f64 {
        self.seconds_to_normalized(t_fs * 1e-15)
    }

    pub fn normalized_to_fs(&self, t: f64) -> f64 {
        self.normalized_to_seconds(t) * 1e15
    }

    pub fn metres_to_normalized(&self, x_m: f64) -> f64 {
        x_m / self.length_unit_m()
    }

    pub fn normalized_to_metres(&self, x: f64) -> f64 {
        x * self.length_unit_m()
    }

    /// Converts a wavelength in nm into a frequency in units of ω₀.
    pub fn wavelength_to_omega(&self, lambda_nm: f64) -> f64 {
        self.wavelength_nm / lambda_nm
    }

    pub fn omega_to_wavelength(&self, omega: f64) -> f64 {
        self.wavelength_nm / omega
    }

    /// ħ in the mixed units (metres × mₑc) used by the phase-space module.
    pub fn hbar_m_mec(&self) -> f64 {
        REDUCED_COMPTON_WAVELENGTH
    }

    pub fn a0_from_intensity(&self, intensity_w_cm2: f64) -> Result<f64> {
        a0_from_intensity(intensity_w_cm2, self.wavelength_nm)
    }

    pub fn intensity_from_a0(&self, a0: f64) -> f64 {
        intensity_from_a0(a0, self.wavelength_nm)
    }
}

/// Peak normalized amplitude a₀ = eE₀/(mₑcω₀) of a linearly polarized wave
/// with cycle-averaged intensity I = ε₀cE₀²/2.
pub fn a0_from_intensity(intensity_w_cm2: f64, wavelength_nm: f64) -> Result<f64> {
    if !(intensity_w_cm2 > 0.0 && intensity_w_cm2.is_finite()) {
        return domain(format!("intensity must be positive, got {} W/cm^2", intensity_w_cm2));
    }
    let units = UnitSystem::new(wavelength_nm)?;
    let intensity_si = intensity_w_cm2 * 1e4;
    let e0 = (2.0 * intensity_si / (VACUUM_PERMITTIVITY * SPEED_OF_LIGHT)).sqrt();
    Ok(e0 / units.field_unit_v_per_m())
}

/// Inverse of [`a0_from_intensity`].
pub fn intensity_from_a0(a0: f64, wavelength_nm: f64) -> f64 {
    let omega0 = 2.0 * PI * SPEED_OF_LIGHT / (wavelength_nm * 1e-9);
    let e0 = a0 * ELECTRON_MASS * SPEED_OF_LIGHT * omega0 / ELEMENTARY_CHARGE;
    0.5 * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT * e0 * e0 * 1e-4
}

/// Observation direction. θ is measured from the z-axis (laser polarization),
/// φ from the x-axis (laser propagation) in the x–y plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    /// Forward along the laser, +x.
    pub const FORWARD: Direction = Direction { theta: PI / 2.0, phi: 0.0 };
    /// Side-on, perpendicular to both propagation and polarization, +y.
    pub const PERPENDICULAR_Y: Direction = Direction { theta: PI / 2.0, phi: PI / 2.0 };
    /// Along the polarization, +z.
    pub const Z_POLE: Direction = Direction { theta: 0.0, phi: 0.0 };

    /// Builds a direction; φ is wrapped into [0, 2π).
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return domain(format!("polar angle {} outside [0, pi]", theta));
        }
        if !phi.is_finite() {
            return domain("azimuth must be finite");
        }
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Ok(Direction { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn unit_vector(&self) -> Vec3 {
        direction_to_unit_vector(*self)
    }
}

pub fn direction_to_unit_vector(d: Direction) -> Vec3 {
    let (st, ct) = d.theta.sin_cos();
    let (sp, cp) = d.phi.sin_cos();
    Vec3::new(st * cp, st * sp, ct)
}
