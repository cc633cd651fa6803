//! Coherent Thomson scattering from a rigid Gaussian charge cloud.
//!
//! A current J ∝ ẑ r₀⁻³ e^{−r²/r₀²} e^{iκx} driven along x radiates with the
//! point-dipole pattern times the squared form factor of the cloud:
//!
//! ```text
//! I(θ, φ) = sin²θ · exp(−|κ|² r₀² (1 − sinθ cosφ))
//! ```
//!
//! This is the semiclassical picture in which a spread-out wave packet acts as
//! an extended classical source. Forward emission (θ = π/2, φ = 0) is
//! untouched at any size; every other direction is suppressed.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::grid::gauss_legendre;
use crate::units::Direction;

/// Quadrature resolution for the total efficiency, per angular axis.
pub const TOTAL_EFFICIENCY_NODES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianCloud {
    r0: f64,
    kappa_mag: f64,
}

impl GaussianCloud {
    pub fn new(r0: f64, kappa_mag: f64) -> Result<Self> {
        if !(r0 >= 0.0 && r0.is_finite()) {
            return domain(format!("cloud radius must be non-negative, got {r0}"));
        }
        if !(kappa_mag > 0.0 && kappa_mag.is_finite()) {
            return domain(format!("driving wavenumber must be positive, got {kappa_mag}"));
        }
        Ok(GaussianCloud { r0, kappa_mag })
    }

    /// Cloud of radius `r0` driven at `wavelength`, both in the same unit.
    pub fn from_wavelength(r0: f64, wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0) {
            return domain(format!("wavelength must be positive, got {wavelength}"));
        }
        Self::new(r0, 2.0 * PI / wavelength)
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn kappa_mag(&self) -> f64 {
        self.kappa_mag
    }

    /// (|κ| r₀)².
    pub fn size_parameter(&self) -> f64 {
        (self.kappa_mag * self.r0).powi(2)
    }

    /// Squared form factor, the ratio of the cloud's emission to a point
    /// charge's in direction `d`.
    pub fn form_factor(&self, d: Direction) -> f64 {
        (-self.size_parameter() * (1.0 - d.theta().sin() * d.phi().cos())).exp()
    }
}

/// Relative intensity sin²θ · exp(−|κ|²r₀²(1 − sinθ cosφ)); 1 for a point
/// charge observed forward.
pub fn cloud_intensity(cloud: &GaussianCloud, d: Direction) -> f64 {
    d.theta().sin().powi(2) * cloud.form_factor(d)
}

/// Power radiated over the sphere relative to a point charge (8π/3).
pub fn cloud_total_efficiency(cloud: &GaussianCloud) -> f64 {
    if cloud.r0 == 0.0 {
        return 1.0;
    }
    let n = TOTAL_EFFICIENCY_NODES;
    let (mu, wmu) = gauss_legendre(n);
    let k2 = cloud.size_parameter();
    let dphi = 2.0 * PI / n as f64;
    let cosines: Vec<f64> = (0..n).map(|j| (dphi * j as f64).cos()).collect();
    let mut sum = 0.0;
    for (&u, &w) in mu.iter().zip(&wmu) {
        let s2 = 1.0 - u * u;
        let s = s2.sqrt();
        let ring: f64 = cosines.iter().map(|c| (-k2 * (1.0 - s * c)).exp()).sum();
        sum += w * s2 * ring * dphi;
    }
    sum / (8.0 * PI / 3.0)
}

/// Per-direction and total efficiencies over a set of cloud sizes.
#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyTable {
    pub r0_over_lambda: Vec<f64>,
    /// Forward, perpendicular (y), z pole, then any extra directions.
    pub directions: Vec<Direction>,
    /// `ratios[i][k]`: form factor of size `i` in direction `k`.
    pub ratios: Vec<Vec<f64>>,
    pub totals: Vec<f64>,
}

impl EfficiencyTable {
    pub const FIXED_COLUMNS: [&'static str; 3] = ["ratio_forward", "ratio_perpendicular_y", "ratio_z_pole"];

    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec!["r0_over_lambda".to_string()];
        names.extend(Self::FIXED_COLUMNS.iter().map(|s| s.to_string()));
        for d in &self.directions[3..] {
            names.push(format!("ratio_theta{}_phi{}", d.theta(), d.phi()));
        }
        names.push("ratio_total".into());
        names
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.r0_over_lambda.len())
            .map(|i| {
                let mut row = vec![self.r0_over_lambda[i]];
                row.extend_from_slice(&self.ratios[i]);
                row.push(self.totals[i]);
                row
            })
            .collect()
    }
}

/// Efficiencies relative to a point charge for clouds of radius
/// `r0_over_lambda × λ`. The three reference directions are always included.
/// Direction ratios use the form factor, so they stay defined where sin²θ = 0.
pub fn efficiency_scan(r0_over_lambda: &[f64], extra_directions: &[Direction]) -> Result<EfficiencyTable> {
    if r0_over_lambda.is_empty() {
        return domain("efficiency scan needs at least one cloud size");
    }
    let mut directions = vec![Direction::FORWARD, Direction::PERPENDICULAR_Y, Direction::Z_POLE];
    directions.extend_from_slice(extra_directions);
    let clouds = r0_over_lambda
        .iter()
        .map(|&r| GaussianCloud::from_wavelength(r, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let ratios = clouds.iter().map(|c| directions.iter().map(|d| c.form_factor(*d)).collect()).collect();
    let totals = clouds.par_iter().map(cloud_total_efficiency).collect();
    Ok(EfficiencyTable { r0_over_lambda: r0_over_lambda.to_vec(), directions, ratios, totals })
}
