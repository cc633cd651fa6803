//! Angle–frequency grids and their quadrature weights.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::units::Direction;

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and its derivative
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Trapezoid weights for an arbitrary increasing abscissa.
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Discretization of dΩ dω.
///
/// Polar nodes are Gauss–Legendre in cos θ, azimuths are uniform with the
/// periodic trapezoid rule, and frequencies (in units of ω₀) use the trapezoid
/// rule. Grids built from explicit direction lists carry zero solid-angle
/// weights: they support per-direction spectra but not sphere totals.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularSpectralGrid {
    thetas: Vec<f64>,
    phis: Vec<f64>,
    theta_weights: Vec<f64>,
    phi_weights: Vec<f64>,
    omegas: Vec<f64>,
    omega_weights: Vec<f64>,
    full_sphere: bool,
    /// Set for grids built from a direction list.
    list: Option<Vec<Direction>>,
}

impl AngularSpectralGrid {
    pub const DEFAULT_THETAS: usize = 64;
    pub const DEFAULT_PHIS: usize = 64;
    pub const DEFAULT_OMEGAS: usize = 512;
    pub const DEFAULT_OMEGA_MIN: f64 = 0.05;
    pub const DEFAULT_OMEGA_MAX: f64 = 10.0;

    /// Full-sphere grid with `n_theta` Gauss–Legendre polar nodes and `n_phi`
    /// uniform azimuths.
    pub fn sphere(n_theta: usize, n_phi: usize, omegas: Vec<f64>) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return domain("angular grid needs at least one node per axis");
        }
        check_omegas(&omegas)?;
        let (mu, wmu) = gauss_legendre(n_theta);
        // descending cos θ gives ascending θ
        let thetas: Vec<f64> = mu.iter().rev().map(|m| m.acos()).collect();
        let theta_weights: Vec<f64> = wmu.iter().rev().copied().collect();
        let phis: Vec<f64> = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
        let phi_weights = vec![2.0 * PI / n_phi as f64; n_phi];
        let omega_weights = trapezoid_weights(&omegas);
        Ok(AngularSpectralGrid {
            thetas,
            phis,
            theta_weights,
            phi_weights,
            omegas,
            omega_weights,
            full_sphere: true,
            list: None,
        })
    }

    /// Product grid over explicit polar angles and azimuths (no solid-angle
    /// weights).
    pub fn directions(thetas: Vec<f64>, phis: Vec<f64>, omegas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() || phis.is_empty() {
            return domain("direction grid needs at least one angle per axis");
        }
        check_omegas(&omegas)?;
        let mut wrapped = Vec::with_capacity(phis.len());
        for &t in &thetas {
            Direction::new(t, 0.0)?;
        }
        for &p in &phis {
            wrapped.push(Direction::new(0.0, p)?.phi());
        }
        let omega_weights = trapezoid_weights(&omegas);
        Ok(AngularSpectralGrid {
            theta_weights: vec![0.0; thetas.len()],
            phi_weights: vec![0.0; wrapped.len()],
            thetas,
            phis: wrapped,
            omegas,
            omega_weights,
            full_sphere: false,
            list: None,
        })
    }

    /// Grid over an explicit list of directions (no solid-angle weights).
    pub fn from_directions(directions: Vec<Direction>, omegas: Vec<f64>) -> Result<Self> {
        if directions.is_empty() {
            return domain("direction list is empty");
        }
        check_omegas(&omegas)?;
        let n = directions.len();
        let omega_weights = trapezoid_weights(&omegas);
        Ok(AngularSpectralGrid {
            thetas: directions.iter().map(|d| d.theta()).collect(),
            phis: directions.iter().map(|d| d.phi()).collect(),
            theta_weights: vec![0.0; n],
            phi_weights: vec![0.0; n],
            omegas,
            omega_weights,
            full_sphere: false,
            list: Some(directions),
        })
    }

    /// Polar nodes; for a direction list, the polar angle of each entry.
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn omega_weights(&self) -> &[f64] {
        &self.omega_weights
    }

    pub fn is_full_sphere(&self) -> bool {
        self.full_sphere
    }

    pub fn n_directions(&self) -> usize {
        match &self.list {
            Some(l) => l.len(),
            None => self.thetas.len() * self.phis.len(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_directions() * self.omegas.len()
    }

    /// Direction index → (θ index, φ index). Directions are θ-major; list
    /// entries map to (d, d).
    pub fn split_direction_index(&self, d: usize) -> (usize, usize) {
        match self.list {
            Some(_) => (d, d),
            None => (d / self.phis.len(), d % self.phis.len()),
        }
    }

    pub fn direction(&self, d: usize) -> Direction {
        if let Some(l) = &self.list {
            return l[d];
        }
        let (i, j) = self.split_direction_index(d);
        Direction::new(self.thetas[i], self.phis[j]).expect("grid angles are validated")
    }

    pub fn solid_angle_weight(&self, d: usize) -> f64 {
        let (i, j) = self.split_direction_index(d);
        self.theta_weights[i] * self.phi_weights[j]
    }

    /// Sum of all solid-angle weights (4π on a full sphere).
    pub fn total_solid_angle(&self) -> f64 {
        if self.list.is_some() {
            return 0.0;
        }
        self.theta_weights.iter().sum::<f64>() * self.phi_weights.iter().sum::<f64>()
    }

    /// Integrates f(θ, φ) over the sphere.
    pub fn integrate_sphere<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        if self.list.is_some() {
            return 0.0;
        }
        let mut total = 0.0;
        for (t, wt) in self.thetas.iter().zip(&self.theta_weights) {
            let mut row = 0.0;
            for (p, wp) in self.phis.iter().zip(&self.phi_weights) {
                row += wp * f(*t, *p);
            }
            total += wt * row;
        }
        total
    }

    /// Spacing of the frequency axis when it is uniform to 1e-9 relative.
    pub fn uniform_omega_step(&self) -> Option<f64> {
        let n = self.omegas.len();
        if n < 2 {
            return None;
        }
        let step = (self.omegas[n - 1] - self.omegas[0]) / (n - 1) as f64;
        let uniform = self
            .omegas
            .iter()
            .enumerate()
            .all(|(i, w)| (w - (self.omegas[0] + step * i as f64)).abs() <= 1e-9 * step.max(1.0));
        uniform.then_some(step)
    }
}

impl Default for AngularSpectralGrid {
    fn default() -> Self {
        AngularSpectralGrid::sphere(
            Self::DEFAULT_THETAS,
            Self::DEFAULT_PHIS,
            linspace(Self::DEFAULT_OMEGA_MIN, Self::DEFAULT_OMEGA_MAX, Self::DEFAULT_OMEGAS),
        )
        .expect("default grid is valid")
    }
}

fn check_omegas(omegas: &[f64]) -> Result<()> {
    if omegas.is_empty() {
        return domain("frequency grid is empty");
    }
    if omegas.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return domain("frequencies must be positive and finite");
    }
    if omegas.windows(2).any(|w| w[1] <= w[0]) {
        return domain("frequencies must be strictly increasing");
    }
    Ok(())
}
