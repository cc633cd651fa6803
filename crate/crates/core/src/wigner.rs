//! Closed-form Wigner functions of Gaussian wave packets and of finite
//! superpositions of momentum-displaced Gaussians.
//!
//! Positions are in metres and momenta in mₑc, so ħ is the reduced Compton
//! wavelength ƛ_C (in m·mₑc). Each component factorizes over the three axes:
//!
//! ```text
//! φ_j(x) = (2πσ²)^{-1/4} exp(−(x − x_j)²/4σ² + i p_j x/ħ)
//! ```
//!
//! and the state ψ = Σ c_j φ_j has W = Re Σ_jk c_j c_k* Π_axes W_jk, where
//! the cross-Wigner function of two components is
//!
//! ```text
//! W_jk(x, p) = (πħ)⁻¹ exp(−(x − x̄)²/2σ² − 2σ²(p − p̄)²/ħ²) exp(i[xΔp − Δx(p − p̄)]/ħ)
//! ```
//!
//! with x̄, p̄ the pair midpoints and Δ = (j) − (k). Free flight is the shear
//! W(x, p; t) = W(x − p c t, p; 0).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::grid::gauss_legendre;
use crate::units::consts::{REDUCED_COMPTON_WAVELENGTH, SPEED_OF_LIGHT};
use crate::vec3::Vec3;

/// ħ in metres × mₑc.
pub const HBAR: f64 = REDUCED_COMPTON_WAVELENGTH;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianWavePacket {
    /// Centre in position (m).
    pub center_r: Vec3,
    /// Centre in momentum (mₑc).
    pub center_p: Vec3,
    /// Position spread per axis (m); the momentum spread is ħ/2σ.
    pub sigma_r: Vec3,
}

impl GaussianWavePacket {
    pub fn new(center_r: Vec3, center_p: Vec3, sigma_r: Vec3) -> Result<Self> {
        if !(sigma_r.x > 0.0 && sigma_r.y > 0.0 && sigma_r.z > 0.0 && sigma_r.is_finite()) {
            return domain(format!("wave-packet widths must be positive, got {sigma_r:?}"));
        }
        if !center_r.is_finite() || !center_p.is_finite() {
            return domain("wave-packet centre must be finite");
        }
        Ok(GaussianWavePacket { center_r, center_p, sigma_r })
    }

    /// Isotropic packet at rest at the origin.
    pub fn isotropic(sigma_m: f64) -> Result<Self> {
        Self::new(Vec3::ZERO, Vec3::ZERO, Vec3::new(sigma_m, sigma_m, sigma_m))
    }

    /// Minimum-uncertainty momentum spread ħ/2σ per axis (mₑc).
    pub fn sigma_p(&self) -> Vec3 {
        Vec3::new(HBAR / (2.0 * self.sigma_r.x), HBAR / (2.0 * self.sigma_r.y), HBAR / (2.0 * self.sigma_r.z))
    }

    /// Position width after free flight for `t_s` seconds:
    /// σ(t) = σ √(1 + (ħ c t / 2σ²)²).
    pub fn evolved_width(&self, t_s: f64) -> Vec3 {
        let w = |s: f64| s * (1.0 + (HBAR * SPEED_OF_LIGHT * t_s / (2.0 * s * s)).powi(2)).sqrt();
        Vec3::new(w(self.sigma_r.x), w(self.sigma_r.y), w(self.sigma_r.z))
    }

    /// Same packet displaced in momentum.
    pub fn boosted(&self, dp: Vec3) -> Self {
        GaussianWavePacket { center_p: self.center_p + dp, ..*self }
    }
}

/// ψ = Σ c_j φ_j over Gaussians sharing one width, normalized including the
/// overlaps between components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumSuperposition {
    sigma_r: Vec3,
    amplitudes: Vec<Complex64>,
    packets: Vec<GaussianWavePacket>,
}

impl MomentumSuperposition {
    pub fn new(components: Vec<(Complex64, GaussianWavePacket)>) -> Result<Self> {
        if components.len() < 2 {
            return domain("a superposition needs at least two components");
        }
        let sigma_r = components[0].1.sigma_r;
        if components.iter().any(|(_, g)| g.sigma_r != sigma_r) {
            return domain("superposition components must share the same width");
        }
        if components.iter().any(|(c, _)| !c.is_finite()) {
            return domain("superposition amplitudes must be finite");
        }
        let (amplitudes, packets): (Vec<_>, Vec<_>) = components.into_iter().unzip();
        let mut s = MomentumSuperposition { sigma_r, amplitudes, packets };
        let norm = s.raw_norm();
        if !(norm > 1e-300) {
            return domain("superposition has zero norm");
        }
        let scale = 1.0 / norm.sqrt();
        s.amplitudes.iter_mut().for_each(|c| *c *= scale);
        Ok(s)
    }

    /// Components `base` boosted by each momentum offset, with the given
    /// (unnormalized) amplitudes.
    pub fn from_offsets(base: GaussianWavePacket, components: &[(Complex64, Vec3)]) -> Result<Self> {
        Self::new(components.iter().map(|&(c, dp)| (c, base.boosted(dp))).collect())
    }

    pub fn sigma_r(&self) -> Vec3 {
        self.sigma_r
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn packets(&self) -> &[GaussianWavePacket] {
        &self.packets
    }

    /// ⟨φ_k|φ_j⟩.
    pub fn overlap(&self, j: usize, k: usize) -> Complex64 {
        let (a, b) = (&self.packets[j], &self.packets[k]);
        (0..3)
            .map(|ax| {
                let axis = AxisPair::new(a, b, ax);
                axis.overlap(self.sigma_r[ax])
            })
            .product()
    }

    fn raw_norm(&self) -> f64 {
        let n = self.amplitudes.len();
        let mut total = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                total += self.amplitudes[j] * self.amplitudes[k].conj() * self.overlap(j, k);
            }
        }
        total.re
    }

    /// ⟨ψ|ψ⟩ with the stored amplitudes; 1 after construction.
    pub fn norm(&self) -> f64 {
        self.raw_norm()
    }

    /// The single Gaussian this reduces to when every component sits at the
    /// same phase-space centre.
    pub fn as_gaussian(&self) -> Option<GaussianWavePacket> {
        let first = self.packets[0];
        let same = self.packets.iter().all(|g| {
            (0..3).all(|a| {
                (g.center_r[a] - first.center_r[a]).abs() <= 1e-12 * self.sigma_r[a]
                    && (g.center_p[a] - first.center_p[a]).abs() <= 1e-12 * HBAR / self.sigma_r[a]
            })
        });
        same.then_some(first)
    }
}

/// A pure state with a closed-form Wigner function.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WignerState {
    Gaussian(GaussianWavePacket),
    Superposition(MomentumSuperposition),
}

impl From<GaussianWavePacket> for WignerState {
    fn from(g: GaussianWavePacket) -> Self {
        WignerState::Gaussian(g)
    }
}

impl From<MomentumSuperposition> for WignerState {
    fn from(s: MomentumSuperposition) -> Self {
        WignerState::Superposition(s)
    }
}

impl WignerState {
    pub fn sigma_r(&self) -> Vec3 {
        match self {
            WignerState::Gaussian(g) => g.sigma_r,
            WignerState::Superposition(s) => s.sigma_r,
        }
    }

    /// The equivalent single Gaussian, if the state is one.
    pub fn as_gaussian(&self) -> Option<GaussianWavePacket> {
        match self {
            WignerState::Gaussian(g) => Some(*g),
            WignerState::Superposition(s) => s.as_gaussian(),
        }
    }

    fn terms(&self) -> Vec<PairTerm> {
        match self {
            WignerState::Gaussian(g) => vec![PairTerm::new(Complex64::new(1.0, 0.0), g, g)],
            WignerState::Superposition(s) => {
                let n = s.amplitudes.len();
                let mut out = Vec::with_capacity(n * n);
                for j in 0..n {
                    for k in 0..n {
                        let coef = s.amplitudes[j] * s.amplitudes[k].conj();
                        out.push(PairTerm::new(coef, &s.packets[j], &s.packets[k]));
                    }
                }
                out
            }
        }
    }

    /// Smallest and largest centre coordinates over the components.
    fn center_bounds(&self) -> (Vec3, Vec3, Vec3, Vec3) {
        let packets: Vec<GaussianWavePacket> = match self {
            WignerState::Gaussian(g) => vec![*g],
            WignerState::Superposition(s) => s.packets.clone(),
        };
        let pick = |f: &dyn Fn(&GaussianWavePacket) -> Vec3, min: bool| {
            let mut v = f(&packets[0]);
            for g in &packets[1..] {
                let w = f(g);
                for a in 0..3 {
                    let (x, y) = (v[a], w[a]);
                    let m = if min { x.min(y) } else { x.max(y) };
                    match a {
                        0 => v.x = m,
                        1 => v.y = m,
                        _ => v.z = m,
                    }
                }
            }
            v
        };
        (
            pick(&|g| g.center_r, true),
            pick(&|g| g.center_r, false),
            pick(&|g| g.center_p, true),
            pick(&|g| g.center_p, false),
        )
    }
}

/// Per-axis parameters of one cross term.
#[derive(Debug, Clone, Copy)]
struct AxisPair {
    x_mid: f64,
    p_mid: f64,
    dx: f64,
    dp: f64,
}

impl AxisPair {
    fn new(j: &GaussianWavePacket, k: &GaussianWavePacket, axis: usize) -> Self {
        AxisPair {
            x_mid: 0.5 * (j.center_r[axis] + k.center_r[axis]),
            p_mid: 0.5 * (j.center_p[axis] + k.center_p[axis]),
            dx: j.center_r[axis] - k.center_r[axis],
            dp: j.center_p[axis] - k.center_p[axis],
        }
    }

    fn position_factor(&self, x: f64, sigma: f64) -> Complex64 {
        let u = x - self.x_mid;
        Complex64::from_polar((-u * u / (2.0 * sigma * sigma)).exp(), x * self.dp / HBAR)
    }

    fn momentum_factor(&self, p: f64, sigma: f64) -> Complex64 {
        let q = p - self.p_mid;
        Complex64::from_polar((-2.0 * sigma * sigma * q * q / (HBAR * HBAR)).exp(), -self.dx * q / HBAR)
    }

    fn wigner(&self, x: f64, p: f64, sigma: f64) -> Complex64 {
        self.position_factor(x, sigma) * self.momentum_factor(p, sigma) / (PI * HBAR)
    }

    /// ∫ W_jk(x − s p, p) dp for a free-flight shear `s` = c t.
    fn position_marginal(&self, x: f64, sigma: f64, s: f64) -> Complex64 {
        // exponent −A q² + B q + C in q = p − p̄
        let s2 = sigma * sigma;
        let d = x - self.x_mid - s * self.p_mid;
        let a = s * s / (2.0 * s2) + 2.0 * s2 / (HBAR * HBAR);
        let b = Complex64::new(d * s / s2, -(s * self.dp + self.dx) / HBAR);
        let c = Complex64::new(-d * d / (2.0 * s2), (self.x_mid + d) * self.dp / HBAR);
        (b * b / (4.0 * a) + c).exp() * (PI / a).sqrt() / (PI * HBAR)
    }

    /// ∫ W_jk dx; unchanged by free flight.
    fn momentum_marginal(&self, p: f64, sigma: f64) -> Complex64 {
        let gauss_x = Complex64::from_polar(
            sigma * (2.0 * PI).sqrt() * (-sigma * sigma * self.dp * self.dp / (2.0 * HBAR * HBAR)).exp(),
            self.x_mid * self.dp / HBAR,
        );
        self.momentum_factor(p, sigma) * gauss_x / (PI * HBAR)
    }

    /// ∫∫ W_jk dx dp = ⟨φ_k|φ_j⟩ along this axis.
    fn overlap(&self, sigma: f64) -> Complex64 {
        let s2 = sigma * sigma;
        Complex64::from_polar(
            (-self.dx * self.dx / (8.0 * s2) - s2 * self.dp * self.dp / (2.0 * HBAR * HBAR)).exp(),
            self.x_mid * self.dp / HBAR,
        )
    }

    /// ∫∫ W_jk over [x0, x1] × [p0, p1]; the integrand is separable.
    fn box_integral(&self, sigma: f64, x: (f64, f64), p: (f64, f64), nodes: &(Vec<f64>, Vec<f64>)) -> Complex64 {
        let integrate = |lo: f64, hi: f64, f: &dyn Fn(f64) -> Complex64| -> Complex64 {
            let (h, m) = (0.5 * (hi - lo), 0.5 * (hi + lo));
            nodes.0.iter().zip(&nodes.1).map(|(t, w)| f(m + h * t) * (w * h)).sum()
        };
        let ix = integrate(x.0, x.1, &|v| self.position_factor(v, sigma));
        let ip = integrate(p.0, p.1, &|v| self.momentum_factor(v, sigma));
        ix * ip / (PI * HBAR)
    }
}

#[derive(Debug, Clone, Copy)]
struct PairTerm {
    coef: Complex64,
    axes: [AxisPair; 3],
}

impl PairTerm {
    fn new(coef: Complex64, j: &GaussianWavePacket, k: &GaussianWavePacket) -> Self {
        PairTerm { coef, axes: [AxisPair::new(j, k, 0), AxisPair::new(j, k, 1), AxisPair::new(j, k, 2)] }
    }
}

/// Anything with a Wigner function and its two marginals.
pub trait PhaseSpaceDensity {
    fn wigner(&self, r: Vec3, p: Vec3) -> f64;
    /// |ψ(r)|² (m⁻³).
    fn marginal_position(&self, r: Vec3) -> f64;
    /// |α(p)|² ((mₑc)⁻³).
    fn marginal_momentum(&self, p: Vec3) -> f64;
}

/// Closed-form Wigner function with the free-flight shear `s` = c t applied.
#[derive(Debug, Clone)]
struct Evaluator {
    sigma: Vec3,
    terms: Vec<PairTerm>,
    shear: f64,
}

impl Evaluator {
    fn new(state: &WignerState, shear: f64) -> Self {
        Evaluator { sigma: state.sigma_r(), terms: state.terms(), shear }
    }

    fn sum<F: Fn(&AxisPair, usize) -> Complex64>(&self, f: F) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * f(&t.axes[0], 0) * f(&t.axes[1], 1) * f(&t.axes[2], 2))
            .sum::<Complex64>()
            .re
    }
}

impl PhaseSpaceDensity for Evaluator {
    fn wigner(&self, r: Vec3, p: Vec3) -> f64 {
        let r0 = r - p * self.shear;
        self.sum(|a, i| a.wigner(r0[i], p[i], self.sigma[i]))
    }

    fn marginal_position(&self, r: Vec3) -> f64 {
        self.sum(|a, i| a.position_marginal(r[i], self.sigma[i], self.shear))
    }

    fn marginal_momentum(&self, p: Vec3) -> f64 {
        self.sum(|a, i| a.momentum_marginal(p[i], self.sigma[i]))
    }
}

impl PhaseSpaceDensity for WignerState {
    fn wigner(&self, r: Vec3, p: Vec3) -> f64 {
        Evaluator::new(self, 0.0).wigner(r, p)
    }

    fn marginal_position(&self, r: Vec3) -> f64 {
        Evaluator::new(self, 0.0).marginal_position(r)
    }

    fn marginal_momentum(&self, p: Vec3) -> f64 {
        Evaluator::new(self, 0.0).marginal_momentum(p)
    }
}

/// A state after nonrelativistic free flight.
#[derive(Debug, Clone)]
pub struct FreeEvolution {
    initial: WignerState,
    time_s: f64,
    eval: Evaluator,
}

impl FreeEvolution {
    pub fn initial(&self) -> &WignerState {
        &self.initial
    }

    pub fn time_s(&self) -> f64 {
        self.time_s
    }

    /// Position width per axis, for Gaussian states.
    pub fn evolved_width(&self) -> Option<Vec3> {
        self.initial.as_gaussian().map(|g| g.evolved_width(self.time_s))
    }
}

impl PhaseSpaceDensity for FreeEvolution {
    fn wigner(&self, r: Vec3, p: Vec3) -> f64 {
        self.eval.wigner(r, p)
    }

    fn marginal_position(&self, r: Vec3) -> f64 {
        self.eval.marginal_position(r)
    }

    fn marginal_momentum(&self, p: Vec3) -> f64 {
        self.eval.marginal_momentum(p)
    }
}

pub fn wigner_eval<S: PhaseSpaceDensity + ?Sized>(state: &S, r: Vec3, p: Vec3) -> f64 {
    state.wigner(r, p)
}

pub fn marginal_position<S: PhaseSpaceDensity + ?Sized>(state: &S, r: Vec3) -> f64 {
    state.marginal_position(r)
}

pub fn marginal_momentum<S: PhaseSpaceDensity + ?Sized>(state: &S, p: Vec3) -> f64 {
    state.marginal_momentum(p)
}

/// Ballistic transport for `t_s` ≥ 0 seconds.
pub fn free_evolve(state: &WignerState, t_s: f64) -> Result<FreeEvolution> {
    if !(t_s >= 0.0 && t_s.is_finite()) {
        return domain(format!("evolution time must be non-negative, got {t_s}"));
    }
    Ok(FreeEvolution { initial: state.clone(), time_s: t_s, eval: Evaluator::new(state, SPEED_OF_LIGHT * t_s) })
}

/// Axis-aligned region of phase space (m, mₑc).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSpaceBox {
    pub r_min: Vec3,
    pub r_max: Vec3,
    pub p_min: Vec3,
    pub p_max: Vec3,
}

impl PhaseSpaceBox {
    /// Box spanning every component centre ± `widths` standard deviations.
    pub fn around(state: &WignerState, widths: f64) -> Self {
        let (r_lo, r_hi, p_lo, p_hi) = state.center_bounds();
        let sr = state.sigma_r() * widths;
        let g = GaussianWavePacket { center_r: Vec3::ZERO, center_p: Vec3::ZERO, sigma_r: state.sigma_r() };
        let sp = g.sigma_p() * widths;
        PhaseSpaceBox { r_min: r_lo - sr, r_max: r_hi + sr, p_min: p_lo - sp, p_max: p_hi + sp }
    }

    fn validate(&self) -> Result<()> {
        for a in 0..3 {
            if !(self.r_max[a] > self.r_min[a] && self.p_max[a] > self.p_min[a]) {
                return domain("phase-space box must have positive extent on every axis");
            }
        }
        Ok(())
    }
}

/// Probability mass of `state` inside `region`, by per-axis Gauss–Legendre
/// quadrature of each separable cross term.
pub fn mass_in_box(state: &WignerState, region: &PhaseSpaceBox) -> f64 {
    let nodes = gauss_legendre(256);
    let sigma = state.sigma_r();
    state
        .terms()
        .iter()
        .map(|t| {
            let mut v = t.coef;
            for a in 0..3 {
                v *= t.axes[a].box_integral(
                    sigma[a],
                    (region.r_min[a], region.r_max[a]),
                    (region.p_min[a], region.p_max[a]),
                    &nodes,
                );
            }
            v
        })
        .sum::<Complex64>()
        .re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativityReport {
    pub min_value: f64,
    /// Fraction of grid cells whose centre has W < 0.
    pub negative_fraction: f64,
    /// Probability mass inside the scanned box.
    pub mass_inside: f64,
    pub resolution: usize,
}

/// Scans a `resolution`⁶ cell-centred grid over `region`.
pub fn negativity_report(state: &WignerState, region: &PhaseSpaceBox, resolution: usize) -> Result<NegativityReport> {
    region.validate()?;
    if resolution < 2 {
        return domain("negativity scan needs at least two cells per axis");
    }
    let mass = mass_in_box(state, region);
    if !(mass >= 0.99) {
        return Err(Error::Coverage { mass });
    }
    let n = resolution;
    let sigma = state.sigma_r();
    let terms = state.terms();
    let centres = |lo: f64, hi: f64| -> Vec<f64> { (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect() };
    // tables[term][axis][ix * n + ip]
    let tables: Vec<[Vec<Complex64>; 3]> = terms
        .iter()
        .map(|t| {
            std::array::from_fn(|a| {
                let xs = centres(region.r_min[a], region.r_max[a]);
                let ps = centres(region.p_min[a], region.p_max[a]);
                xs.iter().flat_map(|&x| ps.iter().map(move |&p| t.axes[a].wigner(x, p, sigma[a]))).collect()
            })
        })
        .collect();
    let plane = n * n;
    let (min_value, negative) = (0..plane)
        .into_par_iter()
        .map(|i0| {
            let mut min = f64::INFINITY;
            let mut count = 0u64;
            for i1 in 0..plane {
                for i2 in 0..plane {
                    let w: f64 = terms
                        .iter()
                        .zip(&tables)
                        .map(|(t, tab)| t.coef * tab[0][i0] * tab[1][i1] * tab[2][i2])
                        .sum::<Complex64>()
                        .re;
                    min = min.min(w);
                    count += (w < 0.0) as u64;
                }
            }
            (min, count)
        })
        .reduce(|| (f64::INFINITY, 0), |a, b| (a.0.min(b.0), a.1 + b.1));
    let cells = (plane * plane * plane) as f64;
    Ok(NegativityReport { min_value, negative_fraction: negative as f64 / cells, mass_inside: mass, resolution: n })
}

/// One row of a Wigner slice dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlicePoint {
    pub r: f64,
    pub p: f64,
    pub rho_w: f64,
}

/// W on an `n × n` grid in the (r_axis, p_axis) plane of `region`, the other
/// coordinates held at `anchor_r`, `anchor_p`.
pub fn wigner_slice<S: PhaseSpaceDensity + ?Sized>(
    state: &S,
    axis: usize,
    region: &PhaseSpaceBox,
    anchor_r: Vec3,
    anchor_p: Vec3,
    n: usize,
) -> Result<Vec<SlicePoint>> {
    if axis > 2 {
        return domain(format!("axis must be 0, 1 or 2, got {axis}"));
    }
    if n < 2 {
        return domain("slice needs at least two points per axis");
    }
    region.validate()?;
    let along = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let x = along(region.r_min[axis], region.r_max[axis], i);
        for j in 0..n {
            let p = along(region.p_min[axis], region.p_max[axis], j);
            let (mut r, mut q) = (anchor_r, anchor_p);
            set(&mut r, axis, x);
            set(&mut q, axis, p);
            out.push(SlicePoint { r: x, p, rho_w: state.wigner(r, q) });
        }
    }
    Ok(out)
}

fn set(v: &mut Vec3, axis: usize, value: f64) {
    match axis {
        0 => v.x = value,
        1 => v.y = value,
        _ => v.z = value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ANGSTROM: f64 = 1e-10;

    /// Momentum-space amplitude of one component along one axis.
    fn alpha(p: f64, x0: f64, p0: f64, sigma: f64) -> Complex64 {
        let norm = (2.0 * sigma * sigma / (PI * HBAR * HBAR)).powf(0.25);
        let q = p - p0;
        Complex64::from_polar(norm * (-sigma * sigma * q * q / (HBAR * HBAR)).exp(), -q * x0 / HBAR)
    }

    /// W(x, p) = (2πħ)⁻¹ ∫ α(p + q/2) α*(p − q/2) e^{iqx/ħ} dq by brute
    /// trapezoid quadrature, for a 1-D superposition Σ c_j α_j.
    fn brute_wigner(comps: &[(Complex64, f64, f64)], sigma: f64, x: f64, p: f64) -> f64 {
        let amp = |k: f64| -> Complex64 { comps.iter().map(|&(c, x0, p0)| c * alpha(k, x0, p0, sigma)).sum() };
        let sp = HBAR / (2.0 * sigma);
        let spread = comps.iter().map(|c| (c.2 - p).abs()).fold(0.0, f64::max);
        let half = 2.0 * (spread + 12.0 * sp);
        let n = 40_000;
        let h = 2.0 * half / n as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..=n {
            let q = -half + h * i as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            sum += amp(p + 0.5 * q) * amp(p - 0.5 * q).conj() * Complex64::from_polar(w, q * x / HBAR);
        }
        (sum * h).re / (2.0 * PI * HBAR)
    }

    /// 3-D state that varies only along z, so W = W_z(z, p_z) × W_x × W_y
    /// with the transverse factors at their centres equal to 1/(πħ) each.
    fn z_superposition(sigma: f64, comps: &[(Complex64, f64, f64)]) -> WignerState {
        let s = Vec3::new(sigma, sigma, sigma);
        let packets = comps
            .iter()
            .map(|&(c, x0, p0)| (c, GaussianWavePacket::new(Vec3::new(0.0, 0.0, x0), Vec3::new(0.0, 0.0, p0), s).unwrap()))
            .collect();
        MomentumSuperposition::new(packets).unwrap().into()
    }

    #[test]
    fn closed_form_matches_defining_integral() {
        let sigma = ANGSTROM;
        let sp = HBAR / (2.0 * sigma);
        let raw = [(Complex64::new(1.0, 0.0), 0.0, -4.0 * sp), (Complex64::new(0.6, 0.5), 0.3 * sigma, 3.0 * sp)];
        let state = z_superposition(sigma, &raw);
        let WignerState::Superposition(s) = &state else { unreachable!() };
        let comps: Vec<(Complex64, f64, f64)> =
            raw.iter().zip(s.amplitudes()).map(|(r, c)| (*c, r.1, r.2)).collect();
        let transverse = (1.0 / (PI * HBAR)).powi(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let z = rng.gen_range(-3.0..3.0) * sigma;
            let pz = rng.gen_range(-7.0..6.0) * sp;
            let want = brute_wigner(&comps, sigma, z, pz);
            let got = state.wigner(Vec3::new(0.0, 0.0, z), Vec3::new(0.0, 0.0, pz)) / transverse;
            let scale = 1.0 / (PI * HBAR);
            assert!((got - want).abs() <= 1e-6 * want.abs().max(1e-3 * scale), "z={z} p={pz}: {got} vs {want}");
        }
    }

    #[test]
    fn gaussian_peak_and_positivity() {
        let g = GaussianWavePacket::new(Vec3::new(1e-9, 0.0, 0.0), Vec3::new(0.0, 1e-3, 0.0), Vec3::new(1e-10, 2e-10, 3e-10))
            .unwrap();
        let s: WignerState = g.into();
        let peak = s.wigner(g.center_r, g.center_p);
        assert!((peak * (PI * HBAR).powi(3) - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let r = g.center_r + Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)) * 1e-10;
            let p = g.center_p + Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)) * 1e-3;
            let w = s.wigner(r, p);
            assert!(w >= 0.0 && w <= peak);
        }
    }

    #[test]
    fn gaussian_marginals() {
        let sigma = 2.0 * ANGSTROM;
        let g = GaussianWavePacket::isotropic(sigma).unwrap();
        let s: WignerState = g.into();
        let peak = s.marginal_position(Vec3::ZERO);
        assert!((peak * (2.0 * PI * sigma * sigma).powf(1.5) - 1.0).abs() < 1e-12);
        let off = s.marginal_position(Vec3::new(sigma, 0.0, 0.0)) / peak;
        assert!((off - (-0.5f64).exp()).abs() < 1e-12);
        let sp = HBAR / (2.0 * sigma);
        let pm = s.marginal_momentum(Vec3::new(0.0, 0.0, sp)) / s.marginal_momentum(Vec3::ZERO);
        assert!((pm - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn normalization_by_quadrature() {
        let sigma = ANGSTROM;
        let sp = HBAR / (2.0 * sigma);
        let g: WignerState = GaussianWavePacket::isotropic(sigma).unwrap().into();
        let region = PhaseSpaceBox::around(&g, 10.0);
        assert!((mass_in_box(&g, &region) - 1.0).abs() < 1e-6);
        let sup = z_superposition(sigma, &[(Complex64::new(1.0, 0.0), 0.0, -sp), (Complex64::new(0.0, 1.0), 0.0, 0.5 * sp)]);
        let region = PhaseSpaceBox::around(&sup, 10.0);
        assert!((mass_in_box(&sup, &region) - 1.0).abs() < 1e-6);
        let WignerState::Superposition(s) = &sup else { unreachable!() };
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn superposition_fringes_and_negativity() {
        let sigma = ANGSTROM;
        let sp = HBAR / (2.0 * sigma);
        let (p1, p2) = (-6.0 * sp, 6.0 * sp);
        let state = z_superposition(sigma, &[(Complex64::new(1.0, 0.0), 0.0, p1), (Complex64::new(1.0, 0.0), 0.0, p2)]);
        // cross term ∝ cos((p₁ − p₂) z/ħ): −1 at z = πħ/|Δp|
        let z = PI * HBAR / (p2 - p1);
        let w = state.wigner(Vec3::new(0.0, 0.0, z), Vec3::new(0.0, 0.0, 0.5 * (p1 + p2)));
        assert!(w < 0.0);
        // |ψ|² fringes with period 2πħ/|Δp|
        let period = 2.0 * PI * HBAR / (p2 - p1);
        let at = |z: f64| state.marginal_position(Vec3::new(0.0, 0.0, z));
        assert!(at(0.5 * period) < 1e-6 * at(0.0));
        assert!((at(period) / at(0.0) - (-period * period / (2.0 * sigma * sigma)).exp()).abs() < 1e-9);

        let region = PhaseSpaceBox::around(&state, 6.0);
        let report = negativity_report(&state, &region, 12).unwrap();
        assert!(report.negative_fraction > 0.0 && report.min_value < 0.0);
        assert!(report.mass_inside > 0.99);
    }

    #[test]
    fn gaussian_and_degenerate_superposition_are_non_negative() {
        let sigma = ANGSTROM;
        let g: WignerState = GaussianWavePacket::isotropic(sigma).unwrap().into();
        let report = negativity_report(&g, &PhaseSpaceBox::around(&g, 6.0), 10).unwrap();
        assert_eq!(report.negative_fraction, 0.0);
        assert!(report.min_value >= 0.0);
        let sp = HBAR / (2.0 * sigma);
        let same = z_superposition(sigma, &[(Complex64::new(1.0, 0.0), 0.0, sp), (Complex64::new(0.3, -0.2), 0.0, sp)]);
        assert!(same.as_gaussian().is_some());
        let report = negativity_report(&same, &PhaseSpaceBox::around(&same, 6.0), 10).unwrap();
        assert_eq!(report.negative_fraction, 0.0);
        let a = same.wigner(Vec3::new(0.0, 0.0, 0.2 * sigma), Vec3::new(0.0, 0.0, 0.7 * sp));
        let b = same
            .as_gaussian()
            .map(WignerState::from)
            .unwrap()
            .wigner(Vec3::new(0.0, 0.0, 0.2 * sigma), Vec3::new(0.0, 0.0, 0.7 * sp));
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_box_is_a_coverage_error() {
        let g: WignerState = GaussianWavePacket::isotropic(ANGSTROM).unwrap().into();
        let region = PhaseSpaceBox::around(&g, 1.0);
        assert!(matches!(negativity_report(&g, &region, 4), Err(Error::Coverage { .. })));
    }

    #[test]
    fn spreading_of_one_angstrom_packet() {
        let g = GaussianWavePacket::isotropic(ANGSTROM).unwrap();
        // 190 cycles of 800 nm light
        let t = 190.0 * 800e-9 / SPEED_OF_LIGHT;
        let sigma_t = g.evolved_width(t).x;
        let ratio = HBAR * SPEED_OF_LIGHT * t / (2.0 * ANGSTROM * ANGSTROM);
        let want = ANGSTROM * (1.0 + ratio * ratio).sqrt();
        assert!((sigma_t / want - 1.0).abs() < 1e-12);
        assert!(sigma_t > 0.25 * 800e-9 && sigma_t < 0.5 * 800e-9, "{sigma_t}");
        assert!((sigma_t - 0.29e-6).abs() < 0.01e-6);
    }

    /// Second moment of the transported position marginal on a grid.
    #[test]
    fn transported_marginal_width_and_norm() {
        let g = GaussianWavePacket::new(Vec3::new(0.0, 0.0, 5e-9), Vec3::new(0.0, 0.0, 1e-4), Vec3::new(1e-9, 1e-9, 1e-9)).unwrap();
        let state: WignerState = g.into();
        let t = 3e-15;
        let evolved = free_evolve(&state, t).unwrap();
        let width = evolved.evolved_width().unwrap().z;
        let centre = g.center_r.z + g.center_p.z * SPEED_OF_LIGHT * t;
        let (nodes, weights) = gauss_legendre(400);
        let half = 12.0 * width;
        let (mut m0, mut m2) = (0.0, 0.0);
        for (u, w) in nodes.iter().zip(&weights) {
            let z = centre + half * u;
            let rho = evolved.marginal_position(Vec3::new(0.0, 0.0, z)) * (2.0 * PI * width * width);
            m0 += w * half * rho;
            m2 += w * half * rho * (z - centre).powi(2);
        }
        assert!((m0 - 1.0).abs() < 1e-6, "norm {m0}");
        assert!((m2.sqrt() / width - 1.0).abs() < 1e-4, "{} vs {width}", m2.sqrt());
        let free = free_evolve(&state, 0.0).unwrap();
        let (r, p) = (Vec3::new(1e-9, -2e-9, 4e-9), Vec3::new(1e-4, 0.0, 2e-4));
        assert_eq!(free.wigner(r, p), state.wigner(r, p));
        assert!(free_evolve(&state, -1.0).is_err());
    }

    #[test]
    fn evolved_wigner_is_a_shear() {
        let sigma = ANGSTROM;
        let sp = HBAR / (2.0 * sigma);
        let state = z_superposition(sigma, &[(Complex64::new(1.0, 0.0), 0.0, -2.0 * sp), (Complex64::new(1.0, 0.0), 0.0, 2.0 * sp)]);
        let t = 1e-16;
        let ev = free_evolve(&state, t).unwrap();
        let (r, p) = (Vec3::new(0.0, 0.0, 3e-10), Vec3::new(0.0, 0.0, sp));
        let back = r - p * (SPEED_OF_LIGHT * t);
        assert_eq!(ev.wigner(r, p), state.wigner(back, p));
        // position marginal by direct p-quadrature of the sheared function
        let (nodes, weights) = gauss_legendre(300);
        let half = 12.0 * sp;
        let mut direct = 0.0;
        for (u, w) in nodes.iter().zip(&weights) {
            let pz = half * u;
            let base = ev.wigner(Vec3::new(0.0, 0.0, 2e-10), Vec3::new(0.0, 0.0, pz));
            direct += w * half * base;
        }
        // W_x W_y = (πħ)⁻² at the transverse centre, while each transverse
        // position marginal there is (σ(t)√2π)⁻¹
        let st = GaussianWavePacket::isotropic(sigma).unwrap().evolved_width(t).x;
        let closed = ev.marginal_position(Vec3::new(0.0, 0.0, 2e-10));
        let direct_full = direct * (PI * HBAR).powi(2) / (2.0 * PI * st * st);
        assert!((closed / direct_full - 1.0).abs() < 1e-8, "{closed} vs {direct_full}");
    }

    proptest! {
        #[test]
        fn momentum_marginal_survives_free_flight(t in 0.0f64..1e-13, pz in -3.0f64..3.0, px in -3.0f64..3.0) {
            let sigma = ANGSTROM;
            let sp = HBAR / (2.0 * sigma);
            let state = z_superposition(sigma, &[(Complex64::new(1.0, 0.0), 0.0, -sp), (Complex64::new(0.4, 0.9), 1e-10, 2.0 * sp)]);
            let ev = free_evolve(&state, t).unwrap();
            let p = Vec3::new(px * sp, 0.0, pz * sp);
            let a = state.marginal_momentum(p);
            let b = ev.marginal_momentum(p);
            prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-300));
        }

        #[test]
        fn gaussian_wigner_non_negative(x in -8.0f64..8.0, p in -8.0f64..8.0) {
            let g: WignerState = GaussianWavePacket::isotropic(ANGSTROM).unwrap().into();
            let sp = HBAR / (2.0 * ANGSTROM);
            prop_assert!(g.wigner(Vec3::new(x * ANGSTROM, 0.0, 0.0), Vec3::new(0.0, p * sp, 0.0)) >= 0.0);
        }
    }
}
