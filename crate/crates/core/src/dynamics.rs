//! Relativistic point-electron dynamics in the laser field.
//!
//! Normalized equations of motion for charge −e:
//! dp/dt = −(E + β×B), dr/dt = β = p/γ, with γ = √(1 + p²).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{config, domain, Error, Result};
use crate::laser::{FieldSample, LaserField};
use crate::vec3::Vec3;

/// One laser period in normalized time.
pub const PERIOD: f64 = 2.0 * PI;

/// Default step, a thousandth of a laser period.
pub const DEFAULT_DT: f64 = PERIOD / 1000.0;

/// Anything that can supply E and B at a spacetime point.
pub trait ExternalField: Sync {
    fn field_at(&self, r: Vec3, t: f64) -> FieldSample;

    /// Laser phase η = t − x used for cycle averages and stopping criteria.
    fn phase(&self, r: Vec3, t: f64) -> f64 {
        t - r.x
    }
}

impl ExternalField for LaserField {
    fn field_at(&self, r: Vec3, t: f64) -> FieldSample {
        self.evaluate(r, t)
    }
}

/// Field-free space.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl ExternalField for ZeroField {
    fn field_at(&self, _: Vec3, _: f64) -> FieldSample {
        FieldSample::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ElectronState {
    /// Units of 1/k₀.
    pub position: Vec3,
    /// Units of mₑc.
    pub momentum: Vec3,
    /// Units of 1/ω₀.
    pub time: f64,
}

impl ElectronState {
    pub fn at_rest(position: Vec3, time: f64) -> Self {
        ElectronState { position, momentum: Vec3::ZERO, time }
    }

    pub fn gamma(&self) -> f64 {
        (1.0 + self.momentum.norm_sqr()).sqrt()
    }

    pub fn velocity(&self) -> Vec3 {
        self.momentum / self.gamma()
    }
}

/// dβ/dt from the Lorentz force.
pub fn acceleration(field: &FieldSample, momentum: Vec3) -> Vec3 {
    let gamma = (1.0 + momentum.norm_sqr()).sqrt();
    let beta = momentum / gamma;
    let force = -(field.e_field + beta.cross(field.b_field));
    (force - beta * beta.dot(force)) / gamma
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub integrator: String,
    pub dt: f64,
    pub birth_time: f64,
    pub config_hash: Option<String>,
}

/// Uniformly sampled electron history.
#[derive(Debug, Clone)]
pub struct Trajectory {
    states: Vec<ElectronState>,
    velocities: Vec<Vec3>,
    accelerations: Vec<Vec3>,
    meta: TrajectoryMeta,
}

impl Trajectory {
    /// Builds a trajectory from uniformly spaced kinematic samples. Velocities
    /// are derived from the momenta; accelerations are taken as given.
    pub fn from_kinematics(
        t0: f64,
        dt: f64,
        positions: Vec<Vec3>,
        momenta: Vec<Vec3>,
        accelerations: Vec<Vec3>,
    ) -> Result<Self> {
        let n = positions.len();
        if n < 2 || momenta.len() != n || accelerations.len() != n {
            return domain("trajectory needs at least two samples with matching lengths");
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return domain("trajectory time step must be positive");
        }
        let states: Vec<ElectronState> = positions
            .into_iter()
            .zip(momenta)
            .enumerate()
            .map(|(i, (position, momentum))| ElectronState { position, momentum, time: t0 + dt * i as f64 })
            .collect();
        let velocities: Vec<Vec3> = states.iter().map(ElectronState::velocity).collect();
        if velocities.iter().any(|b| !(b.norm() < 1.0)) {
            return domain("velocity must stay below c");
        }
        Ok(Trajectory {
            states,
            velocities,
            accelerations,
            meta: TrajectoryMeta { integrator: "given".into(), dt, birth_time: t0, config_hash: None },
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.meta.dt
    }

    pub fn start_time(&self) -> f64 {
        self.states[0].time
    }

    pub fn end_time(&self) -> f64 {
        self.states[self.states.len() - 1].time
    }

    pub fn states(&self) -> &[ElectronState] {
        &self.states
    }

    pub fn velocities(&self) -> &[Vec3] {
        &self.velocities
    }

    pub fn accelerations(&self) -> &[Vec3] {
        &self.accelerations
    }

    pub fn meta(&self) -> &TrajectoryMeta {
        &self.meta
    }

    pub fn set_config_hash(&mut self, hash: impl Into<String>) {
        self.meta.config_hash = Some(hash.into());
    }

    pub fn first(&self) -> &ElectronState {
        &self.states[0]
    }

    pub fn last(&self) -> &ElectronState {
        &self.states[self.states.len() - 1]
    }

    pub fn time(&self, i: usize) -> f64 {
        self.states[i].time
    }
}

fn rk4_step<F: ExternalField + ?Sized>(field: &F, s: &ElectronState, dt: f64) -> ElectronState {
    let deriv = |r: Vec3, p: Vec3, t: f64| -> (Vec3, Vec3) {
        let gamma = (1.0 + p.norm_sqr()).sqrt();
        let beta = p / gamma;
        let f = field.field_at(r, t);
        (beta, -(f.e_field + beta.cross(f.b_field)))
    };
    let (r, p, t) = (s.position, s.momentum, s.time);
    let h = dt;
    let (k1r, k1p) = deriv(r, p, t);
    let (k2r, k2p) = deriv(r + k1r * (0.5 * h), p + k1p * (0.5 * h), t + 0.5 * h);
    let (k3r, k3p) = deriv(r + k2r * (0.5 * h), p + k2p * (0.5 * h), t + 0.5 * h);
    let (k4r, k4p) = deriv(r + k3r * h, p + k3p * h, t + h);
    ElectronState {
        position: r + (k1r + k2r * 2.0 + k3r * 2.0 + k4r) * (h / 6.0),
        momentum: p + (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (h / 6.0),
        time: t + h,
    }
}

fn check_step(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return config("time step must be positive");
    }
    if dt > PERIOD / 200.0 * (1.0 + 1e-12) {
        return config(format!("time step {} exceeds a two-hundredth of a laser period", dt));
    }
    Ok(())
}

fn finish<F: ExternalField + ?Sized>(field: &F, states: Vec<ElectronState>, dt: f64, integrator: &str) -> Trajectory {
    let velocities = states.iter().map(ElectronState::velocity).collect();
    let accelerations = states
        .iter()
        .map(|s| acceleration(&field.field_at(s.position, s.time), s.momentum))
        .collect();
    let birth_time = states[0].time;
    Trajectory {
        states,
        velocities,
        accelerations,
        meta: TrajectoryMeta { integrator: integrator.into(), dt, birth_time, config_hash: None },
    }
}

fn advance<F: ExternalField + ?Sized>(field: &F, s: &ElectronState, dt: f64) -> Result<ElectronState> {
    let next = rk4_step(field, s, dt);
    if !next.position.is_finite() || !next.momentum.is_finite() {
        return Err(Error::Propagation { time: s.time });
    }
    Ok(next)
}

/// Integrates from `initial` to `t_end` with fixed-step RK4, recording every
/// step. The last sample lies at or just past `t_end`.
pub fn push_trajectory<F: ExternalField + ?Sized>(
    field: &F,
    initial: ElectronState,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    check_step(dt)?;
    if !(initial.time < t_end) {
        return config("trajectory end time must follow the initial time");
    }
    if !initial.position.is_finite() || !initial.momentum.is_finite() {
        return Err(Error::Propagation { time: initial.time });
    }
    let steps = ((t_end - initial.time) / dt - 1e-9).ceil().max(1.0) as usize;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(initial);
    let t0 = initial.time;
    for k in 0..steps {
        let mut next = advance(field, &states[k], dt)?;
        next.time = t0 + dt * (k + 1) as f64;
        states.push(next);
    }
    Ok(finish(field, states, dt, "rk4"))
}

/// Integrates until the laser phase at the electron has passed the pulse
/// cutoff by `margin`, so that the trajectory ends field-free.
pub fn push_until_field_free(
    field: &LaserField,
    initial: ElectronState,
    dt: f64,
    margin: f64,
    max_time: f64,
) -> Result<Trajectory> {
    check_step(dt)?;
    let cutoff = field.envelope_cutoff();
    if !cutoff.is_finite() {
        return config("an infinite plane wave never leaves the electron; give an explicit end time");
    }
    let mut states = vec![initial];
    let t0 = initial.time;
    let mut k = 0;
    loop {
        let s = &states[k];
        if field.phase(s.position, s.time) > cutoff + margin {
            break;
        }
        if s.time - t0 > max_time {
            return domain(format!(
                "electron still inside the pulse after {} laser periods",
                max_time / PERIOD
            ));
        }
        let mut next = advance(field, s, dt)?;
        next.time = t0 + dt * (k + 1) as f64;
        states.push(next);
        k += 1;
    }
    if states.len() < 2 {
        let next = advance(field, &states[0], dt)?;
        states.push(next);
    }
    Ok(finish(field, states, dt, "rk4"))
}

/// Earliest time on the rising edge at which the cycle-averaged intensity at
/// `position` reaches `threshold_w_cm2`.
pub fn find_birth_time(field: &LaserField, position: Vec3, threshold_w_cm2: f64) -> Result<f64> {
    if !(threshold_w_cm2 > 0.0) {
        return domain("birth threshold must be positive");
    }
    let cutoff = field.envelope_cutoff();
    if !cutoff.is_finite() {
        return domain("an infinite plane wave has no rising edge");
    }
    // the envelope at a fixed position peaks at η = 0
    let t_peak = position.x;
    let peak_here = field.local_intensity(position, t_peak);
    if threshold_w_cm2 >= peak_here {
        return Err(Error::NoCrossing { threshold: threshold_w_cm2, peak: peak_here });
    }
    let mut lo = t_peak - 2.0 * cutoff;
    let mut hi = t_peak;
    while field.local_intensity(position, lo) >= threshold_w_cm2 {
        lo -= cutoff;
    }
    let tol = PERIOD * 1e-9;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if field.local_intensity(position, mid) < threshold_w_cm2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Momentum averaged over the final full laser cycle, weighting by laser
/// phase η = t − x (the light-front average, which is what a plane wave
/// imprints as the drift).
pub fn drift_momentum(trajectory: &Trajectory) -> Result<Vec3> {
    let states = trajectory.states();
    let eta = |s: &ElectronState| s.time - s.position.x;
    let eta_end = eta(trajectory.last());
    if eta_end - eta(trajectory.first()) < 2.0 * PERIOD {
        return domain("trajectory spans fewer than two laser periods");
    }
    let eta_start = eta_end - PERIOD;
    let mut acc = Vec3::ZERO;
    let mut k = states.len() - 1;
    while k > 0 {
        let (a, b) = (&states[k - 1], &states[k]);
        let (ea, eb) = (eta(a), eta(b));
        if ea >= eta_start {
            acc += (a.momentum + b.momentum) * (0.5 * (eb - ea));
        } else {
            // partial interval
            let f = (eb - eta_start) / (eb - ea);
            let p_cut = b.momentum + (a.momentum - b.momentum) * f;
            acc += (p_cut + b.momentum) * (0.5 * (eb - eta_start));
            break;
        }
        k -= 1;
    }
    Ok(acc / PERIOD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laser::BeamConfig;

    #[test]
    fn free_particle_moves_straight() {
        let init = ElectronState { position: Vec3::new(0.5, 0.0, 0.0), momentum: Vec3::X, time: 0.0 };
        let tr = push_trajectory(&ZeroField, init, 50.0, DEFAULT_DT).unwrap();
        let v = 1.0 / 2f64.sqrt();
        for s in tr.states() {
            assert!((s.position.x - (0.5 + v * s.time)).abs() < 1e-11);
            assert!((s.momentum - Vec3::X).norm() < 1e-12);
        }
        assert!(tr.accelerations().iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn step_size_is_limited() {
        let init = ElectronState::default();
        assert!(push_trajectory(&ZeroField, init, 10.0, PERIOD / 100.0).is_err());
        assert!(push_trajectory(&ZeroField, init, -1.0, DEFAULT_DT).is_err());
        assert!(push_trajectory(&ZeroField, init, 10.0, PERIOD / 200.0).is_ok());
    }

    #[test]
    fn plane_wave_canonical_invariants() {
        let f = LaserField::new(&BeamConfig::plane_infinite(800.0, 1e19)).unwrap();
        // born at rest at η = 0, a zero of the vector potential
        let tr = push_trajectory(&f, ElectronState::default(), 20.0 * PERIOD, DEFAULT_DT).unwrap();
        for s in tr.states() {
            let eta = s.time - s.position.x;
            let a = f.plane_vector_potential(eta).unwrap();
            assert!((s.momentum.z - a).abs() < 1e-6);
            assert!((s.gamma() - s.momentum.x - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn plane_wave_unit_amplitude_turning_point() {
        let i = crate::units::intensity_from_a0(1.0, 800.0);
        let f = LaserField::new(&BeamConfig::plane_infinite(800.0, i)).unwrap();
        let tr = push_trajectory(&f, ElectronState::default(), 3.0 * PERIOD, PERIOD / 4000.0).unwrap();
        // the phase where a = 1 is η = 3π/2
        let s = tr
            .states()
            .iter()
            .min_by(|a, b| {
                let da = (a.time - a.position.x - 1.5 * PI).abs();
                let db = (b.time - b.position.x - 1.5 * PI).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        assert!((s.momentum.z - 1.0).abs() < 1e-5);
        assert!((s.momentum.x - 0.5).abs() < 1e-5);
        assert!((s.gamma() - 1.5).abs() < 1e-5);
    }

    #[test]
    fn drift_in_plane_wave() {
        let i = crate::units::intensity_from_a0(1.0, 800.0);
        let f = LaserField::new(&BeamConfig::plane_infinite(800.0, i)).unwrap();
        let tr = push_trajectory(&f, ElectronState::default(), 12.0 * PERIOD, DEFAULT_DT).unwrap();
        let d = drift_momentum(&tr).unwrap();
        assert!((d.x - 0.25).abs() < 0.02 * 0.25, "{:?}", d);
        assert!(d.y.abs() < 1e-9 && d.z.abs() < 5e-3);
    }

    #[test]
    fn drift_of_free_particle() {
        let tr = push_trajectory(&ZeroField, ElectronState::default(), 3.0 * PERIOD, DEFAULT_DT).unwrap();
        assert_eq!(drift_momentum(&tr).unwrap(), Vec3::ZERO);
        let short = push_trajectory(&ZeroField, ElectronState::default(), 1.5 * PERIOD, DEFAULT_DT).unwrap();
        assert!(drift_momentum(&short).is_err());
    }

    #[test]
    fn birth_time_thresholds() {
        let f = LaserField::new(&BeamConfig::focused_pulsed(800.0, 1e19, 35.0, 3.0)).unwrap();
        let tau = f.fwhm();
        assert!(matches!(find_birth_time(&f, Vec3::ZERO, 1e19), Err(Error::NoCrossing { .. })));
        let t = find_birth_time(&f, Vec3::ZERO, 0.5e19).unwrap();
        assert!((t / (-0.5 * tau) - 1.0).abs() < 1e-6);
        let t = find_birth_time(&f, Vec3::ZERO, 2e16).unwrap();
        // exp(-4 ln2 t²/τ²) = 2e-3
        let oracle = -tau * ((500.0f64).ln() / (4.0 * 2f64.ln())).sqrt();
        assert!((t - oracle).abs() < 1e-6 * PERIOD);
        assert!((t / tau + 1.497).abs() < 1e-3);
    }

    #[test]
    fn fourth_order_convergence() {
        let i = crate::units::intensity_from_a0(1.0, 800.0);
        let f = LaserField::new(&BeamConfig::plane_pulsed(800.0, i, 10.0)).unwrap();
        let start = ElectronState::at_rest(Vec3::ZERO, -3.0 * f.fwhm());
        let end = 3.0 * f.fwhm();
        let run = |dt: f64| push_trajectory(&f, start, end, dt).unwrap().last().position;
        let base = PERIOD / 200.0;
        let (r1, r2, r3) = (run(base), run(base / 2.0), run(base / 4.0));
        let order = ((r1 - r2).norm() / (r2 - r3).norm()).log2();
        assert!(order >= 3.8, "measured order {}", order);
    }

    #[test]
    fn rejects_nan_fields() {
        struct Bad;
        impl ExternalField for Bad {
            fn field_at(&self, _: Vec3, t: f64) -> FieldSample {
                let v = if t > 1.0 { f64::NAN } else { 0.0 };
                FieldSample { e_field: Vec3::new(v, 0.0, 0.0), b_field: Vec3::ZERO }
            }
        }
        let err = push_trajectory(&Bad, ElectronState::default(), 5.0, DEFAULT_DT).unwrap_err();
        match err {
            Error::Propagation { time } => assert!(time > 0.9 && time < 1.1),
            e => panic!("unexpected {}", e),
        }
    }
}
