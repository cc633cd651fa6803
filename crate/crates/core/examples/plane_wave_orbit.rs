//! Figure-eight motion in an infinite plane wave.
//!
//! Pushes an electron born at rest through a few cycles and checks the two
//! exact plane-wave invariants along the way.
//!
//! ```bash
//! cargo run --release --example plane_wave_orbit -- 2.0
//! ```

use wpr::dynamics::{push_trajectory, ElectronState, ExternalField, PERIOD};
use wpr::units::intensity_from_a0;
use wpr::{BeamConfig, LaserField, Vec3};

fn main() -> wpr::Result<()> {
    let a0: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let field = LaserField::new(&BeamConfig::plane_infinite(800.0, intensity_from_a0(a0, 800.0)))?;
    let traj = push_trajectory(&field, ElectronState::at_rest(Vec3::ZERO, 0.0), 4.0 * PERIOD, PERIOD / 1000.0)?;

    let mut worst_lc = 0.0f64;
    let mut worst_pz = 0.0f64;
    for s in traj.states() {
        worst_lc = worst_lc.max((s.gamma() - s.momentum.x - 1.0).abs());
        let a = field.plane_vector_potential(field.phase(s.position, s.time)).unwrap_or(0.0);
        worst_pz = worst_pz.max((s.momentum.z - a).abs());
    }
    let drift = a0 * a0 / 4.0;
    let last = traj.last();
    println!("a0 = {a0}, {} steps", traj.len());
    println!("max |gamma - p_x - 1| = {worst_lc:.2e}");
    println!("max |p_z - a(eta)|    = {worst_pz:.2e}");
    println!("mean drift speed over 4 cycles: {:.4} c (plane-wave value {:.4} c)", last.position.x / last.time, drift / (1.0 + drift));
    println!("peak transverse excursion {:.4} / k0", traj.states().iter().map(|s| s.position.z.abs()).fold(0.0, f64::max));
    Ok(())
}
