//! Free spreading of a one-ångström electron and Wigner negativity of a
//! two-component momentum superposition.
//!
//! ```bash
//! cargo run --release --example wavepacket_spreading
//! ```

use num_complex::Complex64;
use wpr::wigner::{
    free_evolve, marginal_position, negativity_report, GaussianWavePacket, MomentumSuperposition, PhaseSpaceBox,
    WignerState,
};
use wpr::Vec3;

fn main() -> wpr::Result<()> {
    let packet = GaussianWavePacket::isotropic(1e-10)?;
    println!("sigma_p = {:.3e} m_e c", packet.sigma_p().x);
    for t_fs in [0.0, 1.0, 10.0, 100.0, 507.0] {
        let w = packet.evolved_width(t_fs * 1e-15).x;
        println!("t = {t_fs:>5} fs   sigma_r = {:.3e} m = {:.3} lambda(800 nm)", w, w / 800e-9);
    }

    // the position marginal of the evolved state is the spread Gaussian
    let state = WignerState::from(packet);
    let evolved = free_evolve(&state, 507e-15)?;
    let s = evolved.evolved_width().unwrap().x;
    let peak = marginal_position(&evolved, Vec3::ZERO);
    println!("marginal at the centre {peak:.4e} /m^3, Gaussian value {:.4e}", (2.0 * std::f64::consts::PI * s * s).powf(-1.5));

    let kick = 3.0 * packet.sigma_p().x;
    let cat = MomentumSuperposition::from_offsets(
        packet,
        &[(Complex64::new(1.0, 0.0), Vec3::new(-kick, 0.0, 0.0)), (Complex64::new(1.0, 0.0), Vec3::new(kick, 0.0, 0.0))],
    )?;
    let cat = WignerState::from(cat);
    let report = negativity_report(&cat, &PhaseSpaceBox::around(&cat, 6.0), 12)?;
    println!(
        "superposition: min W = {:.3e}, negative cells {:.1}%, mass in box {:.4}",
        report.min_value,
        100.0 * report.negative_fraction,
        report.mass_inside
    );
    let single = negativity_report(&state, &PhaseSpaceBox::around(&state, 6.0), 12)?;
    println!("single Gaussian: negative cells {:.1}%", 100.0 * single.negative_fraction);
    Ok(())
}
