//! Drives a subcommand from configuration text, as the `wpr` binary does,
//! and prints the manifest it leaves next to the outputs.
//!
//! ```bash
//! cargo run --release --example config_run
//! ```

use wpr::app::{run, Command};
use wpr::config::RunConfig;

const CONFIG: &str = "
[beam]
model = plane_pulsed
peak_intensity_W_cm2 = 1e18
fwhm_fs = 20

[electron]
birth_mode = explicit_time
birth_time_fs = -60
margin_periods = 2

[grids]
directions = 1.5707963267948966 1.5707963267948966
omega_min = 0.5
omega_max = 3.5
n_omega = 121
";

fn main() -> wpr::Result<()> {
    let config = RunConfig::parse(CONFIG)?;
    let out = std::env::temp_dir().join(format!("wpr-config-run-{}", &config.hash()[..12]));
    let result = run(Command::Radiate, &config, &out)?;
    for f in &result.files {
        println!("wrote {}", f.display());
    }
    print!("{}", std::fs::read_to_string(out.join("manifest.json"))?);
    Ok(())
}
