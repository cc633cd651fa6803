//! Coherent emission of a rigid Gaussian charge cloud against its size.
//!
//! The cloud radiates like a point charge times a form factor
//! exp(-κ²r0²(1 - cos angle to the drive)), so forward emission never drops
//! while side emission dies off once r0 approaches λ/2π.
//!
//! ```bash
//! cargo run --release --example cloud_size_scan
//! ```

use wpr::extended::efficiency_scan;
use wpr::grid::linspace;

fn main() -> wpr::Result<()> {
    let sizes = linspace(0.0, 0.5, 11);
    let table = efficiency_scan(&sizes, &[])?;
    println!("{}", table.column_names().join("  "));
    for row in table.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.4e}")).collect();
        println!("{}", cells.join("  "));
    }
    Ok(())
}
