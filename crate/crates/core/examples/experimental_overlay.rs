//! Reported squeezing pairs placed on the phase diagram.
//!
//! `cargo run --example experimental_overlay`

use qrev::cli::overlay::builtin_points;
use qrev::one_mode::z_min_exact;

pub fn run() -> qrev::Result<()> {
    for p in builtin_points() {
        let z = z_min_exact(&p.params()?, 1.0)?.z_min;
        println!(
            "{:<12} {:>5}/{:<5} dB → r = {:.4}, ν = {:.4}, cosh(2r)/ν = {:.3}, Z_min = {:.3}γ",
            p.label, p.s_db, p.a_db, p.r, p.nu, p.x, z
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("experimental_overlay example");
}
