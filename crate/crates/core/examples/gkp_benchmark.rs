//! Optimal isotropic diffusion for a thermal target.
//!
//! `cargo run --example gkp_benchmark`

use qrev::one_mode::gkp_benchmark;

pub fn run() -> qrev::Result<()> {
    for nbar in [0.0, 0.5, 1.0, 5.0, 50.0, f64::INFINITY] {
        let b = gkp_benchmark(nbar, 1.0)?;
        println!("n̄={nbar:>6}: D = {:.5}γ·I, variance amplification {:.5}", b.diffusion_rate, b.amplification);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("gkp_benchmark example");
}
