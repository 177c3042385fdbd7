//! Williamson normal form of a correlated two-mode state.
//!
//! `cargo run --example williamson`

use qrev::frame::random_mixed_state;
use qrev::model::CovarianceMatrix;
use rand::SeedableRng;

pub fn run() -> qrev::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let gamma: CovarianceMatrix = random_mixed_state(&mut rng, 2, 1.3, 2.5, 0.5)?;
    let w = gamma.williamson()?;
    println!("Γ =\n{:.4}", gamma.data());
    println!("symplectic eigenvalues: {:?}", w.nu);
    println!("‖SσSᵀ − σ‖/‖σ‖ = {:.2e}", w.symplectic_residual());
    println!("‖SΛSᵀ − Γ‖/‖Γ‖ = {:.2e}", w.reconstruction_residual(gamma.data()));
    let phys = gamma.physicality()?;
    println!("physical: {} (margin {:.4})", phys.physical, phys.margin);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("williamson example");
}
