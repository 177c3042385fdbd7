//! The 2/t law near a pure squeezed endpoint and the integrated action.
//!
//! `cargo run --example pure_endpoint`

use qrev::asymptotics::{endpoint_action, log_grid, pure_endpoint_curve};

pub fn run() -> qrev::Result<()> {
    let grid = log_grid(1e-7, 1e-1, 1)?;
    for r in [0.5, 1.0, 1.5] {
        let curve = pure_endpoint_curve(r, 1.0, &grid)?;
        let tz: Vec<String> = curve.samples.iter().map(|s| format!("{:.5}", s.t_z)).collect();
        println!("r={r}: t·Z at t=1e-7..1e-1: [{}], fitted c₀ = {:.8}", tz.join(", "), curve.fitted_coefficient);
    }
    for eps in [1e-2, 1e-4, 1e-6] {
        let a = endpoint_action(1.0, 1.0, eps, 1.0)?;
        println!("ε={eps:e}: ∫Z dt = {a:.5}, minus 2ln(1/ε) = {:.5}", a - 2.0 * (1.0 / eps).ln());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("pure_endpoint example");
}
