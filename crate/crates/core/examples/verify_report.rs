//! Run one group of the invariant suite and print the failing checks.
//!
//! `cargo run --example verify_report`

use qrev::cli::verify::{run_verify, Subset, Tolerances};

pub fn run() -> qrev::Result<()> {
    let report = run_verify(1.0, &[Subset::Kkt, Subset::Overlay], &Tolerances::default())?;
    for c in &report.checks {
        println!("{:<26} {:<5} {:.3e} ≤ {:.1e}", c.name, c.passed, c.value, c.threshold);
    }
    let mut strict = Tolerances::default();
    strict.apply_override("duality_gap=1e-20")?;
    let report = run_verify(1.0, &[Subset::Kkt], &strict)?;
    println!("with duality_gap=1e-20: first failure {:?}", report.first_failure);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("verify_report example");
}
