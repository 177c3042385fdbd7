//! Exact, Bayes, isotropic and Petz reverse costs at ν = 3.
//!
//! `cargo run --example protocol_comparison`

use qrev::cli::datasets::{protocol_comparison, Range};

pub fn run() -> qrev::Result<()> {
    let table = protocol_comparison(1.0, 3.0, Range::new(0.0, 1.5, 7)?)?;
    print!("{}", table.to_csv_string());
    println!("threshold r = {:.6}", 0.5 * 3f64.acosh());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("protocol_comparison example");
}
