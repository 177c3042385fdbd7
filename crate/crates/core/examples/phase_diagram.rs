//! Coarse text rendering of the Bayes CP phase diagram.
//!
//! `cargo run --example phase_diagram`

use qrev::model::SqueezedThermalParams;
use qrev::one_mode::{bayes_cp_margin, z_min_exact};

pub fn run() -> qrev::Result<()> {
    // '+' Bayes reverse is CP, '.' it is not, '*' within 2% of ν = cosh 2r
    for i in (0..12).rev() {
        let nu = 1.0 + i as f64;
        let line: String = (0..41)
            .map(|j| {
                let r = 2.0 * j as f64 / 40.0;
                let b = (2.0 * r).cosh();
                if (nu / b - 1.0).abs() < 0.02 {
                    '*'
                } else if bayes_cp_margin(&SqueezedThermalParams { nu, r }, 1.0) >= 0.0 {
                    '+'
                } else {
                    '.'
                }
            })
            .collect();
        println!("ν={nu:>4} {line}");
    }
    println!("        r: 0 → 2");
    let on_curve = SqueezedThermalParams::new(3f64.cosh(), 1.5)?;
    println!("Z_min on the boundary (r = 1.5): {}", z_min_exact(&on_curve, 1.0)?.z_min);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("phase_diagram example");
}
