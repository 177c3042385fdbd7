//! Fluctuation entropy rate and its ½ln² divergence.
//!
//! `cargo run --example fluctuation_entropy`

use qrev::asymptotics::{endpoint_fluctuation_rate, fluctuation_divergence_fit, fluctuation_rate, log_grid};

pub fn run() -> qrev::Result<()> {
    let f = fluctuation_rate(3.0, 2.0 / 3.0)?;
    println!("ν=3, Z=2γ/3: ℓ = {:.6} (ln 2 = {:.6}), Ṡ = {:.6}γ", f.ell, 2f64.ln(), f.s_dot);
    for t in [1e-2, 1e-4, 1e-6] {
        let rate = endpoint_fluctuation_rate(1.0, 1.0, t)?;
        println!("t={t:e}: Ṡ·t = {:.5}, ln(1/t) = {:.5}", rate.s_dot * t, (1.0 / t).ln());
    }
    let fit = fluctuation_divergence_fit(1.0, 1.0, &log_grid(1e-6, 1e-3, 4)?, 1.0)?;
    println!("I(ε) ≈ {:.4}·½L² + {:.4}·L + {:.4}", fit.alpha, fit.beta, fit.delta);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("fluctuation_entropy example");
}
