//! Exact one-mode optimum, its generator and the KKT audit.
//!
//! `cargo run --example one_mode_optimum`

use qrev::model::{cp_min_eig, matching_residual, SqueezedThermalParams};
use qrev::one_mode::{kkt_certificate, z_min_exact};

pub fn run() -> qrev::Result<()> {
    let gamma = 1.0;
    for (nu, r) in [(3.0, 0.0), (3.0, 1.0), (1.2, 0.5), (10.0, 1.5)] {
        let p = SqueezedThermalParams::new(nu, r)?;
        let opt = z_min_exact(&p, gamma)?;
        let g = opt.generator()?;
        let cert = kkt_certificate(&opt, &p, gamma);
        println!(
            "ν={nu:<5} r={r:<4} x={:.6} branch={:?} Z_min={:.6}γ  CP min-eig={:+.2e}  matching={:.1e}  KKT ok={} (gap {:.1e})",
            p.x(),
            opt.branch,
            opt.z_min,
            cp_min_eig(&g),
            matching_residual(&g, &p.covariance()),
            cert.passed(),
            cert.duality_gap
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("one_mode_optimum example");
}
