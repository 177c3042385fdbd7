//! Brute-force SDP oracles against the closed form.
//!
//! `cargo run --example sdp_oracle`

use qrev::model::SqueezedThermalParams;
use qrev::one_mode::z_min_exact;
use qrev::sdp_oracle::{solve_primal_bisection, solve_primal_grid, verify_dual, SdpInstance};

pub fn run() -> qrev::Result<()> {
    let gamma = 1.0;
    println!("{:>5} {:>5} {:>12} {:>12} {:>12} {:>10}", "ν", "r", "exact", "grid", "bisection", "dual ok");
    for (nu, r) in [(3.0, 1.0), (1.5, 0.2), (6.0, 2.0), (1.05, 0.8)] {
        let p = SqueezedThermalParams::new(nu, r)?;
        let inst = SdpInstance::from_params(&p, gamma)?;
        let exact = z_min_exact(&p, gamma)?;
        let grid = solve_primal_grid(&inst, 128, 60)?;
        let bis = solve_primal_bisection(&inst, 1e-10)?;
        let dual = verify_dual(&inst, &exact.dual_witness);
        println!("{nu:>5} {r:>5} {:>12.8} {:>12.8} {:>12.8} {:>10}", exact.z_min, grid.z_opt, bis.z_opt, dual.feasible);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("sdp_oracle example");
}
