//! Moving Williamson frame through a symplectic-eigenvalue crossing.
//!
//! `cargo run --example multimode_crossing`

use qrev::frame::{build_moving_frame, crossing_fixture, multimode_optimum, uniform_times};

pub fn run() -> qrev::Result<()> {
    let fx = crossing_fixture(1.0)?;
    println!("crossing at t_c = {:.10}", fx.t_cross);
    let times = uniform_times(fx.t_cross - 0.1, fx.t_cross + 0.1, 9);
    let frame = build_moving_frame(&fx.state(), 1.0, &times)?;
    println!("{:>9} {:>9} {:>9} {:>11} {:>11} {:>10}", "t", "ν_0", "ν_1", "total", "additive", "matching");
    for i in 0..frame.len() {
        let inst = frame.instant(i);
        let opt = multimode_optimum(&frame, i)?;
        println!(
            "{:>9.5} {:>9.5} {:>9.5} {:>11.7} {:>11.7} {:>10.1e}",
            inst.t, inst.nu[0], inst.nu[1], opt.total, opt.additive_formula, opt.matching_residual
        );
    }
    println!("max ‖ΔS‖/Δt = {:.4}", frame.max_jump_rate());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("multimode_crossing example");
}
