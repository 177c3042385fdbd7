//! Invariant suite behind `qrev verify`.
//!
//! Checks run in a fixed order on fixed seeds, so the JSON report is
//! byte-identical across runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::overlay::builtin_points;
use crate::asymptotics::{default_time_grid, fluctuation_divergence_fit, log_grid, pure_endpoint_curve};
use crate::error::{Error, Result};
use crate::frame::{build_moving_frame, crossing_fixture, multimode_optimum, random_mixed_state, uniform_times};
use crate::model::{cp_matrix, SqueezedThermalParams};
use crate::one_mode::{bayes_cp_margin, bayes_cp_spectrum, bayes_generator, kkt_certificate, petz_cost, petz_gap_formula, z_min_exact};
use crate::sdp_oracle::{solve_primal_bisection, solve_primal_grid, verify_dual, SdpInstance};
use crate::symplectic::min_eig_hermitian;
use crate::C64;

/// Seed shared by every randomized check.
pub const SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub bayes_spectrum: f64,
    pub oracle_abs: f64,
    pub oracle_rel: f64,
    pub duality_gap: f64,
    pub slackness: f64,
    pub dual_residual: f64,
    pub petz_gap: f64,
    pub petz_thermal: f64,
    pub branch_ratio: f64,
    pub thermal_identity: f64,
    pub multimode_rel: f64,
    pub cp_margin: f64,
    pub matching: f64,
    pub jump_factor: f64,
    pub crossing_cost: f64,
    pub endpoint_coefficient: f64,
    pub fluctuation_slope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            bayes_spectrum: 1e-10,
            oracle_abs: 1e-4,
            oracle_rel: 1e-3,
            duality_gap: 1e-10,
            slackness: 1e-8,
            dual_residual: 1e-10,
            petz_gap: 1e-10,
            petz_thermal: 1e-12,
            branch_ratio: 1e-6,
            thermal_identity: 1e-12,
            multimode_rel: 1e-9,
            cp_margin: 1e-8,
            matching: 1e-7,
            jump_factor: 10.0,
            crossing_cost: 1e-6,
            endpoint_coefficient: 0.01,
            fluctuation_slope: 0.1,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 17] = [
        "bayes_spectrum",
        "oracle_abs",
        "oracle_rel",
        "duality_gap",
        "slackness",
        "dual_residual",
        "petz_gap",
        "petz_thermal",
        "branch_ratio",
        "thermal_identity",
        "multimode_rel",
        "cp_margin",
        "matching",
        "jump_factor",
        "crossing_cost",
        "endpoint_coefficient",
        "fluctuation_slope",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "bayes_spectrum" => &mut self.bayes_spectrum,
            "oracle_abs" => &mut self.oracle_abs,
            "oracle_rel" => &mut self.oracle_rel,
            "duality_gap" => &mut self.duality_gap,
            "slackness" => &mut self.slackness,
            "dual_residual" => &mut self.dual_residual,
            "petz_gap" => &mut self.petz_gap,
            "petz_thermal" => &mut self.petz_thermal,
            "branch_ratio" => &mut self.branch_ratio,
            "thermal_identity" => &mut self.thermal_identity,
            "multimode_rel" => &mut self.multimode_rel,
            "cp_margin" => &mut self.cp_margin,
            "matching" => &mut self.matching,
            "jump_factor" => &mut self.jump_factor,
            "crossing_cost" => &mut self.crossing_cost,
            "endpoint_coefficient" => &mut self.endpoint_coefficient,
            "fluctuation_slope" => &mut self.fluctuation_slope,
            _ => return None,
        })
    }

    /// Applies `name=value`.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (name, value) =
            spec.split_once('=').ok_or_else(|| Error::InvalidArgument(format!("tolerance override {spec:?} is not name=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| *v >= 0.0 && v.is_finite())
            .ok_or_else(|| Error::InvalidArgument(format!("tolerance {name}: {value:?} is not a non-negative number")))?;
        let slot = self.slot(name.trim()).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown tolerance {name:?}; known: {}", Self::NAMES.join(", ")))
        })?;
        *slot = value;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subset {
    OneMode,
    Oracle,
    Kkt,
    Multimode,
    Asymptotics,
    Overlay,
}

impl Subset {
    pub const ALL: [Subset; 6] =
        [Subset::OneMode, Subset::Oracle, Subset::Kkt, Subset::Multimode, Subset::Asymptotics, Subset::Overlay];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub subset: Subset,
    pub passed: bool,
    /// Worst observed value; the check passes iff `value ≤ threshold`.
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub format_version: u32,
    pub gamma: f64,
    pub seed: u64,
    pub subsets: Vec<Subset>,
    pub tolerances: Tolerances,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
    pub first_failure: Option<String>,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

fn check(name: &str, subset: Subset, value: f64, threshold: f64, detail: String) -> CheckResult {
    CheckResult { name: name.into(), subset, passed: value <= threshold, value, threshold, detail }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

pub fn run_verify(gamma: f64, subsets: &[Subset], tol: &Tolerances) -> Result<VerifyReport> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("loss rate must be positive, got {gamma}")));
    }
    let selected: Vec<Subset> = if subsets.is_empty() { Subset::ALL.to_vec() } else { Subset::ALL.iter().copied().filter(|s| subsets.contains(s)).collect() };
    let mut checks = Vec::new();
    for &s in &selected {
        match s {
            Subset::OneMode => checks.extend(one_mode_checks(gamma, tol)?),
            Subset::Oracle => checks.extend(oracle_checks(gamma, tol)?),
            Subset::Kkt => checks.extend(kkt_checks(gamma, tol)?),
            Subset::Multimode => checks.extend(multimode_checks(gamma, tol)?),
            Subset::Asymptotics => checks.extend(asymptotic_checks(gamma, tol)?),
            Subset::Overlay => checks.extend(overlay_checks(gamma)?),
        }
    }
    let first_failure = checks.iter().find(|c| !c.passed).map(|c| c.name.clone());
    Ok(VerifyReport {
        format_version: 1,
        gamma,
        seed: SEED,
        subsets: selected,
        tolerances: *tol,
        passed: first_failure.is_none(),
        first_failure,
        checks,
    })
}

fn one_mode_checks(gamma: f64, tol: &Tolerances) -> Result<Vec<CheckResult>> {
    let n = 60;
    let cells: Vec<(f64, f64)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (2.0 * i as f64 / (n - 1) as f64, 1.0 + 11.0 * j as f64 / (n - 1) as f64))).collect();
    let dr = 2.0 / (n - 1) as f64;
    let u = nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]).unscale(2f64.sqrt());
    let per_cell: Vec<(f64, f64, bool)> = cells
        .par_iter()
        .map(|&(r, nu)| {
            let p = SqueezedThermalParams::new(nu, r)?;
            let g = bayes_generator(&p, gamma)?;
            let m = cp_matrix(&g);
            let numeric = min_eig_hermitian(&m)?;
            let (lo, hi) = bayes_cp_spectrum(&p, gamma);
            let rayleigh = (u.adjoint() * &m * &u)[(0, 0)].re;
            // a sign mismatch is allowed only within one cell of ν = cosh 2r
            let r_star = 0.5 * nu.acosh();
            let sign_ok = (numeric >= 0.0) == (nu >= (2.0 * r).cosh()) || (r - r_star).abs() <= dr;
            Ok(((numeric - lo.min(hi)).abs(), (rayleigh - bayes_cp_margin(&p, gamma)).abs(), sign_ok))
        })
        .collect::<Result<_>>()?;
    let spectrum_err = max_of(per_cell.iter().map(|c| c.0));
    let margin_err = max_of(per_cell.iter().map(|c| c.1));
    let sign_bad = per_cell.iter().filter(|c| !c.2).count();

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let points: Vec<(f64, f64)> = (0..200).map(|_| (rng.gen_range(0.0..2.0), rng.gen_range(1.05..12.0))).collect();
    let petz_err = max_of(
        points
            .iter()
            .map(|&(r, nu)| {
                let p = SqueezedThermalParams::new(nu, r)?;
                let gap = petz_cost(&p, gamma)?.z_petz - z_min_exact(&p, gamma)?.z_min;
                Ok((gap - petz_gap_formula(&p, gamma)).abs())
            })
            .collect::<Result<Vec<_>>>()?,
    );
    let petz_thermal = max_of(
        [1.05, 2.0, 3.0, 12.0]
            .iter()
            .map(|&nu| {
                let p = SqueezedThermalParams::new(nu, 0.0)?;
                Ok((petz_cost(&p, gamma)?.z_petz - z_min_exact(&p, gamma)?.z_min).abs())
            })
            .collect::<Result<Vec<_>>>()?,
    );
    let delta = 1e-3;
    let ratio_err = max_of(
        [1.5, 3.0, 10.0]
            .iter()
            .map(|&nu: &f64| {
                let above = SqueezedThermalParams::new(nu, 0.5 * (nu * (1.0 + delta)).acosh())?;
                let below = SqueezedThermalParams::new(nu, 0.5 * (nu * (1.0 - delta)).acosh())?;
                let ratio = z_min_exact(&above, gamma)?.z_min / z_min_exact(&below, gamma)?.z_min;
                Ok((ratio / ((nu + 1.0) / (nu - 1.0)) - 1.0).abs())
            })
            .collect::<Result<Vec<_>>>()?,
    );
    let thermal_err = max_of(
        [50.0, 100.0, 1e3, 1e4]
            .iter()
            .map(|&nu: &f64| {
                let z = z_min_exact(&SqueezedThermalParams::new(nu, 0.0)?, gamma)?.z_min;
                Ok((z * nu / (4.0 * gamma) - (nu - 1.0) / (nu + 1.0)).abs())
            })
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(vec![
        check("bayes-spectrum", Subset::OneMode, spectrum_err, tol.bayes_spectrum * gamma, format!("{n}x{n} grid, min-eig vs min(4γ(1−x), 4γx)")),
        check("bayes-margin", Subset::OneMode, margin_err, tol.bayes_spectrum * gamma, "u†Mu vs 4γ(1−x)".into()),
        check("bayes-threshold", Subset::OneMode, sign_bad as f64, 0.0, "CP sign mismatches away from ν = cosh 2r".into()),
        check("petz-gap", Subset::OneMode, petz_err, tol.petz_gap * gamma, "200 random points, ν ∈ [1.05, 12)".into()),
        check("petz-thermal", Subset::OneMode, petz_thermal, tol.petz_thermal, "r = 0".into()),
        check("branch-ratio", Subset::OneMode, ratio_err, tol.branch_ratio, "x = 1 ± 1e-3, ν ∈ {1.5, 3, 10}".into()),
        check("thermal-limit", Subset::OneMode, thermal_err, tol.thermal_identity, "νZ/(4γ) = (ν−1)/(ν+1) at r = 0".into()),
    ])
}

fn oracle_checks(gamma: f64, tol: &Tolerances) -> Result<Vec<CheckResult>> {
    let n = 6;
    let cells: Vec<(f64, f64)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (2.0 * i as f64 / (n - 1) as f64, 1.05 + 10.95 * j as f64 / (n - 1) as f64))).collect();
    let rows: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|&(r, nu)| {
            let p = SqueezedThermalParams::new(nu, r)?;
            let exact = z_min_exact(&p, gamma)?.z_min;
            let inst = SdpInstance::from_params(&p, gamma)?;
            let grid = solve_primal_grid(&inst, 128, 60)?.z_opt;
            let bis = solve_primal_bisection(&inst, 1e-10 * gamma)?.z_opt;
            let bound = (tol.oracle_abs * gamma).max(tol.oracle_rel * exact);
            Ok(((grid - exact).abs().max((bis - exact).abs()) / bound, (grid - bis).abs() / bound))
        })
        .collect::<Result<_>>()?;
    Ok(vec![
        check("oracle-equivalence", Subset::Oracle, max_of(rows.iter().map(|r| r.0)), 1.0, format!("{n}x{n} grid; worst error in units of max(abs, rel·Z)")),
        check("oracle-agreement", Subset::Oracle, max_of(rows.iter().map(|r| r.1)), 1.0, "grid vs bisection".into()),
    ])
}

fn kkt_checks(gamma: f64, tol: &Tolerances) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x4b4b);
    let points: Vec<(f64, f64)> = (0..100).map(|_| (rng.gen_range(0.0..2.0), rng.gen_range(1.05..12.0))).collect();
    let rows: Vec<[f64; 3]> = points
        .iter()
        .map(|&(r, nu)| {
            let p = SqueezedThermalParams::new(nu, r)?;
            let opt = z_min_exact(&p, gamma)?;
            let cert = kkt_certificate(&opt, &p, gamma);
            let dual = verify_dual(&SdpInstance::from_params(&p, gamma)?, &opt.dual_witness);
            let dual_res = max_of(dual.trace_residuals.iter().map(|v| v.abs()).chain([-dual.min_eig]));
            Ok([cert.duality_gap, cert.slackness, dual_res])
        })
        .collect::<Result<_>>()?;
    Ok(vec![
        check("duality-gap", Subset::Kkt, max_of(rows.iter().map(|r| r[0])), tol.duality_gap * gamma, "100 random points".into()),
        check("complementary-slackness", Subset::Kkt, max_of(rows.iter().map(|r| r[1])), tol.slackness, "‖M(D_opt)Y★‖_F".into()),
        check("dual-feasibility", Subset::Kkt, max_of(rows.iter().map(|r| r[2])), tol.dual_residual, "independent dual checker".into()),
    ])
}

fn multimode_checks(gamma: f64, tol: &Tolerances) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x6d6d);
    let states: Vec<_> = (0..4).map(|k| random_mixed_state(&mut rng, 2 + k % 2, 1.2, 4.0, 0.4)).collect::<Result<_>>()?;
    let times = uniform_times(0.05 / gamma, 2.0 / gamma, 12);
    let mut rel: f64 = 0.0;
    let mut cp: f64 = 0.0;
    let mut matching: f64 = 0.0;
    for s in &states {
        let frame = build_moving_frame(s, gamma, &times)?;
        for i in 0..frame.len() {
            let opt = multimode_optimum(&frame, i)?;
            let scale = opt.additive_formula.abs().max(gamma);
            rel = rel.max((opt.total - opt.additive_formula).abs() / scale).max((opt.lab_cost - opt.total).abs() / scale);
            cp = cp.max(-opt.cp_margin);
            matching = matching.max(opt.matching_residual);
        }
    }
    let fx = crossing_fixture(gamma)?;
    let dt = 0.01 / gamma;
    let window = uniform_times(fx.t_cross - 30.0 * dt, fx.t_cross + 30.0 * dt, 61);
    let frame = build_moving_frame(&fx.state(), gamma, &window)?;
    let jump = max_of((0..frame.len() - 1).map(|i| frame.jump(i)));
    let pair = build_moving_frame(&fx.state(), gamma, &[fx.t_cross - 1e-7 / gamma, fx.t_cross + 1e-7 / gamma])?;
    let (l, r) = (multimode_optimum(&pair, 0)?, multimode_optimum(&pair, 1)?);
    Ok(vec![
        check("multimode-attainment", Subset::Multimode, rel, tol.multimode_rel, "4 random states, N ∈ {2, 3}, t ∈ [0.05, 2]/γ".into()),
        check("multimode-cp", Subset::Multimode, cp, tol.cp_margin * gamma, "−λ_min of the lab CP matrix".into()),
        check("multimode-matching", Subset::Multimode, matching, tol.matching, "lab matching residual".into()),
        check("crossing-frame-jump", Subset::Multimode, jump, tol.jump_factor * dt, format!("Δt = {dt:e}, t_c = {:.12}", fx.t_cross)),
        check("crossing-cost-continuity", Subset::Multimode, (l.total - r.total).abs(), tol.crossing_cost * gamma, "t_c ± 1e-7/γ".into()),
    ])
}

fn asymptotic_checks(gamma: f64, tol: &Tolerances) -> Result<Vec<CheckResult>> {
    let grid = default_time_grid(gamma)?;
    let coef = max_of(
        [0.5, 1.0, 1.5]
            .iter()
            .map(|&r| Ok((pure_endpoint_curve(r, gamma, &grid)?.fitted_coefficient - 2.0).abs()))
            .collect::<Result<Vec<_>>>()?,
    );
    let eps = log_grid(1e-6 / gamma, 1e-3 / gamma, 2)?;
    let slope = max_of(
        [0.5, 1.0, 1.5]
            .iter()
            .map(|&r| Ok((fluctuation_divergence_fit(r, gamma, &eps, 1.0 / gamma)?.alpha - 1.0).abs()))
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(vec![
        check("endpoint-coefficient", Subset::Asymptotics, coef, tol.endpoint_coefficient, "|c₀ − 2|, r ∈ {0.5, 1, 1.5}".into()),
        check("fluctuation-slope", Subset::Asymptotics, slope, tol.fluctuation_slope, "|α − 1| in I = α·½L² + βL + δ".into()),
    ])
}

fn overlay_checks(gamma: f64) -> Result<Vec<CheckResult>> {
    let pts = builtin_points();
    let outside = pts.iter().filter(|p| !p.in_nonclassical_sector()).count();
    let worst_margin = max_of(pts.iter().map(|p| Ok(bayes_cp_margin(&p.params()?, gamma))).collect::<Result<Vec<_>>>()?.into_iter().map(|m| m.max(0.0)));
    Ok(vec![
        check("overlay-sector", Subset::Overlay, outside as f64, 0.0, format!("{} built-in points with ν < cosh 2r", pts.len())),
        check("overlay-bayes-infeasible", Subset::Overlay, worst_margin, 0.0, "positive Bayes margins".into()),
    ])
}
