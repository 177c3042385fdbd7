//! Figure-ready tables. Every function is deterministic in its inputs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::overlay::builtin_points;
use super::table::{Cell, Table};
use crate::asymptotics::pure_endpoint_curve;
use crate::error::{Error, Result};
use crate::frame::{build_moving_frame, multimode_optimum};
use crate::model::{cp_min_eig, CovarianceMatrix, SqueezedThermalParams};
use crate::one_mode::{bayes_cp_margin, bayes_generator, compare_protocols, z_min_exact, Branch, ProtocolCost};

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Range {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || points < 2 {
            return Err(Error::InvalidArgument(format!("range [{lo}, {hi}] with {points} points is empty")));
        }
        Ok(Self { lo, hi, points })
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.points)
    }
}

fn branch_label(b: Branch) -> Cell {
    Cell::Text(
        match b {
            Branch::Below => "below",
            Branch::Boundary => "boundary",
            Branch::Above => "above",
        }
        .to_string(),
    )
}

fn z_or_infeasible(params: &SqueezedThermalParams, gamma: f64) -> Result<Cell> {
    match z_min_exact(params, gamma) {
        Ok(opt) => Ok(Cell::Num(opt.z_min)),
        Err(Error::Divergent(_)) => Ok(Cell::infeasible()),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    /// `r, nu, x, bayes_min_eig, bayes_margin, bayes_cp`.
    pub bayes: Table,
    /// `r, nu, x, z_min, branch`.
    pub z_min: Table,
    /// `r, nu_boundary, z_min` along `ν = cosh 2r`.
    pub boundary: Table,
    pub overlay: Table,
}

pub fn phase_diagram(gamma: f64, r: Range, nu: Range) -> Result<PhaseDiagram> {
    if r.lo < 0.0 || nu.lo < 1.0 {
        return Err(Error::InvalidArgument("phase diagram needs r ≥ 0 and ν ≥ 1".into()));
    }
    let cells: Vec<(f64, f64)> = r.values().into_iter().flat_map(|r| nu.values().into_iter().map(move |n| (r, n))).collect();
    let rows: Vec<(Vec<Cell>, Vec<Cell>)> = cells
        .par_iter()
        .map(|&(r, n)| {
            let p = SqueezedThermalParams::new(n, r)?;
            let min_eig = cp_min_eig(&bayes_generator(&p, gamma)?);
            let margin = bayes_cp_margin(&p, gamma);
            let bayes = vec![r.into(), n.into(), p.x().into(), min_eig.into(), margin.into(), Cell::flag(margin >= 0.0)];
            let z = vec![r.into(), n.into(), p.x().into(), z_or_infeasible(&p, gamma)?, branch_label(Branch::of(p.x()))];
            Ok((bayes, z))
        })
        .collect::<Result<_>>()?;
    let mut bayes = Table::new(["r", "nu", "x", "bayes_min_eig", "bayes_margin", "bayes_cp"]);
    let mut z_min = Table::new(["r", "nu", "x", "z_min", "branch"]);
    for (b, z) in rows {
        bayes.push(b);
        z_min.push(z);
    }
    let mut boundary = Table::new(["r", "nu_boundary", "z_min"]);
    for r in r.values() {
        let nb = (2.0 * r).cosh();
        if nb > nu.hi {
            continue;
        }
        let p = SqueezedThermalParams::new(nb, r)?;
        boundary.push(vec![r.into(), nb.into(), z_or_infeasible(&p, gamma)?]);
    }
    Ok(PhaseDiagram { bayes, z_min, boundary, overlay: overlay_table(gamma)? })
}

/// `label, s_db, a_db, r, nu, x, cosh2r_over_nu, z_min, bayes_margin`.
pub fn overlay_table(gamma: f64) -> Result<Table> {
    let mut t = Table::new(["label", "s_db", "a_db", "r", "nu", "x", "cosh2r_over_nu", "z_min", "bayes_margin"]);
    for p in builtin_points() {
        let params = p.params()?;
        t.push(vec![
            Cell::Text(p.label.clone()),
            p.s_db.into(),
            p.a_db.into(),
            p.r.into(),
            p.nu.into(),
            p.x.into(),
            ((2.0 * p.r).cosh() / p.nu).into(),
            z_or_infeasible(&params, gamma)?,
            bayes_cp_margin(&params, gamma).into(),
        ]);
    }
    Ok(t)
}

fn cost_cell(c: &ProtocolCost) -> Cell {
    Cell::or_infeasible(c.cost())
}

/// Sweep over `r` at fixed `ν`; the threshold `r = arccosh(ν)/2` is always a row.
pub fn protocol_comparison(gamma: f64, nu: f64, r: Range) -> Result<Table> {
    if !(nu > 1.0) {
        return Err(Error::InvalidArgument(format!("comparison needs ν > 1, got {nu}")));
    }
    let mut rs = r.values();
    let threshold = 0.5 * nu.acosh();
    if threshold > r.lo && threshold < r.hi && !rs.contains(&threshold) {
        rs.push(threshold);
        rs.sort_by(f64::total_cmp);
    }
    let mut t = Table::new([
        "r",
        "x",
        "z_exact",
        "z_bayes",
        "z_isotropic",
        "z_petz",
        "bayes_feasible",
        "isotropic_feasible",
    ]);
    for r in rs {
        let p = SqueezedThermalParams::new(nu, r)?;
        let c = compare_protocols(&p, gamma)?;
        t.push(vec![
            r.into(),
            p.x().into(),
            Cell::or_infeasible(Some(c.z_exact)),
            cost_cell(&c.z_bayes),
            cost_cell(&c.z_isotropic),
            Cell::or_infeasible(c.z_petz),
            Cell::flag(c.z_bayes.is_feasible()),
            Cell::flag(c.z_isotropic.is_feasible()),
        ]);
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureEndpointData {
    /// `r, t, z_min, t_z_min, reference_2_over_t`.
    pub curves: Table,
    /// `r, fitted_coefficient, fitted_slope`.
    pub fits: Table,
}

pub fn pure_endpoint(gamma: f64, rs: &[f64], times: &[f64]) -> Result<PureEndpointData> {
    if rs.is_empty() {
        return Err(Error::InvalidArgument("no squeezing values given".into()));
    }
    let mut curves = Table::new(["r", "t", "z_min", "t_z_min", "reference_2_over_t"]);
    let mut fits = Table::new(["r", "fitted_coefficient", "fitted_slope"]);
    for &r in rs {
        let curve = pure_endpoint_curve(r, gamma, times)?;
        for s in &curve.samples {
            curves.push(vec![r.into(), s.t.into(), s.z_min.into(), s.t_z.into(), (2.0 / s.t).into()]);
        }
        fits.push(vec![r.into(), curve.fitted_coefficient.into(), curve.fitted_slope.into()]);
    }
    Ok(PureEndpointData { curves, fits })
}

/// `t, total, additive_formula, lab_cost, cp_margin, matching_residual`, then
/// `nu_k, x_star_k, cost_k` for every tracked mode `k`.
pub fn multimode_sweep(state: &CovarianceMatrix, gamma: f64, times: &[f64]) -> Result<Table> {
    let frame = build_moving_frame(state, gamma, times)?;
    let n = frame.n_modes();
    let mut cols: Vec<String> =
        ["t", "total", "additive_formula", "lab_cost", "cp_margin", "matching_residual"].iter().map(|s| s.to_string()).collect();
    for k in 0..n {
        cols.extend([format!("nu_{k}"), format!("x_star_{k}"), format!("cost_{k}")]);
    }
    let mut table = Table::new(cols);
    let rows: Vec<Vec<Cell>> = (0..frame.len())
        .into_par_iter()
        .map(|i| {
            let opt = multimode_optimum(&frame, i)?;
            let inst = frame.instant(i);
            let mut row: Vec<Cell> = vec![
                opt.t.into(),
                opt.total.into(),
                opt.additive_formula.into(),
                opt.lab_cost.into(),
                opt.cp_margin.into(),
                opt.matching_residual.into(),
            ];
            for k in 0..n {
                row.extend([inst.nu[k].into(), inst.x_star[k].into(), opt.per_mode_costs[k].into()]);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    for row in rows {
        table.push(row);
    }
    Ok(table)
}
