//! Brute-force solvers for the one-mode reverse SDP.
//!
//! The primal problem is: minimise `a/v_q + b/v_p` over real `(a, b, c)` with
//!
//! ```text
//! M(a, b, c) = A₀ + aA₁ + bA₂ + cA₃ = [[a, c + iτ], [c − iτ, b]] ⪰ 0,
//! τ = 2γ(1 − x) − (a/v_q + b/v_p)/2.
//! ```
//!
//! `c` only lowers `det M = ab − c² − τ²` and leaves `τ` alone, so both solvers
//! search on `c = 0`. Nothing here uses the closed-form solution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SqueezedThermalParams;
use crate::symplectic::{hermitian_deviation, min_eig_unchecked};
use crate::tolerance::TOL_ORACLE;
use crate::{CMat, C64};

const C_ZERO_NOTE: &str = "c = 0: c enters only through det M = ab - c^2 - tau^2 and tau does not depend on c";
const MAX_GROWTH: u32 = 1 << 10;

/// Hermitian `[[a, z], [z̄, b]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Herm2 {
    pub a: f64,
    pub b: f64,
    pub z: C64,
}

impl Herm2 {
    pub fn min_eig(&self) -> f64 {
        let mean = 0.5 * (self.a + self.b);
        let half = 0.5 * (self.a - self.b);
        mean - half.hypot(self.z.norm())
    }

    pub fn to_matrix(&self) -> CMat {
        CMat::from_row_slice(2, 2, &[C64::new(self.a, 0.0), self.z, self.z.conj(), C64::new(self.b, 0.0)])
    }
}

/// Data of one primal SDP: target variances and the loss rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpInstance {
    pub v_q: f64,
    pub v_p: f64,
    pub gamma: f64,
}

impl SdpInstance {
    pub fn new(v_q: f64, v_p: f64, gamma: f64) -> Result<Self> {
        if !(v_q > 0.0 && v_p > 0.0 && v_q.is_finite() && v_p.is_finite()) {
            return Err(Error::Unphysical(format!("variances must be positive, got ({v_q}, {v_p})")));
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("loss rate must be positive, got {gamma}")));
        }
        Ok(Self { v_q, v_p, gamma })
    }

    pub fn from_params(params: &SqueezedThermalParams, gamma: f64) -> Result<Self> {
        Self::new(params.v_q(), params.v_p(), gamma)
    }

    /// `Tr(Γ₀⁻¹)/2`.
    pub fn x(&self) -> f64 {
        0.5 * (1.0 / self.v_q + 1.0 / self.v_p)
    }

    pub fn nu(&self) -> f64 {
        (self.v_q * self.v_p).sqrt()
    }

    /// `A₀, A₁, A₂, A₃`.
    pub fn constraint_matrices(&self) -> [CMat; 4] {
        let i = C64::new(0.0, 1.0);
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let t0 = 2.0 * self.gamma * (1.0 - self.x());
        let hq = 0.5 / self.v_q;
        let hp = 0.5 / self.v_p;
        [
            CMat::from_row_slice(2, 2, &[zero, i * t0, -i * t0, zero]),
            CMat::from_row_slice(2, 2, &[one, -i * hq, i * hq, zero]),
            CMat::from_row_slice(2, 2, &[zero, -i * hp, i * hp, one]),
            CMat::from_row_slice(2, 2, &[zero, one, one, zero]),
        ]
    }

    pub fn objective(&self, a: f64, b: f64) -> f64 {
        a / self.v_q + b / self.v_p
    }

    pub fn tau(&self, a: f64, b: f64) -> f64 {
        2.0 * self.gamma * (1.0 - self.x()) - 0.5 * self.objective(a, b)
    }

    pub fn constraint(&self, a: f64, b: f64, c: f64) -> Herm2 {
        Herm2 { a, b, z: C64::new(c, self.tau(a, b)) }
    }

    /// Initial half-width of the search box, in units of the objective.
    fn box_scale(&self) -> f64 {
        8.0 * self.gamma * self.x().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Grid,
    Bisection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub z_opt: f64,
    /// `(a, b, c)`.
    pub argmin: (f64, f64, f64),
    pub method: OracleMethod,
    /// `λ_min(M(argmin))`.
    pub feasibility_margin: f64,
    pub notes: Vec<String>,
}

impl OracleResult {
    fn at(inst: &SdpInstance, a: f64, b: f64, method: OracleMethod, notes: Vec<String>) -> Self {
        OracleResult {
            z_opt: inst.objective(a, b),
            argmin: (a, b, 0.0),
            method,
            feasibility_margin: inst.constraint(a, b, 0.0).min_eig(),
            notes,
        }
    }

    /// `|a/v_q − b/v_p|`.
    pub fn alignment_residual(&self, inst: &SdpInstance) -> f64 {
        (self.argmin.0 / inst.v_q - self.argmin.1 / inst.v_p).abs()
    }
}

/// Point on the level `a/v_q + b/v_p = z` at position `θ ∈ [0, 1]`.
fn on_level(inst: &SdpInstance, z: f64, theta: f64) -> (f64, f64) {
    (z * theta * inst.v_q, z * (1.0 - theta) * inst.v_p)
}

/// Maximises the concave `θ ↦ λ_min(M)` along one level.
fn best_on_level(inst: &SdpInstance, z: f64) -> (f64, f64) {
    let eval = |theta: f64| {
        let (a, b) = on_level(inst, z, theta);
        inst.constraint(a, b, 0.0).min_eig()
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut m1 = hi - inv_phi * (hi - lo);
    let mut m2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (eval(m1), eval(m2));
    for _ in 0..90 {
        if f1 < f2 {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + inv_phi * (hi - lo);
            f2 = eval(m2);
        } else {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - inv_phi * (hi - lo);
            f1 = eval(m1);
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let theta = 0.5 * (lo + hi);
    (theta, eval(theta))
}

/// Exhaustive grid over `(a/v_q, b/v_p) ∈ [0, A]²` with `c = 0`, then
/// `refinement_rounds` rounds of level bisection.
///
/// Each round maximises `λ_min` along the current trial level (golden
/// section in `θ`) and halves the bracket on the level value. The box grows
/// fourfold, at most to `2¹⁰ A`, until a feasible grid point appears.
pub fn solve_primal_grid(inst: &SdpInstance, grid_resolution: usize, refinement_rounds: usize) -> Result<OracleResult> {
    if grid_resolution < 64 {
        return Err(Error::InvalidArgument(format!("grid resolution {grid_resolution} < 64")));
    }
    let n = grid_resolution;
    let mut scale = inst.box_scale();
    let mut growth = 1u32;
    let mut notes = vec![C_ZERO_NOTE.to_string()];
    let (a0, b0) = loop {
        let h = scale / (n - 1) as f64;
        let best = (0..n)
            .into_par_iter()
            .filter_map(|i| {
                let a = i as f64 * h * inst.v_q;
                (0..n)
                    .filter_map(|j| {
                        let b = j as f64 * h * inst.v_p;
                        (inst.constraint(a, b, 0.0).min_eig() >= -TOL_ORACLE).then(|| (inst.objective(a, b), a, b))
                    })
                    .min_by(|p, q| p.partial_cmp(q).unwrap())
            })
            .min_by(|p, q| p.partial_cmp(q).unwrap());
        if let Some((_, a, b)) = best {
            break (a, b);
        }
        if growth >= MAX_GROWTH {
            return Err(Error::OracleInfeasible(format!(
                "no feasible grid point at resolution {n} within objective {scale:.3e}"
            )));
        }
        growth *= 4;
        scale *= 4.0;
        notes.push(format!("search box grown to {growth}x"));
    };

    let mut hi = inst.objective(a0, b0);
    let mut best = (a0, b0);
    let mut lo = 0.0;
    let (theta0, m0) = best_on_level(inst, 0.0);
    if m0 >= -TOL_ORACLE {
        let (a, b) = on_level(inst, 0.0, theta0);
        return Ok(OracleResult::at(inst, a, b, OracleMethod::Grid, notes));
    }
    for _ in 0..refinement_rounds {
        let mid = 0.5 * (lo + hi);
        let (theta, margin) = best_on_level(inst, mid);
        if margin >= -TOL_ORACLE {
            hi = mid;
            best = on_level(inst, mid, theta);
        } else {
            lo = mid;
        }
    }
    if refinement_rounds > 0 {
        // realign the final point on the accepted level
        let (theta, margin) = best_on_level(inst, hi);
        if margin >= -TOL_ORACLE {
            best = on_level(inst, hi, theta);
        }
    }
    Ok(OracleResult::at(inst, best.0, best.1, OracleMethod::Grid, notes))
}

const SEGMENT_SAMPLES: usize = 1025;

/// Largest `ab` on `{a/v_q + b/v_p = z, a, b ≥ 0}`: dense sampling, then
/// ternary search around the best sample.
fn max_product_on_level(inst: &SdpInstance, z: f64) -> (f64, f64, f64) {
    let prod = |theta: f64| {
        let (a, b) = on_level(inst, z, theta);
        a * b
    };
    let step = 1.0 / (SEGMENT_SAMPLES - 1) as f64;
    let k = (0..SEGMENT_SAMPLES)
        .max_by(|&i, &j| prod(i as f64 * step).partial_cmp(&prod(j as f64 * step)).unwrap().then(j.cmp(&i)))
        .unwrap_or(0);
    let mut lo = (k as f64 - 1.0).max(0.0) * step;
    let mut hi = (k as f64 + 1.0).min((SEGMENT_SAMPLES - 1) as f64) * step;
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if prod(m1) < prod(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let theta = 0.5 * (lo + hi);
    let (a, b) = on_level(inst, z, theta);
    (a * b, a, b)
}

fn level_feasible(inst: &SdpInstance, z: f64) -> Option<(f64, f64)> {
    let (ab, a, b) = max_product_on_level(inst, z);
    let tau = 2.0 * inst.gamma * (1.0 - inst.x()) - 0.5 * z;
    (ab - tau * tau >= -TOL_ORACLE * inst.gamma * inst.gamma).then_some((a, b))
}

/// Bisection on the objective level with a level-set feasibility test
/// `max ab ≥ τ(Z)²`, stopping once the bracket is narrower than `tol`.
pub fn solve_primal_bisection(inst: &SdpInstance, tol: f64) -> Result<OracleResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut notes = vec![C_ZERO_NOTE.to_string()];
    if let Some((a, b)) = level_feasible(inst, 0.0) {
        return Ok(OracleResult::at(inst, a, b, OracleMethod::Bisection, notes));
    }
    let mut hi = inst.box_scale();
    let mut doublings = 0u32;
    let mut best = loop {
        if let Some(ab) = level_feasible(inst, hi) {
            break ab;
        }
        doublings += 1;
        if doublings > 10 {
            return Err(Error::OracleInfeasible(format!("no feasible level up to {hi:.3e}")));
        }
        hi *= 2.0;
    };
    if doublings > 0 {
        notes.push(format!("upper bracket doubled {doublings} times"));
    }
    let mut lo = 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match level_feasible(inst, mid) {
            Some(ab) => {
                hi = mid;
                best = ab;
            }
            None => lo = mid,
        }
    }
    Ok(OracleResult::at(inst, best.0, best.1, OracleMethod::Bisection, notes))
}

/// One dual constraint that failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualViolation {
    pub constraint: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    pub min_eig: f64,
    /// `Tr(A₁Y) − 1/v_q`, `Tr(A₂Y) − 1/v_p`, `Tr(A₃Y)`.
    pub trace_residuals: [f64; 3],
    /// `−Tr(A₀Y)`, a lower bound on the primal optimum when feasible.
    pub value: f64,
    pub feasible: bool,
    pub violations: Vec<DualViolation>,
}

/// Checks `Y ⪰ 0` and the three trace constraints with tolerance `1e−10`.
pub fn verify_dual(inst: &SdpInstance, y: &CMat) -> DualReport {
    verify_dual_with(inst, y, 1e-10)
}

pub fn verify_dual_with(inst: &SdpInstance, y: &CMat, tol: f64) -> DualReport {
    let mut violations = Vec::new();
    if y.shape() != (2, 2) {
        violations.push(DualViolation { constraint: "shape".into(), residual: f64::INFINITY });
        return DualReport {
            min_eig: f64::NAN,
            trace_residuals: [f64::NAN; 3],
            value: f64::NAN,
            feasible: false,
            violations,
        };
    }
    let herm = hermitian_deviation(y);
    if herm > tol {
        violations.push(DualViolation { constraint: "hermiticity".into(), residual: herm });
    }
    let [a0, a1, a2, a3] = inst.constraint_matrices();
    let tr = |a: &CMat| (a * y).trace();
    let min_eig = min_eig_unchecked(y);
    let t1 = tr(&a1);
    let t2 = tr(&a2);
    let t3 = tr(&a3);
    let trace_residuals = [t1.re - 1.0 / inst.v_q, t2.re - 1.0 / inst.v_p, t3.re];
    if min_eig < -tol {
        violations.push(DualViolation { constraint: "psd".into(), residual: min_eig });
    }
    for (k, (r, im)) in trace_residuals.iter().zip([t1.im, t2.im, t3.im]).enumerate() {
        let res = r.hypot(im);
        if res > tol {
            violations.push(DualViolation { constraint: format!("trace_a{}", k + 1), residual: res });
        }
    }
    DualReport { min_eig, trace_residuals, value: -tr(&a0).re, feasible: violations.is_empty(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(nu: f64, r: f64) -> SdpInstance {
        SdpInstance::new(nu * (2.0 * r).exp(), nu * (-2.0 * r).exp(), 1.0).unwrap()
    }

    #[test]
    fn herm2_min_eig_matches_dense_solver() {
        let h = Herm2 { a: 3.0, b: -1.0, z: C64::new(0.5, -2.0) };
        assert!((h.min_eig() - min_eig_unchecked(&h.to_matrix())).abs() < 1e-14);
    }

    #[test]
    fn affine_form_reproduces_direct_constraint() {
        let s = inst(3.0, 0.7);
        let [a0, a1, a2, a3] = s.constraint_matrices();
        let (a, b, c) = (2.5, 0.3, -0.2);
        let m = &a0 + &a1 * C64::new(a, 0.0) + &a2 * C64::new(b, 0.0) + &a3 * C64::new(c, 0.0);
        assert!((m - s.constraint(a, b, c).to_matrix()).norm() < 1e-14);
        for a in [&a1, &a2, &a3] {
            assert_eq!(hermitian_deviation(a), 0.0);
        }
        assert_eq!(hermitian_deviation(&a0), 0.0);
        assert!((s.nu() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn grid_oracle_examples() {
        let thermal = solve_primal_grid(&inst(3.0, 0.0), 128, 60).unwrap();
        assert!((thermal.z_opt - 2.0 / 3.0).abs() < 1e-4);
        assert!(thermal.feasibility_margin >= -TOL_ORACLE);
        assert!(thermal.notes[0].starts_with("c = 0"));

        let boundary = solve_primal_grid(&inst(2.0_f64.cosh(), 1.0), 128, 60).unwrap();
        assert!(boundary.z_opt <= 1e-4);

        // oracle reference for ν = 3, r = 1: 2(cosh 2 / 3 − 1)
        let squeezed = solve_primal_grid(&inst(3.0, 1.0), 128, 60).unwrap();
        assert!((squeezed.z_opt - 0.5081305).abs() < 1e-4);
    }

    #[test]
    fn grid_rejects_small_resolution() {
        assert!(solve_primal_grid(&inst(3.0, 0.0), 10, 0).is_err());
    }

    #[test]
    fn pure_squeezed_target_is_infeasible() {
        let s = inst(1.0, 0.5);
        assert!(matches!(solve_primal_grid(&s, 64, 0), Err(Error::OracleInfeasible(_))));
        assert!(matches!(solve_primal_bisection(&s, 1e-6), Err(Error::OracleInfeasible(_))));
    }

    #[test]
    fn bisection_oracle_examples() {
        let tol = 1e-9;
        assert!((solve_primal_bisection(&inst(3.0, 0.0), tol).unwrap().z_opt - 2.0 / 3.0).abs() < 1e-8);
        assert!(solve_primal_bisection(&inst(2.0_f64.cosh(), 1.0), tol).unwrap().z_opt <= 1e-8);
        assert!((solve_primal_bisection(&inst(3.0, 1.0), tol).unwrap().z_opt - 0.5081305).abs() < 1e-6);
    }

    #[test]
    fn objective_identity_holds_at_argmin() {
        let s = inst(2.0, 0.9);
        for res in [solve_primal_grid(&s, 64, 40).unwrap(), solve_primal_bisection(&s, 1e-8).unwrap()] {
            let (a, b, _) = res.argmin;
            assert_eq!(res.z_opt, a / s.v_q + b / s.v_p);
        }
    }

    fn witness(s: &SdpInstance, sign: f64) -> CMat {
        let nu = s.nu();
        let off = C64::new(0.0, sign / nu);
        CMat::from_row_slice(2, 2, &[C64::new(1.0 / s.v_q, 0.0), off, -off, C64::new(1.0 / s.v_p, 0.0)])
    }

    #[test]
    fn dual_examples() {
        let s = inst(3.0, 1.0);
        let y = witness(&s, 1.0) * C64::new(3.0 / 2.0, 0.0);
        let rep = verify_dual(&s, &y);
        assert!(rep.feasible, "{:?}", rep.violations);
        assert!((rep.value - 4.0 * (s.x() - 1.0) / 2.0).abs() < 1e-12);

        let rep = verify_dual(&s, &CMat::zeros(2, 2));
        assert!(!rep.feasible);
        assert_eq!(rep.value, 0.0);
        assert!(rep.violations.iter().any(|v| v.constraint == "trace_a1"));

        let s = inst(3.0, 0.0);
        let y = witness(&s, -1.0) * C64::new(3.0 / 4.0, 0.0);
        let rep = verify_dual(&s, &y);
        assert!(rep.feasible);
        assert!((rep.value - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_dual_is_reported() {
        let s = inst(3.0, 0.0);
        let mut y = witness(&s, -1.0);
        y[(0, 1)] = C64::new(1.0, 0.0);
        let rep = verify_dual(&s, &y);
        assert!(rep.violations.iter().any(|v| v.constraint == "hermiticity"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn oracles_agree_and_respect_weak_duality(nu in 1.05f64..12.0, r in 0.0f64..2.0) {
            let s = inst(nu, r);
            let g = solve_primal_grid(&s, 64, 60).unwrap();
            let b = solve_primal_bisection(&s, 1e-9).unwrap();
            prop_assert!((g.z_opt - b.z_opt).abs() <= 1e-4_f64.max(1e-3 * b.z_opt));
            // feasible dual points certify lower bounds
            let sign = if s.x() > 1.0 { 1.0 } else { -1.0 };
            let y = witness(&s, sign) * C64::new(nu / (nu - sign), 0.0);
            let rep = verify_dual_with(&s, &y, 1e-9);
            prop_assert!(rep.feasible);
            prop_assert!(rep.value <= g.z_opt + 1e-4);
            prop_assert!(rep.value <= b.z_opt + 1e-4);
        }

        #[test]
        fn refinement_shrinks_alignment(nu in 1.05f64..12.0, r in 0.1f64..2.0) {
            let s = inst(nu, r);
            let coarse = solve_primal_grid(&s, 64, 0).unwrap();
            let fine = solve_primal_grid(&s, 64, 60).unwrap();
            let scale = 1e-5 * fine.z_opt.max(1.0);
            prop_assert!(fine.alignment_residual(&s) <= scale.max(coarse.alignment_residual(&s)));
            prop_assert!(fine.z_opt <= coarse.z_opt + 1e-12);
        }
    }
}
