//! Closed-form one-mode reverse protocols.
//!
//! Target `Γ₀ = diag(v_q, v_p) = diag(ν e^{2r}, ν e^{-2r})`, anti-squeezing
//! ratio `x = cosh(2r)/ν`. The minimum of `Tr(Γ₀⁻¹D)` over all CP generators
//! that reverse pure loss at `Γ₀` is
//!
//! ```text
//! Z_min = 4γ|x − 1| / (ν − sgn(x − 1))
//! ```
//!
//! attained only by `D_opt = (Z_min/2) Γ₀`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cost_z, cp_matrix, cp_min_eig, squeezed_thermal, GaussianGenerator, SqueezedThermalParams};
use crate::symplectic::min_eig_unchecked;
use crate::tolerance::TOL_PSD;
use crate::{CMat, RMat, C64};

/// Which side of the zero-cost boundary `x = 1` the target lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// `x < 1`: thermal noise dominates.
    Below,
    /// `x = 1`: noiseless reversal.
    Boundary,
    /// `x > 1`: anti-squeezing dominates.
    Above,
}

impl Branch {
    pub fn of(x: f64) -> Self {
        if x > 1.0 {
            Branch::Above
        } else if x < 1.0 {
            Branch::Below
        } else {
            Branch::Boundary
        }
    }

    /// `sgn(x − 1)`.
    pub fn sign(self) -> i8 {
        match self {
            Branch::Below => -1,
            Branch::Boundary => 0,
            Branch::Above => 1,
        }
    }
}

/// `f_ν(x) = 4γ|x − 1| / (ν − sgn(x − 1))`.
///
/// Diverges for `x > 1` at `ν = 1`.
pub fn branch_cost(nu: f64, x: f64, gamma: f64) -> Result<f64> {
    match Branch::of(x) {
        Branch::Boundary => Ok(0.0),
        Branch::Below => Ok(4.0 * gamma * (1.0 - x) / (nu + 1.0)),
        Branch::Above => {
            if nu <= 1.0 {
                Err(Error::Divergent(format!("pure endpoint with x = {x} > 1")))
            } else {
                Ok(4.0 * gamma * (x - 1.0) / (nu - 1.0))
            }
        }
    }
}

fn inverse_target(params: &SqueezedThermalParams) -> RMat {
    RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0 / params.v_q(), 1.0 / params.v_p()]))
}

/// Fixed-diffusion Bayes reverse: `K = −γI + 2γΓ₀⁻¹`, `D = 2γI`.
///
/// The drift is the score-corrected forward drift, i.e. it is written in
/// forward time. [`GaussianGenerator::time_reversed`] gives the form that
/// satisfies the matching condition at `Γ₀`.
pub fn bayes_generator(params: &SqueezedThermalParams, gamma: f64) -> Result<GaussianGenerator> {
    let id = RMat::identity(2, 2);
    let drift = &id * -gamma + inverse_target(params) * (2.0 * gamma);
    GaussianGenerator::new(drift, id * (2.0 * gamma), gamma)
}

/// `u†M_Bayes u = 4γ(1 − x)` for `u = (1, i)/√2`.
///
/// This is the CP margin whose sign decides feasibility. It is the smallest
/// eigenvalue only for `x ≥ 1/2`; see [`bayes_cp_spectrum`].
pub fn bayes_cp_margin(params: &SqueezedThermalParams, gamma: f64) -> f64 {
    4.0 * gamma * (1.0 - params.x())
}

/// Both eigenvalues of `M_Bayes = 2γI + iγ(4x − 2)σ`, on `u` and `ū`:
/// `(4γ(1 − x), 4γx)`.
pub fn bayes_cp_spectrum(params: &SqueezedThermalParams, gamma: f64) -> (f64, f64) {
    let x = params.x();
    (4.0 * gamma * (1.0 - x), 4.0 * gamma * x)
}

/// Cost of a protocol that may be infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProtocolCost {
    Feasible { cost: f64 },
    /// Not completely positive; `margin` is the (negative) CP min-eig or an
    /// equivalent violation measure.
    Infeasible { margin: f64 },
}

impl ProtocolCost {
    pub fn cost(&self) -> Option<f64> {
        match *self {
            ProtocolCost::Feasible { cost } => Some(cost),
            ProtocolCost::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, ProtocolCost::Feasible { .. })
    }
}

/// Bayes cost `4γx` when the Bayes generator is CP.
pub fn bayes_cost(params: &SqueezedThermalParams, gamma: f64) -> Result<ProtocolCost> {
    let generator = bayes_generator(params, gamma)?;
    let margin = cp_min_eig(&generator);
    if margin < -TOL_PSD * gamma.max(1.0) {
        return Ok(ProtocolCost::Infeasible { margin });
    }
    let cost = cost_z(&generator.diffusion, &squeezed_thermal(params))?;
    Ok(ProtocolCost::Feasible { cost })
}

/// The exact one-mode optimum together with its certificate data.
#[derive(Debug, Clone, PartialEq)]
pub struct ReverseOptimum {
    pub params: SqueezedThermalParams,
    pub gamma: f64,
    pub z_min: f64,
    pub branch: Branch,
    /// `(Z_min/2) Γ₀`.
    pub d_opt: RMat,
    /// Diagonal drift completing exact matching; off-diagonals are zero.
    pub k_opt: RMat,
    /// Rank-one dual optimizer `Y★`.
    pub dual_witness: CMat,
}

impl ReverseOptimum {
    pub fn generator(&self) -> Result<GaussianGenerator> {
        GaussianGenerator::new(self.k_opt.clone(), self.d_opt.clone(), self.gamma)
    }
}

/// `W± = Γ₀⁻¹ ± (i/ν) σ`.
pub fn witness(params: &SqueezedThermalParams, sign: f64) -> CMat {
    let off = C64::new(0.0, sign / params.nu);
    CMat::from_row_slice(
        2,
        2,
        &[C64::new(1.0 / params.v_q(), 0.0), off, -off, C64::new(1.0 / params.v_p(), 0.0)],
    )
}

/// Exact optimum, optimal generator and active dual witness.
pub fn z_min_exact(params: &SqueezedThermalParams, gamma: f64) -> Result<ReverseOptimum> {
    let x = params.x();
    let branch = Branch::of(x);
    let z_min = branch_cost(params.nu, x, gamma)?;
    let gamma0 = squeezed_thermal(params);
    let d_opt = gamma0.data() * (z_min / 2.0);
    let (vq, vp) = (params.v_q(), params.v_p());
    let (a, b) = (d_opt[(0, 0)], d_opt[(1, 1)]);
    let mut k_opt = RMat::zeros(2, 2);
    k_opt[(0, 0)] = gamma * (1.0 - 1.0 / vq) - a / (2.0 * vq);
    k_opt[(1, 1)] = gamma * (1.0 - 1.0 / vp) - b / (2.0 * vp);
    let nu = params.nu;
    let dual_witness = match branch {
        Branch::Above => witness(params, 1.0) * C64::new(nu / (nu - 1.0), 0.0),
        Branch::Below | Branch::Boundary => witness(params, -1.0) * C64::new(nu / (nu + 1.0), 0.0),
    };
    Ok(ReverseOptimum { params: *params, gamma, z_min, branch, d_opt, k_opt, dual_witness })
}

/// Affine SDP data `M(D) = A₀ + aA₁ + bA₂ + cA₃` for `D = [[a, c], [c, b]]`.
pub(crate) fn affine_constraints(params: &SqueezedThermalParams, gamma: f64) -> [CMat; 4] {
    let i = C64::new(0.0, 1.0);
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let (vq, vp) = (params.v_q(), params.v_p());
    let t = 2.0 * gamma * (1.0 - params.x());
    [
        CMat::from_row_slice(2, 2, &[zero, i * t, -i * t, zero]),
        CMat::from_row_slice(2, 2, &[one, -i / (2.0 * vq), i / (2.0 * vq), zero]),
        CMat::from_row_slice(2, 2, &[zero, -i / (2.0 * vp), i / (2.0 * vp), one]),
        CMat::from_row_slice(2, 2, &[zero, one, one, zero]),
    ]
}

fn trace_product(a: &CMat, b: &CMat) -> C64 {
    (a * b).trace()
}

/// Thresholds applied by [`kkt_certificate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktThresholds {
    /// On `|Z_min − dual value|`, in units of `γ`.
    pub duality_gap: f64,
    /// On `‖M(D_opt) Y★‖_F`.
    pub slackness: f64,
    /// On each affine trace residual and on `−λ_min(Y★)`.
    pub dual_residual: f64,
    /// On `−λ_min(M(D_opt))`.
    pub primal: f64,
    /// On `|a/v_q − b/v_p|` and `|c|`.
    pub alignment: f64,
}

impl Default for KktThresholds {
    fn default() -> Self {
        Self { duality_gap: 1e-10, slackness: 1e-8, dual_residual: 1e-10, primal: 1e-10, alignment: 1e-12 }
    }
}

/// A KKT condition that failed its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktViolation {
    pub check: String,
    pub value: f64,
    pub threshold: f64,
}

/// Numerical KKT audit of a [`ReverseOptimum`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktCertificate {
    /// `λ_min(M(D_opt))`.
    pub primal_min_eig: f64,
    /// `λ_min(Y★)`.
    pub dual_min_eig: f64,
    /// `|det Y★|` (rank ≤ 1).
    pub dual_det: f64,
    /// `Tr(A₁Y) − 1/v_q`, `Tr(A₂Y) − 1/v_p`, `Tr(A₃Y)`.
    pub trace_residuals: [f64; 3],
    /// `−Tr(A₀Y★)`.
    pub dual_value: f64,
    pub duality_gap: f64,
    /// `‖M(D_opt)Y★‖_F`.
    pub slackness: f64,
    /// `‖M‖_F ‖Y★‖_F`, the natural scale of `slackness`.
    pub slackness_scale: f64,
    /// `|a/v_q − b/v_p|`.
    pub alignment_residual: f64,
    /// `|c|`.
    pub off_diagonal: f64,
    /// `‖M_lab − M_affine‖_F`: the lab CP matrix against the SDP form.
    pub affine_consistency: f64,
    pub violations: Vec<KktViolation>,
}

impl KktCertificate {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audits primal/dual feasibility, the duality gap and complementary
/// slackness with the default thresholds.
pub fn kkt_certificate(opt: &ReverseOptimum, params: &SqueezedThermalParams, gamma: f64) -> KktCertificate {
    kkt_certificate_with(opt, params, gamma, &KktThresholds::default())
}

pub fn kkt_certificate_with(
    opt: &ReverseOptimum,
    params: &SqueezedThermalParams,
    gamma: f64,
    thresholds: &KktThresholds,
) -> KktCertificate {
    let y = &opt.dual_witness;
    let [a0, a1, a2, a3] = affine_constraints(params, gamma);
    let d = &opt.d_opt;
    let (a, b, c) = (d[(0, 0)], d[(1, 1)], d[(0, 1)]);
    let m_affine = &a0 + &a1 * C64::new(a, 0.0) + &a2 * C64::new(b, 0.0) + &a3 * C64::new(c, 0.0);
    let m_lab = match opt.generator() {
        Ok(g) => cp_matrix(&g),
        Err(_) => m_affine.clone(),
    };
    let affine_consistency = (&m_lab - &m_affine).norm();

    let primal_min_eig = min_eig_unchecked(&m_lab);
    let dual_min_eig = min_eig_unchecked(y);
    let dual_det = y.determinant().norm();
    let trace_residuals = [
        trace_product(&a1, y).re - 1.0 / params.v_q(),
        trace_product(&a2, y).re - 1.0 / params.v_p(),
        trace_product(&a3, y).re,
    ];
    let dual_value = -trace_product(&a0, y).re;
    let duality_gap = (opt.z_min - dual_value).abs();
    let slackness = (&m_lab * y).norm();
    let slackness_scale = m_lab.norm() * y.norm();
    let alignment_residual = (a / params.v_q() - b / params.v_p()).abs();
    let off_diagonal = c.abs();

    let mut violations = Vec::new();
    let mut check = |name: &str, value: f64, threshold: f64| {
        if !(value <= threshold) {
            violations.push(KktViolation { check: name.to_string(), value, threshold });
        }
    };
    check("primal_feasibility", -primal_min_eig, thresholds.primal * gamma.max(1.0));
    check("dual_psd", -dual_min_eig, thresholds.dual_residual);
    for (k, r) in trace_residuals.iter().enumerate() {
        check(&format!("dual_trace_{}", k + 1), r.abs(), thresholds.dual_residual);
    }
    check("duality_gap", duality_gap, thresholds.duality_gap * gamma);
    check("complementary_slackness", slackness, thresholds.slackness * slackness_scale.max(1.0));
    check("covariance_alignment", alignment_residual, thresholds.alignment * opt.z_min.max(1.0));
    check("off_diagonal", off_diagonal, thresholds.alignment * opt.z_min.max(1.0));

    KktCertificate {
        primal_min_eig,
        dual_min_eig,
        dual_det,
        trace_residuals,
        dual_value,
        duality_gap,
        slackness,
        slackness_scale,
        alignment_residual,
        off_diagonal,
        affine_consistency,
        violations,
    }
}

/// Optimum of one intrinsic `2×2` block with isotropic diffusion `cI₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockOptimum {
    /// Minimal diffusion strength `c`.
    pub c_min: f64,
    /// Block cost `2c/ν`.
    pub z_block: f64,
}

/// Minimises `2c/ν` subject to `c ≥ |s − c|/ν` for a scalar source `s`.
pub fn scalar_block_optimum(source: f64, nu: f64) -> Result<BlockOptimum> {
    if nu < 1.0 {
        return Err(Error::Unphysical(format!("symplectic eigenvalue {nu} < 1")));
    }
    if source >= 0.0 {
        let c = source / (nu + 1.0);
        return Ok(BlockOptimum { c_min: c, z_block: 2.0 * source / (nu * (nu + 1.0)) });
    }
    if nu <= 1.0 {
        return Err(Error::Divergent(format!("negative source {source} on a pure mode")));
    }
    let c = -source / (nu - 1.0);
    Ok(BlockOptimum { c_min: c, z_block: -2.0 * source / (nu * (nu - 1.0)) })
}

/// Local Gaussian Petz reverse: diffusion entries and costs.
#[derive(Debug, Clone, PartialEq)]
pub struct PetzReverse {
    /// `Tr(Γ₀⁻¹ D_Petz)` from the diffusion entries; the authoritative value.
    pub z_petz: f64,
    pub d_petz: RMat,
    /// `(4γ/(ν²−1))[x(ν²+1) − 2ν]`, the contracted form as usually printed.
    pub z_contracted_printed: f64,
    /// `(4γ/(ν²−1))[x(ν²+1) − 2]`, the contraction re-derived from the entries.
    pub z_contracted_rederived: f64,
}

pub fn petz_cost(params: &SqueezedThermalParams, gamma: f64) -> Result<PetzReverse> {
    let nu = params.nu;
    if nu <= 1.0 {
        return Err(Error::Divergent("Petz diffusion divides by ν² − 1".into()));
    }
    let denom = nu * nu - 1.0;
    let e = (2.0 * params.r).exp();
    let dq = 2.0 * gamma * (nu - e).powi(2) / denom;
    let dp = 2.0 * gamma * (nu - 1.0 / e).powi(2) / denom;
    let d_petz = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![dq, dp]));
    let z_petz = cost_z(&d_petz, &squeezed_thermal(params))?;
    let x = params.x();
    Ok(PetzReverse {
        z_petz,
        d_petz,
        z_contracted_printed: 4.0 * gamma / denom * (x * (nu * nu + 1.0) - 2.0 * nu),
        z_contracted_rederived: 4.0 * gamma / denom * (x * (nu * nu + 1.0) - 2.0),
    })
}

/// Closed-form Petz excess over the optimum, branch by branch.
pub fn petz_gap_formula(params: &SqueezedThermalParams, gamma: f64) -> f64 {
    let ch = (2.0 * params.r).cosh();
    let nu = params.nu;
    if params.x() <= 1.0 {
        4.0 * gamma * (ch - 1.0) / (nu - 1.0)
    } else {
        4.0 * gamma * (ch + 1.0) / (nu + 1.0)
    }
}

/// Best isotropic reverse `D = cI₂`.
///
/// Feasible only for `x ≤ 1`, where `c = 2γ(1−x)/(1+x)` and
/// `Z = 4γx(1−x)/(1+x)`. For `x > 1` the returned margin is the violation of
/// `c + τ ≥ 0` at `c = 0`, i.e. `2γ(1 − x)`.
pub fn isotropic_optimum(params: &SqueezedThermalParams, gamma: f64) -> ProtocolCost {
    let x = params.x();
    if x > 1.0 {
        return ProtocolCost::Infeasible { margin: 2.0 * gamma * (1.0 - x) };
    }
    ProtocolCost::Feasible { cost: 4.0 * gamma * x * (1.0 - x) / (1.0 + x) }
}

/// Diffusion strength of the best isotropic reverse, when feasible.
pub fn isotropic_diffusion(params: &SqueezedThermalParams, gamma: f64) -> Option<f64> {
    let x = params.x();
    (x <= 1.0).then(|| 2.0 * gamma * (1.0 - x) / (1.0 + x))
}

/// Covariance-sector benchmark for an isotropic target `Γ₀ = (2n̄+1) I₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GkpBenchmark {
    pub nbar: f64,
    /// Optimal diffusion is `diffusion_rate · I₂`.
    pub diffusion_rate: f64,
    /// Round-trip displacement-variance amplification `(2n̄+1)/(n̄+1)`.
    pub amplification: f64,
}

pub fn gkp_benchmark(nbar: f64, gamma: f64) -> Result<GkpBenchmark> {
    if !(nbar >= 0.0) {
        return Err(Error::Unphysical(format!("mean photon number {nbar} < 0")));
    }
    if nbar.is_infinite() {
        return Ok(GkpBenchmark { nbar, diffusion_rate: 2.0 * gamma, amplification: 2.0 });
    }
    Ok(GkpBenchmark {
        nbar,
        diffusion_rate: 2.0 * gamma * nbar / (nbar + 1.0),
        amplification: (2.0 * nbar + 1.0) / (nbar + 1.0),
    })
}

/// Costs of the exact, Bayes, isotropic and Petz reverses at one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolComparison {
    pub params: SqueezedThermalParams,
    /// `+∞` at a pure nonclassical endpoint.
    pub z_exact: f64,
    pub z_bayes: ProtocolCost,
    pub z_isotropic: ProtocolCost,
    /// `None` when `ν = 1`.
    pub z_petz: Option<f64>,
    pub petz_gap: Option<f64>,
}

pub fn compare_protocols(params: &SqueezedThermalParams, gamma: f64) -> Result<ProtocolComparison> {
    let z_exact = match z_min_exact(params, gamma) {
        Ok(opt) => opt.z_min,
        Err(Error::Divergent(_)) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let z_petz = match petz_cost(params, gamma) {
        Ok(p) => Some(p.z_petz),
        Err(Error::Divergent(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ProtocolComparison {
        params: *params,
        z_exact,
        z_bayes: bayes_cost(params, gamma)?,
        z_isotropic: isotropic_optimum(params, gamma),
        z_petz,
        petz_gap: z_petz.map(|z| z - z_exact),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::matching_residual;
    use proptest::prelude::*;

    fn scaled_identity(v: f64) -> RMat {
        nalgebra::DMatrix::identity(2, 2) * v
    }

    fn p(nu: f64, r: f64) -> SqueezedThermalParams {
        SqueezedThermalParams::new(nu, r).unwrap()
    }

    #[test]
    fn bayes_generator_examples() {
        let g = bayes_generator(&p(1.0, 0.0), 1.0).unwrap();
        assert!((g.drift.clone() - scaled_identity(1.0)).norm() < 1e-15);
        assert!((g.diffusion.clone() - scaled_identity(2.0)).norm() < 1e-15);
        let g = bayes_generator(&p(3.0, 0.0), 2.0).unwrap();
        assert!((g.drift.clone() - scaled_identity(-2.0 + 4.0 / 3.0)).norm() < 1e-14);
        for (nu, r) in [(3.0, 1.0), (1.5, 0.2), (10.0, 1.5)] {
            let params = p(nu, r);
            let g = bayes_generator(&params, 0.7).unwrap();
            let reversed = g.time_reversed();
            assert!(matching_residual(&reversed, &squeezed_thermal(&params)) < 1e-12 * params.v_q());
            assert!((cp_min_eig(&g) - cp_min_eig(&reversed)).abs() < 1e-12 * params.v_q());
        }
    }

    #[test]
    fn bayes_margin_examples() {
        let on_curve = p(2.0_f64.cosh(), 1.0);
        assert!(bayes_cp_margin(&on_curve, 1.0).abs() < 1e-14);
        let strong = p(3.0, 1.5);
        let m = bayes_cp_margin(&strong, 1.0);
        assert!((m - 4.0 * (1.0 - 3.0_f64.cosh() / 3.0)).abs() < 1e-14);
        assert!(m < 0.0);
        assert!(bayes_cp_margin(&p(3.0, 0.0), 1.0) > 0.0);
        assert_eq!(bayes_cp_margin(&p(1.0, 0.0), 1.0), 0.0);
        let g = bayes_generator(&on_curve, 1.0).unwrap();
        assert!(cp_min_eig(&g).abs() < 1e-12);
        assert!(cp_min_eig(&bayes_generator(&strong, 1.0).unwrap()) < 0.0);
        // for x < 1/2 the ū eigenvalue 4γx is the smaller one
        let thermal = bayes_generator(&p(3.0, 0.0), 1.0).unwrap();
        assert!((cp_min_eig(&thermal) - 4.0 / 3.0).abs() < 1e-14);
        assert!((bayes_cp_margin(&p(3.0, 0.0), 1.0) - 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn z_min_on_boundary_is_zero() {
        let opt = z_min_exact(&p(2.0_f64.cosh(), 1.0), 1.0).unwrap();
        assert!(opt.z_min <= 1e-12);
        assert!(opt.d_opt.norm() <= 1e-11);
    }

    #[test]
    fn z_min_thermal() {
        let opt = z_min_exact(&p(3.0, 0.0), 1.0).unwrap();
        assert_eq!(opt.branch, Branch::Below);
        assert!((opt.z_min - 2.0 / 3.0).abs() < 1e-15);
        // thermal-limit form 4γ(ν−1)/(ν(ν+1))
        assert!((opt.z_min - 4.0 * 2.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn z_min_squeezed() {
        let opt = z_min_exact(&p(3.0, 1.0), 1.0).unwrap();
        let x = 2.0_f64.cosh() / 3.0;
        assert!((x - 1.254065).abs() < 1e-6);
        assert_eq!(opt.branch, Branch::Above);
        assert!((opt.z_min - 0.508131).abs() < 1e-6);
        assert!((opt.z_min - 2.0 * (x - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn z_min_pure_endpoint_diverges() {
        assert!(matches!(z_min_exact(&p(1.0, 0.4), 1.0), Err(Error::Divergent(_))));
        assert_eq!(z_min_exact(&p(1.0, 0.0), 1.0).unwrap().z_min, 0.0);
    }

    #[test]
    fn optimal_generator_matches_and_is_cp() {
        for (nu, r) in [(3.0, 1.0), (3.0, 0.0), (1.2, 0.9), (8.0, 0.3)] {
            let params = p(nu, r);
            let opt = z_min_exact(&params, 1.3).unwrap();
            let g = opt.generator().unwrap();
            let scale = params.v_q().max(1.0);
            assert!(matching_residual(&g, &squeezed_thermal(&params)) < 1e-12 * scale);
            assert!(cp_min_eig(&g) > -1e-12 * scale);
            assert!((opt.d_opt.clone() - squeezed_thermal(&params).data() * (opt.z_min / 2.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn kkt_examples() {
        let params = p(3.0, 1.0);
        let cert = kkt_certificate(&z_min_exact(&params, 1.0).unwrap(), &params, 1.0);
        assert!(cert.passed(), "{:?}", cert.violations);
        assert!(cert.duality_gap <= 1e-10);
        assert!(cert.affine_consistency < 1e-13);

        let boundary = p(2.0_f64.cosh(), 1.0);
        let opt = z_min_exact(&boundary, 1.0).unwrap();
        let cert = kkt_certificate(&opt, &boundary, 1.0);
        assert!(cert.passed(), "{:?}", cert.violations);
        assert!(cert.dual_value.abs() < 1e-12);

        let thermal = p(3.0, 0.0);
        let opt = z_min_exact(&thermal, 1.0).unwrap();
        let cert = kkt_certificate(&opt, &thermal, 1.0);
        assert!(cert.alignment_residual == 0.0);
        assert!(cert.passed());
    }

    #[test]
    fn kkt_reports_violations_for_a_wrong_witness() {
        let params = p(3.0, 1.0);
        let mut opt = z_min_exact(&params, 1.0).unwrap();
        opt.dual_witness = witness(&params, -1.0);
        let cert = kkt_certificate(&opt, &params, 1.0);
        assert!(!cert.passed());
        assert!(cert.violations.iter().any(|v| v.check.starts_with("dual_trace")));
    }

    #[test]
    fn scalar_block_examples() {
        assert_eq!(scalar_block_optimum(0.0, 3.0).unwrap(), BlockOptimum { c_min: 0.0, z_block: 0.0 });
        let params = p(3.0, 1.0);
        let s = 2.0 * 3.0 * (1.0 - params.x());
        let blk = scalar_block_optimum(s, 3.0).unwrap();
        assert!((blk.z_block - z_min_exact(&params, 1.0).unwrap().z_min).abs() < 1e-14);
        let blk = scalar_block_optimum(4.0, 3.0).unwrap();
        assert!((blk.c_min - 1.0).abs() < 1e-15);
        assert!((blk.z_block - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(scalar_block_optimum(-1.0, 1.0), Err(Error::Divergent(_))));
    }

    #[test]
    fn petz_examples() {
        let petz = petz_cost(&p(3.0, 0.0), 1.0).unwrap();
        assert!((petz.d_petz.clone() - scaled_identity(1.0)).norm() < 1e-15);
        assert!((petz.z_petz - 2.0 / 3.0).abs() < 1e-15);
        assert!((petz.z_contracted_rederived - 2.0 / 3.0).abs() < 1e-15);
        // the printed contraction disagrees with the entries at r = 0
        assert!((petz.z_contracted_printed - (-4.0 / 3.0)).abs() < 1e-14);

        let params = p(3.0, 1.0);
        let petz = petz_cost(&params, 1.0).unwrap();
        let gap = petz.z_petz - z_min_exact(&params, 1.0).unwrap().z_min;
        assert!((gap - (2.0_f64.cosh() + 1.0)).abs() < 1e-12);
        assert!((gap - 4.762).abs() < 1e-3);
        assert!(matches!(petz_cost(&p(1.0, 0.5), 1.0), Err(Error::Divergent(_))));
    }

    #[test]
    fn isotropic_examples() {
        assert_eq!(isotropic_optimum(&p(2.0_f64.cosh() + 1e-9, 1.0), 1.0).cost().map(|c| c < 1e-8), Some(true));
        let vac = isotropic_optimum(&p(1.0, 0.0), 1.0);
        assert_eq!(vac, ProtocolCost::Feasible { cost: 0.0 });
        let th = isotropic_optimum(&p(3.0, 0.0), 1.0).cost().unwrap();
        assert!((th - 2.0 / 3.0).abs() < 1e-15);
        assert!(!isotropic_optimum(&p(3.0, 1.0), 1.0).is_feasible());
    }

    #[test]
    fn isotropic_generator_is_cp_and_matches() {
        // independent check: build the isotropic generator and test it
        let params = p(4.0, 0.4);
        let c = isotropic_diffusion(&params, 1.0).unwrap();
        let (vq, vp) = (params.v_q(), params.v_p());
        let mut k = RMat::zeros(2, 2);
        k[(0, 0)] = 1.0 - 1.0 / vq - c / (2.0 * vq);
        k[(1, 1)] = 1.0 - 1.0 / vp - c / (2.0 * vp);
        let g = GaussianGenerator::new(k, scaled_identity(c), 1.0).unwrap();
        assert!(matching_residual(&g, &squeezed_thermal(&params)) < 1e-13);
        assert!(cp_min_eig(&g).abs() < 1e-13);
    }

    #[test]
    fn gkp_examples() {
        let b = gkp_benchmark(0.0, 1.0).unwrap();
        assert_eq!((b.diffusion_rate, b.amplification), (0.0, 1.0));
        let b = gkp_benchmark(1.0, 1.0).unwrap();
        assert!((b.diffusion_rate - 1.0).abs() < 1e-15);
        assert!((b.amplification - 1.5).abs() < 1e-15);
        let opt = z_min_exact(&p(3.0, 0.0), 1.0).unwrap();
        assert!((opt.d_opt[(0, 0)] - b.diffusion_rate).abs() < 1e-15);
        let big = gkp_benchmark(1e9, 1.0).unwrap();
        assert!((big.diffusion_rate - 2.0).abs() < 1e-8);
        assert!((big.amplification - 2.0).abs() < 1e-8);
        assert!(gkp_benchmark(-0.5, 1.0).is_err());
    }

    #[test]
    fn comparison_below_and_above_threshold() {
        let below = compare_protocols(&p(3.0, 0.3), 1.0).unwrap();
        assert!(below.z_bayes.is_feasible() && below.z_isotropic.is_feasible());
        let bayes = below.z_bayes.cost().unwrap();
        assert!((bayes - 4.0 * p(3.0, 0.3).x()).abs() < 1e-13);
        assert!(below.z_exact <= bayes && below.z_exact <= below.z_isotropic.cost().unwrap());
        let above = compare_protocols(&p(3.0, 1.2), 1.0).unwrap();
        assert!(!above.z_bayes.is_feasible() && !above.z_isotropic.is_feasible());
        let pure = compare_protocols(&p(1.0, 0.5), 1.0).unwrap();
        assert!(pure.z_exact.is_infinite());
        assert!(pure.z_petz.is_none());
    }

    proptest! {
        #[test]
        fn bayes_spectrum_matches_numeric(nu in 1.0f64..12.0, r in 0.0f64..2.0, gamma in 0.1f64..5.0) {
            let params = p(nu, r);
            let m = cp_matrix(&bayes_generator(&params, gamma).unwrap());
            let u = nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]) / C64::new(2f64.sqrt(), 0.0);
            let rayleigh = (u.adjoint() * &m * &u)[(0, 0)];
            let scale = 1e-10 * gamma.max(1.0) * params.x().max(1.0);
            prop_assert!((rayleigh.re - bayes_cp_margin(&params, gamma)).abs() <= scale);
            prop_assert!(rayleigh.im.abs() <= scale);
            let (lo, hi) = bayes_cp_spectrum(&params, gamma);
            prop_assert!((min_eig_unchecked(&m) - lo.min(hi)).abs() <= scale);
        }

        #[test]
        fn petz_gap_matches_branch_formula(nu in 1.01f64..12.0, r in 0.0f64..2.0) {
            let params = p(nu, r);
            let z = z_min_exact(&params, 1.0).unwrap().z_min;
            let petz = petz_cost(&params, 1.0).unwrap();
            let gap = petz.z_petz - z;
            let expected = petz_gap_formula(&params, 1.0);
            prop_assert!((gap - expected).abs() <= 1e-10 * expected.max(1.0));
            prop_assert!((petz.z_petz - petz.z_contracted_rederived).abs() <= 1e-10 * petz.z_petz.max(1.0));
        }

        #[test]
        fn optimum_dominates_feasible_baselines(nu in 1.01f64..12.0, r in 0.0f64..2.0) {
            let c = compare_protocols(&p(nu, r), 1.0).unwrap();
            for z in [c.z_bayes.cost(), c.z_isotropic.cost(), c.z_petz].into_iter().flatten() {
                prop_assert!(c.z_exact <= z + 1e-10);
            }
        }
    }
}
