//! Gaussian states, the pure-loss path and Gaussian Markov generators.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::{self, asymmetry, form_for, min_eig_unchecked, Physicality, WilliamsonDecomposition};
use crate::tolerance::{TOL_HERM, TOL_POSDEF, TOL_PSD};
use crate::{CMat, RMat, C64};

/// Second moments of a centred Gaussian state in vacuum units.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    data: RMat,
}

impl CovarianceMatrix {
    /// Wraps a symmetric `2N × 2N` matrix. Physicality is not required.
    pub fn new(data: RMat) -> Result<Self> {
        form_for(&data)?;
        let asym = asymmetry(&data);
        if asym > TOL_HERM {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let data = (&data + data.transpose()) * 0.5;
        Ok(Self { n_modes: data.nrows() / 2, data })
    }

    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidDimension("need at least one mode".into()));
        }
        Ok(Self { n_modes, data: RMat::identity(2 * n_modes, 2 * n_modes) })
    }

    /// Block-diagonal covariance of uncorrelated modes.
    pub fn direct_sum(parts: &[CovarianceMatrix]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidDimension("direct sum of zero blocks".into()));
        }
        let dim: usize = parts.iter().map(|p| p.dim()).sum();
        let mut data = RMat::zeros(dim, dim);
        let mut offset = 0;
        for p in parts {
            data.view_mut((offset, offset), (p.dim(), p.dim())).copy_from(&p.data);
            offset += p.dim();
        }
        Self::new(data)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn data(&self) -> &RMat {
        &self.data
    }

    pub fn into_inner(self) -> RMat {
        self.data
    }

    /// `T Γ Tᵀ`.
    pub fn congruence(&self, t: &RMat) -> Result<Self> {
        if t.nrows() != self.dim() || t.ncols() != self.dim() {
            return Err(Error::InvalidDimension(format!(
                "transform is {}×{}, state is {}×{}",
                t.nrows(),
                t.ncols(),
                self.dim(),
                self.dim()
            )));
        }
        Self::new(t * &self.data * t.transpose())
    }

    pub fn inverse(&self) -> Result<RMat> {
        let chol = self
            .data
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite { min_eig: self.data.symmetric_eigenvalues().min() })?;
        let inv = chol.inverse();
        Ok((&inv + inv.transpose()) * 0.5)
    }

    pub fn sqrt(&self) -> Result<RMat> {
        symplectic::sqrt_spd(&self.data)
    }

    pub fn williamson(&self) -> Result<WilliamsonDecomposition> {
        symplectic::williamson(&self.data)
    }

    pub fn physicality(&self) -> Result<Physicality> {
        symplectic::is_physical_state(&self.data)
    }

    /// `Tr(Γ⁻¹)/2`; equals `cosh(2r)/ν` for a one-mode squeezed-thermal state.
    pub fn half_inverse_trace(&self) -> Result<f64> {
        Ok(self.inverse()?.trace() / 2.0)
    }
}

/// One-mode squeezed-thermal parameters: `Γ = diag(ν e^{2r}, ν e^{-2r})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedThermalParams {
    /// Thermal symplectic eigenvalue, `ν ≥ 1`.
    pub nu: f64,
    /// Squeezing parameter.
    pub r: f64,
}

impl SqueezedThermalParams {
    pub fn new(nu: f64, r: f64) -> Result<Self> {
        if !nu.is_finite() || !r.is_finite() {
            return Err(Error::Unphysical(format!("non-finite parameters ν={nu}, r={r}")));
        }
        if nu < 1.0 {
            return Err(Error::Unphysical(format!("ν = {nu} is below the vacuum value 1")));
        }
        Ok(Self { nu, r })
    }

    /// Anti-squeezing ratio `x = cosh(2r)/ν`.
    pub fn x(&self) -> f64 {
        (2.0 * self.r).cosh() / self.nu
    }

    pub fn v_q(&self) -> f64 {
        self.nu * (2.0 * self.r).exp()
    }

    pub fn v_p(&self) -> f64 {
        self.nu * (-2.0 * self.r).exp()
    }

    pub fn is_pure(&self) -> bool {
        self.nu == 1.0
    }

    pub fn covariance(&self) -> CovarianceMatrix {
        squeezed_thermal(self)
    }
}

pub fn squeezed_thermal(params: &SqueezedThermalParams) -> CovarianceMatrix {
    let data = DMatrix::from_diagonal(&DVector::from_vec(vec![params.v_q(), params.v_p()]));
    CovarianceMatrix { n_modes: 1, data }
}

/// `Γ_t = e^{-2γt} Γ₀ + (1 − e^{-2γt}) I`.
pub fn pure_loss_path(gamma0: &CovarianceMatrix, gamma: f64, t: f64) -> Result<CovarianceMatrix> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("loss rate must be positive, got {gamma}")));
    }
    let eta = (-2.0 * gamma * t).exp();
    let one_minus = -(-2.0 * gamma * t).exp_m1();
    let dim = gamma0.dim();
    let data = &gamma0.data * eta + RMat::identity(dim, dim) * one_minus;
    Ok(CovarianceMatrix { n_modes: gamma0.n_modes, data })
}

/// Drift `K`, diffusion `D` and the loss rate `γ` of the reference channel.
///
/// Complete positivity is a predicate ([`cp_min_eig`]), not an invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianGenerator {
    pub drift: RMat,
    pub diffusion: RMat,
    pub gamma: f64,
}

impl GaussianGenerator {
    pub fn new(drift: RMat, diffusion: RMat, gamma: f64) -> Result<Self> {
        form_for(&drift)?;
        if drift.shape() != diffusion.shape() {
            return Err(Error::InvalidDimension("drift and diffusion shapes differ".into()));
        }
        let asym = asymmetry(&diffusion);
        if asym > TOL_HERM {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("loss rate must be positive, got {gamma}")));
        }
        let min = diffusion.symmetric_eigenvalues().min();
        if min < -TOL_PSD * diffusion.norm().max(1.0) {
            return Err(Error::NotPositiveDefinite { min_eig: min });
        }
        let diffusion = (&diffusion + diffusion.transpose()) * 0.5;
        Ok(Self { drift, diffusion, gamma })
    }

    /// Forward pure loss on `N` modes: `K = −γI`, `D = 2γI`.
    pub fn forward_pure_loss(n_modes: usize, gamma: f64) -> Result<Self> {
        let dim = 2 * n_modes;
        Self::new(RMat::identity(dim, dim) * -gamma, RMat::identity(dim, dim) * (2.0 * gamma), gamma)
    }

    /// Same noise with the drift negated: the generator written in the
    /// opposite time direction. CP is unaffected since `M` goes to `M̄`.
    pub fn time_reversed(&self) -> Self {
        Self { drift: -&self.drift, diffusion: self.diffusion.clone(), gamma: self.gamma }
    }

    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }
}

/// `M = D + i(Kσ + σKᵀ)`.
pub fn cp_matrix(generator: &GaussianGenerator) -> CMat {
    let sigma = symplectic::SymplecticForm::new(generator.dim() / 2)
        .expect("generator dimension validated at construction")
        .into_matrix();
    let k = &generator.drift;
    let im = k * &sigma + &sigma * k.transpose();
    let d = &generator.diffusion;
    CMat::from_fn(d.nrows(), d.ncols(), |i, j| C64::new(d[(i, j)], im[(i, j)]))
}

/// `λ_min(M)`; the generator is CP iff this is `≥ −tol_psd`.
pub fn cp_min_eig(generator: &GaussianGenerator) -> f64 {
    min_eig_unchecked(&cp_matrix(generator))
}

pub fn is_cp(generator: &GaussianGenerator) -> bool {
    cp_min_eig(generator) >= -TOL_PSD
}

/// Reverse cost `Z = Tr(Γ⁻¹ D)`.
pub fn cost_z(diffusion: &RMat, gamma: &CovarianceMatrix) -> Result<f64> {
    if diffusion.shape() != gamma.data().shape() {
        return Err(Error::InvalidDimension("diffusion and covariance shapes differ".into()));
    }
    let eigs = gamma.data().symmetric_eigenvalues();
    if eigs.min() <= TOL_POSDEF * eigs.amax() {
        return Err(Error::NotPositiveDefinite { min_eig: eigs.min() });
    }
    let chol = gamma
        .data()
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { min_eig: eigs.min() })?;
    Ok(chol.solve(diffusion).trace())
}

/// `‖KΓ + ΓKᵀ + D − 2γ(Γ − I)‖_F`; zero iff the generator runs the pure-loss
/// flow backwards at `Γ`.
pub fn matching_residual(generator: &GaussianGenerator, gamma: &CovarianceMatrix) -> f64 {
    let g = gamma.data();
    let k = &generator.drift;
    let dim = g.nrows();
    let lhs = k * g + g * k.transpose() + &generator.diffusion;
    let rhs = (g - RMat::identity(dim, dim)) * (2.0 * generator.gamma);
    (lhs - rhs).norm()
}
