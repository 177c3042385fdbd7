//! Linear algebra on symplectic phase space.
//!
//! Conventions: quadratures are ordered `(q₁, p₁, q₂, p₂, …)`, the vacuum
//! covariance is the identity, and the symplectic form is the direct sum of
//! `[[0, 1], [-1, 0]]` blocks.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tolerance::{TOL_HERM, TOL_POSDEF, TOL_PSD};
use crate::{CMat, RMat, C64};

/// The canonical symplectic form on `N` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    matrix: RMat,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidDimension("symplectic form needs at least one mode".into()));
        }
        let dim = 2 * n_modes;
        let mut matrix = RMat::zeros(dim, dim);
        for k in 0..n_modes {
            matrix[(2 * k, 2 * k + 1)] = 1.0;
            matrix[(2 * k + 1, 2 * k)] = -1.0;
        }
        Ok(Self { n_modes, matrix })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> RMat {
        self.matrix
    }
}

/// Shorthand for [`SymplecticForm::new`].
pub fn symplectic_form(n_modes: usize) -> Result<SymplecticForm> {
    SymplecticForm::new(n_modes)
}

/// Symplectic form matching the dimension of a `2N × 2N` matrix.
pub(crate) fn form_for(m: &RMat) -> Result<RMat> {
    if m.nrows() != m.ncols() || m.nrows() == 0 || m.nrows() % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "expected a square 2N×2N matrix, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(SymplecticForm::new(m.nrows() / 2)?.into_matrix())
}

pub(crate) fn asymmetry(m: &RMat) -> f64 {
    (m - m.transpose()).norm() / m.norm().max(1.0)
}

fn check_symmetric(m: &RMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidDimension(format!("{}×{} is not square", m.nrows(), m.ncols())));
    }
    let asym = asymmetry(m);
    if asym > TOL_HERM {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// Symmetric square root of an SPD matrix via its eigendecomposition.
pub fn sqrt_spd(m: &RMat) -> Result<RMat> {
    check_symmetric(m)?;
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let min = eig.eigenvalues.min();
    if min <= TOL_POSDEF * scale {
        return Err(Error::NotPositiveDefinite { min_eig: min });
    }
    let roots = eig.eigenvalues.map(f64::sqrt);
    let v = &eig.eigenvectors;
    let r = v * DMatrix::from_diagonal(&roots) * v.transpose();
    Ok((&r + r.transpose()) * 0.5)
}

/// Symmetric inverse square root of an SPD matrix.
pub fn inv_sqrt_spd(m: &RMat) -> Result<RMat> {
    check_symmetric(m)?;
    let eig = SymmetricEigen::new((m + m.transpose()) * 0.5);
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let min = eig.eigenvalues.min();
    if min <= TOL_POSDEF * scale {
        return Err(Error::NotPositiveDefinite { min_eig: min });
    }
    let roots = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let v = &eig.eigenvectors;
    let r = v * DMatrix::from_diagonal(&roots) * v.transpose();
    Ok((&r + r.transpose()) * 0.5)
}

pub(crate) fn hermitian_deviation(m: &CMat) -> f64 {
    (m - m.adjoint()).norm() / m.norm().max(1.0)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig_hermitian(m: &CMat) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidDimension(format!("{}×{} is not square", m.nrows(), m.ncols())));
    }
    let dev = hermitian_deviation(m);
    if dev > TOL_HERM {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(min_eig_unchecked(m))
}

/// Smallest eigenvalue of a matrix that is Hermitian by construction.
pub(crate) fn min_eig_unchecked(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(herm).eigenvalues.min()
}

/// `Γ = S Λ Sᵀ` with `S` symplectic and `Λ = ⊕ₖ νₖ I₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonDecomposition {
    pub s: RMat,
    /// Symplectic eigenvalues, sorted descending.
    pub nu: Vec<f64>,
}

impl WilliamsonDecomposition {
    pub fn n_modes(&self) -> usize {
        self.nu.len()
    }

    /// `Λ = ⊕ₖ νₖ I₂`.
    pub fn normal_form(&self) -> RMat {
        block_scalar(&self.nu)
    }

    /// `‖SσSᵀ − σ‖ / ‖σ‖`.
    pub fn symplectic_residual(&self) -> f64 {
        symplectic_residual(&self.s)
    }

    /// `‖SΛSᵀ − Γ‖ / ‖Γ‖`.
    pub fn reconstruction_residual(&self, gamma: &RMat) -> f64 {
        let rec = &self.s * self.normal_form() * self.s.transpose();
        (rec - gamma).norm() / gamma.norm()
    }
}

/// `⊕ₖ vₖ I₂`.
pub fn block_scalar(values: &[f64]) -> RMat {
    let diag: Vec<f64> = values.iter().flat_map(|&v| [v, v]).collect();
    DMatrix::from_diagonal(&DVector::from_vec(diag))
}

/// `‖SσSᵀ − σ‖ / ‖σ‖` for a square `2N×2N` matrix.
pub fn symplectic_residual(s: &RMat) -> f64 {
    let sigma = match form_for(s) {
        Ok(sigma) => sigma,
        Err(_) => return f64::INFINITY,
    };
    (s * &sigma * s.transpose() - &sigma).norm() / sigma.norm()
}

/// Positive-branch eigenpairs `(νₖ, wₖ)` of `H = i Γ^{1/2} σ Γ^{1/2}`.
///
/// `vectors[k]` is a unit eigenvector for `nu[k]`. The order is whatever the
/// eigen solver returned, sorted by descending `ν` with ties kept stable.
#[derive(Debug, Clone)]
pub struct PositiveBranch {
    pub nu: Vec<f64>,
    pub vectors: Vec<DVector<C64>>,
}

/// `A = Γ^{1/2} σ Γ^{1/2}` from a precomputed square root.
pub(crate) fn skew_kernel(sqrt_gamma: &RMat, sigma: &RMat) -> RMat {
    sqrt_gamma * sigma * sqrt_gamma
}

/// Eigendecomposition of `iA` restricted to the positive half of its spectrum.
pub fn positive_branch(sqrt_gamma: &RMat, sigma: &RMat) -> Result<PositiveBranch> {
    let a = skew_kernel(sqrt_gamma, sigma);
    let dim = a.nrows();
    let n = dim / 2;
    let h = CMat::from_fn(dim, dim, |i, j| C64::new(0.0, a[(i, j)]));
    let eig = SymmetricEigen::new((&h + h.adjoint()) * C64::new(0.5, 0.0));
    let mut idx: Vec<usize> = (0..dim).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    if idx.len() != n {
        let smallest = eig.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        return Err(Error::DegenerateSpectrum { nu: smallest });
    }
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let scale = eig.eigenvalues.amax();
    let nu: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    if let Some(&small) = nu.iter().find(|&&v| v < TOL_POSDEF * scale.max(1.0)) {
        return Err(Error::DegenerateSpectrum { nu: small });
    }
    let vectors = idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    Ok(PositiveBranch { nu, vectors })
}

/// Largest bilinear overlap `|w_jᵀ w_k|` (no conjugation) between modes.
pub(crate) fn bilinear_defect(vectors: &[DVector<C64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (j, wj) in vectors.iter().enumerate() {
        for wk in vectors.iter().skip(j) {
            worst = worst.max(wj.dot(wk).norm());
        }
    }
    worst
}

/// Real Darboux matrix `O = [x₁ y₁ x₂ y₂ …]` from `wₖ = (xₖ − i yₖ)/√2`.
///
/// Column pairs satisfy `A xₖ = −νₖ yₖ`; a pair violating it has its `y`
/// flipped. If the columns fail to be orthonormal beyond `1e-10` they are
/// replaced by the nearest orthogonal matrix.
pub fn darboux_matrix(a: &RMat, nu: &[f64], vectors: &[DVector<C64>]) -> RMat {
    let dim = a.nrows();
    let mut o = RMat::zeros(dim, dim);
    let sqrt2 = std::f64::consts::SQRT_2;
    for (k, w) in vectors.iter().enumerate() {
        let x = w.map(|c| sqrt2 * c.re);
        let mut y = w.map(|c| -sqrt2 * c.im);
        let ax = a * &x;
        if (&ax + &y * nu[k]).norm() > (&ax - &y * nu[k]).norm() {
            y = -y;
        }
        o.set_column(2 * k, &x);
        o.set_column(2 * k + 1, &y);
    }
    let defect = (o.transpose() * &o - RMat::identity(dim, dim)).amax();
    if defect > 1e-10 || bilinear_defect(vectors) > 1e-10 {
        o = nearest_orthogonal(&o);
    }
    o
}

/// Polar factor `O (OᵀO)^{-1/2}`.
pub(crate) fn nearest_orthogonal(o: &RMat) -> RMat {
    let svd = o.clone().svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => u * v_t,
        _ => o.clone(),
    }
}

/// `S = Γ^{1/2} O Λ^{-1/2}` from the positive-branch data.
pub fn frame_from_branch(sqrt_gamma: &RMat, sigma: &RMat, nu: &[f64], vectors: &[DVector<C64>]) -> RMat {
    let a = skew_kernel(sqrt_gamma, sigma);
    let o = darboux_matrix(&a, nu, vectors);
    let inv_root: Vec<f64> = nu.iter().map(|v| 1.0 / v.sqrt()).collect();
    sqrt_gamma * o * block_scalar(&inv_root)
}

/// Williamson decomposition through the Hermitian matrix `i Γ^{1/2} σ Γ^{1/2}`.
pub fn williamson(gamma: &RMat) -> Result<WilliamsonDecomposition> {
    let sigma = form_for(gamma)?;
    let root = sqrt_spd(gamma)?;
    let branch = positive_branch(&root, &sigma)?;
    let s = frame_from_branch(&root, &sigma, &branch.nu, &branch.vectors);
    Ok(WilliamsonDecomposition { s, nu: branch.nu })
}

/// Result of the uncertainty-relation test `Γ + iσ ⪰ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality {
    pub physical: bool,
    /// `λ_min(Γ + iσ)`.
    pub margin: f64,
}

pub fn is_physical_state(gamma: &RMat) -> Result<Physicality> {
    let sigma = form_for(gamma)?;
    check_symmetric(gamma)?;
    let dim = gamma.nrows();
    let m = CMat::from_fn(dim, dim, |i, j| C64::new(gamma[(i, j)], sigma[(i, j)]));
    let margin = min_eig_unchecked(&m);
    Ok(Physicality { physical: margin >= -TOL_PSD, margin })
}
