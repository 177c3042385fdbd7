//! Numerical tolerances shared across the crate.
//!
//! Relative tolerances are measured in the Frobenius norm against the norm of
//! the reference matrix; absolute ones apply to eigenvalues.

/// Symplecticity `‖SσSᵀ − σ‖ / ‖σ‖`.
pub const TOL_SYMP: f64 = 1e-9;
/// Reconstruction `‖SΛSᵀ − Γ‖ / ‖Γ‖` and `‖R² − M‖ / ‖M‖`.
pub const TOL_RECON: f64 = 1e-9;
/// Absolute slack on eigenvalues in PSD tests.
pub const TOL_PSD: f64 = 1e-10;
/// Hermiticity / symmetry, relative to `max(1, ‖M‖)`.
pub const TOL_HERM: f64 = 1e-12;
/// Smallest admissible eigenvalue (relative to the spectral radius) before a
/// matrix is treated as singular.
pub const TOL_POSDEF: f64 = 1e-12;
/// Min-eig slack accepted by the grid SDP oracle.
pub const TOL_ORACLE: f64 = 1e-8;
/// Symplectic eigenvalues closer than this times `max ν` form one cluster.
pub const TOL_CLUSTER_REL: f64 = 1e-6;
