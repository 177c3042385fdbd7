//! Exact minimum-cost Gaussian reverse diffusion under pure loss.
//!
//! The crate computes the cheapest completely positive Gaussian generator that
//! runs a pure-loss trajectory backwards, measured by the covariance-weighted
//! diffusion rate `Tr(Γ⁻¹D)`. It provides:
//!
//! * [`symplectic`]: symplectic form, SPD square roots, Hermitian spectra and
//!   the Williamson decomposition.
//! * [`model`]: covariance matrices, squeezed-thermal states, the pure-loss
//!   path, Gaussian generators, the CP matrix and the reverse cost.
//! * [`one_mode`]: closed forms for one mode (Bayes reverse, exact optimum,
//!   dual witnesses, Petz and isotropic baselines, GKP benchmark).
//! * [`sdp_oracle`]: two brute-force solvers for the one-mode SDP and a dual
//!   feasibility checker, independent of the closed forms.
//! * [`frame`]: the continuity-tracked moving Williamson frame and the
//!   additive multimode optimum.
//! * [`asymptotics`]: the pure-endpoint `2/t` law and the fluctuation-entropy
//!   rate.
//! * [`cli`]: dataset emission and the verification suite behind the `qrev`
//!   binary.
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example <name>`.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod frame;
pub mod model;
pub mod one_mode;
pub mod sdp_oracle;
pub mod symplectic;
pub mod tolerance;

pub use error::{Error, Result};
pub use model::{CovarianceMatrix, GaussianGenerator, SqueezedThermalParams};

/// Complex scalar used for Hermitian matrices.
pub type C64 = nalgebra::Complex<f64>;
/// Dense real matrix.
pub type RMat = nalgebra::DMatrix<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
