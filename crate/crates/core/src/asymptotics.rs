//! Pure-endpoint singularity and the fluctuation-entropy rate.
//!
//! Along the loss path out of a pure squeezed state `diag(e^{2r}, e^{-2r})`
//! the exact cost behaves like `2/t` and the fluctuation entropy rate like
//! `ln(1/(γt))/t`. Everything here is closed form on that path, so `ν − 1` is
//! evaluated without cancellation.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SqueezedThermalParams;
use crate::one_mode::z_min_exact;

/// Default number of log-grid points per decade.
pub const POINTS_PER_DECADE: usize = 40;
/// Default number of decades below the top of the grid.
pub const DECADES: usize = 6;
/// Top of the default grid in units of `1/γ`.
pub const GRID_TOP: f64 = 0.1;

/// State on the pure-endpoint path at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointState {
    pub t: f64,
    pub nu: f64,
    /// `ν − 1`, computed without cancellation.
    pub nu_minus_one: f64,
    /// Squeezing of `Γ_t`.
    pub r: f64,
    pub x: f64,
}

impl EndpointState {
    pub fn params(&self) -> SqueezedThermalParams {
        SqueezedThermalParams { nu: self.nu, r: self.r }
    }
}

/// One sample of the endpoint curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointSample {
    pub t: f64,
    pub z_min: f64,
    pub t_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointAsymptotics {
    pub r: f64,
    pub gamma: f64,
    pub samples: Vec<EndpointSample>,
    /// Intercept `c₀` of `t·z ≈ c₀ + c₁t` on the smallest decade.
    pub fitted_coefficient: f64,
    pub fitted_slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationRate {
    pub nu: f64,
    /// `ℓ = ln((ν+1)/(ν−1))`.
    pub ell: f64,
    /// `Ṡ = νℓZ/2`.
    pub s_dot: f64,
}

fn check_rate(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("loss rate must be positive, got {gamma}")))
    }
}

fn check_squeezing(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("pure endpoint needs r > 0, got {r}")))
    }
}

/// `Γ_t` for the pure target, reduced to `(ν, r, x)`.
pub fn endpoint_state(r: f64, gamma: f64, t: f64) -> Result<EndpointState> {
    check_rate(gamma)?;
    if !(t > 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let eta = (-2.0 * gamma * t).exp();
    let loss = -(-2.0 * gamma * t).exp_m1();
    let c1 = (2.0 * r).cosh() - 1.0;
    let v_q = eta * (2.0 * r).exp() + loss;
    let v_p = eta * (-2.0 * r).exp() + loss;
    // ν² − 1 = 2η(1−η)(cosh 2r − 1)
    let nu_sq_minus_one = 2.0 * eta * loss * c1;
    let nu = (1.0 + nu_sq_minus_one).sqrt();
    let nu_minus_one = nu_sq_minus_one / (nu + 1.0);
    Ok(EndpointState { t, nu, nu_minus_one, r: 0.25 * (v_q / v_p).ln(), x: (v_q + v_p) / (2.0 * nu * nu) })
}

/// `Z_min(t)` on the pure-endpoint path.
pub fn endpoint_z(r: f64, gamma: f64, t: f64) -> Result<f64> {
    check_squeezing(r)?;
    let state = endpoint_state(r, gamma, t)?;
    Ok(z_min_exact(&state.params(), gamma)?.z_min)
}

/// Log-spaced grid from `t_lo` to `t_hi` inclusive.
pub fn log_grid(t_lo: f64, t_hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(t_lo > 0.0 && t_lo < t_hi) || per_decade == 0 {
        return Err(Error::InvalidArgument(format!("bad log grid [{t_lo}, {t_hi}] x {per_decade}")));
    }
    let (a, b) = (t_lo.log10(), t_hi.log10());
    let n = ((b - a) * per_decade as f64).round().max(1.0) as usize;
    Ok((0..=n).map(|i| 10f64.powf(a + (b - a) * i as f64 / n as f64)).collect())
}

/// `40` points per decade over six decades ending at `0.1/γ`.
pub fn default_time_grid(gamma: f64) -> Result<Vec<f64>> {
    check_rate(gamma)?;
    let top = GRID_TOP / gamma;
    log_grid(top * 10f64.powi(-(DECADES as i32)), top, POINTS_PER_DECADE)
}

/// Samples of `Z_min` and `t·Z_min`, plus the small-`t` fit.
pub fn pure_endpoint_curve(r: f64, gamma: f64, t_grid: &[f64]) -> Result<EndpointAsymptotics> {
    check_squeezing(r)?;
    check_rate(gamma)?;
    if t_grid.len() < 2 {
        return Err(Error::InvalidArgument("need at least two times".into()));
    }
    let samples: Vec<EndpointSample> = t_grid
        .par_iter()
        .map(|&t| {
            let z = endpoint_z(r, gamma, t)?;
            Ok(EndpointSample { t, z_min: z, t_z: t * z })
        })
        .collect::<Result<_>>()?;
    let t_min = t_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let low: Vec<(f64, f64)> = samples.iter().filter(|s| s.t <= 10.0 * t_min).map(|s| (s.t, s.t_z)).collect();
    if low.len() < 2 {
        return Err(Error::InvalidArgument("smallest decade holds fewer than two samples".into()));
    }
    let coef = least_squares(&low.iter().map(|&(t, _)| vec![1.0, t]).collect::<Vec<_>>(), &low.iter().map(|p| p.1).collect::<Vec<_>>())?;
    Ok(EndpointAsymptotics { r, gamma, samples, fitted_coefficient: coef[0], fitted_slope: coef[1] })
}

/// Ordinary least squares for a small dense design.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let p = rows.first().map_or(0, |r| r.len());
    if rows.len() < p || p == 0 || rows.len() != y.len() {
        return Err(Error::InvalidArgument(format!("underdetermined fit: {} rows, {p} columns", rows.len())));
    }
    let a = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidArgument(format!("least squares failed: {e}")))?;
    Ok(sol.iter().cloned().collect())
}

fn ell_of(nu: f64, nu_minus_one: f64) -> f64 {
    ((nu + 1.0) / nu_minus_one).ln()
}

pub fn fluctuation_rate(nu: f64, z: f64) -> Result<FluctuationRate> {
    if !(nu > 1.0) {
        return Err(Error::Divergent(format!("ℓ(ν) diverges at ν = {nu}")));
    }
    let ell = ell_of(nu, nu - 1.0);
    Ok(FluctuationRate { nu, ell, s_dot: nu * ell * z / 2.0 })
}

/// Fluctuation rate on the pure-endpoint path, with `ν − 1` taken from the
/// closed form.
pub fn endpoint_fluctuation_rate(r: f64, gamma: f64, t: f64) -> Result<FluctuationRate> {
    check_squeezing(r)?;
    let state = endpoint_state(r, gamma, t)?;
    let z = z_min_exact(&state.params(), gamma)?.z_min;
    let ell = ell_of(state.nu, state.nu_minus_one);
    Ok(FluctuationRate { nu: state.nu, ell, s_dot: state.nu * ell * z / 2.0 })
}

/// Simpson rule in `u = ln t` with at least `per_decade` panels per decade.
fn log_simpson<F: Fn(f64) -> Result<f64> + Sync>(f: F, eps: f64, t_end: f64, per_decade: usize) -> Result<f64> {
    if !(eps > 0.0 && eps < t_end) {
        return Err(Error::InvalidArgument(format!("need 0 < ε < T, got ε = {eps}, T = {t_end}")));
    }
    let (u0, u1) = (eps.ln(), t_end.ln());
    let decades = (u1 - u0) / std::f64::consts::LN_10;
    let mut n = ((decades * per_decade as f64).ceil() as usize).max(2);
    n += n % 2;
    let h = (u1 - u0) / n as f64;
    let values: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let t = (u0 + h * i as f64).exp();
            Ok(f(t)? * t)
        })
        .collect::<Result<_>>()?;
    let inner: f64 = values[1..n].iter().enumerate().map(|(k, v)| if k % 2 == 0 { 4.0 * v } else { 2.0 * v }).sum();
    Ok(h / 3.0 * (values[0] + inner + values[n]))
}

const QUADRATURE_PER_DECADE: usize = 200;

/// Time at which the path crosses `x = 1`, where `Z_min` has a kink.
pub fn boundary_crossing_time(gamma: f64) -> f64 {
    std::f64::consts::LN_2 / (2.0 * gamma)
}

fn piecewise_log_simpson<F: Fn(f64) -> Result<f64> + Sync>(f: F, eps: f64, t_end: f64, kink: f64) -> Result<f64> {
    if eps < kink && kink < t_end {
        Ok(log_simpson(&f, eps, kink, QUADRATURE_PER_DECADE)? + log_simpson(&f, kink, t_end, QUADRATURE_PER_DECADE)?)
    } else {
        log_simpson(f, eps, t_end, QUADRATURE_PER_DECADE)
    }
}

/// `∫_ε^T Z_min(t) dt` on the pure-endpoint path.
pub fn endpoint_action(r: f64, gamma: f64, eps: f64, t_end: f64) -> Result<f64> {
    check_squeezing(r)?;
    check_rate(gamma)?;
    piecewise_log_simpson(|t| endpoint_z(r, gamma, t), eps, t_end, boundary_crossing_time(gamma))
}

/// `∫_ε^T Ṡ_fluc,min(t) dt` on the pure-endpoint path.
pub fn integrated_fluctuation(r: f64, gamma: f64, eps: f64, t_end: f64) -> Result<f64> {
    check_squeezing(r)?;
    check_rate(gamma)?;
    piecewise_log_simpson(|t| Ok(endpoint_fluctuation_rate(r, gamma, t)?.s_dot), eps, t_end, boundary_crossing_time(gamma))
}

/// Fit of `I(ε) ≈ α·½L² + βL + δ` with `L = ln(1/(γε))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceFit {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    /// Slope of the two-parameter fit `I ≈ α'·½L² + δ'`.
    pub alpha_two_term: f64,
}

pub fn fluctuation_divergence_fit(r: f64, gamma: f64, eps_grid: &[f64], t_end: f64) -> Result<DivergenceFit> {
    let ls: Vec<f64> = eps_grid.iter().map(|&e| (1.0 / (gamma * e)).ln()).collect();
    let ys: Vec<f64> = eps_grid.iter().map(|&e| integrated_fluctuation(r, gamma, e, t_end)).collect::<Result<_>>()?;
    let full = least_squares(&ls.iter().map(|&l| vec![0.5 * l * l, l, 1.0]).collect::<Vec<_>>(), &ys)?;
    let two = least_squares(&ls.iter().map(|&l| vec![0.5 * l * l, 1.0]).collect::<Vec<_>>(), &ys)?;
    Ok(DivergenceFit { alpha: full[0], beta: full[1], delta: full[2], alpha_two_term: two[0] })
}
