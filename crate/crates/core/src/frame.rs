//! Continuity-tracked moving Williamson frame along the pure-loss path and the
//! additive multimode reverse optimum built on it.
//!
//! At each instant the positive branch of `iΓ_t^{1/2}σΓ_t^{1/2}` is matched to
//! the previous instant by maximal overlap (permutation, then phase). Modes
//! that are numerically degenerate are aligned as a subspace and, when the
//! metric separates them, rotated onto its eigenbasis. The resulting frame
//! `S_c(t)` is smooth through eigenvalue crossings.

use nalgebra::{DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cost_z, cp_min_eig, matching_residual, CovarianceMatrix, GaussianGenerator, SqueezedThermalParams};
use crate::one_mode::{branch_cost, scalar_block_optimum};
use crate::symplectic::{block_scalar, frame_from_branch, positive_branch, sqrt_spd, symplectic_form};
use crate::tolerance::TOL_CLUSTER_REL;
use crate::{CMat, RMat, C64};

/// Relative gap below which eigenvectors are mixed as one subspace.
const MIX_GAP_REL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameOptions {
    /// Largest tracking step; `None` means `0.01/γ`.
    pub max_step: Option<f64>,
    /// Relative gap (in units of `max ν`) defining a degenerate cluster.
    pub tol_cluster_rel: f64,
    /// Halve the step when `max_k (1 − |⟨w_k(t₀), w_k(t₁)⟩|)` exceeds this.
    pub overlap_defect_max: f64,
    pub max_halvings: u32,
    /// Also compute a fourth-order velocity at every instant for the
    /// lab-frame pushback.
    pub fine_velocity: bool,
    /// Accept instants whose spectrum touches `ν = 1`.
    pub allow_pure_endpoint: bool,
}

impl Default for FrameOptions {
    fn default() -> Self {
        Self {
            max_step: None,
            tol_cluster_rel: TOL_CLUSTER_REL,
            overlap_defect_max: 0.2,
            max_halvings: 30,
            fine_velocity: true,
            allow_pure_endpoint: false,
        }
    }
}

/// One tracked instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameInstant {
    pub t: f64,
    pub covariance: RMat,
    /// `ν_k(t)` in tracked (not sorted) order.
    pub nu: Vec<f64>,
    /// Positive-branch eigenvectors, continuity-aligned.
    pub vectors: Vec<DVector<C64>>,
    /// `S_c(t)`.
    pub frame: RMat,
    /// `G = (S_cᵀS_c)⁻¹`.
    pub metric: RMat,
    pub x_star: Vec<f64>,
    pub clusters: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct MovingFrame {
    gamma0: CovarianceMatrix,
    gamma: f64,
    options: FrameOptions,
    instants: Vec<FrameInstant>,
    velocity: Vec<RMat>,
    fine_velocity: Option<Vec<RMat>>,
    warnings: Vec<String>,
    evaluations: usize,
}

impl MovingFrame {
    pub fn len(&self) -> usize {
        self.instants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instants.is_empty()
    }

    pub fn n_modes(&self) -> usize {
        self.gamma0.n_modes()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn initial_state(&self) -> &CovarianceMatrix {
        &self.gamma0
    }

    pub fn options(&self) -> &FrameOptions {
        &self.options
    }

    pub fn times(&self) -> Vec<f64> {
        self.instants.iter().map(|i| i.t).collect()
    }

    pub fn instant(&self, index: usize) -> &FrameInstant {
        &self.instants[index]
    }

    pub fn instants(&self) -> &[FrameInstant] {
        &self.instants
    }

    /// Forward-time `W_c = S_c⁻¹ dS_c/dt` from central differences on the grid.
    pub fn velocity(&self, index: usize) -> &RMat {
        &self.velocity[index]
    }

    /// Forward-time velocity from a fourth-order stencil, if computed.
    pub fn fine_velocity(&self, index: usize) -> Option<&RMat> {
        self.fine_velocity.as_ref().map(|v| &v[index])
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Eigen solves performed while tracking, including halved substeps.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// `‖S_c(t_{i+1}) − S_c(t_i)‖_F`.
    pub fn jump(&self, index: usize) -> f64 {
        (&self.instants[index + 1].frame - &self.instants[index].frame).norm()
    }

    /// `max_i ‖ΔS_c‖_F / Δt`.
    pub fn max_jump_rate(&self) -> f64 {
        (0..self.len().saturating_sub(1))
            .map(|i| self.jump(i) / (self.instants[i + 1].t - self.instants[i].t))
            .fold(0.0, f64::max)
    }
}

/// `Γ_t` without argument checks; valid for small negative `t` on mixed states.
fn path_covariance(gamma0: &RMat, gamma: f64, t: f64) -> RMat {
    let loss = -(-2.0 * gamma * t).exp_m1();
    let dim = gamma0.nrows();
    gamma0 * (1.0 - loss) + RMat::identity(dim, dim) * loss
}

struct Raw {
    t: f64,
    covariance: RMat,
    sqrt: RMat,
    nu: Vec<f64>,
    vectors: Vec<DVector<C64>>,
}

struct Tracker<'a> {
    gamma0: &'a RMat,
    gamma: f64,
    sigma: RMat,
    options: FrameOptions,
}

/// Pairs of indices that are within `gap` of each other, merged transitively.
fn groups_by_gap(nu: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let n = nu.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| nu[j].total_cmp(&nu[i]).then(i.cmp(&j)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 && nu[order[pos - 1]] - nu[i] < gap {
            groups.last_mut().unwrap().push(i);
        } else {
            groups.push(vec![i]);
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    groups
}

fn inner(a: &DVector<C64>, b: &DVector<C64>) -> C64 {
    a.dotc(b)
}

/// Greedy assignment maximising `|O_jk|`; returns `perm[j] = k`.
fn greedy_assignment(weights: &RMat) -> Vec<usize> {
    let n = weights.nrows();
    let mut perm = vec![usize::MAX; n];
    let mut used_row = vec![false; n];
    let mut used_col = vec![false; n];
    for _ in 0..n {
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for j in (0..n).filter(|&j| !used_row[j]) {
            for k in (0..n).filter(|&k| !used_col[k]) {
                if weights[(j, k)] > best.0 {
                    best = (weights[(j, k)], j, k);
                }
            }
        }
        let (_, j, k) = best;
        perm[j] = k;
        used_row[j] = true;
        used_col[k] = true;
    }
    perm
}

fn phase_to_real_positive(v: &DVector<C64>, reference: C64) -> DVector<C64> {
    let norm = reference.norm();
    if norm == 0.0 {
        return v.clone();
    }
    v * (reference.conj() / norm)
}

/// Unitary `U` maximising `Re Tr(R†WU)` for the overlap `O = R†W`.
fn polar_alignment(overlap: &CMat) -> CMat {
    let svd = overlap.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᴴ");
    v_t.adjoint() * u.adjoint()
}

impl<'a> Tracker<'a> {
    fn solve(&self, t: f64) -> Result<Raw> {
        let covariance = path_covariance(self.gamma0, self.gamma, t);
        let sqrt = sqrt_spd(&covariance)?;
        let branch = positive_branch(&sqrt, &self.sigma).map_err(|_| Error::EigenFailure { index: 0, t })?;
        Ok(Raw { t, covariance, sqrt, nu: branch.nu, vectors: branch.vectors })
    }

    fn fix_initial(&self, mut raw: Raw) -> Result<Raw> {
        for v in raw.vectors.iter_mut() {
            let big = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(C64::new(1.0, 0.0));
            *v = phase_to_real_positive(v, big);
        }
        let max_nu = raw.nu.iter().copied().fold(0.0, f64::max);
        let inv = raw.covariance.clone().try_inverse().ok_or(Error::NotPositiveDefinite { min_eig: 0.0 })?;
        for group in groups_by_gap(&raw.nu, MIX_GAP_REL * max_nu) {
            if group.len() > 1 {
                let refs: Vec<DVector<C64>> = group.iter().map(|&k| raw.vectors[k].clone()).collect();
                canonical_rotation(&mut raw.vectors, &group, &refs, &inv);
            }
        }
        Ok(raw)
    }

    /// Orders, rotates and phases `raw` against `reference`; returns the
    /// overlap defect `max_k (1 − |⟨ref_k, w_k⟩|)`.
    fn align(&self, reference: &[DVector<C64>], raw: Raw) -> Result<(Raw, f64)> {
        let n = reference.len();
        let overlaps = RMat::from_fn(n, n, |j, k| inner(&reference[j], &raw.vectors[k]).norm());
        let perm = greedy_assignment(&overlaps);
        let mut nu: Vec<f64> = perm.iter().map(|&k| raw.nu[k]).collect();
        let mut vectors: Vec<DVector<C64>> = perm.iter().map(|&k| raw.vectors[k].clone()).collect();
        let max_nu = nu.iter().copied().fold(0.0, f64::max);
        let inv = raw.covariance.clone().try_inverse().ok_or(Error::NotPositiveDefinite { min_eig: 0.0 })?;
        for group in groups_by_gap(&nu, MIX_GAP_REL * max_nu) {
            if group.len() == 1 {
                let k = group[0];
                let o = inner(&reference[k], &vectors[k]);
                vectors[k] = phase_to_real_positive(&vectors[k], o);
                continue;
            }
            let m = group.len();
            let o = CMat::from_fn(m, m, |a, b| inner(&reference[group[a]], &vectors[group[b]]));
            let u = polar_alignment(&o);
            let block: Vec<DVector<C64>> = group.iter().map(|&k| vectors[k].clone()).collect();
            for (a, &k) in group.iter().enumerate() {
                let mut w = DVector::zeros(block[0].len());
                for (b, v) in block.iter().enumerate() {
                    w += v * u[(b, a)];
                }
                vectors[k] = w;
            }
            let refs: Vec<DVector<C64>> = group.iter().map(|&k| reference[k].clone()).collect();
            canonical_rotation(&mut vectors, &group, &refs, &inv);
            let mean = group.iter().map(|&k| nu[k]).sum::<f64>() / m as f64;
            for &k in &group {
                nu[k] = mean;
            }
        }
        let defect = (0..n).map(|k| 1.0 - inner(&reference[k], &vectors[k]).norm()).fold(0.0, f64::max);
        Ok((Raw { nu, vectors, ..raw }, defect))
    }

    /// Tracks from `(t0, reference)` to `t1`, halving on large overlap defect.
    fn track(&self, reference: &[DVector<C64>], t0: f64, t1: f64, depth: u32, evals: &mut usize, warnings: &mut Vec<String>) -> Result<Raw> {
        let raw = self.solve(t1)?;
        *evals += 1;
        let (aligned, defect) = self.align(reference, raw)?;
        if defect <= self.options.overlap_defect_max {
            return Ok(aligned);
        }
        if depth >= self.options.max_halvings {
            warnings.push(format!("overlap defect {defect:.3} at t = {t1:.6e} after {depth} halvings"));
            return Ok(aligned);
        }
        let mid = 0.5 * (t0 + t1);
        let halfway = self.track(reference, t0, mid, depth + 1, evals, warnings)?;
        self.track(&halfway.vectors, mid, t1, depth + 1, evals, warnings)
    }

    fn max_step(&self) -> f64 {
        self.options.max_step.unwrap_or(0.01 / self.gamma)
    }

    fn finish(&self, raw: Raw) -> FrameInstant {
        let frame = frame_from_branch(&raw.sqrt, &self.sigma, &raw.nu, &raw.vectors);
        let metric = metric_of(&frame);
        let max_nu = raw.nu.iter().copied().fold(0.0, f64::max);
        let resolution = resolve_clusters(&metric, &raw.nu, self.options.tol_cluster_rel * max_nu);
        FrameInstant {
            t: raw.t,
            covariance: raw.covariance,
            nu: raw.nu,
            vectors: raw.vectors,
            frame,
            metric,
            x_star: resolution.x_star,
            clusters: resolution.clusters,
        }
    }

    fn frame_at(&self, reference: &FrameInstant, t: f64) -> Result<RMat> {
        let mut evals = 0;
        let mut warnings = Vec::new();
        let raw = self.track(&reference.vectors, reference.t, t, 0, &mut evals, &mut warnings)?;
        Ok(frame_from_branch(&raw.sqrt, &self.sigma, &raw.nu, &raw.vectors))
    }
}

/// Rotates the `group` vectors onto the eigenbasis of `P = W†Γ⁻¹W` when its
/// eigenvalues are separated, matching each to `refs` and fixing phases.
fn canonical_rotation(vectors: &mut [DVector<C64>], group: &[usize], refs: &[DVector<C64>], inv_cov: &RMat) {
    let m = group.len();
    let inv_c = inv_cov.map(|v| C64::new(v, 0.0));
    let p = CMat::from_fn(m, m, |a, b| inner(&vectors[group[a]], &(&inv_c * &vectors[group[b]])));
    let p = (&p + p.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(p);
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let spread = ev.last().unwrap().abs().max(1e-300);
    if ev.windows(2).any(|w| w[1] - w[0] < 1e-8 * spread) {
        return;
    }
    let block: Vec<DVector<C64>> = group.iter().map(|&k| vectors[k].clone()).collect();
    let rotated: Vec<DVector<C64>> = (0..m)
        .map(|e| {
            let mut w = DVector::zeros(block[0].len());
            for (b, v) in block.iter().enumerate() {
                w += v * eig.eigenvectors[(b, e)];
            }
            w
        })
        .collect();
    let weights = RMat::from_fn(m, m, |a, e| inner(&refs[a], &rotated[e]).norm());
    let perm = greedy_assignment(&weights);
    for (a, &k) in group.iter().enumerate() {
        let w = &rotated[perm[a]];
        vectors[k] = phase_to_real_positive(w, inner(&refs[a], w));
    }
}

/// `(S_cᵀS_c)⁻¹`.
fn metric_of(frame: &RMat) -> RMat {
    let sts = frame.transpose() * frame;
    let g = sts.try_inverse().unwrap_or_else(|| RMat::from_element(frame.nrows(), frame.ncols(), f64::NAN));
    (&g + g.transpose()) * 0.5
}

/// Part of a `2×2` block commuting with the symplectic unit: `(B − σBσ)/2`.
pub fn commuting_part(block: &RMat) -> RMat {
    let (a, b, c, d) = (block[(0, 0)], block[(0, 1)], block[(1, 0)], block[(1, 1)]);
    let p = 0.5 * (a + d);
    let q = 0.5 * (b - c);
    RMat::from_row_slice(2, 2, &[p, q, -q, p])
}

fn block(m: &RMat, j: usize, k: usize) -> RMat {
    m.view((2 * j, 2 * k), (2, 2)).into_owned()
}

/// Degenerate clusters and their canonical anti-squeezing data.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResolution {
    /// Mode indices of each cluster, singletons included.
    pub clusters: Vec<Vec<usize>>,
    /// Cluster block of the commuting metric as a Hermitian matrix, scaled
    /// by `(ν_jν_k)^{-1/2}`.
    pub hermitian: Vec<CMat>,
    pub x_star: Vec<f64>,
}

fn resolve_clusters(metric: &RMat, nu: &[f64], gap: f64) -> ClusterResolution {
    let clusters = groups_by_gap(nu, gap);
    let mut x_star = vec![0.0; nu.len()];
    let mut hermitian = Vec::with_capacity(clusters.len());
    for cluster in &clusters {
        let m = cluster.len();
        let h = CMat::from_fn(m, m, |a, b| {
            let c = commuting_part(&block(metric, cluster[a], cluster[b]));
            C64::new(c[(0, 0)], -c[(0, 1)]) / (nu[cluster[a]] * nu[cluster[b]]).sqrt()
        });
        let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        if m == 1 {
            let k = cluster[0];
            x_star[k] = (metric[(2 * k, 2 * k)] + metric[(2 * k + 1, 2 * k + 1)]) / (2.0 * nu[k]);
        } else {
            let eig = SymmetricEigen::new(h.clone());
            let weights = RMat::from_fn(m, m, |a, e| eig.eigenvectors[(a, e)].norm_sqr());
            let perm = greedy_assignment(&weights);
            for (a, &k) in cluster.iter().enumerate() {
                x_star[k] = eig.eigenvalues[perm[a]];
            }
        }
        hermitian.push(h);
    }
    ClusterResolution { clusters, hermitian, x_star }
}

/// Builds the tracked frame with default options.
pub fn build_moving_frame(gamma0: &CovarianceMatrix, gamma: f64, times: &[f64]) -> Result<MovingFrame> {
    build_moving_frame_with(gamma0, gamma, times, FrameOptions::default())
}

pub fn build_moving_frame_with(gamma0: &CovarianceMatrix, gamma: f64, times: &[f64], options: FrameOptions) -> Result<MovingFrame> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("loss rate must be positive, got {gamma}")));
    }
    if times.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if let Some(&t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::NegativeTime(t));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
    }
    let initial_nu = gamma0.williamson()?.nu;
    let tol_pure = options.tol_cluster_rel;
    let strictly_mixed = initial_nu.iter().all(|&v| v > 1.0 + tol_pure);
    if times[0] == 0.0 && !strictly_mixed {
        return Err(Error::Divergent("the grid starts at a pure endpoint".into()));
    }
    let tracker = Tracker { gamma0: gamma0.data(), gamma, sigma: symplectic_form(gamma0.n_modes())?.into_matrix(), options };
    let mut warnings = Vec::new();
    let mut evaluations = 1;
    let first = tracker.fix_initial(tracker.solve(times[0]).map_err(|_| Error::EigenFailure { index: 0, t: times[0] })?)?;
    let mut instants = vec![tracker.finish(first)];
    let max_step = tracker.max_step();
    for (index, &t) in times.iter().enumerate().skip(1) {
        let prev = instants.last().unwrap();
        let (t0, mut vectors) = (prev.t, prev.vectors.clone());
        let substeps = ((t - t0) / max_step).ceil().max(1.0) as usize;
        let mut raw = None;
        for s in 1..=substeps {
            let ts = if s == substeps { t } else { t0 + (t - t0) * s as f64 / substeps as f64 };
            let tprev = t0 + (t - t0) * (s - 1) as f64 / substeps as f64;
            let r = tracker
                .track(&vectors, tprev, ts, 0, &mut evaluations, &mut warnings)
                .map_err(|e| match e {
                    Error::EigenFailure { t, .. } => Error::EigenFailure { index, t },
                    other => other,
                })?;
            vectors = r.vectors.clone();
            raw = Some(r);
        }
        let instant = tracker.finish(raw.expect("at least one substep"));
        if !options.allow_pure_endpoint {
            if let Some(v) = instant.nu.iter().find(|&&v| v < 1.0 + tol_pure) {
                warnings.push(format!("symplectic eigenvalue {v:.12} touches the pure boundary at t = {t:.6e}"));
            }
        }
        instants.push(instant);
    }
    let velocity = grid_velocity(&instants);
    let fine_velocity = if options.fine_velocity {
        let h_max = 2.5e-4 / gamma;
        let fine: Result<Vec<RMat>> = instants
            .par_iter()
            .map(|inst| {
                let h = if strictly_mixed { h_max } else { h_max.min(inst.t / 4.0) };
                let f = |dt: f64| tracker.frame_at(inst, inst.t + dt);
                let d = (f(-2.0 * h)? - f(-h)? * 8.0 + f(h)? * 8.0 - f(2.0 * h)?) / (12.0 * h);
                Ok(inverse(&inst.frame) * d)
            })
            .collect();
        Some(fine?)
    } else {
        None
    };
    Ok(MovingFrame { gamma0: gamma0.clone(), gamma, options, instants, velocity, fine_velocity, warnings, evaluations })
}

fn inverse(s: &RMat) -> RMat {
    s.clone().try_inverse().unwrap_or_else(|| RMat::from_element(s.nrows(), s.ncols(), f64::NAN))
}

fn grid_velocity(instants: &[FrameInstant]) -> Vec<RMat> {
    let n = instants.len();
    if n < 2 {
        return instants.iter().map(|i| RMat::zeros(i.frame.nrows(), i.frame.ncols())).collect();
    }
    (0..n)
        .map(|i| {
            let (lo, hi) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            let d = (&instants[hi].frame - &instants[lo].frame) / (instants[hi].t - instants[lo].t);
            inverse(&instants[i].frame) * d
        })
        .collect()
}

/// Canonical anti-squeezing data `x_k*` at one instant.
pub fn canonical_x_star(frame: &MovingFrame, t_index: usize) -> Vec<f64> {
    frame.instants[t_index].x_star.clone()
}

pub fn cluster_resolution(frame: &MovingFrame, t_index: usize) -> ClusterResolution {
    let inst = &frame.instants[t_index];
    let max_nu = inst.nu.iter().copied().fold(0.0, f64::max);
    resolve_clusters(&inst.metric, &inst.nu, frame.options.tol_cluster_rel * max_nu)
}

/// Reverse sources `s_k = 2γν_k(1 − x_k*)`, equal to `−dν_k/dt`.
pub fn scalar_sources(frame: &MovingFrame, t_index: usize) -> Vec<f64> {
    let inst = &frame.instants[t_index];
    inst.nu.iter().zip(&inst.x_star).map(|(&nu, &x)| 2.0 * frame.gamma * nu * (1.0 - x)).collect()
}

/// `max_k |s_k + dν_k/dt|` with grid differences of the tracked spectrum.
pub fn source_consistency(frame: &MovingFrame, t_index: usize) -> f64 {
    let n = frame.len();
    if n < 2 {
        return f64::NAN;
    }
    let (lo, hi) = match t_index {
        0 => (0, 1),
        i if i == n - 1 => (n - 2, n - 1),
        i => (i - 1, i + 1),
    };
    let (a, b) = (&frame.instants[lo], &frame.instants[hi]);
    scalar_sources(frame, t_index)
        .iter()
        .enumerate()
        .map(|(k, s)| (s + (b.nu[k] - a.nu[k]) / (b.t - a.t)).abs())
        .fold(0.0, f64::max)
}

/// `Σ_k f_{ν_k}(x_k*)`.
pub fn additive_cost(frame: &MovingFrame, t_index: usize) -> Result<f64> {
    let inst = &frame.instants[t_index];
    inst.nu.iter().zip(&inst.x_star).map(|(&nu, &x)| branch_cost(nu.max(1.0), x, frame.gamma)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultimodeOptimum {
    pub t: f64,
    pub gamma: f64,
    pub per_mode_costs: Vec<f64>,
    pub sources: Vec<f64>,
    /// Sum of the block optima.
    pub total: f64,
    /// `Σ_k 4γ|x_k*−1|/(ν_k − sgn(x_k*−1))`.
    pub additive_formula: f64,
    /// `Tr(Γ_t⁻¹D*)` of the constructed lab generator.
    pub lab_cost: f64,
    pub drift: RMat,
    pub diffusion: RMat,
    pub cp_margin: f64,
    pub matching_residual: f64,
}

impl MultimodeOptimum {
    pub fn generator(&self) -> Result<GaussianGenerator> {
        GaussianGenerator::new(self.drift.clone(), self.diffusion.clone(), self.gamma)
    }
}

/// Blockwise optimum in the moving frame, pushed back to the lab frame.
///
/// The lab drift is `S_c(K_mov − W)S_c⁻¹` with `W` the forward-time frame
/// velocity, since the reverse generator runs in `−t`.
pub fn multimode_optimum(frame: &MovingFrame, t_index: usize) -> Result<MultimodeOptimum> {
    let inst = &frame.instants[t_index];
    let gamma = frame.gamma;
    let sources = scalar_sources(frame, t_index);
    let mut per_mode_costs = Vec::with_capacity(inst.nu.len());
    let mut a = Vec::with_capacity(inst.nu.len());
    let mut c = Vec::with_capacity(inst.nu.len());
    let mut additive_formula = 0.0;
    for (k, (&nu, &s)) in inst.nu.iter().zip(&sources).enumerate() {
        let nu = if (nu - 1.0).abs() < 1e-12 { 1.0 } else { nu };
        if nu <= 1.0 && s < 0.0 {
            return Err(Error::Divergent(format!("mode {k} is pure at t = {}", inst.t)));
        }
        let blk = scalar_block_optimum(s, nu)?;
        per_mode_costs.push(blk.z_block);
        additive_formula += branch_cost(nu, inst.x_star[k], gamma)?;
        c.push(blk.c_min);
        a.push((s - blk.c_min) / (2.0 * nu));
    }
    let w = frame.fine_velocity(t_index).unwrap_or(&frame.velocity[t_index]);
    let s_mat = &inst.frame;
    let k_mov = block_scalar(&a);
    let d_mov = block_scalar(&c);
    let drift = s_mat * (k_mov - w) * inverse(s_mat);
    let diffusion = s_mat * d_mov * s_mat.transpose();
    let diffusion = (&diffusion + diffusion.transpose()) * 0.5;
    let cov = CovarianceMatrix::new(inst.covariance.clone())?;
    let lab_cost = cost_z(&diffusion, &cov)?;
    let generator = GaussianGenerator::new(drift.clone(), diffusion.clone(), gamma)?;
    Ok(MultimodeOptimum {
        t: inst.t,
        gamma,
        total: per_mode_costs.iter().sum(),
        per_mode_costs,
        sources,
        additive_formula,
        lab_cost,
        cp_margin: cp_min_eig(&generator),
        matching_residual: matching_residual(&generator, &cov),
        drift,
        diffusion,
    })
}

/// Trapezoidal integral of the additive cost over `[t_lo, t_hi]`, linearly
/// interpolating at endpoints that fall between grid instants.
pub fn integrated_action(frame: &MovingFrame, t_lo: f64, t_hi: f64) -> Result<f64> {
    let times = frame.times();
    let (first, last) = (times[0], *times.last().unwrap());
    if !(t_lo > 0.0 && t_lo < t_hi) {
        return Err(Error::InvalidArgument(format!("need 0 < t_lo < t_hi, got [{t_lo}, {t_hi}]")));
    }
    if t_lo < first || t_hi > last {
        return Err(Error::InvalidArgument(format!("[{t_lo}, {t_hi}] is outside the frame grid [{first}, {last}]")));
    }
    let costs: Vec<f64> = (0..frame.len()).map(|i| additive_cost(frame, i)).collect::<Result<_>>()?;
    let value_at = |t: f64| {
        let i = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
        let (t0, t1) = (times[i - 1], times[i]);
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        costs[i - 1] * (1.0 - w) + costs[i] * w
    };
    let mut pts = vec![(t_lo, value_at(t_lo))];
    pts.extend(times.iter().zip(&costs).filter(|(&t, _)| t > t_lo && t < t_hi).map(|(&t, &c)| (t, c)));
    pts.push((t_hi, value_at(t_hi)));
    Ok(pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum())
}

/// `max_{j≠k} ‖(ν_k − ν_j)W_{C,jk} − 2γG_{C,jk}‖_F` with the grid velocity.
pub fn kinematic_residual(frame: &MovingFrame, t_index: usize) -> f64 {
    kinematic_residual_of(frame, t_index, &frame.velocity[t_index])
}

pub(crate) fn kinematic_residual_of(frame: &MovingFrame, t_index: usize, w: &RMat) -> f64 {
    let inst = &frame.instants[t_index];
    let n = inst.nu.len();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in (0..n).filter(|&k| k != j) {
            let lhs = commuting_part(&block(w, j, k)) * (inst.nu[k] - inst.nu[j]);
            let rhs = commuting_part(&block(&inst.metric, j, k)) * (2.0 * frame.gamma);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// `n` evenly spaced instants on `[t0, t1]`.
/// `ν(t)` of a one-mode squeezed-thermal state under pure loss.
pub fn one_mode_nu_at(params: &SqueezedThermalParams, gamma: f64, t: f64) -> f64 {
    let eta = (-2.0 * gamma * t).exp();
    let loss = 1.0 - eta;
    ((eta * params.v_q() + loss) * (eta * params.v_p() + loss)).sqrt()
}

/// Two uncorrelated modes whose symplectic eigenvalues cross under loss.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingFixture {
    pub modes: [SqueezedThermalParams; 2],
    pub gamma: f64,
    pub t_cross: f64,
}

impl CrossingFixture {
    pub fn state(&self) -> CovarianceMatrix {
        CovarianceMatrix::direct_sum(&[self.modes[0].covariance(), self.modes[1].covariance()]).expect("two 2×2 blocks")
    }
}

/// `(ν=4, r=0.3) ⊕ (ν=2, r=1.2)`; the crossing time comes from bisection.
pub fn crossing_fixture(gamma: f64) -> Result<CrossingFixture> {
    let modes = [SqueezedThermalParams::new(4.0, 0.3)?, SqueezedThermalParams::new(2.0, 1.2)?];
    let t_cross = crossing_time(&modes[0], &modes[1], gamma, 5.0 / gamma)
        .ok_or_else(|| Error::InvalidArgument("fixture modes do not cross".into()))?;
    Ok(CrossingFixture { modes, gamma, t_cross })
}

/// First sign change of `ν_a(t) − ν_b(t)` on `[0, t_max]`, refined by bisection.
pub fn crossing_time(a: &SqueezedThermalParams, b: &SqueezedThermalParams, gamma: f64, t_max: f64) -> Option<f64> {
    let gap = |t: f64| one_mode_nu_at(a, gamma, t) - one_mode_nu_at(b, gamma, t);
    let samples = 512;
    let g0 = gap(0.0);
    let (mut lo, mut hi) = (0..=samples)
        .map(|i| t_max * i as f64 / samples as f64)
        .collect::<Vec<_>>()
        .windows(2)
        .find(|w| gap(w[1]).signum() != g0.signum())
        .map(|w| (w[0], w[1]))?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid).signum() == g0.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Random mixed state `T(⊕ν_k I₂)Tᵀ` with `T = exp(σX)`, `X` symmetric with
/// entries in `[−spread, spread]` and `ν_k` uniform in `[nu_min, nu_max]`.
pub fn random_mixed_state<R: rand::Rng>(rng: &mut R, n_modes: usize, nu_min: f64, nu_max: f64, spread: f64) -> Result<CovarianceMatrix> {
    if n_modes == 0 || !(1.0 <= nu_min && nu_min <= nu_max) {
        return Err(Error::InvalidArgument(format!("need N ≥ 1 and 1 ≤ ν_min ≤ ν_max, got N={n_modes}, [{nu_min}, {nu_max}]")));
    }
    let dim = 2 * n_modes;
    let mut x = RMat::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v = rng.gen_range(-spread..=spread);
            x[(i, j)] = v;
            x[(j, i)] = v;
        }
    }
    let sigma = symplectic_form(n_modes)?.into_matrix();
    let t = (sigma * x).exp();
    let nus: Vec<f64> = (0..n_modes).map(|_| rng.gen_range(nu_min..=nu_max)).collect();
    CovarianceMatrix::new(block_scalar(&nus))?.congruence(&t)
}

pub fn uniform_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![t0],
        _ => (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pure_loss_path, squeezed_thermal, SqueezedThermalParams};
    use crate::one_mode::z_min_exact;
    use crate::symplectic::symplectic_residual;
    use proptest::prelude::*;

    fn st(nu: f64, r: f64) -> CovarianceMatrix {
        squeezed_thermal(&SqueezedThermalParams::new(nu, r).unwrap())
    }

    fn product(parts: &[(f64, f64)]) -> CovarianceMatrix {
        let blocks: Vec<CovarianceMatrix> = parts.iter().map(|&(nu, r)| st(nu, r)).collect();
        CovarianceMatrix::direct_sum(&blocks).unwrap()
    }

    /// One-mode `x` of `Γ_t` from its entries.
    fn one_mode_x(g: &RMat) -> f64 {
        0.5 * (g[(0, 0)] + g[(1, 1)]) / g.determinant()
    }

    #[test]
    fn one_mode_path_matches_closed_form() {
        let g0 = st(2.5, 0.8);
        let times = uniform_times(0.05, 1.0, 20);
        let frame = build_moving_frame(&g0, 1.0, &times).unwrap();
        for i in 0..frame.len() {
            let gt = pure_loss_path(&g0, 1.0, times[i]).unwrap();
            let x = one_mode_x(gt.data());
            assert!((frame.instant(i).x_star[0] - x).abs() < 1e-9);
            let nu = gt.data().determinant().sqrt();
            let r = 0.25 * (gt.data()[(0, 0)] / gt.data()[(1, 1)]).ln();
            let z = z_min_exact(&SqueezedThermalParams::new(nu, r).unwrap(), 1.0).unwrap().z_min;
            let opt = multimode_optimum(&frame, i).unwrap();
            assert!((opt.total - z).abs() < 1e-9 * z.max(1.0));
            assert!(opt.matching_residual < 1e-8, "{}", opt.matching_residual);
            assert!(opt.cp_margin > -1e-10);
        }
    }

    #[test]
    fn thermal_product_keeps_identity_order() {
        let g0 = CovarianceMatrix::new(RMat::from_diagonal(&DVector::from_vec(vec![3.0, 3.0, 5.0, 5.0]))).unwrap();
        let times = uniform_times(0.0, 1.0, 11);
        let frame = build_moving_frame(&g0, 1.0, &times).unwrap();
        for i in 0..frame.len() {
            let inst = frame.instant(i);
            for k in 0..2 {
                assert!((inst.x_star[k] - 1.0 / inst.nu[k]).abs() < 1e-12);
            }
            // mode 0 tracks the ν=5 block throughout
            assert!(inst.vectors[0][2].norm() + inst.vectors[0][3].norm() > 0.99);
            assert!(inst.nu[0] > inst.nu[1]);
        }
    }

    #[test]
    fn frame_is_williamson_everywhere() {
        let g0 = product(&[(4.0, 0.3), (2.0, 1.2)]);
        let times = uniform_times(0.02, 1.5, 40);
        let frame = build_moving_frame(&g0, 1.0, &times).unwrap();
        for inst in frame.instants() {
            assert!(symplectic_residual(&inst.frame) < 1e-9);
            let rec = &inst.frame * block_scalar(&inst.nu) * inst.frame.transpose();
            assert!((rec - &inst.covariance).norm() / inst.covariance.norm() < 1e-9);
        }
    }

    fn crossing_time() -> f64 {
        let gap = |t: f64| {
            let a = pure_loss_path(&st(4.0, 0.3), 1.0, t).unwrap().data().determinant().sqrt();
            let b = pure_loss_path(&st(2.0, 1.2), 1.0, t).unwrap().data().determinant().sqrt();
            a - b
        };
        let (mut lo, mut hi) = (0.0, 5.0);
        assert!(gap(lo) > 0.0 && gap(hi) < 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn fixture_crossing_matches_determinant_bisection() {
        let fx = crossing_fixture(1.0).unwrap();
        assert!((fx.t_cross - crossing_time()).abs() < 1e-12);
        let nu = one_mode_nu_at(&fx.modes[0], 1.0, fx.t_cross);
        assert!((nu - one_mode_nu_at(&fx.modes[1], 1.0, fx.t_cross)).abs() < 1e-12);
        assert!((nu - 2.6169).abs() < 1e-3, "{nu}");
        let slow = crossing_fixture(0.5).unwrap();
        assert!((slow.t_cross - 2.0 * fx.t_cross).abs() < 1e-10);
    }

    #[test]
    fn random_state_has_requested_spectrum() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..=4 {
            let g = random_mixed_state(&mut rng, n, 1.2, 3.0, 0.4).unwrap();
            let w = g.williamson().unwrap();
            assert!(w.nu.iter().all(|&v| (1.2 - 1e-9..=3.0 + 1e-9).contains(&v)), "{:?}", w.nu);
        }
    }

    #[test]
    fn frame_is_continuous_through_a_crossing() {
        let tc = crossing_time();
        let g0 = product(&[(4.0, 0.3), (2.0, 1.2)]);
        let dt = 0.01;
        let times = uniform_times(tc - 0.3, tc + 0.3, 61);
        let frame = build_moving_frame(&g0, 1.0, &times).unwrap();
        assert!(frame.max_jump_rate() * dt <= 10.0 * dt);
        // mode identities survive the crossing
        let first = frame.instant(0);
        let last = frame.instant(frame.len() - 1);
        assert!(first.nu[0] > first.nu[1]);
        assert!(last.nu[0] < last.nu[1]);
        // product state: the total is the sum of the one-mode optima
        for (i, &t) in times.iter().enumerate() {
            let opt = multimode_optimum(&frame, i).unwrap();
            let expected: f64 = [(4.0, 0.3), (2.0, 1.2)]
                .iter()
                .map(|&(nu, r)| {
                    let g = pure_loss_path(&st(nu, r), 1.0, t).unwrap();
                    let d = g.data();
                    let nu_t = d.determinant().sqrt();
                    let r_t = 0.25 * (d[(0, 0)] / d[(1, 1)]).ln();
                    z_min_exact(&SqueezedThermalParams::new(nu_t, r_t).unwrap(), 1.0).unwrap().z_min
                })
                .sum();
            assert!((opt.total - expected).abs() < 1e-9 * expected.max(1.0));
            assert!(opt.matching_residual < 1e-7, "{}", opt.matching_residual);
        }
    }

    #[test]
    fn cost_is_continuous_at_the_crossing() {
        let tc = crossing_time();
        let g0 = product(&[(4.0, 0.3), (2.0, 1.2)]);
        let frame = build_moving_frame(&g0, 1.0, &[tc - 1e-7, tc + 1e-7]).unwrap();
        let l = multimode_optimum(&frame, 0).unwrap();
        let r = multimode_optimum(&frame, 1).unwrap();
        assert!((l.total - r.total).abs() < 1e-6);
        assert!(l.matching_residual < 1e-7 && r.matching_residual < 1e-7);
    }

    #[test]
    fn uncorrelated_squeezed_product_uses_one_mode_x() {
        let g0 = product(&[(3.0, 0.5), (1.5, 1.0)]);
        let times = [0.1, 0.4];
        let frame = build_moving_frame(&g0, 1.0, &times).unwrap();
        let mut expected: Vec<f64> = [(3.0, 0.5), (1.5, 1.0)]
            .iter()
            .map(|&(nu, r)| one_mode_x(pure_loss_path(&st(nu, r), 1.0, 0.4).unwrap().data()))
            .collect();
        let mut got = frame.instant(1).x_star.clone();
        expected.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9);
        }
        let opt = multimode_optimum(&frame, 1).unwrap();
        let single: f64 = [(3.0, 0.5), (1.5, 1.0)]
            .iter()
            .map(|&(nu, r)| {
                let f = build_moving_frame(&st(nu, r), 1.0, &times).unwrap();
                multimode_optimum(&f, 1).unwrap().total
            })
            .sum();
        assert!((opt.total - single).abs() < 1e-10);
    }

    #[test]
    fn isotropic_thermal_cluster() {
        let g0 = CovarianceMatrix::new(RMat::identity(6, 6) * 4.0).unwrap();
        let frame = build_moving_frame(&g0, 1.0, &[0.0, 0.5]).unwrap();
        for inst in frame.instants() {
            assert_eq!(inst.clusters.len(), 1);
            for &x in &inst.x_star {
                assert!((x - 1.0 / inst.nu[0]).abs() < 1e-12);
            }
        }
    }

    /// `exp` of `σX` for a symmetric `X` mixing modes 0 and 1 passively.
    fn beam_splitter(theta: f64) -> RMat {
        let (c, s) = (theta.cos(), theta.sin());
        let mut b = RMat::zeros(4, 4);
        for q in 0..2 {
            b[(q, q)] = c;
            b[(q, 2 + q)] = s;
            b[(2 + q, q)] = -s;
            b[(2 + q, 2 + q)] = c;
        }
        b
    }

    #[test]
    fn degenerate_cluster_uses_eigenvalues_not_diagonal() {
        // equal ν, different squeezing, mixed by a passive rotation
        let base = product(&[(2.0, 0.6), (2.0, 0.1)]);
        let g0 = base.congruence(&beam_splitter(0.4)).unwrap();
        let frame = build_moving_frame(&g0, 1.0, &[0.0, 0.01]).unwrap();
        let inst = frame.instant(0);
        let mut got = inst.x_star.clone();
        got.sort_by(f64::total_cmp);
        let mut truth = vec![(1.2f64).cosh() / 2.0, (0.2f64).cosh() / 2.0];
        truth.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-10);
        }
        // Schur-convexity: eigenvalues cost at least as much as any diagonal
        let res = cluster_resolution(&frame, 0);
        assert_eq!(res.clusters.len(), 1);
        let h = &res.hermitian[0];
        let rot = CMat::from_row_slice(2, 2, &[C64::new(0.8, 0.0), C64::new(0.6, 0.0), C64::new(-0.6, 0.0), C64::new(0.8, 0.0)]);
        let hr = rot.adjoint() * h * &rot;
        let f = |x: f64| branch_cost(2.0, x, 1.0).unwrap();
        let eig_cost: f64 = got.iter().map(|&x| f(x)).sum();
        let diag_cost = f(hr[(0, 0)].re) + f(hr[(1, 1)].re);
        assert!(eig_cost >= diag_cost - 1e-12);
    }

    #[test]
    fn sources_examples() {
        let g0 = st(3.0, 0.0);
        let frame = build_moving_frame(&g0, 1.0, &uniform_times(0.0, 0.01, 11)).unwrap();
        assert!((scalar_sources(&frame, 0)[0] - 4.0).abs() < 1e-12);
        let pureish = st(1.0 + 1e-6, 0.7);
        let frame = build_moving_frame(&pureish, 1.0, &[0.0, 1e-3]).unwrap();
        assert!(scalar_sources(&frame, 0)[0] < 0.0);
        let on_boundary = st(2.0_f64.cosh(), 1.0);
        let frame = build_moving_frame(&on_boundary, 1.0, &[0.0, 1e-3]).unwrap();
        assert!(scalar_sources(&frame, 0)[0].abs() < 1e-12);
    }

    #[test]
    fn sources_match_spectral_velocity() {
        let g0 = product(&[(3.0, 0.5), (1.5, 1.0)]);
        let worst: Vec<f64> = [41, 81]
            .iter()
            .map(|&n| {
                let frame = build_moving_frame(&g0, 1.0, &uniform_times(0.1, 0.5, n)).unwrap();
                (1..frame.len() - 1).map(|i| source_consistency(&frame, i)).fold(0.0, f64::max)
            })
            .collect();
        // central differences: second order
        let ratio = worst[0] / worst[1];
        assert!(worst[0] < 1e-2 && (3.0..5.0).contains(&ratio), "{worst:?}");
    }

    #[test]
    fn kinematic_identity_holds_in_forward_time() {
        let g0 = product(&[(4.0, 0.3), (2.0, 1.2)]).congruence(&beam_splitter(0.3)).unwrap();
        let frame = build_moving_frame(&g0, 1.0, &uniform_times(0.1, 0.6, 51)).unwrap();
        for i in 1..frame.len() - 1 {
            let fine = kinematic_residual_of(&frame, i, frame.fine_velocity(i).unwrap());
            assert!(fine < 1e-7, "{fine}");
            assert!(kinematic_residual(&frame, i) < 1e-3);
        }
    }

    #[test]
    fn integrated_action_examples() {
        let g0 = st(3.0, 0.0);
        let times = uniform_times(0.1, 1.0, 401);
        let frame = build_moving_frame_with(&g0, 1.0, &times, FrameOptions { fine_velocity: false, ..Default::default() }).unwrap();
        let action = integrated_action(&frame, 0.1, 1.0).unwrap();
        // Simpson quadrature of the closed form along the path
        let f = |t: f64| {
            let nu = 3.0 * (-2.0 * t).exp() + 1.0 - (-2.0 * t).exp();
            4.0 * (1.0 - 1.0 / nu) / (nu + 1.0)
        };
        let n = 2000;
        let h = 0.9 / n as f64;
        let simpson: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w * f(0.1 + i as f64 * h)
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((action - simpson).abs() < 1e-5);
        assert!(integrated_action(&frame, 0.05, 1.0).is_err());
        assert!(integrated_action(&frame, 0.5, 0.2).is_err());
        let partial = integrated_action(&frame, 0.1003, 0.5).unwrap();
        assert!(partial > 0.0 && partial < action);
    }

    #[test]
    fn pure_endpoint_requires_positive_times() {
        let g0 = st(1.0, 0.5);
        assert!(build_moving_frame(&g0, 1.0, &[0.0, 0.1]).is_err());
        let frame = build_moving_frame(&g0, 1.0, &[1e-3, 1e-2]).unwrap();
        assert!(multimode_optimum(&frame, 0).unwrap().total > 100.0);
    }

    #[test]
    fn rejects_bad_grids() {
        let g0 = st(2.0, 0.1);
        assert!(build_moving_frame(&g0, 1.0, &[]).is_err());
        assert!(build_moving_frame(&g0, 1.0, &[0.2, 0.1]).is_err());
        assert!(matches!(build_moving_frame(&g0, 1.0, &[-0.1, 0.1]), Err(Error::NegativeTime(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn total_cost_is_gauge_invariant(theta in 0.0f64..6.28, nu in 1.3f64..5.0, r1 in 0.0f64..1.2, r2 in 0.0f64..1.2) {
            let base = product(&[(nu, r1), (nu, r2)]);
            let rotated = base.congruence(&beam_splitter(theta)).unwrap();
            let times = [0.0, 0.2];
            let opts = FrameOptions { fine_velocity: false, ..Default::default() };
            let a = build_moving_frame_with(&base, 1.0, &times, opts).unwrap();
            let b = build_moving_frame_with(&rotated, 1.0, &times, opts).unwrap();
            for i in 0..2 {
                let (ca, cb) = (additive_cost(&a, i).unwrap(), additive_cost(&b, i).unwrap());
                prop_assert!((ca - cb).abs() <= 1e-8 * ca.max(1e-12), "{} vs {}", ca, cb);
            }
        }
    }
}
