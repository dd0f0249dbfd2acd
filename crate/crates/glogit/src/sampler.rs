//! The Pólya-Gamma Gibbs sampler: full-conditional updates for the latent
//! utilities `Z`, the PG auxiliaries `ω`, the coefficients `β`, and a
//! slice-sampling update for the tail parameter `p`.
//!
//! Each sweep scans Z → ω → β → p. With `p` fixed the p-update is skipped
//! and the augmented posterior reduces to the three-block scheme; with a
//! Gamma prior on `p` the ω's are integrated out of the p-conditional and
//! the resulting marginalized density is slice-sampled with numerically
//! inverted level-set endpoints.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::model::{mle_fit, Dataset, ModelParams, PMode};
use crate::specfun::{find_root, log1p_exp, log_beta, RealInterval};
use crate::stochastics::{sample_trunc_normal, PgSampler, RngStream, TruncationSide};

/// Prior on the tail parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PPrior {
    /// Known tail parameter; the sampler never moves it.
    Fixed(f64),
    /// Gamma(shape, rate) prior.
    Gamma { shape: f64, rate: f64 },
}

/// Priors for the β block and the tail parameter.
#[derive(Debug, Clone)]
pub struct Priors {
    beta_mean: DVector<f64>,
    beta_cov: DMatrix<f64>,
    p_prior: PPrior,
}

impl Priors {
    pub fn new(beta_mean: DVector<f64>, beta_cov: DMatrix<f64>, p_prior: PPrior) -> Result<Self> {
        let k = beta_mean.len();
        if beta_cov.nrows() != k || beta_cov.ncols() != k {
            return Err(Error::DimensionMismatch(format!(
                "beta_mean has length {k} but beta_cov is {}x{}",
                beta_cov.nrows(),
                beta_cov.ncols()
            )));
        }
        if Cholesky::new(beta_cov.clone()).is_none() {
            return Err(Error::NotPositiveDefinite("prior covariance".into()));
        }
        match p_prior {
            PPrior::Fixed(p) if !(p > 0.0 && p.is_finite()) => {
                return Err(Error::domain("Priors", format!("fixed p must be > 0, got {p}")));
            }
            PPrior::Gamma { shape, rate }
                if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) =>
            {
                return Err(Error::domain(
                    "Priors",
                    format!("Gamma hyperparameters must be > 0, got ({shape}, {rate})"),
                ));
            }
            _ => {}
        }
        Ok(Self {
            beta_mean,
            beta_cov,
            p_prior,
        })
    }

    /// The vague prior of the simulation study: `β ~ N(0, v·I_k)`.
    pub fn vague(k: usize, prior_var: f64, p_prior: PPrior) -> Result<Self> {
        if !(prior_var > 0.0 && prior_var.is_finite()) {
            return Err(Error::domain(
                "Priors",
                format!("prior variance must be > 0, got {prior_var}"),
            ));
        }
        Self::new(
            DVector::zeros(k),
            DMatrix::identity(k, k) * prior_var,
            p_prior,
        )
    }

    pub fn beta_mean(&self) -> &DVector<f64> {
        &self.beta_mean
    }

    pub fn beta_cov(&self) -> &DMatrix<f64> {
        &self.beta_cov
    }

    pub fn p_prior(&self) -> PPrior {
        self.p_prior
    }

    pub fn k(&self) -> usize {
        self.beta_mean.len()
    }
}

/// Chain initialization strategy.
#[derive(Debug, Clone)]
pub enum Init {
    /// β = 0, p = 1 (or the fixed p).
    Zero,
    /// Start from the simplex MLE fit.
    Mle,
    /// Start from the given parameters.
    Explicit(ModelParams),
}

/// Run-length, seeding and tuning knobs for [`run_chain`].
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Stream id; give each concurrent chain a distinct one.
    pub stream_id: u64,
    pub init: Init,
    /// Search range for the slice-sampling update of p.
    pub p_bounds: RealInterval,
}

impl SamplerConfig {
    pub fn new(n_iter: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            n_iter,
            burn_in,
            thin: 1,
            seed,
            stream_id: 0,
            init: Init::Zero,
            p_bounds: default_p_bounds(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.n_iter {
            return Err(Error::InvalidConfig(format!(
                "burn_in ({}) must be < n_iter ({})",
                self.burn_in, self.n_iter
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be ≥ 1".into()));
        }
        if self.p_bounds.lo() <= 0.0 {
            return Err(Error::InvalidConfig(
                "p_bounds must lie strictly inside (0, ∞)".into(),
            ));
        }
        Ok(())
    }
}

/// Default slice-search range for p: generous around the study grid while
/// keeping B(p, p) numerically tame.
pub fn default_p_bounds() -> RealInterval {
    RealInterval::new(0.01, 50.0).expect("static bounds")
}

/// Current values of the four variable blocks.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub beta: DVector<f64>,
    pub p: f64,
    pub z: DVector<f64>,
    pub omega: DVector<f64>,
}

/// Metadata recorded alongside the stored draws.
#[derive(Debug, Clone)]
pub struct ChainMeta {
    pub config: SamplerConfig,
    pub priors: Priors,
    pub dataset_digest: String,
    pub elapsed_secs: f64,
    /// Slice updates that needed the stepping-out fallback.
    pub slice_fallbacks: u64,
}

/// Stored post-burn-in, post-thinning draws of (β, p).
#[derive(Debug, Clone)]
pub struct Chain {
    k: usize,
    iters: Vec<u64>,
    beta_draws: Vec<f64>, // row-major, len = len() * k
    p_draws: Vec<f64>,
    meta: ChainMeta,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.p_draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_draws.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Original sweep numbers of the stored draws (strictly increasing).
    pub fn iters(&self) -> &[u64] {
        &self.iters
    }

    pub fn beta_row(&self, i: usize) -> &[f64] {
        &self.beta_draws[i * self.k..(i + 1) * self.k]
    }

    pub fn beta_column(&self, j: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.beta_draws[i * self.k + j]).collect()
    }

    pub fn p_draws(&self) -> &[f64] {
        &self.p_draws
    }

    pub fn meta(&self) -> &ChainMeta {
        &self.meta
    }

    /// `beta_0, …, beta_{k−1}, p`.
    pub fn param_names(&self) -> Vec<String> {
        (0..self.k)
            .map(|j| format!("beta_{j}"))
            .chain(std::iter::once("p".to_string()))
            .collect()
    }

    /// Column by summary position: the k beta columns, then p.
    pub fn column(&self, idx: usize) -> Vec<f64> {
        if idx < self.k {
            self.beta_column(idx)
        } else {
            self.p_draws.clone()
        }
    }

    pub fn posterior_mean_beta(&self) -> DVector<f64> {
        let mut acc = DVector::zeros(self.k);
        for i in 0..self.len() {
            for j in 0..self.k {
                acc[j] += self.beta_draws[i * self.k + j];
            }
        }
        acc / self.len() as f64
    }

    pub fn posterior_mean_p(&self) -> f64 {
        self.p_draws.iter().sum::<f64>() / self.len() as f64
    }
}

/// Redraw every latent utility from its truncated-normal full conditional
/// `N(x_iᵀβ, ω_i⁻¹)`, truncated left of 0 for `y_i = 1` and right of 0 for
/// `y_i = 0`.
pub fn update_z(state: &mut ChainState, data: &Dataset, rng: &mut RngStream) -> Result<()> {
    let eta = data.linear_predictor(&state.beta)?;
    for i in 0..data.n() {
        let side = if data.y()[i] == 1 {
            TruncationSide::LeftAtZero
        } else {
            TruncationSide::RightAtZero
        };
        state.z[i] = sample_trunc_normal(eta[i], 1.0 / state.omega[i], side, rng)?;
    }
    Ok(())
}

/// Redraw every PG auxiliary from `PG(2p, Z_i − x_iᵀβ)`.
pub fn update_omega(state: &mut ChainState, data: &Dataset, rng: &mut RngStream) -> Result<()> {
    let pg = PgSampler::new(2.0 * state.p)?;
    let eta = data.linear_predictor(&state.beta)?;
    for i in 0..data.n() {
        state.omega[i] = pg.draw(state.z[i] - eta[i], rng);
    }
    Ok(())
}

/// Mean and precision Cholesky factor of the conjugate β full conditional:
/// mean `(XᵀΩX + B⁻¹)⁻¹ (XᵀΩZ + B⁻¹β*)`, covariance `(XᵀΩX + B⁻¹)⁻¹`.
/// All solves go through the triangular factor; nothing is inverted
/// explicitly.
pub fn beta_full_conditional(
    data: &Dataset,
    omega: &DVector<f64>,
    z: &DVector<f64>,
    priors: &Priors,
) -> Result<(DVector<f64>, Cholesky<f64, Dyn>)> {
    let (n, k) = (data.n(), data.k());
    if priors.k() != k {
        return Err(Error::DimensionMismatch(format!(
            "prior dimension {} does not match k = {k}",
            priors.k()
        )));
    }
    if omega.len() != n || z.len() != n {
        return Err(Error::DimensionMismatch(
            "omega/z length does not match the dataset".into(),
        ));
    }
    let prior_chol = Cholesky::new(priors.beta_cov.clone())
        .ok_or_else(|| Error::NotPositiveDefinite("prior covariance".into()))?;
    // B⁻¹ and B⁻¹β* via the prior factor
    let prior_precision = prior_chol.inverse();
    let prior_precision_mean = prior_chol.solve(&priors.beta_mean);

    let x = data.x();
    let mut xo = x.clone();
    for i in 0..n {
        let w = omega[i];
        xo.row_mut(i).scale_mut(w);
    }
    let precision = x.transpose() * &xo + &prior_precision;
    let rhs = x.transpose() * omega.component_mul(z) + prior_precision_mean;
    let chol = Cholesky::new(precision).ok_or_else(|| {
        Error::NotPositiveDefinite("XᵀΩX + B⁻¹ is numerically singular".into())
    })?;
    let mean = chol.solve(&rhs);
    Ok((mean, chol))
}

/// Redraw β from its multivariate-normal full conditional.
pub fn update_beta(
    state: &mut ChainState,
    data: &Dataset,
    priors: &Priors,
    rng: &mut RngStream,
) -> Result<()> {
    let (mean, chol) = beta_full_conditional(data, &state.omega, &state.z, priors)?;
    let k = mean.len();
    let white = DVector::from_fn(k, |_, _| rng.standard_normal());
    // precision = L Lᵀ ⇒ β = mean + L⁻ᵀ white has covariance (L Lᵀ)⁻¹
    let corr = chol
        .l()
        .tr_solve_lower_triangular(&white)
        .ok_or_else(|| Error::NotPositiveDefinite("triangular solve failed".into()))?;
    state.beta = mean + corr;
    Ok(())
}

/// Precomputed residual sums for repeated evaluation of the marginalized
/// p-conditional inside one slice update.
struct CondPSums {
    n: f64,
    sum_eta: f64,
    sum_softplus: f64,
    prior_shape: f64,
    prior_rate: f64,
}

impl CondPSums {
    fn new(residuals: &[f64], prior_shape: f64, prior_rate: f64) -> Self {
        Self {
            n: residuals.len() as f64,
            sum_eta: residuals.iter().sum(),
            sum_softplus: residuals.iter().map(|&e| log1p_exp(e)).sum(),
            prior_shape,
            prior_rate,
        }
    }

    /// `(a−1)·ln p − b·p − n·ln B(p,p) + p·Ση − 2p·Σ ln(1+e^η)`, up to a
    /// constant; −∞ outside the domain.
    fn log_density(&self, p: f64) -> f64 {
        match log_beta(p, p) {
            Ok(lb) => {
                (self.prior_shape - 1.0) * p.ln() - self.prior_rate * p - self.n * lb
                    + p * self.sum_eta
                    - 2.0 * p * self.sum_softplus
            }
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

fn gamma_hyper(priors: &Priors, func: &'static str) -> Result<(f64, f64)> {
    match priors.p_prior {
        PPrior::Gamma { shape, rate } => Ok((shape, rate)),
        PPrior::Fixed(_) => Err(Error::InvalidConfig(format!(
            "{func} requires a Gamma prior on p (p is fixed)"
        ))),
    }
}

/// Log of the marginalized full conditional of p (ω integrated out), up to
/// an additive constant, evaluated at residuals `η_i = Z_i − x_iᵀβ`.
pub fn log_cond_p(p: f64, residuals: &[f64], priors: &Priors) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain("log_cond_p", format!("p must be > 0, got {p}")));
    }
    let (a, b) = gamma_hyper(priors, "log_cond_p")?;
    Ok(CondPSums::new(residuals, a, b).log_density(p))
}

/// Endpoint tolerance for the slice level-set inversion.
const SLICE_ROOT_TOL: f64 = 1e-8;
const SLICE_MAX_SHRINK: usize = 1000;
const STEP_OUT_WIDTH: f64 = 1.0;
const STEP_OUT_MAX: usize = 64;

/// One slice-sampling update of p on its marginalized conditional.
///
/// Draws the level `u`, locates the level-set endpoints on each side of the
/// current p by root finding inside `p_bounds` (an endpoint falls back to
/// the bound when the density stays above the level there), then samples
/// uniformly with shrinkage. Returns `true` when the root search failed and
/// Neal's stepping-out procedure was used instead.
pub fn update_p_slice(
    state: &mut ChainState,
    data: &Dataset,
    priors: &Priors,
    p_bounds: RealInterval,
    rng: &mut RngStream,
) -> Result<bool> {
    let (a, b) = gamma_hyper(priors, "update_p_slice")?;
    let eta = data.linear_predictor(&state.beta)?;
    let residuals: Vec<f64> = (0..data.n()).map(|i| state.z[i] - eta[i]).collect();
    let cond = CondPSums::new(&residuals, a, b);

    let (lo, hi) = (p_bounds.lo(), p_bounds.hi());
    let p0 = state.p.clamp(lo, hi);
    let level = cond.log_density(p0) + rng.uniform().ln();
    let mut used_fallback = false;

    let mut left = lo;
    if cond.log_density(lo) - level < 0.0 && p0 > lo {
        let bracket = RealInterval::new(lo, p0)?;
        left = match find_root(|x| cond.log_density(x) - level, bracket, SLICE_ROOT_TOL) {
            Ok(x) => x,
            Err(_) => {
                used_fallback = true;
                step_out_left(&cond, level, p0, lo, rng)
            }
        };
    }
    let mut right = hi;
    if cond.log_density(hi) - level < 0.0 && p0 < hi {
        let bracket = RealInterval::new(p0, hi)?;
        right = match find_root(|x| cond.log_density(x) - level, bracket, SLICE_ROOT_TOL) {
            Ok(x) => x,
            Err(_) => {
                used_fallback = true;
                step_out_right(&cond, level, p0, hi, rng)
            }
        };
    }

    // uniform draw over the located interval, shrinking on rejection
    for _ in 0..SLICE_MAX_SHRINK {
        let x = left + rng.uniform() * (right - left);
        if cond.log_density(x) >= level {
            state.p = x;
            return Ok(used_fallback);
        }
        if x < p0 {
            left = x;
        } else {
            right = x;
        }
    }
    // interval collapsed onto p0; keep the current value
    Ok(used_fallback)
}

fn step_out_left(cond: &CondPSums, level: f64, p0: f64, lo: f64, rng: &mut RngStream) -> f64 {
    let mut l = (p0 - STEP_OUT_WIDTH * rng.uniform()).max(lo);
    for _ in 0..STEP_OUT_MAX {
        if l <= lo || cond.log_density(l) < level {
            break;
        }
        l = (l - STEP_OUT_WIDTH).max(lo);
    }
    l
}

fn step_out_right(cond: &CondPSums, level: f64, p0: f64, hi: f64, rng: &mut RngStream) -> f64 {
    let mut r = (p0 + STEP_OUT_WIDTH * rng.uniform()).min(hi);
    for _ in 0..STEP_OUT_MAX {
        if r >= hi || cond.log_density(r) < level {
            break;
        }
        r = (r + STEP_OUT_WIDTH).min(hi);
    }
    r
}

/// Run the full Gibbs sampler and collect the post-burn-in draws.
///
/// Initializes (β, p) per `config.init`, the latent `Z` by one
/// truncated-normal pass at ω = 1, and ω by one PG pass; then sweeps
/// Z → ω → β → (p if free) for `n_iter` iterations. Fully deterministic
/// given `(seed, stream_id)`.
pub fn run_chain(data: &Dataset, priors: &Priors, config: &SamplerConfig) -> Result<Chain> {
    config.validate()?;
    let (n, k) = (data.n(), data.k());
    if priors.k() != k {
        return Err(Error::DimensionMismatch(format!(
            "prior dimension {} does not match k = {k}",
            priors.k()
        )));
    }
    if !data.has_both_classes() {
        return Err(Error::InvalidData(
            "response is all one class; the posterior is degenerate".into(),
        ));
    }
    let p_free = matches!(priors.p_prior, PPrior::Gamma { .. });
    let started = Instant::now();
    let mut rng = RngStream::new(config.seed, config.stream_id);

    let (beta0, p_init) = match &config.init {
        Init::Zero => (DVector::zeros(k), 1.0),
        Init::Mle => {
            let p_mode = match priors.p_prior {
                PPrior::Fixed(p) => PMode::Fixed(p),
                PPrior::Gamma { .. } => PMode::Free,
            };
            let fit = mle_fit(data, p_mode)?;
            (fit.params.beta().clone(), fit.params.p())
        }
        Init::Explicit(params) => {
            if params.beta().len() != k {
                return Err(Error::DimensionMismatch(
                    "explicit init has the wrong dimension".into(),
                ));
            }
            (params.beta().clone(), params.p())
        }
    };
    let p0 = match priors.p_prior {
        PPrior::Fixed(p) => p,
        PPrior::Gamma { .. } => p_init.clamp(config.p_bounds.lo(), config.p_bounds.hi()),
    };

    let mut state = ChainState {
        beta: beta0,
        p: p0,
        z: DVector::zeros(n),
        omega: DVector::from_element(n, 1.0),
    };
    update_z(&mut state, data, &mut rng).map_err(|e| Error::AtSweep {
        sweep: 0,
        source: Box::new(e),
    })?;
    update_omega(&mut state, data, &mut rng).map_err(|e| Error::AtSweep {
        sweep: 0,
        source: Box::new(e),
    })?;

    let n_keep = (config.n_iter - config.burn_in) / config.thin;
    let mut iters = Vec::with_capacity(n_keep);
    let mut beta_draws = Vec::with_capacity(n_keep * k);
    let mut p_draws = Vec::with_capacity(n_keep);
    let mut slice_fallbacks = 0u64;

    for sweep in 1..=config.n_iter {
        sweep_once(
            &mut state,
            data,
            priors,
            config.p_bounds,
            p_free,
            &mut slice_fallbacks,
            &mut rng,
        )
        .map_err(|e| Error::AtSweep {
            sweep,
            source: Box::new(e),
        })?;
        if sweep > config.burn_in && (sweep - config.burn_in).is_multiple_of(config.thin) {
            iters.push(sweep as u64);
            beta_draws.extend(state.beta.iter());
            p_draws.push(state.p);
        }
    }

    Ok(Chain {
        k,
        iters,
        beta_draws,
        p_draws,
        meta: ChainMeta {
            config: config.clone(),
            priors: priors.clone(),
            dataset_digest: data.digest(),
            elapsed_secs: started.elapsed().as_secs_f64(),
            slice_fallbacks,
        },
    })
}

fn sweep_once(
    state: &mut ChainState,
    data: &Dataset,
    priors: &Priors,
    p_bounds: RealInterval,
    p_free: bool,
    slice_fallbacks: &mut u64,
    rng: &mut RngStream,
) -> Result<()> {
    update_z(state, data, rng)?;
    update_omega(state, data, rng)?;
    update_beta(state, data, priors, rng)?;
    if p_free && update_p_slice(state, data, priors, p_bounds, rng)? {
        *slice_fallbacks += 1;
    }
    Ok(())
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::model::simulate_dataset;
    use crate::stochastics::PG_FLOOR;
    use approx::assert_abs_diff_eq;

    fn tiny_dataset(n: usize, y: u8) -> Dataset {
        // intercept-only design with constant response
        Dataset::new(DMatrix::from_element(n, 1, 1.0), vec![y; n]).unwrap()
    }

    fn mixed_dataset() -> Dataset {
        let mut rng = RngStream::new(17, 0);
        let beta = DVector::from_column_slice(&[0.5, -1.0]);
        simulate_dataset(&beta, 0.7, 60, &mut rng).unwrap()
    }

    fn state_for(data: &Dataset) -> ChainState {
        ChainState {
            beta: DVector::zeros(data.k()),
            p: 1.0,
            z: DVector::zeros(data.n()),
            omega: DVector::from_element(data.n(), 1.0),
        }
    }

    #[test]
    fn update_z_respects_signs_and_half_normal_mean() {
        let data = tiny_dataset(64, 1);
        let mut state = state_for(&data);
        let mut rng = RngStream::new(1, 0);
        // β = 0 so x'β = 0, ω = 1: draws are half-normal
        let mut acc = 0.0;
        let reps = 2000;
        for _ in 0..reps {
            update_z(&mut state, &data, &mut rng).unwrap();
            assert!(state.z.iter().all(|&z| z > 0.0));
            acc += state.z.iter().sum::<f64>();
        }
        let mean = acc / (reps * data.n()) as f64;
        let want = 0.79788456080286535588;
        assert!((mean - want).abs() < 0.01, "mean {mean} vs {want}");

        // y = 0 side
        let data0 = tiny_dataset(64, 0);
        let mut state0 = state_for(&data0);
        for _ in 0..50 {
            update_z(&mut state0, &data0, &mut rng).unwrap();
            assert!(state0.z.iter().all(|&z| z <= 0.0));
        }
    }

    #[test]
    fn update_z_is_permutation_equivariant() {
        // two datasets that are row permutations of each other: per-row
        // conditional laws must match up to the same permutation
        let x = DMatrix::from_row_slice(4, 1, &[1.0, 2.0, -1.0, 0.5]);
        let d1 = Dataset::new(x, vec![1, 1, 0, 1]).unwrap();
        let xp = DMatrix::from_row_slice(4, 1, &[0.5, -1.0, 2.0, 1.0]);
        let d2 = Dataset::new(xp, vec![1, 0, 1, 1]).unwrap();
        let perm = [3usize, 2, 1, 0]; // d2 row j == d1 row perm[j]

        let beta = DVector::from_column_slice(&[0.7]);
        let reps = 4000;
        let mut m1 = [0.0f64; 4];
        let mut m2 = [0.0f64; 4];
        let mut rng1 = RngStream::new(5, 1);
        let mut rng2 = RngStream::new(5, 2);
        let mut s1 = state_for(&d1);
        let mut s2 = state_for(&d2);
        s1.beta = beta.clone();
        s2.beta = beta;
        for _ in 0..reps {
            update_z(&mut s1, &d1, &mut rng1).unwrap();
            update_z(&mut s2, &d2, &mut rng2).unwrap();
            for i in 0..4 {
                m1[i] += s1.z[i];
                m2[i] += s2.z[i];
            }
        }
        for j in 0..4 {
            let a = m2[j] / reps as f64;
            let b = m1[perm[j]] / reps as f64;
            assert!((a - b).abs() < 0.06, "row {j}: {a} vs {b}");
        }
    }

    #[test]
    fn update_omega_long_run_means() {
        let data = tiny_dataset(50, 1);
        let mut rng = RngStream::new(2, 0);

        // 2p = 1, c = 0: mean 1/4
        let mut state = state_for(&data);
        state.p = 0.5;
        let mut acc = 0.0;
        let reps = 2000;
        for _ in 0..reps {
            update_omega(&mut state, &data, &mut rng).unwrap();
            assert!(state.omega.iter().all(|&w| w >= PG_FLOOR));
            acc += state.omega.iter().sum::<f64>();
        }
        let mean = acc / (reps * data.n()) as f64;
        assert!((mean - 0.25).abs() < 0.005, "mean {mean} vs 0.25");

        // 2p = 0.6, c = 2: mean (0.6/4)·tanh(1)
        let mut state = state_for(&data);
        state.p = 0.3;
        state.z = DVector::from_element(data.n(), 2.0);
        let mut acc = 0.0;
        for _ in 0..reps {
            update_omega(&mut state, &data, &mut rng).unwrap();
            acc += state.omega.iter().sum::<f64>();
        }
        let mean = acc / (reps * data.n()) as f64;
        let want = 0.15 * 1.0f64.tanh();
        assert!((mean - want).abs() < 0.005, "mean {mean} vs {want}");
    }

    #[test]
    fn beta_conditional_scalar_formula() {
        // k = 1, X = [1], Ω = [1], Z = [2], B* = [1], β* = [0]:
        // mean = (1+1)⁻¹(2+0) = 1, variance = 1/2
        let data = tiny_dataset(1, 1);
        let priors = Priors::vague(1, 1.0, PPrior::Fixed(1.0)).unwrap();
        let omega = DVector::from_element(1, 1.0);
        let z = DVector::from_element(1, 2.0);
        let (mean, chol) = beta_full_conditional(&data, &omega, &z, &priors).unwrap();
        assert_abs_diff_eq!(mean[0], 1.0, epsilon = 1e-12);
        // precision = 2 ⇒ L = √2
        assert_abs_diff_eq!(chol.l()[(0, 0)], (2.0f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn beta_conditional_wls_limit() {
        // with a flat prior and square invertible X, the mean tends to X⁻¹Z
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 1.0, -1.5]);
        let data = Dataset::new(x.clone(), vec![1, 0]).unwrap();
        let priors = Priors::vague(2, 1e8, PPrior::Fixed(1.0)).unwrap();
        let omega = DVector::from_element(2, 1.0);
        let z = DVector::from_column_slice(&[0.7, -0.4]);
        let (mean, _) = beta_full_conditional(&data, &omega, &z, &priors).unwrap();
        let direct = x.lu().solve(&z).unwrap();
        for j in 0..2 {
            assert_abs_diff_eq!(mean[j], direct[j], epsilon = 1e-4);
        }
    }

    #[test]
    fn update_beta_sampling_mean_matches_conditional() {
        let data = mixed_dataset();
        let priors = Priors::vague(2, 5.0, PPrior::Fixed(0.7)).unwrap();
        let mut rng = RngStream::new(3, 0);
        let mut state = state_for(&data);
        state.p = 0.7;
        update_z(&mut state, &data, &mut rng).unwrap();
        update_omega(&mut state, &data, &mut rng).unwrap();
        let frozen = state.clone();
        let (want_mean, chol) = beta_full_conditional(&data, &frozen.omega, &frozen.z, &priors).unwrap();
        let cov = chol.inverse();

        let reps = 10_000;
        let mut acc = DVector::zeros(2);
        for _ in 0..reps {
            state.z = frozen.z.clone();
            state.omega = frozen.omega.clone();
            update_beta(&mut state, &data, &priors, &mut rng).unwrap();
            acc += &state.beta;
        }
        let got = acc / reps as f64;
        for j in 0..2 {
            let se = (cov[(j, j)] / reps as f64).sqrt();
            assert!(
                (got[j] - want_mean[j]).abs() < 3.0 * se,
                "component {j}: {} vs {} (se {se})",
                got[j],
                want_mean[j]
            );
        }
    }

    #[test]
    fn log_cond_p_prior_only_and_flat_residuals() {
        let priors = Priors::vague(1, 5.0, PPrior::Gamma { shape: 1.0, rate: 1.0 }).unwrap();
        // n = 0: reduces to the Gamma(1,1) log prior, −p
        for &p in &[0.05, 0.5, 2.0, 10.0] {
            assert_abs_diff_eq!(log_cond_p(p, &[], &priors).unwrap(), -p, epsilon = 1e-12);
        }
        // all residuals zero: data term is −n ln B(p,p) − 2pn ln 2
        let n = 7;
        let resid = vec![0.0; n];
        for &p in &[0.3, 1.0, 4.0] {
            let want = -p - n as f64 * log_beta(p, p).unwrap()
                - 2.0 * p * n as f64 * std::f64::consts::LN_2;
            assert_abs_diff_eq!(log_cond_p(p, &resid, &priors).unwrap(), want, epsilon = 1e-10);
        }
        // fixed-p priors are refused
        let fixed = Priors::vague(1, 5.0, PPrior::Fixed(1.0)).unwrap();
        assert!(log_cond_p(1.0, &[], &fixed).is_err());
        assert!(log_cond_p(-1.0, &[], &priors).is_err());
    }

    /// 1-D adaptive Simpson (test oracle).
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
            let m = 0.5 * (a + b);
            (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
        }
        fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let mid = 0.5 * (a + b);
            let l = rule(f, a, mid);
            let r = rule(f, mid, b);
            if depth == 0 || (l + r - whole).abs() < 15.0 * tol {
                l + r + (l + r - whole) / 15.0
            } else {
                rec(f, a, mid, l, 0.5 * tol, depth - 1) + rec(f, mid, b, r, 0.5 * tol, depth - 1)
            }
        }
        rec(f, a, b, rule(f, a, b), tol, 40)
    }

    /// Quadrature posterior mean and sd of exp(log_cond_p) over the bounds.
    ///
    /// A fine grid scan first localizes the region carrying mass (the
    /// conditional is sharply peaked for long residual vectors, which plain
    /// adaptive quadrature over the full bounds would step right over).
    fn quadrature_p_moments(residuals: &[f64], priors: &Priors, bounds: RealInterval) -> (f64, f64) {
        let grid = 4000;
        let at = |i: usize| bounds.lo() + bounds.width() * (i as f64 + 0.5) / grid as f64;
        let logd: Vec<f64> = (0..grid)
            .map(|i| log_cond_p(at(i), residuals, priors).unwrap())
            .collect();
        let peak = logd.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo_idx = logd.iter().position(|&v| v > peak - 45.0).unwrap();
        let hi_idx = logd.iter().rposition(|&v| v > peak - 45.0).unwrap();
        let plo = at(lo_idx.saturating_sub(1)).max(bounds.lo());
        let phi = at((hi_idx + 1).min(grid - 1)).min(bounds.hi());

        let w = |p: f64| (log_cond_p(p, residuals, priors).unwrap() - peak).exp();
        let panels = 16;
        let step = (phi - plo) / panels as f64;
        let piecewise = |f: &dyn Fn(f64) -> f64| -> f64 {
            (0..panels)
                .map(|j| simpson(&f, plo + j as f64 * step, plo + (j + 1) as f64 * step, 1e-13))
                .sum()
        };
        let z0 = piecewise(&w);
        let m1 = piecewise(&|p| p * w(p)) / z0;
        let m2 = piecewise(&|p| p * p * w(p)) / z0;
        (m1, (m2 - m1 * m1).sqrt())
    }

    fn glog_residuals(p: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = RngStream::new(seed, 0);
        (0..n)
            .map(|_| crate::model::sample_glog(0.0, p, &mut rng).unwrap())
            .collect()
    }

    #[test]
    fn slice_update_tracks_quadrature_posterior_mean() {
        let priors = Priors::vague(1, 5.0, PPrior::Gamma { shape: 1.0, rate: 1.0 }).unwrap();
        let bounds = default_p_bounds();
        let residuals = glog_residuals(0.7, 200, 31);
        let (want_mean, _) = quadrature_p_moments(&residuals, &priors, bounds);

        // freeze residuals in the state: z = residuals, β = 0, intercept-free X
        let x = DMatrix::zeros(200, 1);
        // x all zero is rank-deficient but legal for this state-level test
        let data = Dataset::new(x, residuals.iter().map(|&r| u8::from(r > 0.0)).collect()).unwrap();
        let mut state = ChainState {
            beta: DVector::zeros(1),
            p: 0.7,
            z: DVector::from_column_slice(&residuals),
            omega: DVector::from_element(200, 1.0),
        };
        let mut rng = RngStream::new(32, 0);
        let mut acc = 0.0;
        let reps = 5000;
        let mut fallbacks = 0u64;
        for _ in 0..reps {
            if update_p_slice(&mut state, &data, &priors, bounds, &mut rng).unwrap() {
                fallbacks += 1;
            }
            assert!(bounds.contains(state.p));
            acc += state.p;
        }
        let got = acc / reps as f64;
        assert!(
            (got - want_mean).abs() < 0.1,
            "slice mean {got} vs quadrature {want_mean}"
        );
        assert_eq!(fallbacks, 0, "root-finding endpoints should not fall back");
    }

    #[test]
    fn slice_update_concentrates_with_many_residuals() {
        let priors = Priors::vague(1, 5.0, PPrior::Gamma { shape: 1.0, rate: 1.0 }).unwrap();
        let bounds = default_p_bounds();
        let residuals = glog_residuals(1.5, 5000, 33);
        let (want_mean, want_sd) = quadrature_p_moments(&residuals, &priors, bounds);

        let data = Dataset::new(
            DMatrix::zeros(5000, 1),
            residuals.iter().map(|&r| u8::from(r > 0.0)).collect(),
        )
        .unwrap();
        let mut state = ChainState {
            beta: DVector::zeros(1),
            p: 1.5,
            z: DVector::from_column_slice(&residuals),
            omega: DVector::from_element(5000, 1.0),
        };
        let mut rng = RngStream::new(34, 0);
        let reps = 4000;
        let draws: Vec<f64> = (0..reps)
            .map(|_| {
                update_p_slice(&mut state, &data, &priors, bounds, &mut rng).unwrap();
                state.p
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / reps as f64;
        let sd = (draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (reps as f64 - 1.0))
            .sqrt();
        assert!(sd < 0.15, "posterior sd {sd} not concentrated");
        assert!((mean - want_mean).abs() < 0.05, "mean {mean} vs {want_mean}");
        assert!((sd - want_sd).abs() / want_sd < 0.25, "sd {sd} vs {want_sd}");
    }

    #[test]
    fn run_chain_is_deterministic_and_thinning_arithmetic_holds() {
        let data = mixed_dataset();
        let priors = Priors::vague(2, 5.0, PPrior::Gamma { shape: 1.0, rate: 1.0 }).unwrap();
        let mut config = SamplerConfig::new(100, 50, 99);
        config.thin = 5;
        let a = run_chain(&data, &priors, &config).unwrap();
        let b = run_chain(&data, &priors, &config).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a.iters().first(), Some(&55));
        assert_eq!(a.iters().last(), Some(&100));
        assert_eq!(a.p_draws(), b.p_draws(), "same seed must be bit-identical");
        assert_eq!(a.beta_column(0), b.beta_column(0));
        assert_eq!(a.beta_column(1), b.beta_column(1));

        let mut other = config.clone();
        other.stream_id = 1;
        let c = run_chain(&data, &priors, &other).unwrap();
        assert_ne!(a.p_draws(), c.p_draws(), "different stream must differ");
    }

    #[test]
    fn run_chain_rejects_degenerate_inputs() {
        let data = tiny_dataset(10, 1);
        let priors = Priors::vague(1, 5.0, PPrior::Fixed(1.0)).unwrap();
        let config = SamplerConfig::new(10, 5, 1);
        match run_chain(&data, &priors, &config) {
            Err(Error::InvalidData(_)) => {}
            other => panic!("expected InvalidData for one-class response, got {other:?}"),
        }

        let data = mixed_dataset();
        let priors2 = Priors::vague(2, 5.0, PPrior::Fixed(1.0)).unwrap();
        let bad = SamplerConfig::new(10, 10, 1);
        assert!(run_chain(&data, &priors2, &bad).is_err());
        let mut bad_thin = SamplerConfig::new(10, 5, 1);
        bad_thin.thin = 0;
        assert!(run_chain(&data, &priors2, &bad_thin).is_err());
    }

    #[test]
    fn chain_state_stays_finite_and_sign_coherent() {
        // tractable part of the augmented log posterior stays finite and the
        // z signs track y through a whole run
        let data = mixed_dataset();
        let priors = Priors::vague(2, 5.0, PPrior::Gamma { shape: 1.0, rate: 1.0 }).unwrap();
        let mut rng = RngStream::new(55, 0);
        let mut state = state_for(&data);
        update_z(&mut state, &data, &mut rng).unwrap();
        update_omega(&mut state, &data, &mut rng).unwrap();
        let check = |state: &ChainState| {
            for i in 0..data.n() {
                let coherent = (state.z[i] > 0.0) == (data.y()[i] == 1);
                assert!(coherent, "sign coherence broken at {i}");
                assert!(state.omega[i].is_finite() && state.omega[i] > 0.0);
            }
            let eta = data.linear_predictor(&state.beta).unwrap();
            let quad: f64 = (0..data.n())
                .map(|i| -0.5 * state.omega[i] * (state.z[i] - eta[i]).powi(2))
                .sum();
            let prior_term = -0.5
                * (Cholesky::new(priors.beta_cov().clone()).unwrap())
                    .solve(&state.beta)
                    .dot(&state.beta);
            let p_term = -state.p - 2.0 * state.p * (data.n() as f64) * std::f64::consts::LN_2;
            let total = quad + prior_term + p_term;
            assert!(total.is_finite(), "log posterior term became {total}");
        };
        for _ in 0..200 {
            update_z(&mut state, &data, &mut rng).unwrap();
            check(&state);
            update_omega(&mut state, &data, &mut rng).unwrap();
            check(&state);
            update_beta(&mut state, &data, &priors, &mut rng).unwrap();
            update_z(&mut state, &data, &mut rng).unwrap();
            check(&state);
            update_p_slice(&mut state, &data, &priors, default_p_bounds(), &mut rng).unwrap();
            check(&state);
        }
    }

    #[test]
    fn priors_validation() {
        assert!(Priors::vague(2, -1.0, PPrior::Fixed(1.0)).is_err());
        assert!(Priors::vague(2, 5.0, PPrior::Fixed(0.0)).is_err());
        assert!(Priors::vague(2, 5.0, PPrior::Gamma { shape: 0.0, rate: 1.0 }).is_err());
        let not_spd = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, 1.0]);
        assert!(Priors::new(DVector::zeros(2), not_spd, PPrior::Fixed(1.0)).is_err());
        let ok = Priors::vague(3, 5.0, PPrior::Gamma { shape: 1.0, rate: 1.0 }).unwrap();
        assert_eq!(ok.k(), 3);
    }
}
