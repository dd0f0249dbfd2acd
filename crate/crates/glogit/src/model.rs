//! The generalized logistic regression model: densities, cdf, likelihood,
//! success probability, data simulation, and MLE initialization.
//!
//! The latent density is `f(x) = e^{px} / (B(p,p) (1+e^x)^{2p})`; `p = 1`
//! recovers the standard logistic, `p < 1` gives heavier tails and `p > 1`
//! lighter ones. Its cdf is the regularized incomplete beta evaluated at the
//! logistic transform of `x`.

use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::specfun::{log1p_exp, log_beta, logistic, reg_inc_beta};
use crate::stochastics::{GammaSampler, RngStream};

/// A design matrix plus binary response.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: Vec<u8>,
}

impl Dataset {
    /// Build a dataset, checking that `y` is binary, dimensions agree and
    /// `n ≥ k`. Column-rank deficiency is only warned about at fit time.
    pub fn new(x: DMatrix<f64>, y: Vec<u8>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "X has {} rows but y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if let Some(i) = y.iter().position(|&v| v > 1) {
            return Err(Error::InvalidData(format!(
                "response must be 0/1; row {} has {}",
                i + 1,
                y[i]
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("design matrix has non-finite entries".into()));
        }
        if x.nrows() < x.ncols() {
            return Err(Error::InvalidData(format!(
                "need n ≥ k, got n={} < k={}",
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn has_both_classes(&self) -> bool {
        self.y.contains(&1) && self.y.contains(&0)
    }

    /// SHA-256 digest of dimensions and raw values, for run manifests.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n() as u64).to_le_bytes());
        h.update((self.k() as u64).to_le_bytes());
        for v in self.x.iter() {
            h.update(v.to_le_bytes());
        }
        h.update(&self.y);
        hex::encode(h.finalize())
    }

    /// Rank check via SVD with a relative tolerance.
    pub fn is_full_column_rank(&self) -> bool {
        let svd = self.x.clone().svd(false, false);
        let smax = svd.singular_values.max();
        if smax == 0.0 {
            return false;
        }
        let tol = smax * 1e-8;
        (svd.singular_values.iter().filter(|&&s| s > tol).count()) == self.k()
    }

    /// `X β`.
    pub fn linear_predictor(&self, beta: &DVector<f64>) -> Result<DVector<f64>> {
        if beta.len() != self.k() {
            return Err(Error::DimensionMismatch(format!(
                "beta has length {} but X has {} columns",
                beta.len(),
                self.k()
            )));
        }
        Ok(&self.x * beta)
    }
}

/// Regression coefficients plus the tail parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    beta: DVector<f64>,
    p: f64,
}

impl ModelParams {
    pub fn new(beta: DVector<f64>, p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::domain("ModelParams", format!("p must be > 0, got {p}")));
        }
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("ModelParams", "beta must be finite"));
        }
        Ok(Self { beta, p })
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

fn check_p(func: &'static str, p: f64) -> Result<()> {
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::domain(func, format!("p must be > 0, got {p}")));
    }
    Ok(())
}

/// Log density of the zero-location generalized logistic:
/// `−ln B(p,p) + p·x − 2p·ln(1+e^x)`.
pub fn glogistic_logpdf(x: f64, p: f64) -> Result<f64> {
    check_p("glogistic_logpdf", p)?;
    if !x.is_finite() {
        return Err(Error::domain("glogistic_logpdf", format!("x must be finite, got {x}")));
    }
    Ok(-log_beta(p, p)? + p * x - 2.0 * p * log1p_exp(x))
}

/// Distribution function `I_{e^x/(1+e^x)}(p, p)`.
pub fn glogistic_cdf(x: f64, p: f64) -> Result<f64> {
    check_p("glogistic_cdf", p)?;
    reg_inc_beta(logistic(x), p, p)
}

/// `P(Y = 1)` at linear predictor `eta`; equals [`glogistic_cdf`].
pub fn success_prob(eta: f64, p: f64) -> Result<f64> {
    glogistic_cdf(eta, p)
}

const PROB_FLOOR: f64 = 1e-300;
const PROB_CEIL: f64 = 1.0 - 1e-16;

/// Bernoulli log likelihood `Σ yᵢ ln Hᵢ + (1−yᵢ) ln(1−Hᵢ)` with
/// `Hᵢ = glogistic_cdf(x_iᵀβ, p)`, probabilities clamped to
/// `[1e-300, 1−1e-16]`.
pub fn log_likelihood(params: &ModelParams, data: &Dataset) -> Result<f64> {
    let eta = data.linear_predictor(params.beta())?;
    let mut ll = 0.0;
    for (i, &yi) in data.y().iter().enumerate() {
        let h = glogistic_cdf(eta[i], params.p())?.clamp(PROB_FLOOR, PROB_CEIL);
        ll += if yi == 1 { h.ln() } else { (1.0 - h).ln() };
    }
    Ok(ll)
}

/// One draw from GLog(location, 1): `location + ln(U/(1−U))` with
/// `U ~ Beta(p, p)`, realized as the log-ratio of two Gamma(p, 1) draws so
/// small shapes cannot underflow.
pub fn sample_glog(location: f64, p: f64, rng: &mut RngStream) -> Result<f64> {
    check_p("sample_glog", p)?;
    let g = GammaSampler::new(p)?;
    Ok(location + g.draw_ln(rng) - g.draw_ln(rng))
}

/// Simulate a dataset of the §-style scenarios: intercept column of ones,
/// standard-normal covariates, latent `Z_i ~ GLog(x_iᵀβ, 1)` and
/// `y_i = 1 ⇔ Z_i > 0`.
pub fn simulate_dataset(
    beta: &DVector<f64>,
    p: f64,
    n: usize,
    rng: &mut RngStream,
) -> Result<Dataset> {
    check_p("simulate_dataset", p)?;
    if n == 0 {
        return Err(Error::InvalidData("n must be ≥ 1".into()));
    }
    let k = beta.len();
    if k == 0 {
        return Err(Error::InvalidData("beta must be non-empty".into()));
    }
    let mut x = DMatrix::zeros(n, k);
    for i in 0..n {
        x[(i, 0)] = 1.0;
        for j in 1..k {
            x[(i, j)] = rng.standard_normal();
        }
    }
    let glog = GammaSampler::new(p)?;
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let loc = x.row(i).transpose().dot(beta);
        let z = loc + glog.draw_ln(rng) - glog.draw_ln(rng);
        y.push(u8::from(z > 0.0));
    }
    Dataset::new(x, y)
}

/// Whether the tail parameter is estimated or held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PMode {
    Fixed(f64),
    Free,
}

/// Result of the simplex MLE search. Used as a sampler initializer, not as
/// an estimator with guarantees.
#[derive(Debug, Clone)]
pub struct MleFit {
    pub params: ModelParams,
    pub converged: bool,
    pub log_likelihood: f64,
    pub n_evals: usize,
}

const MLE_MAX_EVALS: usize = 5000;
const LN_P_BOUND: f64 = 7.0;

/// Maximize the log likelihood by Nelder–Mead from `β = 0`, `p = 1`, with
/// `p` searched on the log scale. Warns when `X` is column-rank deficient.
pub fn mle_fit(data: &Dataset, p_mode: PMode) -> Result<MleFit> {
    if data.n() <= data.k() {
        return Err(Error::InvalidData(format!(
            "need n > k for an MLE start, got n={} k={}",
            data.n(),
            data.k()
        )));
    }
    if !data.has_both_classes() {
        return Err(Error::InvalidData(
            "response has a single class; the MLE diverges".into(),
        ));
    }
    if !data.is_full_column_rank() {
        log::warn!("design matrix is not full column rank; MLE may be unstable");
    }
    if let PMode::Fixed(p) = p_mode {
        check_p("mle_fit", p)?;
    }

    let k = data.k();
    let dim = match p_mode {
        PMode::Fixed(_) => k,
        PMode::Free => k + 1,
    };
    let mut n_evals = 0usize;
    let mut objective = |theta: &[f64]| -> f64 {
        n_evals += 1;
        let beta = DVector::from_column_slice(&theta[..k]);
        let p = match p_mode {
            PMode::Fixed(p) => p,
            PMode::Free => theta[k].clamp(-LN_P_BOUND, LN_P_BOUND).exp(),
        };
        let params = ModelParams::new(beta, p).expect("finite simplex point");
        match log_likelihood(&params, data) {
            Ok(ll) if ll.is_finite() => -ll,
            _ => f64::INFINITY,
        }
    };

    let start = vec![0.0; dim];
    let (best, converged) = nelder_mead(&mut objective, &start, 0.5, MLE_MAX_EVALS);
    let beta = DVector::from_column_slice(&best[..k]);
    let p = match p_mode {
        PMode::Fixed(p) => p,
        PMode::Free => best[k].clamp(-LN_P_BOUND, LN_P_BOUND).exp(),
    };
    let params = ModelParams::new(beta, p)?;
    let ll = log_likelihood(&params, data)?;
    if !converged {
        log::warn!("MLE simplex search hit the {MLE_MAX_EVALS}-evaluation cap; returning best found");
    }
    Ok(MleFit {
        params,
        converged,
        log_likelihood: ll,
        n_evals,
    })
}

/// Plain Nelder–Mead minimizer; returns the best vertex and whether the
/// simplex collapsed below tolerance before the evaluation cap.
fn nelder_mead<F>(f: &mut F, start: &[f64], step: f64, max_evals: usize) -> (Vec<f64>, bool)
where
    F: FnMut(&[f64]) -> f64,
{
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink
    const FTOL: f64 = 1e-9;

    let dim = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = dim + 1;

    loop {
        // order best → worst
        let mut idx: Vec<usize> = (0..=dim).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let reorder: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let revals: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        simplex = reorder;
        values = revals;

        let spread = (values[dim] - values[0]).abs();
        if spread < FTOL * (1.0 + values[0].abs()) {
            return (simplex[0].clone(), true);
        }
        if evals >= max_evals {
            return (simplex[0].clone(), false);
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|v| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let reflect: Vec<f64> = (0..dim)
            .map(|j| centroid[j] + ALPHA * (centroid[j] - simplex[dim][j]))
            .collect();
        let f_r = f(&reflect);
        evals += 1;

        if f_r < values[0] {
            let expand: Vec<f64> = (0..dim)
                .map(|j| centroid[j] + GAMMA * (reflect[j] - centroid[j]))
                .collect();
            let f_e = f(&expand);
            evals += 1;
            if f_e < f_r {
                simplex[dim] = expand;
                values[dim] = f_e;
            } else {
                simplex[dim] = reflect;
                values[dim] = f_r;
            }
        } else if f_r < values[dim - 1] {
            simplex[dim] = reflect;
            values[dim] = f_r;
        } else {
            let contract: Vec<f64> = (0..dim)
                .map(|j| centroid[j] + RHO * (simplex[dim][j] - centroid[j]))
                .collect();
            let f_c = f(&contract);
            evals += 1;
            if f_c < values[dim] {
                simplex[dim] = contract;
                values[dim] = f_c;
            } else {
                let best = simplex[0].clone();
                for i in 1..=dim {
                    for (v, b) in simplex[i].iter_mut().zip(&best) {
                        *v = b + SIGMA * (*v - b);
                    }
                    values[i] = f(&simplex[i]);
                }
                evals += dim;
            }
        }
    }
}
