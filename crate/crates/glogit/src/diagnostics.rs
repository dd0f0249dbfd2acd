//! Chain convergence diagnostics and posterior summaries: Geweke z scores,
//! autocorrelations, partial autocorrelations, quantiles and effective
//! sample sizes.

use crate::error::{Error, Result};
use crate::sampler::Chain;

/// Per-parameter posterior summary row.
#[derive(Debug, Clone)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q2_5: f64,
    pub q97_5: f64,
    /// NaN flags a series the statistic is undefined for (constant or too
    /// short).
    pub geweke_z: f64,
    pub ess: f64,
}

/// Summary of every stored parameter column (`beta_0..beta_{k−1}, p`).
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub params: Vec<ParamSummary>,
    pub n_draws: usize,
}

pub const GEWEKE_FRAC_FIRST: f64 = 0.1;
pub const GEWEKE_FRAC_LAST: f64 = 0.5;
const GEWEKE_MIN_LEN: usize = 100;
const GEWEKE_BATCHES: usize = 20;

/// Geweke convergence z score comparing the mean of the first
/// `frac_first` of the series against the last `frac_last`, standardized
/// by long-run variances from non-overlapping batch means (20 batches).
///
/// Returns NaN (with a warning) for a series with no variance.
pub fn geweke_z(series: &[f64], frac_first: f64, frac_last: f64) -> Result<f64> {
    if series.len() < GEWEKE_MIN_LEN {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: GEWEKE_MIN_LEN,
        });
    }
    if !(frac_first > 0.0 && frac_last > 0.0 && frac_first + frac_last <= 1.0) {
        return Err(Error::domain(
            "geweke_z",
            format!("invalid window fractions ({frac_first}, {frac_last})"),
        ));
    }
    let n = series.len();
    let n1 = ((frac_first * n as f64).floor() as usize).max(2);
    let n2 = ((frac_last * n as f64).floor() as usize).max(2);
    let first = &series[..n1];
    let last = &series[n - n2..];
    let (m1, v1) = segment_mean_and_var_of_mean(first);
    let (m2, v2) = segment_mean_and_var_of_mean(last);
    let denom = (v1 + v2).sqrt();
    if denom == 0.0 {
        log::warn!("geweke_z undefined: both segments have zero variance");
        return Ok(f64::NAN);
    }
    Ok((m1 - m2) / denom)
}

/// Segment mean plus a batch-means estimate of the variance of that mean.
fn segment_mean_and_var_of_mean(seg: &[f64]) -> (f64, f64) {
    let nb = seg.len().min(GEWEKE_BATCHES);
    let m = seg.len() / nb;
    let means: Vec<f64> = (0..nb)
        .map(|j| seg[j * m..(j + 1) * m].iter().sum::<f64>() / m as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / nb as f64;
    let var_b = means.iter().map(|x| (x - grand) * (x - grand)).sum::<f64>() / (nb as f64 - 1.0);
    (grand, var_b / nb as f64)
}

/// Sample autocorrelations `r_0..r_max_lag` with the biased-denominator
/// estimator; `r_0 = 1`.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if 2 * max_lag >= series.len() {
        return Err(Error::LagTooLarge {
            max_lag,
            len: series.len(),
        });
    }
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let denom: f64 = series.iter().map(|x| (x - mean) * (x - mean)).sum();
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    for l in 1..=max_lag {
        let num: f64 = (0..n - l)
            .map(|t| (series[t] - mean) * (series[t + l] - mean))
            .sum();
        out.push(num / denom);
    }
    Ok(out)
}

/// Partial autocorrelations via the Durbin–Levinson recursion on the
/// sample acf; index 0 holds 1 so lags line up with [`acf`].
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let r = acf(series, max_lag)?;
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    if max_lag == 0 {
        return Ok(out);
    }
    let mut phi_prev: Vec<f64> = vec![r[1]];
    out.push(r[1]);
    for k in 2..=max_lag {
        let num = r[k]
            - (1..k).map(|j| phi_prev[j - 1] * r[k - j]).sum::<f64>();
        let den = 1.0 - (1..k).map(|j| phi_prev[j - 1] * r[j]).sum::<f64>();
        let phi_kk = num / den;
        let mut phi_new = vec![0.0; k];
        for j in 1..k {
            phi_new[j - 1] = phi_prev[j - 1] - phi_kk * phi_prev[k - 1 - j];
        }
        phi_new[k - 1] = phi_kk;
        out.push(phi_kk);
        phi_prev = phi_new;
    }
    Ok(out)
}

/// Type-7 quantile (linear interpolation of order statistics).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n as f64 - 1.0) * q;
    let i = h.floor() as usize;
    if i + 1 >= n {
        return sorted[n - 1];
    }
    sorted[i] + (h - i as f64) * (sorted[i + 1] - sorted[i])
}

/// Effective sample size `n / (1 + 2 Σ r_l)` with the autocorrelation sum
/// truncated at the first negative term; NaN for a constant series.
fn ess(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return f64::NAN;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let denom: f64 = series.iter().map(|x| (x - mean) * (x - mean)).sum();
    if denom == 0.0 {
        return f64::NAN;
    }
    let mut sum = 0.0;
    for l in 1..(n / 2) {
        let r: f64 = (0..n - l)
            .map(|t| (series[t] - mean) * (series[t + l] - mean))
            .sum::<f64>()
            / denom;
        if r < 0.0 {
            break;
        }
        sum += r;
    }
    (n as f64 / (1.0 + 2.0 * sum)).min(n as f64)
}

/// Summarize one parameter series: mean, sd, 2.5%/97.5% quantiles, Geweke z
/// at the conventional 10%/50% windows, and effective sample size.
pub fn summarize_series(name: &str, series: &[f64]) -> ParamSummary {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let geweke = if n >= GEWEKE_MIN_LEN {
        geweke_z(series, GEWEKE_FRAC_FIRST, GEWEKE_FRAC_LAST).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    ParamSummary {
        name: name.to_string(),
        mean,
        sd,
        q2_5: quantile(&sorted, 0.025),
        q97_5: quantile(&sorted, 0.975),
        geweke_z: geweke,
        ess: ess(series),
    }
}

/// Posterior summary of every column of a chain.
pub fn summarize(chain: &Chain) -> Result<PosteriorSummary> {
    if chain.is_empty() {
        return Err(Error::EmptyChain);
    }
    let names = chain.param_names();
    let params = names
        .iter()
        .enumerate()
        .map(|(idx, name)| summarize_series(name, &chain.column(idx)))
        .collect();
    Ok(PosteriorSummary {
        params,
        n_draws: chain.len(),
    })
}
