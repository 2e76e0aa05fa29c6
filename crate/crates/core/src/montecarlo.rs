//! Replicated simulation experiments: normalised partial-sum ratios,
//! variance and autocovariance checks against closed forms.
//!
//! Replication `i` uses seed `replication_seed(base_seed, i)`; replications
//! run in parallel but results are collected in replication order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linproc::{ProcessConfig, Sharing, Simulator};
use crate::rng::replication_seed;

/// Median of a non-empty sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `f(n) = n^(−1/p) |Σ_{k≤n} (d_k − mean)|` at each requested `n` (1-based).
pub fn centered_partial_sums(d: &[f64], mean: f64, p: f64, at: &[usize]) -> Result<Vec<f64>> {
    if let Some(&n) = at.iter().find(|&&n| n == 0 || n > d.len()) {
        return Err(Error::Length {
            needed: n.max(1),
            got: d.len(),
        });
    }
    let mut sums = Vec::with_capacity(d.len());
    let mut acc = 0.0;
    for v in d {
        acc += v - mean;
        sums.push(acc);
    }
    Ok(at.iter().map(|&n| sums[n - 1].abs() / (n as f64).powf(1.0 / p)).collect())
}

/// `E d_k` where a closed form exists: zero-mean components, or the
/// lag-zero covariance for two components sharing one stream.
pub fn product_mean(config: &ProcessConfig) -> Option<f64> {
    let tail = config.innov.tail_coefficient();
    let symmetric = config.innov.symmetric;
    if tail <= 1.0 {
        return None;
    }
    match (config.sharing, config.s) {
        (_, 1) | (Sharing::Independent, _) => Some(0.0),
        (Sharing::Shared, 2) => {
            let var = config.innov.variance();
            if !var.is_finite() {
                return None;
            }
            let a = config.coeff(0).taps(config.window).ok()?;
            let b = config.coeff(1).taps(config.window).ok()?;
            Some(var * a.iter().zip(&b).map(|(u, v)| u * v).sum::<f64>())
        }
        (Sharing::Shared, s) if s % 2 == 1 && symmetric && tail > s as f64 => Some(0.0),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioExperiment {
    pub config: ProcessConfig,
    /// Exponents `p` at which `f(n_large)/f(n_small)` is measured.
    pub p_values: Vec<f64>,
    pub n_small: usize,
    pub n_large: usize,
    pub replications: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub p: f64,
    pub median: f64,
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub mean: f64,
    pub summaries: Vec<RatioSummary>,
}

impl RatioReport {
    pub fn median_at(&self, p: f64) -> Option<f64> {
        self.summaries.iter().find(|s| (s.p - p).abs() < 1e-12).map(|s| s.median)
    }
}

/// Medians over replications of `f(n_large) / f(n_small)`, centring by the
/// closed-form product mean.
pub fn partial_sum_ratios(exp: &RatioExperiment) -> Result<RatioReport> {
    if exp.replications == 0 || exp.p_values.is_empty() {
        return Err(Error::Config("need at least one replication and one p".into()));
    }
    if exp.n_small == 0 || exp.n_small >= exp.n_large || exp.n_large > exp.config.length {
        return Err(Error::Config(format!(
            "need 0 < n_small < n_large <= n, got {} / {} / {}",
            exp.n_small, exp.n_large, exp.config.length
        )));
    }
    let mean = product_mean(&exp.config)
        .ok_or_else(|| Error::Config("no closed-form mean for this product; cannot centre".into()))?;
    let sim = Simulator::new(exp.config.clone())?;
    let per_rep: Vec<Vec<f64>> = (0..exp.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let ens = sim.run(replication_seed(exp.base_seed, rep))?;
            exp.p_values
                .iter()
                .map(|&p| {
                    let f = centered_partial_sums(&ens.d, mean, p, &[exp.n_small, exp.n_large])?;
                    Ok(f[1] / f[0])
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let summaries = exp
        .p_values
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let ratios: Vec<f64> = per_rep.iter().map(|r| r[j]).collect();
            RatioSummary {
                p,
                median: median(&ratios),
                ratios,
            }
        })
        .collect();
    Ok(RatioReport { mean, summaries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCheck {
    pub empirical: f64,
    pub oracle: f64,
    pub relative_error: f64,
}

/// Average over replications of `(1/n) Σ x_k²` for the first component,
/// against `Var(ξ) Σ_{|l|≤M} c_l²`. The process mean is known to be zero,
/// so it is not re-estimated.
pub fn variance_check(config: &ProcessConfig, replications: usize, base_seed: u64) -> Result<VarianceCheck> {
    let var = config.innov.variance();
    if !var.is_finite() {
        return Err(Error::Config("innovation variance is infinite".into()));
    }
    if replications == 0 {
        return Err(Error::Config("need at least one replication".into()));
    }
    let oracle = var * config.coeff(0).sum_of_squares(config.window)?;
    let sim = Simulator::new(config.clone())?;
    let second_moments: Vec<f64> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| {
            let ens = sim.run(replication_seed(base_seed, rep))?;
            let x = &ens.x[0];
            Ok(x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64)
        })
        .collect::<Result<_>>()?;
    let empirical = second_moments.iter().sum::<f64>() / replications as f64;
    Ok(VarianceCheck {
        empirical,
        oracle,
        relative_error: (empirical - oracle).abs() / oracle,
    })
}

/// `γ̂(h) = (1/(n−h)) Σ x_k x_{k+h}`, zero mean assumed.
pub fn autocovariance(x: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag.min(x.len().saturating_sub(1)))
        .map(|h| {
            let n = x.len() - h;
            x[..n].iter().zip(&x[h..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocovarianceCheck {
    /// Replication-averaged `γ̂(h)` for `h = 0..=max_lag`.
    pub gamma: Vec<f64>,
    pub fit_lags: (usize, usize),
    pub slope: f64,
}

/// Log-log slope of the averaged autocovariance over `fit_lags` (inclusive).
pub fn autocovariance_slope(
    config: &ProcessConfig,
    replications: usize,
    base_seed: u64,
    fit_lags: (usize, usize),
) -> Result<AutocovarianceCheck> {
    let (lo, hi) = fit_lags;
    if lo == 0 || lo >= hi || hi >= config.length {
        return Err(Error::Config(format!("bad fit lags {lo}..={hi}")));
    }
    if replications == 0 {
        return Err(Error::Config("need at least one replication".into()));
    }
    let sim = Simulator::new(config.clone())?;
    let per_rep: Vec<Vec<f64>> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| Ok(autocovariance(&sim.run(replication_seed(base_seed, rep))?.x[0], hi)))
        .collect::<Result<_>>()?;
    let mut gamma = vec![0.0; hi + 1];
    for g in &per_rep {
        for (acc, v) in gamma.iter_mut().zip(g) {
            *acc += v / replications as f64;
        }
    }
    if let Some(h) = (lo..=hi).find(|&h| !(gamma[h] > 0.0)) {
        return Err(Error::Domain(format!("autocovariance at lag {h} is not positive")));
    }
    let xs: Vec<f64> = (lo..=hi).map(|h| (h as f64).ln()).collect();
    let ys: Vec<f64> = (lo..=hi).map(|h| gamma[h].ln()).collect();
    Ok(AutocovarianceCheck {
        slope: ols_slope(&xs, &ys),
        gamma,
        fit_lags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innovations::InnovationSpec;
    use crate::kernel::CoefficientSpec;

    #[test]
    fn median_and_slope() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        assert!((ols_slope(&x, &y) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn partial_sums_by_hand() {
        let d = [1.0, -1.0, 2.0, 2.0];
        let f = centered_partial_sums(&d, 0.0, 1.0, &[1, 2, 4]).unwrap();
        assert_eq!(f, vec![1.0, 0.0, 1.0]);
        let f = centered_partial_sums(&d, 1.0, 2.0, &[4]).unwrap();
        assert!((f[0] - 0.0).abs() < 1e-15);
        assert!(centered_partial_sums(&d, 0.0, 1.0, &[5]).is_err());
    }

    #[test]
    fn autocovariance_of_alternating_series() {
        let x: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let g = autocovariance(&x, 2);
        assert_eq!(g, vec![1.0, -1.0, 1.0]);
    }

    #[test]
    fn product_mean_cases() {
        let coeff = CoefficientSpec::standard(0.8, 8).unwrap();
        let mut cfg = ProcessConfig::single(coeff.clone(), InnovationSpec::gaussian(2.0), 16, 8);
        assert_eq!(product_mean(&cfg), Some(0.0));
        cfg.s = 2;
        let want = 4.0 * coeff.sum_of_squares(8).unwrap();
        assert!((product_mean(&cfg).unwrap() - want).abs() < 1e-12);
        cfg.innov = InnovationSpec::symmetric_pareto(1.5, 1.0);
        assert_eq!(product_mean(&cfg), None);
        cfg.sharing = Sharing::Independent;
        assert_eq!(product_mean(&cfg), Some(0.0));
    }

    #[test]
    fn iid_ratios_follow_the_classical_law() {
        // i.i.d. gaussian: p = 1 sits well inside the p < 2 region
        let cfg = ProcessConfig::single(
            CoefficientSpec::standard(0.8, 1).unwrap(),
            InnovationSpec::gaussian(1.0),
            1 << 14,
            0,
        );
        let report = partial_sum_ratios(&RatioExperiment {
            config: cfg,
            p_values: vec![1.0, 3.0],
            n_small: 1 << 10,
            n_large: 1 << 14,
            replications: 16,
            base_seed: 5,
        })
        .unwrap();
        assert!(report.median_at(1.0).unwrap() < 0.5);
        assert!(report.median_at(3.0).unwrap() > 1.0);
    }

    #[test]
    fn replications_are_order_stable() {
        let cfg = ProcessConfig::single(
            CoefficientSpec::standard(0.7, 64).unwrap(),
            InnovationSpec::gaussian(1.0),
            512,
            64,
        );
        let a = variance_check(&cfg, 8, 3).unwrap();
        let b = variance_check(&cfg, 8, 3).unwrap();
        assert_eq!(a, b);
    }
}
