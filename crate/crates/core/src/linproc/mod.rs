//! Truncated two-sided linear processes and their products.
//!
//! Component `r` is `x_k = Σ_{|k-l| ≤ M} c_{k-l} ξ_l` for `k = 1..n`, driven by
//! one innovation stream covering indices `1-M ..= n+M`, so neighbouring
//! outputs share innovations exactly as an untruncated moving average would.

mod convolve;
pub mod export;
pub mod tensor;

use serde::{Deserialize, Serialize};

pub use convolve::{convolve_direct, ConvolutionMethod, Convolver};

use crate::error::{Error, Result};
use crate::innovations::InnovationSpec;
use crate::kernel::CoefficientSpec;
use crate::rng::StreamKey;

/// Default truncation half-width.
pub const DEFAULT_WINDOW: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sharing {
    /// One innovation stream drives every component.
    Shared,
    /// Component `r` has its own stream.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfig {
    pub s: usize,
    /// One spec per component, or a single spec used for all of them.
    pub coeffs: Vec<CoefficientSpec>,
    pub innov: InnovationSpec,
    pub sharing: Sharing,
    pub length: usize,
    /// Truncation half-width `M`. Zero keeps only `c_0`, i.e. i.i.d. data.
    #[serde(default = "default_window")]
    pub window: u64,
}

fn default_window() -> u64 {
    DEFAULT_WINDOW
}

impl ProcessConfig {
    pub fn single(coeff: CoefficientSpec, innov: InnovationSpec, length: usize, window: u64) -> Self {
        Self {
            s: 1,
            coeffs: vec![coeff],
            innov,
            sharing: Sharing::Shared,
            length,
            window,
        }
    }

    pub fn coeff(&self, r: usize) -> &CoefficientSpec {
        if self.coeffs.len() == 1 {
            &self.coeffs[0]
        } else {
            &self.coeffs[r]
        }
    }

    /// Checks the configuration and returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.length == 0 {
            return Err(Error::Empty("process length n must be at least 1".into()));
        }
        if self.s == 0 {
            return Err(Error::Config("s must be at least 1".into()));
        }
        if self.coeffs.len() != 1 && self.coeffs.len() != self.s {
            return Err(Error::Config(format!(
                "expected 1 or {} coefficient specs, got {}",
                self.s,
                self.coeffs.len()
            )));
        }
        for c in &self.coeffs {
            c.validate()?;
            if c.window < self.window {
                return Err(Error::Config(format!(
                    "coefficient window {} is smaller than the truncation window {}",
                    c.window, self.window
                )));
            }
        }
        self.innov.validate()?;
        let mut warnings = Vec::new();
        let needed = (self.s as f64).max(2.0);
        let beta = self.innov.tail_coefficient();
        if beta <= needed {
            warnings.push(format!(
                "innovation tail coefficient {beta} does not exceed s∨2 = {needed}: E|ξ|^(s∨2) may be infinite"
            ));
        }
        Ok(warnings)
    }

    /// Number of innovations per stream, `n + 2M`.
    pub fn innovation_len(&self) -> usize {
        self.length + 2 * self.window as usize
    }

    pub fn stream_count(&self) -> usize {
        match self.sharing {
            Sharing::Shared => 1,
            Sharing::Independent => self.s,
        }
    }

    fn stream_of(&self, r: usize) -> usize {
        match self.sharing {
            Sharing::Shared => 0,
            Sharing::Independent => r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub config: ProcessConfig,
    pub seed: u64,
    /// L² bound on the discarded coefficient tail per component; `None`
    /// when the innovation variance is infinite or `M = 0`.
    pub truncation_bounds: Vec<Option<f64>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    /// `s × n` component paths.
    pub x: Vec<Vec<f64>>,
    /// Products `d_k = Π_r x[r][k]`.
    pub d: Vec<f64>,
    pub meta: EnsembleMeta,
}

impl PathEnsemble {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }
}

/// Precomputed taps and transforms for repeated simulation of one config.
pub struct Simulator {
    config: ProcessConfig,
    warnings: Vec<String>,
    convolvers: Vec<Convolver>,
}

impl Simulator {
    pub fn new(config: ProcessConfig) -> Result<Self> {
        Self::with_method(config, ConvolutionMethod::Auto)
    }

    pub fn with_method(config: ProcessConfig, method: ConvolutionMethod) -> Result<Self> {
        let warnings = config.validate()?;
        let convolvers = (0..config.s)
            .map(|r| {
                let taps = config.coeff(r).taps(config.window)?;
                Ok(Convolver::new(taps, config.length, method))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config,
            warnings,
            convolvers,
        })
    }

    pub fn config(&self) -> &ProcessConfig {
        &self.config
    }

    /// Innovation streams for `seed`: stream `i` is channel `i` of the seed.
    pub fn innovations(&self, seed: u64) -> Result<Vec<Vec<f64>>> {
        (0..self.config.stream_count())
            .map(|i| {
                self.config
                    .innov
                    .draw(self.config.innovation_len(), StreamKey::new(seed, i as u64), false)
            })
            .collect()
    }

    pub fn run(&self, seed: u64) -> Result<PathEnsemble> {
        let innovations = self.innovations(seed)?;
        self.run_with_innovations(&innovations, seed)
    }

    /// Runs on caller-supplied innovation streams (one per
    /// [`ProcessConfig::stream_count`], each of length `n + 2M`).
    pub fn run_with_innovations(&self, innovations: &[Vec<f64>], seed: u64) -> Result<PathEnsemble> {
        let cfg = &self.config;
        if innovations.len() != cfg.stream_count() {
            return Err(Error::Config(format!(
                "expected {} innovation streams, got {}",
                cfg.stream_count(),
                innovations.len()
            )));
        }
        if let Some(bad) = innovations.iter().find(|v| v.len() != cfg.innovation_len()) {
            return Err(Error::Config(format!(
                "innovation stream has length {}, expected {}",
                bad.len(),
                cfg.innovation_len()
            )));
        }
        let x: Vec<Vec<f64>> = (0..cfg.s)
            .map(|r| self.convolvers[r].apply(&innovations[cfg.stream_of(r)]))
            .collect();
        let d = products(&x);
        let variance = cfg.innov.variance();
        let truncation_bounds = (0..cfg.s)
            .map(|r| {
                if cfg.window == 0 || !variance.is_finite() {
                    None
                } else {
                    truncation_error_bound(cfg.coeff(r), cfg.window, variance).ok()
                }
            })
            .collect();
        Ok(PathEnsemble {
            x,
            d,
            meta: EnsembleMeta {
                config: cfg.clone(),
                seed,
                truncation_bounds,
                warnings: self.warnings.clone(),
            },
        })
    }
}

pub fn simulate_paths(config: &ProcessConfig, seed: u64) -> Result<PathEnsemble> {
    Simulator::new(config.clone())?.run(seed)
}

/// `d_k = Π_r x[r][k]`, multiplied left to right.
pub fn products(x: &[Vec<f64>]) -> Vec<f64> {
    let Some((first, rest)) = x.split_first() else {
        return Vec::new();
    };
    let mut d = first.clone();
    for comp in rest {
        for (dk, xk) in d.iter_mut().zip(comp) {
            *dk *= xk;
        }
    }
    d
}

/// `var·scale²·2·M^(1-2σ)/(2σ-1)`, an integral bound on `var·Σ_{|l|>M} c_l²`.
pub fn truncation_error_bound(spec: &CoefficientSpec, m: u64, innov_variance: f64) -> Result<f64> {
    if !(spec.sigma > 0.5) {
        return Err(Error::DivergentSeries(spec.sigma));
    }
    if m == 0 {
        return Err(Error::Config("truncation window must be at least 1".into()));
    }
    if !(innov_variance > 0.0) {
        return Err(Error::Config("innovation variance must be positive".into()));
    }
    let two_sigma = 2.0 * spec.sigma;
    Ok(innov_variance * spec.scale * spec.scale * 2.0 * (m as f64).powf(1.0 - two_sigma) / (two_sigma - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innovations::InnovationFamily;

    fn gaussian_config(sigma: f64, n: usize, m: u64) -> ProcessConfig {
        ProcessConfig::single(
            CoefficientSpec::standard(sigma, m.max(1)).unwrap(),
            InnovationSpec::gaussian(1.0),
            n,
            m,
        )
    }

    #[test]
    fn truncation_bound_examples() {
        let s = CoefficientSpec::standard(0.75, 10_000).unwrap();
        assert!((truncation_error_bound(&s, 10_000, 1.0).unwrap() - 0.04).abs() < 1e-15);
        let s = CoefficientSpec::standard(1.0, 10_000).unwrap();
        assert!((truncation_error_bound(&s, 10_000, 1.0).unwrap() - 2e-4).abs() < 1e-18);
        let raw = CoefficientSpec {
            sigma: 0.5,
            scale: 1.0,
            center_value: 1.0,
            window: 10,
        };
        assert!(matches!(truncation_error_bound(&raw, 10, 1.0), Err(Error::DivergentSeries(_))));
    }

    #[test]
    fn truncation_bound_dominates_discarded_tail() {
        let s = CoefficientSpec::standard(0.7, 1 << 20).unwrap();
        let m = 1000u64;
        let tail: f64 = 2.0 * (m + 1..=1 << 20).map(|l| (l as f64).powf(-1.4)).sum::<f64>();
        assert!(truncation_error_bound(&s, m, 1.0).unwrap() >= tail);
    }

    #[test]
    fn zero_length_is_rejected() {
        let cfg = gaussian_config(0.8, 0, 16);
        assert!(matches!(simulate_paths(&cfg, 1), Err(Error::Empty(_))));
    }

    #[test]
    fn zero_innovations_give_zero_paths() {
        let cfg = gaussian_config(0.75, 256, 64);
        let sim = Simulator::new(cfg.clone()).unwrap();
        let zeros = vec![vec![0.0; cfg.innovation_len()]];
        let ens = sim.run_with_innovations(&zeros, 0).unwrap();
        assert!(ens.x[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shared_equal_coefficients_give_equal_components() {
        let mut cfg = gaussian_config(0.8, 512, 128);
        cfg.s = 2;
        let ens = simulate_paths(&cfg, 5).unwrap();
        assert_eq!(ens.x[0], ens.x[1]);
        assert!(ens.d.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn products_conventions() {
        let x = vec![vec![1.0, -2.0, 3.0]];
        assert_eq!(products(&x), x[0]);
        let x = vec![vec![1.0, 2.0], vec![0.0, 0.0], vec![5.0, 7.0]];
        assert_eq!(products(&x), vec![0.0, 0.0]);
    }

    #[test]
    fn determinism() {
        let cfg = gaussian_config(0.7, 1000, 200);
        assert_eq!(simulate_paths(&cfg, 9).unwrap(), simulate_paths(&cfg, 9).unwrap());
        assert_ne!(simulate_paths(&cfg, 9).unwrap().x, simulate_paths(&cfg, 10).unwrap().x);
    }

    #[test]
    fn matches_definition_on_small_case() {
        let cfg = gaussian_config(0.6, 20, 5);
        let sim = Simulator::new(cfg.clone()).unwrap();
        let xi = sim.innovations(3).unwrap();
        let ens = sim.run_with_innovations(&xi, 3).unwrap();
        let c = cfg.coeff(0);
        for k in 1..=20i64 {
            // ξ_l lives at position l + M - 1
            let mut want = 0.0;
            for l in (k - 5)..=(k + 5) {
                want += c.coefficient(k - l).unwrap() * xi[0][(l + 5 - 1) as usize];
            }
            let got = ens.x[0][(k - 1) as usize];
            assert!((got - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn window_zero_is_iid() {
        let cfg = ProcessConfig::single(
            CoefficientSpec::standard(0.8, 1).unwrap(),
            InnovationSpec::symmetric_pareto(1.5, 1.0),
            100,
            0,
        );
        let sim = Simulator::new(cfg).unwrap();
        let xi = sim.innovations(4).unwrap();
        let ens = sim.run_with_innovations(&xi, 4).unwrap();
        assert_eq!(ens.x[0], xi[0]);
        assert_eq!(ens.meta.truncation_bounds, vec![None]);
        assert_eq!(ens.meta.warnings.len(), 1);
    }

    #[test]
    fn heavy_tails_attach_warning() {
        let mut cfg = gaussian_config(0.8, 100, 10);
        cfg.innov = InnovationSpec::student_t(2.5, 1.0);
        cfg.s = 3;
        cfg.sharing = Sharing::Independent;
        assert_eq!(cfg.validate().unwrap().len(), 1);
        cfg.innov.family = InnovationFamily::Gaussian;
        assert!(cfg.validate().unwrap().is_empty());
    }

    #[test]
    fn coefficient_count_mismatch() {
        let mut cfg = gaussian_config(0.8, 100, 10);
        cfg.s = 3;
        cfg.coeffs = vec![cfg.coeffs[0]; 2];
        assert!(cfg.validate().is_err());
    }
}
