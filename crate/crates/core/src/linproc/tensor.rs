//! Multivariate variant: matrix coefficients `C_l = c_l·P` acting on
//! innovation vectors in `R^m`, and the running partial sums of the s-fold
//! tensor products `⊗_r X_k^(r)`.

use serde::{Deserialize, Serialize};

use super::{ConvolutionMethod, Convolver, Sharing, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::innovations::InnovationSpec;
use crate::kernel::CoefficientSpec;
use crate::rng::StreamKey;

pub const DEFAULT_TENSOR_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorConfig {
    /// Innovation vector dimension.
    pub m: usize,
    /// Output dimension of each `X_k^(r)`.
    pub d_out: usize,
    pub s: usize,
    /// Scalar profile `c_l` of `‖C_l‖_F`, one per component or one shared.
    pub coeffs: Vec<CoefficientSpec>,
    pub innov: InnovationSpec,
    pub sharing: Sharing,
    pub length: usize,
    #[serde(default = "default_window")]
    pub window: u64,
    /// Exponents `p` for the normalised partial-sum traces.
    pub p_grid: Vec<f64>,
    #[serde(default = "default_cap")]
    pub memory_cap: usize,
    /// Keep every tensor (`n · d_out^s` values) in the result.
    #[serde(default)]
    pub keep_tensors: bool,
}

fn default_window() -> u64 {
    DEFAULT_WINDOW
}
fn default_cap() -> usize {
    DEFAULT_TENSOR_CAP
}

impl TensorConfig {
    fn coeff(&self, r: usize) -> &CoefficientSpec {
        if self.coeffs.len() == 1 {
            &self.coeffs[0]
        } else {
            &self.coeffs[r]
        }
    }

    pub fn entries(&self) -> Option<usize> {
        self.d_out.checked_pow(self.s as u32)
    }

    fn validate(&self) -> Result<usize> {
        if self.length == 0 {
            return Err(Error::Empty("tensor path length must be at least 1".into()));
        }
        if self.m == 0 || self.d_out == 0 || self.s == 0 {
            return Err(Error::Config("m, d_out and s must all be at least 1".into()));
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
                return Err(Error::Config("coefficient window smaller than truncation window".into()));
            }
        }
        if self.p_grid.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Config("p values must be positive".into()));
        }
        self.innov.validate()?;
        let entries = self.entries().unwrap_or(usize::MAX);
        if entries > self.memory_cap {
            return Err(Error::Size {
                entries,
                cap: self.memory_cap,
            });
        }
        Ok(entries)
    }
}

/// Deterministic `d_out × m` pattern with unit Frobenius norm,
/// `P_ij ∝ i + j + 1` (row-major). The 1 × 1 pattern is exactly 1.
pub fn pattern_matrix(d_out: usize, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..d_out)
        .flat_map(|i| (0..m).map(move |j| (i + j + 1) as f64))
        .collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    raw.into_iter().map(|v| v / norm).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// Closed-form `E[⊗_r X_k^(r)]`.
    Analytic,
    /// Sample mean over the path; used when no closed form is available.
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRun {
    pub entries_per_tensor: usize,
    /// Row-major `n × d_out^s`, present when `keep_tensors` was set.
    pub tensors: Option<Vec<f64>>,
    pub mean: Vec<f64>,
    pub centering: Centering,
    pub p_grid: Vec<f64>,
    /// `traces[i][k-1] = k^(-1/p_i)·‖Σ_{j≤k}(⊗X_j − mean)‖_F`.
    pub traces: Vec<Vec<f64>>,
}

pub fn simulate_tensor_paths(config: &TensorConfig, seed: u64) -> Result<TensorRun> {
    let entries = config.validate()?;
    let n = config.length;
    let m = config.m;
    let d_out = config.d_out;
    let s = config.s;
    let pattern = pattern_matrix(d_out, m);
    let innov_len = n + 2 * config.window as usize;

    let channel = |r: usize, i: usize| -> u64 {
        match config.sharing {
            Sharing::Shared => i as u64,
            Sharing::Independent => (r * m + i) as u64,
        }
    };
    let stream_count = match config.sharing {
        Sharing::Shared => m,
        Sharing::Independent => s * m,
    };
    let streams: Vec<Vec<f64>> = (0..stream_count as u64)
        .map(|c| config.innov.draw(innov_len, StreamKey::new(seed, c), false))
        .collect::<Result<_>>()?;

    // X^(r)_k as d_out-vectors, stored [r][k*d_out + a].
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(s);
    for r in 0..s {
        let taps = config.coeff(r).taps(config.window)?;
        let conv = Convolver::new(taps, n, ConvolutionMethod::Auto);
        let y: Vec<Vec<f64>> = (0..m)
            .map(|i| conv.apply(&streams[channel(r, i) as usize]))
            .collect();
        let mut xr = vec![0.0; n * d_out];
        for k in 0..n {
            for a in 0..d_out {
                let mut acc = 0.0;
                for (i, yi) in y.iter().enumerate() {
                    acc += pattern[a * m + i] * yi[k];
                }
                xr[k * d_out + a] = acc;
            }
        }
        components.push(xr);
    }

    // multi-index of every flat entry; component 0 is most significant
    let index_table: Vec<Vec<usize>> = (0..entries)
        .map(|flat| {
            let mut rem = flat;
            let mut idx = vec![0usize; s];
            for r in (0..s).rev() {
                idx[r] = rem % d_out;
                rem /= d_out;
            }
            idx
        })
        .collect();
    let tensor_at = |k: usize, out: &mut [f64]| {
        for (slot, idx) in out.iter_mut().zip(&index_table) {
            let mut v = components[0][k * d_out + idx[0]];
            for r in 1..s {
                v *= components[r][k * d_out + idx[r]];
            }
            *slot = v;
        }
    };

    let (mean, centering) = match analytic_mean(config, &pattern)? {
        Some(mean) => (mean, Centering::Analytic),
        None => {
            let mut mean = vec![0.0; entries];
            let mut buf = vec![0.0; entries];
            for k in 0..n {
                tensor_at(k, &mut buf);
                for (m_, v) in mean.iter_mut().zip(&buf) {
                    *m_ += v;
                }
            }
            mean.iter_mut().for_each(|v| *v /= n as f64);
            (mean, Centering::Empirical)
        }
    };

    let mut tensors = config.keep_tensors.then(|| Vec::with_capacity(n * entries));
    let mut partial = vec![0.0; entries];
    let mut buf = vec![0.0; entries];
    let mut traces = vec![Vec::with_capacity(n); config.p_grid.len()];
    for k in 0..n {
        tensor_at(k, &mut buf);
        if let Some(t) = tensors.as_mut() {
            t.extend_from_slice(&buf);
        }
        for ((acc, v), mu) in partial.iter_mut().zip(&buf).zip(&mean) {
            *acc += v - mu;
        }
        let norm = partial.iter().map(|v| v * v).sum::<f64>().sqrt();
        let count = (k + 1) as f64;
        for (trace, &p) in traces.iter_mut().zip(&config.p_grid) {
            trace.push(count.powf(-1.0 / p) * norm);
        }
    }

    Ok(TensorRun {
        entries_per_tensor: entries,
        tensors,
        mean,
        centering,
        p_grid: config.p_grid.clone(),
        traces,
    })
}

/// Closed form of `E[⊗_r X^(r)]` where one exists for symmetric innovations:
/// zero for independent components or odd `s`, and for shared `s = 2`
/// `Var(ξ)·Σ_l c^(1)_l c^(2)_l · (P Pᵀ)`. Other cases return `None`.
fn analytic_mean(config: &TensorConfig, pattern: &[f64]) -> Result<Option<Vec<f64>>> {
    let entries = config.entries().unwrap_or(usize::MAX);
    let zero = || Some(vec![0.0; entries]);
    match (config.sharing, config.s) {
        (Sharing::Independent, _) => Ok(zero()),
        (Sharing::Shared, s) if s % 2 == 1 => Ok(zero()),
        (Sharing::Shared, 2) => {
            let var = config.innov.variance();
            if !var.is_finite() {
                return Ok(None);
            }
            let c1 = config.coeff(0).taps(config.window)?;
            let c2 = config.coeff(1).taps(config.window)?;
            let cross: f64 = c1.iter().zip(&c2).map(|(a, b)| a * b).sum();
            let (d, m) = (config.d_out, config.m);
            let mut mean = vec![0.0; d * d];
            for a in 0..d {
                for b in 0..d {
                    let ppt: f64 = (0..m).map(|i| pattern[a * m + i] * pattern[b * m + i]).sum();
                    mean[a * d + b] = var * cross * ppt;
                }
            }
            Ok(Some(mean))
        }
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(d_out: usize, m: usize, s: usize, sharing: Sharing) -> TensorConfig {
        TensorConfig {
            m,
            d_out,
            s,
            coeffs: vec![CoefficientSpec::standard(0.8, 256).unwrap()],
            innov: InnovationSpec::gaussian(1.0),
            sharing,
            length: 512,
            window: 256,
            p_grid: vec![1.2, 1.8],
            memory_cap: DEFAULT_TENSOR_CAP,
            keep_tensors: true,
        }
    }

    #[test]
    fn pattern_has_unit_norm() {
        for (d, m) in [(1, 1), (2, 3), (4, 4)] {
            let p = pattern_matrix(d, m);
            let norm: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-15);
        }
        assert_eq!(pattern_matrix(1, 1), vec![1.0]);
    }

    #[test]
    fn size_cap_is_enforced() {
        let mut cfg = config(10, 1, 7, Sharing::Independent);
        cfg.memory_cap = 1_000_000;
        assert!(matches!(simulate_tensor_paths(&cfg, 0), Err(Error::Size { .. })));
    }

    #[test]
    fn traces_have_one_value_per_step() {
        let cfg = config(2, 2, 2, Sharing::Shared);
        let run = simulate_tensor_paths(&cfg, 3).unwrap();
        assert_eq!(run.entries_per_tensor, 4);
        assert_eq!(run.traces.len(), 2);
        assert!(run.traces.iter().all(|t| t.len() == 512));
        assert_eq!(run.centering, Centering::Analytic);
        assert_eq!(run.tensors.as_ref().unwrap().len(), 512 * 4);
    }

    #[test]
    fn shared_fourth_power_falls_back_to_empirical_mean() {
        let cfg = config(1, 1, 4, Sharing::Shared);
        let run = simulate_tensor_paths(&cfg, 3).unwrap();
        assert_eq!(run.centering, Centering::Empirical);
        // empirical centring sends the full partial sum to zero
        let last = *run.traces[0].last().unwrap();
        assert!(last < 1e-9 * run.mean[0].abs().max(1.0) * 512.0);
    }

    #[test]
    fn analytic_second_moment_matches_sample_average() {
        let mut cfg = config(2, 2, 2, Sharing::Shared);
        cfg.length = 1 << 14;
        cfg.window = 64;
        cfg.coeffs = vec![CoefficientSpec::standard(0.9, 64).unwrap()];
        let run = simulate_tensor_paths(&cfg, 8).unwrap();
        let tensors = run.tensors.unwrap();
        for e in 0..4 {
            let avg: f64 = tensors.iter().skip(e).step_by(4).sum::<f64>() / cfg.length as f64;
            assert!((avg / run.mean[e] - 1.0).abs() < 0.15, "entry {e}: {avg} vs {}", run.mean[e]);
        }
    }
}
