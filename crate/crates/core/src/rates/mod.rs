//! Marcinkiewicz rate bounds for products of linear processes.
//!
//! Each bound is the supremum `p_max` of exponents for which
//! `n^(-1/p) Σ_{k≤n} (d_k − E d_k) → 0` almost surely. A rate term whose
//! denominator is not positive (σ at its closure value 1) is `+∞`.

mod inversion;
mod predict;

use serde::{Deserialize, Serialize};

pub use inversion::{estimate_parameters, Bound, ParamEstimate, RowEvidence, RowShape};
pub use predict::predict_table;

use crate::error::{Error, Result};

/// `1/den`, or `+∞` when `den ≤ 0`.
fn recip_or_inf(num: f64, den: f64) -> f64 {
    if den <= 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.5 && sigma <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("sigma must lie in (0.5, 1.0], got {sigma}")))
    }
}

/// Equal-process bound for `d_k = (x_k)^s`, where `alpha` is the tail index
/// of `|ξ|^s` (`f64::INFINITY` when light tailed).
///
/// `alpha` only has to be positive here: the forward model evaluates
/// `α_s = α₁/s`, which drops below 1 for heavy-tailed data.
pub fn corollary_bound(s: u32, sigma: f64, alpha: f64, relaxed: bool) -> Result<f64> {
    check_sigma(sigma)?;
    if s == 0 {
        return Err(Error::Config("s must be at least 1".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("tail index must be positive, got {alpha}")));
    }
    if relaxed {
        if s % 2 != 0 {
            return Err(Error::Config("the relaxed bound requires even s".into()));
        }
        return Ok(2f64.min(alpha).min(recip_or_inf(1.0, 2.0 - 2.0 * sigma)));
    }
    Ok(match s {
        1 => 2.0 / (3.0 - 2.0 * sigma),
        2 => 2f64.min(alpha).min(recip_or_inf(1.0, 2.0 - 2.0 * sigma)),
        _ => alpha.min(2.0 / (3.0 - 2.0 * sigma)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    pub s: u32,
    /// One decay exponent per factor, or a single shared one.
    pub sigmas: Vec<f64>,
    #[serde(with = "crate::ext_real")]
    pub alpha0: f64,
    /// Shared symmetric innovations with even `s`.
    #[serde(default)]
    pub relaxed: bool,
    /// `E ξ^(2s) < ∞`: the tail index drops out.
    #[serde(default)]
    pub light_tailed: bool,
}

impl RateInputs {
    fn sigmas(&self) -> Result<Vec<f64>> {
        let s = self.s as usize;
        let sig = match self.sigmas.len() {
            1 => vec![self.sigmas[0]; s],
            n if n == s => self.sigmas.clone(),
            n => {
                return Err(Error::Config(format!("expected 1 or {s} sigma values, got {n}")));
            }
        };
        for &v in &sig {
            check_sigma(v)?;
        }
        Ok(sig)
    }
}

/// General product bound with per-factor decay exponents.
pub fn theorem_bound(inputs: &RateInputs) -> Result<f64> {
    if inputs.s == 0 {
        return Err(Error::Config("s must be at least 1".into()));
    }
    let sig = inputs.sigmas()?;
    let alpha = if inputs.light_tailed {
        f64::INFINITY
    } else {
        if !(inputs.alpha0 > 1.0) {
            return Err(Error::Domain(format!("alpha0 must exceed 1, got {}", inputs.alpha0)));
        }
        inputs.alpha0
    };
    let min_sigma = sig.iter().copied().fold(f64::INFINITY, f64::min);
    if inputs.relaxed {
        if inputs.s % 2 != 0 {
            return Err(Error::Config("the relaxed bound requires even s".into()));
        }
        let mut best_pair = f64::INFINITY;
        for i in 0..sig.len() {
            for j in i + 1..sig.len() {
                best_pair = best_pair.min(sig[i] + sig[j]);
            }
        }
        return Ok(2f64.min(alpha).min(recip_or_inf(1.0, 2.0 - best_pair)));
    }
    Ok(match inputs.s {
        1 => 2.0 / (3.0 - 2.0 * sig[0]),
        2 => 2f64.min(alpha).min(recip_or_inf(1.0, 2.0 - sig[0] - sig[1])),
        _ => alpha.min(2.0 / (3.0 - 2.0 * min_sigma)),
    })
}

/// Tail index of `|ξ|^s` given that of `ξ`: `α_s = α₁ / s`.
pub fn alpha_for_power(alpha1: f64, s: u32) -> f64 {
    alpha1 / s as f64
}

/// The σ-dependent part of the equal-process bound, i.e. the bound with the
/// tail term removed. `None` for σ means "no long-range dependence", where
/// `s = 2` keeps the cap at 2 and `s > 2` has no σ term.
pub fn sigma_term(s: u32, sigma: Option<f64>) -> f64 {
    match (s, sigma) {
        (1, Some(sig)) => 2.0 / (3.0 - 2.0 * sig),
        (1, None) => 2.0,
        (2, Some(sig)) => 2f64.min(recip_or_inf(1.0, 2.0 - 2.0 * sig)),
        (2, None) => 2.0,
        (_, Some(sig)) => 2.0 / (3.0 - 2.0 * sig),
        (_, None) => f64::INFINITY,
    }
}
