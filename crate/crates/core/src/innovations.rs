//! Zero-mean i.i.d. innovation samplers.
//!
//! Every draw is `sign · magnitude` with the magnitude and the sign taken
//! from two separate ChaCha streams (see [`crate::rng`]). All built-in
//! families are symmetric, so flipping the sign stream negates the sample
//! without changing its law.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationFamily {
    Gaussian,
    StudentT,
    SymmetricPareto,
}

impl std::fmt::Display for InnovationFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InnovationFamily::Gaussian => "gaussian",
            InnovationFamily::StudentT => "student_t",
            InnovationFamily::SymmetricPareto => "symmetric_pareto",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnovationSpec {
    pub family: InnovationFamily,
    /// Degrees of freedom (Student t) or tail index (Pareto); ignored for
    /// the Gaussian.
    #[serde(rename = "alpha", default = "default_alpha", with = "crate::ext_real")]
    pub df_or_alpha: f64,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default = "default_symmetric", skip_serializing)]
    pub symmetric: bool,
}

fn default_alpha() -> f64 {
    f64::INFINITY
}
fn default_scale() -> f64 {
    1.0
}
fn default_symmetric() -> bool {
    true
}

impl InnovationSpec {
    pub fn gaussian(scale: f64) -> Self {
        Self {
            family: InnovationFamily::Gaussian,
            df_or_alpha: f64::INFINITY,
            scale,
            symmetric: true,
        }
    }

    pub fn student_t(df: f64, scale: f64) -> Self {
        Self {
            family: InnovationFamily::StudentT,
            df_or_alpha: df,
            scale,
            symmetric: true,
        }
    }

    /// Density proportional to `|x|^(-(alpha+1))` on `|x| > scale`.
    pub fn symmetric_pareto(alpha: f64, scale: f64) -> Self {
        Self {
            family: InnovationFamily::SymmetricPareto,
            df_or_alpha: alpha,
            scale,
            symmetric: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Config(format!("innovation scale must be positive, got {}", self.scale)));
        }
        if self.family != InnovationFamily::Gaussian && !(self.df_or_alpha > 0.0 && self.df_or_alpha.is_finite()) {
            return Err(Error::Config(format!(
                "{} requires a positive finite tail parameter, got {}",
                self.family, self.df_or_alpha
            )));
        }
        if !self.symmetric {
            return Err(Error::Config("only symmetric innovation families are supported".into()));
        }
        Ok(())
    }

    /// Heavy-tail coefficient β; `f64::INFINITY` for the Gaussian.
    pub fn tail_coefficient(&self) -> f64 {
        match self.family {
            InnovationFamily::Gaussian => f64::INFINITY,
            InnovationFamily::StudentT | InnovationFamily::SymmetricPareto => self.df_or_alpha,
        }
    }

    /// Closed-form variance, `f64::INFINITY` when the second moment does not exist.
    pub fn variance(&self) -> f64 {
        let s2 = self.scale * self.scale;
        match self.family {
            InnovationFamily::Gaussian => s2,
            InnovationFamily::StudentT if self.df_or_alpha > 2.0 => s2 * self.df_or_alpha / (self.df_or_alpha - 2.0),
            InnovationFamily::SymmetricPareto if self.df_or_alpha > 2.0 => {
                s2 * self.df_or_alpha / (self.df_or_alpha - 2.0)
            }
            _ => f64::INFINITY,
        }
    }

    /// Exact `P(|X| > x)` for the Pareto family.
    pub fn pareto_exceedance(&self, x: f64) -> Option<f64> {
        (self.family == InnovationFamily::SymmetricPareto).then(|| {
            if x <= self.scale {
                1.0
            } else {
                (self.scale / x).powf(self.df_or_alpha)
            }
        })
    }

    /// `count` draws from stream `key`, negated when `flip_signs` is set.
    pub fn draw(&self, count: usize, key: StreamKey, flip_signs: bool) -> Result<Vec<f64>> {
        self.validate()?;
        if count == 0 {
            return Err(Error::Empty("innovation count must be at least 1".into()));
        }
        let mut mag_rng = key.magnitude_rng();
        let mut sign_rng = key.sign_rng();
        let mut out = Vec::with_capacity(count);
        match self.family {
            InnovationFamily::Gaussian => {
                for _ in 0..count {
                    let z: f64 = StandardNormal.sample(&mut mag_rng);
                    out.push(self.scale * z.abs());
                }
            }
            InnovationFamily::StudentT => {
                let t = StudentT::new(self.df_or_alpha).map_err(|e| Error::Config(e.to_string()))?;
                for _ in 0..count {
                    out.push(self.scale * t.sample(&mut mag_rng).abs());
                }
            }
            InnovationFamily::SymmetricPareto => {
                let inv_alpha = -1.0 / self.df_or_alpha;
                for _ in 0..count {
                    // (0, 1]
                    let u = 1.0 - mag_rng.random::<f64>();
                    out.push(self.scale * u.powf(inv_alpha));
                }
            }
        }
        for v in out.iter_mut() {
            let negative = sign_rng.random::<bool>() != flip_signs;
            if negative {
                *v = -*v;
            }
        }
        Ok(out)
    }

    /// Flat `key = value` block with `family`, `alpha` and `scale`.
    pub fn to_config_block(&self) -> String {
        let alpha = if self.df_or_alpha.is_finite() {
            format!("{:?}", self.df_or_alpha)
        } else {
            "inf".to_string()
        };
        format!("family = \"{}\"\nalpha = {}\nscale = {:?}\n", self.family, alpha, self.scale)
    }

    pub fn from_config_block(text: &str) -> Result<Self> {
        let spec: InnovationSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// `count` draws of `spec` on stream 0 of `seed`.
pub fn sample(spec: &InnovationSpec, count: usize, seed: u64) -> Result<Vec<f64>> {
    spec.draw(count, StreamKey::new(seed, 0), false)
}

/// `max_x x^q · #{|sample| > x} / n` over the grid.
pub fn empirical_tail_check(samples: &[f64], q: f64, grid: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("no samples".into()));
    }
    if grid.is_empty() {
        return Err(Error::Config("tail-check grid is empty".into()));
    }
    if !(q >= 0.0) {
        return Err(Error::Config(format!("q must be non-negative, got {q}")));
    }
    if grid.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Config("tail-check grid values must be positive".into()));
    }
    let mut abs: Vec<f64> = samples.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let n = abs.len() as f64;
    let best = grid
        .iter()
        .map(|&x| {
            let at_most = abs.partition_point(|&v| v <= x);
            x.powf(q) * (abs.len() - at_most) as f64 / n
        })
        .fold(0.0, f64::max);
    Ok(best)
}
