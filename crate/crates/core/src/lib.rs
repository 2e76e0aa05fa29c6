//! Simulation and diagnostics for long-range dependent, heavy-tailed data.
//!
//! The crate is organised bottom-up:
//!
//! - [`kernel`]: power-law coefficient families, the `l_{n,β}` normalisation and
//!   brute-force checks of the kernel cross-sum bounds.
//! - [`innovations`]: seeded, reproducible zero-mean innovation samplers.
//! - [`linproc`]: truncated two-sided linear processes, their products and the
//!   matrix-coefficient tensor variant.
//! - [`statistic`]: the running-mean normalised partial-sum trace `f(n)` and the
//!   convergence/divergence verdict rule.
//! - [`rates`]: Marcinkiewicz rate bounds, the forward verdict model and its
//!   inversion into (σ, α₁) estimates.
//! - [`ingest`]: price CSV loading, log returns and window selection.
//! - [`montecarlo`]: replicated partial-sum experiments.
//! - [`verify`]: the self-check suites behind `lrdht verify`.

pub mod error;
mod ext_real;
pub mod ingest;
pub mod innovations;
pub mod kernel;
pub mod linproc;
pub mod montecarlo;
pub mod rates;
pub mod rng;
pub mod statistic;
pub mod verify;

pub use error::{Error, Result};
pub use innovations::{InnovationFamily, InnovationSpec};
pub use kernel::{CoefficientSpec, LPolyParams};
pub use linproc::{PathEnsemble, ProcessConfig, Sharing};
pub use rates::{ParamEstimate, RateInputs};
pub use statistic::{MarcTrace, Outcome, RunningMeanConfig, Verdict, VerdictRule, VerdictTable};
