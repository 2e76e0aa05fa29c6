//! Self-checks run by `lrdht verify`: kernel bound ratios, Monte Carlo
//! convergence patterns, closed-form moment checks and the scalar
//! degeneracy of the tensor pipeline.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::innovations::InnovationSpec;
use crate::kernel::{verify_kernel_bound, CoefficientSpec};
use crate::linproc::tensor::{simulate_tensor_paths, TensorConfig, DEFAULT_TENSOR_CAP};
use crate::linproc::{simulate_paths, ProcessConfig, Sharing, DEFAULT_WINDOW};
use crate::montecarlo::{autocovariance_slope, median, partial_sum_ratios, variance_check, RatioExperiment};
use crate::rng::replication_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    /// `(file name, TSV contents)` supporting the checks.
    pub evidence: Vec<(String, String)>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self {
            suite: suite.to_owned(),
            checks: Vec::new(),
            evidence: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("suite\tcheck\tresult\tdetail\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                self.suite,
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail
            );
        }
        out
    }
}

pub const KERNEL_GAMMAS: [f64; 4] = [0.6, 0.75, 1.0, 1.5];
pub const KERNEL_LAG_MAX: u64 = 1000;
pub const KERNEL_RADIUS: u64 = 1_000_000;
pub const KERNEL_MAX_SPREAD: f64 = 10.0;

/// Ratio of each cross sum to its bound shape stays within a 10× band.
pub fn kernel_suite(radius: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("kernel");
    for &gamma in &KERNEL_GAMMAS {
        let res = verify_kernel_bound(gamma, KERNEL_LAG_MAX, radius)?;
        let mut reports = vec![("equal", res.equal)];
        if gamma == 0.75 {
            if let Some(m) = res.mixed {
                reports.push(("mixed", m));
            }
        }
        for (kind, r) in reports {
            let spread = r.spread();
            report.check(
                format!("{kind} gamma={gamma}"),
                spread.is_finite() && spread < KERNEL_MAX_SPREAD,
                format!("spread {spread:.4}, ratio in [{:.4e}, {:.4e}]", r.min_ratio(), r.max_ratio()),
            );
            report.evidence.push((format!("kernel_{kind}_gamma{gamma}.tsv"), r.to_tsv()));
        }
    }
    Ok(report)
}

pub const MSLLN_REPLICATIONS: usize = 32;
pub const MSLLN_N_SMALL: usize = 1 << 12;
pub const MSLLN_N_LARGE: usize = 1 << 16;

/// Long-memory gaussian process, `s = 1`, σ = 0.8 (`p_max = 2/1.4`).
pub fn lrd_experiment(base_seed: u64, replications: usize) -> Result<RatioExperiment> {
    Ok(RatioExperiment {
        config: ProcessConfig::single(
            CoefficientSpec::standard(0.8, DEFAULT_WINDOW)?,
            InnovationSpec::gaussian(1.0),
            MSLLN_N_LARGE,
            DEFAULT_WINDOW,
        ),
        p_values: vec![1.2, 1.8],
        n_small: MSLLN_N_SMALL,
        n_large: MSLLN_N_LARGE,
        replications,
        base_seed,
    })
}

/// i.i.d. symmetric Pareto with α = 1.5 (`c_0 = 1` only).
pub fn heavy_tail_experiment(base_seed: u64, replications: usize) -> Result<RatioExperiment> {
    Ok(RatioExperiment {
        config: ProcessConfig::single(
            CoefficientSpec::standard(0.8, 1)?,
            InnovationSpec::symmetric_pareto(1.5, 1.0),
            MSLLN_N_LARGE,
            0,
        ),
        p_values: vec![1.3, 1.8],
        n_small: MSLLN_N_SMALL,
        n_large: MSLLN_N_LARGE,
        replications,
        base_seed,
    })
}

/// Median ratios `f(2^16)/f(2^12)` inside and outside the rate bound.
pub fn mslln_suite(base_seed: u64, replications: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("mslln");
    let cases = [
        ("lrd sigma=0.8", lrd_experiment(base_seed, replications)?, (1.2, 0.5), (1.8, 0.7)),
        (
            "iid pareto alpha=1.5",
            heavy_tail_experiment(base_seed, replications)?,
            (1.3, 0.6),
            (1.8, 0.7),
        ),
    ];
    for (name, exp, (p_in, below), (p_out, above)) in cases {
        let res = partial_sum_ratios(&exp)?;
        let m_in = res.median_at(p_in).unwrap_or(f64::NAN);
        let m_out = res.median_at(p_out).unwrap_or(f64::NAN);
        report.check(
            format!("{name} p={p_in}"),
            m_in < below,
            format!("median {m_in:.4} (needs < {below})"),
        );
        report.check(
            format!("{name} p={p_out}"),
            m_out > above,
            format!("median {m_out:.4} (needs > {above})"),
        );
        let mut tsv = String::from("replication\tp\tratio\n");
        for s in &res.summaries {
            for (i, r) in s.ratios.iter().enumerate() {
                let _ = writeln!(tsv, "{i}\t{}\t{r:?}", s.p);
            }
        }
        report
            .evidence
            .push((format!("mslln_{}.tsv", name.replace([' ', '='], "_")), tsv));
    }
    Ok(report)
}

pub const MOMENT_REPLICATIONS: usize = 64;
pub const MOMENT_LENGTH: usize = 1 << 14;

fn gaussian_process(sigma: f64) -> Result<ProcessConfig> {
    Ok(ProcessConfig::single(
        CoefficientSpec::standard(sigma, DEFAULT_WINDOW)?,
        InnovationSpec::gaussian(1.0),
        MOMENT_LENGTH,
        DEFAULT_WINDOW,
    ))
}

/// Second moment against `Σ c_l²` and autocovariance decay against `1 − 2σ`.
pub fn process_suite(base_seed: u64, replications: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("process");
    for sigma in [0.7, 0.9] {
        let v = variance_check(&gaussian_process(sigma)?, replications, base_seed)?;
        report.check(
            format!("variance sigma={sigma}"),
            v.relative_error < 0.05,
            format!(
                "mean x^2 {:.5} vs {:.5} (relative error {:.4})",
                v.empirical, v.oracle, v.relative_error
            ),
        );
    }
    let ac = autocovariance_slope(&gaussian_process(0.7)?, replications, base_seed, (8, 64))?;
    let target = 1.0 - 2.0 * 0.7;
    report.check(
        "autocovariance slope sigma=0.7",
        (ac.slope - target).abs() <= 0.15,
        format!("slope {:.4} vs {target:.4}", ac.slope),
    );
    let mut tsv = String::from("lag\tgamma\n");
    for (h, g) in ac.gamma.iter().enumerate() {
        let _ = writeln!(tsv, "{h}\t{g:?}");
    }
    report.evidence.push(("autocovariance_sigma0.7.tsv".into(), tsv));
    Ok(report)
}

/// Largest relative difference between the `m = d_out = 1` tensor pipeline
/// and the scalar product pipeline for `s = 2`.
pub fn tensor_degeneracy_gap(seed: u64, length: usize, sharing: Sharing) -> Result<f64> {
    let coeff = CoefficientSpec::standard(0.8, 256)?;
    let innov = InnovationSpec::gaussian(1.0);
    let scalar = simulate_paths(
        &ProcessConfig {
            s: 2,
            coeffs: vec![coeff],
            innov,
            sharing,
            length,
            window: 256,
        },
        seed,
    )?;
    let tensor = simulate_tensor_paths(
        &TensorConfig {
            m: 1,
            d_out: 1,
            s: 2,
            coeffs: vec![coeff],
            innov,
            sharing,
            length,
            window: 256,
            p_grid: vec![1.5],
            memory_cap: DEFAULT_TENSOR_CAP,
            keep_tensors: true,
        },
        seed,
    )?;
    let t = tensor.tensors.unwrap_or_default();
    let scale = scalar.d.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    Ok(scalar
        .d
        .iter()
        .zip(&t)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale)
}

pub fn tensor_suite(base_seed: u64, replications: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("tensor");
    for sharing in [Sharing::Shared, Sharing::Independent] {
        let gap = tensor_degeneracy_gap(base_seed, 1 << 10, sharing)?;
        report.check(
            format!("scalar degeneracy {sharing:?}").to_lowercase(),
            gap <= 1e-12,
            format!("max relative gap {gap:.3e}"),
        );
    }
    // d_out = 2, s = 2, σ = 0.8: p = 1.2 lies inside the bound of 2
    let (n_small, n_large) = (1usize << 10, 1usize << 14);
    let cfg = TensorConfig {
        m: 2,
        d_out: 2,
        s: 2,
        coeffs: vec![CoefficientSpec::standard(0.8, DEFAULT_WINDOW)?],
        innov: InnovationSpec::gaussian(1.0),
        sharing: Sharing::Shared,
        length: n_large,
        window: DEFAULT_WINDOW,
        p_grid: vec![1.2],
        memory_cap: DEFAULT_TENSOR_CAP,
        keep_tensors: false,
    };
    let ratios: Vec<f64> = {
        use rayon::prelude::*;
        (0..replications as u64)
            .into_par_iter()
            .map(|rep| {
                let run = simulate_tensor_paths(&cfg, replication_seed(base_seed, rep))?;
                Ok(run.traces[0][n_large - 1] / run.traces[0][n_small - 1])
            })
            .collect::<Result<_>>()?
    };
    let med = median(&ratios);
    report.check(
        "frobenius trace decreasing d_out=2 p=1.2",
        med < 1.0,
        format!("median trace(2^14)/trace(2^10) {med:.4} (needs < 1)"),
    );
    let mut tsv = String::from("replication\tratio\n");
    for (i, r) in ratios.iter().enumerate() {
        let _ = writeln!(tsv, "{i}\t{r:?}");
    }
    report.evidence.push(("tensor_trace_ratios.tsv".into(), tsv));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_tsv_lists_every_check() {
        let mut r = SuiteReport::new("x");
        r.check("a", true, "fine");
        r.check("b", false, "off");
        assert!(!r.passed());
        let tsv = r.to_tsv();
        assert_eq!(tsv.lines().count(), 3);
        assert!(tsv.contains("x\tb\tFAIL\toff"));
    }

    #[test]
    fn tensor_pipeline_degenerates_to_scalar() {
        assert!(tensor_degeneracy_gap(4, 1 << 10, Sharing::Shared).unwrap() <= 1e-12);
        assert!(tensor_degeneracy_gap(4, 1 << 10, Sharing::Independent).unwrap() <= 1e-12);
    }
}
