//! Power-law coefficient families and kernel cross-sum bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric power-law coefficients `c_l = scale·|l|^(-sigma)` for
/// `0 < |l| ≤ window`, with `c_0 = center_value`.
///
/// The slowly varying factor is the constant `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec {
    pub sigma: f64,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "one")]
    pub center_value: f64,
    pub window: u64,
}

fn one() -> f64 {
    1.0
}

impl CoefficientSpec {
    pub fn new(sigma: f64, scale: f64, center_value: f64, window: u64) -> Result<Self> {
        let spec = Self {
            sigma,
            scale,
            center_value,
            window,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `scale = center_value = 1`.
    pub fn standard(sigma: f64, window: u64) -> Result<Self> {
        Self::new(sigma, 1.0, 1.0, window)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.5 && self.sigma <= 1.0) {
            return Err(Error::Config(format!(
                "sigma must lie in (0.5, 1.0], got {}",
                self.sigma
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Config(format!("scale must be positive, got {}", self.scale)));
        }
        if !self.center_value.is_finite() {
            return Err(Error::Config("center_value must be finite".into()));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        Ok(())
    }

    /// Coefficient at lag `l`.
    pub fn coefficient(&self, l: i64) -> Result<f64> {
        if l.unsigned_abs() > self.window {
            return Err(Error::OutOfWindow {
                lag: l,
                window: self.window,
            });
        }
        Ok(self.coefficient_unchecked(l.unsigned_abs()))
    }

    pub(crate) fn coefficient_unchecked(&self, abs_lag: u64) -> f64 {
        if abs_lag == 0 {
            self.center_value
        } else {
            self.scale * (abs_lag as f64).powf(-self.sigma)
        }
    }

    /// `c_{-m}, …, c_m` for the truncation half-width `m` (`m ≤ window`).
    /// `m = 0` gives the single centre coefficient.
    pub fn taps(&self, m: u64) -> Result<Vec<f64>> {
        if m > self.window {
            return Err(Error::OutOfWindow {
                lag: m as i64,
                window: self.window,
            });
        }
        let m = m as i64;
        Ok((-m..=m).map(|l| self.coefficient_unchecked(l.unsigned_abs())).collect())
    }

    /// `Σ_{|l| ≤ m} c_l²`.
    pub fn sum_of_squares(&self, m: u64) -> Result<f64> {
        let taps = self.taps(m)?;
        Ok(taps.iter().map(|c| c * c).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LPolyParams {
    pub n: u32,
    pub beta: f64,
}

/// The three-branch normalisation `l_{n,β}(x)`:
/// `x^(n(1-2β)+1)` below the critical `β = (n+1)/(2n)`, `ln(x+1)` at it and
/// `1` above it.
pub fn l_poly(params: LPolyParams, x: f64) -> Result<f64> {
    if params.n == 0 {
        return Err(Error::Config("l_poly requires n >= 1".into()));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("l_poly requires x >= 0, got {x}")));
    }
    let n = params.n as f64;
    let critical = (n + 1.0) / (2.0 * n);
    let beta = params.beta;
    if (beta - critical).abs() <= 1e-12 * critical {
        Ok(x.ln_1p())
    } else if beta < critical {
        Ok(x.powf(n * (1.0 - 2.0 * beta) + 1.0))
    } else {
        Ok(1.0)
    }
}

/// `Σ_{l ∈ [-radius, radius], l ∉ {j,k}} |j-l|^(-γ_left)·|k-l|^(-γ_right)`,
/// summed term by term.
pub fn kernel_cross_sum(j: i64, k: i64, gamma_left: f64, gamma_right: f64, radius: u64) -> Result<f64> {
    if j == k {
        return Err(Error::DegeneratePair(j));
    }
    if !(gamma_left > 0.5 && gamma_right > 0.5) {
        return Err(Error::Config(format!(
            "exponents must exceed 1/2, got ({gamma_left}, {gamma_right})"
        )));
    }
    let gap = j.abs_diff(k);
    if radius < 2 * gap {
        return Err(Error::Config(format!(
            "radius {radius} must be at least 2·|j-k| = {}",
            2 * gap
        )));
    }
    let r = radius as i64;
    let mut sum = 0.0;
    for l in -r..=r {
        if l == j || l == k {
            continue;
        }
        sum += ((j - l).unsigned_abs() as f64).powf(-gamma_left)
            * ((k - l).unsigned_abs() as f64).powf(-gamma_right);
    }
    Ok(sum)
}

/// Which reference rate the cross sum is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundShape {
    /// `d^(1-2γ)`, equal exponents with γ ∈ (1/2, 1).
    PowerOneMinusTwoGamma,
    /// `d^(-1)·ln(d+1)`, equal exponents with γ = 1.
    LogOverLag,
    /// `d^(-γ)`, equal exponents with γ > 1, or the mixed `(γ, 2γ)` pair.
    PowerMinusGamma,
}

impl BoundShape {
    pub fn for_equal_exponents(gamma: f64) -> Self {
        if (gamma - 1.0).abs() < 1e-12 {
            BoundShape::LogOverLag
        } else if gamma < 1.0 {
            BoundShape::PowerOneMinusTwoGamma
        } else {
            BoundShape::PowerMinusGamma
        }
    }

    pub fn eval(&self, gamma: f64, lag: u64) -> f64 {
        let d = lag as f64;
        match self {
            BoundShape::PowerOneMinusTwoGamma => d.powf(1.0 - 2.0 * gamma),
            BoundShape::LogOverLag => d.recip() * d.ln_1p(),
            BoundShape::PowerMinusGamma => d.powf(-gamma),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundRow {
    pub lag: u64,
    pub sum: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundReport {
    pub gamma_left: f64,
    pub gamma_right: f64,
    pub shape: BoundShape,
    pub radius: u64,
    pub rows: Vec<KernelBoundRow>,
}

impl KernelBoundReport {
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min)
    }

    /// max/min ratio over all lags.
    pub fn spread(&self) -> f64 {
        self.max_ratio() / self.min_ratio()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("lag\tsum\tbound\tratio\n");
        for row in &self.rows {
            out.push_str(&format!("{}\t{:.17e}\t{:.17e}\t{:.17e}\n", row.lag, row.sum, row.bound, row.ratio));
        }
        out
    }
}

/// Equal-exponent report and, for γ < 1, the mixed `(γ, 2γ)` report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundCheck {
    pub equal: KernelBoundReport,
    pub mixed: Option<KernelBoundReport>,
}

pub fn verify_kernel_bound(gamma: f64, lag_max: u64, radius: u64) -> Result<KernelBoundCheck> {
    let equal = kernel_bound_report(gamma, gamma, BoundShape::for_equal_exponents(gamma), lag_max, radius)?;
    let mixed = if gamma < 1.0 {
        Some(kernel_bound_report(
            gamma,
            2.0 * gamma,
            BoundShape::PowerMinusGamma,
            lag_max,
            radius,
        )?)
    } else {
        None
    };
    Ok(KernelBoundCheck { equal, mixed })
}

/// Cross sums `S(d) = kernel_cross_sum(d, 0, γ_left, γ_right, radius)` for
/// `d ∈ [2, lag_max]`, each divided by `shape` evaluated at `d` with
/// exponent `γ_left`.
pub fn kernel_bound_report(
    gamma_left: f64,
    gamma_right: f64,
    shape: BoundShape,
    lag_max: u64,
    radius: u64,
) -> Result<KernelBoundReport> {
    if !(gamma_left > 0.5 && gamma_right > 0.5) {
        return Err(Error::Config("exponents must exceed 1/2".into()));
    }
    if lag_max < 2 {
        return Err(Error::Config("lag_max must be at least 2".into()));
    }
    if radius < 2 * lag_max {
        return Err(Error::Config(format!(
            "radius {radius} must be at least 2·lag_max = {}",
            2 * lag_max
        )));
    }
    let tables = PowerTables::new(gamma_left, gamma_right, (radius + lag_max) as usize);
    let rows = (2..=lag_max)
        .into_par_iter()
        .map(|lag| {
            let sum = tables.cross_sum(lag as usize, radius as usize);
            let bound = shape.eval(gamma_left, lag);
            KernelBoundRow {
                lag,
                sum,
                bound,
                ratio: sum / bound,
            }
        })
        .collect();
    Ok(KernelBoundReport {
        gamma_left,
        gamma_right,
        shape,
        radius,
        rows,
    })
}

/// `left[t] = t^(-γ_left)`, `right[t] = t^(-γ_right)`, index 0 unused.
struct PowerTables {
    left: Vec<f64>,
    right: Vec<f64>,
}

impl PowerTables {
    fn new(gamma_left: f64, gamma_right: f64, len: usize) -> Self {
        let build = |g: f64| {
            let mut v: Vec<f64> = (0..=len).into_par_iter().map(|t| (t as f64).powf(-g)).collect();
            v[0] = 0.0;
            v
        };
        Self {
            left: build(gamma_left),
            right: build(gamma_right),
        }
    }

    /// Same value as `kernel_cross_sum(d, 0, ..)`, with the range split so
    /// every piece is a contiguous dot product:
    /// `l = -t` (t ∈ 1..=R), `0 < l < d`, and `l = d + u` (u ∈ 1..=R-d).
    fn cross_sum(&self, d: usize, radius: usize) -> f64 {
        let below = dot(&self.right[1..=radius], &self.left[1 + d..=radius + d]);
        let between = dot_rev(&self.right[1..d], &self.left[1..d]);
        let above = dot(&self.left[1..=radius - d], &self.right[1 + d..=radius]);
        below + between + above
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let chunks_a = a.chunks_exact(8);
    let chunks_b = b.chunks_exact(8);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for i in 0..8 {
            acc[i] += ca[i] * cb[i];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// `Σ_i a[i]·b[len-1-i]`.
fn dot_rev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter().rev()).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    #[test]
    fn coefficient_examples() {
        let s = CoefficientSpec::new(0.75, 1.0, 1.0, 100).unwrap();
        assert!(close(s.coefficient(16).unwrap(), 0.125, 1e-15));
        let s = CoefficientSpec::new(1.0, 1.0, 1.0, 100).unwrap();
        assert_eq!(s.coefficient(-4).unwrap(), 0.25);
        let s = CoefficientSpec::new(0.6, 2.0, 1.0, 100).unwrap();
        assert_eq!(s.coefficient(0).unwrap(), 1.0);
    }

    #[test]
    fn coefficient_out_of_window() {
        let s = CoefficientSpec::standard(0.8, 10).unwrap();
        assert!(matches!(s.coefficient(11), Err(Error::OutOfWindow { lag: 11, .. })));
        assert!(s.coefficient(-10).is_ok());
    }

    #[test]
    fn spec_validation() {
        assert!(CoefficientSpec::standard(0.5, 10).is_err());
        assert!(CoefficientSpec::standard(1.01, 10).is_err());
        assert!(CoefficientSpec::new(0.8, 0.0, 1.0, 10).is_err());
        assert!(CoefficientSpec::standard(0.8, 0).is_err());
    }

    #[test]
    fn sup_of_weighted_coefficients_is_scale() {
        let s = CoefficientSpec::new(0.7, 2.5, 0.1, 500).unwrap();
        let sup = (1..=500i64)
            .map(|l| (l as f64).powf(0.7) * s.coefficient(l).unwrap().abs())
            .fold(0.0, f64::max);
        assert!(close(sup, 2.5, 1e-12));
    }

    #[test]
    fn l_poly_branches() {
        let v = l_poly(LPolyParams { n: 1, beta: 0.75 }, 100.0).unwrap();
        assert!(close(v, 10.0, 1e-14));
        let v = l_poly(LPolyParams { n: 1, beta: 1.0 }, std::f64::consts::E - 1.0).unwrap();
        assert!(close(v, 1.0, 1e-15));
        assert_eq!(l_poly(LPolyParams { n: 2, beta: 0.9 }, 50.0).unwrap(), 1.0);
        assert!(matches!(
            l_poly(LPolyParams { n: 1, beta: 0.7 }, -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn l_poly_order_between_n() {
        for &beta in &[0.55, 0.6, 0.7, 0.75, 0.8, 0.95, 1.0, 1.3] {
            // holds once ln(x+1) ≥ 1, i.e. x ≥ e - 1
            for &x in &[std::f64::consts::E - 1.0, 3.0, 50.0, 1e4, 1e8] {
                let l1 = l_poly(LPolyParams { n: 1, beta }, x).unwrap();
                let l2 = l_poly(LPolyParams { n: 2, beta }, x).unwrap();
                assert!(l2 <= l1 * (1.0 + 1e-12), "beta={beta} x={x} l1={l1} l2={l2}");
            }
        }
    }

    #[test]
    fn cross_sum_brute_force_values() {
        // mpmath, 40 digits
        let v = kernel_cross_sum(2, 0, 10.0, 10.0, 100).unwrap();
        assert!(close(v, 1.000_033_872_041_762_6, 1e-14));
        let v = kernel_cross_sum(1, 0, 2.0, 2.0, 1000).unwrap();
        assert!(close(v, 0.579_736_266_727_237_2, 1e-13));
        let v = kernel_cross_sum(5, -3, 0.75, 1.5, 200).unwrap();
        assert!(close(v, 1.066_665_780_004_949_8, 1e-13));
    }

    #[test]
    fn cross_sum_errors() {
        assert!(matches!(kernel_cross_sum(0, 0, 1.0, 1.0, 10), Err(Error::DegeneratePair(0))));
        assert!(kernel_cross_sum(10, 0, 1.0, 1.0, 19).is_err());
        assert!(kernel_cross_sum(1, 0, 0.5, 1.0, 10).is_err());
    }

    #[test]
    fn cross_sum_is_symmetric_and_translation_invariant_in_pairs() {
        let a = kernel_cross_sum(3, 0, 0.8, 0.8, 500).unwrap();
        let b = kernel_cross_sum(0, 3, 0.8, 0.8, 500).unwrap();
        assert!(close(a, b, 1e-12));
    }

    #[test]
    fn fast_tables_match_term_by_term_sum() {
        let radius = 20_000;
        for &(gl, gr) in &[(0.6, 0.6), (0.75, 1.5), (1.0, 1.0), (1.5, 1.5)] {
            let tables = PowerTables::new(gl, gr, radius + 50);
            for d in [2usize, 3, 17, 50] {
                let fast = tables.cross_sum(d, radius);
                let slow = kernel_cross_sum(d as i64, 0, gl, gr, radius as u64).unwrap();
                assert!(close(fast, slow, 1e-11), "gl={gl} gr={gr} d={d}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn cross_sum_grows_with_radius() {
        let mut prev = 0.0;
        for r in [100u64, 1_000, 10_000, 100_000] {
            let v = kernel_cross_sum(7, 0, 0.6, 0.6, r).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn cross_sum_radius_increments_obey_integral_tail() {
        // Doubling the radius adds at most 2·Σ_{R<t≤2R} t^(-2γ) ≤ 2·R^(1-2γ)/(2γ-1)
        // for d ≪ R.
        for &g in &[0.6, 0.75, 1.0] {
            let r = 100_000u64;
            let a = kernel_cross_sum(5, 0, g, g, r).unwrap();
            let b = kernel_cross_sum(5, 0, g, g, 2 * r).unwrap();
            let tail = 2.0 * (r as f64 - 5.0).powf(1.0 - 2.0 * g) / (2.0 * g - 1.0);
            assert!(b - a > 0.0 && b - a <= tail, "g={g}: {} vs {tail}", b - a);
        }
    }

    #[test]
    fn report_tsv_has_header_and_rows() {
        let rep = kernel_bound_report(1.5, 1.5, BoundShape::PowerMinusGamma, 5, 1000).unwrap();
        let tsv = rep.to_tsv();
        let lines: Vec<_> = tsv.lines().collect();
        assert_eq!(lines[0], "lag\tsum\tbound\tratio");
        assert_eq!(lines.len(), 5);
        assert!(rep.spread() >= 1.0);
    }
}
