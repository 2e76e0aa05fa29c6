use super::{alpha_for_power, corollary_bound};
use crate::error::{Error, Result};
use crate::statistic::{Outcome, VerdictTable};

/// Relative slack under which `1/e` and the bound count as equal; equality
/// means the exponent sits exactly at `p_max`, which is not a convergence case.
const BOUNDARY_TOL: f64 = 1e-9;

/// Forward model: the C/D table implied by `(σ, α₁)`. A cell converges iff
/// `p = 1/e` lies strictly below the bound for its row.
pub fn predict_table(label: &str, sigma: f64, alpha1: f64, s_list: &[u32], exponents: &[f64]) -> Result<VerdictTable> {
    if s_list.is_empty() || exponents.is_empty() {
        return Err(Error::Config("s list and exponent list must be non-empty".into()));
    }
    if let Some(e) = exponents.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::Config(format!("exponent 1/p must lie in (0, 1], got {e}")));
    }
    let mut cells = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let bound = corollary_bound(s, sigma, alpha_for_power(alpha1, s), false)?;
        let row = exponents
            .iter()
            .map(|&e| {
                let p = 1.0 / e;
                let at_boundary = bound.is_finite() && (p - bound).abs() <= BOUNDARY_TOL * bound;
                if p < bound && !at_boundary {
                    Outcome::Converges
                } else {
                    Outcome::Diverges
                }
            })
            .collect();
        cells.push(row);
    }
    Ok(VerdictTable {
        label: label.to_owned(),
        s_list: s_list.to_vec(),
        exponents: exponents.to_vec(),
        cells,
        diagnostics: None,
    })
}
