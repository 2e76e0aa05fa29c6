//! Normalised partial-sum diagnostic and its convergence verdict.
//!
//! For a series `x`, power `s` and exponent `e = 1/p`:
//!
//! ```text
//! μ      = ewma(x, ε)
//! r_k    = |x_k − μ_k|^s
//! m      = ewma(r, ρ)
//! f(k)   = k^(−e) · |Σ_{j≤k} (r_j − m_j)|
//! ```
//!
//! The verdict compares running averages of `f` over the tail of the trace
//! starting at `start`, `start + 1000` and `start + 1500` (1-based): the
//! trace converges when the first is at least 1.2 times the second and the
//! second at least 1.05 times the third.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunningMeanConfig {
    /// Smoothing rate of the running mean `μ`.
    pub epsilon: f64,
    /// Smoothing rate of the running `|x − μ|^s` mean `m`.
    pub rho: f64,
    /// 1-based index where the verdict averages begin.
    pub start: usize,
}

impl Default for RunningMeanConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.005,
            rho: 0.005,
            start: 601,
        }
    }
}

impl RunningMeanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::Config(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if self.start == 0 {
            return Err(Error::Config("start must be at least 1".into()));
        }
        Ok(())
    }
}

/// Offsets and thresholds of the verdict rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictRule {
    pub offsets: (usize, usize),
    pub thresholds: (f64, f64),
}

impl Default for VerdictRule {
    fn default() -> Self {
        Self {
            offsets: (1000, 1500),
            thresholds: (1.2, 1.05),
        }
    }
}

/// Length the default window convention was designed for.
pub const REFERENCE_LENGTH: usize = 2601;

/// Rescales `start` and the rule offsets to a series of length `len`,
/// keeping their proportions to the 2601-point reference window.
pub fn proportional_settings(cfg: RunningMeanConfig, rule: VerdictRule, len: usize) -> (RunningMeanConfig, VerdictRule) {
    let scale = |v: usize| ((v as f64) * len as f64 / REFERENCE_LENGTH as f64).round() as usize;
    (
        RunningMeanConfig {
            start: scale(cfg.start).max(1),
            ..cfg
        },
        VerdictRule {
            offsets: (scale(rule.offsets.0), scale(rule.offsets.1)),
            ..rule
        },
    )
}

/// `m_1 = x_1`, `m_t = (1 − ε)·m_{t−1} + ε·x_t`.
pub fn ewma(series: &[f64], epsilon: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let Some(&first) = series.first() else {
        return out;
    };
    out.push(first);
    let mut prev = first;
    for &v in &series[1..] {
        prev = (1.0 - epsilon) * prev + epsilon * v;
        out.push(prev);
    }
    out
}

/// `a_1 = x_1`, `a_t = (1 − 1/t)·a_{t−1} + (1/t)·x_t`: the running arithmetic mean.
pub fn decaying_avg(series: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let Some(&first) = series.first() else {
        return out;
    };
    out.push(first);
    let mut prev = first;
    for (i, &v) in series.iter().enumerate().skip(1) {
        let w = ((i + 1) as f64).powf(-1.0);
        prev = (1.0 - w) * prev + w * v;
        out.push(prev);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarcTrace {
    pub s: u32,
    pub exponent: f64,
    pub f: Vec<f64>,
    pub mu_trace: Vec<f64>,
    pub m_trace: Vec<f64>,
}

impl MarcTrace {
    /// `(k, f(k))` rows as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,f\n");
        for (k, v) in self.f.iter().enumerate() {
            let _ = writeln!(out, "{},{:?}", k + 1, v);
        }
        out
    }
}

pub fn marcinkiewicz_trace(x: &[f64], s: u32, exponent: f64, cfg: &RunningMeanConfig) -> Result<MarcTrace> {
    cfg.validate()?;
    if s == 0 {
        return Err(Error::Config("power s must be at least 1".into()));
    }
    if !(exponent > 0.0 && exponent <= 1.0) {
        return Err(Error::Config(format!("exponent 1/p must lie in (0, 1], got {exponent}")));
    }
    if x.len() < cfg.start {
        return Err(Error::Length {
            needed: cfg.start,
            got: x.len(),
        });
    }
    let mu = ewma(x, cfg.epsilon);
    let residual: Vec<f64> = x.iter().zip(&mu).map(|(v, m)| (v - m).abs().powi(s as i32)).collect();
    let m = ewma(&residual, cfg.rho);
    let mut cumsum = 0.0;
    let f = residual
        .iter()
        .zip(&m)
        .enumerate()
        .map(|(i, (r, mk))| {
            cumsum += r - mk;
            cumsum.abs() / ((i + 1) as f64).powf(exponent)
        })
        .collect();
    Ok(MarcTrace {
        s,
        exponent,
        f,
        mu_trace: mu,
        m_trace: m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Converges,
    Diverges,
}

impl Outcome {
    pub fn letter(self) -> char {
        match self {
            Outcome::Converges => 'C',
            Outcome::Diverges => 'D',
        }
    }

    pub fn from_letter(c: &str) -> Option<Self> {
        match c.trim() {
            "C" | "c" => Some(Outcome::Converges),
            "D" | "d" => Some(Outcome::Diverges),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub mean_whole: f64,
    pub mean_half: f64,
    pub mean_quarter: f64,
    /// `(whole / half, half / quarter)`.
    pub ratios: (f64, f64),
}

impl Verdict {
    pub fn from_means(mean_whole: f64, mean_half: f64, mean_quarter: f64, rule: &VerdictRule) -> Self {
        let outcome = if mean_whole < rule.thresholds.0 * mean_half || mean_half < rule.thresholds.1 * mean_quarter {
            Outcome::Diverges
        } else {
            Outcome::Converges
        };
        Verdict {
            outcome,
            mean_whole,
            mean_half,
            mean_quarter,
            ratios: (mean_whole / mean_half, mean_half / mean_quarter),
        }
    }
}

pub fn convergence_verdict(trace: &MarcTrace, cfg: &RunningMeanConfig, rule: &VerdictRule) -> Result<Verdict> {
    verdict_of_series(&trace.f, cfg.start, rule)
}

/// Verdict rule applied to an arbitrary non-negative trace.
pub fn verdict_of_series(f: &[f64], start: usize, rule: &VerdictRule) -> Result<Verdict> {
    if start == 0 {
        return Err(Error::Config("start must be at least 1".into()));
    }
    if rule.offsets.0 > rule.offsets.1 {
        return Err(Error::Config("verdict offsets must be non-decreasing".into()));
    }
    let needed = start + rule.offsets.1 + 1;
    if f.len() < needed {
        return Err(Error::Length { needed, got: f.len() });
    }
    let tail_mean = |from_1based: usize| *decaying_avg(&f[from_1based - 1..]).last().expect("non-empty tail");
    Ok(Verdict::from_means(
        tail_mean(start),
        tail_mean(start + rule.offsets.0),
        tail_mean(start + rule.offsets.1),
        rule,
    ))
}

pub const DEFAULT_S_LIST: [u32; 3] = [1, 2, 3];
pub const DEFAULT_EXPONENTS: [f64; 6] = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// Outcomes over powers `s` (rows) and exponents `1/p` (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictTable {
    pub label: String,
    pub s_list: Vec<u32>,
    pub exponents: Vec<f64>,
    pub cells: Vec<Vec<Outcome>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Vec<Vec<Verdict>>>,
}

impl VerdictTable {
    pub fn row(&self, s: u32) -> Option<&[Outcome]> {
        self.s_list.iter().position(|&v| v == s).map(|i| self.cells[i].as_slice())
    }

    pub fn row_string(&self, s: u32) -> Option<String> {
        self.row(s).map(|r| r.iter().map(|o| o.letter()).collect())
    }

    fn tsv_header(exponents: &[f64]) -> String {
        let mut out = String::from("series\ts");
        for e in exponents {
            let _ = write!(out, "\t{e}");
        }
        out
    }

    fn tsv_rows(&self, out: &mut String) {
        for (s, row) in self.s_list.iter().zip(&self.cells) {
            let _ = write!(out, "{}\t{}", self.label, s);
            for o in row {
                let _ = write!(out, "\t{}", o.letter());
            }
            out.push('\n');
        }
    }

    /// `series  s  <e_1> … <e_k>` header followed by one C/D row per `s`.
    pub fn to_tsv(&self) -> String {
        write_tables_tsv(std::slice::from_ref(self))
    }
}

/// Several tables sharing one exponent header.
pub fn write_tables_tsv(tables: &[VerdictTable]) -> String {
    let Some(first) = tables.first() else {
        return String::new();
    };
    let mut out = VerdictTable::tsv_header(&first.exponents);
    out.push('\n');
    for t in tables {
        t.tsv_rows(&mut out);
    }
    out
}

/// Parses the TSV written by [`write_tables_tsv`]; rows are grouped by label
/// in order of first appearance.
pub fn parse_tables_tsv(text: &str) -> Result<Vec<VerdictTable>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::EmptyData("verdict table".into()))?;
    let head: Vec<&str> = header.split('\t').collect();
    if head.len() < 3 || head[1].trim() != "s" {
        return Err(Error::Parse("verdict table header must be `series\\ts\\t<exponents…>`".into()));
    }
    let exponents: Vec<f64> = head[2..]
        .iter()
        .map(|h| {
            let h = h.trim();
            let h = h.strip_prefix("e=").unwrap_or(h);
            h.parse::<f64>().map_err(|_| Error::Parse(format!("bad exponent header `{h}`")))
        })
        .collect::<Result<_>>()?;
    let mut tables: Vec<VerdictTable> = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != head.len() {
            return Err(Error::Parse(format!("row `{line}` does not match the header width")));
        }
        let label = fields[0].trim().to_owned();
        let s: u32 = fields[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad s value `{}`", fields[1])))?;
        let row: Vec<Outcome> = fields[2..]
            .iter()
            .map(|c| Outcome::from_letter(c).ok_or_else(|| Error::Parse(format!("bad cell `{c}`"))))
            .collect::<Result<_>>()?;
        match tables.iter_mut().find(|t| t.label == label) {
            Some(t) => {
                t.s_list.push(s);
                t.cells.push(row);
            }
            None => tables.push(VerdictTable {
                label,
                s_list: vec![s],
                exponents: exponents.clone(),
                cells: vec![row],
                diagnostics: None,
            }),
        }
    }
    Ok(tables)
}

/// Traces and verdicts for every `(s, e)` cell, computed in parallel.
pub fn verdict_table(
    label: &str,
    x: &[f64],
    s_list: &[u32],
    exponents: &[f64],
    cfg: &RunningMeanConfig,
    rule: &VerdictRule,
) -> Result<(VerdictTable, Vec<Vec<MarcTrace>>)> {
    if s_list.is_empty() || exponents.is_empty() {
        return Err(Error::Config("s list and exponent list must be non-empty".into()));
    }
    let cells: Vec<(usize, usize)> = (0..s_list.len())
        .flat_map(|i| (0..exponents.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<(MarcTrace, Verdict)> = cells
        .par_iter()
        .map(|&(i, j)| {
            let trace = marcinkiewicz_trace(x, s_list[i], exponents[j], cfg)?;
            let verdict = convergence_verdict(&trace, cfg, rule)?;
            Ok((trace, verdict))
        })
        .collect::<Result<_>>()?;
    let mut traces: Vec<Vec<MarcTrace>> = vec![Vec::with_capacity(exponents.len()); s_list.len()];
    let mut diag: Vec<Vec<Verdict>> = vec![Vec::with_capacity(exponents.len()); s_list.len()];
    for ((i, _), (trace, verdict)) in cells.into_iter().zip(results) {
        traces[i].push(trace);
        diag[i].push(verdict);
    }
    let table = VerdictTable {
        label: label.to_owned(),
        s_list: s_list.to_vec(),
        exponents: exponents.to_vec(),
        cells: diag.iter().map(|row| row.iter().map(|v| v.outcome).collect()).collect(),
        diagnostics: Some(diag),
    };
    Ok((table, traces))
}
