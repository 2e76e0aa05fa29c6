//! Estimating `(σ, α₁)` from a verdict table.
//!
//! The `s = 1` row fixes σ through `1/e* = 2/(3 − 2σ)`, where `e*` is the
//! midpoint between the last divergent and the first convergent exponent.
//! Each `s ≥ 2` row then constrains `α_s = α₁/s` through
//! `min(σ-term, α_s) ≈ 1/e*`. The `e = 0.5` column is ignored throughout:
//! divergence there is forced by the central limit theorem.

use serde::{Deserialize, Serialize};

use super::sigma_term;
use crate::error::{Error, Result};
use crate::statistic::{Outcome, VerdictTable};

const EXPONENT_FLOOR: f64 = 0.5 + 1e-12;
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    Point { value: f64 },
    LowerBound { value: f64 },
    UpperBound { value: f64 },
    Unidentified,
}

impl Bound {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Bound::Point { value } | Bound::LowerBound { value } | Bound::UpperBound { value } => Some(value),
            Bound::Unidentified => None,
        }
    }
}

/// Half-open range `(lower, upper]`; `upper` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    #[serde(with = "crate::ext_real")]
    pub upper: f64,
}

impl Interval {
    const FULL: Interval = Interval {
        lower: 0.0,
        upper: f64::INFINITY,
    };

    pub fn contains(&self, v: f64) -> bool {
        let slack = TIE_TOL * v.abs().max(1.0);
        if v == f64::INFINITY {
            return self.upper == f64::INFINITY;
        }
        v > self.lower - slack && v <= self.upper + slack
    }

    fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lower = self.lower.max(other.lower);
        let upper = self.upper.min(other.upper);
        (lower < upper).then_some(Interval { lower, upper })
    }

    fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lower: self.lower.min(other.lower),
            upper: self.upper.max(other.upper),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowShape {
    Flip,
    AllDiverge,
    AllConverge,
    NonMonotone,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowEvidence {
    pub s: u32,
    pub shape: RowShape,
    pub last_diverge: Option<f64>,
    pub first_converge: Option<f64>,
    pub flip_exponent: Option<f64>,
    /// σ-dependent part of the bound for this row, given `σ̂`.
    #[serde(with = "crate::ext_real::option", default)]
    pub sigma_term: Option<f64>,
    /// What the row says about `α₁` (or about σ for `s = 1`).
    pub implied: Bound,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1_range: Option<Interval>,
    pub constraint: String,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub label: String,
    pub sigma: Bound,
    pub alpha1: Bound,
    /// Range of `α₁` compatible with every usable row.
    pub alpha1_range: Interval,
    pub per_s_evidence: Vec<RowEvidence>,
    /// Some row was excluded as non-monotone or contradicting `σ̂`.
    pub inconsistent: bool,
    /// Row ranges share no common point at grid resolution.
    pub ranges_disjoint: bool,
    pub method_notes: Vec<String>,
}

/// Row restricted to exponents above 0.5, ordered by exponent.
fn usable_cells(table: &VerdictTable, row: &[Outcome]) -> Vec<(f64, Outcome)> {
    let mut cells: Vec<(f64, Outcome)> = table
        .exponents
        .iter()
        .zip(row)
        .filter(|(e, _)| **e > EXPONENT_FLOOR)
        .map(|(e, o)| (*e, *o))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    cells
}

struct Shape {
    shape: RowShape,
    last_diverge: Option<f64>,
    first_converge: Option<f64>,
}

fn classify(cells: &[(f64, Outcome)]) -> Shape {
    if cells.is_empty() {
        return Shape {
            shape: RowShape::Empty,
            last_diverge: None,
            first_converge: None,
        };
    }
    let first_c = cells.iter().position(|(_, o)| *o == Outcome::Converges);
    let monotone = match first_c {
        Some(i) => cells[i..].iter().all(|(_, o)| *o == Outcome::Converges),
        None => true,
    };
    let last_diverge = cells.iter().rev().find(|(_, o)| *o == Outcome::Diverges).map(|c| c.0);
    let first_converge = first_c.map(|i| cells[i].0);
    let shape = if !monotone {
        RowShape::NonMonotone
    } else {
        match (last_diverge, first_converge) {
            (Some(_), Some(_)) => RowShape::Flip,
            (Some(_), None) => RowShape::AllDiverge,
            (None, Some(_)) => RowShape::AllConverge,
            (None, None) => RowShape::Empty,
        }
    };
    Shape {
        shape,
        last_diverge,
        first_converge,
    }
}

fn exceeds(a: f64, b: f64) -> bool {
    a > b * (1.0 + TIE_TOL)
}

fn fmt_p(v: f64) -> String {
    format!("{:.4}", v)
}

fn alpha_row(table: &VerdictTable, s: u32, row: &[Outcome], sigma: Option<f64>) -> RowEvidence {
    let cells = usable_cells(table, row);
    let Shape {
        shape,
        last_diverge,
        first_converge,
    } = classify(&cells);
    let term = sigma_term(s, sigma);
    let sf = s as f64;
    let mut ev = RowEvidence {
        s,
        shape,
        last_diverge,
        first_converge,
        flip_exponent: None,
        sigma_term: Some(term),
        implied: Bound::Unidentified,
        alpha1_range: None,
        constraint: String::new(),
        excluded: false,
    };
    let inconsistent = |ev: &mut RowEvidence, why: String| {
        ev.excluded = true;
        ev.constraint = why;
    };
    match shape {
        RowShape::Empty => inconsistent(&mut ev, "no exponents above 0.5".into()),
        RowShape::NonMonotone => inconsistent(&mut ev, "convergent cell left of a divergent one".into()),
        RowShape::Flip => {
            let (e_d, e_c) = (last_diverge.unwrap(), first_converge.unwrap());
            let mid = 0.5 * (e_d + e_c);
            ev.flip_exponent = Some(mid);
            let (p_d, p_c) = (1.0 / e_d, 1.0 / e_c);
            if exceeds(term, p_d) {
                let alpha_s = 1.0 / mid;
                ev.implied = Bound::Point { value: sf * alpha_s };
                ev.alpha1_range = Some(Interval {
                    lower: sf * p_c,
                    upper: sf * p_d,
                });
                ev.constraint = format!("alpha_{s} = 1/{mid:.4} = {}", fmt_p(alpha_s));
            } else if exceeds(term, p_c) {
                ev.implied = Bound::LowerBound { value: sf * p_c };
                ev.alpha1_range = Some(Interval {
                    lower: sf * p_c,
                    upper: f64::INFINITY,
                });
                ev.constraint = format!(
                    "flip explained by the memory term {}; alpha_{s} > {}",
                    fmt_p(term),
                    fmt_p(p_c)
                );
            } else {
                inconsistent(
                    &mut ev,
                    format!("memory term {} predicts divergence at every tested exponent", fmt_p(term)),
                );
            }
        }
        RowShape::AllDiverge => {
            let p_min = 1.0 / cells.last().unwrap().0;
            if exceeds(term, p_min) {
                ev.implied = Bound::UpperBound { value: sf * p_min };
                ev.alpha1_range = Some(Interval {
                    lower: 0.0,
                    upper: sf * p_min,
                });
                ev.constraint = format!("alpha_{s} <= {}", fmt_p(p_min));
            } else {
                ev.alpha1_range = Some(Interval::FULL);
                ev.constraint = format!("divergence explained by the memory term {}", fmt_p(term));
            }
        }
        RowShape::AllConverge => {
            let p_first = 1.0 / cells[0].0;
            if exceeds(term, p_first) {
                ev.implied = Bound::LowerBound { value: sf * p_first };
                ev.alpha1_range = Some(Interval {
                    lower: sf * p_first,
                    upper: f64::INFINITY,
                });
                ev.constraint = format!("alpha_{s} > {}", fmt_p(p_first));
            } else {
                inconsistent(
                    &mut ev,
                    format!("memory term {} forbids convergence at p = {}", fmt_p(term), fmt_p(p_first)),
                );
            }
        }
    }
    ev
}

/// Inverts a verdict table into estimates of the memory exponent σ and the
/// innovation tail index α₁.
pub fn estimate_parameters(table: &VerdictTable) -> Result<ParamEstimate> {
    if table.cells.len() != table.s_list.len() || table.cells.iter().any(|r| r.len() != table.exponents.len()) {
        return Err(Error::Config("verdict table shape does not match its grids".into()));
    }
    let anchor = table
        .row(1)
        .ok_or_else(|| Error::MissingAnchor(format!("table `{}` has no s = 1 row", table.label)))?;
    let cells = usable_cells(table, anchor);
    let shape = classify(&cells);
    let mut notes = vec!["the e = 0.5 column is ignored".to_owned()];
    let mut anchor_ev = RowEvidence {
        s: 1,
        shape: shape.shape,
        last_diverge: shape.last_diverge,
        first_converge: shape.first_converge,
        flip_exponent: None,
        sigma_term: None,
        implied: Bound::Unidentified,
        alpha1_range: None,
        constraint: String::new(),
        excluded: false,
    };
    let (sigma, sigma_value) = match shape.shape {
        RowShape::Flip => {
            let mid = 0.5 * (shape.last_diverge.unwrap() + shape.first_converge.unwrap());
            let value = 1.5 - mid;
            anchor_ev.flip_exponent = Some(mid);
            anchor_ev.constraint = format!("sigma = 1.5 - {mid:.4}");
            (Bound::Point { value }, Some(value))
        }
        RowShape::AllConverge => {
            anchor_ev.constraint = "converges at every exponent above 0.5: sigma >= 1".into();
            notes.push("no (or limited) long-range dependence".into());
            (Bound::LowerBound { value: 1.0 }, None)
        }
        RowShape::AllDiverge => {
            return Err(Error::MissingAnchor(format!(
                "s = 1 row of `{}` never converges above e = 0.5",
                table.label
            )));
        }
        RowShape::NonMonotone | RowShape::Empty => {
            return Err(Error::MissingAnchor(format!(
                "s = 1 row of `{}` has no usable D-to-C flip",
                table.label
            )));
        }
    };
    anchor_ev.implied = sigma;
    if let Bound::Point { value } = sigma {
        if !(value > 0.5 && value < 1.0) {
            notes.push(format!("sigma {value:.4} lies outside (0.5, 1)"));
        }
    }

    let mut evidence = vec![anchor_ev];
    for (&s, row) in table.s_list.iter().zip(&table.cells) {
        if s >= 2 {
            evidence.push(alpha_row(table, s, row, sigma_value));
        }
    }
    if evidence.len() == 1 {
        notes.push("no s >= 2 rows: alpha1 not identified".into());
    }

    let usable: Vec<&RowEvidence> = evidence.iter().skip(1).filter(|e| !e.excluded).collect();
    let inconsistent = evidence.iter().any(|e| e.excluded);
    for e in evidence.iter().filter(|e| e.excluded) {
        notes.push(format!("s = {} excluded: {}", e.s, e.constraint));
    }

    let is_point = |e: &&&RowEvidence| matches!(e.implied, Bound::Point { .. });
    let points: Vec<f64> = usable.iter().filter(is_point).filter_map(|e| e.implied.value()).collect();
    let uppers = usable.iter().filter_map(|e| match e.implied {
        Bound::UpperBound { value } => Some(value),
        _ => None,
    });
    let lowers = usable.iter().filter_map(|e| match e.implied {
        Bound::LowerBound { value } => Some(value),
        _ => None,
    });

    let all_ranges: Vec<Interval> = usable.iter().filter_map(|e| e.alpha1_range).collect();
    let bound_ranges: Vec<Interval> = usable
        .iter()
        .filter(|e| !is_point(e))
        .filter_map(|e| e.alpha1_range)
        .collect();
    let (bound_range, _) = combine_ranges(&bound_ranges);
    let (range, disjoint) = combine_ranges(&all_ranges);
    if disjoint {
        notes.push("row ranges for alpha1 do not overlap; reporting their hull".into());
    }

    let alpha1 = if !points.is_empty() {
        let mean = points.iter().sum::<f64>() / points.len() as f64;
        // bound rows take precedence over a midpoint that violates them
        let clamped = mean.min(bound_range.upper).max(bound_range.lower);
        if clamped != mean {
            notes.push(format!(
                "mean of row points {} clamped into the bound-row range",
                fmt_p(mean)
            ));
        }
        Bound::Point { value: clamped }
    } else if let Some(v) = uppers.reduce(f64::min) {
        Bound::UpperBound { value: v }
    } else if let Some(v) = lowers.reduce(f64::max) {
        Bound::LowerBound { value: v }
    } else {
        Bound::Unidentified
    };

    Ok(ParamEstimate {
        label: table.label.clone(),
        sigma,
        alpha1,
        alpha1_range: range,
        per_s_evidence: evidence,
        inconsistent,
        ranges_disjoint: disjoint,
        method_notes: notes,
    })
}

/// Intersection of the ranges, or their hull (flagged) when it is empty.
fn combine_ranges(ranges: &[Interval]) -> (Interval, bool) {
    let mut acc = Interval::FULL;
    for r in ranges {
        match acc.intersect(r) {
            Some(next) => acc = next,
            None => {
                let hull = ranges.iter().skip(1).fold(ranges[0], |h, r| h.hull(r));
                return (hull, true);
            }
        }
    }
    (acc, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::predict_table;
    use crate::statistic::{parse_tables_tsv, DEFAULT_EXPONENTS};

    const OBSERVED: &str = "series\ts\t0.5\t0.6\t0.7\t0.8\t0.9\t1\n\
        Alcoa\t1\tD\tD\tD\tD\tC\tC\n\
        Alcoa\t2\tD\tD\tD\tD\tD\tD\n\
        Alcoa\t3\tD\tD\tD\tD\tD\tD\n\
        Barrick Gold\t1\tD\tC\tC\tC\tC\tC\n\
        Barrick Gold\t2\tD\tD\tC\tC\tC\tC\n\
        Barrick Gold\t3\tD\tD\tD\tD\tC\tC\n\
        McDonalds\t1\tD\tD\tD\tD\tD\tC\n\
        McDonalds\t2\tD\tD\tD\tD\tD\tD\n\
        McDonalds\t3\tD\tD\tD\tD\tD\tD\n";

    fn estimates() -> Vec<ParamEstimate> {
        parse_tables_tsv(OBSERVED)
            .unwrap()
            .iter()
            .map(|t| estimate_parameters(t).unwrap())
            .collect()
    }

    fn assert_point(b: Bound, want: f64, tol: f64) {
        match b {
            Bound::Point { value } => assert!((value - want).abs() < tol, "{value} vs {want}"),
            other => panic!("expected point, got {other:?}"),
        }
    }

    #[test]
    fn observed_tables() {
        let est = estimates();
        assert_point(est[0].sigma, 0.65, 1e-12);
        assert_eq!(est[0].alpha1, Bound::UpperBound { value: 2.0 });
        assert_eq!(est[1].sigma, Bound::LowerBound { value: 1.0 });
        assert_point(est[1].alpha1, (2.0 / 0.65 + 3.0 / 0.85) / 2.0, 1e-12);
        assert_point(est[1].alpha1, 3.3032, 1e-4);
        assert_point(est[2].sigma, 0.55, 1e-12);
        assert_eq!(est[2].alpha1, Bound::UpperBound { value: 2.0 });
        assert!(est.iter().all(|e| !e.inconsistent));
        // s = 2 allows α₁ ≤ 10/3, s = 3 needs α₁ > 10/3
        assert!(est[1].ranges_disjoint);
        assert!(est[1].alpha1_range.contains(3.3032));
    }

    #[test]
    fn json_carries_kinds() {
        let json = serde_json::to_value(&estimates()[1]).unwrap();
        assert_eq!(json["sigma"]["kind"], "lower_bound");
        assert_eq!(json["alpha1"]["kind"], "point");
        assert_eq!(json["per_s_evidence"][1]["s"], 2);
        assert!((json["per_s_evidence"][2]["flip_exponent"].as_f64().unwrap() - 0.85).abs() < 1e-12);
        let back: ParamEstimate = serde_json::from_value(json).unwrap();
        assert_eq!(back, estimates()[1]);
    }

    #[test]
    fn missing_or_broken_anchor() {
        let mut t = parse_tables_tsv(OBSERVED).unwrap().remove(0);
        t.s_list.remove(0);
        t.cells.remove(0);
        assert!(matches!(estimate_parameters(&t), Err(Error::MissingAnchor(_))));
        let mut t = parse_tables_tsv(OBSERVED).unwrap().remove(0);
        t.cells[0] = vec![Outcome::Diverges; 6];
        assert!(matches!(estimate_parameters(&t), Err(Error::MissingAnchor(_))));
    }

    #[test]
    fn non_monotone_row_is_flagged_and_excluded() {
        let mut t = parse_tables_tsv(OBSERVED).unwrap().remove(1);
        t.cells[1] = "DCDCCC"
            .chars()
            .map(|c| Outcome::from_letter(&c.to_string()).unwrap())
            .collect();
        let est = estimate_parameters(&t).unwrap();
        assert!(est.inconsistent);
        assert!(est.per_s_evidence[1].excluded);
        assert_point(est.alpha1, 3.0 / 0.85, 1e-12);
    }

    #[test]
    fn round_trip_over_grid() {
        for &sigma in &[0.55, 0.65, 0.75, 0.85] {
            for &alpha1 in &[2.0, 3.0, 4.0, f64::INFINITY] {
                let t = predict_table("grid", sigma, alpha1, &[1, 2, 3], &DEFAULT_EXPONENTS).unwrap();
                let est = estimate_parameters(&t).unwrap();
                let sig = est.sigma.value().unwrap();
                assert!((sig - sigma).abs() <= 0.05 + 1e-12, "sigma {sigma} alpha {alpha1}: {sig}");
                assert!(
                    est.alpha1_range.contains(alpha1),
                    "sigma {sigma} alpha {alpha1}: {:?}",
                    est.alpha1_range
                );
                assert!(!est.inconsistent, "sigma {sigma} alpha {alpha1}");
                if let Bound::Point { value } = est.alpha1 {
                    assert!(est.alpha1_range.contains(value), "sigma {sigma} alpha {alpha1}: {value} {:?}", est.alpha1_range);
                }
            }
        }
    }

    #[test]
    fn predicted_rows_are_monotone() {
        for &sigma in &[0.55, 0.65, 0.75, 0.85, 1.0] {
            for &alpha1 in &[1.5, 2.0, 3.0, 4.0, 7.0, f64::INFINITY] {
                let t = predict_table("m", sigma, alpha1, &[1, 2, 3, 4], &DEFAULT_EXPONENTS).unwrap();
                for row in &t.cells {
                    let cells: Vec<(f64, Outcome)> = DEFAULT_EXPONENTS.iter().copied().zip(row.iter().copied()).collect();
                    assert_ne!(classify(&cells).shape, RowShape::NonMonotone);
                }
            }
        }
    }
}
