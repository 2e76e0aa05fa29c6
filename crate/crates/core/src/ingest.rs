//! Daily price files and the log-return window fed to the statistic.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_PRICE_COLUMN: &str = "Adj Close";
pub const WINDOW_END_OFFSET: usize = 100;
pub const WINDOW_LENGTH: usize = 2601;
/// Trading days 2009-10-23 through 2020-02-25.
pub const REFERENCE_DATES: (NaiveDate, NaiveDate) = (
    match NaiveDate::from_ymd_opt(2009, 10, 23) {
        Some(d) => d,
        None => panic!("valid date"),
    },
    match NaiveDate::from_ymd_opt(2020, 2, 25) {
        Some(d) => d,
        None => panic!("valid date"),
    },
);

const DATE_FORMATS: [&str; 4] = ["%Y-%m-%d", "%Y/%m/%d", "%m/%d/%Y", "%d.%m.%Y"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub label: String,
    pub dates: Vec<NaiveDate>,
    pub adj_close: Vec<f64>,
}

pub fn parse_date(text: &str) -> Option<NaiveDate> {
    let t = text.trim();
    // timestamps such as `2020-02-25 00:00:00` keep only the date part
    let t = t.split([' ', 'T']).next().unwrap_or(t);
    DATE_FORMATS.iter().find_map(|f| NaiveDate::parse_from_str(t, f).ok())
}

impl PriceSeries {
    pub fn len(&self) -> usize {
        self.adj_close.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj_close.is_empty()
    }

    /// Writes `Date,<column>` CSV that [`load_prices`] reads back exactly.
    pub fn to_csv(&self, column: &str) -> String {
        let mut out = format!("Date,{column}\n");
        for (d, p) in self.dates.iter().zip(&self.adj_close) {
            let _ = writeln!(out, "{},{:?}", d.format("%Y-%m-%d"), p);
        }
        out
    }

    pub fn save(&self, path: &Path, column: &str) -> Result<()> {
        fs::write(path, self.to_csv(column))?;
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("date\tadj_close\n");
        for (d, p) in self.dates.iter().zip(&self.adj_close) {
            let _ = writeln!(out, "{}\t{:?}", d.format("%Y-%m-%d"), p);
        }
        out
    }
}

/// Reads a price CSV, dropping rows whose price is missing or non-numeric.
pub fn load_prices(path: &Path, column: Option<&str>) -> Result<PriceSeries> {
    let column = column.unwrap_or(DEFAULT_PRICE_COLUMN);
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    // R's read.csv turns "Adj Close" into "Adj.Close"; accept either spelling.
    let price_idx = find(column)
        .or_else(|| find(&column.replace(' ', ".")))
        .ok_or_else(|| Error::Schema {
            column: column.to_owned(),
            path: path.to_owned(),
        })?;
    let date_idx = find("Date").ok_or_else(|| Error::Schema {
        column: "Date".into(),
        path: path.to_owned(),
    })?;

    let mut dates = Vec::new();
    let mut prices = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let Some(price) = record
            .get(price_idx)
            .and_then(|p| p.trim().parse::<f64>().ok())
            .filter(|p| p.is_finite())
        else {
            continue;
        };
        let raw = record.get(date_idx).unwrap_or("");
        let date = parse_date(raw).ok_or_else(|| Error::Parse(format!("unparseable date `{raw}` on row {}", row + 2)))?;
        if let Some(&prev) = dates.last() {
            if date <= prev {
                return Err(Error::Parse(format!("dates not strictly increasing at {date} (row {})", row + 2)));
            }
        }
        dates.push(date);
        prices.push(price);
    }
    if prices.is_empty() {
        return Err(Error::EmptyData(format!("no usable `{column}` values in {}", path.display())));
    }
    Ok(PriceSeries {
        label,
        dates,
        adj_close: prices,
    })
}

/// `r_1 = 0`, `r_t = ln S_t − ln S_{t−1}`.
pub fn log_returns(prices: &PriceSeries) -> Result<Vec<f64>> {
    log_returns_of(&prices.adj_close)
}

pub fn log_returns_of(prices: &[f64]) -> Result<Vec<f64>> {
    if prices.len() < 2 {
        return Err(Error::Length {
            needed: 2,
            got: prices.len(),
        });
    }
    if let Some(p) = prices.iter().find(|p| !(**p > 0.0)) {
        return Err(Error::Domain(format!("price must be positive, got {p}")));
    }
    let mut out = Vec::with_capacity(prices.len());
    out.push(0.0);
    out.extend(prices.windows(2).map(|w| w[1].ln() - w[0].ln()));
    Ok(out)
}

/// `length` points ending `end_offset` positions before the last one: with
/// the defaults, 1-based positions `len − 2700 ..= len − 100`.
pub fn select_window(series: &[f64], end_offset: usize, length: usize) -> Result<Vec<f64>> {
    let needed = length + end_offset;
    if series.len() < needed || length == 0 {
        return Err(Error::Length {
            needed,
            got: series.len(),
        });
    }
    let end = series.len() - end_offset - 1;
    Ok(series[end + 1 - length..=end].to_vec())
}

/// Returns whose dates fall in `[from, to]`.
pub fn select_date_range(dates: &[NaiveDate], returns: &[f64], from: NaiveDate, to: NaiveDate) -> Vec<f64> {
    dates
        .iter()
        .zip(returns)
        .filter(|(d, _)| **d >= from && **d <= to)
        .map(|(_, r)| *r)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    /// Date range when the data covers both reference dates, index offsets otherwise.
    #[default]
    Auto,
    Dates,
    Offsets,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnWindow {
    pub label: String,
    pub mode_used: WindowMode,
    pub first_date: Option<NaiveDate>,
    pub last_date: Option<NaiveDate>,
    pub returns: Vec<f64>,
}

impl ReturnWindow {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("logreturn\n");
        for r in &self.returns {
            let _ = writeln!(out, "{r:?}");
        }
        out
    }
}

pub fn return_window(prices: &PriceSeries, mode: WindowMode) -> Result<ReturnWindow> {
    let returns = log_returns(prices)?;
    let (from, to) = REFERENCE_DATES;
    let covers = prices.dates.first().is_some_and(|d| *d <= from) && prices.dates.last().is_some_and(|d| *d >= to);
    let mode_used = match mode {
        WindowMode::Auto if covers => WindowMode::Dates,
        WindowMode::Auto => WindowMode::Offsets,
        m => m,
    };
    let (window, first, last) = match mode_used {
        WindowMode::Dates => {
            let w = select_date_range(&prices.dates, &returns, from, to);
            if w.is_empty() {
                return Err(Error::EmptyData(format!("`{}` has no rows between {from} and {to}", prices.label)));
            }
            let first = prices.dates.iter().find(|d| **d >= from).copied();
            let last = prices.dates.iter().rev().find(|d| **d <= to).copied();
            (w, first, last)
        }
        WindowMode::Offsets => {
            let w = select_window(&returns, WINDOW_END_OFFSET, WINDOW_LENGTH)?;
            let end = returns.len() - WINDOW_END_OFFSET - 1;
            (w, Some(prices.dates[end + 1 - WINDOW_LENGTH]), Some(prices.dates[end]))
        }
        _ => (returns, prices.dates.first().copied(), prices.dates.last().copied()),
    };
    Ok(ReturnWindow {
        label: prices.label.clone(),
        mode_used,
        first_date: first,
        last_date: last,
        returns: window,
    })
}
