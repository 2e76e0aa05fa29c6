use std::fs;
use std::path::Path;

use lrdht_core::ingest::{load_prices, return_window, WindowMode};
use lrdht_core::linproc::export::parse_tsv_columns;
use serde::Serialize;

use crate::{CliResult, Failure};

#[derive(Debug, Clone, Serialize)]
pub struct Series {
    pub label: String,
    pub source: String,
    /// How the values were derived, e.g. the return window used.
    pub origin: String,
    #[serde(skip)]
    pub values: Vec<f64>,
}

fn label_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into())
}

fn pick_column(cols: Vec<(String, Vec<f64>)>, wanted: Option<&str>, path: &Path) -> CliResult<(String, Vec<f64>)> {
    let default = if cols.iter().any(|(n, _)| n == "d") { "d" } else { "" };
    let name = wanted.unwrap_or(default);
    if name.is_empty() {
        return cols
            .into_iter()
            .find(|(n, _)| n != "k")
            .ok_or_else(|| Failure::data(format!("{}: no data columns", path.display())));
    }
    cols.into_iter()
        .find(|(n, _)| n == name)
        .ok_or_else(|| Failure::data(format!("{}: no column `{name}`", path.display())))
}

/// Loads a series from a price CSV (log returns over the chosen window), a
/// TSV ensemble, or a plain numeric CSV column.
pub fn load_series(path: &Path, price_column: &str, series_column: Option<&str>, window: WindowMode) -> CliResult<Series> {
    let label = label_of(path);
    let source = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Failure::data(format!("{source}: {e}")))?;
    let is_tsv = path.extension().is_some_and(|e| e == "tsv");
    if is_tsv {
        let (name, values) = pick_column(parse_tsv_columns(&text)?, series_column, path)?;
        return Ok(Series {
            label,
            source,
            origin: format!("column {name}"),
            values,
        });
    }
    let header = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| Failure::data(format!("{source}: empty file")))?;
    let has_date = header.split(',').any(|h| h.trim().trim_matches('"').eq_ignore_ascii_case("date"));
    if has_date && series_column.is_none() {
        let prices = load_prices(path, Some(price_column))?;
        let w = return_window(&prices, window)?;
        let span = match (w.first_date, w.last_date) {
            (Some(a), Some(b)) => format!(" {a}..{b}"),
            _ => String::new(),
        };
        return Ok(Series {
            label,
            source,
            origin: format!("log returns of `{price_column}`, {:?} window{span}", w.mode_used).to_lowercase(),
            values: w.returns,
        });
    }
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Failure::data(e.to_string()))?.clone();
    let idx = match series_column {
        Some(c) => headers
            .iter()
            .position(|h| h.trim() == c)
            .ok_or_else(|| Failure::data(format!("{source}: no column `{c}`")))?,
        None => 0,
    };
    let mut values = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Failure::data(e.to_string()))?;
        let field = rec.get(idx).unwrap_or("").trim();
        let v: f64 = field
            .parse()
            .map_err(|_| Failure::data(format!("{source}: non-numeric value `{field}` on row {}", row + 2)))?;
        values.push(v);
    }
    Ok(Series {
        label,
        source,
        origin: format!("column {}", &headers[idx]),
        values,
    })
}
