//! Ensemble file formats.
//!
//! - TSV: header `k\tx_1\t…\tx_s\td`, one row per time index `k = 1..n`.
//!   Lines starting with `#` are comments.
//! - Binary: little-endian `f64` block holding `x_1[0..n], …, x_s[0..n], d[0..n]`,
//!   described by a JSON sidecar ([`BinarySidecar`]).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EnsembleMeta, PathEnsemble};
use crate::error::{Error, Result};

pub fn ensemble_tsv(ens: &PathEnsemble, comment: Option<&str>) -> String {
    let s = ens.x.len();
    let mut out = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    out.push('k');
    for r in 1..=s {
        let _ = write!(out, "\tx_{r}");
    }
    out.push_str("\td\n");
    for k in 0..ens.len() {
        let _ = write!(out, "{}", k + 1);
        for comp in &ens.x {
            let _ = write!(out, "\t{:?}", comp[k]);
        }
        let _ = writeln!(out, "\t{:?}", ens.d[k]);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySidecar {
    pub format: String,
    pub layout: Vec<String>,
    pub n: usize,
    pub meta: EnsembleMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

pub fn ensemble_binary(ens: &PathEnsemble) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(8 * ens.len() * (ens.x.len() + 1));
    for v in ens.x.iter().flatten().chain(&ens.d) {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

pub fn binary_sidecar(ens: &PathEnsemble, manifest: Option<&str>) -> BinarySidecar {
    let mut layout: Vec<String> = (1..=ens.x.len()).map(|r| format!("x_{r}")).collect();
    layout.push("d".into());
    BinarySidecar {
        format: "f64-le".into(),
        layout,
        n: ens.len(),
        meta: ens.meta.clone(),
        manifest: manifest.map(str::to_owned),
    }
}

/// Reads a binary block and its sidecar back into an ensemble.
pub fn read_binary(data: &[u8], sidecar: &BinarySidecar) -> Result<PathEnsemble> {
    let cols = sidecar.layout.len();
    if cols == 0 || data.len() != 8 * cols * sidecar.n {
        return Err(Error::Parse(format!(
            "binary block has {} bytes, expected {}",
            data.len(),
            8 * cols * sidecar.n
        )));
    }
    let values: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let mut columns: Vec<Vec<f64>> = values.chunks(sidecar.n).map(<[f64]>::to_vec).collect();
    let d = columns.pop().unwrap_or_default();
    Ok(PathEnsemble {
        x: columns,
        d,
        meta: sidecar.meta.clone(),
    })
}

/// Named numeric columns of a tab-separated file, skipping `#` comments.
pub fn read_tsv_columns(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let text = fs::read_to_string(path)?;
    parse_tsv_columns(&text)
}

pub fn parse_tsv_columns(text: &str) -> Result<Vec<(String, Vec<f64>)>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::EmptyData("TSV input".into()))?;
    let names: Vec<String> = header.split('\t').map(|s| s.trim().to_owned()).collect();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != names.len() {
            return Err(Error::Parse(format!(
                "row {} has {} fields, header has {}",
                lineno + 2,
                fields.len(),
                names.len()
            )));
        }
        for (col, field) in cols.iter_mut().zip(fields) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("non-numeric value `{field}` on row {}", lineno + 2)))?;
            col.push(v);
        }
    }
    Ok(names.into_iter().zip(cols).collect())
}
