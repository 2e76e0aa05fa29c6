use std::fs;
use std::path::PathBuf;

use clap::Args;
use lrdht_core::rates::estimate_parameters;
use lrdht_core::statistic::parse_tables_tsv;
use lrdht_core::{ParamEstimate, VerdictTable};

use crate::analyze::analyze_inputs;
use crate::manifest::{emit, ensure_dir, RunManifest};
use crate::{CliResult, Context, Failure, GridArgs};

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Verdict table TSVs (`series  s  <exponents…>`), or raw inputs
    /// accepted by `analyze`, which are analysed first.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,

    #[command(flatten)]
    grid: GridArgs,
}

fn is_verdict_table(text: &str) -> bool {
    text.lines()
        .find(|l| !l.starts_with('#') && !l.trim().is_empty())
        .is_some_and(|h| h.split('\t').nth(1).is_some_and(|c| c.trim() == "s"))
}

pub fn run(ctx: &Context, a: EstimateArgs) -> CliResult<u8> {
    let mut tables: Vec<VerdictTable> = Vec::new();
    let mut raw = Vec::new();
    for path in &a.inputs {
        let text = fs::read_to_string(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
        if is_verdict_table(&text) {
            tables.extend(parse_tables_tsv(&text)?);
        } else {
            raw.push(path.clone());
        }
    }
    if !raw.is_empty() {
        tables.extend(analyze_inputs(&raw, &a.grid)?.into_iter().map(|r| r.table));
    }
    let estimates: Vec<ParamEstimate> = tables.iter().map(estimate_parameters).collect::<Result<_, _>>()?;
    let json = serde_json::to_string_pretty(&estimates)? + "\n";
    print!("{json}");
    if let Some(dir) = ctx.out.clone() {
        ensure_dir(&dir)?;
        let config = serde_json::json!({
            "inputs": a.inputs,
            "tables": tables,
        });
        let mut manifest = RunManifest::begin(ctx, "estimate", config);
        emit(&dir, "estimates.json", &json, &mut manifest)?;
        manifest.write(&dir)?;
    }
    Ok(0)
}
