use std::path::PathBuf;

use clap::Args;
use lrdht_core::statistic::{proportional_settings, verdict_table, write_tables_tsv};
use lrdht_core::{MarcTrace, RunningMeanConfig, VerdictRule, VerdictTable};

use crate::input::{load_series, Series};
use crate::manifest::{emit, ensure_dir, RunManifest};
use crate::{CliResult, Context, GridArgs};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Price CSVs, return CSVs or ensemble TSVs.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,

    #[command(flatten)]
    grid: GridArgs,

    /// Skip the per-cell f(n) trace files.
    #[arg(long)]
    no_traces: bool,
}

pub struct Analysis {
    pub series: Series,
    pub table: VerdictTable,
    pub traces: Vec<Vec<MarcTrace>>,
    pub settings: (RunningMeanConfig, VerdictRule),
}

pub fn analyze_inputs(inputs: &[PathBuf], grid: &GridArgs) -> CliResult<Vec<Analysis>> {
    let base = RunningMeanConfig {
        epsilon: grid.epsilon,
        rho: grid.rho,
        start: grid.start,
    };
    base.validate()?;
    inputs
        .iter()
        .map(|path| {
            let series = load_series(path, &grid.column, grid.series_column.as_deref(), grid.window.into())?;
            let (cfg, rule) = if grid.proportional {
                proportional_settings(base, VerdictRule::default(), series.values.len())
            } else {
                (base, VerdictRule::default())
            };
            let (table, traces) = verdict_table(&series.label, &series.values, &grid.s_list, &grid.exponents, &cfg, &rule)?;
            Ok(Analysis {
                series,
                table,
                traces,
                settings: (cfg, rule),
            })
        })
        .collect()
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

pub fn run(ctx: &Context, a: AnalyzeArgs) -> CliResult<u8> {
    let results = analyze_inputs(&a.inputs, &a.grid)?;
    let tables: Vec<VerdictTable> = results.iter().map(|r| r.table.clone()).collect();
    let tsv = write_tables_tsv(&tables);
    print!("{tsv}");
    let Some(dir) = ctx.out.clone() else {
        return Ok(0);
    };
    ensure_dir(&dir)?;
    let config = serde_json::json!({
        "inputs": results.iter().map(|r| &r.series).collect::<Vec<_>>(),
        "s_list": a.grid.s_list,
        "exponents": a.grid.exponents,
        "settings": results.iter().map(|r| serde_json::json!({"running_mean": r.settings.0, "rule": r.settings.1})).collect::<Vec<_>>(),
    });
    let mut manifest = RunManifest::begin(ctx, "analyze", config);
    emit(&dir, "verdicts.tsv", &tsv, &mut manifest)?;
    emit(
        &dir,
        "verdicts.json",
        serde_json::to_string_pretty(&tables)? + "\n",
        &mut manifest,
    )?;
    if !a.no_traces {
        for r in &results {
            let label = file_label(&r.table.label);
            for row in &r.traces {
                for t in row {
                    let name = format!("traces/{label}/s{}_e{}.csv", t.s, t.exponent);
                    emit(&dir, &name, t.to_csv(), &mut manifest)?;
                }
            }
        }
    }
    manifest.write(&dir)?;
    Ok(0)
}
