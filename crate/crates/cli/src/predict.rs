use clap::Args;
use lrdht_core::rates::predict_table;

use crate::manifest::{emit, ensure_dir, RunManifest};
use crate::{CliResult, Context, Failure};

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    sigma: f64,

    /// Tail index of the innovations; `inf` for light tails.
    #[arg(long, value_parser = parse_alpha)]
    alpha1: f64,

    #[arg(long, default_value = "predicted")]
    label: String,

    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    s_list: Vec<u32>,

    #[arg(long, value_delimiter = ',', default_value = "0.5,0.6,0.7,0.8,0.9,1.0")]
    exponents: Vec<f64>,
}

fn parse_alpha(text: &str) -> Result<f64, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t => t.parse().map_err(|_| format!("not a number: `{text}`")),
    }
}

pub fn run(ctx: &Context, a: PredictArgs) -> CliResult<u8> {
    if !(a.alpha1 > 0.0) {
        return Err(Failure::usage("--alpha1 must be positive"));
    }
    let table = predict_table(&a.label, a.sigma, a.alpha1, &a.s_list, &a.exponents)?;
    let tsv = table.to_tsv();
    print!("{tsv}");
    if let Some(dir) = ctx.out.clone() {
        ensure_dir(&dir)?;
        let alpha = if a.alpha1.is_finite() {
            serde_json::json!(a.alpha1)
        } else {
            serde_json::json!("inf")
        };
        let config = serde_json::json!({
            "sigma": a.sigma,
            "alpha1": alpha,
            "s_list": a.s_list,
            "exponents": a.exponents,
        });
        let mut manifest = RunManifest::begin(ctx, "table-predict", config);
        emit(&dir, "predicted.tsv", &tsv, &mut manifest)?;
        manifest.write(&dir)?;
    }
    Ok(0)
}
