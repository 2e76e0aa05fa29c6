use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use lrdht_core::innovations::InnovationFamily;
use lrdht_core::linproc::export::{binary_sidecar, ensemble_binary, ensemble_tsv};
use lrdht_core::linproc::{Simulator, DEFAULT_WINDOW};
use lrdht_core::{CoefficientSpec, InnovationSpec, ProcessConfig, Sharing};

use crate::manifest::{emit, ensure_dir, RunManifest, MANIFEST_FILE};
use crate::{CliResult, Context, Failure};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML process config, or a manifest.json from an earlier run to repeat it.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long, default_value_t = 0.8)]
    sigma: f64,

    /// Path length.
    #[arg(long, default_value_t = 1 << 14)]
    n: usize,

    /// Number of factors in the product.
    #[arg(long, default_value_t = 1)]
    s: usize,

    /// Truncation half-width M (0 gives i.i.d. data).
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: u64,

    #[arg(long, value_enum, default_value_t = FamilyArg::Gaussian)]
    innov: FamilyArg,

    /// Degrees of freedom (student-t) or tail index (pareto).
    #[arg(long)]
    alpha: Option<f64>,

    #[arg(long, default_value_t = 1.0)]
    scale: f64,

    #[arg(long, value_enum, default_value_t = SharingArg::Shared)]
    sharing: SharingArg,

    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Gaussian,
    StudentT,
    SymmetricPareto,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SharingArg {
    Shared,
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Binary,
    Both,
}

fn config_from_flags(a: &SimulateArgs) -> CliResult<ProcessConfig> {
    let innov = match a.innov {
        FamilyArg::Gaussian => InnovationSpec::gaussian(a.scale),
        FamilyArg::StudentT => InnovationSpec::student_t(
            a.alpha.ok_or_else(|| Failure::usage("--alpha (degrees of freedom) is required for student-t"))?,
            a.scale,
        ),
        FamilyArg::SymmetricPareto => InnovationSpec::symmetric_pareto(
            a.alpha.ok_or_else(|| Failure::usage("--alpha is required for symmetric-pareto"))?,
            a.scale,
        ),
    };
    Ok(ProcessConfig {
        s: a.s,
        coeffs: vec![CoefficientSpec::standard(a.sigma, a.window.max(1))?],
        innov,
        sharing: match a.sharing {
            SharingArg::Shared => Sharing::Shared,
            SharingArg::Independent => Sharing::Independent,
        },
        length: a.n,
        window: a.window,
    })
}

/// Config and seed, from flags, a TOML file or a previous manifest.
fn resolve(ctx: &Context, a: &SimulateArgs) -> CliResult<(ProcessConfig, u64)> {
    let Some(path) = &a.config else {
        return Ok((config_from_flags(a)?, ctx.seed));
    };
    if path.extension().is_some_and(|e| e == "json") {
        let m = RunManifest::read(path)?;
        let cfg: ProcessConfig = serde_json::from_value(m.config["process"].clone())
            .map_err(|e| Failure::usage(format!("{}: not a simulate manifest ({e})", path.display())))?;
        let seed = *m.seeds.first().ok_or_else(|| Failure::usage("manifest has no seed"))?;
        return Ok((cfg, seed));
    }
    let text = fs::read_to_string(path)?;
    let cfg: ProcessConfig =
        toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok((cfg, ctx.seed))
}

pub fn run(ctx: &Context, a: SimulateArgs) -> CliResult<u8> {
    let (cfg, seed) = resolve(ctx, &a)?;
    let sim = Simulator::new(cfg.clone())?;
    let ens = sim.run(seed)?;
    for w in &ens.meta.warnings {
        eprintln!("warning: {w}");
    }
    let dir = ctx.out.clone().unwrap_or_else(|| PathBuf::from("."));
    ensure_dir(&dir)?;
    let mut manifest = RunManifest::begin(
        ctx,
        "simulate",
        serde_json::json!({ "process": cfg, "format": format!("{:?}", a.format).to_lowercase() }),
    );
    manifest.seeds = vec![seed];
    let comment = format!("manifest: {MANIFEST_FILE}\nseed: {seed}");
    if a.format != Format::Binary {
        emit(&dir, "ensemble.tsv", ensemble_tsv(&ens, Some(&comment)), &mut manifest)?;
    }
    if a.format != Format::Tsv {
        emit(&dir, "ensemble.bin", ensemble_binary(&ens), &mut manifest)?;
        let sidecar = binary_sidecar(&ens, Some(MANIFEST_FILE));
        emit(
            &dir,
            "ensemble.json",
            serde_json::to_string_pretty(&sidecar)? + "\n",
            &mut manifest,
        )?;
    }
    for name in &manifest.outputs {
        println!("{}", dir.join(name).display());
    }
    manifest.write(&dir)?;
    if cfg.innov.family == InnovationFamily::Gaussian && cfg.s == 1 {
        let second: f64 = ens.x[0].iter().map(|v| v * v).sum::<f64>() / ens.len() as f64;
        let oracle = cfg.innov.variance() * cfg.coeffs[0].sum_of_squares(cfg.window)?;
        eprintln!("mean x^2 {second:.5}, closed form {oracle:.5}");
    }
    Ok(0)
}
