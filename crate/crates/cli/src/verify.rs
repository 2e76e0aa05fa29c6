use clap::{Args, ValueEnum};
use lrdht_core::verify::{
    kernel_suite, mslln_suite, process_suite, tensor_suite, SuiteReport, KERNEL_RADIUS, MOMENT_REPLICATIONS,
    MSLLN_REPLICATIONS,
};

use crate::manifest::{emit, ensure_dir, RunManifest};
use crate::{CliResult, Context, EXIT_VERIFY};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,

    /// Override the number of Monte Carlo replications.
    #[arg(long)]
    replications: Option<usize>,

    /// Truncation radius for the kernel sums.
    #[arg(long, default_value_t = KERNEL_RADIUS)]
    radius: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Kernel,
    Mslln,
    Process,
    Tensor,
    All,
}

pub fn run(ctx: &Context, a: VerifyArgs) -> CliResult<u8> {
    let wants = |s: Suite| a.suite == s || a.suite == Suite::All;
    let mut reports: Vec<SuiteReport> = Vec::new();
    if wants(Suite::Kernel) {
        reports.push(kernel_suite(a.radius)?);
    }
    if wants(Suite::Mslln) {
        reports.push(mslln_suite(ctx.seed, a.replications.unwrap_or(MSLLN_REPLICATIONS))?);
    }
    if wants(Suite::Process) {
        reports.push(process_suite(ctx.seed, a.replications.unwrap_or(MOMENT_REPLICATIONS))?);
    }
    if wants(Suite::Tensor) {
        reports.push(tensor_suite(ctx.seed, a.replications.unwrap_or(16))?);
    }
    let mut summary = String::from("suite\tcheck\tresult\tdetail\n");
    for r in &reports {
        summary.extend(r.to_tsv().lines().skip(1).map(|l| format!("{l}\n")));
    }
    print!("{summary}");
    if let Some(dir) = ctx.out.clone() {
        ensure_dir(&dir)?;
        let config = serde_json::json!({
            "suite": format!("{:?}", a.suite).to_lowercase(),
            "replications": a.replications,
            "radius": a.radius,
        });
        let mut manifest = RunManifest::begin(ctx, "verify", config);
        emit(&dir, "verify.tsv", &summary, &mut manifest)?;
        for r in &reports {
            for (name, tsv) in &r.evidence {
                emit(&dir, name, tsv, &mut manifest)?;
            }
        }
        manifest.write(&dir)?;
    }
    Ok(if reports.iter().all(SuiteReport::passed) { 0 } else { EXIT_VERIFY })
}
