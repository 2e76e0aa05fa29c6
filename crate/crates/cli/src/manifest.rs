use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{CliResult, Context};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub seeds: Vec<u64>,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub started: String,
    pub finished: String,
}

impl RunManifest {
    pub fn begin(ctx: &Context, command: &str, config: serde_json::Value) -> Self {
        let now = chrono::Utc::now().to_rfc3339();
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv: ctx.argv.clone(),
            seeds: vec![ctx.seed],
            config,
            outputs: Vec::new(),
            started: now.clone(),
            finished: now,
        }
    }

    pub fn write(mut self, dir: &Path) -> CliResult {
        self.finished = chrono::Utc::now().to_rfc3339();
        fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&self)? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Writes `contents` to `dir/name` and records it in the manifest.
pub fn emit(dir: &Path, name: &str, contents: impl AsRef<[u8]>, manifest: &mut RunManifest) -> CliResult {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, contents)?;
    manifest.outputs.push(name.to_owned());
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| crate::Failure::data(format!("cannot create {}: {e}", dir.display())))
}
