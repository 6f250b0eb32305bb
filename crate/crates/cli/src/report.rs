//! Versioned JSON report envelope shared by every subcommand.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// The report wrapper: schema and tool version, the command that ran, an
/// echo of every effective setting (enough to reproduce the run), and the
/// command-specific body flattened alongside.
#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    pub settings: BTreeMap<String, serde_json::Value>,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(
        command: &'static str,
        settings: BTreeMap<String, serde_json::Value>,
        timestamp: bool,
        body: T,
    ) -> Self {
        let generated_at_unix = timestamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Self {
            schema: SCHEMA_VERSION,
            tool: "palpate",
            version: env!("CARGO_PKG_VERSION"),
            command,
            generated_at_unix,
            settings,
            body,
        }
    }

    /// Writes the pretty-printed report to `out`, or stdout when `None`.
    pub fn emit(&self, out: Option<&PathBuf>) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        match out {
            Some(path) => std::fs::write(path, json + "\n")
                .with_context(|| format!("writing report to {}", path.display()))?,
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                writeln!(lock, "{json}")?;
            }
        }
        Ok(())
    }
}

/// Builder-ish helper for the settings echo.
pub fn setting(
    map: &mut BTreeMap<String, serde_json::Value>,
    key: &str,
    value: impl Serialize,
) {
    map.insert(
        key.to_string(),
        serde_json::to_value(value).expect("setting must serialize"),
    );
}

/// Writes CSV content to a path, creating parent directories.
pub fn write_csv(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}
