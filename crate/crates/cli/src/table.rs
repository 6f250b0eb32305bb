//! Small reader for headered numeric CSV files (response tables, point
//! clouds, measured curves). Lines starting with `#` are skipped.

use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut header = Vec::new();
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
            if header.is_empty() {
                header = fields;
                continue;
            }
            if fields.len() != header.len() {
                bail!(
                    "{}:{}: expected {} fields, got {}",
                    origin.display(),
                    idx + 1,
                    header.len(),
                    fields.len()
                );
            }
            rows.push(fields);
        }
        if header.is_empty() {
            bail!("{}: no header row", origin.display());
        }
        Ok(Self { header, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("no column named `{name}` (have: {})", self.header.join(", ")))
    }

    pub fn float_column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(row, fields)| {
                fields[idx]
                    .parse::<f64>()
                    .with_context(|| format!("row {}: bad value `{}` in `{name}`", row + 1, fields[idx]))
            })
            .collect()
    }
}
