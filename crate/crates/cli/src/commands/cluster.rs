//! `cluster` — seeded k-means over the numeric columns of a table.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Parser;
use serde::Serialize;

use palpate_core::stats::{kmeans, match_rate};

use crate::report::{setting, Report};
use crate::table::Table;
use crate::Ctx;

#[derive(Parser)]
pub struct Args {
    /// Headered CSV of numeric columns, one point per row.
    pub input: PathBuf,

    /// Number of clusters.
    #[arg(long)]
    pub k: Option<usize>,

    /// Maximum Lloyd iterations.
    #[arg(long)]
    pub max_iter: Option<usize>,

    /// Column of integer generator labels; excluded from the feature
    /// space and compared against the clustering.
    #[arg(long)]
    pub truth_col: Option<String>,
}

#[derive(Serialize)]
struct Body {
    assignments: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    sse: f64,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    match_rate: Option<f64>,
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<u32> {
    let k = ctx.config.resolve(args.k, "k", 2)?;
    let max_iter = ctx.config.resolve(args.max_iter, "max-iter", 300)?;
    let truth_col = ctx
        .config
        .resolve_opt(args.truth_col.clone(), "truth-col")?;

    let table = Table::load(&args.input)?;
    let truth_idx = truth_col
        .as_deref()
        .map(|name| table.column_index(name))
        .transpose()?;
    let feature_cols: Vec<usize> = (0..table.header.len())
        .filter(|i| Some(*i) != truth_idx)
        .collect();
    if feature_cols.is_empty() {
        bail!("no feature columns left after removing the truth column");
    }

    let mut points = Vec::with_capacity(table.rows.len());
    let mut truth = Vec::new();
    for (row_idx, row) in table.rows.iter().enumerate() {
        let mut point = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            let v: f64 = row[c].parse().map_err(|_| {
                anyhow::anyhow!(
                    "row {}: bad value `{}` in column `{}`",
                    row_idx + 1,
                    row[c],
                    table.header[c]
                )
            })?;
            point.push(v);
        }
        points.push(point);
        if let Some(ti) = truth_idx {
            let label: usize = row[ti].parse().map_err(|_| {
                anyhow::anyhow!("row {}: bad truth label `{}`", row_idx + 1, row[ti])
            })?;
            truth.push(label);
        }
    }

    let result = kmeans(&points, k, ctx.seed, max_iter)?;
    let rate = if truth.is_empty() {
        None
    } else {
        Some(match_rate(&truth, &result.assignments)?)
    };

    let mut settings = BTreeMap::new();
    setting(&mut settings, "input", args.input.display().to_string());
    setting(&mut settings, "k", k);
    setting(&mut settings, "max-iter", max_iter);
    setting(&mut settings, "seed", ctx.seed);
    if let Some(name) = &truth_col {
        setting(&mut settings, "truth-col", name);
    }

    let body = Body {
        assignments: result.assignments,
        centroids: result.centroids,
        sse: result.sse,
        iterations: result.iterations,
        match_rate: rate,
    };
    Report::new("cluster", settings, ctx.timestamp, body).emit(ctx.out.as_ref())?;
    Ok(0)
}
