//! `dprime` — sensitivity table from a same-different response log.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Result;
use clap::Parser;
use serde::Serialize;

use palpate_core::psychometrics::{dprime_differencing, rates, RateCorrection, ResponseTable};

use crate::report::{setting, Report};
use crate::table::Table;
use crate::Ctx;

#[derive(Parser)]
pub struct Args {
    /// Response CSV with columns `condition,pair,truth,response`, where
    /// truth and response are `same` or `different`.
    pub input: PathBuf,

    /// Extreme-rate correction applied before inverting.
    #[arg(long, value_enum)]
    pub correction: Option<CorrectionArg>,
}

#[derive(Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
pub enum CorrectionArg {
    None,
    HalfTrial,
}

#[derive(Default)]
struct Counts {
    n_same: u32,
    n_diff: u32,
    resp_diff_given_same: u32,
    resp_diff_given_diff: u32,
}

#[derive(Serialize)]
struct ConditionRow {
    condition: String,
    pair: String,
    n_same: u32,
    n_diff: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    hit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    false_alarm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dprime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct RowError {
    line: usize,
    error: String,
}

#[derive(Serialize)]
struct Body {
    conditions: Vec<ConditionRow>,
    errors: Vec<RowError>,
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<u32> {
    let correction = match args.correction.unwrap_or(CorrectionArg::None) {
        CorrectionArg::None => RateCorrection::None,
        CorrectionArg::HalfTrial => RateCorrection::HalfTrial,
    };
    let table = Table::load(&args.input)?;
    let truth_col = table.column_index("truth")?;
    let resp_col = table.column_index("response")?;
    let cond_col = table.column_index("condition")?;
    let pair_col = table.column_index("pair")?;

    let mut groups: BTreeMap<(String, String), Counts> = BTreeMap::new();
    let mut errors = Vec::new();
    for (idx, row) in table.rows.iter().enumerate() {
        let parse = |field: &str| -> Option<bool> {
            match field.to_ascii_lowercase().as_str() {
                "same" => Some(false),
                "different" | "diff" => Some(true),
                _ => None,
            }
        };
        let (Some(truth_diff), Some(resp_diff)) =
            (parse(&row[truth_col]), parse(&row[resp_col]))
        else {
            errors.push(RowError {
                line: idx + 2,
                error: format!(
                    "truth/response must be same|different, got `{}`/`{}`",
                    row[truth_col], row[resp_col]
                ),
            });
            continue;
        };
        let counts = groups
            .entry((row[cond_col].clone(), row[pair_col].clone()))
            .or_default();
        if truth_diff {
            counts.n_diff += 1;
            if resp_diff {
                counts.resp_diff_given_diff += 1;
            }
        } else {
            counts.n_same += 1;
            if resp_diff {
                counts.resp_diff_given_same += 1;
            }
        }
    }

    let mut conditions = Vec::new();
    for ((condition, pair), c) in &groups {
        match ResponseTable::new(c.n_same, c.n_diff, c.resp_diff_given_same, c.resp_diff_given_diff)
        {
            Ok(t) => {
                let (hit, fa) = rates(&t, correction);
                let (dprime, error) = match dprime_differencing(hit, fa) {
                    Ok(d) => (Some(d), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                conditions.push(ConditionRow {
                    condition: condition.clone(),
                    pair: pair.clone(),
                    n_same: c.n_same,
                    n_diff: c.n_diff,
                    hit: Some(hit),
                    false_alarm: Some(fa),
                    dprime,
                    error,
                });
            }
            Err(e) => conditions.push(ConditionRow {
                condition: condition.clone(),
                pair: pair.clone(),
                n_same: c.n_same,
                n_diff: c.n_diff,
                hit: None,
                false_alarm: None,
                dprime: None,
                error: Some(e.to_string()),
            }),
        }
    }

    let mut settings = BTreeMap::new();
    setting(&mut settings, "input", args.input.display().to_string());
    setting(
        &mut settings,
        "correction",
        match correction {
            RateCorrection::None => "none",
            RateCorrection::HalfTrial => "half-trial",
        },
    );

    let failed = errors.len() as u32;
    Report::new("dprime", settings, ctx.timestamp, Body { conditions, errors })
        .emit(ctx.out.as_ref())?;
    Ok(failed)
}
