//! `stats` — statistical tests over table columns.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Parser;
use serde::Serialize;

use palpate_core::stats::{
    bootstrap_ci, cohens_d, mann_whitney_u, spearman, DEFAULT_BOOTSTRAP_ITERATIONS,
    DEFAULT_CONFIDENCE_LEVEL,
};

use crate::report::{setting, Report};
use crate::table::Table;
use crate::Ctx;

#[derive(Parser)]
pub struct Args {
    /// Headered CSV holding the columns to analyze.
    pub input: PathBuf,

    /// Which statistic to compute.
    #[arg(long, value_enum)]
    pub test: TestArg,

    /// First column name.
    #[arg(long)]
    pub col_a: String,

    /// Second column name (not used by bootstrap-mean).
    #[arg(long)]
    pub col_b: Option<String>,

    /// Bootstrap resampling iterations.
    #[arg(long)]
    pub iterations: Option<usize>,

    /// Bootstrap confidence level.
    #[arg(long)]
    pub level: Option<f64>,
}

#[derive(Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
pub enum TestArg {
    Spearman,
    MannWhitney,
    CohensD,
    BootstrapMean,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Body {
    Correlation {
        rho: f64,
        n: usize,
    },
    RankSum {
        u: f64,
        p_two_sided: f64,
        exact: bool,
        n_a: usize,
        n_b: usize,
    },
    EffectSize {
        cohens_d_abs: f64,
        n_a: usize,
        n_b: usize,
    },
    Interval {
        mean: f64,
        ci_low: f64,
        ci_high: f64,
        level: f64,
        iterations: usize,
        n: usize,
    },
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<u32> {
    let table = Table::load(&args.input)?;
    let a = table.float_column(&args.col_a)?;

    let mut settings = BTreeMap::new();
    setting(&mut settings, "input", args.input.display().to_string());
    setting(&mut settings, "col-a", &args.col_a);
    if let Some(col) = &args.col_b {
        setting(&mut settings, "col-b", col);
    }

    let need_b = || -> Result<Vec<f64>> {
        match &args.col_b {
            Some(name) => table.float_column(name),
            None => bail!("this test needs --col-b"),
        }
    };

    let (name, body) = match args.test {
        TestArg::Spearman => {
            setting(&mut settings, "test", "spearman");
            let b = need_b()?;
            (
                "stats",
                Body::Correlation {
                    rho: spearman(&a, &b)?,
                    n: a.len(),
                },
            )
        }
        TestArg::MannWhitney => {
            setting(&mut settings, "test", "mann-whitney");
            let b = need_b()?;
            let r = mann_whitney_u(&a, &b)?;
            (
                "stats",
                Body::RankSum {
                    u: r.u,
                    p_two_sided: r.p_two_sided,
                    exact: r.exact,
                    n_a: a.len(),
                    n_b: b.len(),
                },
            )
        }
        TestArg::CohensD => {
            setting(&mut settings, "test", "cohens-d");
            let b = need_b()?;
            (
                "stats",
                Body::EffectSize {
                    cohens_d_abs: cohens_d(&a, &b)?,
                    n_a: a.len(),
                    n_b: b.len(),
                },
            )
        }
        TestArg::BootstrapMean => {
            setting(&mut settings, "test", "bootstrap-mean");
            let iterations = ctx
                .config
                .resolve(args.iterations, "iterations", DEFAULT_BOOTSTRAP_ITERATIONS)?;
            let level = ctx
                .config
                .resolve(args.level, "level", DEFAULT_CONFIDENCE_LEVEL)?;
            setting(&mut settings, "iterations", iterations);
            setting(&mut settings, "level", level);
            setting(&mut settings, "seed", ctx.seed);
            let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
            let (lo, hi) = bootstrap_ci(&a, mean, iterations, level, ctx.seed)?;
            (
                "stats",
                Body::Interval {
                    mean: mean(&a),
                    ci_low: lo,
                    ci_high: hi,
                    level,
                    iterations,
                    n: a.len(),
                },
            )
        }
    };

    Report::new(name, settings, ctx.timestamp, body).emit(ctx.out.as_ref())?;
    Ok(0)
}
