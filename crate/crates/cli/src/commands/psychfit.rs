//! `psychfit` — maximum-likelihood psychometric curve.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use serde::Serialize;

use palpate_core::psychometrics::{fit_psychometric, PsychometricOptions};

use crate::report::{setting, Report};
use crate::table::Table;
use crate::Ctx;

#[derive(Parser)]
pub struct Args {
    /// CSV with columns `level,n_correct,n_total`.
    pub input: PathBuf,

    /// Guess rate (chance level of the task design).
    #[arg(long)]
    pub guess: Option<f64>,

    /// Upper bound on the lapse rate.
    #[arg(long)]
    pub max_lapse: Option<f64>,

    /// Beta-binomial intra-cluster correlation in (0,1); switches the
    /// estimation likelihood to beta-binomial.
    #[arg(long)]
    pub overdispersion: Option<f64>,
}

#[derive(Serialize)]
struct Body {
    threshold: f64,
    slope: f64,
    lapse: f64,
    guess: f64,
    deviance: f64,
    levels: usize,
    /// Fitted curve sampled at each input level, for plotting.
    curve: Vec<CurvePoint>,
}

#[derive(Serialize)]
struct CurvePoint {
    level: f64,
    p_observed: f64,
    p_fitted: f64,
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<u32> {
    let guess = ctx.config.resolve(args.guess, "guess", 0.5)?;
    let max_lapse = ctx.config.resolve(args.max_lapse, "max-lapse", 0.1)?;
    let overdispersion = ctx
        .config
        .resolve_opt(args.overdispersion, "overdispersion")?;

    let table = Table::load(&args.input)?;
    let levels = table.float_column("level")?;
    let n_correct: Vec<u32> = table
        .float_column("n_correct")?
        .into_iter()
        .map(|v| v as u32)
        .collect();
    let n_total: Vec<u32> = table
        .float_column("n_total")?
        .into_iter()
        .map(|v| v as u32)
        .collect();

    let options = PsychometricOptions {
        guess,
        max_lapse,
        overdispersion,
    };
    let fit = fit_psychometric(&levels, &n_correct, &n_total, &options)
        .context("fitting psychometric curve")?;

    let curve = levels
        .iter()
        .zip(n_correct.iter().zip(&n_total))
        .map(|(&x, (&k, &n))| CurvePoint {
            level: x,
            p_observed: k as f64 / n as f64,
            p_fitted: fit.evaluate(x),
        })
        .collect();

    let mut settings = BTreeMap::new();
    setting(&mut settings, "input", args.input.display().to_string());
    setting(&mut settings, "guess", guess);
    setting(&mut settings, "max-lapse", max_lapse);
    if let Some(rho) = overdispersion {
        setting(&mut settings, "overdispersion", rho);
    }

    let body = Body {
        threshold: fit.threshold,
        slope: fit.slope,
        lapse: fit.lapse,
        guess: fit.guess,
        deviance: fit.deviance,
        levels: levels.len(),
        curve,
    };
    Report::new("psychfit", settings, ctx.timestamp, body).emit(ctx.out.as_ref())?;
    Ok(0)
}
