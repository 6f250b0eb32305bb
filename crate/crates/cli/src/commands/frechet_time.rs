//! `frechet-time` — minimum discrimination time between two stimuli.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use serde::Serialize;

use palpate_core::frechet::{
    discrimination_time, Cue, CueSpace, PairOptions, ThresholdMode, DEFAULT_JND_FRACTION,
};
use palpate_core::trace::{
    load_trace, Channel, Trace, DEFAULT_DOWNSAMPLE_FACTOR, DEFAULT_SMOOTHING_WINDOW,
};

use crate::report::{setting, write_csv, Report};
use crate::Ctx;

#[derive(Parser)]
pub struct Args {
    /// Trace CSVs for the first stimulus (repeated trials are averaged).
    #[arg(long, required = true, num_args = 1..)]
    pub first: Vec<PathBuf>,

    /// Trace CSVs for the second stimulus.
    #[arg(long, required = true, num_args = 1..)]
    pub second: Vec<PathBuf>,

    /// Cue curve to compare.
    #[arg(long, value_enum)]
    pub cue: Option<CueArg>,

    /// Smoothing window in readings (1 disables smoothing).
    #[arg(long)]
    pub window: Option<usize>,

    /// Decimation stride before the distance sweep.
    #[arg(long)]
    pub downsample: Option<usize>,

    /// Detection threshold as a fraction of the running cue magnitude.
    #[arg(long)]
    pub jnd: Option<f64>,

    /// Treat the threshold as an absolute cue value instead of a
    /// fraction of the running magnitude.
    #[arg(long)]
    pub absolute_threshold: bool,

    /// Write the sweep profile as CSV `t,dissimilarity,reference,ratio`.
    #[arg(long, value_name = "PATH")]
    pub profile_out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
pub enum CueArg {
    Force,
    ForceRate,
}

#[derive(Serialize)]
struct Body {
    time_s: Option<f64>,
    discriminable: bool,
    steps: usize,
    final_dissimilarity: Option<f64>,
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<u32> {
    let window = ctx
        .config
        .resolve(args.window, "window", DEFAULT_SMOOTHING_WINDOW)?;
    let factor = ctx
        .config
        .resolve(args.downsample, "downsample", DEFAULT_DOWNSAMPLE_FACTOR)?;
    let jnd = ctx.config.resolve(args.jnd, "jnd", DEFAULT_JND_FRACTION)?;
    let cue = match args.cue.unwrap_or(CueArg::Force) {
        CueArg::Force => Cue::Force,
        CueArg::ForceRate => Cue::ForceRate,
    };
    let mode = if args.absolute_threshold {
        ThresholdMode::Absolute
    } else {
        ThresholdMode::Relative
    };

    let first = load_all(&args.first)?;
    let second = load_all(&args.second)?;
    let first_refs: Vec<&Trace> = first.iter().collect();
    let second_refs: Vec<&Trace> = second.iter().collect();

    let options = PairOptions {
        cue,
        space: CueSpace::OneD,
        window,
        downsample_factor: factor,
    };
    let outcome = discrimination_time(&first_refs, &second_refs, &options, jnd, mode)?;

    if let Some(path) = &args.profile_out {
        let mut csv = String::from("t,dissimilarity,reference,ratio\n");
        for p in &outcome.profile {
            writeln!(csv, "{},{},{},{}", p.t, p.dissimilarity, p.reference, p.ratio)?;
        }
        write_csv(path, &csv)?;
    }

    let mut settings = BTreeMap::new();
    setting(&mut settings, "first", paths_as_strings(&args.first));
    setting(&mut settings, "second", paths_as_strings(&args.second));
    setting(&mut settings, "cue", cue.to_string());
    setting(&mut settings, "window", window);
    setting(&mut settings, "downsample", factor);
    setting(&mut settings, "jnd", jnd);
    setting(&mut settings, "absolute-threshold", args.absolute_threshold);

    let body = Body {
        time_s: outcome.time_s,
        discriminable: outcome.time_s.is_some(),
        steps: outcome.profile.len(),
        final_dissimilarity: outcome.profile.last().map(|p| p.dissimilarity),
    };
    Report::new("frechet-time", settings, ctx.timestamp, body).emit(ctx.out.as_ref())?;
    Ok(0)
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<Trace>> {
    paths
        .iter()
        .map(|p| {
            let file = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            load_trace(BufReader::new(file), Channel::Force)
                .with_context(|| format!("parsing {}", p.display()))
        })
        .collect()
}

fn paths_as_strings(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}
