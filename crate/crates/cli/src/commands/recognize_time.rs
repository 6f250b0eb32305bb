//! `recognize-time` — gain-decay recognition time for one exploration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Parser;
use serde::Serialize;

use palpate_core::error::Error;
use palpate_core::stiffness::{
    default_variances, instantaneous_stiffness, recognition_time, recursive_update, FDCurve,
    PosteriorUpdate, DEFAULT_GAIN_THRESHOLD,
};
use palpate_core::trace::{
    extract_ramp, load_pair, moving_average, DEFAULT_ONSET_FRACTION, DEFAULT_SMOOTHING_WINDOW,
};

use crate::report::{setting, write_csv, Report};
use crate::Ctx;

#[derive(Parser)]
pub struct Args {
    /// Trace CSV with both force and displacement columns.
    pub input: PathBuf,

    /// Smoothing window in readings.
    #[arg(long)]
    pub window: Option<usize>,

    /// Ramp onset threshold as a fraction of the peak derivative.
    #[arg(long)]
    pub onset_fraction: Option<f64>,

    /// Detection threshold as a fraction of the maximum gain.
    #[arg(long)]
    pub gain_threshold: Option<f64>,

    /// Measurement variance; estimated from the data when omitted.
    #[arg(long)]
    pub meas_variance: Option<f64>,

    /// Initial estimate variance; estimated from the data when omitted.
    #[arg(long)]
    pub init_variance: Option<f64>,

    /// Use the literal square-root posterior shrink instead of the
    /// variance form.
    #[arg(long)]
    pub literal_sqrt_posterior: bool,

    /// Write the trajectory as CSV `t,gain,estimate,variance`.
    #[arg(long, value_name = "PATH")]
    pub trajectory_out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Body {
    time_s: Option<f64>,
    converged: bool,
    terminal_estimate: f64,
    steps: usize,
    meas_variance: f64,
    init_variance: f64,
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<u32> {
    let window = ctx
        .config
        .resolve(args.window, "window", DEFAULT_SMOOTHING_WINDOW)?;
    let onset_fraction =
        ctx.config
            .resolve(args.onset_fraction, "onset-fraction", DEFAULT_ONSET_FRACTION)?;
    let threshold =
        ctx.config
            .resolve(args.gain_threshold, "gain-threshold", DEFAULT_GAIN_THRESHOLD)?;
    let meas_flag = ctx.config.resolve_opt(args.meas_variance, "meas-variance")?;
    let init_flag = ctx.config.resolve_opt(args.init_variance, "init-variance")?;

    let file = File::open(&args.input)
        .with_context(|| format!("opening {}", args.input.display()))?;
    let (force, displacement) = load_pair(BufReader::new(file))?;
    let Some(displacement) = displacement else {
        bail!("{} has no displacement column", args.input.display());
    };
    let force = moving_average(&force, window)?;
    let displacement = moving_average(&displacement, window)?;
    let ramp = extract_ramp(&force, onset_fraction)?;
    let fd = FDCurve::from_ramp(&force, &displacement, &ramp)?;
    let series = instantaneous_stiffness(&fd)?;

    let (meas_default, init_default) = default_variances(&series)?;
    let meas = meas_flag.unwrap_or(meas_default);
    let init = init_flag.unwrap_or(init_default);
    let posterior = if args.literal_sqrt_posterior {
        PosteriorUpdate::LiteralSqrt
    } else {
        PosteriorUpdate::Variance
    };
    let traj = recursive_update(&series, meas, init, posterior)?;
    let time_s = match recognition_time(&traj, threshold) {
        Ok(t) => Some(t),
        Err(Error::NotConverged(_)) => None,
        Err(e) => return Err(e.into()),
    };

    if let Some(path) = &args.trajectory_out {
        let mut csv = String::from("t,gain,estimate,variance\n");
        writeln!(
            csv,
            "{},,{},{}",
            traj.timestamps[0], traj.estimates[0], traj.variances[0]
        )?;
        for i in 1..traj.estimates.len() {
            writeln!(
                csv,
                "{},{},{},{}",
                traj.timestamps[i],
                traj.gains[i - 1],
                traj.estimates[i],
                traj.variances[i]
            )?;
        }
        write_csv(path, &csv)?;
    }

    let mut settings = BTreeMap::new();
    setting(&mut settings, "input", args.input.display().to_string());
    setting(&mut settings, "window", window);
    setting(&mut settings, "onset-fraction", onset_fraction);
    setting(&mut settings, "gain-threshold", threshold);
    setting(&mut settings, "meas-variance", meas);
    setting(&mut settings, "init-variance", init);
    setting(
        &mut settings,
        "literal-sqrt-posterior",
        args.literal_sqrt_posterior,
    );

    let body = Body {
        time_s,
        converged: time_s.is_some(),
        terminal_estimate: traj.terminal_estimate(),
        steps: traj.gains.len(),
        meas_variance: meas,
        init_variance: init,
    };
    Report::new("recognize-time", settings, ctx.timestamp, body).emit(ctx.out.as_ref())?;
    Ok(0)
}
