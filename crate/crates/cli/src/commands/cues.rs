//! `cues` — one row of physical cues per trace file in a directory.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use serde::Serialize;

use palpate_core::stiffness::{
    applied_work, fuse_observations, peak_observation, slope_observation, FDCurve,
};
use palpate_core::trace::{
    displacement_amplitude, extract_ramp, force_rate, load_pair, moving_average,
    DEFAULT_ONSET_FRACTION, DEFAULT_SMOOTHING_WINDOW,
};

use crate::report::{setting, Report};
use crate::Ctx;

#[derive(Parser)]
pub struct Args {
    /// Directory of trace CSVs named `<trial>.csv`.
    pub input_dir: PathBuf,

    /// Smoothing window in readings.
    #[arg(long)]
    pub window: Option<usize>,

    /// Ramp onset threshold as a fraction of the peak derivative.
    #[arg(long)]
    pub onset_fraction: Option<f64>,
}

#[derive(Serialize)]
struct TrialRow {
    trial: String,
    force_rate_n_per_s: f64,
    force_rate_r2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    displacement_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    peak_stiffness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope_stiffness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope_r2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fused_stiffness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    work_mj: Option<f64>,
}

#[derive(Serialize)]
struct FileError {
    trial: String,
    error: String,
}

#[derive(Serialize)]
struct CohortSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    peak_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    peak_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fused_stiffness: Option<f64>,
}

#[derive(Serialize)]
struct Body {
    trials: Vec<TrialRow>,
    errors: Vec<FileError>,
    cohort: CohortSummary,
}

struct TrialCues {
    name: String,
    force_rate: palpate_core::LineFit,
    displacement: Option<f64>,
    peak: Option<f64>,
    slope: Option<(f64, f64)>,
    work: Option<f64>,
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<u32> {
    let window = ctx
        .config
        .resolve(args.window, "window", DEFAULT_SMOOTHING_WINDOW)?;
    let onset_fraction =
        ctx.config
            .resolve(args.onset_fraction, "onset-fraction", DEFAULT_ONSET_FRACTION)?;

    let mut names: Vec<PathBuf> = std::fs::read_dir(&args.input_dir)
        .with_context(|| format!("reading directory {}", args.input_dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    names.sort();
    if names.is_empty() {
        eprintln!(
            "warning: no trace CSVs found in {}",
            args.input_dir.display()
        );
    }

    let mut cues = Vec::new();
    let mut errors = Vec::new();
    for path in &names {
        let trial = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match analyze(path, window, onset_fraction) {
            Ok(c) => cues.push(TrialCues { name: trial, ..c }),
            Err(e) => errors.push(FileError {
                trial,
                error: format!("{e:#}"),
            }),
        }
    }

    // Observation spread across the directory's trials feeds the fusion
    // weight; a single trial has no spread.
    let peaks: Vec<f64> = cues.iter().filter_map(|c| c.peak).collect();
    let slopes: Vec<f64> = cues.iter().filter_map(|c| c.slope.map(|s| s.0)).collect();
    let sigma_peak = sample_sd(&peaks);
    let sigma_slope = sample_sd(&slopes);

    let trials: Vec<TrialRow> = cues
        .iter()
        .map(|c| {
            let fused = match (c.peak, c.slope) {
                (Some(p), Some((s, _))) => {
                    fuse_observations(p, sigma_peak, s, sigma_slope)
                        .ok()
                        .map(|e| e.value)
                }
                _ => None,
            };
            TrialRow {
                trial: c.name.clone(),
                force_rate_n_per_s: c.force_rate.slope,
                force_rate_r2: c.force_rate.r2,
                displacement_mm: c.displacement,
                peak_stiffness: c.peak,
                slope_stiffness: c.slope.map(|s| s.0),
                slope_r2: c.slope.map(|s| s.1),
                fused_stiffness: fused,
                work_mj: c.work,
            }
        })
        .collect();

    let cohort = if peaks.is_empty() || slopes.is_empty() {
        CohortSummary {
            peak_mean: None,
            peak_sigma: None,
            slope_mean: None,
            slope_sigma: None,
            fused_stiffness: None,
        }
    } else {
        let peak_mean = mean(&peaks);
        let slope_mean = mean(&slopes);
        CohortSummary {
            peak_mean: Some(peak_mean),
            peak_sigma: Some(sigma_peak),
            slope_mean: Some(slope_mean),
            slope_sigma: Some(sigma_slope),
            fused_stiffness: fuse_observations(peak_mean, sigma_peak, slope_mean, sigma_slope)
                .ok()
                .map(|e| e.value),
        }
    };

    let mut settings = BTreeMap::new();
    setting(&mut settings, "input-dir", args.input_dir.display().to_string());
    setting(&mut settings, "window", window);
    setting(&mut settings, "onset-fraction", onset_fraction);

    let failed = errors.len() as u32;
    let body = Body {
        trials,
        errors,
        cohort,
    };
    Report::new("cues", settings, ctx.timestamp, body).emit(ctx.out.as_ref())?;
    Ok(failed)
}

fn analyze(path: &PathBuf, window: usize, onset_fraction: f64) -> Result<TrialCues> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let (force, displacement) = load_pair(BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))?;
    let rate = force_rate(&force, window, onset_fraction)?;
    let smoothed_force = moving_average(&force, window)?;
    let ramp = extract_ramp(&smoothed_force, onset_fraction)?;

    let mut amplitude = None;
    let mut peak = None;
    let mut slope = None;
    let mut work = None;
    if let Some(disp) = displacement {
        let smoothed_disp = moving_average(&disp, window)?;
        amplitude = Some(displacement_amplitude(&smoothed_disp, onset_fraction)?);
        let fd = FDCurve::from_ramp(&smoothed_force, &smoothed_disp, &ramp)?;
        peak = Some(peak_observation(&fd)?.value);
        let (s, fit) = slope_observation(&fd)?;
        slope = Some((s.value, fit.r2));
        work = Some(applied_work(&fd));
    }
    Ok(TrialCues {
        name: String::new(),
        force_rate: rate,
        displacement: amplitude,
        peak,
        slope,
        work,
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}
