//! `skinfit` — modulus-scale calibration from compression curves.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Parser;
use serde::Serialize;

use palpate_core::skinfit::{
    fit_scale, MeasuredCurve, DEFAULT_CONTACT_AREA_MM2, DEFAULT_SCALE_BOUNDS,
    DEFAULT_THICKNESSES_MM,
};

use crate::report::{setting, Report};
use crate::table::Table;
use crate::Ctx;

#[derive(Parser)]
pub struct Args {
    /// Measured curve CSVs with columns `d_mm,force_N`.
    #[arg(required = true, num_args = 1..)]
    pub curves: Vec<PathBuf>,

    /// Layer thicknesses in mm as `epidermis,dermis,hypodermis`.
    #[arg(long)]
    pub thicknesses: Option<String>,

    /// Nominal contact area in mm².
    #[arg(long)]
    pub area_mm2: Option<f64>,

    /// Scale search bounds as `lo,hi`.
    #[arg(long)]
    pub bounds: Option<String>,
}

#[derive(Serialize)]
struct CurveReport {
    file: String,
    points: usize,
    r2: f64,
}

#[derive(Serialize)]
struct Body {
    scale: f64,
    softness_index: f64,
    moduli_kpa: [f64; 3],
    mean_r2: f64,
    curves: Vec<CurveReport>,
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<u32> {
    let thick_raw = ctx.config.resolve(
        args.thicknesses.clone(),
        "thicknesses",
        format!(
            "{},{},{}",
            DEFAULT_THICKNESSES_MM[0], DEFAULT_THICKNESSES_MM[1], DEFAULT_THICKNESSES_MM[2]
        ),
    )?;
    let thicknesses = parse_triplet(&thick_raw)?;
    let area = ctx
        .config
        .resolve(args.area_mm2, "area-mm2", DEFAULT_CONTACT_AREA_MM2)?;
    let bounds_raw = ctx.config.resolve(
        args.bounds.clone(),
        "bounds",
        format!("{},{}", DEFAULT_SCALE_BOUNDS.0, DEFAULT_SCALE_BOUNDS.1),
    )?;
    let bounds = parse_pair(&bounds_raw)?;

    let mut curves = Vec::new();
    for path in &args.curves {
        let table = Table::load(path)?;
        let d = table.float_column("d_mm")?;
        let f = table.float_column("force_N")?;
        curves.push(MeasuredCurve::new(d, f, path.display().to_string())?);
    }

    let fit = fit_scale(&curves, thicknesses, area, bounds)?;

    let mut settings = BTreeMap::new();
    setting(
        &mut settings,
        "curves",
        args.curves
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>(),
    );
    setting(&mut settings, "thicknesses", thick_raw);
    setting(&mut settings, "area-mm2", area);
    setting(&mut settings, "bounds", bounds_raw);

    let body = Body {
        scale: fit.scale,
        softness_index: fit.softness_index,
        moduli_kpa: fit.moduli_kpa,
        mean_r2: fit.mean_r2,
        curves: curves
            .iter()
            .zip(&fit.per_curve_r2)
            .map(|(c, &r2)| CurveReport {
                file: c.label.clone(),
                points: c.displacement_mm.len(),
                r2,
            })
            .collect(),
    };
    Report::new("skinfit", settings, ctx.timestamp, body).emit(ctx.out.as_ref())?;
    Ok(0)
}

fn parse_triplet(raw: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()?;
    if parts.len() != 3 {
        bail!("expected three comma-separated values, got `{raw}`");
    }
    Ok([parts[0], parts[1], parts[2]])
}

fn parse_pair(raw: &str) -> Result<(f64, f64)> {
    let parts: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()?;
    if parts.len() != 2 {
        bail!("expected two comma-separated values, got `{raw}`");
    }
    Ok((parts[0], parts[1]))
}
