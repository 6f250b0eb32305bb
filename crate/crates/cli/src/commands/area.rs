//! `area` — contact-print area from a digitized boundary polygon.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Parser;
use serde::Serialize;

use palpate_core::geometry::{ContactPrint, DEFAULT_SCALE_BAR_CM};

use crate::report::{setting, Report};
use crate::Ctx;

#[derive(Parser)]
pub struct Args {
    /// Polygon CSV with `x_px,y_px` rows and a sidecar line
    /// `scale_bar_px,<pixels>`.
    pub input: PathBuf,

    /// Physical length of the reference bar, cm.
    #[arg(long)]
    pub scale_bar_cm: Option<f64>,

    /// Reference bar length in pixels; overrides the sidecar line.
    #[arg(long)]
    pub scale_bar_px: Option<f64>,
}

#[derive(Serialize)]
struct Body {
    area_cm2: f64,
    scale_cm_per_px: f64,
    vertices: usize,
    mixed_orientation_warning: bool,
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<u32> {
    let bar_cm = ctx
        .config
        .resolve(args.scale_bar_cm, "scale-bar-cm", DEFAULT_SCALE_BAR_CM)?;
    let bar_px_flag = ctx.config.resolve_opt(args.scale_bar_px, "scale-bar-px")?;

    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let mut vertices = Vec::new();
    let mut sidecar_px = None;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.first() == Some(&"x_px") {
            continue; // header
        }
        if fields.first() == Some(&"scale_bar_px") {
            let raw = fields.get(1).copied().unwrap_or("");
            sidecar_px = Some(raw.parse::<f64>().with_context(|| {
                format!("{}:{}: bad scale bar `{raw}`", args.input.display(), idx + 1)
            })?);
            continue;
        }
        if fields.len() < 2 {
            bail!("{}:{}: expected `x,y`", args.input.display(), idx + 1);
        }
        let x: f64 = fields[0].parse().with_context(|| {
            format!("{}:{}: bad x `{}`", args.input.display(), idx + 1, fields[0])
        })?;
        let y: f64 = fields[1].parse().with_context(|| {
            format!("{}:{}: bad y `{}`", args.input.display(), idx + 1, fields[1])
        })?;
        vertices.push([x, y]);
    }
    let Some(bar_px) = bar_px_flag.or(sidecar_px) else {
        bail!(
            "{} has no `scale_bar_px` line and --scale-bar-px was not given",
            args.input.display()
        );
    };

    let print = ContactPrint::new(vertices, bar_px, bar_cm)?;
    if print.has_mixed_orientation() {
        eprintln!(
            "warning: boundary in {} has mixed-orientation segments; check the digitized outline",
            args.input.display()
        );
    }

    let mut settings = BTreeMap::new();
    setting(&mut settings, "input", args.input.display().to_string());
    setting(&mut settings, "scale-bar-cm", bar_cm);
    setting(&mut settings, "scale-bar-px", bar_px);

    let body = Body {
        area_cm2: print.area_cm2(),
        scale_cm_per_px: print.pixel_scale(),
        vertices: print.boundary_px.len(),
        mixed_orientation_warning: print.has_mixed_orientation(),
    };
    Report::new("area", settings, ctx.timestamp, body).emit(ctx.out.as_ref())?;
    Ok(0)
}
