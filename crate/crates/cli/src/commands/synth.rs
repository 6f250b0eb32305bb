//! `synth` — generate seeded synthetic trials as trace CSVs.

use std::collections::BTreeMap;
use std::io::Write as _;

use anyhow::{Context, Result};
use clap::Parser;

use palpate_core::synth::{
    hertz_trace, spring_trace, triangle_profile, HertzParams, SynthTrial, DEFAULT_POISSON_RATIO,
};
use palpate_core::trace::write_trace_csv;

use crate::report::setting;
use crate::Ctx;

#[derive(Parser)]
pub struct Args {
    /// Forward model for the displacement channel.
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,

    /// Spring stiffness, N/mm (spring model).
    #[arg(long)]
    pub k: Option<f64>,

    /// Finger-pad modulus, kPa (contact model).
    #[arg(long)]
    pub finger_modulus: Option<f64>,

    /// Sphere modulus, kPa (contact model).
    #[arg(long)]
    pub sphere_modulus: Option<f64>,

    /// Sphere radius, mm (contact model).
    #[arg(long)]
    pub radius: Option<f64>,

    /// Poisson ratio for both bodies (contact model).
    #[arg(long)]
    pub poisson: Option<f64>,

    /// Force ramp rate, N/s.
    #[arg(long)]
    pub rate: Option<f64>,

    /// Peak force of the triangle profile, N.
    #[arg(long)]
    pub peak: Option<f64>,

    /// Sampling rate, Hz.
    #[arg(long)]
    pub sample_rate: Option<f64>,

    /// Multiplicative displacement noise fraction.
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelArg {
    Spring,
    Hertz,
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<u32> {
    let model = args.model.unwrap_or(ModelArg::Spring);
    let rate = ctx.config.resolve(args.rate, "rate", 1.0)?;
    let peak = ctx.config.resolve(args.peak, "peak", 2.0)?;
    let sample_rate = ctx.config.resolve(args.sample_rate, "sample-rate", 80.0)?;
    let noise = ctx.config.resolve(args.noise, "noise", 0.0)?;
    let profile = triangle_profile(rate, peak, sample_rate)?;

    let mut settings = BTreeMap::new();
    setting(&mut settings, "rate", rate);
    setting(&mut settings, "peak", peak);
    setting(&mut settings, "sample-rate", sample_rate);
    setting(&mut settings, "noise", noise);
    setting(&mut settings, "seed", ctx.seed);

    let trial: SynthTrial;
    let mut comments = vec![format!(
        "triangle profile rate={rate} N/s peak={peak} N sample_rate={sample_rate} Hz"
    )];
    match model {
        ModelArg::Spring => {
            let k = ctx.config.resolve(args.k, "k", 1.0)?;
            setting(&mut settings, "model", "spring");
            setting(&mut settings, "k", k);
            trial = spring_trace(k, &profile, noise, ctx.seed)?;
            comments.push(format!("spring k={k} N/mm noise={noise} seed={}", ctx.seed));
        }
        ModelArg::Hertz => {
            let finger = ctx.config.resolve(args.finger_modulus, "finger-modulus", 50.0)?;
            let sphere = ctx.config.resolve(args.sphere_modulus, "sphere-modulus", 10.0)?;
            let radius = ctx.config.resolve(args.radius, "radius", 4.0)?;
            let poisson = ctx
                .config
                .resolve(args.poisson, "poisson", DEFAULT_POISSON_RATIO)?;
            setting(&mut settings, "model", "hertz");
            setting(&mut settings, "finger-modulus", finger);
            setting(&mut settings, "sphere-modulus", sphere);
            setting(&mut settings, "radius", radius);
            setting(&mut settings, "poisson", poisson);
            let params = HertzParams::new(finger, sphere, radius)?.with_poisson(poisson, poisson)?;
            trial = hertz_trace(&params, &profile, noise, ctx.seed)?;
            comments.push(format!(
                "contact E_f={finger} kPa E_s={sphere} kPa nu={poisson} R={radius} mm noise={noise} seed={}",
                ctx.seed
            ));
        }
    }

    for (key, value) in &settings {
        let rendered = match value {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        comments.push(format!("{key}={rendered}"));
    }
    let mut buf = Vec::new();
    write_trace_csv(
        &mut buf,
        trial.force.times(),
        Some(trial.force.values()),
        Some(trial.displacement.values()),
        &comments,
    )?;
    match &ctx.out {
        Some(path) => std::fs::write(path, &buf)
            .with_context(|| format!("writing trace to {}", path.display()))?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(0)
}
