//! Ingestion and conditioning of exploration time series.
//!
//! A [`Trace`] is one channel (force or displacement) of a single
//! exploration, sampled at whatever rate the sensor ran at. Everything
//! downstream — force-rate, displacement amplitude, stiffness curves,
//! similarity indices — is computed from the operations in this module.

use std::io::{BufRead, BufReader, Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// Physical channel a trace was recorded on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// Contact force in newtons.
    Force,
    /// Fingertip displacement in millimeters.
    Displacement,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Channel::Force => write!(f, "force"),
            Channel::Displacement => write!(f, "displacement"),
        }
    }
}

/// A time-ordered, unit-tagged sample series from one exploration.
///
/// Invariants are enforced at construction: timestamps strictly increase,
/// all values are finite, and there are at least two samples. The channel
/// is fixed for the lifetime of the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    t: Vec<f64>,
    values: Vec<f64>,
    channel: Channel,
    /// Free-form source label (file name, generator settings, ...).
    pub meta: String,
}

impl Trace {
    pub fn new(t: Vec<f64>, values: Vec<f64>, channel: Channel) -> Result<Self> {
        if t.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "time and value lengths differ ({} vs {})",
                t.len(),
                values.len()
            )));
        }
        if t.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "trace needs at least 2 samples, got {}",
                t.len()
            )));
        }
        for (i, (&ti, &vi)) in t.iter().zip(&values).enumerate() {
            if !ti.is_finite() || !vi.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite sample at index {i}"
                )));
            }
            if i > 0 && ti <= t[i - 1] {
                return Err(Error::InvalidArgument(format!(
                    "timestamps not strictly increasing at index {i} (t={ti})"
                )));
            }
        }
        Ok(Self {
            t,
            values,
            channel,
            meta: String::new(),
        })
    }

    pub fn with_meta(mut self, meta: impl Into<String>) -> Self {
        self.meta = meta.into();
        self
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn duration(&self) -> f64 {
        self.t[self.t.len() - 1] - self.t[0]
    }

    /// First differences of the values with respect to time, length `n - 1`.
    /// Entry `i` is the slope over the interval `[t[i], t[i+1]]`.
    pub fn derivative(&self) -> Vec<f64> {
        self.t
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(tw, vw)| (vw[1] - vw[0]) / (tw[1] - tw[0]))
            .collect()
    }
}

/// The rising segment of a trace, by sample indices into its parent.
///
/// `onset < peak` always holds, and both indices are valid for the trace
/// the segment was extracted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RampSegment {
    pub onset: usize,
    pub peak: usize,
}

impl RampSegment {
    pub fn len(&self) -> usize {
        self.peak - self.onset + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    /// Slope in value units per abscissa unit (N/s for force-rate fits).
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination, `1 - SS_res / SS_tot`.
    pub r2: f64,
}

/// Parses a trace CSV with header `t,force,displacement` (s, N, mm).
///
/// Lines starting with `#` are parameter-echo comments and are skipped.
/// The displacement field may be empty for force-only recordings. Rows with
/// non-increasing timestamps are rejected with the offending line number.
pub fn load_trace<R: Read>(source: R, channel: Channel) -> Result<Trace> {
    let (t, values) = read_columns(source, channel)?;
    let n = t.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "trace needs at least 2 rows, got {n}"
        )));
    }
    Trace::new(t, values, channel)
}

/// Loads the force trace and, when the displacement column is populated,
/// the displacement trace from one CSV.
pub fn load_pair<R: Read>(source: R) -> Result<(Trace, Option<Trace>)> {
    let mut buf = String::new();
    let mut reader = BufReader::new(source);
    reader.read_to_string(&mut buf)?;
    let force = load_trace(buf.as_bytes(), Channel::Force)?;
    let displacement = match load_trace(buf.as_bytes(), Channel::Displacement) {
        Ok(trace) => Some(trace),
        Err(Error::Parse { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok((force, displacement))
}

fn read_columns<R: Read>(source: R, channel: Channel) -> Result<(Vec<f64>, Vec<f64>)> {
    let reader = BufReader::new(source);
    let mut t = Vec::new();
    let mut values = Vec::new();
    let mut header_seen = false;
    let mut last_t = f64::NEG_INFINITY;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            header_seen = true;
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.first() != Some(&"t") {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected header starting with `t`, got `{line}`"),
                });
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let col = match channel {
            Channel::Force => 1,
            Channel::Displacement => 2,
        };
        let raw = fields.get(col).copied().unwrap_or("");
        if raw.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("missing {channel} value"),
            });
        }
        let ti: f64 = fields[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad timestamp `{}`", fields[0]),
        })?;
        let vi: f64 = raw.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad {channel} value `{raw}`"),
        })?;
        if !ti.is_finite() || !vi.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                msg: "non-finite sample".into(),
            });
        }
        if ti <= last_t {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("timestamp {ti} does not increase past {last_t}"),
            });
        }
        last_t = ti;
        t.push(ti);
        values.push(vi);
    }
    Ok((t, values))
}

/// Writes `t,force,displacement` rows at full (round-trip exact) precision.
/// Comment lines are prefixed with `#` before the header.
pub fn write_trace_csv<W: Write>(
    mut out: W,
    t: &[f64],
    force: Option<&[f64]>,
    displacement: Option<&[f64]>,
    comments: &[String],
) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "t,force,displacement")?;
    for (i, ti) in t.iter().enumerate() {
        let f = force.map_or(String::new(), |f| f[i].to_string());
        let d = displacement.map_or(String::new(), |d| d[i].to_string());
        writeln!(out, "{ti},{f},{d}")?;
    }
    Ok(())
}

/// Centered moving average, window truncated at the boundaries.
///
/// For window `w` the sample at index `i` averages indices
/// `[i - (w-1)/2, i + w/2]` clipped to the trace; timestamps are unchanged.
/// The sensor-conditioning default is a window of 100 readings.
pub fn moving_average(trace: &Trace, window: usize) -> Result<Trace> {
    if window < 1 {
        return Err(Error::InvalidArgument("window must be >= 1".into()));
    }
    let n = trace.len();
    let left = (window - 1) / 2;
    let right = window / 2;
    let v = trace.values();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(left);
        let hi = (i + right + 1).min(n);
        // Summing deviations from the window's first value keeps constant
        // stretches exact.
        let base = v[lo];
        let sum: f64 = v[lo..hi].iter().map(|&x| x - base).sum();
        out.push(base + sum / (hi - lo) as f64);
    }
    let mut smoothed = Trace::new(trace.times().to_vec(), out, trace.channel())?;
    smoothed.meta = trace.meta.clone();
    Ok(smoothed)
}

/// Default smoothing window, in readings.
pub const DEFAULT_SMOOTHING_WINDOW: usize = 100;

/// Default fraction of the peak derivative that marks the ramp onset.
pub const DEFAULT_ONSET_FRACTION: f64 = 0.05;

/// Locates the rising segment of an (already smoothed) trace.
///
/// The peak is the first global maximum of the values. The onset is the
/// first index of the contiguous derivative run, containing the derivative
/// maximum, where the derivative stays above `onset_fraction` of its peak.
pub fn extract_ramp(trace: &Trace, onset_fraction: f64) -> Result<RampSegment> {
    if trace.len() < 3 {
        return Err(Error::InsufficientData(
            "ramp extraction needs at least 3 samples".into(),
        ));
    }
    if !(0.0..1.0).contains(&onset_fraction) {
        return Err(Error::InvalidArgument(format!(
            "onset fraction {onset_fraction} outside [0,1)"
        )));
    }
    let deriv = trace.derivative();
    let (mut imax, mut dmax) = (0usize, f64::NEG_INFINITY);
    for (i, &d) in deriv.iter().enumerate() {
        if d > dmax {
            imax = i;
            dmax = d;
        }
    }
    if dmax <= 0.0 {
        return Err(Error::NoRamp("no rising derivative in trace".into()));
    }
    let threshold = onset_fraction * dmax;
    let mut onset = 0;
    for i in (0..=imax).rev() {
        if deriv[i] < threshold {
            onset = i + 1;
            break;
        }
    }
    let values = trace.values();
    let (mut peak, mut vmax) = (0usize, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > vmax {
            peak = i;
            vmax = v;
        }
    }
    if onset >= peak {
        return Err(Error::NoRamp(format!(
            "onset index {onset} not before peak index {peak}"
        )));
    }
    Ok(RampSegment { onset, peak })
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData(
            "fit needs at least 2 points".into(),
        ));
    }
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::SingularFit("all abscissa values identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res = (syy - slope * sxy).max(0.0);
    // Constant ordinate fit exactly by the horizontal line: define r2 = 1.
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    if !slope.is_finite() {
        return Err(Error::SingularFit("non-finite slope".into()));
    }
    Ok(LineFit {
        slope,
        intercept,
        r2,
    })
}

/// Force-rate of an exploration: smooth, extract the ramp, fit force vs
/// time over the ramp slice. The slope is in N/s.
pub fn force_rate(trace: &Trace, window: usize, onset_fraction: f64) -> Result<LineFit> {
    if trace.channel() != Channel::Force {
        return Err(Error::InvalidArgument(
            "force_rate needs a force-channel trace".into(),
        ));
    }
    let smoothed = moving_average(trace, window)?;
    let ramp = extract_ramp(&smoothed, onset_fraction)?;
    let slice = ramp.onset..=ramp.peak;
    linear_fit(&smoothed.times()[slice.clone()], &smoothed.values()[slice])
}

/// Absolute displacement between the initiation and conclusion of the
/// movement. Falling movements are handled by extracting the ramp of the
/// negated trace, so the result is direction-free.
pub fn displacement_amplitude(trace: &Trace, onset_fraction: f64) -> Result<f64> {
    if trace.channel() != Channel::Displacement {
        return Err(Error::InvalidArgument(
            "displacement_amplitude needs a displacement-channel trace".into(),
        ));
    }
    let deriv = trace.derivative();
    let max_rise = deriv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max_fall = deriv.iter().cloned().fold(f64::INFINITY, f64::min);
    let ramp = if max_rise >= -max_fall {
        extract_ramp(trace, onset_fraction)?
    } else {
        let negated = Trace::new(
            trace.times().to_vec(),
            trace.values().iter().map(|v| -v).collect(),
            trace.channel(),
        )?;
        extract_ramp(&negated, onset_fraction)?
    };
    let v = trace.values();
    Ok((v[ramp.peak] - v[ramp.onset]).abs())
}

/// Default stride for decimating curves before similarity analysis.
pub const DEFAULT_DOWNSAMPLE_FACTOR: usize = 50;

/// Keeps every `factor`-th sample starting at index 0.
pub fn downsample(trace: &Trace, factor: usize) -> Result<Trace> {
    if factor < 1 {
        return Err(Error::InvalidArgument("factor must be >= 1".into()));
    }
    if factor == 1 {
        return Ok(trace.clone());
    }
    let t: Vec<f64> = trace.times().iter().step_by(factor).copied().collect();
    let v: Vec<f64> = trace.values().iter().step_by(factor).copied().collect();
    let mut out = Trace::new(t, v, trace.channel())?;
    out.meta = trace.meta.clone();
    Ok(out)
}

/// Maps values into (0, 1) through the logistic membership function
/// `1 / (1 + exp(-rate * (x - center)))`.
///
/// The center defaults to the sample mean and the growth rate to 1,
/// matching the cohort-aggregation normalization used on every cue.
pub fn sigmoid_normalize(values: &[f64], center: Option<f64>, rate: Option<f64>) -> Vec<f64> {
    let center = center.unwrap_or_else(|| values.iter().sum::<f64>() / values.len() as f64);
    let rate = rate.unwrap_or(1.0);
    values
        .iter()
        .map(|&x| 1.0 / (1.0 + (-rate * (x - center)).exp()))
        .collect()
}
