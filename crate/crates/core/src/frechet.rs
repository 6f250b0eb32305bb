//! Discrete Fréchet distance and the differencing-rule time model.
//!
//! Two sequentially explored stimuli are compared by the discrete Fréchet
//! distance between their cue curves. Sweeping the distance over growing
//! curve prefixes against a relative threshold yields an estimate of the
//! minimum exploration time needed to tell the stimuli apart.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trace::{self, Trace};

/// A polygonal curve: an ordered list of points that all share one
/// dimension. Cue curves are one-dimensional (value-only, index-aligned);
/// a two-dimensional mode with a caller-chosen time scale is available for
/// curves that should couple across the time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCurve {
    data: Vec<f64>,
    dim: usize,
    pub label: String,
}

impl PolyCurve {
    pub fn new(points: Vec<Vec<f64>>, label: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientData("curve has no points".into()));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidArgument("points need at least 1 axis".into()));
        }
        let mut data = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "point {i} has dimension {} but the curve is {dim}-d",
                    p.len()
                )));
            }
            for &c in p {
                if !c.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "non-finite coordinate at point {i}"
                    )));
                }
                data.push(c);
            }
        }
        Ok(Self {
            data,
            dim,
            label: label.into(),
        })
    }

    pub fn one_d(values: &[f64], label: impl Into<String>) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v]).collect(), label)
    }

    pub fn two_d(points: &[[f64; 2]], label: impl Into<String>) -> Result<Self> {
        Self::new(points.iter().map(|p| p.to_vec()).collect(), label)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Prefix of the first `m` points.
    pub fn prefix(&self, m: usize) -> PolyCurve {
        PolyCurve {
            data: self.data[..m * self.dim].to_vec(),
            dim: self.dim,
            label: self.label.clone(),
        }
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A monotone index coupling between two curves: starts at the first
/// point pair, ends at the last, and each step advances either index by
/// at most one (never neither).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coupling {
    pub pairs: Vec<(usize, usize)>,
}

impl Coupling {
    /// Checks the coupling invariants against curve lengths `n` and `m`
    /// (indices are zero-based).
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("curves must be non-empty".into()));
        }
        let Some(&first) = self.pairs.first() else {
            return Err(Error::InvalidArgument("coupling has no pairs".into()));
        };
        if first != (0, 0) {
            return Err(Error::InvalidArgument(
                "coupling must start at the first point pair".into(),
            ));
        }
        if *self.pairs.last().unwrap() != (n - 1, m - 1) {
            return Err(Error::InvalidArgument(
                "coupling must end at the last point pair".into(),
            ));
        }
        for w in self.pairs.windows(2) {
            let (a0, b0) = w[0];
            let (a1, b1) = w[1];
            let da = a1.wrapping_sub(a0);
            let db = b1.wrapping_sub(b0);
            if da > 1 || db > 1 || (da == 0 && db == 0) {
                return Err(Error::InvalidArgument(format!(
                    "invalid step ({a0},{b0}) -> ({a1},{b1})"
                )));
            }
        }
        Ok(())
    }

    /// The coupling's length: the largest pairwise distance along it.
    pub fn length(&self, p: &PolyCurve, q: &PolyCurve) -> Result<f64> {
        if p.dim() != q.dim() {
            return Err(Error::InvalidArgument("curve dimensions differ".into()));
        }
        self.validate(p.len(), q.len())?;
        Ok(self
            .pairs
            .iter()
            .map(|&(a, b)| euclidean(p.point(a), q.point(b)))
            .fold(0.0, f64::max))
    }
}

/// Discrete Fréchet distance by the standard dynamic program:
/// `dF(i,j) = max(d(u_i, v_j), min(dF(i-1,j), dF(i-1,j-1), dF(i,j-1)))`.
pub fn discrete_frechet(p: &PolyCurve, q: &PolyCurve) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::InvalidArgument(format!(
            "curve dimensions differ ({} vs {})",
            p.dim(),
            q.dim()
        )));
    }
    let n = p.len();
    let m = q.len();
    // Row-rolling DP keeps memory at O(m).
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for i in 0..n {
        for j in 0..m {
            let d = euclidean(p.point(i), q.point(j));
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                (_, _) => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Largest curve size accepted by the enumeration oracle.
pub const BRUTE_FORCE_LIMIT: usize = 6;

/// Enumerates every monotone coupling and returns the minimum over
/// couplings of the maximum pairwise distance — the definition itself —
/// together with a coupling that attains it.
///
/// Exponential in the curve lengths; refuses inputs longer than
/// [`BRUTE_FORCE_LIMIT`]. Kept independent of the dynamic program so the
/// two can check each other.
pub fn brute_force_coupling(p: &PolyCurve, q: &PolyCurve) -> Result<(f64, Coupling)> {
    if p.dim() != q.dim() {
        return Err(Error::InvalidArgument("curve dimensions differ".into()));
    }
    if p.len() > BRUTE_FORCE_LIMIT || q.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "enumeration bound is {BRUTE_FORCE_LIMIT} points per curve"
        )));
    }
    fn dist(p: &PolyCurve, q: &PolyCurve, i: usize, j: usize) -> f64 {
        let pa = &p.data[i * p.dim..(i + 1) * p.dim];
        let qa = &q.data[j * q.dim..(j + 1) * q.dim];
        pa.iter()
            .zip(qa)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
    #[allow(clippy::too_many_arguments)]
    fn walk(
        p: &PolyCurve,
        q: &PolyCurve,
        i: usize,
        j: usize,
        cost: f64,
        path: &mut Vec<(usize, usize)>,
        best: &mut f64,
        best_path: &mut Vec<(usize, usize)>,
    ) {
        let cost = cost.max(dist(p, q, i, j));
        if cost >= *best {
            return; // cannot improve along this coupling
        }
        path.push((i, j));
        if i + 1 == p.len() && j + 1 == q.len() {
            *best = cost;
            best_path.clone_from(path);
            path.pop();
            return;
        }
        if i + 1 < p.len() {
            walk(p, q, i + 1, j, cost, path, best, best_path);
        }
        if j + 1 < q.len() {
            walk(p, q, i, j + 1, cost, path, best, best_path);
        }
        if i + 1 < p.len() && j + 1 < q.len() {
            walk(p, q, i + 1, j + 1, cost, path, best, best_path);
        }
        path.pop();
    }
    let mut best = f64::INFINITY;
    let mut best_path = Vec::new();
    let mut path = Vec::new();
    walk(p, q, 0, 0, 0.0, &mut path, &mut best, &mut best_path);
    Ok((best, Coupling { pairs: best_path }))
}

/// Distance-only form of [`brute_force_coupling`].
pub fn brute_force_frechet(p: &PolyCurve, q: &PolyCurve) -> Result<f64> {
    Ok(brute_force_coupling(p, q)?.0)
}

/// Which cue curve to compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cue {
    /// The smoothed force readings themselves.
    Force,
    /// The first derivative of the smoothed force.
    ForceRate,
}

impl std::fmt::Display for Cue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cue::Force => write!(f, "force"),
            Cue::ForceRate => write!(f, "force-rate"),
        }
    }
}

/// Distance space for the coupled curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CueSpace {
    /// Value-only curves; the shared cropped time base aligns samples.
    OneD,
    /// `(time * scale, value)` points, for callers who want the coupling
    /// to pay for time shifts. The scale fixes the seconds-to-cue-units
    /// exchange rate.
    TwoD { time_scale: f64 },
}

/// Options for preparing a pair of cue curves out of raw trials.
#[derive(Debug, Clone, Copy)]
pub struct PairOptions {
    pub cue: Cue,
    pub space: CueSpace,
    /// Smoothing window applied to the averaged force before cue
    /// extraction. 1 disables smoothing.
    pub window: usize,
    pub downsample_factor: usize,
}

impl Default for PairOptions {
    fn default() -> Self {
        Self {
            cue: Cue::Force,
            space: CueSpace::OneD,
            window: trace::DEFAULT_SMOOTHING_WINDOW,
            downsample_factor: trace::DEFAULT_DOWNSAMPLE_FACTOR,
        }
    }
}

/// Two equal-length cue curves on a shared clock, ready for similarity
/// analysis.
#[derive(Debug, Clone)]
pub struct CuePair {
    pub t: Vec<f64>,
    pub first: PolyCurve,
    pub second: PolyCurve,
}

/// Averages repeated trials, crops both stimuli to the common duration,
/// extracts the chosen cue, and downsamples.
///
/// Trials of one stimulus are truncated to the shortest before averaging,
/// and the two averaged curves are then truncated to the shorter of the
/// two. Samples are index-aligned, so trials are expected to share a
/// sampling rate.
pub fn prepare_pair(
    first_trials: &[&Trace],
    second_trials: &[&Trace],
    options: &PairOptions,
) -> Result<CuePair> {
    let first = average_trials(first_trials)?;
    let second = average_trials(second_trials)?;
    let common = first.len().min(second.len());
    if common < 2 {
        return Err(Error::InsufficientData(
            "overlap window shorter than 2 samples".into(),
        ));
    }
    let cue_curve = |avg: &Trace, label: &str| -> Result<(Vec<f64>, Vec<f64>)> {
        let cropped = Trace::new(
            avg.times()[..common].to_vec(),
            avg.values()[..common].to_vec(),
            avg.channel(),
        )?
        .with_meta(label.to_string());
        let smoothed = trace::moving_average(&cropped, options.window)?;
        // The force-rate cue differentiates the smoothed force at full
        // sample rate; decimation comes last either way.
        let cue = match options.cue {
            Cue::Force => smoothed,
            Cue::ForceRate => {
                let rate = smoothed.derivative();
                Trace::new(
                    smoothed.times()[..rate.len()].to_vec(),
                    rate,
                    smoothed.channel(),
                )?
            }
        };
        let down = trace::downsample(&cue, options.downsample_factor)?;
        Ok((down.times().to_vec(), down.values().to_vec()))
    };
    let (t1, v1) = cue_curve(&first, "first")?;
    let (_, v2) = cue_curve(&second, "second")?;
    if v1.len() < 2 {
        return Err(Error::InsufficientData(
            "downsampled cue curve shorter than 2 points".into(),
        ));
    }
    let build = |vals: &[f64], label: &str| -> Result<PolyCurve> {
        match options.space {
            CueSpace::OneD => PolyCurve::one_d(vals, label),
            CueSpace::TwoD { time_scale } => {
                let pts: Vec<[f64; 2]> = t1
                    .iter()
                    .zip(vals)
                    .map(|(&ti, &vi)| [ti * time_scale, vi])
                    .collect();
                PolyCurve::two_d(&pts, label)
            }
        }
    };
    Ok(CuePair {
        t: t1.clone(),
        first: build(&v1, "first")?,
        second: build(&v2, "second")?,
    })
}

fn average_trials(trials: &[&Trace]) -> Result<Trace> {
    if trials.is_empty() {
        return Err(Error::InsufficientData("no trials supplied".into()));
    }
    if trials.len() == 1 {
        return Ok(trials[0].clone());
    }
    let shortest = trials.iter().map(|t| t.len()).min().unwrap();
    if shortest < 2 {
        return Err(Error::InsufficientData("trial shorter than 2 samples".into()));
    }
    let mut avg = vec![0.0; shortest];
    for trial in trials {
        for (a, &v) in avg.iter_mut().zip(trial.values()) {
            *a += v;
        }
    }
    let n = trials.len() as f64;
    for a in &mut avg {
        *a /= n;
    }
    Trace::new(
        trials[0].times()[..shortest].to_vec(),
        avg,
        trials[0].channel(),
    )
}

/// Dissimilarity index between two stimuli for the chosen cue: the
/// discrete Fréchet distance over the prepared, downsampled cue curves.
pub fn pair_dissimilarity(
    first_trials: &[&Trace],
    second_trials: &[&Trace],
    options: &PairOptions,
) -> Result<f64> {
    let pair = prepare_pair(first_trials, second_trials, options)?;
    discrete_frechet(&pair.first, &pair.second)
}

/// Default just-noticeable-difference fraction for force cues.
pub const DEFAULT_JND_FRACTION: f64 = 0.10;

/// How the detection threshold scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    /// Threshold is `jnd_fraction` of the running maximum absolute cue
    /// magnitude over both prefixes (Weber-fraction reading). Default.
    Relative,
    /// Threshold is `jnd_fraction` in raw cue units.
    Absolute,
}

/// One step of the prefix sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub dissimilarity: f64,
    pub reference: f64,
    pub ratio: f64,
}

/// Result of the differencing-rule sweep: the estimated minimum
/// discrimination time (`None` when the threshold is never exceeded) and
/// the full dissimilarity profile for plotting.
#[derive(Debug, Clone)]
pub struct DiscriminationOutcome {
    pub time_s: Option<f64>,
    pub profile: Vec<ProfilePoint>,
}

/// Sweeps the discrete Fréchet distance over growing prefixes of the two
/// cue curves and reports the earliest time the dissimilarity exceeds the
/// detection threshold.
pub fn discrimination_time(
    first_trials: &[&Trace],
    second_trials: &[&Trace],
    options: &PairOptions,
    jnd_fraction: f64,
    mode: ThresholdMode,
) -> Result<DiscriminationOutcome> {
    if jnd_fraction <= 0.0 {
        return Err(Error::InvalidArgument(
            "jnd fraction must be positive".into(),
        ));
    }
    let pair = prepare_pair(first_trials, second_trials, options)?;
    let n = pair.first.len().min(pair.second.len());
    let mut profile = Vec::with_capacity(n.saturating_sub(1));
    let mut time_s = None;
    let mut running_ref = 0.0f64;
    // Magnitude of the cue value, ignoring any scaled time axis.
    let value_of = |c: &PolyCurve, i: usize| -> f64 { c.point(i)[c.dim() - 1].abs() };
    running_ref = running_ref
        .max(value_of(&pair.first, 0))
        .max(value_of(&pair.second, 0));
    for m in 2..=n {
        running_ref = running_ref
            .max(value_of(&pair.first, m - 1))
            .max(value_of(&pair.second, m - 1));
        let d = discrete_frechet(&pair.first.prefix(m), &pair.second.prefix(m))?;
        let reference = match mode {
            ThresholdMode::Relative => running_ref,
            ThresholdMode::Absolute => 1.0,
        };
        let ratio = if reference > 0.0 { d / reference } else { 0.0 };
        let t = pair.t[m - 1];
        profile.push(ProfilePoint {
            t,
            dissimilarity: d,
            reference: running_ref,
            ratio,
        });
        if time_s.is_none() && ratio > jnd_fraction {
            time_s = Some(t);
        }
    }
    Ok(DiscriminationOutcome { time_s, profile })
}
