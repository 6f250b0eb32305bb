//! Virtual-stiffness observations and the recursive recognition model.
//!
//! An exploration's force-displacement ramp yields two point observations
//! of virtual stiffness (force over displacement at the peak, and the
//! fitted slope of the ramp), which can be fused by inverse-variance-style
//! weighting. The same ramp also yields a per-sample stiffness series that
//! feeds a recursive gain-weighted estimator; the decay of the update gain
//! below a threshold marks the minimum time needed to recognize the
//! compliance within a single exploration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trace::{LineFit, RampSegment, Trace};

/// Where a stiffness estimate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateSource {
    Peak,
    Slope,
    Fused,
    Recursive,
}

/// A virtual-stiffness value in N/mm with its spread.
///
/// Single-trial observations carry `sigma = 0`; the caller supplies the
/// spread observed across repeated trials when fusing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StiffnessEstimate {
    pub value: f64,
    pub sigma: f64,
    pub source: EstimateSource,
}

/// A force-displacement curve over one exploration's loading ramp.
///
/// Displacement is non-decreasing by construction and sample times are
/// carried through so time-resolved estimates keep their clock.
#[derive(Debug, Clone)]
pub struct FDCurve {
    t: Vec<f64>,
    d_mm: Vec<f64>,
    f_n: Vec<f64>,
}

impl FDCurve {
    pub fn new(t: Vec<f64>, d_mm: Vec<f64>, f_n: Vec<f64>) -> Result<Self> {
        if t.len() != d_mm.len() || t.len() != f_n.len() {
            return Err(Error::InvalidArgument("mismatched curve lengths".into()));
        }
        if t.len() < 2 {
            return Err(Error::InsufficientData(
                "curve needs at least 2 points".into(),
            ));
        }
        for i in 0..t.len() {
            if !t[i].is_finite() || !d_mm[i].is_finite() || !f_n[i].is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite curve point at index {i}"
                )));
            }
            if i > 0 && d_mm[i] < d_mm[i - 1] {
                return Err(Error::InvalidArgument(format!(
                    "displacement decreases at index {i}"
                )));
            }
        }
        Ok(Self { t, d_mm, f_n })
    }

    /// Builds the curve from force and displacement traces over the force
    /// ramp. The two traces must share the sampling grid. Measurement
    /// noise can leave residual dips in an otherwise loading displacement,
    /// so displacement is made non-decreasing with a running maximum
    /// (identity on clean monotone data).
    pub fn from_ramp(force: &Trace, displacement: &Trace, ramp: &RampSegment) -> Result<Self> {
        if force.len() != displacement.len() {
            return Err(Error::InvalidArgument(
                "force and displacement traces differ in length".into(),
            ));
        }
        if ramp.peak >= force.len() {
            return Err(Error::InvalidArgument(
                "ramp indices out of bounds for trace".into(),
            ));
        }
        let range = ramp.onset..=ramp.peak;
        let t = force.times()[range.clone()].to_vec();
        let f_n = force.values()[range.clone()].to_vec();
        let mut d_mm = displacement.values()[range].to_vec();
        let mut running = f64::NEG_INFINITY;
        for d in &mut d_mm {
            running = running.max(*d);
            *d = running;
        }
        Self::new(t, d_mm, f_n)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn displacements_mm(&self) -> &[f64] {
        &self.d_mm
    }

    pub fn forces_n(&self) -> &[f64] {
        &self.f_n
    }
}

/// Maximum applied force divided by the displacement at that point.
pub fn peak_observation(fd: &FDCurve) -> Result<StiffnessEstimate> {
    let (mut imax, mut fmax) = (0usize, f64::NEG_INFINITY);
    for (i, &f) in fd.f_n.iter().enumerate() {
        if f > fmax {
            imax = i;
            fmax = f;
        }
    }
    let d = fd.d_mm[imax];
    if d <= 0.0 {
        return Err(Error::DivisionDomain(
            "displacement at peak force is not positive".into(),
        ));
    }
    Ok(StiffnessEstimate {
        value: fmax / d,
        sigma: 0.0,
        source: EstimateSource::Peak,
    })
}

/// Fitted slope of force against displacement over the ramp.
pub fn slope_observation(fd: &FDCurve) -> Result<(StiffnessEstimate, LineFit)> {
    let fit = crate::trace::linear_fit(&fd.d_mm, &fd.f_n).map_err(|e| match e {
        Error::SingularFit(_) => {
            Error::SingularFit("no displacement spread on the ramp".into())
        }
        other => other,
    })?;
    Ok((
        StiffnessEstimate {
            value: fit.slope,
            sigma: 0.0,
            source: EstimateSource::Slope,
        },
        fit,
    ))
}

/// Combines two observations with the square-root variance-ratio weight:
/// `K = x1 + sqrt(sigma1^2 / (sigma1^2 + sigma2^2)) * (x2 - x1)`.
///
/// With both spreads zero the weight is undefined unless the observations
/// already agree.
pub fn fuse_observations(x1: f64, sigma1: f64, x2: f64, sigma2: f64) -> Result<StiffnessEstimate> {
    if sigma1 < 0.0 || sigma2 < 0.0 {
        return Err(Error::InvalidArgument("sigmas must be non-negative".into()));
    }
    let value = if sigma1 == 0.0 && sigma2 == 0.0 {
        if x1 == x2 {
            x1
        } else {
            return Err(Error::UndefinedWeight(x1, x2));
        }
    } else {
        let v1 = sigma1 * sigma1;
        let v2 = sigma2 * sigma2;
        let weight = (v1 / (v1 + v2)).sqrt();
        x1 + weight * (x2 - x1)
    };
    Ok(StiffnessEstimate {
        value,
        sigma: sigma1.min(sigma2),
        source: EstimateSource::Fused,
    })
}

/// Per-sample stiffness `k_j = F_j / d_j`, excluding the first point of the
/// curve. Returns `(t_j, k_j)` pairs.
pub fn instantaneous_stiffness(fd: &FDCurve) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(fd.len() - 1);
    for j in 1..fd.len() {
        let d = fd.d_mm[j];
        if d <= 0.0 {
            return Err(Error::DivisionDomain(format!(
                "zero displacement at curve index {j}"
            )));
        }
        out.push((fd.t[j], fd.f_n[j] / d));
    }
    Ok(out)
}

/// How the posterior spread shrinks after each recursive update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PosteriorUpdate {
    /// `sigma^2 <- (1 - K_g) * sigma^2` — the dimensionally consistent
    /// variance update. Default.
    Variance,
    /// `sigma^2 <- sqrt((1 - K_g) * sigma^2)` — the literal square-root
    /// form, kept behind this flag for comparison runs.
    LiteralSqrt,
}

/// Full history of the recursive stiffness estimate.
///
/// `estimates[0]` is the initialization (the first series value) and
/// `gains[i]` produced `estimates[i + 1]`, so `gains` is one shorter.
/// `variances` holds the prior/posterior spread alongside each estimate.
#[derive(Debug, Clone, Serialize)]
pub struct RecursionTrajectory {
    pub timestamps: Vec<f64>,
    pub estimates: Vec<f64>,
    pub gains: Vec<f64>,
    pub variances: Vec<f64>,
}

impl RecursionTrajectory {
    pub fn terminal_estimate(&self) -> f64 {
        *self.estimates.last().unwrap()
    }
}

/// Runs the gain-weighted recursion over a `(t, k)` series.
///
/// The estimate starts at the first series value with `init_variance`;
/// each step weighs the next value by
/// `K_g = sqrt(sigma_prior^2 / (sigma_prior^2 + meas_variance))` and
/// shrinks the spread per `posterior`.
pub fn recursive_update(
    series: &[(f64, f64)],
    meas_variance: f64,
    init_variance: f64,
    posterior: PosteriorUpdate,
) -> Result<RecursionTrajectory> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(
            "recursion needs at least 2 stiffness values".into(),
        ));
    }
    if meas_variance <= 0.0 || init_variance <= 0.0 {
        return Err(Error::InvalidArgument("variances must be positive".into()));
    }
    let n = series.len();
    let mut timestamps = Vec::with_capacity(n);
    let mut estimates = Vec::with_capacity(n);
    let mut gains = Vec::with_capacity(n - 1);
    let mut variances = Vec::with_capacity(n);
    timestamps.push(series[0].0);
    estimates.push(series[0].1);
    variances.push(init_variance);
    let mut var = init_variance;
    let mut estimate = series[0].1;
    for &(t, k) in &series[1..] {
        let gain = (var / (var + meas_variance)).sqrt();
        estimate += gain * (k - estimate);
        var = match posterior {
            PosteriorUpdate::Variance => (1.0 - gain) * var,
            PosteriorUpdate::LiteralSqrt => ((1.0 - gain) * var).sqrt(),
        };
        timestamps.push(t);
        estimates.push(estimate);
        gains.push(gain);
        variances.push(var);
    }
    Ok(RecursionTrajectory {
        timestamps,
        estimates,
        gains,
        variances,
    })
}

/// Default detection threshold on the update gain.
pub const DEFAULT_GAIN_THRESHOLD: f64 = 0.10;

/// Data-driven spread defaults for [`recursive_update`].
///
/// Measurement variance is the sliding residual variance of the series
/// about its local linear trend (window 11); the initial variance is the
/// variance of the first five values, falling back to the measurement
/// variance. Both are floored at a tiny fraction of the series scale so
/// noiseless inputs stay usable.
pub fn default_variances(series: &[(f64, f64)]) -> Result<(f64, f64)> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least 2 stiffness values".into(),
        ));
    }
    let ks: Vec<f64> = series.iter().map(|&(_, k)| k).collect();
    let mean_sq = ks.iter().map(|k| k * k).sum::<f64>() / ks.len() as f64;
    let floor = 1e-12 * mean_sq.max(1.0);

    let window = 11usize.min(ks.len());
    let meas = if window < 3 {
        sample_variance(&ks)
    } else {
        let mut total_ss = 0.0;
        let mut total_dof = 0.0;
        let xs: Vec<f64> = (0..window).map(|i| i as f64).collect();
        for start in 0..=(ks.len() - window) {
            let seg = &ks[start..start + window];
            if let Ok(fit) = crate::trace::linear_fit(&xs, seg) {
                let ss: f64 = seg
                    .iter()
                    .zip(&xs)
                    .map(|(&y, &x)| {
                        let r = y - (fit.intercept + fit.slope * x);
                        r * r
                    })
                    .sum();
                total_ss += ss;
                total_dof += (window - 2) as f64;
            }
        }
        if total_dof > 0.0 {
            total_ss / total_dof
        } else {
            sample_variance(&ks)
        }
    };
    let meas = meas.max(floor);
    let head = &ks[..5.min(ks.len())];
    let init = if head.len() >= 2 {
        sample_variance(head).max(floor)
    } else {
        meas
    };
    let init = if init > 0.0 { init } else { meas };
    Ok((meas, init))
}

fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Timestamp of the first update whose gain drops below
/// `threshold_fraction` of the maximum gain — the minimum time needed for
/// a stable recognition of the compliance.
pub fn recognition_time(traj: &RecursionTrajectory, threshold_fraction: f64) -> Result<f64> {
    if traj.gains.is_empty() {
        return Err(Error::InsufficientData("trajectory has no gains".into()));
    }
    if threshold_fraction <= 0.0 {
        return Err(Error::InvalidArgument(
            "threshold fraction must be positive".into(),
        ));
    }
    let max_gain = traj.gains.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = threshold_fraction * max_gain;
    for (i, &g) in traj.gains.iter().enumerate() {
        if g < threshold {
            return Ok(traj.timestamps[i + 1]);
        }
    }
    Err(Error::NotConverged(format!(
        "gain never fell below {threshold:.3e}"
    )))
}

/// Trapezoidal work of the loading ramp, in N·mm (millijoules).
pub fn applied_work(fd: &FDCurve) -> f64 {
    let mut work = 0.0;
    for j in 1..fd.len() {
        work += 0.5 * (fd.f_n[j] + fd.f_n[j - 1]) * (fd.d_mm[j] - fd.d_mm[j - 1]);
    }
    work
}

/// Combines cohort-normalized stiffness and work cues into a single
/// recognition cue. The combination rule is the arithmetic mean, one
/// admissible reading of integrating the two.
pub fn combine_recognition_cues(stiffness_norm: f64, work_norm: f64) -> f64 {
    0.5 * (stiffness_norm + work_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{spring_trace, triangle_profile, HertzParams};
    use crate::trace::extract_ramp;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn spring_curve(k: f64) -> FDCurve {
        let profile = triangle_profile(1.0, 2.0, 100.0).unwrap();
        let trial = spring_trace(k, &profile, 0.0, 0).unwrap();
        let ramp = extract_ramp(&trial.force, 0.05).unwrap();
        FDCurve::from_ramp(&trial.force, &trial.displacement, &ramp).unwrap()
    }

    #[test]
    fn peak_from_endpoint() {
        let fd = FDCurve::new(
            vec![0.0, 1.0, 2.0],
            vec![0.5, 1.0, 2.0],
            vec![1.0, 2.0, 4.0],
        )
        .unwrap();
        let est = peak_observation(&fd).unwrap();
        assert_abs_diff_eq!(est.value, 2.0, epsilon = 1e-12);
        assert_eq!(est.source, EstimateSource::Peak);
    }

    #[test]
    fn linear_spring_consistency() {
        let fd = spring_curve(1.5);
        let peak = peak_observation(&fd).unwrap();
        let (slope, fit) = slope_observation(&fd).unwrap();
        assert_abs_diff_eq!(peak.value, 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(slope.value, 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.r2, 1.0, epsilon = 1e-9);
        for (_, k) in instantaneous_stiffness(&fd).unwrap() {
            assert_abs_diff_eq!(k, 1.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn peak_rejects_zero_displacement() {
        let fd = FDCurve::new(vec![0.0, 1.0], vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            peak_observation(&fd),
            Err(Error::DivisionDomain(_))
        ));
    }

    #[test]
    fn slope_rejects_degenerate_displacement() {
        let fd = FDCurve::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            slope_observation(&fd),
            Err(Error::SingularFit(_))
        ));
    }

    #[test]
    fn hertz_peak_matches_generator() {
        let params = HertzParams::new(50.0, 10.0, 4.0).unwrap();
        let profile = triangle_profile(1.0, 2.0, 200.0).unwrap();
        let trial = crate::synth::hertz_trace(&params, &profile, 0.0, 0).unwrap();
        let ramp = extract_ramp(&trial.force, 0.05).unwrap();
        let fd = FDCurve::from_ramp(&trial.force, &trial.displacement, &ramp).unwrap();
        let est = peak_observation(&fd).unwrap();
        assert_relative_eq!(
            est.value,
            2.0 / params.indentation_mm(2.0),
            max_relative = 1e-9
        );
    }

    #[test]
    fn hertz_slope_between_local_tangents() {
        // F ~ d^{3/2} is convex, so the chord slope lies strictly between
        // the tangent slopes at the two endpoints.
        let params = HertzParams::new(50.0, 10.0, 4.0).unwrap();
        let profile = triangle_profile(1.0, 2.0, 200.0).unwrap();
        let trial = crate::synth::hertz_trace(&params, &profile, 0.0, 0).unwrap();
        let ramp = extract_ramp(&trial.force, 0.05).unwrap();
        let fd = FDCurve::from_ramp(&trial.force, &trial.displacement, &ramp).unwrap();
        let (slope, _) = slope_observation(&fd).unwrap();
        let d = fd.displacements_mm();
        let f = fd.forces_n();
        let n = fd.len();
        let first_nonzero = d.iter().position(|&x| x > 0.0).unwrap().max(1);
        let tangent_lo = (f[first_nonzero] - f[first_nonzero - 1])
            / (d[first_nonzero] - d[first_nonzero - 1]);
        let tangent_hi = (f[n - 1] - f[n - 2]) / (d[n - 1] - d[n - 2]);
        assert!(slope.value > tangent_lo && slope.value < tangent_hi);
    }

    #[test]
    fn hertz_instantaneous_increases() {
        let params = HertzParams::new(50.0, 10.0, 4.0).unwrap();
        let profile = triangle_profile(1.0, 2.0, 100.0).unwrap();
        let trial = crate::synth::hertz_trace(&params, &profile, 0.0, 0).unwrap();
        let ramp = extract_ramp(&trial.force, 0.05).unwrap();
        let fd = FDCurve::from_ramp(&trial.force, &trial.displacement, &ramp).unwrap();
        // Skip leading zero-displacement points by starting the curve at
        // the first loaded sample.
        let ks = instantaneous_stiffness(&fd);
        let ks = match ks {
            Ok(ks) => ks,
            Err(_) => {
                // The ramp can start at zero force; drop that point.
                let fd = FDCurve::new(
                    fd.times()[1..].to_vec(),
                    fd.displacements_mm()[1..].to_vec(),
                    fd.forces_n()[1..].to_vec(),
                )
                .unwrap();
                instantaneous_stiffness(&fd).unwrap()
            }
        };
        for w in ks.windows(2) {
            assert!(w[1].1 > w[0].1);
        }
    }

    #[test]
    fn fusion_fixed_point_and_limits() {
        let f = fuse_observations(5.0, 1.0, 5.0, 2.0).unwrap();
        assert_abs_diff_eq!(f.value, 5.0, epsilon = 1e-12);
        let f = fuse_observations(5.0, 0.0, 5.0, 0.0).unwrap();
        assert_abs_diff_eq!(f.value, 5.0, epsilon = 1e-12);
        // Huge spread on the second observation pins the result to x1.
        let f = fuse_observations(10.0, 1.0, 20.0, 1e12).unwrap();
        assert_abs_diff_eq!(f.value, 10.0, epsilon = 1e-6);
        assert!(matches!(
            fuse_observations(1.0, 0.0, 2.0, 0.0),
            Err(Error::UndefinedWeight(_, _))
        ));
    }

    #[test]
    fn fusion_direct_formula() {
        let f = fuse_observations(10.0, 2.0, 20.0, 2.0).unwrap();
        assert_abs_diff_eq!(f.value, 10.0 + 0.5f64.sqrt() * 10.0, epsilon = 1e-10);
        assert_abs_diff_eq!(f.value, 17.0711, epsilon = 1e-4);
    }

    #[test]
    fn instantaneous_hand_case() {
        let fd = FDCurve::new(
            vec![0.0, 1.0, 2.0],
            vec![0.5, 1.0, 1.5],
            vec![1.0, 2.0, 3.0],
        )
        .unwrap();
        let ks = instantaneous_stiffness(&fd).unwrap();
        assert_eq!(ks.len(), 2);
        assert_abs_diff_eq!(ks[0].1, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ks[1].1, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn recursion_constant_series_never_moves() {
        let series: Vec<(f64, f64)> = (0..50).map(|i| (i as f64 * 0.1, 2.0)).collect();
        let traj = recursive_update(&series, 1.0, 1.0, PosteriorUpdate::Variance).unwrap();
        for &e in &traj.estimates {
            assert_eq!(e, 2.0);
        }
    }

    #[test]
    fn recursion_two_step_hand_values() {
        let series = [(0.0, 2.0), (0.1, 2.0), (0.2, 4.0)];
        let traj = recursive_update(&series, 1.0, 1.0, PosteriorUpdate::Variance).unwrap();
        let g1 = 0.5f64.sqrt();
        let v1 = 1.0 - g1;
        let g2 = (v1 / (v1 + 1.0)).sqrt();
        assert_eq!(traj.gains.len(), 2);
        assert_abs_diff_eq!(traj.gains[0], g1, epsilon = 1e-15);
        assert_abs_diff_eq!(traj.gains[1], g2, epsilon = 1e-15);
        assert_abs_diff_eq!(traj.estimates[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(traj.estimates[1], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(traj.estimates[2], 2.0 + g2 * 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(traj.variances[2], (1.0 - g2) * v1, epsilon = 1e-15);
    }

    #[test]
    fn gains_strictly_decrease_under_constant_variance() {
        let series: Vec<(f64, f64)> = (0..200).map(|i| (i as f64, 3.0 + (i % 7) as f64)).collect();
        let traj = recursive_update(&series, 2.5, 4.0, PosteriorUpdate::Variance).unwrap();
        for w in traj.gains.windows(2) {
            assert!(w[1] < w[0]);
        }
        for &g in &traj.gains {
            assert!(g > 0.0 && g < 1.0);
        }
    }

    #[test]
    fn literal_sqrt_posterior_differs() {
        let series: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 1.0 + i as f64)).collect();
        let a = recursive_update(&series, 1.0, 1.0, PosteriorUpdate::Variance).unwrap();
        let b = recursive_update(&series, 1.0, 1.0, PosteriorUpdate::LiteralSqrt).unwrap();
        assert_ne!(a.estimates, b.estimates);
    }

    #[test]
    fn recognition_first_crossing() {
        let traj = RecursionTrajectory {
            timestamps: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            estimates: vec![1.0; 5],
            gains: vec![0.7, 0.5, 0.3, 0.06],
            variances: vec![1.0; 5],
        };
        let t = recognition_time(&traj, 0.10).unwrap();
        assert_abs_diff_eq!(t, 0.4, epsilon = 1e-12);
    }

    #[test]
    fn recognition_not_converged() {
        let traj = RecursionTrajectory {
            timestamps: vec![0.0, 0.1, 0.2],
            estimates: vec![1.0; 3],
            gains: vec![0.7, 0.5],
            variances: vec![1.0; 3],
        };
        assert!(matches!(
            recognition_time(&traj, 0.10),
            Err(Error::NotConverged(_))
        ));
    }

    #[test]
    fn recognition_matches_pure_gain_recursion() {
        let series: Vec<(f64, f64)> = (0..500).map(|i| (i as f64 * 0.01, 2.0)).collect();
        let traj = recursive_update(&series, 1.0, 1.0, PosteriorUpdate::Variance).unwrap();
        // Independent oracle: iterate the scalar gain recursion alone.
        let mut var: f64 = 1.0;
        let mut gains = Vec::new();
        for _ in 0..499 {
            let g = (var / (var + 1.0)).sqrt();
            gains.push(g);
            var *= 1.0 - g;
        }
        let gmax = gains.iter().cloned().fold(f64::MIN, f64::max);
        let idx = gains.iter().position(|&g| g < 0.1 * gmax).unwrap();
        let expected_t = series[idx + 1].0;
        let t = recognition_time(&traj, 0.10).unwrap();
        assert_abs_diff_eq!(t, expected_t, epsilon = 1e-12);
    }

    #[test]
    fn work_of_linear_spring() {
        let fd = spring_curve(1.0);
        let w = applied_work(&fd);
        // 1/2 k d^2 at d = 2 mm.
        assert_abs_diff_eq!(w, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn work_single_segment() {
        let fd = FDCurve::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        assert_abs_diff_eq!(applied_work(&fd), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn work_hertz_closed_form() {
        let params = HertzParams::new(50.0, 10.0, 4.0).unwrap();
        let profile = triangle_profile(1.0, 2.0, 100.0).unwrap();
        let trial = crate::synth::hertz_trace(&params, &profile, 0.0, 0).unwrap();
        let ramp = extract_ramp(&trial.force, 0.05).unwrap();
        let fd = FDCurve::from_ramp(&trial.force, &trial.displacement, &ramp).unwrap();
        let w = applied_work(&fd);
        let e_star = params.effective_modulus_kpa() * 1e-3;
        let delta = params.indentation_mm(2.0);
        let closed = 0.4 * (4.0 / 3.0) * e_star * params.radius_mm.sqrt() * delta.powf(2.5);
        assert_relative_eq!(w, closed, max_relative = 5e-3);
    }

    #[test]
    fn combine_is_mean() {
        assert_abs_diff_eq!(combine_recognition_cues(0.5, 0.5), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(combine_recognition_cues(0.2, 0.8), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn default_variances_floor_noiseless() {
        let series: Vec<(f64, f64)> = (0..100).map(|i| (i as f64, 1.5)).collect();
        let (meas, init) = default_variances(&series).unwrap();
        assert!(meas > 0.0 && init > 0.0);
        let traj = recursive_update(&series, meas, init, PosteriorUpdate::Variance).unwrap();
        assert_eq!(traj.terminal_estimate(), 1.5);
    }

    proptest! {
        #[test]
        fn fusion_stays_in_hull(
            x1 in -50.0..50.0f64,
            x2 in -50.0..50.0f64,
            s1 in 0.0..10.0f64,
            s2 in 0.0..10.0f64,
        ) {
            prop_assume!(s1 > 0.0 || s2 > 0.0);
            let f = fuse_observations(x1, s1, x2, s2).unwrap();
            let lo = x1.min(x2) - 1e-12;
            let hi = x1.max(x2) + 1e-12;
            prop_assert!(f.value >= lo && f.value <= hi);
        }

        #[test]
        fn estimates_stay_in_running_hull(
            ks in proptest::collection::vec(0.1..100.0f64, 2..60),
            meas in 0.01..10.0f64,
            init in 0.01..10.0f64,
        ) {
            let series: Vec<(f64, f64)> = ks.iter().enumerate()
                .map(|(i, &k)| (i as f64, k)).collect();
            let traj = recursive_update(&series, meas, init, PosteriorUpdate::Variance).unwrap();
            let mut lo = ks[0];
            let mut hi = ks[0];
            for (i, &e) in traj.estimates.iter().enumerate() {
                lo = lo.min(ks[i]);
                hi = hi.max(ks[i]);
                prop_assert!(e >= lo - 1e-9 && e <= hi + 1e-9);
            }
            for &g in &traj.gains {
                prop_assert!(g > 0.0 && g < 1.0);
            }
            for w in traj.gains.windows(2) {
                prop_assert!(w[1] < w[0]);
            }
        }

        #[test]
        fn work_additive_over_split(
            n in 4usize..40,
            k in 0.5..5.0f64,
        ) {
            let d: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
            let f: Vec<f64> = d.iter().map(|&x| k * x).collect();
            let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let whole = applied_work(&FDCurve::new(t.clone(), d.clone(), f.clone()).unwrap());
            let mid = n / 2;
            let first = applied_work(
                &FDCurve::new(t[..=mid].to_vec(), d[..=mid].to_vec(), f[..=mid].to_vec()).unwrap(),
            );
            let second = applied_work(
                &FDCurve::new(t[mid..].to_vec(), d[mid..].to_vec(), f[mid..].to_vec()).unwrap(),
            );
            prop_assert!((whole - first - second).abs() < 1e-9);
        }
    }
}
