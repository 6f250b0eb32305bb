//! Same-different signal detection under the differencing rule, and
//! psychometric-function fitting.
//!
//! The differencing observer responds "different" when the absolute
//! difference of two noisy observations exceeds a criterion. Its ROC is
//!
//! ```text
//! fa  = 2 Phi(-c / sqrt(2))
//! hit = Phi((d' - c) / sqrt(2)) + Phi(-(d' + c) / sqrt(2))
//! ```
//!
//! with `Phi` the standard normal CDF. Sensitivity is recovered from a
//! (hit, false-alarm) pair by inverting the hit equation numerically —
//! the forward model replaces the printed lookup tables such rates are
//! traditionally read from.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Same-different trial counts and the "different" responses they drew.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResponseTable {
    /// Trials whose two stimuli were physically the same.
    pub n_same: u32,
    /// Trials whose two stimuli differed.
    pub n_diff: u32,
    /// "Different" responses on same trials (false alarms).
    pub resp_diff_given_same: u32,
    /// "Different" responses on different trials (hits).
    pub resp_diff_given_diff: u32,
}

impl ResponseTable {
    pub fn new(
        n_same: u32,
        n_diff: u32,
        resp_diff_given_same: u32,
        resp_diff_given_diff: u32,
    ) -> Result<Self> {
        if n_same == 0 || n_diff == 0 {
            return Err(Error::InvalidArgument(
                "trial counts must be at least 1".into(),
            ));
        }
        if resp_diff_given_same > n_same || resp_diff_given_diff > n_diff {
            return Err(Error::InvalidArgument(
                "response counts exceed trial counts".into(),
            ));
        }
        Ok(Self {
            n_same,
            n_diff,
            resp_diff_given_same,
            resp_diff_given_diff,
        })
    }
}

/// Extreme-rate handling for [`rates`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateCorrection {
    None,
    /// Replace 0 with `1/(2N)` and 1 with `1 - 1/(2N)`.
    HalfTrial,
}

/// Hit and false-alarm rates from a response table.
pub fn rates(table: &ResponseTable, correction: RateCorrection) -> (f64, f64) {
    let adjust = |count: u32, n: u32| -> f64 {
        let raw = count as f64 / n as f64;
        match correction {
            RateCorrection::None => raw,
            RateCorrection::HalfTrial => {
                if count == 0 {
                    1.0 / (2.0 * n as f64)
                } else if count == n {
                    1.0 - 1.0 / (2.0 * n as f64)
                } else {
                    raw
                }
            }
        }
    };
    let hit = adjust(table.resp_diff_given_diff, table.n_diff);
    let fa = adjust(table.resp_diff_given_same, table.n_same);
    (hit, fa)
}

/// Forward ROC of the differencing observer.
pub fn roc_differencing(dprime: f64, criterion: f64) -> Result<(f64, f64)> {
    if dprime < 0.0 || criterion < 0.0 {
        return Err(Error::InvalidArgument(
            "d' and criterion must be non-negative".into(),
        ));
    }
    let n = std_normal();
    let s = std::f64::consts::SQRT_2;
    let fa = 2.0 * n.cdf(-criterion / s);
    let hit = n.cdf((dprime - criterion) / s) + n.cdf(-(dprime + criterion) / s);
    Ok((hit, fa))
}

/// Inverts the differencing ROC: positions the criterion from the
/// false-alarm rate, then bisects the hit equation for d'. Rates at or
/// beyond the clamp (`hit <= fa`) return 0.
pub fn dprime_differencing(hit: f64, fa: f64) -> Result<f64> {
    for rate in [hit, fa] {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::MustCorrect(rate));
        }
    }
    if hit <= fa {
        return Ok(0.0);
    }
    let n = std_normal();
    let s = std::f64::consts::SQRT_2;
    let criterion = -s * n.inverse_cdf(fa / 2.0);
    let hit_at = |d: f64| n.cdf((d - criterion) / s) + n.cdf(-(d + criterion) / s);
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    if hit_at(hi) < hit {
        return Ok(hi); // saturated: every table value lies far below this
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hit_at(mid) < hit {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fraction of trials whose response matches the truth.
pub fn percent_correct<T: PartialEq>(responses: &[(T, T)]) -> Result<f64> {
    if responses.is_empty() {
        return Err(Error::InsufficientData("no responses".into()));
    }
    let correct = responses.iter().filter(|(truth, resp)| truth == resp).count();
    Ok(correct as f64 / responses.len() as f64)
}

/// Fitted psychometric curve
/// `psi(x) = guess + (1 - guess - lapse) * logistic(slope * (x - threshold))`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PsychometricFit {
    /// Stimulus value at the curve midpoint.
    pub threshold: f64,
    /// Logistic growth rate, 1/stimulus units.
    pub slope: f64,
    /// Lapse rate in [0, 0.1].
    pub lapse: f64,
    /// Guess rate (0.5 for the same-different design).
    pub guess: f64,
    /// `2 (LL_saturated - LL_model)` under the binomial likelihood.
    pub deviance: f64,
}

impl PsychometricFit {
    pub fn evaluate(&self, x: f64) -> f64 {
        self.guess
            + (1.0 - self.guess - self.lapse)
                / (1.0 + (-self.slope * (x - self.threshold)).exp())
    }
}

/// Fitting options. The guess rate defaults to chance in the
/// same-different design; an overdispersion correlation switches the
/// likelihood to beta-binomial for parameter estimation.
#[derive(Debug, Clone, Copy)]
pub struct PsychometricOptions {
    pub guess: f64,
    pub max_lapse: f64,
    /// Beta-binomial intra-cluster correlation in (0, 1); `None` keeps the
    /// plain binomial likelihood.
    pub overdispersion: Option<f64>,
}

impl Default for PsychometricOptions {
    fn default() -> Self {
        Self {
            guess: 0.5,
            max_lapse: 0.1,
            overdispersion: None,
        }
    }
}

const P_EPS: f64 = 1e-10;

fn binomial_ll(p: f64, k: f64, n: f64) -> f64 {
    let p = p.clamp(P_EPS, 1.0 - P_EPS);
    k * p.ln() + (n - k) * (1.0 - p).ln()
}

fn beta_binomial_ll(p: f64, k: f64, n: f64, rho: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let p = p.clamp(P_EPS, 1.0 - P_EPS);
    // rho = 1 / (alpha + beta + 1)
    let nu = (1.0 - rho) / rho;
    let alpha = p * nu;
    let beta = (1.0 - p) * nu;
    ln_gamma(k + alpha) + ln_gamma(n - k + beta) - ln_gamma(n + alpha + beta)
        + ln_gamma(alpha + beta)
        - ln_gamma(alpha)
        - ln_gamma(beta)
}

/// Maximum-likelihood psychometric fit over `(level, n_correct, n_total)`
/// triples. Deterministic: a coarse multi-start grid feeds a Nelder-Mead
/// refinement with fixed geometry.
pub fn fit_psychometric(
    levels: &[f64],
    n_correct: &[u32],
    n_total: &[u32],
    options: &PsychometricOptions,
) -> Result<PsychometricFit> {
    if levels.len() != n_correct.len() || levels.len() != n_total.len() {
        return Err(Error::InvalidArgument("mismatched input lengths".into()));
    }
    if levels.len() < 3 {
        return Err(Error::InsufficientData("need at least 3 levels".into()));
    }
    let mut distinct = levels.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup_by(|a, b| (*a - *b).abs() < f64::EPSILON);
    if distinct.len() < 3 {
        return Err(Error::Fit("need at least 3 distinct levels".into()));
    }
    for (i, (&k, &n)) in n_correct.iter().zip(n_total).enumerate() {
        if n == 0 || k > n {
            return Err(Error::InvalidArgument(format!(
                "bad counts at level index {i}"
            )));
        }
    }
    let guess = options.guess;
    let max_lapse = options.max_lapse;
    let lo = distinct[0];
    let hi = distinct[distinct.len() - 1];
    let span = (hi - lo).max(f64::MIN_POSITIVE);

    let ll_of = |threshold: f64, slope: f64, lapse: f64| -> f64 {
        let mut ll = 0.0;
        for ((&x, &k), &n) in levels.iter().zip(n_correct).zip(n_total) {
            let p = guess + (1.0 - guess - lapse) / (1.0 + (-slope * (x - threshold)).exp());
            ll += match options.overdispersion {
                None => binomial_ll(p, k as f64, n as f64),
                Some(rho) => beta_binomial_ll(p, k as f64, n as f64, rho),
            };
        }
        ll
    };

    // Multi-start grid in (threshold, log slope, lapse).
    let mut best = (f64::NEG_INFINITY, lo, 1.0 / span, 0.0);
    for ti in 0..21 {
        let threshold = lo + span * ti as f64 / 20.0;
        for si in -4..=6 {
            let slope = (2f64).powi(si) / span;
            for lapse in [0.0, 0.25 * max_lapse, 0.5 * max_lapse, max_lapse] {
                let ll = ll_of(threshold, slope, lapse);
                if ll > best.0 {
                    best = (ll, threshold, slope, lapse);
                }
            }
        }
    }

    // Nelder-Mead on (threshold, ln slope, lapse), lapse clamped into its
    // box inside the objective.
    let objective = |v: &[f64; 3]| -> f64 {
        let lapse = v[2].clamp(0.0, max_lapse);
        -ll_of(v[0], v[1].exp(), lapse)
    };
    let start = [best.1, best.2.ln(), best.3];
    let steps = [0.1 * span, 0.5, 0.25 * max_lapse.max(1e-3)];
    let solution = nelder_mead(objective, start, steps, 4000, 1e-13);
    let threshold = solution[0];
    let slope = solution[1].exp();
    let lapse = solution[2].clamp(0.0, max_lapse);
    if !threshold.is_finite() || !slope.is_finite() || slope <= 0.0 {
        return Err(Error::Fit("optimizer produced a degenerate curve".into()));
    }

    // Deviance against the saturated binomial model.
    let mut ll_model = 0.0;
    let mut ll_sat = 0.0;
    for ((&x, &k), &n) in levels.iter().zip(n_correct).zip(n_total) {
        let p = guess + (1.0 - guess - lapse) / (1.0 + (-slope * (x - threshold)).exp());
        let (k, n) = (k as f64, n as f64);
        ll_model += binomial_ll(p, k, n);
        ll_sat += binomial_ll(k / n, k, n);
    }
    let deviance = (2.0 * (ll_sat - ll_model)).max(0.0);
    Ok(PsychometricFit {
        threshold,
        slope,
        lapse,
        guess,
        deviance,
    })
}

/// Plain Nelder-Mead in 3 dimensions with fixed deterministic geometry.
fn nelder_mead<F: Fn(&[f64; 3]) -> f64>(
    f: F,
    start: [f64; 3],
    steps: [f64; 3],
    max_iter: usize,
    tol: f64,
) -> [f64; 3] {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    let mut simplex: Vec<[f64; 3]> = vec![start];
    for i in 0..3 {
        let mut v = start;
        v[i] += steps[i].max(1e-9);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(&f).collect();
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let sorted: Vec<[f64; 3]> = order.iter().map(|&i| simplex[i]).collect();
        let sorted_vals: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = sorted;
        values = sorted_vals;
        if (values[3] - values[0]).abs() < tol {
            break;
        }
        let mut centroid = [0.0; 3];
        for v in &simplex[..3] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / 3.0;
            }
        }
        let reflect = |scale: f64| -> [f64; 3] {
            let mut out = [0.0; 3];
            for i in 0..3 {
                out[i] = centroid[i] + scale * (centroid[i] - simplex[3][i]);
            }
            out
        };
        let xr = reflect(ALPHA);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = reflect(GAMMA);
            let fe = f(&xe);
            if fe < fr {
                simplex[3] = xe;
                values[3] = fe;
            } else {
                simplex[3] = xr;
                values[3] = fr;
            }
        } else if fr < values[2] {
            simplex[3] = xr;
            values[3] = fr;
        } else {
            let xc = reflect(-RHO);
            let fc = f(&xc);
            if fc < values[3] {
                simplex[3] = xc;
                values[3] = fc;
            } else {
                let (best, rest) = simplex.split_at_mut(1);
                for (vertex, value) in rest.iter_mut().zip(values[1..].iter_mut()) {
                    for (x, &b) in vertex.iter_mut().zip(&best[0]) {
                        *x = b + SIGMA * (*x - b);
                    }
                    *value = f(vertex);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..4 {
        if values[i] < values[best] {
            best = i;
        }
    }
    simplex[best]
}
