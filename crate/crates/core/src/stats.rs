//! The statistical battery used across the analysis pipelines:
//! Spearman rank correlation, Mann-Whitney U, Cohen's d, percentile
//! bootstrap intervals, seeded k-means, and cluster match rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Mid-ranks (average ranks for ties), 1-based.
fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidArgument(
            "zero variance makes the correlation undefined".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation: Pearson correlation of mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("length mismatch".into()));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 pairs".into()));
    }
    pearson(&mid_ranks(x), &mid_ranks(y))
}

/// Result of the Mann-Whitney U test. `u` belongs to the first sample, so
/// `U(a, b) + U(b, a) = n * m`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MannWhitney {
    pub u: f64,
    pub p_two_sided: f64,
    /// Whether the exact small-sample distribution was used.
    pub exact: bool,
}

/// Largest `n * m` handled by exact enumeration (tie-free data only);
/// beyond it the tie-corrected normal approximation applies.
pub const EXACT_U_LIMIT: usize = 64;

/// Two-sided Mann-Whitney U test.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("both samples must be non-empty".into()));
    }
    let n = a.len();
    let m = b.len();
    let mut pooled: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    let ranks = mid_ranks(&pooled);
    let r_a: f64 = ranks[..n].iter().sum();
    let u_a = r_a - (n * (n + 1)) as f64 / 2.0;
    let u_b = (n * m) as f64 - u_a;

    pooled.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let has_ties = pooled.windows(2).any(|w| w[0] == w[1]);

    if !has_ties && n * m <= EXACT_U_LIMIT {
        let u_min = u_a.min(u_b).floor() as usize;
        let p = (2.0 * exact_u_cdf(n, m, u_min)).min(1.0);
        return Ok(MannWhitney {
            u: u_a,
            p_two_sided: p,
            exact: true,
        });
    }

    let p = normal_u_p(&pooled, n, m, u_a);
    Ok(MannWhitney {
        u: u_a,
        p_two_sided: p,
        exact: false,
    })
}

/// P(U <= u) under the exact tie-free null, by the standard counting
/// recurrence over arrangements:
/// `c(u; n, m) = c(u - m; n - 1, m) + c(u; n, m - 1)`.
fn exact_u_cdf(n: usize, m: usize, u: usize) -> f64 {
    fn count(
        n: usize,
        m: usize,
        u: i64,
        memo: &mut std::collections::HashMap<(usize, usize, i64), f64>,
    ) -> f64 {
        if u < 0 {
            return 0.0;
        }
        if n == 0 || m == 0 {
            return if u == 0 { 1.0 } else { 0.0 };
        }
        if let Some(&v) = memo.get(&(n, m, u)) {
            return v;
        }
        let v = count(n - 1, m, u - m as i64, memo) + count(n, m - 1, u, memo);
        memo.insert((n, m, u), v);
        v
    }
    let max_u = n * m;
    let u = u.min(max_u);
    let mut memo = std::collections::HashMap::new();
    let mut cum = 0.0;
    for v in 0..=u {
        cum += count(n, m, v as i64, &mut memo);
    }
    let mut all = 0.0;
    for v in 0..=max_u {
        all += count(n, m, v as i64, &mut memo);
    }
    cum / all
}

/// Tie-corrected normal approximation with continuity correction.
fn normal_u_p(pooled_sorted: &[f64], n: usize, m: usize, u: f64) -> f64 {
    let big_n = (n + m) as f64;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled_sorted.len() {
        let mut j = i;
        while j + 1 < pooled_sorted.len() && pooled_sorted[j + 1] == pooled_sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let mu = (n * m) as f64 / 2.0;
    let var = (n * m) as f64 / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * (1.0 - normal.cdf(z))).clamp(0.0, 1.0)
}

/// Absolute Cohen's d with (n-1)-pooled standard deviation.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(
            "each sample needs at least 2 values".into(),
        ));
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let ss = |s: &[f64], m: f64| s.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    let ma = mean(a);
    let mb = mean(b);
    let pooled_var = (ss(a, ma) + ss(b, mb)) / (a.len() + b.len() - 2) as f64;
    if pooled_var <= 0.0 {
        return Err(Error::InvalidArgument(
            "zero pooled spread makes the effect size undefined".into(),
        ));
    }
    Ok((ma - mb).abs() / pooled_var.sqrt())
}

/// Default bootstrap iteration count.
pub const DEFAULT_BOOTSTRAP_ITERATIONS: usize = 1000;
/// Default confidence level.
pub const DEFAULT_CONFIDENCE_LEVEL: f64 = 0.95;

/// Percentile bootstrap confidence interval of `statistic` over seeded
/// resamples. Each iteration derives its own counter-based sub-seed, so
/// the interval does not depend on evaluation order.
pub fn bootstrap_ci<F: Fn(&[f64]) -> f64>(
    values: &[f64],
    statistic: F,
    iterations: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InsufficientData("no values to resample".into()));
    }
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be positive".into()));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidArgument(
            "confidence level must lie in (0,1)".into(),
        ));
    }
    let n = values.len();
    let mut stats = Vec::with_capacity(iterations);
    let mut resample = vec![0.0; n];
    for iter in 0..iterations {
        let sub_seed = seed ^ (iter as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
        for slot in resample.iter_mut() {
            *slot = values[rng.gen_range(0..n)];
        }
        stats.push(statistic(&resample));
    }
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - level) / 2.0;
    Ok((quantile(&stats, alpha), quantile(&stats, 1.0 - alpha)))
}

/// Linear-interpolated quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let idx = pos.floor() as usize;
    let frac = pos - idx as f64;
    if idx + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[idx] * (1.0 - frac) + sorted[idx + 1] * frac
    }
}

/// Output of [`kmeans`]: assignments, centroids, final SSE, and the SSE
/// after each Lloyd iteration (non-increasing).
#[derive(Debug, Clone, Serialize)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub sse: f64,
    pub iterations: usize,
    pub sse_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm from a seeded, distance-weighted initialization.
///
/// Deterministic per seed; assignment ties break toward the lowest
/// centroid index; empty clusters keep their previous centroid. Stops at
/// an assignment fixpoint or after `max_iter` sweeps.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<KMeansResult> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > points.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the {} points",
            points.len()
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidArgument("points differ in dimension".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..points.len())].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = 0;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
                chosen = i;
            }
            chosen
        } else {
            // Every point duplicates a centroid; take the lowest index not
            // already chosen.
            (0..points.len())
                .find(|i| !centroids.contains(&points[*i]))
                .unwrap_or(0)
        };
        centroids.push(points[next].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, centroids.last().unwrap()));
        }
    }

    // Sentinel assignments force a first full sweep; the loop stops once
    // an assignment pass repeats (a fixpoint: the centroids are already
    // the means of those assignments) or the iteration cap is hit.
    let mut assignments = vec![usize::MAX; points.len()];
    let mut sse_history = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iter.max(1) {
        iterations += 1;
        let mut changed = false;
        let mut sse = 0.0;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = sq_dist(p, &centroids[0]);
            for (c, centroid) in centroids.iter().enumerate().skip(1) {
                let d = sq_dist(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            sse += best_d;
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
        }
        sse_history.push(sse);
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, &x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for (dst, s) in centroids[c].iter_mut().zip(&sums[c]) {
                    *dst = s / counts[c] as f64;
                }
            }
        }
    }
    let sse = *sse_history.last().unwrap();
    Ok(KMeansResult {
        assignments,
        centroids,
        sse,
        iterations,
        sse_history,
    })
}

/// Largest label-set size matched by exhaustive permutation.
pub const MATCH_RATE_PERMUTATION_LIMIT: usize = 8;

/// Best agreement fraction between two labelings over all relabelings of
/// the second one. Exhaustive over permutations, so the label-set size is
/// capped at [`MATCH_RATE_PERMUTATION_LIMIT`].
pub fn match_rate(truth: &[usize], assignments: &[usize]) -> Result<f64> {
    if truth.len() != assignments.len() {
        return Err(Error::InvalidArgument("length mismatch".into()));
    }
    if truth.is_empty() {
        return Err(Error::InsufficientData("no labels".into()));
    }
    let relabel = |labels: &[usize]| -> (Vec<usize>, usize) {
        let mut seen: Vec<usize> = labels.to_vec();
        seen.sort_unstable();
        seen.dedup();
        let mapped = labels
            .iter()
            .map(|l| seen.binary_search(l).unwrap())
            .collect();
        (mapped, seen.len())
    };
    let (truth, k_truth) = relabel(truth);
    let (assign, k_assign) = relabel(assignments);
    let k = k_truth.max(k_assign);
    if k > MATCH_RATE_PERMUTATION_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "match rate supports at most {MATCH_RATE_PERMUTATION_LIMIT} labels, got {k}"
        )));
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0usize;
    permute(&mut perm, 0, &mut |p| {
        let agree = truth
            .iter()
            .zip(&assign)
            .filter(|&(&t, &a)| t == p[a])
            .count();
        best = best.max(agree);
    });
    Ok(best as f64 / truth.len() as f64)
}

fn permute(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// Coefficient of determination of predictions against observations;
/// negative when the predictions do worse than the observed mean.
pub fn r_squared(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    if observed.len() != predicted.len() {
        return Err(Error::InvalidArgument("length mismatch".into()));
    }
    if observed.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 points".into()));
    }
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let ss_tot: f64 = observed.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::InvalidArgument(
            "observations have zero spread".into(),
        ));
    }
    let ss_res: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(&y, &yhat)| (y - yhat) * (y - yhat))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}
