//! Exact discrete probability helpers.

/// Distribution of the number of successes in `n` Bernoulli(p) trials,
/// computed by the trial-by-trial recurrence.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    pmf[0] = 1.0;
    for t in 1..=n {
        for j in (0..=t).rev() {
            let stay = if j < t { pmf[j] * (1.0 - p) } else { 0.0 };
            let up = if j > 0 { pmf[j - 1] * p } else { 0.0 };
            pmf[j] = stay + up;
        }
    }
    pmf
}

/// Pr[Bin(n, p) ≥ t].
pub fn binomial_tail_at_least(n: usize, t: usize, p: f64) -> f64 {
    if t == 0 {
        return 1.0;
    }
    if t > n {
        return 0.0;
    }
    binomial_pmf(n, p)[t..].iter().sum::<f64>().clamp(0.0, 1.0)
}

/// Exact distribution of the median of `r` (odd) i.i.d. draws from a
/// discrete distribution given as `(value, probability)` pairs.
pub fn median_distribution(support: &[(f64, f64)], r: usize) -> Vec<(f64, f64)> {
    debug_assert!(r % 2 == 1);
    let mut pts: Vec<(f64, f64)> = support.iter().copied().filter(|(_, p)| *p > 0.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (v, p) in pts {
        match merged.last_mut() {
            Some(last) if (last.0 - v).abs() <= 1e-12 => last.1 += p,
            _ => merged.push((v, p)),
        }
    }
    let half = r.div_ceil(2);
    let mut out = Vec::with_capacity(merged.len());
    let mut cdf = 0.0;
    let mut below = 0.0;
    for (v, p) in merged {
        cdf = (cdf + p).min(1.0);
        // The median is ≤ v iff at least (r+1)/2 draws are ≤ v.
        let at_most = binomial_tail_at_least(r, half, cdf);
        out.push((v, (at_most - below).max(0.0)));
        below = at_most;
    }
    out
}

/// Median of an odd-length sample.
pub fn median(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s[s.len() / 2]
}
