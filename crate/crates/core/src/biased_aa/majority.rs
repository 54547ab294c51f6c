use crate::error::{Error, Result};
use crate::stats::binomial_tail_at_least;
use serde::Serialize;

/// Smallest odd k ≥ 2p/(p − ½)² · ln(1/δ′): enough independent copies of a
/// p-correct flag for the majority to err with probability at most δ′.
pub fn choose_k(p: f64, delta_prime: f64) -> Result<usize> {
    if !(p > 0.5 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("flag correctness must exceed 1/2, got {p}")));
    }
    if !(delta_prime > 0.0 && delta_prime <= 1.0) {
        return Err(Error::InvalidParameter(format!("majority error must lie in (0, 1], got {delta_prime}")));
    }
    let bound = 2.0 * p / (p - 0.5).powi(2) * (1.0 / delta_prime).ln();
    let mut k = (bound - 1e-9).ceil().max(1.0) as usize;
    if k.is_multiple_of(2) {
        k += 1;
    }
    Ok(k)
}

/// Pr[majority of k copies reads 1] when each copy reads 1 with probability f.
pub fn majority_probability(k: usize, f: f64) -> f64 {
    binomial_tail_at_least(k, k.div_ceil(2), f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BiasedAAParams {
    pub k: usize,
    pub delta: f64,
    pub lambda: f64,
    pub delta_prime: f64,
}

impl BiasedAAParams {
    /// δ′ = λ⁴δ² and the matching strict copy count.
    pub fn strict(p: f64, lambda: f64, delta: f64) -> Result<Self> {
        let delta_prime = lambda.powi(4) * delta * delta;
        Ok(BiasedAAParams { k: choose_k(p, delta_prime)?, delta, lambda, delta_prime })
    }
}
