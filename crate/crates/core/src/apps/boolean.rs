use super::search::{threshold_search, SearchStep};
use crate::error::{Error, Result};
use crate::filters::{ampfil, AmpMode, DistributionOracle, FilterOptions};
use crate::sim::{DiagonalPhase, Gate, Op, Relocatable, Sequence};
use serde::Serialize;
use std::str::FromStr;
use std::sync::Arc;

/// Truth table of f: {0,1}^n → {0,1}; entry z is f at the input whose binary
/// expansion, most significant bit first, is the first input variable first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BooleanFunction {
    n: usize,
    table: Vec<bool>,
}

impl BooleanFunction {
    pub fn new(table: Vec<bool>) -> Result<Self> {
        let len = table.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("truth table length {len} is not a power of two ≥ 2")));
        }
        Ok(BooleanFunction { n: len.trailing_zeros() as usize, table })
    }

    pub fn from_fn(n: usize, f: impl FnMut(u64) -> bool) -> Result<Self> {
        Self::new((0..1u64 << n).map(f).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, z: u64) -> bool {
        self.table[z as usize]
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }
}

impl FromStr for BooleanFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let table = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!("truth table character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        BooleanFunction::new(table)
    }
}

/// f̂(x) = 2^{-n} Σ_z (−1)^{f(z) ⊕ x·z}, by the fast Walsh–Hadamard transform.
pub fn walsh_spectrum(f: &BooleanFunction) -> Vec<f64> {
    let mut v: Vec<f64> = f.table.iter().map(|&b| if b { -1.0 } else { 1.0 }).collect();
    let len = v.len();
    let mut h = 1;
    while h < len {
        for i in (0..len).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
    v.iter().map(|x| x / len as f64).collect()
}

/// H^n · (−1)^{f} · H^n, whose amplitude on |x⟩ is f̂(x). Each application is
/// one query to f.
pub fn dj_prep(f: &BooleanFunction) -> Result<DistributionOracle> {
    let n = f.n;
    let table = Arc::new(f.table.clone());
    let source = Relocatable::new(n, move |off| {
        let mut seq = Sequence::new();
        for q in 0..n {
            seq.push(Gate::h(off + q));
        }
        let t = table.clone();
        let mask = ((1usize << n) - 1) << off;
        seq.push(DiagonalPhase::new(mask, move |i| {
            if t[(i & mask) >> off] {
                std::f64::consts::PI
            } else {
                0.0
            }
        }));
        for q in 0..n {
            seq.push(Gate::h(off + q));
        }
        Ok(Arc::new(seq) as Op)
    });
    DistributionOracle::new("boolean-function", n, 0, source)
}

#[derive(Clone, Debug, Serialize)]
pub struct NonlinOutcome {
    /// Estimated ½ − ½·max_x |f̂(x)|.
    pub estimate: f64,
    pub max_coefficient_estimate: f64,
    pub true_nonlinearity: f64,
    /// Pr[|estimate − true| ≤ λ] over the whole search tree.
    pub exact_success_prob: f64,
    pub per_call_delta: f64,
    pub steps: Vec<SearchStep>,
}

/// Estimates the distance of f from the nearest affine function within λ,
/// by searching a grid of thresholds of step λ with signed amplitude
/// filters over the Walsh-spectrum preparation.
pub fn nonlinearity(f: &BooleanFunction, lambda: f64, delta: f64, opts: FilterOptions) -> Result<NonlinOutcome> {
    if !(lambda > 0.0 && lambda < 0.5) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter("need λ ∈ (0, ½) and δ ∈ (0, 1)".into()));
    }
    let od = dj_prep(f)?;
    let fmax = walsh_spectrum(f).iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let truth = 0.5 - 0.5 * fmax;
    let result = threshold_search(lambda, delta, opts, |tau, eps, d, o| ampfil(&od, tau, eps, d, AmpMode::Signed, o))?;
    let exact_success_prob = result.exact_success(|lo_tau, _, _| ((0.5 - 0.5 * lo_tau) - truth).abs() <= lambda + 1e-12)?;
    let est_max = result.lower_tau;
    Ok(NonlinOutcome {
        estimate: 0.5 - 0.5 * est_max,
        max_coefficient_estimate: est_max,
        true_nonlinearity: truth,
        exact_success_prob,
        per_call_delta: result.per_call_delta,
        steps: result.steps.clone(),
    })
}
