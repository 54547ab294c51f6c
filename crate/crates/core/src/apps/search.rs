use crate::error::{Error, Result};
use crate::filters::{profil, DistributionOracle, FilterOptions, FilterOutcome};
use serde::Serialize;
use std::cell::RefCell;
use std::collections::BTreeMap;

/// One filter call on the sampled search path.
#[derive(Clone, Debug, Serialize)]
pub struct SearchStep {
    pub tau: f64,
    pub flag: bool,
    pub witness: Option<u64>,
    pub flag_prob: f64,
}

/// Depth of a binary search over `grid` thresholds.
pub fn search_rounds(grid: usize) -> usize {
    (grid.max(2) as f64).log2().ceil() as usize
}

type Call<'a> = dyn FnMut(f64, f64, f64, FilterOptions) -> Result<FilterOutcome> + 'a;

/// Value of a search-tree leaf from its final bracket and the last witness law.
pub type LeafWeight<'a> = dyn Fn(f64, f64, Option<&[f64]>) -> f64 + 'a;

pub(crate) struct SearchResult<'a> {
    step: f64,
    grid: usize,
    pub per_call_delta: f64,
    pub lower_tau: f64,
    pub witness: Option<u64>,
    pub steps: Vec<SearchStep>,
    outcomes: RefCell<BTreeMap<usize, FilterOutcome>>,
    call: RefCell<Box<Call<'a>>>,
    opts: FilterOptions,
}

impl SearchResult<'_> {
    fn tau(&self, j: usize) -> f64 {
        (j as f64 * self.step).min(1.0)
    }

    fn outcome(&self, j: usize) -> Result<FilterOutcome> {
        if let Some(o) = self.outcomes.borrow().get(&j) {
            return Ok(o.clone());
        }
        let opts = FilterOptions { seed: self.opts.seed.wrapping_add(j as u64), ..self.opts };
        let o = (self.call.borrow_mut())(self.tau(j), self.step, self.per_call_delta, opts)?;
        self.outcomes.borrow_mut().insert(j, o.clone());
        Ok(o)
    }

    /// Exact probability, over every branch of the search, that the leaf
    /// passes `ok(lower τ, upper τ, witness distribution of the last yes)`.
    pub fn exact_success(&self, ok: impl Fn(f64, f64, Option<&[f64]>) -> bool) -> Result<f64> {
        self.exact_weighted(&|lo, hi, w| if ok(lo, hi, w) { 1.0 } else { 0.0 })
    }

    pub fn exact_weighted(&self, leaf: &LeafWeight<'_>) -> Result<f64> {
        self.explore(1, self.grid + 1, None, leaf)
    }

    fn explore(
        &self,
        lo: usize,
        hi: usize,
        last_yes: Option<usize>,
        leaf: &LeafWeight<'_>,
    ) -> Result<f64> {
        if hi - lo <= 1 {
            let w = match last_yes {
                Some(j) => Some(self.outcome(j)?.amplify.witness_distribution),
                None => None,
            };
            return Ok(leaf(self.tau(lo), self.tau(lo) + self.step, w.as_deref()));
        }
        let mid = (lo + hi) / 2;
        let p = self.outcome(mid)?.amplify.final_flag_prob;
        let yes = if p > 0.0 { p * self.explore(mid, hi, Some(mid), leaf)? } else { 0.0 };
        let no = if p < 1.0 { (1.0 - p) * self.explore(lo, mid, last_yes, leaf)? } else { 0.0 };
        Ok(yes + no)
    }
}

/// Binary search over thresholds τ_j = j·step, j = 2..=⌊1/step⌋, calling a
/// filter with ε = step. τ_1 counts as an implicit yes (its lower bound is 0)
/// and τ beyond 1 as an implicit no. A yes at τ shows the score is at least
/// τ − step, a no shows it is below τ, so the final τ_lo is within one step.
pub(crate) fn threshold_search<'a>(
    step: f64,
    delta: f64,
    opts: FilterOptions,
    call: impl FnMut(f64, f64, f64, FilterOptions) -> Result<FilterOutcome> + 'a,
) -> Result<SearchResult<'a>> {
    if !(step > 0.0 && step < 0.5) {
        return Err(Error::InvalidParameter(format!("search step must lie in (0, ½), got {step}")));
    }
    let grid = (1.0 / step + 1e-9).floor() as usize;
    let per_call_delta = delta / search_rounds(grid) as f64;
    let mut result = SearchResult {
        step,
        grid,
        per_call_delta,
        lower_tau: 0.0,
        witness: None,
        steps: Vec::new(),
        outcomes: RefCell::new(BTreeMap::new()),
        call: RefCell::new(Box::new(call)),
        opts,
    };
    let (mut lo, mut hi) = (1usize, grid + 1);
    let mut witness = None;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let o = result.outcome(mid)?;
        result.steps.push(SearchStep {
            tau: result.tau(mid),
            flag: o.flag,
            witness: o.witness,
            flag_prob: o.amplify.final_flag_prob,
        });
        if o.flag {
            lo = mid;
            witness = o.witness;
        } else {
            hi = mid;
        }
    }
    result.lower_tau = result.tau(lo);
    result.witness = witness;
    Ok(result)
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeOutcome {
    pub mode: Option<u64>,
    /// Estimate of the largest probability, within g/2.
    pub probability_estimate: f64,
    pub true_mode: u64,
    /// Pr[returned mode is the true mode] over the whole search tree.
    pub exact_success_prob: f64,
    pub per_call_delta: f64,
    pub steps: Vec<SearchStep>,
}

/// Finds the most likely outcome when it leads the runner-up by at least g,
/// searching thresholds of step g/2 with probability filters at ε = g/2.
pub fn mode_search(od: &DistributionOracle, gap: f64, delta: f64, opts: FilterOptions) -> Result<ModeOutcome> {
    if !(gap > 0.0 && gap <= 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter("need g ∈ (0, 1] and δ ∈ (0, 1)".into()));
    }
    let probs = od.exact_probs().to_vec();
    let true_mode = (0..probs.len()).max_by(|&a, &b| probs[a].total_cmp(&probs[b])).unwrap_or(0) as u64;
    let result = threshold_search(gap / 2.0, delta, opts, |tau, eps, d, o| profil(od, tau, eps, d, o))?;
    let exact_success_prob =
        result.exact_weighted(&|_, _, w| w.and_then(|w| w.get(true_mode as usize).copied()).unwrap_or(0.0))?;
    Ok(ModeOutcome {
        mode: result.witness,
        probability_estimate: result.lower_tau,
        true_mode,
        exact_success_prob,
        per_call_delta: result.per_call_delta,
        steps: result.steps.clone(),
    })
}
