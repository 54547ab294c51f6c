//! Probability and amplitude filters: decide whether some outcome of a
//! distribution oracle has probability (or amplitude) at least τ, and return
//! one such outcome.

mod distribution;
mod oracles;
mod params;

pub use distribution::DistributionOracle;
pub use oracles::{AmpFilOracle, AmpMode, EqCalls, NormThresholdMark, ProbFilOracle};
pub use params::{
    apply_stage2, make_filter_params, preload_threshold, stage2_circuit, FilterKind, FilterParams, Stage2Registers,
    ThresholdMark,
};

use crate::biased_aa::{errored_amplify, AmplifyBackend, AmplifyConfig, AmplifyOutcome, Goodness, KMode, Verdict};
use crate::error::Result;
use serde::Serialize;
use std::f64::consts::PI;

/// Per-input correctness of a single filter copy.
pub const SINGLE_COPY_CORRECTNESS: f64 = 8.0 / (PI * PI);

/// Slack on exact-probability comparisons against τ.
const TRUTH_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FilterOptions {
    pub seed: u64,
    pub backend: AmplifyBackend,
    pub k_mode: KMode,
}

impl Default for FilterOptions {
    fn default() -> Self {
        FilterOptions { seed: 0, backend: AmplifyBackend::Factored, k_mode: KMode::Strict }
    }
}

/// Reference answer of a filter instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Truth {
    Yes,
    No,
    /// Some score lies in [τ − ε, τ) and none reaches τ.
    Gap,
}

#[derive(Clone, Debug, Serialize)]
pub struct FilterOutcome {
    pub flag: bool,
    pub witness: Option<u64>,
    pub truth: Truth,
    pub params: FilterParams,
    /// Pr[flag matches the truth]; for gap instances, Pr[flag = 0].
    pub flag_correct_prob: f64,
    pub witness_good_given_flag: Option<f64>,
    /// Pr[correct verdict, including a good witness when one exists].
    pub exact_success_prob: f64,
    pub amplify: AmplifyOutcome,
}

impl FilterOutcome {
    /// Total calls to the distribution oracle.
    pub fn distribution_queries(&self, label: &str) -> u64 {
        self.amplify.calls.get(label).copied().unwrap_or(0)
    }
}

/// Classifies scores against τ with a gap of ε below it.
pub fn classify(scores: &[f64], tau: f64, epsilon: f64) -> Vec<Goodness> {
    scores
        .iter()
        .map(|&s| {
            if s >= tau - TRUTH_TOLERANCE {
                Goodness::Good
            } else if s < tau - epsilon - TRUTH_TOLERANCE {
                Goodness::Bad
            } else {
                Goodness::Unconstrained
            }
        })
        .collect()
}

fn truth_of(goodness: &[Goodness]) -> Truth {
    if goodness.contains(&Goodness::Good) {
        Truth::Yes
    } else if goodness.iter().all(|g| *g == Goodness::Bad) {
        Truth::No
    } else {
        Truth::Gap
    }
}

fn finish(params: FilterParams, goodness: Vec<Goodness>, amplify: AmplifyOutcome) -> FilterOutcome {
    let truth = truth_of(&goodness);
    let (flag, witness) = match amplify.verdict {
        Verdict::Witness(x) => (true, Some(x)),
        Verdict::NoSolution => (false, None),
    };
    FilterOutcome {
        flag,
        witness,
        truth,
        params,
        flag_correct_prob: amplify.flag_correct_prob.unwrap_or(0.0),
        witness_good_given_flag: amplify.witness_good_given_flag,
        exact_success_prob: amplify.exact_success_prob.unwrap_or(0.0),
        amplify,
    }
}

/// Probability filter: is there an outcome x with p_x ≥ τ (versus all
/// p_x < τ − ε)?
pub fn profil(od: &DistributionOracle, tau: f64, epsilon: f64, delta: f64, opts: FilterOptions) -> Result<FilterOutcome> {
    let params = make_filter_params(tau, epsilon, FilterKind::Prob)?;
    let oracle = ProbFilOracle::new(od, params)?;
    let goodness = classify(od.exact_probs(), tau, epsilon);
    let config = AmplifyConfig {
        lambda: tau,
        delta,
        p: SINGLE_COPY_CORRECTNESS,
        k_mode: opts.k_mode,
        backend: opts.backend,
        seed: opts.seed,
    };
    let amplify = errored_amplify(od.oracle(), &oracle, config, Some(&goodness))?;
    Ok(finish(params, goodness, amplify))
}

/// Scores an amplitude filter thresholds, per outcome.
pub fn amplitude_scores(od: &DistributionOracle, mode: AmpMode) -> Vec<f64> {
    od.exact_amps()
        .iter()
        .map(|a| match mode {
            AmpMode::Real => a.re,
            AmpMode::Signed => a.re.abs(),
            AmpMode::Complex => a.norm(),
        })
        .collect()
}

/// Amplitude filter: is there an outcome whose amplitude score is at least τ
/// (versus all below τ − ε)? Amplitudes are ⟨x,0…0|O|0⟩, which coincide with
/// the outcome amplitudes when the oracle has no garbage qubits.
pub fn ampfil(
    od: &DistributionOracle,
    tau: f64,
    epsilon: f64,
    delta: f64,
    mode: AmpMode,
    opts: FilterOptions,
) -> Result<FilterOutcome> {
    let params = make_filter_params(tau, epsilon, FilterKind::Amp)?;
    let oracle = AmpFilOracle::new(od, params, mode)?;
    let goodness = classify(&amplitude_scores(od, mode), tau, epsilon);
    let config = AmplifyConfig {
        lambda: tau * tau,
        delta,
        p: SINGLE_COPY_CORRECTNESS,
        k_mode: opts.k_mode,
        backend: opts.backend,
        seed: opts.seed,
    };
    let amplify = errored_amplify(od.oracle(), &oracle, config, Some(&goodness))?;
    Ok(finish(params, goodness, amplify))
}
