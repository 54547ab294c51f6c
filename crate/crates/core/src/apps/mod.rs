//! Applications of the filters: k-distinctness, mode finding and the
//! non-linearity of Boolean functions.

mod boolean;
mod search;

pub use boolean::{dj_prep, nonlinearity, walsh_spectrum, BooleanFunction, NonlinOutcome};
pub use search::{mode_search, search_rounds, ModeOutcome, SearchStep};

use crate::biased_aa::{errored_amplify, AmplifyConfig, Goodness};
use crate::error::{Error, Result};
use crate::filters::{
    make_filter_params, DistributionOracle, FilterKind, FilterOptions, ProbFilOracle, SINGLE_COPY_CORRECTNESS,
};
use crate::sim::{Controls, Gate, Involution, Op, Register, Relocatable, Sequence, StatePrep, Unitary, C64};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

/// An array of n values drawn from an alphabet of size m.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputArray {
    pub values: Vec<u64>,
    pub alphabet: u64,
}

impl InputArray {
    pub fn new(values: Vec<u64>, alphabet: u64) -> Result<Self> {
        if values.is_empty() || alphabet == 0 {
            return Err(Error::InvalidParameter("array and alphabet must be nonempty".into()));
        }
        if let Some(v) = values.iter().find(|&&v| v >= alphabet) {
            return Err(Error::InvalidParameter(format!("value {v} outside alphabet of size {alphabet}")));
        }
        Ok(InputArray { values, alphabet })
    }

    /// Alphabet inferred as the smallest power of two above every value.
    pub fn from_values(values: Vec<u64>) -> Result<Self> {
        let max = values.iter().copied().max().unwrap_or(0);
        Self::new(values, (max + 1).next_power_of_two().max(2))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Padding {
    /// Sizes must be powers of two.
    Strict,
    /// Round the index and value registers up; padded indices get zero weight.
    Pad,
}

fn bits_for(n: u64) -> usize {
    (n.max(1).next_power_of_two().trailing_zeros()) as usize
}

/// (1/√n) Σ_i |A_i⟩|i⟩: uniform index register in the low qubits, the value
/// A_i XORed into the outcome qubits above it.
pub fn array_to_oracle(array: &InputArray, padding: Padding) -> Result<DistributionOracle> {
    let n = array.len();
    if padding == Padding::Strict && (!n.is_power_of_two() || !array.alphabet.is_power_of_two()) {
        return Err(Error::InvalidParameter(format!(
            "array length {n} and alphabet {} must be powers of two without padding",
            array.alphabet
        )));
    }
    let a = bits_for(n as u64);
    let w = bits_for(array.alphabet).max(1);
    let values = Arc::new(array.values.clone());
    let source = Relocatable::new(a + w, move |off| {
        let index = Register::new("index", off, a);
        let out = Register::new("value", off + a, w);
        let mut seq = Sequence::new();
        if n.is_power_of_two() {
            for q in 0..a {
                seq.push(Gate::h(index.qubit(q)));
            }
        } else {
            let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
            let target: Vec<C64> = (0..1usize << a).map(|i| if i < n { amp } else { C64::new(0.0, 0.0) }).collect();
            seq.push(StatePrep::new(index.clone(), &target)?);
        }
        let vals = values.clone();
        let (idx, o) = (index.clone(), out.clone());
        seq.push(Involution::new(index.mask() | out.mask(), move |i| {
            let k = idx.extract(i) as usize;
            let v = vals.get(k).copied().unwrap_or(0);
            o.insert(i, o.extract(i) ^ v)
        }));
        Ok(Arc::new(seq) as Op)
    });
    DistributionOracle::new("array", w, a, source)
}

/// Classical frequency table.
pub fn brute_force_freq(array: &InputArray) -> BTreeMap<u64, usize> {
    let mut m = BTreeMap::new();
    for &v in &array.values {
        *m.entry(v).or_insert(0) += 1;
    }
    m
}

#[derive(Clone, Debug, Serialize)]
pub struct KDistOutcome {
    pub answer: bool,
    pub witness: Option<u64>,
    pub expected: bool,
    pub tau: f64,
    pub epsilon: f64,
    /// Pr[answer = expected].
    pub exact_correct_prob: f64,
    /// Pr[a reported witness occurs at least k times | answer = 1].
    pub witness_good_given_flag: Option<f64>,
    pub array_queries: u64,
}

/// Does some value occur at least k times? Probability filter with τ = k/n
/// and ε = 1/n, so arrays whose largest count is k − 1 sit on the lower gap
/// edge and must be rejected.
pub fn kdistinctness(array: &InputArray, k: usize, delta: f64, opts: FilterOptions) -> Result<KDistOutcome> {
    let n = array.len();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("need 1 ≤ k ≤ n = {n}, got {k}")));
    }
    let tau = k as f64 / n as f64;
    let epsilon = if k >= 2 { 1.0 / n as f64 } else { tau / 2.0 };
    let od = array_to_oracle(array, Padding::Pad)?;
    let freq = brute_force_freq(array);
    let goodness: Vec<Goodness> = (0..1u64 << od.outcome_width())
        .map(|v| if freq.get(&v).copied().unwrap_or(0) >= k { Goodness::Good } else { Goodness::Bad })
        .collect();
    let expected = goodness.contains(&Goodness::Good);
    let params = make_filter_params(tau, epsilon, FilterKind::Prob)?;
    let oracle = ProbFilOracle::new(&od, params)?;
    let config = AmplifyConfig {
        lambda: tau,
        delta,
        p: SINGLE_COPY_CORRECTNESS,
        k_mode: opts.k_mode,
        backend: opts.backend,
        seed: opts.seed,
    };
    let out = errored_amplify(od.oracle(), &oracle, config, Some(&goodness))?;
    let (answer, witness) = match out.verdict {
        crate::biased_aa::Verdict::Witness(x) => (true, Some(x)),
        crate::biased_aa::Verdict::NoSolution => (false, None),
    };
    Ok(KDistOutcome {
        answer,
        witness,
        expected,
        tau,
        epsilon,
        exact_correct_prob: out.flag_correct_prob.unwrap_or(0.0),
        witness_good_given_flag: out.witness_good_given_flag,
        array_queries: out.calls.get("array").copied().unwrap_or(0),
    })
}

/// Applies an op to |0⟩ and returns the amplitudes; test helper.
pub fn prepared_amplitudes(op: &dyn Unitary, width: usize) -> Result<Vec<C64>> {
    let mut s = crate::sim::StateVector::new(width)?;
    op.apply(&mut s, Controls::NONE)?;
    Ok(s.amplitudes().to_vec())
}
