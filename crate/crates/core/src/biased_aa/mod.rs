//! Amplitude amplification driven by a bounded-error marking oracle.
//!
//! Â prepares A|0⟩, evaluates k independent copies of the oracle and writes
//! their majority into a flag qubit; fixed-point amplification then drives
//! the flag towards 1 whenever some input is good with weight ≥ λ.
//!
//! Two exact backends compute the same outcome. The statevector backend
//! builds every copy. The factored backend simulates a single copy, combines
//! copies through the binomial law of the majority (copies act on disjoint
//! ancillas and share only the read-only input) and runs the amplification in
//! its two-dimensional invariant subspace. Only the factored backend scales
//! to the copy counts the strict error budget demands.

mod fpaa;
mod majority;

pub use fpaa::{chebyshev, fpaa_statevector, iteration_cap, FpaaSchedule, FPAA_CONSTANT};
pub use majority::{choose_k, majority_probability, BiasedAAParams};

use crate::error::{Error, Result};
use crate::gadgets::CondMajority;
use crate::sim::{
    sample_index, Controls, CountedOracle, Gate, Ledger, LedgerSnapshot, Op, Register, RegisterLayout, Sequence,
    StateVector, Unitary,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A unitary that writes into a flag qubit a bit that equals the goodness of
/// the basis input with probability at least p > ½.
pub trait MarkingOracle: Send + Sync {
    fn label(&self) -> String;
    fn input_width(&self) -> usize;
    /// Qubits besides the input, flag included.
    fn ancilla_width(&self) -> usize;
    /// Position of the flag inside the ancilla block.
    fn flag_index(&self) -> usize;
    /// The oracle bound to an input register and an ancilla block. Each
    /// application charges [`MarkingOracle::ledger`].
    fn place(&self, input: &Register, ancilla: &Register) -> Result<Op>;
    fn ledger(&self) -> Arc<Ledger>;
    /// Ledgers of oracles called inside one application, by label.
    fn inner_ledgers(&self) -> Vec<(String, Arc<Ledger>)> {
        Vec::new()
    }
    /// Inner calls made by one application.
    fn inner_calls_per_application(&self) -> Result<Vec<(String, LedgerSnapshot)>> {
        Ok(Vec::new())
    }
    /// Pr[flag = 1 | input x] for every basis input, from one simulated copy.
    fn flag_probabilities(&self) -> Result<Vec<f64>> {
        reference_flag_probabilities(self)
    }
}

/// Flag probabilities read from a statevector of one placed copy with the
/// input in uniform superposition.
pub fn reference_flag_probabilities<O: MarkingOracle + ?Sized>(oracle: &O) -> Result<Vec<f64>> {
    let mut layout = RegisterLayout::new();
    let input = layout.push("input", oracle.input_width())?;
    let anc = layout.push("ancilla", oracle.ancilla_width())?;
    let flag = Register::new("flag", anc.offset + oracle.flag_index(), 1);
    let mut s = StateVector::new(layout.width())?;
    for q in 0..input.width {
        Gate::h(input.qubit(q)).apply(&mut s, Controls::NONE)?;
    }
    oracle.place(&input, &anc)?.apply(&mut s, Controls::NONE)?;
    conditional_flag(&s, &input, &flag)
}

pub(crate) fn conditional_flag(s: &StateVector, input: &Register, flag: &Register) -> Result<Vec<f64>> {
    Ok(s
        .joint_distribution(input, flag)?
        .into_iter()
        .map(|row| {
            let t = row[0] + row[1];
            if t > 0.0 {
                (row[1] / t).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect())
}

/// Synthetic oracle whose flag reads 1 with probability `p` on good inputs
/// and `1 − p` on bad ones, via controlled Y rotations.
#[derive(Clone)]
pub struct BiasedOracle {
    n: usize,
    goodness: Vec<bool>,
    one_probs: Vec<f64>,
    p: f64,
    ledger: Arc<Ledger>,
}

impl BiasedOracle {
    pub fn new(n: usize, goodness: Vec<bool>, p: f64) -> Result<Self> {
        if goodness.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, actual: goodness.len() });
        }
        if !(p > 0.5 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!("correctness must exceed 1/2, got {p}")));
        }
        let one_probs = goodness.iter().map(|&g| if g { p } else { 1.0 - p }).collect();
        Ok(BiasedOracle { n, goodness, one_probs, p, ledger: Ledger::new() })
    }

    /// Arbitrary per-input flag probabilities, for tests of the combination rule.
    pub fn with_probabilities(n: usize, one_probs: Vec<f64>) -> Result<Self> {
        if one_probs.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, actual: one_probs.len() });
        }
        let goodness = one_probs.iter().map(|&q| q > 0.5).collect();
        let p = one_probs.iter().map(|&q| q.max(1.0 - q)).fold(1.0, f64::min);
        Ok(BiasedOracle { n, goodness, one_probs, p, ledger: Ledger::new() })
    }

    pub fn goodness(&self) -> &[bool] {
        &self.goodness
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl MarkingOracle for BiasedOracle {
    fn label(&self) -> String {
        "biased-oracle".into()
    }
    fn input_width(&self) -> usize {
        self.n
    }
    fn ancilla_width(&self) -> usize {
        1
    }
    fn flag_index(&self) -> usize {
        0
    }
    fn place(&self, input: &Register, ancilla: &Register) -> Result<Op> {
        if input.width != self.n || ancilla.width != 1 {
            return Err(Error::RegisterMismatch("biased oracle placement".into()));
        }
        let members: Vec<Op> = self
            .one_probs
            .iter()
            .map(|&q| Arc::new(Gate::ry(ancilla.offset, 2.0 * q.sqrt().asin())) as Op)
            .collect();
        let op = crate::sim::BranchControlled::new(input.clone(), members)?;
        Ok(Arc::new(CountedOracle::with_ledger("biased-oracle", Arc::new(op), self.ledger.clone())))
    }
    fn ledger(&self) -> Arc<Ledger> {
        self.ledger.clone()
    }
}

/// How many oracle copies feed the majority.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KMode {
    /// k chosen so that the majority errs with probability at most λ⁴δ².
    Strict,
    /// Caller-supplied k; the achieved error is reported, not guaranteed.
    Relaxed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AmplifyBackend {
    /// Statevector when every copy fits in [`AUTO_STATEVECTOR_WIDTH`] qubits, factored otherwise.
    Auto,
    Statevector,
    Factored,
}

/// Widest full construction that `Auto` will simulate.
pub const AUTO_STATEVECTOR_WIDTH: usize = 20;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AmplifyConfig {
    pub lambda: f64,
    pub delta: f64,
    /// Correctness guaranteed by the oracle.
    pub p: f64,
    pub k_mode: KMode,
    pub backend: AmplifyBackend,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Witness(u64),
    NoSolution,
}

/// Reference classification of an input, used only for analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Goodness {
    Good,
    Bad,
    /// Inside a promise gap; either answer is acceptable for it.
    Unconstrained,
}

#[derive(Clone, Debug, Serialize)]
pub struct AmplifyOutcome {
    pub verdict: Verdict,
    pub k: usize,
    pub delta_prime: f64,
    pub schedule: FpaaSchedule,
    pub backend: AmplifyBackend,
    /// Width the full construction needs, whether or not it was built.
    pub logical_qubits: usize,
    /// Weight of each input under A.
    pub input_weights: Vec<f64>,
    /// Single-copy Pr[flag = 1 | x].
    pub flag_probabilities: Vec<f64>,
    /// Pr[majority = 1 | x].
    pub majority_probabilities: Vec<f64>,
    pub initial_flag_prob: f64,
    pub final_flag_prob: f64,
    /// Pr[x | flag = 1] after amplification.
    pub witness_distribution: Vec<f64>,
    pub flag_correct_prob: Option<f64>,
    pub witness_good_given_flag: Option<f64>,
    pub exact_success_prob: Option<f64>,
    /// Oracle calls by label.
    pub calls: BTreeMap<String, u64>,
}

impl AmplifyOutcome {
    /// Success after repeating until a classical verifier accepts, `rounds` times at most.
    pub fn boosted_success(&self, rounds: u32) -> Option<f64> {
        self.exact_success_prob.map(|s| 1.0 - (1.0 - s).powi(rounds as i32))
    }
}

/// Verifier repetitions ⌈log₂(1/δ)/2⌉ that lift a 3/4 witness guarantee to 1 − δ.
pub fn verifier_rounds(delta: f64) -> u32 {
    ((1.0 / delta).log2() / 2.0).ceil().max(1.0) as u32
}

struct Exact {
    initial: f64,
    final_p: f64,
    witness: Vec<f64>,
    majority: Vec<f64>,
}

fn input_register_of(a: &CountedOracle, input_width: usize) -> Result<Register> {
    if input_width > a.width() {
        return Err(Error::RegisterMismatch(format!(
            "oracle input of {input_width} qubits exceeds the {}-qubit preparation",
            a.width()
        )));
    }
    Register::new("prep", 0, a.width()).prefix(input_width)
}

fn input_weights(a: &CountedOracle, input: &Register) -> Result<Vec<f64>> {
    let mut s = StateVector::new(a.width())?;
    a.at(0).map(|o| o.fresh()).unwrap_or_else(|_| a.fresh()).apply(&mut s, Controls::NONE)?;
    s.outcome_distribution(input)
}

fn factored(weights: &[f64], flags: &[f64], k: usize, schedule: &FpaaSchedule) -> Exact {
    let majority: Vec<f64> = flags.iter().map(|&f| majority_probability(k, f)).collect();
    let initial: f64 = weights.iter().zip(&majority).map(|(w, m)| w * m).sum::<f64>().clamp(0.0, 1.0);
    let final_p = schedule.evolve_2d(initial).clamp(0.0, 1.0);
    let witness = if initial > 0.0 {
        weights.iter().zip(&majority).map(|(w, m)| w * m / initial).collect()
    } else {
        vec![0.0; weights.len()]
    };
    Exact { initial, final_p, witness, majority }
}

fn statevector_run(
    a: &CountedOracle,
    oracle: &dyn MarkingOracle,
    k: usize,
    schedule: &FpaaSchedule,
) -> Result<(Exact, StateVector)> {
    let mut layout = RegisterLayout::new();
    let prep_reg = layout.push("prep", a.width())?;
    let input = prep_reg.prefix(oracle.input_width())?;
    let copies: Vec<Register> = (0..k)
        .map(|i| layout.push(&format!("copy{i}"), oracle.ancilla_width()))
        .collect::<Result<_>>()?;
    let maj = layout.push("majority", 1)?;
    crate::sim::check_width(layout.width())?;
    let mut seq = Sequence::new();
    seq.push(a.at(prep_reg.offset)?);
    for c in &copies {
        seq.push_op(oracle.place(&input, c)?);
    }
    let flags: Vec<usize> = copies.iter().map(|c| c.offset + oracle.flag_index()).collect();
    seq.push(CondMajority::new(Some(input.clone()), flags, maj.offset)?);
    let mut s = StateVector::new(layout.width())?;
    seq.apply(&mut s, Controls::NONE)?;
    let initial = s.marginal_probability(&maj, 1)?;
    let joint0 = s.joint_distribution(&input, &maj)?;
    let majority = joint0
        .iter()
        .map(|r| if r[0] + r[1] > 0.0 { r[1] / (r[0] + r[1]) } else { 0.0 })
        .collect();
    fpaa_statevector(&mut s, &seq, maj.offset, schedule)?;
    let final_p = s.marginal_probability(&maj, 1)?;
    let joint = s.joint_distribution(&input, &maj)?;
    let witness = joint.iter().map(|r| if final_p > 0.0 { r[1] / final_p } else { 0.0 }).collect();
    Ok((Exact { initial, final_p, witness, majority }, s))
}

/// Amplifies the good inputs of A|0⟩ as judged by a bounded-error oracle and
/// reports a sampled verdict together with its exact law.
///
/// The oracle reads the top `oracle.input_width()` qubits of A's register.
pub fn errored_amplify(
    a: &CountedOracle,
    oracle: &dyn MarkingOracle,
    config: AmplifyConfig,
    goodness: Option<&[Goodness]>,
) -> Result<AmplifyOutcome> {
    let AmplifyConfig { lambda, delta, p, k_mode, backend, seed } = config;
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!("λ must lie in (0, 1], got {lambda}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("δ must lie in (0, 1), got {delta}")));
    }
    if !(p > 0.5 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("oracle correctness must exceed 1/2, got {p}")));
    }
    let delta_prime = lambda.powi(4) * delta * delta;
    let k = match k_mode {
        KMode::Strict => choose_k(p, delta_prime)?,
        KMode::Relaxed(k) if k % 2 == 1 => k,
        KMode::Relaxed(k) => return Err(Error::InvalidParameter(format!("copy count must be odd, got {k}"))),
    };
    let schedule = FpaaSchedule::new((lambda * (1.0 - delta_prime)).max(f64::MIN_POSITIVE), delta / 2.0)?;
    let input = input_register_of(a, oracle.input_width())?;
    let logical_qubits = a.width() + k * oracle.ancilla_width() + 1;
    let backend = match backend {
        AmplifyBackend::Auto if logical_qubits <= AUTO_STATEVECTOR_WIDTH => AmplifyBackend::Statevector,
        AmplifyBackend::Auto => AmplifyBackend::Factored,
        b => b,
    };
    if let Some(g) = goodness {
        if g.len() != input.dim() {
            return Err(Error::DimensionMismatch { expected: input.dim(), actual: g.len() });
        }
    }
    let weights = input_weights(a, &input)?;
    let flags = oracle.flag_probabilities()?;
    let applications = 1 + 2 * schedule.iterations as u64;
    let mut calls = BTreeMap::new();
    let exact = match backend {
        AmplifyBackend::Statevector => {
            let before_a = a.snapshot();
            let before_o = oracle.ledger().snapshot();
            let inner_before: Vec<(String, LedgerSnapshot)> =
                oracle.inner_ledgers().into_iter().map(|(l, g)| (l, g.snapshot())).collect();
            let (exact, _) = statevector_run(a, oracle, k, &schedule)?;
            *calls.entry(a.label().to_string()).or_insert(0) += a.snapshot().since(&before_a).total();
            *calls.entry(oracle.label()).or_insert(0) += oracle.ledger().snapshot().since(&before_o).total();
            for ((label, led), (_, b)) in oracle.inner_ledgers().into_iter().zip(inner_before) {
                *calls.entry(label).or_insert(0) += led.snapshot().since(&b).total();
            }
            exact
        }
        _ => {
            *calls.entry(a.label().to_string()).or_insert(0) += applications;
            *calls.entry(oracle.label()).or_insert(0) += applications * k as u64;
            for (label, per) in oracle.inner_calls_per_application()? {
                *calls.entry(label).or_insert(0) += applications * k as u64 * per.total();
            }
            factored(&weights, &flags, k, &schedule)
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verdict = if rng.gen::<f64>() < exact.final_p {
        Verdict::Witness(sample_index(&exact.witness, &mut rng) as u64)
    } else {
        Verdict::NoSolution
    };

    let (flag_correct_prob, witness_good_given_flag, exact_success_prob) = match goodness {
        None => (None, None, None),
        Some(g) => {
            let any_good = g.contains(&Goodness::Good);
            let mass = |kind: Goodness| -> f64 {
                g.iter().zip(&exact.witness).filter(|(c, _)| **c == kind).map(|(_, w)| w).sum()
            };
            if any_good {
                let good = mass(Goodness::Good);
                (Some(exact.final_p), Some(good), Some(exact.final_p * good))
            } else {
                let free = mass(Goodness::Unconstrained);
                let no = 1.0 - exact.final_p;
                (Some(no), None, Some(no + exact.final_p * free))
            }
        }
    };

    Ok(AmplifyOutcome {
        verdict,
        k,
        delta_prime,
        schedule,
        backend,
        logical_qubits,
        input_weights: weights,
        flag_probabilities: flags,
        majority_probabilities: exact.majority,
        initial_flag_prob: exact.initial,
        final_flag_prob: exact.final_p,
        witness_distribution: exact.witness,
        flag_correct_prob,
        witness_good_given_flag,
        exact_success_prob,
        calls,
    })
}

/// Â as a standalone circuit for inspection: A, k placed copies, majority.
pub fn biased_prep_circuit(a: &CountedOracle, oracle: &dyn MarkingOracle, k: usize) -> Result<(Sequence, RegisterLayout)> {
    let mut layout = RegisterLayout::new();
    let prep_reg = layout.push("prep", a.width())?;
    let input = prep_reg.prefix(oracle.input_width())?;
    let mut seq = Sequence::new();
    seq.push(a.at(prep_reg.offset)?);
    let mut flags = Vec::with_capacity(k);
    for i in 0..k {
        let c = layout.push(&format!("copy{i}"), oracle.ancilla_width())?;
        seq.push_op(oracle.place(&input, &c)?);
        flags.push(c.offset + oracle.flag_index());
    }
    let maj = layout.push("majority", 1)?;
    seq.push(CondMajority::new(Some(input), flags, maj.offset)?);
    Ok((seq, layout))
}
