use crate::error::{Error, Result};
use crate::gadgets::{half_distance_value, CompareMark, HalfDistance};
use crate::hadamard::basis_prep;
use crate::sim::{Controls, Register, Sequence, StateVector, Unitary};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FilterKind {
    /// Thresholds on ½(1 + Re α) estimated by Hadamard tests.
    Amp,
    /// Thresholds on outcome probabilities.
    Prob,
}

/// Register sizes and integer thresholds of a filter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FilterParams {
    pub kind: FilterKind,
    pub tau: f64,
    pub epsilon: f64,
    /// Estimation accuracy exponent: estimates are within 2^{-q}.
    pub q: usize,
    /// Estimation register width q + 3.
    pub l: usize,
    /// Estimate threshold.
    pub tau_prime: f64,
    /// Integer threshold ⌊(2^l/π)·asin√τ′⌋.
    pub tau1: u64,
    /// Lower estimate threshold for the negative side (amplitude filters only).
    pub tau_prime_low: f64,
    /// Integer threshold ⌈(2^l/π)·asin√τ′_low⌉.
    pub tau2: u64,
}

fn ceil_log2_inv(eps: f64) -> usize {
    ((1.0 / eps).log2() - 1e-12).ceil().max(0.0) as usize
}

pub fn make_filter_params(tau: f64, epsilon: f64, kind: FilterKind) -> Result<FilterParams> {
    if !(epsilon > 0.0 && epsilon < tau && tau <= 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < ε < τ ≤ 1, got τ = {tau}, ε = {epsilon}")));
    }
    let q = ceil_log2_inv(epsilon) + 5;
    let l = q + 3;
    let scale = (1u64 << l) as f64 / PI;
    let tau_prime = match kind {
        FilterKind::Amp => 0.5 * (1.0 + tau - epsilon / 16.0),
        FilterKind::Prob => tau - epsilon / 2.0,
    };
    let tau1 = (scale * tau_prime.sqrt().asin()).floor() as u64;
    let tau_prime_low = 0.5 * (1.0 - tau + epsilon / 16.0);
    let tau2 = (scale * tau_prime_low.sqrt().asin()).ceil() as u64;
    let p = FilterParams { kind, tau, epsilon, q, l, tau_prime, tau1, tau_prime_low, tau2 };
    let slack = 2.0 * PI / (1u64 << l) as f64;
    let s1 = (PI * tau1 as f64 / (1u64 << l) as f64).sin().powi(2);
    if !(tau_prime - slack >= 0.0 && tau_prime - slack <= s1 && s1 <= tau_prime) {
        return Err(Error::InvalidParameter("threshold rounding out of bounds".into()));
    }
    Ok(p)
}

impl FilterParams {
    /// Whether the stage-two comparison marks raw outcome `a` on the high side:
    /// sin²(πa/2^l) ≥ sin²(πτ₁/2^l).
    pub fn marks_high(&self, a: u64) -> bool {
        half_distance_value(a, self.l) <= half_distance_value(self.tau1, self.l)
    }

    /// Negative side: sin²(πa/2^l) ≤ sin²(πτ₂/2^l).
    pub fn marks_low(&self, a: u64) -> bool {
        half_distance_value(a, self.l) >= half_distance_value(self.tau2, self.l)
    }
}

/// Stage two with constants folded in: `flag ⊕= high(a) ∨ (signed ∧ low(a))`
/// for the estimate `a` in `est`.
#[derive(Clone, Debug)]
pub struct ThresholdMark {
    est: Register,
    flag: usize,
    params: FilterParams,
    signed: bool,
}

impl ThresholdMark {
    pub fn new(est: Register, flag: usize, params: FilterParams, signed: bool) -> Result<Self> {
        if est.width != params.l {
            return Err(Error::RegisterMismatch(format!("estimation register must have {} qubits", params.l)));
        }
        if est.mask() & (1 << flag) != 0 {
            return Err(Error::RegisterOverlap);
        }
        Ok(ThresholdMark { est, flag, params, signed })
    }

    fn marks(&self, a: u64) -> bool {
        self.params.marks_high(a) || (self.signed && self.params.marks_low(a))
    }
}

impl Unitary for ThresholdMark {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        state.check_register(&self.est)?;
        let f = 1usize << self.flag;
        state.apply_involution(ctl, |i| if self.marks(self.est.extract(i)) { i ^ f } else { i })
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.apply(state, ctl)
    }
    fn support(&self) -> usize {
        self.est.mask() | 1 << self.flag
    }
}

/// Registers of the gadget-level stage two: a preloaded threshold register,
/// scratch for two half-distances, and the flag.
#[derive(Clone, Debug)]
pub struct Stage2Registers {
    pub threshold: Register,
    pub threshold_scratch: Register,
    pub estimate_scratch: Register,
}

/// X gates loading τ₁ into the threshold register.
pub fn preload_threshold(regs: &Stage2Registers, params: &FilterParams) -> Sequence {
    basis_prep(regs.threshold.offset, regs.threshold.width, params.tau1)
}

/// Stage two from gadgets: half-distances of τ₁ and of the estimate into
/// scratch, flag ⊕= [â ≤ τ̂₁], then uncompute the scratch.
pub fn stage2_circuit(est: &Register, flag: usize, regs: &Stage2Registers) -> Result<Sequence> {
    let mut seq = Sequence::new();
    seq.push(HalfDistance::new(regs.threshold.clone(), regs.threshold_scratch.clone())?);
    seq.push(HalfDistance::new(est.clone(), regs.estimate_scratch.clone())?);
    seq.push(CompareMark::new(regs.threshold_scratch.clone(), regs.estimate_scratch.clone(), flag)?);
    seq.push(HalfDistance::new(est.clone(), regs.estimate_scratch.clone())?);
    seq.push(HalfDistance::new(regs.threshold.clone(), regs.threshold_scratch.clone())?);
    Ok(seq)
}

/// Applies [`stage2_circuit`] after checking that the threshold register holds τ₁.
pub fn apply_stage2(
    state: &mut StateVector,
    est: &Register,
    flag: usize,
    regs: &Stage2Registers,
    params: &FilterParams,
) -> Result<()> {
    if (state.marginal_probability(&regs.threshold, params.tau1)? - 1.0).abs() > 1e-9 {
        return Err(Error::RegisterNotPreloaded(regs.threshold.name.clone()));
    }
    stage2_circuit(est, flag, regs)?.apply(state, Controls::NONE)
}
