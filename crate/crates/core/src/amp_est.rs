//! Amplitude estimation by phase estimation of the Grover iterator.

use crate::error::{Error, Result};
use crate::filters::DistributionOracle;
use crate::gadgets::EqPrefixPhase;
use crate::sim::{
    Controls, CountedOracle, Gate, GlobalPhase, LedgerSnapshot, Op, PhaseFlip, Qft, Register, RegisterLayout,
    StateVector, Unitary, C64,
};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// Largest estimation register accepted.
pub const MAX_ESTIMATION_QUBITS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AEConfig {
    pub m: usize,
}

impl AEConfig {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_ESTIMATION_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "estimation register width must be in 1..={MAX_ESTIMATION_QUBITS}, got {m}"
            )));
        }
        Ok(AEConfig { m })
    }

    /// Register wide enough for additive accuracy 2^{-q} with probability at
    /// least 8/π²: three qubits beyond q.
    pub fn from_accuracy(q: usize) -> Result<Self> {
        Self::new(q + 3)
    }

    /// Grover applications per run.
    pub fn iterations(&self) -> u64 {
        (1u64 << self.m) - 1
    }
}

/// Raw estimation-register outcome and its decoded probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseEstimate {
    pub raw: u64,
    pub l: usize,
    pub decoded: f64,
}

impl PhaseEstimate {
    pub fn new(raw: u64, l: usize) -> Result<Self> {
        Ok(PhaseEstimate { raw, l, decoded: decode_estimate(raw, l)? })
    }
}

/// sin²(π·raw / 2^l).
pub fn decode_estimate(raw: u64, l: usize) -> Result<f64> {
    if l == 0 || l > 63 || raw >> l != 0 {
        return Err(Error::ValueOutOfRange { value: raw, width: l });
    }
    Ok((PI * raw as f64 / (1u64 << l) as f64).sin().powi(2))
}

/// G = −A·S₀·A†·S_χ, with S₀ reflecting the zero state of `reflect_mask`.
#[derive(Clone)]
pub struct GroverIterator {
    prep: Op,
    marker: Op,
    reflect_mask: usize,
}

impl GroverIterator {
    /// Iterator whose zero reflection covers exactly the preparation's qubits.
    pub fn new(prep: Op, marker: Op) -> Result<Self> {
        let mask = prep.support();
        if marker.support() & mask == 0 {
            return Err(Error::RegisterMismatch("marker does not act on the prepared block".into()));
        }
        Ok(GroverIterator { prep, marker, reflect_mask: mask })
    }

    /// Iterator with an explicit zero-reflection block, for preparations that
    /// also read control registers.
    pub fn with_reflection(prep: Op, marker: Op, reflect_mask: usize) -> Result<Self> {
        if reflect_mask == 0 || reflect_mask & !prep.support() != 0 {
            return Err(Error::RegisterMismatch("reflection block must lie inside the preparation".into()));
        }
        Ok(GroverIterator { prep, marker, reflect_mask })
    }
}

impl Unitary for GroverIterator {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.marker.apply(state, ctl)?;
        self.prep.apply_adjoint(state, ctl)?;
        PhaseFlip::zero(self.reflect_mask).apply(state, ctl)?;
        self.prep.apply(state, ctl)?;
        GlobalPhase(C64::new(-1.0, 0.0)).apply(state, ctl)
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        GlobalPhase(C64::new(-1.0, 0.0)).apply(state, ctl)?;
        self.prep.apply_adjoint(state, ctl)?;
        PhaseFlip::zero(self.reflect_mask).apply(state, ctl)?;
        self.prep.apply(state, ctl)?;
        self.marker.apply_adjoint(state, ctl)
    }
    fn support(&self) -> usize {
        self.prep.support() | self.marker.support()
    }
}

/// Builds the Grover iterator for a preparation and marker.
pub fn grover_iterator(prep: &CountedOracle, marker: &CountedOracle) -> Result<GroverIterator> {
    GroverIterator::new(Arc::new(prep.clone()), Arc::new(marker.clone()))
}

fn require_zeroed(state: &StateVector, est: &Register) -> Result<()> {
    state.check_register(est)?;
    if state.weight_outside_zero(est) > 1e-12 {
        return Err(Error::RegisterNotZeroed(est.name.clone()));
    }
    Ok(())
}

/// Σ_x |x⟩⟨x| ⊗ G^x on a zeroed estimation register, after Hadamards on it.
///
/// With the iterator confined below the register, the state factors as
/// |0⟩_est ⊗ φ, so each slice x is G^x φ computed on the reduced vector.
/// The ledger sees the same 2^m − 1 controlled applications as the
/// binary-controlled circuit.
fn superpose_powers(state: &mut StateVector, est: &Register, iterate: &dyn Unitary) -> Result<()> {
    let below = (1usize << est.offset) - 1;
    if iterate.support() & !below != 0 {
        for j in 0..est.width {
            Gate::h(est.qubit(j)).apply(state, Controls::NONE)?;
        }
        return controlled_powers(state, est, iterate, Controls::NONE, false);
    }
    let low = 1usize << est.offset;
    let m = est.width;
    let dim = est.dim();
    let amps = state.amplitudes_mut();
    let high_count = amps.len() / (low * dim);
    let mut sub_amps = Vec::with_capacity(low * high_count);
    for h in 0..high_count {
        let base = h * low * dim;
        sub_amps.extend_from_slice(&amps[base..base + low]);
    }
    // Spectator qubits above the register shift down by m; the iterator
    // never touches them.
    let sub_width = state.width() - m;
    let mut sub = StateVector::from_raw(sub_width, sub_amps);
    let scale = 1.0 / (dim as f64).sqrt();
    for x in 0..dim {
        let amps = state.amplitudes_mut();
        let src = sub.amplitudes();
        for h in 0..high_count {
            let dst = h * low * dim + x * low;
            for (d, s) in amps[dst..dst + low].iter_mut().zip(&src[h * low..(h + 1) * low]) {
                *d = s * scale;
            }
        }
        if x + 1 < dim {
            iterate.apply(&mut sub, Controls::NONE.tagged())?;
        }
    }
    Ok(())
}

/// G^{2^j} controlled on each estimation qubit j.
fn controlled_powers(
    state: &mut StateVector,
    est: &Register,
    iterate: &dyn Unitary,
    ctl: Controls,
    adjoint: bool,
) -> Result<()> {
    if iterate.support() & est.mask() != 0 {
        return Err(Error::RegisterOverlap);
    }
    let order: Vec<usize> = if adjoint { (0..est.width).rev().collect() } else { (0..est.width).collect() };
    for j in order {
        let c = ctl.and(Controls::qubit(est.qubit(j), true));
        for _ in 0..(1u64 << j) {
            if adjoint {
                iterate.apply_adjoint(state, c)?;
            } else {
                iterate.apply(state, c)?;
            }
        }
    }
    Ok(())
}

/// Phase estimation of `iterate` into a zeroed register `est`:
/// Hadamards, Σ_x |x⟩⟨x| ⊗ G^x, inverse Fourier transform.
pub fn estimate_phase(state: &mut StateVector, est: &Register, iterate: &dyn Unitary) -> Result<()> {
    require_zeroed(state, est)?;
    superpose_powers(state, est, iterate)?;
    Qft::new(est.clone()).apply_adjoint(state, Controls::NONE)?;
    state.renormalize();
    Ok(())
}

/// Phase estimation through binary-controlled powers only; the reference
/// for [`estimate_phase`].
pub fn estimate_phase_reference(state: &mut StateVector, est: &Register, iterate: &dyn Unitary) -> Result<()> {
    require_zeroed(state, est)?;
    for j in 0..est.width {
        Gate::h(est.qubit(j)).apply(state, Controls::NONE)?;
    }
    controlled_powers(state, est, iterate, Controls::NONE, false)?;
    Qft::new(est.clone()).apply_adjoint(state, Controls::NONE)
}

/// Phase estimation as a gate-level unitary, usable inside larger circuits
/// and under control. Always uses binary-controlled powers.
#[derive(Clone)]
pub struct PhaseEstimation {
    est: Register,
    iterate: Op,
}

impl PhaseEstimation {
    pub fn new(est: Register, iterate: Op) -> Result<Self> {
        if iterate.support() & est.mask() != 0 {
            return Err(Error::RegisterOverlap);
        }
        Ok(PhaseEstimation { est, iterate })
    }
}

impl Unitary for PhaseEstimation {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        for j in 0..self.est.width {
            Gate::h(self.est.qubit(j)).apply(state, ctl)?;
        }
        controlled_powers(state, &self.est, self.iterate.as_ref(), ctl, false)?;
        Qft::new(self.est.clone()).apply_adjoint(state, ctl)
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        Qft::new(self.est.clone()).apply(state, ctl)?;
        controlled_powers(state, &self.est, self.iterate.as_ref(), ctl, true)?;
        for j in (0..self.est.width).rev() {
            Gate::h(self.est.qubit(j)).apply(state, ctl)?;
        }
        Ok(())
    }
    fn support(&self) -> usize {
        self.iterate.support() | self.est.mask()
    }
}

/// Output of a standalone estimation run.
#[derive(Clone, Debug)]
pub struct QaeRun {
    pub state: StateVector,
    pub layout: RegisterLayout,
    pub estimation: Register,
}

impl QaeRun {
    /// Distribution of the raw estimation outcome.
    pub fn raw_distribution(&self) -> Result<Vec<f64>> {
        self.state.outcome_distribution(&self.estimation)
    }
}

/// Amplitude estimation of Pr[marked] for `prep|0⟩`. The preparation occupies
/// the low qubits; the estimation register sits above it.
pub fn qae(prep: &CountedOracle, marker: &CountedOracle, config: AEConfig) -> Result<QaeRun> {
    let support = prep.support() | marker.support();
    let work_width = (usize::BITS - support.leading_zeros()) as usize;
    let mut layout = RegisterLayout::new();
    layout.push("work", work_width)?;
    let est = layout.push("estimation", config.m)?;
    let mut state = StateVector::new(layout.width())?;
    let g = grover_iterator(prep, marker)?;
    prep.apply(&mut state, Controls::NONE)?;
    estimate_phase(&mut state, &est, &g)?;
    Ok(QaeRun { state, layout, estimation: est })
}

/// Marker and preparation calls charged by one [`eq_amp_est`] run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EqAmpEstCalls {
    pub prep: LedgerSnapshot,
    pub marker: LedgerSnapshot,
}

/// Estimates, for every basis input x held in `input`, the probability p_x
/// of outcome x under the distribution oracle: prepares the oracle on the
/// zeroed `work` register, marks the states whose outcome prefix equals the
/// input, and phase-estimates into the zeroed `est` register.
pub fn eq_amp_est(
    state: &mut StateVector,
    input: &Register,
    work: &Register,
    est: &Register,
    od: &DistributionOracle,
) -> Result<EqAmpEstCalls> {
    if input.width != od.outcome_width() || work.width != od.width() {
        return Err(Error::RegisterMismatch(format!(
            "oracle needs input width {} and work width {}, got {} and {}",
            od.outcome_width(),
            od.width(),
            input.width,
            work.width
        )));
    }
    state.check_register(work)?;
    if state.weight_outside_zero(work) > 1e-12 {
        return Err(Error::RegisterNotZeroed(work.name.clone()));
    }
    let prep = od.oracle().at(work.offset)?;
    let marker = CountedOracle::from_op(
        "prefix-equality",
        Arc::new(EqPrefixPhase::new(input.clone(), work.clone(), input.width)?),
    );
    let before = prep.snapshot();
    prep.apply(state, Controls::NONE)?;
    let g = GroverIterator::with_reflection(Arc::new(prep.clone()), Arc::new(marker.clone()), work.mask())?;
    estimate_phase(state, est, &g)?;
    Ok(EqAmpEstCalls { prep: prep.snapshot().since(&before), marker: marker.snapshot() })
}

/// The op form of [`eq_amp_est`] for gate-level composition.
pub fn eq_amp_est_op(input: &Register, work: &Register, est: &Register, od: &DistributionOracle) -> Result<Op> {
    let prep = od.oracle().at(work.offset)?;
    let marker = CountedOracle::from_op(
        "prefix-equality",
        Arc::new(EqPrefixPhase::new(input.clone(), work.clone(), input.width)?),
    );
    let prep_op: Op = Arc::new(prep);
    let g = GroverIterator::with_reflection(prep_op.clone(), Arc::new(marker), work.mask())?;
    let pe = PhaseEstimation::new(est.clone(), Arc::new(g))?;
    Ok(Arc::new(crate::sim::Sequence(vec![prep_op, Arc::new(pe)])))
}

/// Σ_x |x⟩⟨x| ⊗ G^x as a gate-level unitary over binary-controlled powers.
#[derive(Clone)]
pub struct ControlledPowers {
    est: Register,
    iterate: Op,
}

impl ControlledPowers {
    pub fn new(est: Register, iterate: Op) -> Result<Self> {
        if iterate.support() & est.mask() != 0 {
            return Err(Error::RegisterOverlap);
        }
        Ok(ControlledPowers { est, iterate })
    }
}

impl Unitary for ControlledPowers {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        controlled_powers(state, &self.est, self.iterate.as_ref(), ctl, false)
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        controlled_powers(state, &self.est, self.iterate.as_ref(), ctl, true)
    }
    fn support(&self) -> usize {
        self.iterate.support() | self.est.mask()
    }
}
