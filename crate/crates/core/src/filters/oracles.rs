use super::distribution::DistributionOracle;
use super::params::{FilterKind, FilterParams, ThresholdMark};
use crate::amp_est::{decode_estimate, eq_amp_est, eq_amp_est_op, PhaseEstimation};
use crate::biased_aa::{conditional_flag, MarkingOracle};
use crate::error::{Error, Result};
use crate::hadamard::hadamard_family;
use crate::mdist::{controlled_prep_family, family_iterator, mdist_amp_est_in_place, PrepFamily};
use crate::sim::{
    Controls, CountedOracle, Gate, Ledger, LedgerSnapshot, Op, Register, RegisterLayout, Sequence, StateVector,
    Unitary,
};
use std::sync::{Arc, OnceLock};

type Cached = (Vec<f64>, Vec<(String, LedgerSnapshot)>);

fn check_kind(params: &FilterParams, kind: FilterKind) -> Result<()> {
    if params.kind != kind {
        return Err(Error::InvalidParameter(format!("expected {kind:?} filter parameters")));
    }
    Ok(())
}

/// Marks outcome x when its probability is at least τ, erring with
/// probability at most 1 − 8/π² outside the gap [τ − ε, τ).
///
/// Ancilla layout: work register for the distribution oracle, flag,
/// estimation register.
#[derive(Clone)]
pub struct ProbFilOracle {
    od: DistributionOracle,
    params: FilterParams,
    ledger: Arc<Ledger>,
    cache: Arc<OnceLock<Cached>>,
}

impl ProbFilOracle {
    pub fn new(od: &DistributionOracle, params: FilterParams) -> Result<Self> {
        check_kind(&params, FilterKind::Prob)?;
        Ok(ProbFilOracle { od: od.clone(), params, ledger: Ledger::new(), cache: Arc::new(OnceLock::new()) })
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    fn split(&self, anc: &Register) -> (Register, usize, Register) {
        let r = self.od.width();
        let work = Register::new("work", anc.offset, r);
        let flag = anc.offset + r;
        let est = Register::new("estimate", anc.offset + r + 1, self.params.l);
        (work, flag, est)
    }

    /// Single copy with the input in uniform superposition, on the fast path.
    pub fn single_copy_state(&self) -> Result<(StateVector, RegisterLayout, EqCalls)> {
        let mut layout = RegisterLayout::new();
        let input = layout.push("input", self.od.outcome_width())?;
        let anc = layout.push("ancilla", self.ancilla_width())?;
        let (work, flag, est) = self.split(&anc);
        let mut s = StateVector::new(layout.width())?;
        for q in 0..input.width {
            Gate::h(input.qubit(q)).apply(&mut s, Controls::NONE)?;
        }
        let calls = eq_amp_est(&mut s, &input, &work, &est, &self.od)?;
        ThresholdMark::new(est, flag, self.params, false)?.apply(&mut s, Controls::NONE)?;
        Ok((s, layout, EqCalls { prep: calls.prep, marker: calls.marker }))
    }

    fn compute(&self) -> Result<Cached> {
        let (s, layout, calls) = self.single_copy_state()?;
        let input = layout.register("input")?.clone();
        let anc = layout.register("ancilla")?.clone();
        let flag = Register::new("flag", anc.offset + self.flag_index(), 1);
        let probs = conditional_flag(&s, &input, &flag)?;
        Ok((probs, vec![(self.od.oracle().label().to_string(), calls.prep)]))
    }

    fn cached(&self) -> Result<&Cached> {
        if let Some(c) = self.cache.get() {
            return Ok(c);
        }
        let c = self.compute()?;
        Ok(self.cache.get_or_init(|| c))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EqCalls {
    pub prep: LedgerSnapshot,
    pub marker: LedgerSnapshot,
}

impl MarkingOracle for ProbFilOracle {
    fn label(&self) -> String {
        "probability-filter".into()
    }
    fn input_width(&self) -> usize {
        self.od.outcome_width()
    }
    fn ancilla_width(&self) -> usize {
        self.od.width() + 1 + self.params.l
    }
    fn flag_index(&self) -> usize {
        self.od.width()
    }
    fn place(&self, input: &Register, ancilla: &Register) -> Result<Op> {
        if input.width != self.input_width() || ancilla.width != self.ancilla_width() {
            return Err(Error::RegisterMismatch("probability filter placement".into()));
        }
        let (work, flag, est) = self.split(ancilla);
        let mut seq = Sequence::new();
        seq.push_op(eq_amp_est_op(input, &work, &est, &self.od)?);
        seq.push(ThresholdMark::new(est, flag, self.params, false)?);
        Ok(Arc::new(CountedOracle::with_ledger("probability-filter", Arc::new(seq), self.ledger.clone())))
    }
    fn ledger(&self) -> Arc<Ledger> {
        self.ledger.clone()
    }
    fn inner_ledgers(&self) -> Vec<(String, Arc<Ledger>)> {
        vec![(self.od.oracle().label().to_string(), self.od.oracle().ledger().clone())]
    }
    fn inner_calls_per_application(&self) -> Result<Vec<(String, LedgerSnapshot)>> {
        Ok(self.cached()?.1.clone())
    }
    fn flag_probabilities(&self) -> Result<Vec<f64>> {
        Ok(self.cached()?.0.clone())
    }
}

/// What an amplitude filter thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum AmpMode {
    /// Re α_x ≥ τ.
    Real,
    /// |Re α_x| ≥ τ.
    Signed,
    /// |α_x| ≥ τ, from a second, imaginary-part estimate.
    Complex,
}

/// Marks x by thresholding Hadamard-test estimates of ⟨x,0…0|O|0⟩ made for
/// all x at once by the shared-oracle family estimator.
///
/// Ancilla layout: real test work (control + oracle register), then in
/// complex mode the imaginary test work, then the flag, the real estimate
/// and in complex mode the imaginary estimate.
#[derive(Clone)]
pub struct AmpFilOracle {
    od: DistributionOracle,
    params: FilterParams,
    mode: AmpMode,
    ledger: Arc<Ledger>,
    cache: Arc<OnceLock<Cached>>,
}

struct AmpLayout {
    works: Vec<Register>,
    flag: usize,
    ests: Vec<Register>,
}

impl AmpFilOracle {
    pub fn new(od: &DistributionOracle, params: FilterParams, mode: AmpMode) -> Result<Self> {
        check_kind(&params, FilterKind::Amp)?;
        Ok(AmpFilOracle { od: od.clone(), params, mode, ledger: Ledger::new(), cache: Arc::new(OnceLock::new()) })
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    fn parts(&self) -> usize {
        if self.mode == AmpMode::Complex {
            2
        } else {
            1
        }
    }

    fn split(&self, anc: &Register) -> AmpLayout {
        let w = self.od.width() + 1;
        let parts = self.parts();
        let works = (0..parts).map(|i| Register::new("test", anc.offset + i * w, w)).collect();
        let flag = anc.offset + parts * w;
        let ests = (0..parts).map(|i| Register::new("estimate", flag + 1 + i * self.params.l, self.params.l)).collect();
        AmpLayout { works, flag, ests }
    }

    fn families(&self, input: &Register, lay: &AmpLayout) -> Result<Vec<PrepFamily>> {
        let a = self.od.ancilla_width();
        let targets: Vec<u64> = (0..input.dim() as u64).map(|y| y << a).collect();
        lay.works
            .iter()
            .enumerate()
            .map(|(i, w)| Ok(hadamard_family(input, w, self.od.oracle(), &targets, i == 1)?.0))
            .collect()
    }

    fn stage2(&self, lay: &AmpLayout) -> Result<Op> {
        Ok(match self.mode {
            AmpMode::Real => Arc::new(ThresholdMark::new(lay.ests[0].clone(), lay.flag, self.params, false)?),
            AmpMode::Signed => Arc::new(ThresholdMark::new(lay.ests[0].clone(), lay.flag, self.params, true)?),
            AmpMode::Complex => Arc::new(NormThresholdMark::new(
                lay.ests[0].clone(),
                lay.ests[1].clone(),
                lay.flag,
                self.params.tau - self.params.epsilon / 2.0,
            )?),
        })
    }

    pub fn single_copy_state(&self) -> Result<(StateVector, RegisterLayout, LedgerSnapshot)> {
        let mut layout = RegisterLayout::new();
        let input = layout.push("input", self.od.outcome_width())?;
        let anc = layout.push("ancilla", self.ancilla_width())?;
        let lay = self.split(&anc);
        let mut s = StateVector::new(layout.width())?;
        for q in 0..input.width {
            Gate::h(input.qubit(q)).apply(&mut s, Controls::NONE)?;
        }
        let before = self.od.oracle().snapshot();
        for (fam, est) in self.families(&input, &lay)?.iter().zip(&lay.ests) {
            mdist_amp_est_in_place(&mut s, fam, est)?;
        }
        let calls = self.od.oracle().snapshot().since(&before);
        self.stage2(&lay)?.apply(&mut s, Controls::NONE)?;
        Ok((s, layout, calls))
    }

    /// Pr[estimate = a | input x] for one Hadamard-test part, simulated alone.
    fn part_law(&self, part: usize) -> Result<(Vec<Vec<f64>>, LedgerSnapshot)> {
        let mut layout = RegisterLayout::new();
        let input = layout.push("input", self.od.outcome_width())?;
        let work = layout.push("test", self.od.width() + 1)?;
        let est = layout.push("estimate", self.params.l)?;
        let mut s = StateVector::new(layout.width())?;
        for q in 0..input.width {
            Gate::h(input.qubit(q)).apply(&mut s, Controls::NONE)?;
        }
        let a = self.od.ancilla_width();
        let targets: Vec<u64> = (0..input.dim() as u64).map(|y| y << a).collect();
        let (family, _) = hadamard_family(&input, &work, self.od.oracle(), &targets, part == 1)?;
        let before = self.od.oracle().snapshot();
        mdist_amp_est_in_place(&mut s, &family, &est)?;
        let calls = self.od.oracle().snapshot().since(&before);
        let joint = s
            .joint_distribution(&input, &est)?
            .into_iter()
            .map(|row| {
                let t: f64 = row.iter().sum();
                row.into_iter().map(|p| if t > 0.0 { p / t } else { 0.0 }).collect()
            })
            .collect();
        Ok((joint, calls))
    }

    fn compute(&self) -> Result<Cached> {
        let label = self.od.oracle().label().to_string();
        if self.mode != AmpMode::Complex {
            let (s, layout, calls) = self.single_copy_state()?;
            let input = layout.register("input")?.clone();
            let anc = layout.register("ancilla")?.clone();
            let flag = Register::new("flag", anc.offset + self.flag_index(), 1);
            return Ok((conditional_flag(&s, &input, &flag)?, vec![(label, calls)]));
        }
        // The two parts act on disjoint ancillas and only read the input, so
        // for each basis input their estimates are independent.
        let (re, c0) = self.part_law(0)?;
        let (im, c1) = self.part_law(1)?;
        let l = self.params.l;
        let value = |a: usize| 2.0 * decode_estimate(a as u64, l).unwrap_or(0.0) - 1.0;
        let t = self.params.tau - self.params.epsilon / 2.0;
        let probs = re
            .iter()
            .zip(&im)
            .map(|(pr, pi)| {
                let mut hit = 0.0;
                for (a, wa) in pr.iter().enumerate().filter(|(_, w)| **w > 0.0) {
                    for (b, wb) in pi.iter().enumerate().filter(|(_, w)| **w > 0.0) {
                        let (x, y) = (value(a), value(b));
                        if x * x + y * y >= t * t {
                            hit += wa * wb;
                        }
                    }
                }
                hit.clamp(0.0, 1.0)
            })
            .collect();
        Ok((probs, vec![(label, c0 + c1)]))
    }

    fn cached(&self) -> Result<&Cached> {
        if let Some(c) = self.cache.get() {
            return Ok(c);
        }
        let c = self.compute()?;
        Ok(self.cache.get_or_init(|| c))
    }
}

impl MarkingOracle for AmpFilOracle {
    fn label(&self) -> String {
        "amplitude-filter".into()
    }
    fn input_width(&self) -> usize {
        self.od.outcome_width()
    }
    fn ancilla_width(&self) -> usize {
        self.parts() * (self.od.width() + 1 + self.params.l) + 1
    }
    fn flag_index(&self) -> usize {
        self.parts() * (self.od.width() + 1)
    }
    fn place(&self, input: &Register, ancilla: &Register) -> Result<Op> {
        if input.width != self.input_width() || ancilla.width != self.ancilla_width() {
            return Err(Error::RegisterMismatch("amplitude filter placement".into()));
        }
        let lay = self.split(ancilla);
        let mut seq = Sequence::new();
        for (fam, est) in self.families(input, &lay)?.iter().zip(&lay.ests) {
            seq.push(controlled_prep_family(fam));
            seq.push(PhaseEstimation::new(est.clone(), Arc::new(family_iterator(fam)?))?);
        }
        seq.push_op(self.stage2(&lay)?);
        Ok(Arc::new(CountedOracle::with_ledger("amplitude-filter", Arc::new(seq), self.ledger.clone())))
    }
    fn ledger(&self) -> Arc<Ledger> {
        self.ledger.clone()
    }
    fn inner_ledgers(&self) -> Vec<(String, Arc<Ledger>)> {
        vec![(self.od.oracle().label().to_string(), self.od.oracle().ledger().clone())]
    }
    fn inner_calls_per_application(&self) -> Result<Vec<(String, LedgerSnapshot)>> {
        Ok(self.cached()?.1.clone())
    }
    fn flag_probabilities(&self) -> Result<Vec<f64>> {
        Ok(self.cached()?.0.clone())
    }
}

/// `flag ⊕= [re² + im² ≥ t²]` where re and im are the signed values
/// 2 sin²(πa/2^l) − 1 of two estimation registers.
#[derive(Clone, Debug)]
pub struct NormThresholdMark {
    re: Register,
    im: Register,
    flag: usize,
    threshold: f64,
}

impl NormThresholdMark {
    pub fn new(re: Register, im: Register, flag: usize, threshold: f64) -> Result<Self> {
        if re.width != im.width || re.overlaps(&im) || (re.mask() | im.mask()) & (1 << flag) != 0 {
            return Err(Error::RegisterOverlap);
        }
        Ok(NormThresholdMark { re, im, flag, threshold })
    }
}

impl Unitary for NormThresholdMark {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        let l = self.re.width;
        let table: Vec<f64> = (0..1u64 << l).map(|a| 2.0 * decode_estimate(a, l).unwrap_or(0.0) - 1.0).collect();
        let t2 = self.threshold * self.threshold;
        let f = 1usize << self.flag;
        state.apply_involution(ctl, |i| {
            let r = table[self.re.extract(i) as usize];
            let m = table[self.im.extract(i) as usize];
            if r * r + m * m >= t2 {
                i ^ f
            } else {
                i
            }
        })
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.apply(state, ctl)
    }
    fn support(&self) -> usize {
        self.re.mask() | self.im.mask() | 1 << self.flag
    }
}
