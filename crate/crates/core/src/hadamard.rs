//! Hadamard tests and signed amplitude estimation.

use crate::amp_est::{decode_estimate, estimate_phase, AEConfig, GroverIterator};
use crate::error::{Error, Result};
use crate::mdist::{mdist_amp_est_in_place, GoodStates, PrepFamily, Step};
use crate::sim::{
    Controlled, Controls, CountedOracle, Gate, LedgerSnapshot, Op, PhaseFlip, Register, RegisterLayout, Sequence,
    StateVector, Unitary,
};
use crate::stats::{median, median_distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

/// H on the control; ψ-preparation where it reads 0, φ-preparation where it
/// reads 1; H again. Measuring 0 has probability ½(1 + Re⟨ψ|φ⟩), or
/// ½(1 + Im⟨ψ|φ⟩) when an S† follows the first H.
#[derive(Clone)]
pub struct HadamardTest {
    control: usize,
    psi: Op,
    phi: Op,
    imaginary: bool,
}

impl HadamardTest {
    fn new(control: usize, psi: Op, phi: Op, imaginary: bool) -> Result<Self> {
        if psi.support() & (1 << control) != 0 || phi.support() & (1 << control) != 0 {
            return Err(Error::RegisterOverlap);
        }
        Ok(HadamardTest { control, psi, phi, imaginary })
    }

    pub fn control(&self) -> usize {
        self.control
    }
}

impl Unitary for HadamardTest {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        let c = self.control;
        Gate::h(c).apply(state, ctl)?;
        if self.imaginary {
            Gate::sdg(c).apply(state, ctl)?;
        }
        self.psi.apply(state, ctl.and(Controls::qubit(c, false)))?;
        self.phi.apply(state, ctl.and(Controls::qubit(c, true)))?;
        Gate::h(c).apply(state, ctl)
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        let c = self.control;
        Gate::h(c).apply(state, ctl)?;
        self.phi.apply_adjoint(state, ctl.and(Controls::qubit(c, true)))?;
        self.psi.apply_adjoint(state, ctl.and(Controls::qubit(c, false)))?;
        if self.imaginary {
            Gate::s(c).apply(state, ctl)?;
        }
        Gate::h(c).apply(state, ctl)
    }
    fn support(&self) -> usize {
        self.psi.support() | self.phi.support() | (1 << self.control)
    }
}

fn check_pair(psi: &Op, phi: &Op) -> Result<()> {
    if psi.support() != phi.support() && psi.support() != 0 && phi.support() != 0 {
        return Err(Error::RegisterMismatch("both preparations must act on the same register".into()));
    }
    Ok(())
}

pub fn hadamard_test_real(psi: Op, phi: Op, control: usize) -> Result<HadamardTest> {
    check_pair(&psi, &phi)?;
    HadamardTest::new(control, psi, phi, false)
}

pub fn hadamard_test_imag(psi: Op, phi: Op, control: usize) -> Result<HadamardTest> {
    check_pair(&psi, &phi)?;
    HadamardTest::new(control, psi, phi, true)
}

/// X gates writing `y` into the register at `offset`.
pub fn basis_prep(offset: usize, width: usize, y: u64) -> Sequence {
    let mut seq = Sequence::new();
    for b in 0..width {
        if y >> b & 1 == 1 {
            seq.push(Gate::x(offset + b));
        }
    }
    seq
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InnerProductEstimate {
    pub re: f64,
    pub im: f64,
    pub norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EstimationBackend {
    /// Plain amplitude estimation of each Hadamard test.
    Qae,
    /// The shared-oracle family estimator with a single member.
    MDist,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TrueAmpEstConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub backend: EstimationBackend,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrueAmpEstReport {
    pub estimate: InnerProductEstimate,
    /// |⟨y|A|0⟩| read from the simulator.
    pub true_norm: f64,
    /// Probability that |estimate − true_norm| ≤ ε, from the exact median law.
    pub exact_success_prob: f64,
    pub m: usize,
    pub repetitions: usize,
    pub re_samples: Vec<f64>,
    pub im_samples: Vec<f64>,
    pub a_calls: LedgerSnapshot,
}

/// Estimation register width for target accuracy ε: ⌈log₂(2√2/ε)⌉ + 3.
pub fn true_amp_est_width(epsilon: f64) -> usize {
    ((2.0 * 2f64.sqrt() / epsilon).log2() - 1e-12).ceil().max(1.0) as usize + 3
}

/// Odd repetition count 2⌈6 ln(2/δ)⌉ + 1 for the median trick.
pub fn median_repetitions(delta: f64) -> usize {
    2 * (6.0 * (2.0 / delta).ln()).ceil() as usize + 1
}

/// Signed component value 2 sin²(πa/2^m) − 1 of a raw outcome.
fn component_value(raw: u64, m: usize) -> Result<f64> {
    Ok(2.0 * decode_estimate(raw, m)? - 1.0)
}

/// One estimation run of a Hadamard-test component. Returns the raw-outcome
/// distribution and a sampled outcome.
fn run_component(
    a: &CountedOracle,
    y: u64,
    imaginary: bool,
    m: usize,
    backend: EstimationBackend,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, u64)> {
    let n = a.width();
    match backend {
        EstimationBackend::Qae => {
            let mut layout = RegisterLayout::new();
            let c = layout.push("control", 1)?;
            let work = layout.push("work", n)?;
            let est = layout.push("estimation", m)?;
            let psi: Op = Arc::new(basis_prep(work.offset, n, y));
            let phi: Op = Arc::new(a.at(work.offset)?);
            let ht = HadamardTest::new(c.offset, psi, phi, imaginary)?;
            let marker: Op = Arc::new(PhaseFlip::on_value(&c, 0));
            let mut state = StateVector::new(layout.width())?;
            ht.apply(&mut state, Controls::NONE)?;
            let g = GroverIterator::with_reflection(Arc::new(ht), marker, c.mask() | work.mask())?;
            estimate_phase(&mut state, &est, &g)?;
            let dist = state.outcome_distribution(&est)?;
            let (raw, _) = state.measure(&est, rng)?;
            Ok((dist, raw))
        }
        EstimationBackend::MDist => {
            let mut layout = RegisterLayout::new();
            let index = layout.push("index", 1)?;
            let c = layout.push("control", 1)?;
            layout.push("inner", n)?;
            let est = layout.push("estimation", m)?;
            let work = Register::new("work", c.offset, 1 + n);
            let (family, _) = hadamard_family(&index, &work, a, &[y], imaginary)?;
            let mut state = StateVector::new(layout.width())?;
            mdist_amp_est_in_place(&mut state, &family, &est)?;
            let dist = state.outcome_distribution(&est)?;
            let (raw, _) = state.measure(&est, rng)?;
            Ok((dist, raw))
        }
    }
}

/// The family of Hadamard tests between |targets[y]⟩ (padded with zero
/// garbage) and A|0⟩, sharing the controlled call to A. The work register
/// holds the test's control qubit at its bottom and A's register above it;
/// the good state of every member is control = 0.
pub fn hadamard_family(
    index: &Register,
    work: &Register,
    a: &CountedOracle,
    targets: &[u64],
    imaginary: bool,
) -> Result<(PrepFamily, CountedOracle)> {
    let n = a.width();
    if work.width != n + 1 {
        return Err(Error::RegisterMismatch(format!("work register needs {} qubits", n + 1)));
    }
    let c = work.offset;
    let placed = a.at(c + 1)?;
    let inner = CountedOracle::from_op(
        "controlled-prep",
        Arc::new(Controlled::new(Controls::qubit(c, true), Arc::new(placed.clone()))?),
    );
    let members = targets
        .iter()
        .map(|&y| {
            let mut steps = vec![Step::Gate(Arc::new(Gate::h(c)))];
            if imaginary {
                steps.push(Step::Gate(Arc::new(Gate::sdg(c))));
            }
            let prep: Op = Arc::new(basis_prep(c + 1, n, y));
            steps.push(Step::Gate(Arc::new(Controlled::new(Controls::qubit(c, false), prep)?)));
            steps.push(Step::Oracle);
            steps.push(Step::Gate(Arc::new(Gate::h(c))));
            Ok(steps)
        })
        .collect::<Result<Vec<_>>>()?;
    let good = GoodStates { mask: 1 << c, values: vec![0; targets.len()] };
    let family = PrepFamily::from_members(index.clone(), work.clone(), inner.clone(), members, good)?;
    Ok((family, inner))
}

/// Exact law of one component's signed value.
fn component_law(dist: &[f64], m: usize) -> Result<Vec<(f64, f64)>> {
    dist.iter().enumerate().map(|(raw, &p)| Ok((component_value(raw as u64, m)?, p))).collect()
}

/// Estimates |⟨y|A|0⟩| to additive accuracy ε with probability ≥ 1 − δ by
/// taking medians of the real and imaginary Hadamard-test estimates.
pub fn true_amp_est(a: &CountedOracle, y: u64, config: TrueAmpEstConfig) -> Result<TrueAmpEstReport> {
    let TrueAmpEstConfig { epsilon, delta, backend, seed } = config;
    if !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter("ε and δ must lie in (0, 1)".into()));
    }
    let n = a.width();
    if n < 64 && y >> n != 0 {
        return Err(Error::ValueOutOfRange { value: y, width: n });
    }
    let m = true_amp_est_width(epsilon);
    AEConfig::new(m)?;
    let r = median_repetitions(delta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let before = a.snapshot();
    let mut laws = Vec::with_capacity(2);
    let mut samples = [Vec::with_capacity(r), Vec::with_capacity(r)];
    for (ci, imaginary) in [false, true].into_iter().enumerate() {
        let mut law = None;
        for _ in 0..r {
            let (dist, raw) = run_component(a, y, imaginary, m, backend, &mut rng)?;
            samples[ci].push(component_value(raw, m)?);
            if law.is_none() {
                law = Some(component_law(&dist, m)?);
            }
        }
        laws.push(law.expect("r ≥ 1"));
    }
    let a_calls = a.snapshot().since(&before);
    let re = median(&samples[0]);
    let im = median(&samples[1]);
    let norm = (re * re + im * im).sqrt().min(1.0);

    let mut s = StateVector::new(n)?;
    a.at(0)?.fresh().apply(&mut s, Controls::NONE)?;
    let true_norm = s.amplitude(y as usize).norm();
    let mre = median_distribution(&laws[0], r);
    let mim = median_distribution(&laws[1], r);
    let mut success = 0.0;
    for &(vr, pr) in &mre {
        for &(vi, pi) in &mim {
            let est = (vr * vr + vi * vi).sqrt().min(1.0);
            if (est - true_norm).abs() <= epsilon {
                success += pr * pi;
            }
        }
    }
    Ok(TrueAmpEstReport {
        estimate: InnerProductEstimate { re, im, norm },
        true_norm,
        exact_success_prob: success.min(1.0),
        m,
        repetitions: r,
        re_samples: samples[0].clone(),
        im_samples: samples[1].clone(),
        a_calls,
    })
}
