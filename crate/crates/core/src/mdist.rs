//! Simultaneous amplitude estimation for a family of preparations that all
//! share one inner oracle.
//!
//! Each member is A_y = U_{k,y} O U_{k-1,y} … O U_{0,y}. The branch-controlled
//! preparation V = U'_k (I⊗O) … (I⊗O) U'_0 with U'_j = Σ_y |y⟩⟨y| ⊗ U_{j,y}
//! calls O only k times, whatever the number of members, and so does each
//! Grover step of the estimator.

use crate::amp_est::{estimate_phase, ControlledPowers, GroverIterator};
use crate::error::{Error, Result};
use crate::sim::{
    BranchControlled, Controls, CountedOracle, Gate, LedgerSnapshot, Op, Register, RegisterLayout, Sequence,
    StateVector, Unitary,
};
use serde::Serialize;
use std::sync::Arc;

/// Direction of one inner-oracle slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Slot {
    Forward,
    Inverse,
}

/// One step of a member's circuit.
#[derive(Clone)]
pub enum Step {
    Gate(Op),
    Oracle,
    OracleInverse,
}

/// Per-branch good states: basis states with `work & mask == values[y]`.
#[derive(Clone, Debug)]
pub struct GoodStates {
    pub mask: usize,
    pub values: Vec<usize>,
}

#[derive(Clone)]
pub struct PrepFamily {
    index: Register,
    work: Register,
    layers: Vec<Op>,
    slots: Vec<Slot>,
    oracle: CountedOracle,
    good: GoodStates,
    members: usize,
}

impl PrepFamily {
    /// A family given directly by its k+1 oracle-free branch-controlled
    /// layers and its k oracle slots.
    pub fn new(
        index: Register,
        work: Register,
        layers: Vec<Op>,
        slots: Vec<Slot>,
        oracle: CountedOracle,
        good: GoodStates,
        members: usize,
    ) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::InvalidParameter("a family needs at least one oracle call".into()));
        }
        if layers.len() != slots.len() + 1 {
            return Err(Error::DimensionMismatch { expected: slots.len() + 1, actual: layers.len() });
        }
        if members == 0 || members > index.dim() || good.values.len() != members {
            return Err(Error::InvalidParameter(format!(
                "{members} members with {} good-state entries for a {}-qubit index",
                good.values.len(),
                index.width
            )));
        }
        if index.overlaps(&work) {
            return Err(Error::RegisterOverlap);
        }
        if oracle.support() & !work.mask() != 0 {
            return Err(Error::RegisterMismatch("inner oracle must act inside the work register".into()));
        }
        if good.mask & !work.mask() != 0 || good.values.iter().any(|v| v & !good.mask != 0) {
            return Err(Error::RegisterMismatch("good states must be patterns on the work register".into()));
        }
        for l in &layers {
            if l.support() & !(work.mask() | index.mask()) != 0 {
                return Err(Error::RegisterMismatch("layers must act on the index and work registers".into()));
            }
        }
        Ok(PrepFamily { index, work, layers, slots, oracle, good, members })
    }

    /// Builds the family from per-member step lists. The longest member fixes
    /// the slot pattern; a shorter member keeps its own calls in order and
    /// fills each remaining pair of adjacent slots with O·O† (or O†·O), which
    /// cancel.
    pub fn from_members(
        index: Register,
        work: Register,
        oracle: CountedOracle,
        members: Vec<Vec<Step>>,
        good: GoodStates,
    ) -> Result<Self> {
        let split = |m: Vec<Step>| {
            let mut pattern = Vec::new();
            let mut g: Vec<Vec<Op>> = vec![Vec::new()];
            for s in m {
                match s {
                    Step::Gate(op) => g.last_mut().expect("nonempty").push(op),
                    Step::Oracle | Step::OracleInverse => {
                        pattern.push(if matches!(s, Step::Oracle) { Slot::Forward } else { Slot::Inverse });
                        g.push(Vec::new());
                    }
                }
            }
            (pattern, g)
        };
        let n = members.len();
        let parts: Vec<(Vec<Slot>, Vec<Vec<Op>>)> = members.into_iter().map(split).collect();
        let k = parts.iter().map(|p| p.0.len()).max().unwrap_or(0);
        let slots = parts.iter().find(|p| p.0.len() == k).map(|p| p.0.clone()).unwrap_or_default();
        let mut groups: Vec<Vec<Vec<Op>>> = Vec::with_capacity(n);
        for (pattern, g) in parts {
            if pattern.len() == k {
                if pattern != slots {
                    return Err(Error::InvalidParameter("members disagree on the order of O and O† calls".into()));
                }
                groups.push(g);
                continue;
            }
            let matched = align_slots(&pattern, &slots).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "a member with {} oracle calls cannot be padded to the {k}-call pattern with cancelling pairs",
                    pattern.len()
                ))
            })?;
            // gate groups sit between slots; padded slots get empty groups
            let mut padded: Vec<Vec<Op>> = vec![Vec::new(); k + 1];
            let mut own = g.into_iter();
            padded[0] = own.next().unwrap_or_default();
            for (i, &pos) in matched.iter().enumerate() {
                debug_assert!(i < pattern.len());
                padded[pos + 1] = own.next().unwrap_or_default();
            }
            groups.push(padded);
        }
        let mut layers = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let per_member: Vec<Op> = groups.iter().map(|g| Arc::new(Sequence(g[j].clone())) as Op).collect();
            layers.push(Arc::new(BranchControlled::new(index.clone(), per_member)?) as Op);
        }
        PrepFamily::new(index, work, layers, slots, oracle, good, n)
    }

    /// Oracle calls per member.
    pub fn k(&self) -> usize {
        self.slots.len()
    }

    pub fn members(&self) -> usize {
        self.members
    }

    pub fn index(&self) -> &Register {
        &self.index
    }

    pub fn work(&self) -> &Register {
        &self.work
    }

    pub fn oracle(&self) -> &CountedOracle {
        &self.oracle
    }
}

/// Positions in `target` for each slot of `own`, in order, such that the
/// unused positions split into adjacent opposite-direction pairs with no
/// used position between them.
fn align_slots(own: &[Slot], target: &[Slot]) -> Option<Vec<usize>> {
    fn go(own: &[Slot], target: &[Slot], i: usize, j: usize, out: &mut Vec<usize>) -> bool {
        if i == own.len() && j == target.len() {
            return true;
        }
        if j == target.len() {
            return false;
        }
        if i < own.len() && own[i] == target[j] {
            out.push(j);
            if go(own, target, i + 1, j + 1, out) {
                return true;
            }
            out.pop();
        }
        j + 1 < target.len() && target[j] != target[j + 1] && go(own, target, i, j + 2, out)
    }
    let mut out = Vec::with_capacity(own.len());
    go(own, target, 0, 0, &mut out).then_some(out)
}

/// V = Σ_y |y⟩⟨y| ⊗ A_y, interleaving branch-controlled layers with
/// unconditional oracle calls.
#[derive(Clone)]
pub struct ControlledFamily {
    family: PrepFamily,
}

impl Unitary for ControlledFamily {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        let f = &self.family;
        for (j, layer) in f.layers.iter().enumerate() {
            layer.apply(state, ctl)?;
            if let Some(slot) = f.slots.get(j) {
                match slot {
                    Slot::Forward => f.oracle.apply(state, ctl)?,
                    Slot::Inverse => f.oracle.apply_adjoint(state, ctl)?,
                }
            }
        }
        Ok(())
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        let f = &self.family;
        for (j, layer) in f.layers.iter().enumerate().rev() {
            if let Some(slot) = f.slots.get(j) {
                match slot {
                    Slot::Forward => f.oracle.apply_adjoint(state, ctl)?,
                    Slot::Inverse => f.oracle.apply(state, ctl)?,
                }
            }
            layer.apply_adjoint(state, ctl)?;
        }
        Ok(())
    }
    fn support(&self) -> usize {
        self.family.index.mask() | self.family.work.mask()
    }
}

pub fn controlled_prep_family(family: &PrepFamily) -> ControlledFamily {
    ControlledFamily { family: family.clone() }
}

/// Σ_y |y⟩⟨y| ⊗ S_{γ_y}.
#[derive(Clone)]
pub struct FamilyMarker {
    index: Register,
    good: GoodStates,
}

impl Unitary for FamilyMarker {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        let g = &self.good;
        let index = &self.index;
        state.apply_phase_flip(ctl, |i| {
            let y = index.extract(i) as usize;
            y < g.values.len() && i & g.mask == g.values[y]
        })
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.apply(state, ctl)
    }
    fn support(&self) -> usize {
        self.index.mask() | self.good.mask
    }
}

pub fn family_marker(family: &PrepFamily) -> FamilyMarker {
    FamilyMarker { index: family.index.clone(), good: family.good.clone() }
}

/// The aggregated Grover iterator −V (I⊗S₀) V† M.
pub fn family_iterator(family: &PrepFamily) -> Result<GroverIterator> {
    GroverIterator::with_reflection(
        Arc::new(controlled_prep_family(family)),
        Arc::new(family_marker(family)),
        family.work.mask(),
    )
}

/// W = Σ_x |x⟩⟨x| ⊗ G^x for the aggregated iterator.
pub fn w_operator(family: &PrepFamily, est: &Register) -> Result<ControlledPowers> {
    ControlledPowers::new(est.clone(), Arc::new(family_iterator(family)?))
}

/// Oracle calls split between the preparation and the estimation stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MDistCalls {
    pub v: LedgerSnapshot,
    pub w: LedgerSnapshot,
}

impl MDistCalls {
    pub fn total(&self) -> u64 {
        self.v.total() + self.w.total()
    }
}

/// Applies V and then phase estimation of the aggregated iterator into the
/// zeroed register `est`. The work register must be zeroed.
pub fn mdist_amp_est_in_place(state: &mut StateVector, family: &PrepFamily, est: &Register) -> Result<MDistCalls> {
    state.check_register(&family.work)?;
    if state.weight_outside_zero(&family.work) > 1e-12 {
        return Err(Error::RegisterNotZeroed(family.work.name.clone()));
    }
    let t0 = family.oracle.snapshot();
    controlled_prep_family(family).apply(state, Controls::NONE)?;
    let t1 = family.oracle.snapshot();
    estimate_phase(state, est, &family_iterator(family)?)?;
    let t2 = family.oracle.snapshot();
    Ok(MDistCalls { v: t1.since(&t0), w: t2.since(&t1) })
}

#[derive(Clone, Debug)]
pub struct MDistResult {
    pub state: StateVector,
    pub layout: RegisterLayout,
    pub m: usize,
    pub k: usize,
    pub members: usize,
    pub calls: MDistCalls,
    /// Raw estimation outcome distribution conditioned on each index value.
    pub branch_distributions: Vec<Vec<f64>>,
}

/// Standalone run: the index register starts in uniform superposition over
/// the members, the estimation register of width `m` sits on top.
pub fn mdist_amp_est(family: &PrepFamily, m: usize) -> Result<MDistResult> {
    crate::amp_est::AEConfig::new(m)?;
    let top = family.index.end().max(family.work.end());
    let mut layout = RegisterLayout::new();
    layout.push("family", top)?;
    let est = layout.push("estimation", m)?;
    let mut state = StateVector::new(layout.width())?;
    let amps: Vec<_> = (0..family.index.dim())
        .map(|y| crate::sim::C64::new(if y < family.members { 1.0 / (family.members as f64).sqrt() } else { 0.0 }, 0.0))
        .collect();
    crate::sim::StatePrep::new(family.index.clone(), &amps)?.apply(&mut state, Controls::NONE)?;
    let calls = mdist_amp_est_in_place(&mut state, family, &est)?;
    let joint = state.joint_distribution(&family.index, &est)?;
    let branch_distributions = joint
        .into_iter()
        .take(family.members)
        .map(|row| {
            let t: f64 = row.iter().sum();
            row.into_iter().map(|p| if t > 0.0 { p / t } else { 0.0 }).collect()
        })
        .collect();
    Ok(MDistResult { state, layout, m, k: family.k(), members: family.members, calls, branch_distributions })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub oracle_calls: u64,
    pub v_calls: u64,
    pub w_calls: u64,
    /// 2^{m+2}·k, the estimation-stage budget.
    pub w_bound: u64,
    /// Estimation budget plus the k calls of the initial preparation.
    pub bound: u64,
    pub within_budget: bool,
}

pub fn audit_query_count(result: &MDistResult) -> AuditReport {
    audit_calls(&result.calls, result.m, result.k)
}

pub fn audit_calls(calls: &MDistCalls, m: usize, k: usize) -> AuditReport {
    let w_bound = (1u64 << (m + 2)) * k as u64;
    let bound = w_bound + k as u64;
    let oracle_calls = calls.total();
    AuditReport {
        oracle_calls,
        v_calls: calls.v.total(),
        w_calls: calls.w.total(),
        w_bound,
        bound,
        within_budget: calls.w.total() <= w_bound && oracle_calls <= bound,
    }
}

/// A small family for audits and tests: member y rotates the first work qubit
/// by a y-dependent angle, calls O, and rotates again; O is a fixed rotation
/// of the whole work register. The good state of member y is work = y mod 2^l.
pub fn demo_family(index_width: usize, work_width: usize, members: usize, k: usize) -> Result<PrepFamily> {
    let mut layout = RegisterLayout::new();
    let index = layout.push("index", index_width)?;
    let work = layout.push("work", work_width)?;
    let w2 = work.clone();
    let source = crate::sim::Relocatable::new(work_width, move |off| {
        let mut seq = Sequence::new();
        for q in 0..w2.width {
            seq.push(Gate::ry(off + q, 0.7 + 0.3 * q as f64));
        }
        if w2.width > 1 {
            seq.push(Gate::swap(off, off + 1));
        }
        Ok(Arc::new(seq) as Op)
    });
    let oracle = CountedOracle::new("inner", source)?.at(work.offset)?;
    let mut ms = Vec::with_capacity(members);
    for y in 0..members {
        let mut steps = Vec::new();
        for j in 0..k {
            steps.push(Step::Gate(Arc::new(Gate::ry(work.qubit(0), 0.4 + 0.37 * y as f64 + 0.11 * j as f64))));
            steps.push(Step::Oracle);
        }
        steps.push(Step::Gate(Arc::new(Gate::rz(work.qubit(0), 0.9 + 0.21 * y as f64))));
        ms.push(steps);
    }
    let values = (0..members).map(|y| (y % work.dim()) << work.offset).collect();
    PrepFamily::from_members(index, work.clone(), oracle, ms, GoodStates { mask: work.mask(), values })
}
