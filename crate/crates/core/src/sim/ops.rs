use super::controls::Controls;
use super::layout::Register;
use super::state::{StateVector, C64};
use crate::error::{Error, Result};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::Arc;

/// A unitary procedure bound to absolute qubit positions.
///
/// Every implementation must honour `ctl`: amplitudes whose index does not
/// satisfy the condition are left untouched.
pub trait Unitary: Send + Sync {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()>;
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()>;
    /// Bitmask of every qubit the procedure reads or writes.
    fn support(&self) -> usize;
}

pub type Op = Arc<dyn Unitary>;

impl fmt::Debug for dyn Unitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unitary(support={:#b})", self.support())
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense gate on at most three qubits.
#[derive(Clone, Debug)]
pub struct Gate {
    targets: Vec<usize>,
    matrix: Vec<C64>,
}

impl Gate {
    pub fn dense(targets: Vec<usize>, matrix: Vec<C64>) -> Result<Self> {
        let k = targets.len();
        if k == 0 || k > 3 {
            return Err(Error::InvalidParameter(format!("dense gates act on 1..=3 qubits, got {k}")));
        }
        let dim = 1 << k;
        if matrix.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, actual: matrix.len() });
        }
        for (i, &q) in targets.iter().enumerate() {
            if targets[..i].contains(&q) {
                return Err(Error::DuplicateTarget(q));
            }
        }
        for r in 0..dim {
            for s in 0..dim {
                let dot: C64 = (0..dim).map(|j| matrix[r * dim + j] * matrix[s * dim + j].conj()).sum();
                let want = if r == s { 1.0 } else { 0.0 };
                if (dot - c(want, 0.0)).norm() > 1e-9 {
                    return Err(Error::NotUnitary);
                }
            }
        }
        Ok(Gate { targets, matrix })
    }

    fn single(q: usize, m: [C64; 4]) -> Self {
        Gate { targets: vec![q], matrix: m.to_vec() }
    }

    pub fn h(q: usize) -> Self {
        let s = c(FRAC_1_SQRT_2, 0.0);
        Self::single(q, [s, s, s, -s])
    }
    pub fn x(q: usize) -> Self {
        Self::single(q, [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }
    pub fn y(q: usize) -> Self {
        Self::single(q, [c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
    }
    pub fn z(q: usize) -> Self {
        Self::single(q, [c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }
    pub fn s(q: usize) -> Self {
        Self::phase(q, std::f64::consts::FRAC_PI_2)
    }
    pub fn sdg(q: usize) -> Self {
        Self::phase(q, -std::f64::consts::FRAC_PI_2)
    }
    /// diag(1, e^{iφ}).
    pub fn phase(q: usize, phi: f64) -> Self {
        Self::single(q, [c(1., 0.), c(0., 0.), c(0., 0.), C64::from_polar(1.0, phi)])
    }
    /// Rotation about Y: |0⟩ → cos(θ/2)|0⟩ + sin(θ/2)|1⟩.
    pub fn ry(q: usize, theta: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        Self::single(q, [c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.)])
    }
    pub fn rz(q: usize, theta: f64) -> Self {
        Self::single(
            q,
            [C64::from_polar(1.0, -theta / 2.0), c(0., 0.), c(0., 0.), C64::from_polar(1.0, theta / 2.0)],
        )
    }
    pub fn swap(a: usize, b: usize) -> Self {
        let o = c(0., 0.);
        let l = c(1., 0.);
        Gate {
            targets: vec![a, b],
            matrix: vec![l, o, o, o, o, o, l, o, o, l, o, o, o, o, o, l],
        }
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    fn adjoint_matrix(&self) -> Vec<C64> {
        let dim = 1 << self.targets.len();
        let mut out = vec![c(0., 0.); dim * dim];
        for r in 0..dim {
            for s in 0..dim {
                out[s * dim + r] = self.matrix[r * dim + s].conj();
            }
        }
        out
    }
}

impl Unitary for Gate {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        state.apply_dense(&self.targets, &self.matrix, ctl)
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        state.apply_dense(&self.targets, &self.adjoint_matrix(), ctl)
    }
    fn support(&self) -> usize {
        self.targets.iter().map(|q| 1usize << q).sum()
    }
}

/// Applies a gate to explicit target qubits.
pub fn apply_gate(state: &mut StateVector, gate: &Gate) -> Result<()> {
    gate.apply(state, Controls::NONE)
}

/// Ops applied left to right.
#[derive(Clone, Default)]
pub struct Sequence(pub Vec<Op>);

impl Sequence {
    pub fn new() -> Self {
        Sequence(Vec::new())
    }
    pub fn push(&mut self, op: impl Unitary + 'static) {
        self.0.push(Arc::new(op));
    }
    pub fn push_op(&mut self, op: Op) {
        self.0.push(op);
    }
}

impl Unitary for Sequence {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        for op in &self.0 {
            op.apply(state, ctl)?;
        }
        Ok(())
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        for op in self.0.iter().rev() {
            op.apply_adjoint(state, ctl)?;
        }
        Ok(())
    }
    fn support(&self) -> usize {
        self.0.iter().fold(0, |m, op| m | op.support())
    }
}

/// The inverse of an op.
#[derive(Clone)]
pub struct Adjoint(pub Op);

impl Unitary for Adjoint {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.0.apply_adjoint(state, ctl)
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.0.apply(state, ctl)
    }
    fn support(&self) -> usize {
        self.0.support()
    }
}

/// An op conditioned on a basis value of some control qubits.
#[derive(Clone)]
pub struct Controlled {
    pub ctl: Controls,
    pub body: Op,
}

impl Controlled {
    pub fn new(ctl: Controls, body: Op) -> Result<Self> {
        if ctl.mask & body.support() != 0 {
            return Err(Error::RegisterOverlap);
        }
        Ok(Controlled { ctl, body })
    }
}

impl Unitary for Controlled {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.body.apply(state, ctl.and(self.ctl))
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.body.apply_adjoint(state, ctl.and(self.ctl))
    }
    fn support(&self) -> usize {
        self.body.support() | self.ctl.mask
    }
}

/// Applies `body` on every branch where `pred(control value)` holds.
///
/// Branches are disjoint, so this equals Σ_v |v⟩⟨v| ⊗ (body if pred(v) else I).
/// A counted body is charged once per satisfying branch.
pub fn apply_controlled(
    state: &mut StateVector,
    control: &Register,
    pred: impl Fn(u64) -> bool,
    body: &dyn Unitary,
) -> Result<()> {
    state.check_register(control)?;
    if control.mask() & body.support() != 0 {
        return Err(Error::RegisterOverlap);
    }
    for v in 0..control.dim() as u64 {
        if pred(v) {
            body.apply(state, Controls::register(control, v))?;
        }
    }
    Ok(())
}

/// Σ_y |y⟩⟨y| ⊗ U_y for y ranging over the values of `index`; values past the
/// member list act as identity.
#[derive(Clone)]
pub struct BranchControlled {
    index: Register,
    members: Vec<Op>,
}

impl BranchControlled {
    pub fn new(index: Register, members: Vec<Op>) -> Result<Self> {
        if members.len() > index.dim() {
            return Err(Error::DimensionMismatch { expected: index.dim(), actual: members.len() });
        }
        for m in &members {
            if m.support() & index.mask() != 0 {
                return Err(Error::RegisterOverlap);
            }
        }
        Ok(BranchControlled { index, members })
    }
}

impl Unitary for BranchControlled {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        for (y, m) in self.members.iter().enumerate() {
            m.apply(state, ctl.and(Controls::register(&self.index, y as u64)))?;
        }
        Ok(())
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        for (y, m) in self.members.iter().enumerate() {
            m.apply_adjoint(state, ctl.and(Controls::register(&self.index, y as u64)))?;
        }
        Ok(())
    }
    fn support(&self) -> usize {
        self.members.iter().fold(self.index.mask(), |s, m| s | m.support())
    }
}

/// Multiplies the (controlled) state by a constant phase.
#[derive(Clone, Copy, Debug)]
pub struct GlobalPhase(pub C64);

impl Unitary for GlobalPhase {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        let p = self.0;
        state.apply_diagonal(ctl, |_| p)
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        let p = self.0.conj();
        state.apply_diagonal(ctl, |_| p)
    }
    fn support(&self) -> usize {
        0
    }
}

/// −1 on basis states with `index & mask == value`. With `value = 0` over a
/// block this is the zero reflection I − 2|0⟩⟨0|.
#[derive(Clone, Copy, Debug)]
pub struct PhaseFlip {
    pub mask: usize,
    pub value: usize,
}

impl PhaseFlip {
    pub fn zero(mask: usize) -> Self {
        PhaseFlip { mask, value: 0 }
    }
    pub fn on_value(reg: &Register, value: u64) -> Self {
        PhaseFlip { mask: reg.mask(), value: (value as usize) << reg.offset }
    }
}

impl Unitary for PhaseFlip {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        state.check_mask(self.mask)?;
        let (m, v) = (self.mask, self.value);
        state.apply_phase_flip(ctl, |i| i & m == v)
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.apply(state, ctl)
    }
    fn support(&self) -> usize {
        self.mask
    }
}

/// Multiplies amplitude `i` by `e^{i·f(i)}` on a declared support.
#[derive(Clone)]
pub struct DiagonalPhase {
    support: usize,
    angle: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl DiagonalPhase {
    pub fn new(support: usize, angle: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        DiagonalPhase { support, angle: Arc::new(angle) }
    }
}

impl Unitary for DiagonalPhase {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        state.check_mask(self.support)?;
        state.apply_diagonal(ctl, |i| C64::from_polar(1.0, (self.angle)(i)))
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        state.check_mask(self.support)?;
        state.apply_diagonal(ctl, |i| C64::from_polar(1.0, -(self.angle)(i)))
    }
    fn support(&self) -> usize {
        self.support
    }
}

/// A self-inverse basis permutation `|i⟩ → |f(i)⟩` touching only `support`.
#[derive(Clone)]
pub struct Involution {
    support: usize,
    map: Arc<dyn Fn(usize) -> usize + Send + Sync>,
}

impl Involution {
    pub fn new(support: usize, map: impl Fn(usize) -> usize + Send + Sync + 'static) -> Self {
        Involution { support, map: Arc::new(map) }
    }
}

impl Unitary for Involution {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        state.check_mask(self.support)?;
        if ctl.mask & self.support != 0 {
            return Err(Error::RegisterOverlap);
        }
        state.apply_involution(ctl, |i| (self.map)(i))
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.apply(state, ctl)
    }
    fn support(&self) -> usize {
        self.support
    }
}

/// Householder state preparation: maps |0⟩ of `reg` to `target` exactly,
/// including its global phase, using O(2^w) memory.
#[derive(Clone, Debug)]
pub struct StatePrep {
    reg: Register,
    phase: C64,
    /// Unit reflection vector, or `None` when the target is a phase times |0⟩.
    u: Option<Vec<C64>>,
}

impl StatePrep {
    pub fn new(reg: Register, target: &[C64]) -> Result<Self> {
        if target.len() != reg.dim() {
            return Err(Error::DimensionMismatch { expected: reg.dim(), actual: target.len() });
        }
        let n: f64 = target.iter().map(|a| a.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(n));
        }
        let phase = if target[0].norm() > 0.0 { target[0] / target[0].norm() } else { c(1., 0.) };
        let mut v: Vec<C64> = target.iter().map(|a| -a).collect();
        v[0] += phase;
        let vn: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let u = if vn < 1e-12 {
            None
        } else {
            Some(v.into_iter().map(|a| a / vn).collect())
        };
        Ok(StatePrep { reg, phase, u })
    }

    fn run(&self, state: &mut StateVector, ctl: Controls, phase: C64) -> Result<()> {
        state.check_register(&self.reg)?;
        state.check_mask(ctl.mask)?;
        if ctl.mask & self.reg.mask() != 0 {
            return Err(Error::RegisterOverlap);
        }
        let u = match &self.u {
            None => return state.apply_diagonal(ctl, |_| phase),
            Some(u) => u,
        };
        let rmask = self.reg.mask();
        let off = self.reg.offset;
        let dim = self.reg.dim();
        let amps = state.amplitudes_mut();
        let mut buf = vec![c(0., 0.); dim];
        for base in 0..amps.len() {
            if base & rmask != 0 || !ctl.matches(base) {
                continue;
            }
            let mut s = c(0., 0.);
            for (j, b) in buf.iter_mut().enumerate() {
                *b = amps[base | (j << off)];
                s += u[j].conj() * *b;
            }
            for (j, b) in buf.iter().enumerate() {
                amps[base | (j << off)] = phase * (b - 2.0 * s * u[j]);
            }
        }
        Ok(())
    }
}

impl Unitary for StatePrep {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.run(state, ctl, self.phase)
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.run(state, ctl, self.phase.conj())
    }
    fn support(&self) -> usize {
        self.reg.mask()
    }
}

/// Applies `op` to a copy of `state` and returns it.
pub fn applied(state: &StateVector, op: &dyn Unitary) -> Result<StateVector> {
    let mut s = state.clone();
    op.apply(&mut s, Controls::NONE)?;
    Ok(s)
}
