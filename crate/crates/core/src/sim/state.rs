use super::controls::Controls;
use super::layout::Register;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

/// Hard cap on simulated width.
pub const MAX_QUBITS: usize = 28;
/// Tolerance for comparing states.
pub const STATE_TOLERANCE: f64 = 1e-9;
/// Norm drift that triggers renormalization.
pub const DRIFT_TOLERANCE: f64 = 1e-12;

pub type C64 = Complex64;

/// Dense amplitude vector over `width` qubits, little-endian in qubit order.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    width: usize,
    amps: Vec<C64>,
}

pub(crate) fn check_width(width: usize) -> Result<()> {
    if width > MAX_QUBITS {
        return Err(Error::WidthBudgetExceeded { requested: width, cap: MAX_QUBITS });
    }
    Ok(())
}

impl StateVector {
    /// |0…0⟩ on `width` qubits.
    pub fn new(width: usize) -> Result<Self> {
        Self::basis(width, 0)
    }

    pub fn basis(width: usize, index: usize) -> Result<Self> {
        check_width(width)?;
        let len = 1usize << width;
        if index >= len {
            return Err(Error::ValueOutOfRange { value: index as u64, width });
        }
        let mut amps = vec![C64::new(0.0, 0.0); len];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { width, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch { expected: len.next_power_of_two().max(1), actual: len });
        }
        let width = len.trailing_zeros() as usize;
        check_width(width)?;
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (n - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::NotNormalized(n));
        }
        Ok(StateVector { width, amps })
    }

    /// Wraps amplitudes without the normalization check; used for slices of
    /// larger states.
    pub(crate) fn from_raw(width: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << width);
        StateVector { width, amps }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm when drift exceeds [`DRIFT_TOLERANCE`].
    pub fn renormalize(&mut self) {
        let n = self.norm_sqr();
        if n > 0.0 && (n - 1.0).abs() > DRIFT_TOLERANCE {
            let s = 1.0 / n.sqrt();
            for a in &mut self.amps {
                *a *= s;
            }
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.width != other.width {
            return Err(Error::DimensionMismatch { expected: self.len(), actual: other.len() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Largest entrywise difference.
    pub fn max_distance(&self, other: &StateVector) -> f64 {
        if self.width != other.width {
            return f64::INFINITY;
        }
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.max_distance(other) <= tol
    }

    pub(crate) fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.width {
            return Err(Error::QubitOutOfRange { qubit: q, width: self.width });
        }
        Ok(())
    }

    pub(crate) fn check_mask(&self, mask: usize) -> Result<()> {
        if self.width < usize::BITS as usize && mask >> self.width != 0 {
            let q = (usize::BITS - mask.leading_zeros() - 1) as usize;
            return Err(Error::QubitOutOfRange { qubit: q, width: self.width });
        }
        Ok(())
    }

    pub(crate) fn check_register(&self, reg: &Register) -> Result<()> {
        if reg.end() > self.width {
            return Err(Error::QubitOutOfRange { qubit: reg.end() - 1, width: self.width });
        }
        Ok(())
    }

    /// Applies a 2×2 matrix (row-major) to `target` where `ctl` holds.
    pub fn apply_1q(&mut self, target: usize, m: &[C64; 4], ctl: Controls) -> Result<()> {
        self.check_qubit(target)?;
        self.check_mask(ctl.mask)?;
        let t = 1usize << target;
        if ctl.mask & t != 0 {
            return Err(Error::RegisterOverlap);
        }
        let len = self.amps.len();
        let mut i = 0;
        while i < len {
            if i & t != 0 {
                i += t;
                continue;
            }
            if ctl.matches(i) {
                let a = self.amps[i];
                let b = self.amps[i | t];
                self.amps[i] = m[0] * a + m[1] * b;
                self.amps[i | t] = m[2] * a + m[3] * b;
            }
            i += 1;
        }
        Ok(())
    }

    /// Applies a dense `2^k × 2^k` matrix (row-major) to `targets`, where
    /// `targets[0]` is the least significant bit of the local index.
    pub fn apply_dense(&mut self, targets: &[usize], m: &[C64], ctl: Controls) -> Result<()> {
        let k = targets.len();
        let dim = 1usize << k;
        if m.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, actual: m.len() });
        }
        let mut tmask = 0usize;
        for &q in targets {
            self.check_qubit(q)?;
            if tmask & (1 << q) != 0 {
                return Err(Error::DuplicateTarget(q));
            }
            tmask |= 1 << q;
        }
        self.check_mask(ctl.mask)?;
        if ctl.mask & tmask != 0 {
            return Err(Error::RegisterOverlap);
        }
        if k == 1 {
            let mm = [m[0], m[1], m[2], m[3]];
            return self.apply_1q(targets[0], &mm, ctl);
        }
        let offsets: Vec<usize> = (0..dim)
            .map(|local| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| local >> b & 1 == 1)
                    .map(|(_, &q)| 1usize << q)
                    .sum()
            })
            .collect();
        let mut buf = vec![C64::new(0.0, 0.0); dim];
        for base in 0..self.amps.len() {
            if base & tmask != 0 || !ctl.matches(base) {
                continue;
            }
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = self.amps[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let row = &m[r * dim..(r + 1) * dim];
                self.amps[base | off] = row.iter().zip(&buf).map(|(x, y)| x * y).sum();
            }
        }
        Ok(())
    }

    /// Multiplies each amplitude satisfying `ctl` by `f(index)`.
    pub fn apply_diagonal(&mut self, ctl: Controls, f: impl Fn(usize) -> C64) -> Result<()> {
        self.check_mask(ctl.mask)?;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ctl.matches(i) {
                *a *= f(i);
            }
        }
        Ok(())
    }

    /// Negates amplitudes satisfying `ctl` whose index satisfies `pred`.
    pub fn apply_phase_flip(&mut self, ctl: Controls, pred: impl Fn(usize) -> bool) -> Result<()> {
        self.check_mask(ctl.mask)?;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ctl.matches(i) && pred(i) {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// Applies the basis permutation `|i⟩ → |f(i)⟩` on indices satisfying
    /// `ctl`. `f` must be an involution that preserves the control bits.
    pub fn apply_involution(&mut self, ctl: Controls, f: impl Fn(usize) -> usize) -> Result<()> {
        self.check_mask(ctl.mask)?;
        let len = self.amps.len();
        for i in 0..len {
            if !ctl.matches(i) {
                continue;
            }
            let j = f(i);
            debug_assert!(j < len && f(j) == i && ctl.matches(j), "not an involution on the controlled subspace");
            if j > i {
                self.amps.swap(i, j);
            }
        }
        Ok(())
    }

    /// Pr[register = value].
    pub fn marginal_probability(&self, reg: &Register, value: u64) -> Result<f64> {
        self.check_register(reg)?;
        reg.check_value(value)?;
        let ctl = Controls::register(reg, value);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| ctl.matches(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Outcome distribution of measuring `reg`, indexed by register value.
    pub fn outcome_distribution(&self, reg: &Register) -> Result<Vec<f64>> {
        self.check_register(reg)?;
        let mut out = vec![0.0; reg.dim()];
        for (i, a) in self.amps.iter().enumerate() {
            out[reg.extract(i) as usize] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Joint distribution of two registers, `out[a][b]`.
    pub fn joint_distribution(&self, a: &Register, b: &Register) -> Result<Vec<Vec<f64>>> {
        self.check_register(a)?;
        self.check_register(b)?;
        if a.overlaps(b) {
            return Err(Error::RegisterOverlap);
        }
        let mut out = vec![vec![0.0; b.dim()]; a.dim()];
        for (i, amp) in self.amps.iter().enumerate() {
            out[a.extract(i) as usize][b.extract(i) as usize] += amp.norm_sqr();
        }
        Ok(out)
    }

    /// Measures `reg`, returning the outcome and the collapsed state.
    pub fn measure<R: Rng + ?Sized>(&self, reg: &Register, rng: &mut R) -> Result<(u64, StateVector)> {
        let dist = self.outcome_distribution(reg)?;
        let value = sample_index(&dist, rng) as u64;
        let p = dist[value as usize];
        let s = 1.0 / p.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if reg.extract(i) == value { a * s } else { C64::new(0.0, 0.0) })
            .collect();
        Ok((value, StateVector { width: self.width, amps }))
    }

    /// Total probability of indices whose `reg` value is nonzero.
    pub fn weight_outside_zero(&self, reg: &Register) -> f64 {
        let m = reg.mask();
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & m != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Samples an index from a (possibly slightly unnormalized) distribution.
pub fn sample_index<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> usize {
    let total: f64 = dist.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &p) in dist.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = i;
        if u < p {
            return i;
        }
        u -= p;
    }
    last
}
