//! Reversible comparison gadgets. Each is a direct basis permutation or
//! phase, so it composes with controls and inverts exactly.

use crate::error::{Error, Result};
use crate::sim::{Controls, Register, StateVector, Unitary};

fn xor_bit(i: usize, q: usize, bit: bool) -> usize {
    if bit {
        i ^ (1 << q)
    } else {
        i
    }
}

/// Phase −1 on basis states whose two registers agree on their top `m` qubits.
#[derive(Clone, Debug)]
pub struct EqPrefixPhase {
    a: Register,
    b: Register,
    m: usize,
}

impl EqPrefixPhase {
    pub fn new(a: Register, b: Register, m: usize) -> Result<Self> {
        if m > a.width || m > b.width {
            return Err(Error::RegisterMismatch(format!(
                "prefix length {m} exceeds register widths {} and {}",
                a.width, b.width
            )));
        }
        if a.overlaps(&b) {
            return Err(Error::RegisterOverlap);
        }
        Ok(EqPrefixPhase { a, b, m })
    }

    fn equal(&self, i: usize) -> bool {
        let pa = self.a.extract(i) >> (self.a.width - self.m);
        let pb = self.b.extract(i) >> (self.b.width - self.m);
        pa == pb
    }
}

impl Unitary for EqPrefixPhase {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        state.check_register(&self.a)?;
        state.check_register(&self.b)?;
        state.apply_phase_flip(ctl, |i| self.equal(i))
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.apply(state, ctl)
    }
    fn support(&self) -> usize {
        self.a.mask() | self.b.mask()
    }
}

/// `|y⟩|b⟩ → |y⟩|b ⊕ |2^{l-1} − y|⟩` for an `l`-qubit `y`.
#[derive(Clone, Debug)]
pub struct HalfDistance {
    y: Register,
    out: Register,
}

/// |2^{l-1} − y|, the distance of `y` from the half-way point of an `l`-bit range.
pub fn half_distance_value(y: u64, l: usize) -> u64 {
    let half = 1u64 << (l - 1);
    half.abs_diff(y)
}

impl HalfDistance {
    pub fn new(y: Register, out: Register) -> Result<Self> {
        if y.width == 0 || out.width < y.width {
            return Err(Error::RegisterMismatch(format!(
                "half-distance needs an output of at least {} qubits, got {}",
                y.width, out.width
            )));
        }
        if y.overlaps(&out) {
            return Err(Error::RegisterOverlap);
        }
        Ok(HalfDistance { y, out })
    }
}

impl Unitary for HalfDistance {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        state.check_register(&self.y)?;
        state.check_register(&self.out)?;
        if ctl.mask & self.support() != 0 {
            return Err(Error::RegisterOverlap);
        }
        let l = self.y.width;
        state.apply_involution(ctl, |i| {
            let d = half_distance_value(self.y.extract(i), l);
            self.out.insert(i, self.out.extract(i) ^ d)
        })
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.apply(state, ctl)
    }
    fn support(&self) -> usize {
        self.y.mask() | self.out.mask()
    }
}

/// `flag ⊕= [y2 ≤ y1]`.
#[derive(Clone, Debug)]
pub struct CompareMark {
    y1: Register,
    y2: Register,
    flag: usize,
}

impl CompareMark {
    pub fn new(y1: Register, y2: Register, flag: usize) -> Result<Self> {
        if y1.width != y2.width {
            return Err(Error::RegisterMismatch(format!(
                "compared registers have widths {} and {}",
                y1.width, y2.width
            )));
        }
        if y1.overlaps(&y2) || (y1.mask() | y2.mask()) & (1 << flag) != 0 {
            return Err(Error::RegisterOverlap);
        }
        Ok(CompareMark { y1, y2, flag })
    }
}

impl Unitary for CompareMark {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        state.check_register(&self.y1)?;
        state.check_register(&self.y2)?;
        state.check_mask(1 << self.flag)?;
        if ctl.mask & self.support() != 0 {
            return Err(Error::RegisterOverlap);
        }
        state.apply_involution(ctl, |i| xor_bit(i, self.flag, self.y2.extract(i) <= self.y1.extract(i)))
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.apply(state, ctl)
    }
    fn support(&self) -> usize {
        self.y1.mask() | self.y2.mask() | (1 << self.flag)
    }
}

/// Majority of `bits` XORed into `out`; a tie counts as 1.
///
/// The control register only labels branches: every branch receives the
/// same majority map, so the operator equals I ⊗ MAJ.
#[derive(Clone, Debug)]
pub struct CondMajority {
    control: Option<Register>,
    bits: Vec<usize>,
    out: usize,
}

/// Whether `ones` out of `k` bits form a majority.
pub fn is_majority(ones: usize, k: usize) -> bool {
    2 * ones >= k
}

impl CondMajority {
    pub fn new(control: Option<Register>, bits: Vec<usize>, out: usize) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidParameter("majority over zero bits".into()));
        }
        let mut mask = 0usize;
        for &b in &bits {
            if mask & (1 << b) != 0 {
                return Err(Error::DuplicateTarget(b));
            }
            mask |= 1 << b;
        }
        if mask & (1 << out) != 0 {
            return Err(Error::RegisterOverlap);
        }
        if let Some(c) = &control {
            if c.mask() & (mask | 1 << out) != 0 {
                return Err(Error::RegisterOverlap);
            }
        }
        Ok(CondMajority { control, bits, out })
    }

    fn bits_mask(&self) -> usize {
        self.bits.iter().map(|b| 1usize << b).sum()
    }
}

impl Unitary for CondMajority {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        state.check_mask(self.support())?;
        if ctl.mask & (self.bits_mask() | 1 << self.out) != 0 {
            return Err(Error::RegisterOverlap);
        }
        let bm = self.bits_mask();
        let k = self.bits.len();
        state.apply_involution(ctl, |i| xor_bit(i, self.out, is_majority((i & bm).count_ones() as usize, k)))
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.apply(state, ctl)
    }
    fn support(&self) -> usize {
        self.bits_mask() | (1 << self.out) | self.control.as_ref().map_or(0, |c| c.mask())
    }
}

pub fn eq_prefix_phase(state: &mut StateVector, a: &Register, b: &Register, m: usize) -> Result<()> {
    EqPrefixPhase::new(a.clone(), b.clone(), m)?.apply(state, Controls::NONE)
}

pub fn half_distance(state: &mut StateVector, y: &Register, out: &Register) -> Result<()> {
    HalfDistance::new(y.clone(), out.clone())?.apply(state, Controls::NONE)
}

pub fn compare_mark(state: &mut StateVector, y1: &Register, y2: &Register, flag: usize) -> Result<()> {
    CompareMark::new(y1.clone(), y2.clone(), flag)?.apply(state, Controls::NONE)
}

pub fn cond_majority(state: &mut StateVector, control: Option<&Register>, bits: &[usize], out: usize) -> Result<()> {
    CondMajority::new(control.cloned(), bits.to_vec(), out)?.apply(state, Controls::NONE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RegisterLayout;

    #[test]
    fn eq_prefix_examples() {
        let mut lay = RegisterLayout::new();
        let a = lay.push("a", 3).unwrap();
        let b = lay.push("b", 3).unwrap();
        let idx = |x: usize, y: usize| x | y << 3;
        for (x, y, m, flip) in [(0b101, 0b101, 3, true), (0b101, 0b100, 3, false), (0b101, 0b100, 2, true)] {
            let mut s = StateVector::basis(6, idx(x, y)).unwrap();
            eq_prefix_phase(&mut s, &a, &b, m).unwrap();
            let want = if flip { -1.0 } else { 1.0 };
            assert_eq!(s.amplitude(idx(x, y)).re, want);
        }
    }

    #[test]
    fn half_distance_example() {
        let mut lay = RegisterLayout::new();
        let y = lay.push("y", 3).unwrap();
        let b = lay.push("b", 3).unwrap();
        let mut s = StateVector::basis(6, 7).unwrap();
        half_distance(&mut s, &y, &b).unwrap();
        assert_eq!(s.probability(7 | 3 << 3), 1.0);
    }

    #[test]
    fn majority_tie_counts_as_one() {
        assert!(is_majority(2, 4));
        assert!(!is_majority(1, 4));
        assert!(is_majority(2, 3));
        assert!(!is_majority(1, 3));
    }
}
