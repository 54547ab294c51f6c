use super::layout::Register;

/// A basis-value condition: an operation only acts on basis indices with
/// `index & mask == value`.
///
/// `tagged` marks an application that the surrounding circuit performs under
/// control even though the condition was already resolved, so ledgers still
/// charge it as a controlled call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Controls {
    pub mask: usize,
    pub value: usize,
    pub tagged: bool,
}

impl Controls {
    pub const NONE: Controls = Controls { mask: 0, value: 0, tagged: false };

    pub fn qubit(q: usize, bit: bool) -> Self {
        Controls { mask: 1 << q, value: (bit as usize) << q, tagged: false }
    }

    pub fn register(reg: &Register, value: u64) -> Self {
        Controls { mask: reg.mask(), value: (value as usize) << reg.offset, tagged: false }
    }

    /// Conjunction of two conditions. Conflicting requirements on the same
    /// qubit are a caller bug.
    pub fn and(self, other: Controls) -> Self {
        let shared = self.mask & other.mask;
        debug_assert_eq!(self.value & shared, other.value & shared, "conflicting controls");
        Controls {
            mask: self.mask | other.mask,
            value: self.value | other.value,
            tagged: self.tagged || other.tagged,
        }
    }

    pub fn tagged(mut self) -> Self {
        self.tagged = true;
        self
    }

    #[inline]
    pub fn matches(&self, index: usize) -> bool {
        index & self.mask == self.value
    }

    pub fn is_controlled(&self) -> bool {
        self.mask != 0 || self.tagged
    }
}
