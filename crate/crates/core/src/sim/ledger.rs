use super::controls::Controls;
use super::ops::{Op, Unitary};
use super::state::StateVector;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Monotone invocation counters, safe to share between threads.
#[derive(Debug, Default)]
pub struct Ledger {
    forward: AtomicU64,
    inverse: AtomicU64,
    controlled_forward: AtomicU64,
    controlled_inverse: AtomicU64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    pub forward: u64,
    pub inverse: u64,
    pub controlled_forward: u64,
    pub controlled_inverse: u64,
}

impl LedgerSnapshot {
    pub fn total(&self) -> u64 {
        self.forward + self.inverse + self.controlled_forward + self.controlled_inverse
    }

    pub fn all_forward(&self) -> u64 {
        self.forward + self.controlled_forward
    }

    pub fn all_inverse(&self) -> u64 {
        self.inverse + self.controlled_inverse
    }

    /// Counts accrued since `earlier`.
    pub fn since(&self, earlier: &LedgerSnapshot) -> LedgerSnapshot {
        LedgerSnapshot {
            forward: self.forward - earlier.forward,
            inverse: self.inverse - earlier.inverse,
            controlled_forward: self.controlled_forward - earlier.controlled_forward,
            controlled_inverse: self.controlled_inverse - earlier.controlled_inverse,
        }
    }

    pub fn scaled(&self, k: u64) -> LedgerSnapshot {
        LedgerSnapshot {
            forward: self.forward * k,
            inverse: self.inverse * k,
            controlled_forward: self.controlled_forward * k,
            controlled_inverse: self.controlled_inverse * k,
        }
    }

    /// The same calls with forward and inverse exchanged.
    pub fn inverted(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            forward: self.inverse,
            inverse: self.forward,
            controlled_forward: self.controlled_inverse,
            controlled_inverse: self.controlled_forward,
        }
    }
}

impl Add for LedgerSnapshot {
    type Output = LedgerSnapshot;
    fn add(self, o: LedgerSnapshot) -> LedgerSnapshot {
        LedgerSnapshot {
            forward: self.forward + o.forward,
            inverse: self.inverse + o.inverse,
            controlled_forward: self.controlled_forward + o.controlled_forward,
            controlled_inverse: self.controlled_inverse + o.controlled_inverse,
        }
    }
}

impl AddAssign for LedgerSnapshot {
    fn add_assign(&mut self, o: LedgerSnapshot) {
        *self = *self + o;
    }
}

impl Ledger {
    pub fn new() -> Arc<Ledger> {
        Arc::new(Ledger::default())
    }

    pub(crate) fn charge(&self, inverse: bool, controlled: bool) {
        let c = match (inverse, controlled) {
            (false, false) => &self.forward,
            (true, false) => &self.inverse,
            (false, true) => &self.controlled_forward,
            (true, true) => &self.controlled_inverse,
        };
        c.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            forward: self.forward.load(Ordering::Relaxed),
            inverse: self.inverse.load(Ordering::Relaxed),
            controlled_forward: self.controlled_forward.load(Ordering::Relaxed),
            controlled_inverse: self.controlled_inverse.load(Ordering::Relaxed),
        }
    }
}

type Builder = Arc<dyn Fn(usize) -> Result<Op> + Send + Sync>;

/// A `width`-qubit procedure that can be instantiated at any qubit offset.
#[derive(Clone)]
pub struct Relocatable {
    width: usize,
    build: Builder,
}

impl Relocatable {
    pub fn new(width: usize, build: impl Fn(usize) -> Result<Op> + Send + Sync + 'static) -> Self {
        Relocatable { width, build: Arc::new(build) }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn at(&self, offset: usize) -> Result<Op> {
        (self.build)(offset)
    }
}

impl fmt::Debug for Relocatable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Relocatable(width={})", self.width)
    }
}

/// A unitary bundled with a ledger that charges one call per application,
/// whatever the control context.
#[derive(Clone)]
pub struct CountedOracle {
    label: Arc<str>,
    source: Option<Relocatable>,
    offset: usize,
    action: Op,
    ledger: Arc<Ledger>,
}

impl CountedOracle {
    /// Places `source` at qubit 0 with a fresh ledger.
    pub fn new(label: &str, source: Relocatable) -> Result<Self> {
        let action = source.at(0)?;
        Ok(CountedOracle { label: label.into(), source: Some(source), offset: 0, action, ledger: Ledger::new() })
    }

    /// Wraps a fixed op that cannot be moved.
    pub fn from_op(label: &str, action: Op) -> Self {
        CountedOracle { label: label.into(), source: None, offset: 0, action, ledger: Ledger::new() }
    }

    /// Wraps a fixed op charging an existing ledger.
    pub fn with_ledger(label: &str, action: Op, ledger: Arc<Ledger>) -> Self {
        CountedOracle { label: label.into(), source: None, offset: 0, action, ledger }
    }

    /// The same oracle placed at `offset`, sharing this ledger.
    pub fn at(&self, offset: usize) -> Result<CountedOracle> {
        let source = self.source.as_ref().ok_or(Error::NotRelocatable)?;
        Ok(CountedOracle {
            label: self.label.clone(),
            source: Some(source.clone()),
            offset,
            action: source.at(offset)?,
            ledger: self.ledger.clone(),
        })
    }

    /// The same oracle with a fresh ledger.
    pub fn fresh(&self) -> CountedOracle {
        CountedOracle { ledger: Ledger::new(), ..self.clone() }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn width(&self) -> usize {
        match &self.source {
            Some(s) => s.width(),
            None => self.action.support().count_ones() as usize,
        }
    }

    pub fn source(&self) -> Option<&Relocatable> {
        self.source.as_ref()
    }

    pub fn ledger(&self) -> &Arc<Ledger> {
        &self.ledger
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        self.ledger.snapshot()
    }
}

impl Unitary for CountedOracle {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.action.apply(state, ctl)?;
        self.ledger.charge(false, ctl.is_controlled());
        Ok(())
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.action.apply_adjoint(state, ctl)?;
        self.ledger.charge(true, ctl.is_controlled());
        Ok(())
    }
    fn support(&self) -> usize {
        self.action.support()
    }
}

impl fmt::Debug for CountedOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CountedOracle({}, {:?})", self.label, self.ledger.snapshot())
    }
}
