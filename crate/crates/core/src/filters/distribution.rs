use crate::error::{Error, Result};
use crate::sim::{check_width, Controls, CountedOracle, Op, Register, Relocatable, StatePrep, StateVector, C64};
use std::sync::Arc;

/// Distribution access: a preparation on `outcome_width + ancilla_width`
/// qubits whose top `outcome_width` qubits hold the sampled outcome x and
/// whose low qubits hold garbage, O|0⟩ = Σ_x |x⟩|ξ_x⟩ with ‖ξ_x‖² = p_x.
///
/// Exact probabilities and the amplitudes ⟨x,0…0|O|0⟩ are recorded once by
/// simulation for analysis and testing; the algorithms never read them.
#[derive(Clone, Debug)]
pub struct DistributionOracle {
    outcome_width: usize,
    ancilla_width: usize,
    oracle: CountedOracle,
    exact_probs: Vec<f64>,
    exact_amps: Vec<C64>,
}

impl DistributionOracle {
    pub fn new(label: &str, outcome_width: usize, ancilla_width: usize, source: Relocatable) -> Result<Self> {
        let width = outcome_width + ancilla_width;
        if source.width() != width {
            return Err(Error::DimensionMismatch { expected: width, actual: source.width() });
        }
        if outcome_width == 0 {
            return Err(Error::InvalidParameter("distribution needs at least one outcome qubit".into()));
        }
        check_width(width)?;
        let oracle = CountedOracle::new(label, source.clone())?;
        let mut s = StateVector::new(width)?;
        source.at(0)?.apply(&mut s, Controls::NONE)?;
        let outcome = Register::new("outcome", ancilla_width, outcome_width);
        let exact_probs = s.outcome_distribution(&outcome)?;
        let exact_amps = (0..outcome.dim()).map(|x| s.amplitude(x << ancilla_width)).collect();
        Ok(DistributionOracle { outcome_width, ancilla_width, oracle, exact_probs, exact_amps })
    }

    /// Prepares Σ_x amps[x]|x⟩ exactly; no garbage qubits.
    pub fn from_amplitudes(amps: &[C64]) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParameter("empty amplitude list".into()));
        }
        let width = (amps.len().next_power_of_two().trailing_zeros() as usize).max(1);
        let mut v = amps.to_vec();
        v.resize(1 << width, C64::new(0.0, 0.0));
        let n: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n));
        }
        let s = 1.0 / n.sqrt();
        let v: Arc<Vec<C64>> = Arc::new(v.iter().map(|a| a * s).collect());
        StatePrep::new(Register::new("outcome", 0, width), &v)?;
        let source = Relocatable::new(width, move |off| {
            let op: Op = Arc::new(StatePrep::new(Register::new("outcome", off, width), &v)?);
            Ok(op)
        });
        Self::new("distribution", width, 0, source)
    }

    /// Prepares Σ_x √(w_x / Σw)|x⟩.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
        }
        let amps: Vec<C64> = weights.iter().map(|w| C64::new(w.sqrt(), 0.0)).collect();
        Self::from_amplitudes(&amps)
    }

    pub fn outcome_width(&self) -> usize {
        self.outcome_width
    }

    pub fn ancilla_width(&self) -> usize {
        self.ancilla_width
    }

    pub fn width(&self) -> usize {
        self.outcome_width + self.ancilla_width
    }

    /// The counted preparation, placed at qubit 0. Use `.at(offset)` to move it.
    pub fn oracle(&self) -> &CountedOracle {
        &self.oracle
    }

    pub fn exact_probs(&self) -> &[f64] {
        &self.exact_probs
    }

    /// ⟨x, 0…0| O |0⟩; equals the amplitude of x when there is no garbage.
    pub fn exact_amps(&self) -> &[C64] {
        &self.exact_amps
    }

    /// Outcome register of an oracle placed at `offset`.
    pub fn outcome_register(&self, offset: usize) -> Register {
        Register::new("outcome", offset + self.ancilla_width, self.outcome_width)
    }

    /// The same preparation with a fresh ledger.
    pub fn fresh(&self) -> Self {
        DistributionOracle { oracle: self.oracle.fresh(), ..self.clone() }
    }
}
