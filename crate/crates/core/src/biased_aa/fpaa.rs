use crate::error::{Error, Result};
use crate::sim::{Controls, Gate, GlobalPhase, StateVector, Unitary, C64};
use serde::Serialize;
use std::f64::consts::PI;

/// Constant in the iteration cap ⌈C·ln(2/δ)/√λ⌉.
pub const FPAA_CONSTANT: f64 = 1.0;

/// Chebyshev polynomial T_n(x), for |x| ≤ 1 or x ≥ 1 and real n.
pub fn chebyshev(n: f64, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (n * x.acos()).cos()
    } else if x > 1.0 {
        (n * x.acosh()).cosh()
    } else {
        let s = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
        s * (n * (-x).acosh()).cosh()
    }
}

/// Phases of fixed-point amplitude amplification with L = 2·iterations + 1
/// reflections, tuned so that any good mass ≥ `lambda` ends at least
/// 1 − `delta` good.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FpaaSchedule {
    pub iterations: usize,
    pub length: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub delta: f64,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// True when the iteration cap bound before the guarantee was reached.
    pub capped: bool,
}

pub fn iteration_cap(lambda: f64, delta: f64) -> usize {
    (FPAA_CONSTANT * (2.0 / delta).ln() / lambda.sqrt()).ceil() as usize
}

impl FpaaSchedule {
    pub fn new(lambda: f64, delta: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!("λ must lie in (0, 1], got {lambda}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("δ must lie in (0, 1), got {delta}")));
        }
        let cap = iteration_cap(lambda, delta);
        let dy = delta.sqrt();
        let gamma_for = |len: usize| 1.0 / chebyshev(1.0 / len as f64, 1.0 / dy);
        let mut chosen = None;
        for l in 0..=cap {
            let g = gamma_for(2 * l + 1);
            if 1.0 - g * g <= lambda {
                chosen = Some(l);
                break;
            }
        }
        let capped = chosen.is_none();
        let l = chosen.unwrap_or(cap);
        Ok(Self::with_iterations(l, lambda, delta, capped))
    }

    fn with_iterations(l: usize, lambda: f64, delta: f64, capped: bool) -> Self {
        let len = 2 * l + 1;
        let dy = delta.sqrt();
        let gamma = 1.0 / chebyshev(1.0 / len as f64, 1.0 / dy);
        let w = (1.0 - gamma * gamma).max(0.0).sqrt();
        let alphas: Vec<f64> = (1..=l)
            .map(|j| {
                let t = (2.0 * PI * j as f64 / len as f64).tan() * w;
                2.0 * (1.0f64).atan2(t)
            })
            .collect();
        let betas = (1..=l).map(|j| -alphas[l - j]).collect();
        FpaaSchedule { iterations: l, length: len, gamma, lambda, delta, alphas, betas, capped }
    }

    /// Closed-form success probability from initial good mass `lambda0`:
    /// 1 − δ·T_L(T_{1/L}(1/√δ)·√(1 − λ₀))².
    pub fn success_probability(&self, lambda0: f64) -> f64 {
        let dy = self.delta.sqrt();
        let x = chebyshev(1.0 / self.length as f64, 1.0 / dy) * (1.0 - lambda0).max(0.0).sqrt();
        1.0 - self.delta * chebyshev(self.length as f64, x).powi(2)
    }

    /// Exact evolution in the two-dimensional good/bad subspace.
    pub fn evolve_2d(&self, lambda0: f64) -> f64 {
        let s = [C64::new(lambda0.sqrt(), 0.0), C64::new((1.0 - lambda0).max(0.0).sqrt(), 0.0)];
        let mut v = s;
        for (a, b) in self.alphas.iter().zip(&self.betas) {
            v[0] *= C64::from_polar(1.0, *b);
            let proj = s[0] * v[0] + s[1] * v[1];
            let f = C64::new(1.0, 0.0) - C64::from_polar(1.0, -*a);
            v[0] = -(v[0] - f * proj * s[0]);
            v[1] = -(v[1] - f * proj * s[1]);
        }
        v[0].norm_sqr()
    }
}

/// Runs the schedule on a statevector already holding prep|0⟩, with the
/// good subspace marked by `flag` = 1. The preparation must act on every
/// qubit of the state.
pub fn fpaa_statevector(state: &mut StateVector, prep: &dyn Unitary, flag: usize, schedule: &FpaaSchedule) -> Result<()> {
    for (a, b) in schedule.alphas.iter().zip(&schedule.betas) {
        Gate::phase(flag, *b).apply(state, Controls::NONE)?;
        prep.apply_adjoint(state, Controls::NONE)?;
        let ph = C64::from_polar(1.0, -*a);
        state.amplitudes_mut()[0] *= ph;
        prep.apply(state, Controls::NONE)?;
        GlobalPhase(C64::new(-1.0, 0.0)).apply(state, Controls::NONE)?;
    }
    state.renormalize();
    Ok(())
}
