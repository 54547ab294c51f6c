use super::controls::Controls;
use super::layout::Register;
use super::ops::{Controlled, Gate, Sequence, Unitary};
use super::state::{StateVector, C64};
use crate::error::{Error, Result};
use rustfft::{FftDirection, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Quantum Fourier transform on a register,
/// |x⟩ → 2^{-m/2} Σ_y e^{2πi·xy/2^m} |y⟩, evaluated by FFT along the register axis.
#[derive(Clone, Debug)]
pub struct Qft {
    reg: Register,
}

impl Qft {
    pub fn new(reg: Register) -> Self {
        Qft { reg }
    }

    fn run(&self, state: &mut StateVector, ctl: Controls, inverse: bool) -> Result<()> {
        state.check_register(&self.reg)?;
        state.check_mask(ctl.mask)?;
        if ctl.mask & self.reg.mask() != 0 {
            return Err(Error::RegisterOverlap);
        }
        let dim = self.reg.dim();
        if dim == 1 {
            return Ok(());
        }
        // The FFT's forward direction carries e^{-2πi}, which is the inverse QFT.
        let dir = if inverse { FftDirection::Forward } else { FftDirection::Inverse };
        let fft = FftPlanner::<f64>::new().plan_fft(dim, dir);
        let rmask = self.reg.mask();
        let off = self.reg.offset;
        let amps = state.amplitudes_mut();
        let bases: Vec<usize> = (0..amps.len()).filter(|&b| b & rmask == 0 && ctl.matches(b)).collect();
        let scale = 1.0 / (dim as f64).sqrt();
        let chunk = (1usize << 16).max(dim) / dim;
        let mut buf = vec![C64::new(0.0, 0.0); chunk * dim];
        for group in bases.chunks(chunk) {
            let used = group.len() * dim;
            for (g, &b) in group.iter().enumerate() {
                for x in 0..dim {
                    buf[g * dim + x] = amps[b | (x << off)];
                }
            }
            fft.process(&mut buf[..used]);
            for (g, &b) in group.iter().enumerate() {
                for y in 0..dim {
                    amps[b | (y << off)] = buf[g * dim + y] * scale;
                }
            }
        }
        Ok(())
    }
}

impl Unitary for Qft {
    fn apply(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.run(state, ctl, false)
    }
    fn apply_adjoint(&self, state: &mut StateVector, ctl: Controls) -> Result<()> {
        self.run(state, ctl, true)
    }
    fn support(&self) -> usize {
        self.reg.mask()
    }
}

/// Forward QFT on a register.
pub fn apply_qft(state: &mut StateVector, reg: &Register) -> Result<()> {
    Qft::new(reg.clone()).apply(state, Controls::NONE)
}

/// Inverse QFT on a register.
pub fn apply_inverse_qft(state: &mut StateVector, reg: &Register) -> Result<()> {
    Qft::new(reg.clone()).apply_adjoint(state, Controls::NONE)
}

/// Textbook gate decomposition of the forward QFT: Hadamards, controlled
/// phases, and a final qubit reversal.
pub fn qft_circuit(reg: &Register) -> Result<Sequence> {
    let m = reg.width;
    let mut seq = Sequence::new();
    for j in (0..m).rev() {
        seq.push(Gate::h(reg.qubit(j)));
        for k in (0..j).rev() {
            let angle = 2.0 * PI / (1u64 << (j - k + 1)) as f64;
            let ph = Arc::new(Gate::phase(reg.qubit(j), angle));
            seq.push(Controlled::new(Controls::qubit(reg.qubit(k), true), ph)?);
        }
    }
    for i in 0..m / 2 {
        seq.push(Gate::swap(reg.qubit(i), reg.qubit(m - 1 - i)));
    }
    Ok(seq)
}
