#![allow(dead_code)]

use qfilter::sim::{Op, StatePrep, StateVector, Register, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_amplitudes(rng: &mut impl Rng, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

pub fn random_state(rng: &mut impl Rng, width: usize) -> StateVector {
    StateVector::from_amplitudes(random_amplitudes(rng, 1 << width)).unwrap()
}

pub fn prep_op(offset: usize, amps: &[C64]) -> Op {
    let width = amps.len().trailing_zeros() as usize;
    Arc::new(StatePrep::new(Register::new("prep", offset, width), amps).unwrap())
}

/// Closed-form law of the raw phase-estimation outcome for success probability p.
pub fn qae_law(p: f64, m: usize) -> Vec<f64> {
    let big = (1u64 << m) as f64;
    let theta = p.sqrt().asin() / PI;
    let fejer = |d: f64| {
        let s = (PI * d).sin();
        if s.abs() < 1e-12 {
            1.0
        } else {
            ((big * PI * d).sin() / (big * s)).powi(2)
        }
    };
    (0..1u64 << m).map(|a| 0.5 * (fejer(a as f64 / big - theta) + fejer(a as f64 / big + theta))).collect()
}

/// Naive O(n·2^n) inverse Fourier transform on a full vector, as a matrix product.
pub fn dft(amps: &[C64], sign: f64) -> Vec<C64> {
    let n = amps.len();
    (0..n)
        .map(|k| {
            amps.iter()
                .enumerate()
                .map(|(j, a)| a * C64::from_polar(1.0, sign * 2.0 * PI * (j * k) as f64 / n as f64))
                .sum::<C64>()
                / (n as f64).sqrt()
        })
        .collect()
}

pub fn binomial_tail_naive(k: usize, t: usize, f: f64) -> f64 {
    let mut total = 0.0;
    for j in t..=k {
        let mut c = 1.0;
        for i in 0..j {
            c = c * (k - i) as f64 / (i + 1) as f64;
        }
        total += c * f.powi(j as i32) * (1.0 - f).powi((k - j) as i32);
    }
    total
}
