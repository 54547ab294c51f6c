//! Acceptance checks. Every probability here is read from the simulator or an
//! exact law; sampled outcomes are only reported alongside.

mod common;

use common::*;
use qfilter::amp_est::*;
use qfilter::apps::*;
use qfilter::biased_aa::*;
use qfilter::filters::*;
use qfilter::gadgets::*;
use qfilter::hadamard::*;
use qfilter::mdist::*;
use qfilter::sim::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if $cond {
        } else {
            return Err(format!($($arg)*));
        }
    };
}

fn ok<T>(r: qfilter::Result<T>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn rotation_prep(p: f64) -> CountedOracle {
    CountedOracle::from_op("prep", Arc::new(Gate::ry(0, 2.0 * p.sqrt().asin())))
}

fn z_marker() -> CountedOracle {
    CountedOracle::from_op("marker", Arc::new(Gate::z(0)))
}

fn relocatable_prep(label: &str, amps: Vec<C64>) -> CountedOracle {
    let n = amps.len().trailing_zeros() as usize;
    let amps = Arc::new(amps);
    CountedOracle::new(
        label,
        Relocatable::new(n, move |off| Ok(Arc::new(StatePrep::new(Register::new("prep", off, n), &amps)?) as Op)),
    )
    .unwrap()
}

fn weighted_prep(weights: &[f64]) -> CountedOracle {
    let total: f64 = weights.iter().sum();
    relocatable_prep("prep", weights.iter().map(|w| C64::new((w / total).sqrt(), 0.0)).collect())
}

// ---------------------------------------------------------------------------

fn qae_confidence() -> Outcome {
    let floor = 8.0 / (PI * PI) - 1e-9;
    let mut r = rng(1001);
    let mut worst = f64::INFINITY;
    for i in 0..20 {
        let p: f64 = r.gen_range(0.001..0.999);
        let q = 4 + i % 2;
        let m = q + 3;
        let run = ok(qae(&rotation_prep(p), &z_marker(), ok(AEConfig::new(m), "config")?), "qae")?;
        let dist = ok(run.raw_distribution(), "distribution")?;
        let law = qae_law(p, m);
        let drift = dist.iter().zip(&law).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure!(drift < 1e-10, "p={p:.4}: simulator and closed-form law differ by {drift:e}");
        let tol = 1.0 / (1u64 << q) as f64;
        let mass: f64 = dist
            .iter()
            .enumerate()
            .filter(|(a, _)| (decode_estimate(*a as u64, m).unwrap() - p).abs() <= tol)
            .map(|(_, w)| w)
            .sum();
        ensure!(mass >= floor, "p={p:.4} q={q}: Pr = {mass:.6}");
        worst = worst.min(mass);
    }
    for (p, m) in [(0.0, 7), (1.0, 7), (0.5, 3)] {
        let run = ok(qae(&rotation_prep(p), &z_marker(), ok(AEConfig::new(m), "config")?), "qae")?;
        let dist = ok(run.raw_distribution(), "distribution")?;
        let mass: f64 = dist
            .iter()
            .enumerate()
            .filter(|(a, _)| (decode_estimate(*a as u64, m).unwrap() - p).abs() < 1e-12)
            .map(|(_, w)| w)
            .sum();
        ensure!((mass - 1.0).abs() < 1e-10, "exact case p={p} m={m}: mass {mass}");
    }
    Ok(format!("20 random p, worst Pr = {worst:.4}; 3 exact-phase cases deterministic"))
}

fn query_exactness() -> Outcome {
    for m in 1..=8 {
        let prep = rotation_prep(0.37);
        let marker = z_marker();
        ok(qae(&prep, &marker, ok(AEConfig::new(m), "config")?), "qae")?;
        let want = (1u64 << m) - 1;
        ensure!(marker.snapshot().total() == want, "m={m}: marker calls {}", marker.snapshot().total());
        ensure!(prep.snapshot().all_inverse() == want, "m={m}: inverse prep calls");
    }
    let mut counts = Vec::new();
    for n in [1usize, 2, 4] {
        let idx = if n > 2 { 2 } else { 1 };
        let fam = ok(demo_family(idx, 2, n, 1), "family")?;
        let res = ok(mdist_amp_est(&fam, 3), "mdist")?;
        let audit = audit_query_count(&res);
        ensure!(audit.oracle_calls <= 32, "N={n}: {} calls", audit.oracle_calls);
        ensure!(audit.within_budget, "N={n}: audit failed");
        counts.push(res.calls);
    }
    ensure!(counts.iter().all(|c| *c == counts[0]), "counts differ across N: {counts:?}");
    let fam = ok(demo_family(1, 2, 2, 2), "family")?;
    let audit = audit_query_count(&ok(mdist_amp_est(&fam, 4), "mdist")?);
    ensure!(audit.oracle_calls <= 130, "(m=4,k=2): {} calls", audit.oracle_calls);
    Ok(format!("marker = 2^m − 1 for m ≤ 8; (m=3,k=1) uses {} calls at N = 1, 2, 4", counts[0].total()))
}

fn hadamard_marginals() -> Outcome {
    let mut r = rng(3003);
    let mut worst = 0.0f64;
    for trial in 0..64 {
        let n = 1 + trial % 4;
        let psi = random_amplitudes(&mut r, 1 << n);
        let phi = random_amplitudes(&mut r, 1 << n);
        let ip: C64 = psi.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
        for imaginary in [false, true] {
            let t = if imaginary {
                ok(hadamard_test_imag(prep_op(0, &psi), prep_op(0, &phi), n), "test")?
            } else {
                ok(hadamard_test_real(prep_op(0, &psi), prep_op(0, &phi), n), "test")?
            };
            let mut s = ok(StateVector::new(n + 1), "state")?;
            ok(t.apply(&mut s, Controls::NONE), "apply")?;
            let got = ok(s.marginal_probability(&Register::new("c", n, 1), 0), "marginal")?;
            let want = 0.5 * (1.0 + if imaginary { ip.im } else { ip.re });
            worst = worst.max((got - want).abs());
        }
    }
    ensure!(worst <= 1e-10, "max deviation {worst:e}");
    Ok(format!("64 pairs, max deviation {worst:.1e}"))
}

fn amplitude_oracle(alpha: C64, seed: u64) -> CountedOracle {
    let n = 2;
    let y = 1;
    let mut amps = random_amplitudes(&mut rng(seed), 1 << n);
    let rest: f64 = amps.iter().enumerate().filter(|(i, _)| *i != y).map(|(_, a)| a.norm_sqr()).sum();
    let scale = ((1.0 - alpha.norm_sqr()).max(0.0) / rest).sqrt();
    for (i, a) in amps.iter_mut().enumerate() {
        *a = if i == y { alpha } else { *a * scale };
    }
    relocatable_prep("a", amps)
}

fn true_amplitude_grid() -> Outcome {
    let grid = [
        C64::new(0.0, 0.0),
        C64::from_polar(0.5, 0.7),
        C64::from_polar(0.5, -2.2),
        C64::from_polar(0.5f64.sqrt(), PI / 4.0),
        C64::from_polar(0.5f64.sqrt(), PI),
        C64::from_polar(0.9, 1.9),
        C64::from_polar(0.9, -0.4),
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
    ];
    let (eps, delta) = (1.0 / 16.0, 0.2);
    let mut worst = 1.0f64;
    let mut sampled_within = 0;
    for (i, alpha) in grid.iter().enumerate() {
        let a = amplitude_oracle(*alpha, 40 + i as u64);
        let cfg = TrueAmpEstConfig { epsilon: eps, delta, backend: EstimationBackend::Qae, seed: i as u64 };
        let rep = ok(true_amp_est(&a, 1, cfg), "estimate")?;
        ensure!((rep.true_norm - alpha.norm()).abs() < 1e-10, "point {i}: fixture norm {}", rep.true_norm);
        ensure!(rep.exact_success_prob >= 1.0 - delta, "|α|={:.3}: success {:.4}", alpha.norm(), rep.exact_success_prob);
        worst = worst.min(rep.exact_success_prob);
        if (rep.estimate.norm - rep.true_norm).abs() <= eps {
            sampled_within += 1;
        }
    }
    Ok(format!("9 points, worst exact success {worst:.4}; sampled within ε on {sampled_within}/9"))
}

fn biased_prep_certificate() -> Outcome {
    let mut rows = 0;
    let mut statevector_checked = Vec::new();
    for p in [0.7, 0.811, 0.9] {
        for dp in [0.2, 0.1] {
            let k = ok(choose_k(p, dp), "choose_k")?;
            let correctness = [p, p, 0.5 * (1.0 + p), 1.0];
            let good = [true, false, false, true];
            let one_probs: Vec<f64> = correctness.iter().zip(good).map(|(c, g)| if g { *c } else { 1.0 - c }).collect();
            let oracle = ok(BiasedOracle::with_probabilities(2, one_probs), "oracle")?;
            let a = weighted_prep(&[0.1, 0.2, 0.3, 0.4]);
            let cfg = AmplifyConfig {
                lambda: 0.25,
                delta: 0.2,
                p,
                k_mode: KMode::Relaxed(k),
                backend: AmplifyBackend::Factored,
                seed: 0,
            };
            let out = ok(errored_amplify(&a, &oracle, cfg, None), "amplify")?;
            let half = k.div_ceil(2);
            let mut errors = Vec::new();
            for x in 0..4 {
                let maj = out.majority_probabilities[x];
                let err = if good[x] { 1.0 - maj } else { maj };
                let tail = binomial_tail_naive(k, half, 1.0 - correctness[x]);
                ensure!(err <= dp + 1e-12, "p={p} δ′={dp} k={k} x={x}: flag error {err}");
                ensure!((err - tail).abs() <= 1e-9, "p={p} δ′={dp} x={x}: {err} vs binomial {tail}");
                errors.push(err);
                rows += 1;
            }
            if 2 + k < 22 {
                let (seq, layout) = ok(biased_prep_circuit(&a, &oracle, k), "circuit")?;
                let mut s = ok(StateVector::new(layout.width()), "state")?;
                ok(seq.apply(&mut s, Controls::NONE), "apply")?;
                let joint = ok(
                    s.joint_distribution(layout.register("prep").unwrap(), layout.register("majority").unwrap()),
                    "joint",
                )?;
                for (x, row) in joint.iter().enumerate() {
                    let err = if good[x] { row[0] } else { row[1] } / (row[0] + row[1]);
                    ensure!((err - errors[x]).abs() <= 1e-9, "statevector k={k} x={x}: {err} vs {}", errors[x]);
                }
                statevector_checked.push(k);
            }
        }
    }
    Ok(format!("{rows} per-input errors within δ′ and the binomial tail; statevector cross-check at k = {statevector_checked:?}"))
}

fn errored_amplify_end_to_end() -> Outcome {
    let uniform = [1.0; 8];
    let skew = [0.05, 0.3, 0.1, 0.1, 0.1, 0.1, 0.15, 0.1];
    let heavy = [0.05, 0.05, 0.3, 0.05, 0.25, 0.05, 0.25, 0.0];
    let planted: [(f64, &[f64], &[usize]); 8] = [
        (0.25, &uniform, &[2, 5]),
        (0.25, &uniform, &[0, 3, 6]),
        (0.25, &skew, &[1]),
        (0.25, &heavy, &[6]),
        (0.5, &uniform, &[0, 1, 2, 3]),
        (0.5, &uniform, &[1, 2, 3, 5, 7]),
        (0.5, &heavy, &[2, 4]),
        (0.5, &skew, &[1, 3, 6]),
    ];
    let mut worst_success = 1.0f64;
    let mut worst_witness = 1.0f64;
    let mut sampled_ok = 0;
    for (i, (lambda, weights, good_set)) in planted.iter().enumerate() {
        let good: Vec<bool> = (0..8).map(|x| good_set.contains(&x)).collect();
        let total: f64 = weights.iter().sum();
        let mass: f64 = good_set.iter().map(|&x| weights[x] / total).sum();
        ensure!(mass >= lambda - 1e-12, "fixture {i}: good mass {mass} below λ");
        let oracle = ok(BiasedOracle::new(3, good.clone(), 0.85), "oracle")?;
        let truth: Vec<Goodness> = good.iter().map(|&g| if g { Goodness::Good } else { Goodness::Bad }).collect();
        let cfg = AmplifyConfig {
            lambda: *lambda,
            delta: 0.1,
            p: 0.85,
            k_mode: KMode::Strict,
            backend: AmplifyBackend::Auto,
            seed: i as u64,
        };
        let out = ok(errored_amplify(&weighted_prep(weights), &oracle, cfg, Some(&truth)), "amplify")?;
        let success = out.exact_success_prob.unwrap_or(0.0);
        let witness = out.witness_good_given_flag.unwrap_or(0.0);
        ensure!(success >= 0.9, "planted {i}: exact correctness {success:.4}");
        ensure!(witness >= 0.75, "planted {i}: witness goodness {witness:.4}");
        worst_success = worst_success.min(success);
        worst_witness = worst_witness.min(witness);
        if matches!(out.verdict, Verdict::Witness(x) if good[x as usize]) {
            sampled_ok += 1;
        }
    }
    for (i, (lambda, weights)) in [(0.25, &uniform), (0.5, &skew), (0.25, &heavy), (0.5, &uniform)].iter().enumerate() {
        let oracle = ok(BiasedOracle::new(3, vec![false; 8], 0.85), "oracle")?;
        let cfg = AmplifyConfig {
            lambda: *lambda,
            delta: 0.1,
            p: 0.85,
            k_mode: KMode::Strict,
            backend: AmplifyBackend::Auto,
            seed: 100 + i as u64,
        };
        let out = ok(errored_amplify(&weighted_prep(weights.as_slice()), &oracle, cfg, Some(&[Goodness::Bad; 8])), "amplify")?;
        let correct = out.flag_correct_prob.unwrap_or(0.0);
        ensure!(correct >= 0.9, "no-solution {i}: exact correctness {correct:.4}");
        worst_success = worst_success.min(correct);
        if out.verdict == Verdict::NoSolution {
            sampled_ok += 1;
        }
    }
    Ok(format!(
        "worst exact correctness {worst_success:.4}, worst witness goodness {worst_witness:.4}; sampled verdicts right on {sampled_ok}/12"
    ))
}

fn probability_filter_cases() -> Outcome {
    let dists: [&[f64]; 10] = [
        &[0.5, 0.2, 0.1, 0.1, 0.05, 0.05, 0.0, 0.0],
        &[0.05, 0.55, 0.15, 0.1, 0.05, 0.05, 0.03, 0.02],
        &[0.02, 0.03, 0.05, 0.7, 0.05, 0.05, 0.05, 0.05],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        &[0.125; 8],
        &[0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05],
        &[0.05, 0.05, 0.37, 0.13, 0.1, 0.1, 0.1, 0.1],
        &[0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.3],
        &[0.45, 0.2, 0.1, 0.1, 0.05, 0.05, 0.03, 0.02],
        &[0.1, 0.1, 0.4, 0.1, 0.1, 0.1, 0.05, 0.05],
    ];
    let mut counts = [0; 3];
    let mut worst = 1.0f64;
    for (i, w) in dists.iter().enumerate() {
        let od = ok(DistributionOracle::from_weights(w), "oracle")?;
        let out = ok(profil(&od, 0.5, 0.125, 0.15, FilterOptions { seed: i as u64, ..FilterOptions::default() }), "profil")?;
        match out.truth {
            Truth::Gap => counts[2] += 1,
            t => {
                counts[usize::from(t == Truth::No)] += 1;
                ensure!(out.flag_correct_prob >= 0.85, "distribution {i} ({t:?}): flag correct {:.4}", out.flag_correct_prob);
                worst = worst.min(out.flag_correct_prob);
            }
        }
    }
    Ok(format!("{} yes, {} no, {} in the gap; worst flag correctness {worst:.4}", counts[0], counts[1], counts[2]))
}

/// Unit vector over 8 outcomes with `top` at position `at` and the rest spread evenly.
fn spread(top: f64, at: usize, sign: impl Fn(usize) -> f64) -> Vec<C64> {
    let rest = ((1.0 - top * top) / 7.0).sqrt();
    (0..8).map(|x| C64::new(if x == at { top } else { rest * sign(x) }, 0.0)).collect()
}

fn amplitude_filter_cases() -> Outcome {
    let plus = |_| 1.0;
    let alt = |x: usize| if x % 2 == 0 { 1.0 } else { -1.0 };
    let cases: Vec<(Vec<C64>, AmpMode)> = vec![
        (spread(0.5, 0, plus), AmpMode::Real),
        (spread(0.7, 3, plus), AmpMode::Real),
        (spread(1.0, 6, plus), AmpMode::Real),
        (spread(8f64.sqrt().recip(), 0, plus), AmpMode::Real),
        (spread(0.2, 2, plus), AmpMode::Real),
        (spread(0.37, 5, plus), AmpMode::Real),
        (spread(-0.9, 1, plus), AmpMode::Real),
        (spread(0.45, 4, plus), AmpMode::Real),
        (spread(-0.6, 7, alt), AmpMode::Signed),
        (spread(-(8f64.sqrt().recip()), 1, alt), AmpMode::Signed),
    ];
    let mut counts = [0; 3];
    let mut worst = 1.0f64;
    for (i, (amps, mode)) in cases.iter().enumerate() {
        let od = ok(DistributionOracle::from_amplitudes(amps), "oracle")?;
        let out = ok(
            ampfil(&od, 0.5, 0.125, 0.15, *mode, FilterOptions { seed: i as u64, ..FilterOptions::default() }),
            "ampfil",
        )?;
        match out.truth {
            Truth::Gap => counts[2] += 1,
            t => {
                counts[usize::from(t == Truth::No)] += 1;
                ensure!(out.flag_correct_prob >= 0.85, "instance {i} ({mode:?}, {t:?}): flag correct {:.4}", out.flag_correct_prob);
                worst = worst.min(out.flag_correct_prob);
            }
        }
    }
    ensure!(counts[2] >= 1, "no gap instance in the suite");
    Ok(format!("{} yes, {} no, {} in the gap (2 signed); worst flag correctness {worst:.4}", counts[0], counts[1], counts[2]))
}

fn k_distinctness_exhaustive() -> Outcome {
    let mut worst = 1.0f64;
    let mut sampled_ok = 0;
    let mut runs = 0;
    for code in 0..256u64 {
        let values: Vec<u64> = (0..4).map(|i| code >> (2 * i) & 3).collect();
        let mut counts = [0usize; 4];
        for &v in &values {
            counts[v as usize] += 1;
        }
        let arr = ok(InputArray::new(values.clone(), 4), "array")?;
        for k in 2..=4 {
            let brute = counts.iter().any(|&c| c >= k);
            let out = ok(kdistinctness(&arr, k, 0.1, FilterOptions { seed: code * 8 + k as u64, ..FilterOptions::default() }), "kdist")?;
            ensure!(out.expected == brute, "{values:?} k={k}: reference {} vs brute force {brute}", out.expected);
            ensure!(out.exact_correct_prob >= 0.9, "{values:?} k={k}: exact correctness {:.4}", out.exact_correct_prob);
            worst = worst.min(out.exact_correct_prob);
            sampled_ok += usize::from(out.answer == brute);
            runs += 1;
        }
    }
    Ok(format!("{runs} runs, worst exact correctness {worst:.4}; sampled answers right on {sampled_ok}/{runs}"))
}

fn nonlinearity_cases() -> Outcome {
    let weight_quarter = BooleanFunction::from_fn(4, |z| [1, 6, 10, 13].contains(&z)).unwrap();
    let spectrum = walsh_spectrum(&weight_quarter);
    ensure!(spectrum[0] == 0.5, "weight-N/4 fixture has f̂(0) = {}", spectrum[0]);
    let cases = [
        ("zero", BooleanFunction::from_fn(4, |_| false).unwrap()),
        ("linear", BooleanFunction::from_fn(4, |z| (z ^ z >> 2) & 1 == 1).unwrap()),
        ("bent", BooleanFunction::from_fn(4, |z| ((z >> 3 & z >> 2) ^ (z >> 1 & z)) & 1 == 1).unwrap()),
        ("weight-quarter", weight_quarter),
    ];
    let (lambda, delta) = (0.1, 0.2);
    let mut parts = Vec::new();
    for (i, (name, f)) in cases.iter().enumerate() {
        let n = 1u64 << f.n();
        // brute-force Walsh coefficients
        let fmax = (0..n)
            .map(|x| {
                let s: f64 = (0..n).map(|z| if (f.eval(z) as u32 + (x & z).count_ones()) % 2 == 0 { 1.0 } else { -1.0 }).sum();
                (s / n as f64).abs()
            })
            .fold(0.0, f64::max);
        let eta = 0.5 - 0.5 * fmax;
        let out = ok(nonlinearity(f, lambda, delta, FilterOptions { seed: i as u64, ..FilterOptions::default() }), "nonlin")?;
        ensure!((out.true_nonlinearity - eta).abs() < 1e-12, "{name}: reference η {} vs {eta}", out.true_nonlinearity);
        ensure!(out.exact_success_prob >= 1.0 - delta, "{name}: exact success {:.4}", out.exact_success_prob);
        ensure!((out.estimate - eta).abs() <= lambda + 1e-12, "{name}: estimate {} vs η = {eta}", out.estimate);
        parts.push(format!("{name} η={eta:.3} est={:.3} Pr={:.3}", out.estimate, out.exact_success_prob));
    }
    Ok(parts.join("; "))
}

fn basis_image(op: &dyn Unitary, width: usize, input: usize) -> Result<(usize, C64), String> {
    let mut s = ok(StateVector::basis(width, input), "basis")?;
    ok(op.apply(&mut s, Controls::NONE), "apply")?;
    let (idx, amp) = s.amplitudes().iter().enumerate().find(|(_, a)| a.norm() > 0.5).map(|(i, a)| (i, *a)).unwrap();
    ensure!((amp.norm() - 1.0).abs() < 1e-12, "not a basis map at input {input}");
    Ok((idx, amp))
}

fn gadget_exhaustiveness() -> Outcome {
    let mut inputs = 0usize;
    for l in 1..=5 {
        for m in 0..=l {
            let a = Register::new("a", 0, l);
            let b = Register::new("b", l, l);
            let op = ok(EqPrefixPhase::new(a.clone(), b.clone(), m), "eq")?;
            for i in 0..1usize << (2 * l) {
                let (j, amp) = basis_image(&op, 2 * l, i)?;
                let eq = (a.extract(i) >> (l - m)) == (b.extract(i) >> (l - m));
                ensure!(i == j && (amp.re - if eq { -1.0 } else { 1.0 }).abs() < 1e-12, "EQ l={l} m={m} i={i}");
                inputs += 1;
            }
        }
        let y = Register::new("y", 0, l);
        let out = Register::new("o", l, l);
        let hd = ok(HalfDistance::new(y.clone(), out.clone()), "hd")?;
        for i in 0..1usize << (2 * l) {
            let (j, _) = basis_image(&hd, 2 * l, i)?;
            let d = ((1i64 << (l - 1)) - y.extract(i) as i64).unsigned_abs();
            ensure!(y.extract(j) == y.extract(i) && out.extract(j) == out.extract(i) ^ d, "HD l={l} i={i}");
            inputs += 1;
        }
        let y2 = Register::new("y2", l, l);
        let cmp = ok(CompareMark::new(y.clone(), y2.clone(), 2 * l), "cmp")?;
        for i in 0..1usize << (2 * l + 1) {
            let (j, _) = basis_image(&cmp, 2 * l + 1, i)?;
            let hit = y2.extract(i) <= y.extract(i);
            ensure!(j == if hit { i ^ (1 << (2 * l)) } else { i }, "CMP l={l} i={i}");
            inputs += 1;
        }
        let k = l;
        let maj = ok(CondMajority::new(Some(Register::new("c", k + 1, 2)), (0..k).collect(), k), "maj")?;
        for i in 0..1usize << (k + 3) {
            let (j, _) = basis_image(&maj, k + 3, i)?;
            let ones = (i & ((1 << k) - 1)).count_ones() as usize;
            let hit = 2 * ones >= k;
            ensure!(j == if hit { i ^ (1 << k) } else { i }, "MAJ k={k} i={i}");
            inputs += 1;
        }
    }
    let l = 8;
    let out = Register::new("o", l, l);
    let hd = ok(HalfDistance::new(Register::new("y", 0, l), out.clone()), "hd")?;
    let mut vals = Vec::with_capacity(1 << l);
    for v in 0..1usize << l {
        vals.push(out.extract(basis_image(&hd, 2 * l, v)?.0));
    }
    let s2 = |v: usize| (PI * v as f64 / (1u64 << l) as f64).sin().powi(2);
    for a in 0..1usize << l {
        for t in 0..1usize << l {
            ensure!((vals[a] <= vals[t]) == (s2(a) >= s2(t) - 1e-12), "HD order a={a} t={t}");
        }
    }
    Ok(format!("{inputs} basis inputs at l ≤ 5; 65536 ordered pairs at l = 8"))
}

// ---------------------------------------------------------------------------

fn random_unitary(r: &mut impl Rng, dim: usize) -> Vec<C64> {
    let mut rows: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while rows.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
        for u in &rows {
            let dot: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= dot * y;
            }
        }
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            rows.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    rows.concat()
}

fn random_gate(r: &mut impl Rng, targets: Vec<usize>) -> Op {
    let dim = 1 << targets.len();
    Arc::new(Gate::dense(targets, random_unitary(r, dim)).unwrap())
}

fn width_of(op: &dyn Unitary) -> usize {
    (usize::BITS - op.support().leading_zeros()) as usize
}

fn round_trip_ops(r: &mut ChaCha8Rng) -> Result<Vec<(String, Op)>, String> {
    let mut ops: Vec<(String, Op)> = Vec::new();
    let four = Register::new("r", 0, 4);
    ops.push(("qft".into(), Arc::new(Qft::new(four.clone()))));
    ops.push(("qft circuit".into(), Arc::new(ok(qft_circuit(&four), "qft")?)));

    let amps = random_amplitudes(r, 8);
    let prep = CountedOracle::from_op("prep", prep_op(0, &amps));
    ops.push(("state preparation".into(), prep_op(0, &amps)));
    let marker = CountedOracle::from_op("marker", Arc::new(PhaseFlip::on_value(&Register::new("w", 1, 2), 2)));
    let g = ok(grover_iterator(&prep, &marker), "grover")?;
    let est = Register::new("e", 3, 3);
    ops.push(("grover iterator".into(), Arc::new(g.clone())));
    ops.push(("phase estimation".into(), Arc::new(ok(PhaseEstimation::new(est.clone(), Arc::new(g.clone())), "pe")?)));
    ops.push(("controlled powers".into(), Arc::new(ok(ControlledPowers::new(est, Arc::new(g)), "powers")?)));

    let psi = random_amplitudes(r, 4);
    let phi = random_amplitudes(r, 4);
    ops.push(("hadamard test".into(), Arc::new(ok(hadamard_test_real(prep_op(0, &psi), prep_op(0, &phi), 2), "ht")?)));
    ops.push(("hadamard test (imag)".into(), Arc::new(ok(hadamard_test_imag(prep_op(0, &psi), prep_op(0, &phi), 2), "ht")?)));

    let members = (0..4).map(|_| random_gate(r, vec![2, 3])).collect();
    ops.push(("branch controlled".into(), Arc::new(ok(BranchControlled::new(Register::new("i", 0, 2), members), "branch")?)));

    let fam = ok(demo_family(2, 2, 4, 2), "family")?;
    ops.push(("controlled family".into(), Arc::new(controlled_prep_family(&fam))));
    ops.push(("family iterator".into(), Arc::new(ok(family_iterator(&fam), "iterator")?)));
    ops.push(("family powers".into(), Arc::new(ok(w_operator(&fam, &Register::new("e", 4, 3)), "w")?)));

    ops.push(("eq".into(), Arc::new(ok(EqPrefixPhase::new(Register::new("a", 0, 3), Register::new("b", 3, 3), 2), "eq")?)));
    ops.push(("half distance".into(), Arc::new(ok(HalfDistance::new(Register::new("y", 0, 3), Register::new("o", 3, 3)), "hd")?)));
    ops.push(("compare".into(), Arc::new(ok(CompareMark::new(Register::new("a", 0, 3), Register::new("b", 3, 3), 6), "cmp")?)));
    ops.push(("majority".into(), Arc::new(ok(CondMajority::new(Some(Register::new("c", 4, 1)), vec![0, 1, 2], 3), "maj")?)));

    let pparams = ok(make_filter_params(0.9, 0.6, FilterKind::Prob), "params")?;
    ops.push(("threshold mark".into(), Arc::new(ok(ThresholdMark::new(Register::new("e", 0, pparams.l), pparams.l, pparams, true), "mark")?)));

    let od = ok(DistributionOracle::from_weights(&[0.7, 0.3]), "od")?;
    let pf = ok(ProbFilOracle::new(&od, pparams), "probfil")?;
    let input = Register::new("x", 0, 1);
    ops.push(("probability filter".into(), ok(pf.place(&input, &Register::new("anc", 1, pf.ancilla_width())), "place")?));
    let aparams = ok(make_filter_params(0.9, 0.6, FilterKind::Amp), "params")?;
    let aod = ok(DistributionOracle::from_amplitudes(&[C64::new(0.8, 0.0), C64::new(-0.6, 0.0)]), "od")?;
    let af = ok(AmpFilOracle::new(&aod, aparams, AmpMode::Signed), "ampfil")?;
    ops.push(("amplitude filter".into(), ok(af.place(&input, &Register::new("anc", 1, af.ancilla_width())), "place")?));

    let bo = ok(BiasedOracle::new(2, vec![true, false, false, true], 0.8), "biased")?;
    let bin = Register::new("x", 0, 2);
    ops.push(("biased oracle".into(), ok(bo.place(&bin, &Register::new("anc", 2, bo.ancilla_width())), "place")?));
    let (seq, _) = ok(biased_prep_circuit(&weighted_prep(&[0.1, 0.2, 0.3, 0.4]), &bo, 3), "circuit")?;
    ops.push(("boosted preparation".into(), Arc::new(seq)));

    let wod = ok(DistributionOracle::from_weights(&[0.1, 0.4, 0.2, 0.3]), "od")?;
    let mut layout = RegisterLayout::new();
    let xin = ok(layout.push("input", 2), "layout")?;
    let work = ok(layout.push("work", wod.width()), "layout")?;
    let e = ok(layout.push("est", 3), "layout")?;
    ops.push(("estimation in superposition".into(), ok(eq_amp_est_op(&xin, &work, &e, &wod), "eq est")?));
    Ok(ops)
}

fn scaled_apply(v: &[C64], op: &dyn Unitary) -> Result<Vec<C64>, String> {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n < 1e-300 {
        return Ok(v.to_vec());
    }
    let mut s = ok(StateVector::from_amplitudes(v.iter().map(|a| a / n).collect()), "state")?;
    ok(op.apply(&mut s, Controls::NONE), "apply")?;
    Ok(s.amplitudes().iter().map(|a| a * n).collect())
}

fn project(v: &[C64], qubit: usize, bit: usize) -> Vec<C64> {
    v.iter().enumerate().map(|(i, a)| if i >> qubit & 1 == bit { *a } else { C64::new(0.0, 0.0) }).collect()
}

fn max_gap(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn property_suites() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(1212);

    // norm preservation over random circuits
    for _ in 0..64 {
        let width = 5;
        let mut s = random_state(&mut r, width);
        for _ in 0..40 {
            let a = r.gen_range(0..width);
            let b = (a + r.gen_range(1..width)) % width;
            let op: Op = match r.gen_range(0..5) {
                0 => Arc::new(Gate::h(a)),
                1 => Arc::new(Gate::ry(a, r.gen_range(-PI..PI))),
                2 => Arc::new(Gate::phase(a, r.gen_range(-PI..PI))),
                3 => random_gate(&mut r, vec![a, b]),
                _ => Arc::new(Controlled::new(Controls::qubit(b, true), random_gate(&mut r, vec![a])).unwrap()),
            };
            ok(op.apply(&mut s, Controls::NONE), "apply")?;
        }
        ensure!((s.norm_sqr() - 1.0).abs() < 1e-9, "norm drifted to {}", s.norm_sqr());
    }

    // U then U† is the identity
    let ops = round_trip_ops(&mut r)?;
    for (name, op) in &ops {
        let width = width_of(op.as_ref()).max(1);
        for _ in 0..64 {
            let s0 = random_state(&mut r, width);
            let mut s = s0.clone();
            ok(op.apply(&mut s, Controls::NONE), name)?;
            ensure!((s.norm_sqr() - 1.0).abs() < 1e-9, "{name}: norm {}", s.norm_sqr());
            ok(op.apply_adjoint(&mut s, Controls::NONE), name)?;
            ensure!(s.approx_eq(&s0, 1e-9), "{name}: round trip off by {:e}", s.max_distance(&s0));
        }
    }

    // controlled-composition and product-distributivity identities:
    // index qubits 0..2, estimation qubit 2, work qubits 3..5
    let index = Register::new("y", 0, 2);
    let (eq, bits) = (2usize, vec![3usize, 4]);
    let mut worst = 0.0f64;
    for _ in 0..16 {
        let a: Vec<Op> = (0..4).map(|_| random_gate(&mut r, bits.clone())).collect();
        let b: Vec<Op> = (0..4).map(|_| random_gate(&mut r, bits.clone())).collect();
        let ctl = |u: &Op| -> Op { Arc::new(Controlled::new(Controls::qubit(eq, true), u.clone()).unwrap()) };
        let ab: Vec<Op> = a.iter().zip(&b).map(|(x, y)| Arc::new(Sequence(vec![y.clone(), x.clone()])) as Op).collect();
        let lhs = BranchControlled::new(index.clone(), ab.iter().map(ctl).collect()).unwrap();
        let rhs = Sequence(vec![
            Arc::new(BranchControlled::new(index.clone(), b.iter().map(ctl).collect()).unwrap()),
            Arc::new(BranchControlled::new(index.clone(), a.iter().map(ctl).collect()).unwrap()),
        ]);
        let plain_lhs = BranchControlled::new(index.clone(), ab.clone()).unwrap();
        let plain_rhs = Sequence(vec![
            Arc::new(BranchControlled::new(index.clone(), b.clone()).unwrap()),
            Arc::new(BranchControlled::new(index.clone(), a.clone()).unwrap()),
        ]);
        for _ in 0..8 {
            let s0 = random_state(&mut r, 5);
            worst = worst.max(applied(&s0, &lhs).unwrap().max_distance(&applied(&s0, &rhs).unwrap()));
            worst = worst.max(applied(&s0, &plain_lhs).unwrap().max_distance(&applied(&s0, &plain_rhs).unwrap()));
            // (|p⟩⟨p| ⊗ A)(|q⟩⟨q| ⊗ B) = δ_pq |p⟩⟨p| ⊗ AB, with A, B on work qubits
            let v = s0.amplitudes().to_vec();
            for p in 0..2 {
                for q in 0..2 {
                    let left = project(&scaled_apply(&project(&scaled_apply(&project(&v, eq, q), b[0].as_ref())?, eq, q), a[0].as_ref())?, eq, p);
                    let right = if p == q {
                        project(&scaled_apply(&project(&v, eq, p), ab[0].as_ref())?, eq, p)
                    } else {
                        vec![C64::new(0.0, 0.0); v.len()]
                    };
                    worst = worst.max(max_gap(&left, &right));
                }
            }
        }
    }
    ensure!(worst < 1e-10, "operator identity off by {worst:e}");

    // seed determinism
    let od = ok(DistributionOracle::from_weights(&[0.55, 0.2, 0.15, 0.1]), "od")?;
    for seed in 0..4 {
        let o = FilterOptions { seed, ..FilterOptions::default() };
        let x = ok(profil(&od, 0.5, 0.125, 0.15, o), "profil")?;
        let y = ok(profil(&od, 0.5, 0.125, 0.15, o), "profil")?;
        ensure!((x.flag, x.witness, x.exact_success_prob) == (y.flag, y.witness, y.exact_success_prob), "profil seed {seed}");
        let a = amplitude_oracle(C64::from_polar(0.6, 1.0), 7);
        let cfg = TrueAmpEstConfig { epsilon: 0.125, delta: 0.3, backend: EstimationBackend::Qae, seed };
        let x = ok(true_amp_est(&a, 1, cfg), "estimate")?;
        let y = ok(true_amp_est(&a, 1, cfg), "estimate")?;
        ensure!(x.re_samples == y.re_samples && x.im_samples == y.im_samples, "true amplitude seed {seed}");
        let arr = ok(InputArray::new(vec![1, 3, 1, 0], 4), "array")?;
        let x = ok(kdistinctness(&arr, 2, 0.1, o), "kdist")?;
        let y = ok(kdistinctness(&arr, 2, 0.1, o), "kdist")?;
        ensure!((x.answer, x.witness) == (y.answer, y.witness), "kdist seed {seed}");
        let mo = ok(DistributionOracle::from_weights(&[0.1, 0.5, 0.2, 0.2]), "od")?;
        let x = ok(mode_search(&mo, 0.3, 0.1, o), "mode")?;
        let y = ok(mode_search(&mo, 0.3, 0.1, o), "mode")?;
        ensure!(x.mode == y.mode && x.probability_estimate == y.probability_estimate, "mode seed {seed}");
        let s = random_state(&mut rng(seed), 6);
        let reg = Register::new("all", 0, 6);
        let m1 = ok(s.measure(&reg, &mut rng(seed)), "measure")?.0;
        let m2 = ok(s.measure(&reg, &mut rng(seed)), "measure")?.0;
        ensure!(m1 == m2, "measurement seed {seed}");
    }
    Ok(format!(
        "64 random circuits; {} ops round-trip on 64 states each; identities within {worst:.1e}; 5 seeded pipelines reproducible",
        ops.len()
    ))
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 12] = [
        (1, "QAE confidence", 10, qae_confidence),
        (2, "query exactness", 10, query_exactness),
        (3, "Hadamard tests", 5, hadamard_marginals),
        (4, "true amplitude estimation", 60, true_amplitude_grid),
        (5, "boosted-oracle certificate", 30, biased_prep_certificate),
        (6, "amplification with a biased oracle", 300, errored_amplify_end_to_end),
        (7, "probability filter", 600, probability_filter_cases),
        (8, "amplitude filter", 600, amplitude_filter_cases),
        (9, "k-distinctness", 900, k_distinctness_exhaustive),
        (10, "non-linearity", 900, nonlinearity_cases),
        (11, "gadget exhaustiveness", 60, gadget_exhaustiveness),
        (12, "property suites", 120, property_suites),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > Duration::from_secs(limit) => {
                Err(format!("{detail}; took {:.1} s, limit {limit} s", elapsed.as_secs_f64()))
            }
            other => other,
        };
        match result {
            Ok(detail) => println!("[PASS] criterion {id}: {name}: {detail} ({:.1} s)", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {id}: {name}: {why} ({:.1} s)", elapsed.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
