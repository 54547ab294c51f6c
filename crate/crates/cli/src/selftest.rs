//! Small end-to-end checks with known answers.

use crate::CliError;
use qfilter::amp_est::{qae, AEConfig};
use qfilter::biased_aa::choose_k;
use qfilter::filters::{profil, DistributionOracle, FilterOptions, Truth};
use qfilter::hadamard::hadamard_test_real;
use qfilter::mdist::{audit_query_count, demo_family, mdist_amp_est};
use qfilter::sim::{Controls, CountedOracle, Gate, Op, Register, StateVector, Unitary};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::sync::Arc;

fn check(name: &str, f: impl FnOnce() -> qfilter::Result<(bool, String)>) -> Value {
    match f() {
        Ok((pass, detail)) => json!({ "name": name, "pass": pass, "detail": detail }),
        Err(e) => json!({ "name": name, "pass": false, "detail": e.to_string() }),
    }
}

pub fn run() -> Result<Value, CliError> {
    let checks = vec![
        check("estimation law", || {
            // p = sin²(π/8) sits exactly on the m = 3 grid
            let p = (PI / 8.0).sin().powi(2);
            let prep = CountedOracle::from_op("prep", Arc::new(Gate::ry(0, 2.0 * p.sqrt().asin())));
            let marker = CountedOracle::from_op("marker", Arc::new(Gate::z(0)));
            let run = qae(&prep, &marker, AEConfig::new(3)?)?;
            let d = run.raw_distribution()?;
            let hit = d[1] + d[7];
            let calls = marker.snapshot().total();
            Ok(((hit - 1.0).abs() < 1e-10 && calls == 7, format!("Pr[exact] = {hit:.12}, marker calls {calls}")))
        }),
        check("family query count", || {
            let mut totals = Vec::new();
            for (idx, n) in [(1, 1), (1, 2), (2, 4)] {
                let audit = audit_query_count(&mdist_amp_est(&demo_family(idx, 2, n, 1)?, 3)?);
                if audit.oracle_calls > 32 {
                    return Ok((false, format!("{} calls at N = {n}", audit.oracle_calls)));
                }
                totals.push(audit.oracle_calls);
            }
            Ok((totals.iter().all(|t| *t == totals[0]), format!("calls {totals:?} at N = 1, 2, 4")))
        }),
        check("hadamard test", || {
            let psi: Op = Arc::new(qfilter::sim::Sequence::new());
            let phi: Op = Arc::new(Gate::h(0));
            let t = hadamard_test_real(psi, phi, 1)?;
            let mut s = StateVector::new(2)?;
            t.apply(&mut s, Controls::NONE)?;
            let got = s.marginal_probability(&Register::new("c", 1, 1), 0)?;
            let want = 0.5 * (1.0 + 0.5f64.sqrt());
            Ok(((got - want).abs() < 1e-12, format!("Pr[0] = {got:.12}")))
        }),
        check("majority size", || {
            let k = choose_k(0.9, 0.1)?;
            Ok((k == 27, format!("k = {k}")))
        }),
        check("probability filter", || {
            let od = DistributionOracle::from_weights(&[0.55, 0.15, 0.1, 0.05, 0.05, 0.05, 0.03, 0.02])?;
            let out = profil(&od, 0.5, 0.125, 0.15, FilterOptions::default())?;
            Ok((
                out.truth == Truth::Yes && out.flag_correct_prob >= 0.85,
                format!("flag correct with probability {:.4}", out.flag_correct_prob),
            ))
        }),
    ];
    let pass = checks.iter().all(|c| c["pass"] == json!(true));
    Ok(json!({ "checks": checks, "pass": pass }))
}
