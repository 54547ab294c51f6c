use qfilter::gadgets::*;
use qfilter::sim::*;
use std::f64::consts::PI;

fn basis_image(op: &dyn Unitary, width: usize, input: usize) -> (usize, C64) {
    let mut s = StateVector::basis(width, input).unwrap();
    op.apply(&mut s, Controls::NONE).unwrap();
    let (idx, amp) = s.amplitudes().iter().enumerate().find(|(_, a)| a.norm() > 0.5).map(|(i, a)| (i, *a)).unwrap();
    assert!((amp.norm() - 1.0).abs() < 1e-12, "not a basis map");
    (idx, amp)
}

#[test]
fn equality_phase_exhaustive() {
    for l in 1..=5 {
        for m in 0..=l {
            let a = Register::new("a", 0, l);
            let b = Register::new("b", l, l);
            let op = EqPrefixPhase::new(a.clone(), b.clone(), m).unwrap();
            for i in 0..1usize << (2 * l) {
                let (j, amp) = basis_image(&op, 2 * l, i);
                assert_eq!(i, j);
                let eq = (a.extract(i) >> (l - m)) == (b.extract(i) >> (l - m));
                let want = if eq { -1.0 } else { 1.0 };
                assert!((amp.re - want).abs() < 1e-12, "l={l} m={m} i={i:b}");
            }
        }
    }
}

#[test]
fn half_distance_exhaustive() {
    for l in 1..=5 {
        let y = Register::new("y", 0, l);
        let out = Register::new("o", l, l);
        let op = HalfDistance::new(y.clone(), out.clone()).unwrap();
        for i in 0..1usize << (2 * l) {
            let (j, _) = basis_image(&op, 2 * l, i);
            let yv = y.extract(i) as i64;
            let d = ((1i64 << (l - 1)) - yv).unsigned_abs();
            assert_eq!(y.extract(j), y.extract(i));
            assert_eq!(out.extract(j), out.extract(i) ^ d, "l={l} y={yv}");
        }
    }
}

#[test]
fn compare_exhaustive() {
    for l in 1..=5 {
        let y1 = Register::new("y1", 0, l);
        let y2 = Register::new("y2", l, l);
        let op = CompareMark::new(y1.clone(), y2.clone(), 2 * l).unwrap();
        for i in 0..1usize << (2 * l + 1) {
            let (j, _) = basis_image(&op, 2 * l + 1, i);
            let hit = y2.extract(i) <= y1.extract(i);
            assert_eq!(j, if hit { i ^ (1 << (2 * l)) } else { i });
        }
    }
}

#[test]
fn majority_exhaustive() {
    for k in 1..=5 {
        let ctl = Register::new("c", k + 1, 2);
        let bits: Vec<usize> = (0..k).collect();
        let op = CondMajority::new(Some(ctl), bits, k).unwrap();
        for i in 0..1usize << (k + 3) {
            let (j, _) = basis_image(&op, k + 3, i);
            let ones = (i & ((1 << k) - 1)).count_ones() as usize;
            let hit = 2 * ones >= k;
            assert_eq!(j, if hit { i ^ (1 << k) } else { i }, "k={k} i={i:b}");
        }
    }
}

#[test]
fn gadgets_are_self_inverse() {
    let l = 3;
    let ops: Vec<Box<dyn Unitary>> = vec![
        Box::new(HalfDistance::new(Register::new("y", 0, l), Register::new("o", l, l)).unwrap()),
        Box::new(CompareMark::new(Register::new("a", 0, l), Register::new("b", l, l), 2 * l).unwrap()),
        Box::new(CondMajority::new(None, vec![0, 1, 2], 3).unwrap()),
    ];
    for op in ops {
        for i in 0..1usize << (2 * l + 1) {
            let mut s = StateVector::basis(2 * l + 1, i).unwrap();
            op.apply(&mut s, Controls::NONE).unwrap();
            op.apply_adjoint(&mut s, Controls::NONE).unwrap();
            assert!((s.probability(i) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn half_distance_orders_like_sine_squared() {
    let l = 8;
    let y = Register::new("y", 0, l);
    let out = Register::new("o", l, l);
    let op = HalfDistance::new(y, out.clone()).unwrap();
    let hd: Vec<u64> = (0..1usize << l).map(|v| out.extract(basis_image(&op, 2 * l, v).0)).collect();
    let s2 = |v: usize| (PI * v as f64 / (1u64 << l) as f64).sin().powi(2);
    for a in 0..1usize << l {
        for t in 0..1usize << l {
            assert_eq!(hd[a] <= hd[t], s2(a) >= s2(t) - 1e-12, "a={a} t={t}");
        }
    }
}

#[test]
fn gadget_validation() {
    assert!(EqPrefixPhase::new(Register::new("a", 0, 2), Register::new("b", 1, 2), 1).is_err());
    assert!(EqPrefixPhase::new(Register::new("a", 0, 2), Register::new("b", 2, 2), 3).is_err());
    assert!(HalfDistance::new(Register::new("y", 0, 3), Register::new("o", 3, 2)).is_err());
    assert!(CompareMark::new(Register::new("a", 0, 2), Register::new("b", 2, 3), 6).is_err());
    assert!(CondMajority::new(None, vec![0, 0], 1).is_err());
    assert!(CondMajority::new(None, vec![], 1).is_err());
}
