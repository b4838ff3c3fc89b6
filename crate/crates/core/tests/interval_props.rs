//! Containment and outward-rounding properties of interval arithmetic.

mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, Zero};
use proptest::prelude::*;
use quantrange_core::{Interval, Range};

use common::iv;

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6f64..1e6,
        -1.0f64..1.0,
        (-1e-3f64..1e-3),
        (1u32..60, -1000i64..1000).prop_map(|(e, k)| k as f64 * 2f64.powi(-(e as i32))),
    ]
}

fn interval() -> impl Strategy<Value = Interval> {
    (finite(), finite()).prop_map(|(a, b)| iv(a.min(b), a.max(b)))
}

/// An interval together with a point inside it.
fn with_point() -> impl Strategy<Value = (Interval, f64)> {
    (interval(), 0.0f64..=1.0).prop_map(|(x, t)| {
        let p = (x.lo() + t * (x.hi() - x.lo())).clamp(x.lo(), x.hi());
        (x, p)
    })
}

fn exact_binary(op: u8, a: &BigRational, b: &BigRational) -> BigRational {
    match op {
        0 => a + b,
        1 => a - b,
        2 => a * b,
        _ => a / b,
    }
}

fn apply(op: u8, a: Interval, b: Interval) -> Option<Interval> {
    match op {
        0 => Some(a + b),
        1 => Some(a - b),
        2 => Some(a * b),
        _ => a.checked_div(b).ok(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    /// Pointwise results computed exactly in rationals lie in the interval
    /// result for every binary operation.
    #[test]
    fn binary_ops_contain_exact_results(op in 0u8..4, (a, x) in with_point(), (b, y) in with_point()) {
        if let Some(r) = apply(op, a, b) {
            let exact = exact_binary(op, &rat(x), &rat(y));
            prop_assert!(rat(r.lo()) <= exact && exact <= rat(r.hi()), "{a:?} op{op} {b:?} = {r:?} misses {x} op {y}");
        } else {
            prop_assert!(b.contains_zero());
        }
    }

    #[test]
    fn unary_ops_contain_point_results((a, x) in with_point(), n in 0u32..7) {
        let s = a.sin();
        let c = a.cos();
        prop_assert!(s.contains(x.sin()), "sin {a:?} = {s:?} misses {x}");
        prop_assert!(c.contains(x.cos()), "cos {a:?} = {c:?} misses {x}");
        prop_assert!(s.lo() >= -1.0 && s.hi() <= 1.0 && c.lo() >= -1.0 && c.hi() <= 1.0);
        let p = a.powi(n);
        let mut exact = BigRational::from_integer(BigInt::from(1));
        let rx = rat(x);
        for _ in 0..n {
            exact = &exact * &rx;
        }
        prop_assert!(rat(p.lo()) <= exact && exact <= rat(p.hi()), "{a:?}^{n} = {p:?} misses {x}");
        let neg = -a;
        prop_assert!(neg.contains(-x));
    }

    /// On arbitrary f64 (hence dyadic) end points the interval bounds never
    /// lie inside the exact rational image.
    #[test]
    fn rounding_is_outward(op in 0u8..4, a in interval(), b in interval()) {
        if let Some(r) = apply(op, a, b) {
            let corners = [(a.lo(), b.lo()), (a.lo(), b.hi()), (a.hi(), b.lo()), (a.hi(), b.hi())];
            let vals: Vec<BigRational> = corners.iter().map(|&(x, y)| exact_binary(op, &rat(x), &rat(y))).collect();
            let min = vals.iter().min().unwrap();
            let max = vals.iter().max().unwrap();
            prop_assert!(rat(r.lo()) <= *min && *max <= rat(r.hi()));
            // and the enclosure is tight: at most one ulp beyond the exact end points
            prop_assert!(rat(r.lo().next_up()) > *min || rat(r.lo()) == *min);
            prop_assert!(rat(r.hi().next_down()) < *max || rat(r.hi()) == *max);
        }
    }

    #[test]
    fn abs_bounds_enclose_absolute_values((a, x) in with_point()) {
        let b = a.abs_bounds();
        prop_assert!(b.lo() <= x.abs() && x.abs() <= b.hi());
        prop_assert!(b.lo() >= 0.0);
    }

    #[test]
    fn hull_and_intersection_are_set_operations((a, x) in with_point(), (b, y) in with_point()) {
        let h = a.hull(&b);
        prop_assert!(h.contains(x) && h.contains(y));
        match a.intersect(&b) {
            Range::Empty => prop_assert!(a.hi() < b.lo() || b.hi() < a.lo()),
            Range::Bounded(i) => {
                prop_assert!(i.is_subset_of(&a) && i.is_subset_of(&b));
                prop_assert_eq!(a.contains(x) && b.contains(x), i.contains(x));
            }
        }
    }
}

#[test]
fn quotient_matches_grid_hull() {
    let q = iv(1.0, 2.0).checked_div(iv(0.5, 1.0)).unwrap();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=100 {
        for j in 0..=100 {
            let n = 1.0 + i as f64 / 100.0;
            let d = 0.5 + j as f64 / 200.0;
            lo = lo.min(n / d);
            hi = hi.max(n / d);
        }
    }
    assert_eq!((q.lo(), q.hi()), (lo, hi));
}

#[test]
fn exact_small_cases_are_not_widened() {
    let zero = BigRational::zero();
    let sum = iv(0.25, 0.5) + iv(-0.25, 0.125);
    assert_eq!(rat(sum.lo()), zero);
    assert!(rat(sum.hi()).is_positive());
    assert_eq!(sum, iv(0.0, 0.625));
    let ratio = BigRational::from_f64(0.1).unwrap() * BigRational::from_f64(3.0).unwrap();
    let p = iv(0.1, 0.1) * iv(3.0, 3.0);
    assert!(rat(p.lo()) < ratio && ratio < rat(p.hi()));
}
