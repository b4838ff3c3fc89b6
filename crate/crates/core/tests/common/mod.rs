//! Random problem builders shared by the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;
use quantrange_core::expr::parse;
use quantrange_core::problem::{OutputSpec, QuantifiedProblem, Quantifier, QuantifierPrefix, Variable};
use quantrange_core::Interval;

pub fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

pub fn quantifier() -> impl Strategy<Value = Quantifier> {
    prop_oneof![Just(Quantifier::ForAll), Just(Quantifier::Exists)]
}

/// A dyadic number `k / 2^shift` with small numerator, exact in f64.
pub fn dyadic(max: i64, shift: u32) -> impl Strategy<Value = f64> {
    (-max..=max).prop_map(move |k| k as f64 / (1u64 << shift) as f64)
}

/// A non-empty interval with dyadic end points.
pub fn dyadic_interval() -> impl Strategy<Value = Interval> {
    (dyadic(64, 3), 0i64..=32).prop_map(|(lo, w)| iv(lo, lo + w as f64 / 8.0))
}

/// Affine problem data: constant, coefficients, per-variable quantifiers
/// and domains, all dyadic.
#[derive(Debug, Clone)]
pub struct AffineCase {
    pub constant: f64,
    pub coeffs: Vec<f64>,
    pub quants: Vec<Quantifier>,
    pub domains: Vec<Interval>,
}

impl AffineCase {
    pub fn text(&self) -> String {
        let mut s = format!("{:?}", self.constant);
        for (i, c) in self.coeffs.iter().enumerate() {
            s.push_str(&format!(" + {:?}*x{i}", c));
        }
        s
    }

    pub fn problem(&self) -> QuantifiedProblem {
        problem_from(&self.text(), &self.quants, &self.domains)
    }
}

pub fn affine_case(max_vars: usize) -> impl Strategy<Value = AffineCase> {
    (1..=max_vars).prop_flat_map(|p| {
        (
            dyadic(32, 2),
            prop::collection::vec(dyadic(32, 3), p),
            prop::collection::vec(quantifier(), p),
            prop::collection::vec(dyadic_interval(), p),
        )
            .prop_map(|(constant, coeffs, quants, domains)| AffineCase { constant, coeffs, quants, domains })
    })
}

pub fn problem_from(text: &str, quants: &[Quantifier], domains: &[Interval]) -> QuantifiedProblem {
    let vars = domains.iter().enumerate().map(|(i, d)| Variable::new(format!("x{i}"), *d)).collect();
    QuantifiedProblem::new(
        vars,
        QuantifierPrefix::from_quantifiers(quants),
        vec![OutputSpec::expr("z", parse(text).unwrap())],
    )
    .unwrap()
}

/// A polynomial of degree at most 2 in `p` variables as text.
pub fn quadratic_text(p: usize) -> impl Strategy<Value = String> {
    let linear = prop::collection::vec(dyadic(16, 3), p);
    let square = prop::collection::vec(dyadic(16, 3), p * p);
    (dyadic(16, 2), linear, square).prop_map(move |(c, lin, sq)| {
        let mut s = format!("{c:?}");
        for (i, a) in lin.iter().enumerate() {
            s.push_str(&format!(" + {a:?}*x{i}"));
        }
        for i in 0..p {
            for j in i..p {
                let a = sq[i * p + j];
                if a != 0.0 {
                    s.push_str(&format!(" + {a:?}*x{i}*x{j}"));
                }
            }
        }
        s
    })
}

/// Random expressions over `x0..x{vars-1}` up to the given depth, built only
/// from operations that are defined everywhere.
pub fn expr_text(vars: usize, depth: u32) -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0..vars).prop_map(|i| format!("x{i}")),
        dyadic(40, 3).prop_map(|c| format!("{:?}", c.abs())),
    ];
    leaf.prop_recursive(depth, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} / (1.5 + cos({b})))")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("msin({a}, {b})")),
        ]
    })
}
