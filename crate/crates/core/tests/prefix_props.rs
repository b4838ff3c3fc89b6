//! Quantifier prefix normalization.

use proptest::prelude::*;
use quantrange_core::problem::{Quantifier, QuantifierPrefix};

fn raw_prefix() -> impl Strategy<Value = Vec<(Quantifier, usize)>> {
    prop::collection::vec(
        (prop_oneof![Just(Quantifier::ForAll), Just(Quantifier::Exists)], 0usize..4),
        0..10,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn normalization_is_idempotent(raw in raw_prefix()) {
        let once = QuantifierPrefix::normalize(&raw);
        let twice = QuantifierPrefix::normalize(&once.to_raw());
        prop_assert_eq!(&twice, &once);
    }

    /// Blocks alternate starting with a universal one, come in whole pairs
    /// and keep each variable's quantifier.
    #[test]
    fn normalization_keeps_quantifiers(raw in raw_prefix()) {
        let p = QuantifierPrefix::normalize(&raw);
        let per_var: Vec<Quantifier> = raw.iter().flat_map(|&(q, n)| std::iter::repeat(q).take(n)).collect();
        prop_assert_eq!(p.num_vars(), per_var.len());
        for (v, q) in per_var.iter().enumerate() {
            prop_assert_eq!(p.quantifier_of(v), *q);
        }
        let blocks = p.blocks();
        prop_assert!(blocks.len() >= 2 && blocks.len() % 2 == 0);
        for (i, b) in blocks.iter().enumerate() {
            let expected = if i % 2 == 0 { Quantifier::ForAll } else { Quantifier::Exists };
            prop_assert_eq!(b.quantifier, expected);
        }
        prop_assert_eq!(QuantifierPrefix::from_quantifiers(&per_var), p);
    }
}
