//! Randomized structural invariants on small spaces, driven by proptest.
//! These complement the seeded suite in the verify module with
//! shrinkable counterexamples.

use boxkit_core::measure::{eleven_box, inflate, st_box, threshold_set};
use boxkit_core::{classical_box, core, Alphabet, Event, ProductSpace, Rational, SubsetMask};
use proptest::prelude::*;
use std::sync::Arc;

/// Weights for one alphabet: 2 or 3 numerators, possibly one zero,
/// normalized to sum to 1.
fn alphabet_strategy() -> impl Strategy<Value = Alphabet> {
    prop::collection::vec(0u32..5, 2..=3).prop_filter_map("needs positive mass", |nums| {
        let total: u32 = nums.iter().sum();
        if total == 0 {
            return None;
        }
        let weights = nums
            .iter()
            .map(|&v| Rational::new(v as i64, total as i64))
            .collect();
        Alphabet::new(weights).ok()
    })
}

fn space_strategy() -> impl Strategy<Value = Arc<ProductSpace>> {
    prop::collection::vec(alphabet_strategy(), 1..=3)
        .prop_map(|alphas| ProductSpace::new(alphas).unwrap())
}

/// A space together with two events over it.
fn instance_strategy() -> impl Strategy<Value = (Arc<ProductSpace>, Event, Event)> {
    space_strategy().prop_flat_map(|space| {
        let count = space.outcome_count();
        (
            Just(space.clone()),
            prop::collection::vec(any::<bool>(), count),
            prop::collection::vec(any::<bool>(), count),
        )
            .prop_map(|(space, abits, bbits)| {
                let idx = |bits: &[bool]| {
                    bits.iter()
                        .enumerate()
                        .filter(|(_, &b)| b)
                        .map(|(i, _)| i)
                        .collect::<Vec<_>>()
                };
                let a = Event::from_indices(space.clone(), &idx(&abits));
                let b = Event::from_indices(space.clone(), &idx(&bbits));
                (space, a, b)
            })
    })
}

fn threshold_strategy() -> impl Strategy<Value = Rational> {
    (0i64..=4).prop_map(|p| Rational::new(p, 4))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn encode_decode_roundtrip(space in space_strategy(), raw in 0usize..200) {
        let idx = boxkit_core::OutcomeIndex(raw % space.outcome_count());
        let digits = space.decode(idx);
        prop_assert_eq!(space.encode(&digits).unwrap(), idx);
    }

    #[test]
    fn probability_is_additive((_, a, b) in instance_strategy()) {
        let union = a.union(&b);
        let inter = a.intersect(&b);
        prop_assert_eq!(union.prob() + inter.prob(), a.prob() + b.prob());
    }

    #[test]
    fn box_is_commutative_and_contained((_, a, b) in instance_strategy()) {
        let ab = classical_box(&a, &b);
        prop_assert_eq!(&ab, &classical_box(&b, &a));
        prop_assert!(ab.is_subset_of(&a.intersect(&b)));
    }

    #[test]
    fn box_inside_measure_box_and_bound((_, a, b) in instance_strategy()) {
        let ab = classical_box(&a, &b);
        let eleven = eleven_box(&a, &b).unwrap();
        prop_assert!(ab.is_subset_of(&eleven));
        prop_assert!(eleven.prob() <= a.prob() * b.prob());
    }

    #[test]
    fn core_is_contained_and_preserves_box((_, a, b) in instance_strategy()) {
        let ca = core(&a);
        prop_assert!(ca.is_subset_of(&a));
        // The box-through-cores identity is stated for proper subsets: a
        // full event is its own core's superset through the empty mask.
        prop_assume!(!a.is_full() && !b.is_full());
        let cb = core(&b);
        prop_assert_eq!(classical_box(&a, &b), classical_box(&ca, &cb));
    }

    #[test]
    fn box_monotone_in_both_arguments((_, a, b) in instance_strategy()) {
        let smaller = a.intersect(&b);
        prop_assert!(classical_box(&smaller, &b).is_subset_of(&classical_box(&a, &b)));
    }

    #[test]
    fn threshold_sets_antitone(
        (space, a, _) in instance_strategy(),
        lo in threshold_strategy(),
        hi in threshold_strategy(),
    ) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        for mask in SubsetMask::all(space.n()) {
            let at_lo = threshold_set(&a, &lo, mask).unwrap();
            let at_hi = threshold_set(&a, &hi, mask).unwrap();
            prop_assert!(at_hi.is_subset_of(&at_lo));
        }
    }

    #[test]
    fn inflate_contains_event_for_positive_r((_, a, _) in instance_strategy()) {
        let r = Rational::new(1, 2);
        prop_assert!(a.is_subset_of(&inflate(&a, &r).unwrap()));
        // r = 0 inflates to the whole space.
        prop_assert!(inflate(&a, &Rational::zero()).unwrap().is_full());
    }

    #[test]
    fn st_box_antitone_in_thresholds(
        (_, a, b) in instance_strategy(),
        s in threshold_strategy(),
        t in threshold_strategy(),
    ) {
        use boxkit_core::ThresholdPair;
        let loose = ThresholdPair::new(s.clone(), t.clone()).unwrap();
        let bump = |v: &Rational| {
            let raised = v.clone() + Rational::new(1, 4);
            if raised > Rational::one() { Rational::one() } else { raised }
        };
        let tight = ThresholdPair::new(bump(&s), bump(&t)).unwrap();
        let at_tight = st_box(&a, &b, &tight).unwrap();
        let at_loose = st_box(&a, &b, &loose).unwrap();
        prop_assert!(at_tight.is_subset_of(&at_loose));
    }

    #[test]
    fn st_box_bounded_by_inflated_product(
        (_, a, b) in instance_strategy(),
        s in threshold_strategy(),
        t in threshold_strategy(),
    ) {
        use boxkit_core::ThresholdPair;
        let st = ThresholdPair::new(s.clone(), t.clone()).unwrap();
        let lhs = st_box(&a, &b, &st).unwrap().prob();
        let rhs = inflate(&a, &s).unwrap().prob() * inflate(&b, &t).unwrap().prob();
        prop_assert!(lhs <= rhs);
    }
}
