//! Measure-free set operations: cylinder sets [A]_K, the classical box
//! A box B, and cylindrical cores E^(0).

use crate::space::{CylinderPattern, Event, OutcomeIndex, ProductSpace, SubsetMask};
use rayon::prelude::*;

/// A per-outcome certificate for membership in the classical box: disjoint
/// coordinate sets whose cylinders land inside A and B respectively.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoxWitness {
    pub outcome: OutcomeIndex,
    pub k: SubsetMask,
    pub l: SubsetMask,
}

/// Visits every assignment to the coordinates outside `fixed`, in increasing
/// coordinate order, ascending lexicographically.
pub fn for_each_completion(
    space: &ProductSpace,
    fixed: SubsetMask,
    mut f: impl FnMut(&[usize]),
) {
    let free: Vec<usize> = fixed.complement(space.n()).indices(space.n()).collect();
    let mut digits = vec![0usize; free.len()];
    loop {
        f(&digits);
        let mut i = free.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < space.size(free[i]) {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Tests [x]_K subset of A by enumerating every completion of the pattern.
pub fn cylinder_contained(a: &Event, pattern: &CylinderPattern) -> bool {
    let space = a.space();
    let mut ok = true;
    for_each_completion(space, pattern.mask, |completion| {
        if ok {
            let digits = pattern.splice(space, completion);
            let idx = space.encode(&digits).expect("pattern digits in range");
            if !a.contains(idx) {
                ok = false;
            }
        }
    });
    ok
}

/// The cylinder set [A]_K = {x : [x]_K subset of A}, computed by the
/// projection route: mark every K-pattern that occurs in the complement of
/// A, then keep the outcomes whose K-pattern was never marked.
pub fn cylinder_set(a: &Event, mask: SubsetMask) -> Event {
    let space = a.space();
    let mut bad = vec![false; space.pattern_count(mask)];
    space.scan(mask, |idx, pat, _| {
        if !a.contains_raw(idx) {
            bad[pat] = true;
        }
    });
    let mut result = Event::empty(space.clone());
    space.scan(mask, |idx, pat, _| {
        if !bad[pat] {
            result.insert(OutcomeIndex(idx));
        }
    });
    result
}

/// A box B as the union over all masks K of [A]_K with [B]_{K^c};
/// restricting L to K^c loses nothing for the classical box.
pub fn classical_box(a: &Event, b: &Event) -> Event {
    assert!(a.same_space(b));
    let space = a.space();
    let n = space.n();
    SubsetMask::all(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| cylinder_set(a, k).intersect(&cylinder_set(b, k.complement(n))))
        .reduce(
            || Event::empty(space.clone()),
            |mut acc, e| {
                acc.union_in_place(&e);
                acc
            },
        )
}

/// Exhibits a disjoint witness pair for x in A box B, or None. Scans K in
/// increasing numeric order and, for the first workable K, L over subsets
/// of K^c in increasing numeric order, so the answer is deterministic.
pub fn find_witness(a: &Event, b: &Event, x: OutcomeIndex) -> Option<BoxWitness> {
    assert!(a.same_space(b));
    let space = a.space();
    let n = space.n();
    for k in SubsetMask::all(n) {
        let pat_a = CylinderPattern::from_outcome(space, x, k);
        if !cylinder_contained(a, &pat_a) {
            continue;
        }
        let kc = k.complement(n);
        // Enumerate submasks of K^c in increasing numeric order.
        for l in SubsetMask::all(n) {
            if !l.is_subset_of(kc) {
                continue;
            }
            let pat_b = CylinderPattern::from_outcome(space, x, l);
            if cylinder_contained(b, &pat_b) {
                return Some(BoxWitness { outcome: x, k, l });
            }
        }
    }
    None
}

/// The cylindrical core E^(0): the union of [E]_K over all K with
/// |K| <= n-1. For n = 1 only K = empty qualifies, so the core is S when
/// E = S and empty otherwise.
pub fn core(e: &Event) -> Event {
    let space = e.space();
    let n = space.n();
    SubsetMask::all(n)
        .filter(|k| k.popcount() < n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| cylinder_set(e, k))
        .reduce(
            || Event::empty(space.clone()),
            |mut acc, e| {
                acc.union_in_place(&e);
                acc
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Alphabet, ProductSpace};
    use crate::Rational;
    use std::sync::Arc;

    fn fair(n: usize) -> Arc<ProductSpace> {
        ProductSpace::fair_bits(n).unwrap()
    }

    /// Definitional [A]_K: keep x iff every completion of its K-pattern is in A.
    fn oracle_cylinder_set(a: &Event, mask: SubsetMask) -> Event {
        let space = a.space();
        let mut result = Event::empty(space.clone());
        for idx in 0..space.outcome_count() {
            let x = OutcomeIndex(idx);
            let pat = CylinderPattern::from_outcome(space, x, mask);
            if cylinder_contained(a, &pat) {
                result.insert(x);
            }
        }
        result
    }

    /// Definitional per-outcome box: exists disjoint K, L with both
    /// cylinder inclusions.
    fn oracle_box(a: &Event, b: &Event) -> Event {
        let space = a.space();
        let n = space.n();
        let mut result = Event::empty(space.clone());
        for idx in 0..space.outcome_count() {
            let x = OutcomeIndex(idx);
            'outer: for k in SubsetMask::all(n) {
                for l in SubsetMask::all(n) {
                    if !k.is_disjoint(l) {
                        continue;
                    }
                    let pa = CylinderPattern::from_outcome(space, x, k);
                    let pb = CylinderPattern::from_outcome(space, x, l);
                    if cylinder_contained(a, &pa) && cylinder_contained(b, &pb) {
                        result.insert(x);
                        break 'outer;
                    }
                }
            }
        }
        result
    }

    #[test]
    fn cylinder_set_trivia() {
        let s = fair(2);
        let a = Event::from_indices(s.clone(), &[0, 1]);
        assert_eq!(cylinder_set(&a, SubsetMask::full(2)), a);
        assert!(cylinder_set(&a, SubsetMask::empty()).is_empty());
        let full = Event::full(s.clone());
        assert!(cylinder_set(&full, SubsetMask::empty()).is_full());
    }

    #[test]
    fn cylinder_set_derived_example() {
        // A = {(0,0),(0,1)} on two fair bits, K = {first coordinate}.
        let s = fair(2);
        let a = Event::from_indices(s.clone(), &[0, 1]);
        let k = SubsetMask::from_indices(&[0]);
        let got = cylinder_set(&a, k);
        assert_eq!(got, oracle_cylinder_set(&a, k));
        assert_eq!(got, a);
    }

    #[test]
    fn cylinder_set_matches_oracle_exhaustively() {
        // Every event on 3 fair bits, every mask.
        let s = fair(3);
        for bits in 0u32..256 {
            let members: Vec<usize> = (0..8).filter(|i| bits & (1 << i) != 0).collect();
            let a = Event::from_indices(s.clone(), &members);
            for mask in SubsetMask::all(3) {
                assert_eq!(cylinder_set(&a, mask), oracle_cylinder_set(&a, mask));
            }
        }
    }

    #[test]
    fn box_with_full_space_is_identity() {
        let s = fair(3);
        for indices in [vec![], vec![0], vec![1, 5, 7], (0..8).collect::<Vec<_>>()] {
            let a = Event::from_indices(s.clone(), &indices);
            assert_eq!(classical_box(&a, &Event::full(s.clone())), a);
        }
    }

    #[test]
    fn box_matches_definitional_oracle() {
        let s = fair(3);
        for seed in [0xad1u64, 0xbeef, 0x1234, 0x777] {
            let mut state = seed;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                state >> 33
            };
            let a_members: Vec<usize> = (0..8).filter(|_| next() % 2 == 0).collect();
            let b_members: Vec<usize> = (0..8).filter(|_| next() % 2 == 0).collect();
            let a = Event::from_indices(s.clone(), &a_members);
            let b = Event::from_indices(s.clone(), &b_members);
            let boxed = classical_box(&a, &b);
            assert_eq!(boxed, oracle_box(&a, &b));
            assert!(boxed.is_subset_of(&a.intersect(&b)));
        }
    }

    #[test]
    fn box_monotone_in_arguments() {
        let s = fair(3);
        let a = Event::from_indices(s.clone(), &[0, 1, 2]);
        let a_bigger = Event::from_indices(s.clone(), &[0, 1, 2, 5, 6]);
        let b = Event::from_indices(s.clone(), &[1, 2, 3, 7]);
        assert!(classical_box(&a, &b).is_subset_of(&classical_box(&a_bigger, &b)));
    }

    #[test]
    fn zero_atom_box_is_empty() {
        // Alphabets {0,1,2} with weights (1/2,1/2,0), A = B = {x1 != x2}.
        let alpha = Alphabet::new(vec![
            Rational::new(1, 2),
            Rational::new(1, 2),
            Rational::zero(),
        ])
        .unwrap();
        let s = ProductSpace::new(vec![alpha.clone(), alpha]).unwrap();
        let a = Event::from_predicate(s.clone(), |d| d[0] != d[1]);
        let boxed = classical_box(&a, &a);
        assert!(boxed.is_empty());
        assert_eq!(boxed, oracle_box(&a, &a));
    }

    #[test]
    fn witness_trivia() {
        let s = fair(2);
        let full = Event::full(s.clone());
        let w = find_witness(&full, &full, OutcomeIndex(0)).unwrap();
        assert_eq!(w.k, SubsetMask::empty());
        assert_eq!(w.l, SubsetMask::empty());

        let a = Event::from_indices(s.clone(), &[0]);
        let b = Event::from_indices(s.clone(), &[3]);
        assert!(find_witness(&a, &b, OutcomeIndex(1)).is_none());
    }

    #[test]
    fn witness_validates_against_membership() {
        let s = fair(3);
        let a = Event::from_indices(s.clone(), &[0, 1, 2, 3]);
        let b = Event::from_indices(s.clone(), &[1, 3, 5, 7]);
        let boxed = classical_box(&a, &b);
        for idx in 0..s.outcome_count() {
            let x = OutcomeIndex(idx);
            match find_witness(&a, &b, x) {
                Some(w) => {
                    assert!(boxed.contains(x));
                    assert!(w.k.is_disjoint(w.l));
                    let pa = CylinderPattern::from_outcome(&s, x, w.k);
                    let pb = CylinderPattern::from_outcome(&s, x, w.l);
                    assert!(cylinder_contained(&a, &pa));
                    assert!(cylinder_contained(&b, &pb));
                }
                None => assert!(!boxed.contains(x)),
            }
        }
    }

    #[test]
    fn core_trivia() {
        let s = fair(3);
        assert!(core(&Event::full(s.clone())).is_full());
        assert!(core(&Event::empty(s.clone())).is_empty());
    }

    #[test]
    fn core_n1_degenerates() {
        let s = fair(1);
        assert!(core(&Event::full(s.clone())).is_full());
        assert!(core(&Event::from_indices(s.clone(), &[0])).is_empty());
    }

    #[test]
    fn core_preserves_box_against_proper_subsets() {
        let s = fair(3);
        let a = Event::from_indices(s.clone(), &[0, 1, 4, 5, 7]);
        let a0 = core(&a);
        assert!(a0.is_subset_of(&a));
        for b_bits in 1u32..255 {
            // Proper subsets only.
            let members: Vec<usize> = (0..8).filter(|i| b_bits & (1 << i) != 0).collect();
            if members.len() == 8 {
                continue;
            }
            let b = Event::from_indices(s.clone(), &members);
            let b0 = core(&b);
            let ab = classical_box(&a, &b);
            assert_eq!(ab, classical_box(&a0, &b));
            assert_eq!(ab, classical_box(&a, &b0));
            assert_eq!(ab, classical_box(&a0, &b0));
        }
    }

    #[test]
    fn core_minimality_construction() {
        // For x in core(A) the proof's construction B = [x]_{K^c} puts
        // x in core(A) box B with B a proper subset.
        let s = fair(3);
        let a = Event::from_indices(s.clone(), &[0, 1, 2, 3, 6]);
        let a0 = core(&a);
        let n = s.n();
        for x in a0.iter() {
            let mut witnessed = false;
            for k in SubsetMask::all(n) {
                if k.popcount() == n {
                    continue;
                }
                let pat = CylinderPattern::from_outcome(&s, x, k);
                if !cylinder_contained(&a0, &pat) {
                    continue;
                }
                let b = s.cylinder(x, k.complement(n));
                assert!(!b.is_full());
                if classical_box(&a0, &b).contains(x) {
                    witnessed = true;
                    break;
                }
            }
            assert!(witnessed, "no constructive witness for {:?}", x);
        }
    }
}
