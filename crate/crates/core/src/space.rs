//! Finite product probability spaces with exact rational weights.
//!
//! A [`ProductSpace`] is a product of per-coordinate [`Alphabet`]s. Outcomes
//! are addressed by a row-major mixed-radix index in which coordinate 0 is
//! the most significant digit. Events are dense bit vectors over all
//! outcome indices.

use crate::bitset::BitSet;
use crate::error::{BoxkitError, Result};
use crate::rational::Rational;
use std::sync::Arc;

/// Hard cap on the number of outcomes for exact operations. Exceeding it is
/// a refusal, never silent degradation.
pub const MAX_OUTCOMES: u64 = 1 << 24;

/// Coordinate counts are capped so that 2^n mask loops stay enumerable.
pub const MAX_COORDINATES: usize = 24;

/// One coordinate space: a finite symbol set with exact weights.
///
/// Weights must sum to exactly 1; individual weights may be zero
/// (zero-probability atoms are first-class citizens here).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    weights: Vec<Rational>,
}

impl Alphabet {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(BoxkitError::EmptyAlphabet);
        }
        for (i, w) in weights.iter().enumerate() {
            if w.is_negative() {
                return Err(BoxkitError::NegativeWeight {
                    index: i,
                    weight: w.to_string(),
                });
            }
        }
        let sum: Rational = weights.iter().cloned().sum();
        if !sum.is_one() {
            return Err(BoxkitError::WeightsDoNotSumToOne {
                sum: sum.to_string(),
            });
        }
        Ok(Alphabet { weights })
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size >= 1);
        Alphabet {
            weights: vec![Rational::new(1, size as i64); size],
        }
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, symbol: usize) -> &Rational {
        &self.weights[symbol]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// True when the symbol carries positive mass.
    pub fn has_mass(&self, symbol: usize) -> bool {
        !self.weights[symbol].is_zero()
    }
}

/// A subset K of the coordinate axes [n], stored as an n-bit mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask(pub u32);

impl SubsetMask {
    pub fn empty() -> Self {
        SubsetMask(0)
    }

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_COORDINATES);
        SubsetMask(((1u64 << n) - 1) as u32)
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        let mut bits = 0u32;
        for &i in indices {
            bits |= 1 << i;
        }
        SubsetMask(bits)
    }

    pub fn contains(&self, coord: usize) -> bool {
        self.0 & (1 << coord) != 0
    }

    pub fn complement(&self, n: usize) -> Self {
        SubsetMask(!self.0 & SubsetMask::full(n).0)
    }

    pub fn is_disjoint(&self, other: SubsetMask) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(&self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn popcount(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn indices(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..n).filter(move |&i| self.contains(i))
    }

    /// All 2^n masks over n coordinates, in increasing numeric order.
    pub fn all(n: usize) -> impl Iterator<Item = SubsetMask> {
        debug_assert!(n <= MAX_COORDINATES);
        (0u64..(1u64 << n)).map(|m| SubsetMask(m as u32))
    }
}

/// Index of a single outcome in [0, outcome_count).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeIndex(pub usize);

#[derive(Debug, PartialEq, Eq)]
pub struct ProductSpace {
    alphabets: Vec<Alphabet>,
    strides: Vec<usize>,
    outcome_count: usize,
}

impl ProductSpace {
    pub fn new(alphabets: Vec<Alphabet>) -> Result<Arc<Self>> {
        if alphabets.len() > MAX_COORDINATES {
            return Err(BoxkitError::SpaceTooLarge {
                count: alphabets.iter().map(|a| a.size() as u128).product(),
                cap: MAX_OUTCOMES,
            });
        }
        let mut count: u128 = 1;
        for a in &alphabets {
            count *= a.size() as u128;
            if count > MAX_OUTCOMES as u128 {
                return Err(BoxkitError::SpaceTooLarge {
                    count,
                    cap: MAX_OUTCOMES,
                });
            }
        }
        let n = alphabets.len();
        // Row-major: coordinate 0 is the most significant digit.
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * alphabets[i + 1].size();
        }
        Ok(Arc::new(ProductSpace {
            alphabets,
            strides,
            outcome_count: count as usize,
        }))
    }

    /// Product of uniform binary coordinates (n fair coins).
    pub fn fair_bits(n: usize) -> Result<Arc<Self>> {
        ProductSpace::new(vec![Alphabet::uniform(2); n])
    }

    pub fn n(&self) -> usize {
        self.alphabets.len()
    }

    pub fn alphabet(&self, coord: usize) -> &Alphabet {
        &self.alphabets[coord]
    }

    pub fn size(&self, coord: usize) -> usize {
        self.alphabets[coord].size()
    }

    pub fn outcome_count(&self) -> usize {
        self.outcome_count
    }

    pub fn full_mask(&self) -> SubsetMask {
        SubsetMask::full(self.n())
    }

    pub fn encode(&self, digits: &[usize]) -> Result<OutcomeIndex> {
        assert_eq!(digits.len(), self.n());
        let mut idx = 0usize;
        for (i, (&d, s)) in digits.iter().zip(&self.strides).enumerate() {
            if d >= self.alphabets[i].size() {
                return Err(BoxkitError::CoordinateOutOfRange {
                    coord: i,
                    value: d,
                    size: self.alphabets[i].size(),
                });
            }
            idx += d * s;
        }
        Ok(OutcomeIndex(idx))
    }

    pub fn decode(&self, idx: OutcomeIndex) -> Vec<usize> {
        let mut digits = vec![0usize; self.n()];
        self.decode_into(idx, &mut digits);
        digits
    }

    pub fn decode_into(&self, idx: OutcomeIndex, digits: &mut [usize]) {
        debug_assert!(idx.0 < self.outcome_count);
        let mut rem = idx.0;
        for (i, s) in self.strides.iter().enumerate() {
            digits[i] = rem / s;
            rem %= s;
        }
    }

    /// P({x}) for the product measure.
    pub fn point_mass(&self, digits: &[usize]) -> Rational {
        let mut p = Rational::one();
        for (i, &d) in digits.iter().enumerate() {
            if self.alphabets[i].weight(d).is_zero() {
                return Rational::zero();
            }
            p *= self.alphabets[i].weight(d).clone();
        }
        p
    }

    /// Product of the weights of the coordinates inside `mask`.
    pub fn masked_mass(&self, digits: &[usize], mask: SubsetMask) -> Rational {
        let mut p = Rational::one();
        for i in 0..self.n() {
            if mask.contains(i) {
                if self.alphabets[i].weight(digits[i]).is_zero() {
                    return Rational::zero();
                }
                p *= self.alphabets[i].weight(digits[i]).clone();
            }
        }
        p
    }

    /// Number of distinct projections onto the coordinates in `mask`.
    pub fn pattern_count(&self, mask: SubsetMask) -> usize {
        let mut c = 1usize;
        for i in 0..self.n() {
            if mask.contains(i) {
                c *= self.size(i);
            }
        }
        c
    }

    /// Mixed-radix index of the projection of `digits` onto `mask`.
    pub fn pattern_of(&self, digits: &[usize], mask: SubsetMask) -> usize {
        let mut pat = 0usize;
        for i in 0..self.n() {
            if mask.contains(i) {
                pat = pat * self.size(i) + digits[i];
            }
        }
        pat
    }

    /// Visits every outcome in index order, passing `(index, pattern, digits)`
    /// where `pattern` is the mixed-radix index of the projection onto `mask`.
    /// Digits and patterns are maintained incrementally (odometer scan).
    pub fn scan(&self, mask: SubsetMask, mut f: impl FnMut(usize, usize, &[usize])) {
        let n = self.n();
        // Pattern stride of each masked coordinate, matching pattern_of.
        let mut pstride = vec![0usize; n];
        let mut acc = 1usize;
        for i in (0..n).rev() {
            if mask.contains(i) {
                pstride[i] = acc;
                acc *= self.size(i);
            }
        }
        let mut digits = vec![0usize; n];
        let mut pat = 0usize;
        for idx in 0..self.outcome_count {
            f(idx, pat, &digits);
            for i in (0..n).rev() {
                digits[i] += 1;
                pat += pstride[i];
                if digits[i] < self.size(i) {
                    break;
                }
                pat -= self.size(i) * pstride[i];
                digits[i] = 0;
            }
        }
    }

    /// The K cylinder of x: all outcomes agreeing with x on coordinates in K.
    pub fn cylinder(self: &Arc<Self>, x: OutcomeIndex, mask: SubsetMask) -> Event {
        let x_digits = self.decode(x);
        let target = self.pattern_of(&x_digits, mask);
        let mut bits = BitSet::new_empty(self.outcome_count);
        self.scan(mask, |idx, pat, _| {
            if pat == target {
                bits.insert(idx);
            }
        });
        Event {
            space: self.clone(),
            bits,
        }
    }

    /// Exact P_{K^c} mass of a set of assignments to the coordinates outside
    /// `mask`, each given in increasing coordinate order.
    pub fn marginal_prob(&self, assignments: &[Vec<usize>], mask: SubsetMask) -> Rational {
        let outside: Vec<usize> = mask.complement(self.n()).indices(self.n()).collect();
        let mut total = Rational::zero();
        for v in assignments {
            assert_eq!(v.len(), outside.len());
            let mut p = Rational::one();
            for (&coord, &sym) in outside.iter().zip(v) {
                p *= self.alphabets[coord].weight(sym).clone();
            }
            total += p;
        }
        total
    }

    /// Exact expectation of a rational-valued function of the outcome.
    pub fn expectation(&self, values: &[Rational]) -> Rational {
        assert_eq!(values.len(), self.outcome_count);
        let mut total = Rational::zero();
        self.scan(SubsetMask::empty(), |idx, _, digits| {
            if !values[idx].is_zero() {
                total += &values[idx] * &self.point_mass(digits);
            }
        });
        total
    }
}

/// Partial assignment: fixed values on the coordinates of `mask`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderPattern {
    pub mask: SubsetMask,
    /// Values for the masked coordinates, in increasing coordinate order.
    pub values: Vec<usize>,
}

impl CylinderPattern {
    pub fn from_outcome(space: &ProductSpace, x: OutcomeIndex, mask: SubsetMask) -> Self {
        let digits = space.decode(x);
        let values = mask.indices(space.n()).map(|i| digits[i]).collect();
        CylinderPattern { mask, values }
    }

    /// Builds the full outcome whose coordinate i is the pattern value for
    /// i in the mask and the completion value otherwise.
    pub fn splice(&self, space: &ProductSpace, completion: &[usize]) -> Vec<usize> {
        let n = space.n();
        let mut digits = vec![0usize; n];
        let mut vi = 0;
        let mut ci = 0;
        for (i, d) in digits.iter_mut().enumerate() {
            if self.mask.contains(i) {
                *d = self.values[vi];
                vi += 1;
            } else {
                *d = completion[ci];
                ci += 1;
            }
        }
        digits
    }
}

/// An event bound to exactly one product space, stored densely.
#[derive(Clone, Debug)]
pub struct Event {
    space: Arc<ProductSpace>,
    bits: BitSet,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.same_space(other) && self.bits == other.bits
    }
}

impl Eq for Event {}

impl Event {
    pub fn empty(space: Arc<ProductSpace>) -> Self {
        let bits = BitSet::new_empty(space.outcome_count());
        Event { space, bits }
    }

    pub fn full(space: Arc<ProductSpace>) -> Self {
        let bits = BitSet::new_full(space.outcome_count());
        Event { space, bits }
    }

    pub fn from_indices(space: Arc<ProductSpace>, indices: &[usize]) -> Self {
        let mut bits = BitSet::new_empty(space.outcome_count());
        for &i in indices {
            bits.insert(i);
        }
        Event { space, bits }
    }

    /// Builds an event by evaluating a predicate on every outcome's digits.
    pub fn from_predicate(space: Arc<ProductSpace>, mut pred: impl FnMut(&[usize]) -> bool) -> Self {
        let mut bits = BitSet::new_empty(space.outcome_count());
        space.scan(SubsetMask::empty(), |idx, _, digits| {
            if pred(digits) {
                bits.insert(idx);
            }
        });
        Event { space, bits }
    }

    pub fn space(&self) -> &Arc<ProductSpace> {
        &self.space
    }

    pub fn same_space(&self, other: &Event) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || self.space == other.space
    }

    pub fn contains(&self, idx: OutcomeIndex) -> bool {
        self.bits.contains(idx.0)
    }

    pub fn contains_raw(&self, idx: usize) -> bool {
        self.bits.contains(idx)
    }

    pub fn insert(&mut self, idx: OutcomeIndex) {
        self.bits.insert(idx.0);
    }

    pub fn remove(&mut self, idx: OutcomeIndex) {
        self.bits.remove(idx.0);
    }

    pub fn cardinality(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.bits.count_ones() == self.space.outcome_count()
    }

    pub fn union(&self, other: &Event) -> Event {
        assert!(self.same_space(other));
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Event {
            space: self.space.clone(),
            bits,
        }
    }

    pub fn union_in_place(&mut self, other: &Event) {
        assert!(self.same_space(other));
        self.bits.union_with(&other.bits);
    }

    pub fn intersect(&self, other: &Event) -> Event {
        assert!(self.same_space(other));
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Event {
            space: self.space.clone(),
            bits,
        }
    }

    pub fn complement(&self) -> Event {
        let mut bits = self.bits.clone();
        bits.invert();
        Event {
            space: self.space.clone(),
            bits,
        }
    }

    pub fn is_subset_of(&self, other: &Event) -> bool {
        assert!(self.same_space(other));
        self.bits.is_subset_of(&other.bits)
    }

    pub fn iter(&self) -> impl Iterator<Item = OutcomeIndex> + '_ {
        self.bits.iter_ones().map(OutcomeIndex)
    }

    /// Exact P(A): sum of point masses of the members.
    pub fn prob(&self) -> Rational {
        let mut total = Rational::zero();
        let mut digits = vec![0usize; self.space.n()];
        for idx in self.bits.iter_ones() {
            self.space.decode_into(OutcomeIndex(idx), &mut digits);
            total += self.space.point_mass(&digits);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits2() -> Arc<ProductSpace> {
        ProductSpace::fair_bits(2).unwrap()
    }

    #[test]
    fn encode_examples() {
        let s = bits2();
        assert_eq!(s.encode(&[0, 0]).unwrap(), OutcomeIndex(0));
        assert_eq!(s.encode(&[1, 1]).unwrap(), OutcomeIndex(3));
        let t = ProductSpace::new(vec![Alphabet::uniform(3); 3]).unwrap();
        let idx = t.encode(&[2, 1, 0]).unwrap();
        assert_eq!(t.decode(idx), vec![2, 1, 0]);
    }

    #[test]
    fn encode_rejects_out_of_range() {
        let s = bits2();
        assert!(matches!(
            s.encode(&[0, 2]),
            Err(BoxkitError::CoordinateOutOfRange { coord: 1, .. })
        ));
    }

    #[test]
    fn decode_encode_roundtrip_exhaustive() {
        let t = ProductSpace::new(vec![
            Alphabet::uniform(2),
            Alphabet::uniform(3),
            Alphabet::uniform(4),
        ])
        .unwrap();
        for i in 0..t.outcome_count() {
            let digits = t.decode(OutcomeIndex(i));
            assert_eq!(t.encode(&digits).unwrap(), OutcomeIndex(i));
        }
    }

    #[test]
    fn space_cap_refusal() {
        let result = ProductSpace::new(vec![Alphabet::uniform(2); 25]);
        assert!(matches!(result, Err(BoxkitError::SpaceTooLarge { .. })));
    }

    #[test]
    fn cylinder_examples() {
        let s = bits2();
        let x = s.encode(&[0, 1]).unwrap();
        // K = [n] pins everything down.
        let full = s.cylinder(x, SubsetMask::full(2));
        assert_eq!(full.cardinality(), 1);
        assert!(full.contains(x));
        // K = empty frees everything.
        let free = s.cylinder(x, SubsetMask::empty());
        assert!(free.is_full());
        // K = {coordinate 0}.
        let k0 = s.cylinder(x, SubsetMask::from_indices(&[0]));
        let members: Vec<_> = k0.iter().map(|i| s.decode(i)).collect();
        assert_eq!(members, vec![vec![0, 0], vec![0, 1]]);
    }

    #[test]
    fn prob_trivia() {
        let s = bits2();
        assert_eq!(Event::full(s.clone()).prob(), Rational::one());
        assert_eq!(Event::empty(s.clone()).prob(), Rational::zero());
    }

    #[test]
    fn prob_additive() {
        let s = ProductSpace::new(vec![Alphabet::uniform(3), Alphabet::uniform(2)]).unwrap();
        let a = Event::from_indices(s.clone(), &[0, 2, 3]);
        let b = Event::from_indices(s.clone(), &[2, 3, 5]);
        let lhs = a.union(&b).prob() + a.intersect(&b).prob();
        let rhs = a.prob() + b.prob();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn cylinder_prob_is_masked_mass() {
        // prob([x]_K) = prod_{i in K} w_i(x_i), exhaustively on n <= 3.
        let s = ProductSpace::new(vec![
            Alphabet::new(vec![
                Rational::new(1, 2),
                Rational::new(1, 2),
                Rational::zero(),
            ])
            .unwrap(),
            Alphabet::uniform(2),
            Alphabet::new(vec![Rational::new(1, 4), Rational::new(3, 4)]).unwrap(),
        ])
        .unwrap();
        for i in 0..s.outcome_count() {
            let digits = s.decode(OutcomeIndex(i));
            for mask in SubsetMask::all(3) {
                let cyl = s.cylinder(OutcomeIndex(i), mask);
                assert_eq!(cyl.prob(), s.masked_mass(&digits, mask));
            }
        }
    }

    #[test]
    fn zero_atom_point_mass() {
        let s = ProductSpace::new(vec![
            Alphabet::new(vec![
                Rational::new(1, 2),
                Rational::new(1, 2),
                Rational::zero(),
            ])
            .unwrap(),
            Alphabet::uniform(2),
        ])
        .unwrap();
        assert_eq!(s.point_mass(&[2, 0]), Rational::zero());
        assert_eq!(s.point_mass(&[0, 1]), Rational::new(1, 4));
    }

    #[test]
    fn marginal_prob_examples() {
        let s = bits2();
        let k = SubsetMask::from_indices(&[0]);
        // All assignments to the single outside coordinate.
        assert_eq!(
            s.marginal_prob(&[vec![0], vec![1]], k),
            Rational::one()
        );
        assert_eq!(s.marginal_prob(&[], k), Rational::zero());
        assert_eq!(s.marginal_prob(&[vec![0]], k), Rational::new(1, 2));
    }

    #[test]
    fn expectation_examples() {
        let s = bits2();
        let ones = vec![Rational::one(); 4];
        assert_eq!(s.expectation(&ones), Rational::one());
        let a = Event::from_indices(s.clone(), &[0, 3]);
        let indicator: Vec<Rational> = (0..4)
            .map(|i| {
                if a.contains_raw(i) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        assert_eq!(s.expectation(&indicator), a.prob());
        // f = value of the first coordinate on a fair bit pair.
        let coord: Vec<Rational> = (0..4)
            .map(|i| Rational::from_integer(s.decode(OutcomeIndex(i))[0] as i64))
            .collect();
        assert_eq!(s.expectation(&coord), Rational::new(1, 2));
    }

    #[test]
    fn alphabet_validation() {
        assert!(Alphabet::new(vec![]).is_err());
        assert!(Alphabet::new(vec![Rational::new(1, 2)]).is_err());
        assert!(Alphabet::new(vec![Rational::new(3, 2), Rational::new(-1, 2)]).is_err());
        assert!(Alphabet::new(vec![Rational::one(), Rational::zero()]).is_ok());
    }

    #[test]
    fn splice_round_trip() {
        let s = ProductSpace::new(vec![
            Alphabet::uniform(2),
            Alphabet::uniform(3),
            Alphabet::uniform(2),
        ])
        .unwrap();
        let mask = SubsetMask::from_indices(&[0, 2]);
        let x = s.encode(&[1, 2, 0]).unwrap();
        let pat = CylinderPattern::from_outcome(&s, x, mask);
        assert_eq!(pat.values, vec![1, 0]);
        assert_eq!(pat.splice(&s, &[2]), vec![1, 2, 0]);
        assert_eq!(pat.splice(&s, &[0]), vec![1, 0, 0]);
    }
}
