//! Measure-dependent operations: conditional probabilities, threshold and
//! inflated sets, the lenient st-box, the measure-aware 11-box, essential
//! infima and the product-bound evaluator for functions.

use crate::boxalg::for_each_completion;
use crate::error::{BoxkitError, Result};
use crate::rational::Rational;
use crate::space::{CylinderPattern, Event, OutcomeIndex, ProductSpace, SubsetMask};
use rayon::prelude::*;
use std::sync::Arc;

/// The (s, t) leniency thresholds, both in [0, 1].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdPair {
    s: Rational,
    t: Rational,
}

impl ThresholdPair {
    pub fn new(s: Rational, t: Rational) -> Result<Self> {
        for v in [&s, &t] {
            if !v.in_unit_interval() {
                return Err(BoxkitError::ThresholdOutOfRange {
                    value: v.to_string(),
                });
            }
        }
        Ok(ThresholdPair { s, t })
    }

    pub fn s(&self) -> &Rational {
        &self.s
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }
}

/// Conditional probabilities Q(y; E) of an event given the coordinates in a
/// mask, tabulated per K-pattern.
#[derive(Clone, Debug)]
pub struct CondProbTable {
    pub mask: SubsetMask,
    /// Indexed by the mixed-radix pattern index of the K-projection.
    pub entries: Vec<Rational>,
}

impl CondProbTable {
    /// Builds the whole table in one pass: each outcome contributes the mass
    /// of its coordinates outside the mask to the entry of its K-pattern.
    pub fn build(e: &Event, mask: SubsetMask) -> Self {
        let space = e.space();
        let outside = mask.complement(space.n());
        let mut entries = vec![Rational::zero(); space.pattern_count(mask)];
        space.scan(mask, |idx, pat, digits| {
            if e.contains_raw(idx) {
                let mass = space.masked_mass(digits, outside);
                if !mass.is_zero() {
                    entries[pat] += mass;
                }
            }
        });
        CondProbTable { mask, entries }
    }
}

/// The canonical conditional probability P(X in E | X_K = y), computed as
/// the exact sum over completions v of P_{K^c}({v}) times the indicator of
/// membership of the spliced outcome.
pub fn cond_prob(y: &CylinderPattern, e: &Event) -> Rational {
    let space = e.space();
    let outside = y.mask.complement(space.n());
    let free: Vec<usize> = outside.indices(space.n()).collect();
    let mut total = Rational::zero();
    for_each_completion(space, y.mask, |completion| {
        let digits = y.splice(space, completion);
        let idx = space.encode(&digits).expect("pattern digits in range");
        if e.contains(idx) {
            let mut mass = Rational::one();
            for (&coord, &sym) in free.iter().zip(completion) {
                mass *= space.alphabet(coord).weight(sym).clone();
            }
            total += mass;
        }
    });
    total
}

/// The threshold set E_{r,K}: outcomes whose K-coordinates give conditional
/// probability of E at least r. For K = [n] the set is E itself when r > 0
/// and the whole space when r = 0.
pub fn threshold_set(e: &Event, r: &Rational, mask: SubsetMask) -> Result<Event> {
    if !r.in_unit_interval() {
        return Err(BoxkitError::ThresholdOutOfRange {
            value: r.to_string(),
        });
    }
    let space = e.space();
    let n = space.n();
    if mask.popcount() == n {
        return Ok(if r.is_zero() {
            Event::full(space.clone())
        } else {
            e.clone()
        });
    }
    let table = CondProbTable::build(e, mask);
    Ok(threshold_from_table(space, &table, r))
}

fn threshold_from_table(space: &Arc<ProductSpace>, table: &CondProbTable, r: &Rational) -> Event {
    let mut result = Event::empty(space.clone());
    space.scan(table.mask, |idx, pat, _| {
        if &table.entries[pat] >= r {
            result.insert(OutcomeIndex(idx));
        }
    });
    result
}

/// Threshold sets for every mask, each conditional table built exactly once.
fn threshold_family(e: &Event, r: &Rational) -> Result<Vec<Event>> {
    if !r.in_unit_interval() {
        return Err(BoxkitError::ThresholdOutOfRange {
            value: r.to_string(),
        });
    }
    let space = e.space();
    let n = space.n();
    Ok(SubsetMask::all(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|mask| {
            if mask.popcount() == n {
                if r.is_zero() {
                    Event::full(space.clone())
                } else {
                    e.clone()
                }
            } else {
                let table = CondProbTable::build(e, mask);
                threshold_from_table(space, &table, r)
            }
        })
        .collect())
}

/// The r-inflated set E_r: union of E_{r,K} over all 2^n masks. Always
/// contains E.
pub fn inflate(e: &Event, r: &Rational) -> Result<Event> {
    let space = e.space();
    let sets = threshold_family(e, r)?;
    let mut result = Event::empty(space.clone());
    for s in &sets {
        result.union_in_place(s);
    }
    Ok(result)
}

/// The lenient st-box: union of A_{s,K} with B_{t,L} over every ordered
/// pair of disjoint masks. Unlike the classical box and the 11-box, the
/// restriction L = K^c changes this set in general, so all 3^n pairs are
/// enumerated.
pub fn st_box(a: &Event, b: &Event, st: &ThresholdPair) -> Result<Event> {
    if !a.same_space(b) {
        return Err(BoxkitError::SpaceMismatch);
    }
    let space = a.space();
    let n = space.n();
    let a_sets = threshold_family(a, &st.s)?;
    let b_sets = threshold_family(b, &st.t)?;
    let result = SubsetMask::all(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| {
            let kc = k.complement(n);
            let mut acc = Event::empty(space.clone());
            // Submasks of K^c, including the empty mask.
            let mut l = kc.0;
            loop {
                acc.union_in_place(&a_sets[k.0 as usize].intersect(&b_sets[l as usize]));
                if l == 0 {
                    break;
                }
                l = (l - 1) & kc.0;
            }
            acc
        })
        .reduce(
            || Event::empty(space.clone()),
            |mut acc, e| {
                acc.union_in_place(&e);
                acc
            },
        );
    Ok(result)
}

/// The restricted variant of the st-box with L forced to K^c. Exists to
/// demonstrate that the restriction is not harmless for general (s, t).
pub fn st_box_complementary(a: &Event, b: &Event, st: &ThresholdPair) -> Result<Event> {
    if !a.same_space(b) {
        return Err(BoxkitError::SpaceMismatch);
    }
    let space = a.space();
    let n = space.n();
    let a_sets = threshold_family(a, &st.s)?;
    let b_sets = threshold_family(b, &st.t)?;
    let mut result = Event::empty(space.clone());
    for k in SubsetMask::all(n) {
        let kc = k.complement(n);
        result.union_in_place(&a_sets[k.0 as usize].intersect(&b_sets[kc.0 as usize]));
    }
    Ok(result)
}

/// A rational-valued function of the outcome, tabulated densely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealFunction {
    values: Vec<Rational>,
    nonnegative: bool,
}

impl RealFunction {
    pub fn new(values: Vec<Rational>, nonnegative: bool) -> Result<Self> {
        if nonnegative {
            for (i, v) in values.iter().enumerate() {
                if v.is_negative() {
                    return Err(BoxkitError::NegativeFunctionValue {
                        index: i,
                        value: v.to_string(),
                    });
                }
            }
        }
        Ok(RealFunction {
            values,
            nonnegative,
        })
    }

    pub fn indicator(e: &Event) -> Self {
        let values = (0..e.space().outcome_count())
            .map(|i| {
                if e.contains_raw(i) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        RealFunction {
            values,
            nonnegative: true,
        }
    }

    pub fn constant(space: &ProductSpace, c: Rational) -> Self {
        let nonnegative = !c.is_negative();
        RealFunction {
            values: vec![c; space.outcome_count()],
            nonnegative,
        }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }
}

/// The finite-space essential infimum of f over the K-cylinder of x:
/// the minimum of f over completions carrying positive product mass on the
/// coordinates outside K.
pub fn ess_inf(f: &RealFunction, space: &ProductSpace, x: OutcomeIndex, mask: SubsetMask) -> Rational {
    let pattern = CylinderPattern::from_outcome(space, x, mask);
    let free: Vec<usize> = mask.complement(space.n()).indices(space.n()).collect();
    let mut best: Option<Rational> = None;
    for_each_completion(space, mask, |completion| {
        let positive = free
            .iter()
            .zip(completion)
            .all(|(&coord, &sym)| space.alphabet(coord).has_mass(sym));
        if !positive {
            return;
        }
        let digits = pattern.splice(space, completion);
        let idx = space.encode(&digits).expect("pattern digits in range");
        let v = &f.values[idx.0];
        if best.as_ref().is_none_or(|b| v < b) {
            best = Some(v.clone());
        }
    });
    best.expect("every alphabet has a positive-mass symbol")
}

/// Per-pattern flags: true when every positive-support completion of the
/// pattern lands in the event, i.e. the conditional probability is exactly 1.
fn almost_sure_table(e: &Event, mask: SubsetMask) -> Vec<bool> {
    let space = e.space();
    let n = space.n();
    let outside: Vec<usize> = mask.complement(n).indices(n).collect();
    let mut ok = vec![true; space.pattern_count(mask)];
    space.scan(mask, |idx, pat, digits| {
        if !e.contains_raw(idx)
            && outside
                .iter()
                .all(|&i| space.alphabet(i).has_mass(digits[i]))
        {
            ok[pat] = false;
        }
    });
    ok
}

/// Outcomes whose E-conditional probability given the masked coordinates is
/// exactly 1, as a set, per mask.
fn sure_set(e: &Event, mask: SubsetMask) -> Event {
    let space = e.space();
    let ok = almost_sure_table(e, mask);
    let mut sure = Event::empty(space.clone());
    space.scan(mask, |idx, pat, _| {
        if ok[pat] {
            sure.insert(OutcomeIndex(idx));
        }
    });
    sure
}

/// The measure-aware 11-box: outcomes x admitting disjoint masks K, L whose
/// revealed coordinates certify A and B almost surely. The pair search runs
/// over all disjoint (K, L), not just L = K^c: enlarging L through a
/// coordinate where x carries a zero-weight symbol can lower the certainty,
/// so the complement reduction valid for the classical box fails here. A
/// subset-union sweep keeps the cost at n * 2^n set operations. This path
/// deliberately shares no code with the st-box so the two can cross-check
/// each other at (s, t) = (1, 1).
pub fn eleven_box(a: &Event, b: &Event) -> Result<Event> {
    if !a.same_space(b) {
        return Err(BoxkitError::SpaceMismatch);
    }
    let space = a.space();
    let n = space.n();
    let masks: Vec<SubsetMask> = SubsetMask::all(n).collect();
    let sure_a: Vec<Event> = masks.par_iter().map(|&k| sure_set(a, k)).collect();
    // any_b[m] = union of sure_set(b, l) over all l subset of m.
    let mut any_b: Vec<Event> = masks.par_iter().map(|&l| sure_set(b, l)).collect();
    for bit in 0..n {
        for m in 0..masks.len() {
            if m & (1 << bit) != 0 {
                let lower = any_b[m & !(1 << bit)].clone();
                any_b[m].union_in_place(&lower);
            }
        }
    }
    let mut result = Event::empty(space.clone());
    for (i, &k) in masks.iter().enumerate() {
        let kc = k.complement(n);
        result.union_in_place(&sure_a[i].intersect(&any_b[kc.0 as usize]));
    }
    Ok(result)
}

/// Exact evaluation of both sides of the product bound for nonnegative
/// functions: the expectation of the best disjoint-pair product of
/// essential infima on the left, the product of plain expectations on the
/// right. Intended for desk-scale spaces; the pair loop is 3^n per outcome.
pub fn thm21_sides(
    f: &RealFunction,
    g: &RealFunction,
    space: &Arc<ProductSpace>,
) -> Result<(Rational, Rational)> {
    if !f.nonnegative || !g.nonnegative {
        return Err(BoxkitError::FunctionsMustBeNonnegative);
    }
    let n = space.n();
    // inf tables per mask, indexed by pattern.
    let build_tables = |h: &RealFunction| -> Vec<Vec<Rational>> {
        SubsetMask::all(n)
            .map(|mask| {
                let outside: Vec<usize> = mask.complement(n).indices(n).collect();
                let mut table: Vec<Option<Rational>> = vec![None; space.pattern_count(mask)];
                space.scan(mask, |idx, pat, digits| {
                    let positive = outside
                        .iter()
                        .all(|&i| space.alphabet(i).has_mass(digits[i]));
                    if positive {
                        let v = &h.values[idx];
                        if table[pat].as_ref().is_none_or(|b| v < b) {
                            table[pat] = Some(v.clone());
                        }
                    }
                });
                table
                    .into_iter()
                    .map(|x| x.expect("every pattern has a positive-mass completion"))
                    .collect()
            })
            .collect()
    };
    let inf_f = build_tables(f);
    let inf_g = build_tables(g);

    let mut lhs = Rational::zero();
    let mut digits = vec![0usize; n];
    for idx in 0..space.outcome_count() {
        space.decode_into(OutcomeIndex(idx), &mut digits);
        let mass = space.point_mass(&digits);
        if mass.is_zero() {
            continue;
        }
        let mut best = Rational::zero();
        for k in SubsetMask::all(n) {
            let fk = &inf_f[k.0 as usize][space.pattern_of(&digits, k)];
            if fk.is_zero() {
                continue;
            }
            let kc = k.complement(n);
            let mut l = kc.0;
            loop {
                let lm = SubsetMask(l);
                let gl = &inf_g[l as usize][space.pattern_of(&digits, lm)];
                let prod = fk * gl;
                if prod > best {
                    best = prod;
                }
                if l == 0 {
                    break;
                }
                l = (l - 1) & kc.0;
            }
        }
        lhs += &mass * &best;
    }
    let rhs = &space.expectation(f.values()) * &space.expectation(g.values());
    Ok((lhs, rhs))
}
