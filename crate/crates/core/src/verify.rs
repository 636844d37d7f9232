//! Exact checkers for the box-type inequalities, a deterministic instance
//! generator, and independent brute-force oracles used to validate the
//! bit-vector kernels.

use crate::boxalg::{classical_box, core};
use crate::error::{BoxkitError, Result};
use crate::measure::{cond_prob, eleven_box, inflate, st_box, ThresholdPair};
use crate::rational::Rational;
use crate::space::{Alphabet, CylinderPattern, Event, OutcomeIndex, ProductSpace, SubsetMask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Elementary-step budget for the definitional st-box oracle.
pub const ORACLE_BUDGET: u64 = 100_000_000;

/// One checked inequality: holds iff lhs <= rhs; the excess multiple
/// rhs / lhs is reported whenever the left side is positive.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
    pub excess_multiple: Option<Rational>,
    pub instance_digest: String,
}

impl InequalityReport {
    fn new(name: &str, lhs: Rational, rhs: Rational, digest: String) -> Self {
        let holds = lhs <= rhs;
        let excess_multiple = if lhs.is_positive() {
            Some(&rhs / &lhs)
        } else {
            None
        };
        InequalityReport {
            name: name.to_string(),
            lhs,
            rhs,
            holds,
            excess_multiple,
            instance_digest: digest,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightProfile {
    /// Uniform weights on every coordinate.
    Fair,
    /// Random rational weights with small denominators.
    RandomRational,
    /// Random rational weights with at least one zero-mass symbol.
    WithZeroAtoms,
}

/// Deterministic recipe for a random (space, A, B) instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub profile: WeightProfile,
    /// Probability that any given outcome belongs to each event.
    pub density: f64,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub space: Arc<ProductSpace>,
    pub a: Event,
    pub b: Event,
}

/// Serializable snapshot of an instance, used when a violation must be
/// reported with its minimized reproducer.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceDump {
    pub spec: InstanceSpec,
    pub weights: Vec<Vec<Rational>>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl Instance {
    pub fn dump(&self) -> InstanceDump {
        InstanceDump {
            spec: self.spec.clone(),
            weights: (0..self.space.n())
                .map(|i| self.space.alphabet(i).weights().to_vec())
                .collect(),
            a: self.a.iter().map(|x| x.0).collect(),
            b: self.b.iter().map(|x| x.0).collect(),
        }
    }

    /// Reproducibility token: FNV-1a over a canonical byte rendering of the
    /// space and both events. Stable across runs and platforms.
    pub fn digest(&self) -> String {
        digest_events(&self.a, &self.b)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Digest of a (space, A, B) triple, usable even for hand-built instances.
pub fn digest_events(a: &Event, b: &Event) -> String {
    let space = a.space();
    let mut buf = String::new();
    for i in 0..space.n() {
        for w in space.alphabet(i).weights() {
            buf.push_str(&w.to_string());
            buf.push(',');
        }
        buf.push(';');
    }
    buf.push('|');
    for x in a.iter() {
        buf.push_str(&x.0.to_string());
        buf.push(',');
    }
    buf.push('|');
    for x in b.iter() {
        buf.push_str(&x.0.to_string());
        buf.push(',');
    }
    format!("{:016x}", fnv1a(buf.as_bytes()))
}

/// Deterministically builds the instance described by `spec`.
pub fn generate_instance(spec: &InstanceSpec) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut alphabets = Vec::with_capacity(spec.sizes.len());
    // Force at least one zero-mass symbol somewhere for the zero-atom profile.
    let mut zero_planted = false;
    for &size in &spec.sizes {
        let weights = match spec.profile {
            WeightProfile::Fair => vec![Rational::new(1, size as i64); size],
            WeightProfile::RandomRational | WeightProfile::WithZeroAtoms => {
                let mut numerators: Vec<i64> =
                    (0..size).map(|_| rng.gen_range(1..=8)).collect();
                if spec.profile == WeightProfile::WithZeroAtoms && size >= 2 && !zero_planted {
                    let victim = rng.gen_range(0..size);
                    numerators[victim] = 0;
                    zero_planted = true;
                }
                let total: i64 = numerators.iter().sum();
                numerators
                    .into_iter()
                    .map(|k| Rational::new(k, total))
                    .collect()
            }
        };
        alphabets.push(Alphabet::new(weights)?);
    }
    let space = ProductSpace::new(alphabets)?;
    let draw_event = |rng: &mut ChaCha8Rng| {
        let mut e = Event::empty(space.clone());
        for idx in 0..space.outcome_count() {
            if rng.gen::<f64>() < spec.density {
                e.insert(OutcomeIndex(idx));
            }
        }
        e
    };
    let a = draw_event(&mut rng);
    let b = draw_event(&mut rng);
    Ok(Instance {
        spec: spec.clone(),
        space,
        a,
        b,
    })
}

/// P(A box B) <= P(A) P(B).
pub fn check_bkr(a: &Event, b: &Event) -> Result<InequalityReport> {
    if !a.same_space(b) {
        return Err(BoxkitError::SpaceMismatch);
    }
    let lhs = classical_box(a, b).prob();
    let rhs = &a.prob() * &b.prob();
    Ok(InequalityReport::new("bkr", lhs, rhs, digest_events(a, b)))
}

/// P(A 11 B) <= P(A) P(B), with the inclusion A box B subset of A 11 B
/// asserted along the way.
pub fn check_eleven(a: &Event, b: &Event) -> Result<InequalityReport> {
    if !a.same_space(b) {
        return Err(BoxkitError::SpaceMismatch);
    }
    let eleven = eleven_box(a, b)?;
    assert!(
        classical_box(a, b).is_subset_of(&eleven),
        "engine defect: classical box escaped the 11-box"
    );
    let lhs = eleven.prob();
    let rhs = &a.prob() * &b.prob();
    Ok(InequalityReport::new(
        "eleven",
        lhs,
        rhs,
        digest_events(a, b),
    ))
}

/// P(A box B) <= P(core(A)) P(core(B)) for proper subsets, with the
/// core-preservation identity asserted along the way.
pub fn check_core_bound(a: &Event, b: &Event) -> Result<InequalityReport> {
    if !a.same_space(b) {
        return Err(BoxkitError::SpaceMismatch);
    }
    if a.is_full() || b.is_full() {
        return Err(BoxkitError::NotProperSubset);
    }
    let a0 = core(a);
    let b0 = core(b);
    let boxed = classical_box(a, b);
    assert_eq!(
        boxed,
        classical_box(&a0, &b0),
        "engine defect: core changed the box result"
    );
    let lhs = boxed.prob();
    let rhs = &a0.prob() * &b0.prob();
    Ok(InequalityReport::new("core", lhs, rhs, digest_events(a, b)))
}

/// The two lenient bounds: P(A st B) <= P(A_s) P(B_t), and the refinement
/// through cylindrical cores of the inflated sets when those are proper.
/// The second report is absent when either inflated set is the whole space.
pub fn check_st_bounds(
    a: &Event,
    b: &Event,
    st: &ThresholdPair,
) -> Result<(InequalityReport, Option<InequalityReport>)> {
    if !a.same_space(b) {
        return Err(BoxkitError::SpaceMismatch);
    }
    let digest = digest_events(a, b);
    let lhs = st_box(a, b, st)?.prob();
    let a_s = inflate(a, st.s())?;
    let b_t = inflate(b, st.t())?;
    let rhs1 = &a_s.prob() * &b_t.prob();
    let report1 = InequalityReport::new("st-inflated", lhs.clone(), rhs1.clone(), digest.clone());
    let report2 = if a_s.is_full() || b_t.is_full() {
        None
    } else {
        let rhs2 = &core(&a_s).prob() * &core(&b_t).prob();
        assert!(
            rhs2 <= rhs1,
            "engine defect: core bound exceeded the inflated bound"
        );
        Some(InequalityReport::new("st-core", lhs, rhs2, digest))
    };
    Ok((report1, report2))
}

/// Definitional per-outcome st-box: for every outcome, scan all ordered
/// disjoint mask pairs, evaluating each conditional probability by direct
/// completion sums. No bit-vector kernels; exists only to validate st_box.
pub fn oracle_st_box(a: &Event, b: &Event, st: &ThresholdPair) -> Result<Event> {
    if !a.same_space(b) {
        return Err(BoxkitError::SpaceMismatch);
    }
    let space = a.space();
    let n = space.n();
    let work = space.outcome_count() as u128 * 3u128.pow(n as u32);
    if work > ORACLE_BUDGET as u128 {
        return Err(BoxkitError::OracleBudgetExceeded {
            work,
            limit: ORACLE_BUDGET,
        });
    }
    let mut result = Event::empty(space.clone());
    for idx in 0..space.outcome_count() {
        let x = OutcomeIndex(idx);
        let qualifying = |e: &Event, r: &Rational| -> Vec<SubsetMask> {
            SubsetMask::all(n)
                .filter(|&k| {
                    let full = k.popcount() == n;
                    let q = if full {
                        // E_{r,[n]} is E for r > 0 and S for r = 0.
                        if r.is_zero() {
                            Rational::one()
                        } else if e.contains(x) {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    } else {
                        cond_prob(&CylinderPattern::from_outcome(space, x, k), e)
                    };
                    &q >= r
                })
                .collect()
        };
        let ks = qualifying(a, st.s());
        let ls = qualifying(b, st.t());
        'pairs: for &k in &ks {
            for &l in &ls {
                if k.is_disjoint(l) {
                    result.insert(x);
                    break 'pairs;
                }
            }
        }
    }
    Ok(result)
}

/// Definitional cylindrical core: for every mask with |K| <= n-1, every
/// K-pattern whose completions all lie in E contributes its whole cylinder.
/// Splice-based; independent of the projection-marking route in `core`.
pub fn oracle_core(e: &Event) -> Event {
    let space = e.space();
    let n = space.n();
    let mut result = Event::empty(space.clone());
    for k in SubsetMask::all(n) {
        if k.popcount() == n {
            continue;
        }
        let masked: Vec<usize> = k.indices(n).collect();
        let mut values = vec![0usize; masked.len()];
        loop {
            let pattern = CylinderPattern {
                mask: k,
                values: values.clone(),
            };
            let mut members = Vec::new();
            let mut inside = true;
            crate::boxalg::for_each_completion(space, k, |completion| {
                if inside {
                    let digits = pattern.splice(space, completion);
                    let idx = space.encode(&digits).expect("digits in range");
                    if e.contains(idx) {
                        members.push(idx);
                    } else {
                        inside = false;
                    }
                }
            });
            if inside {
                for idx in members {
                    result.insert(idx);
                }
            }
            // Advance the K-pattern odometer.
            let mut i = masked.len();
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                values[i] += 1;
                if values[i] < space.size(masked[i]) {
                    break;
                }
                values[i] = 0;
            }
            if values.iter().all(|&v| v == 0) {
                break;
            }
        }
    }
    result
}

/// Greedy minimization of a failing instance: drop coordinates while the
/// failure persists, then clear event bits one at a time. A violation means
/// an engine bug, and the smaller the reproducer the better.
pub fn minimize_instance(inst: &Instance, fails: impl Fn(&Instance) -> bool) -> Instance {
    debug_assert!(fails(inst));
    let mut current = inst.clone();
    // Coordinate removal: fix the dropped coordinate at symbol 0.
    loop {
        let n = current.space.n();
        if n <= 1 {
            break;
        }
        let mut removed = false;
        for drop in 0..n {
            let alphabets: Vec<Alphabet> = (0..n)
                .filter(|&i| i != drop)
                .map(|i| current.space.alphabet(i).clone())
                .collect();
            let Ok(space) = ProductSpace::new(alphabets) else {
                continue;
            };
            let project = |e: &Event| {
                let src = current.space.clone();
                Event::from_predicate(space.clone(), |digits| {
                    let mut full = Vec::with_capacity(n);
                    full.extend_from_slice(&digits[..drop]);
                    full.push(0);
                    full.extend_from_slice(&digits[drop..]);
                    e.contains(src.encode(&full).expect("digit in range"))
                })
            };
            let candidate = Instance {
                spec: current.spec.clone(),
                space: space.clone(),
                a: project(&current.a),
                b: project(&current.b),
            };
            if fails(&candidate) {
                current = candidate;
                removed = true;
                break;
            }
        }
        if !removed {
            break;
        }
    }
    // Event-bit removal, A first then B.
    for which in 0..2 {
        let members: Vec<OutcomeIndex> = if which == 0 {
            current.a.iter().collect()
        } else {
            current.b.iter().collect()
        };
        for x in members {
            let mut candidate = current.clone();
            if which == 0 {
                candidate.a.remove(x);
            } else {
                candidate.b.remove(x);
            }
            if fails(&candidate) {
                current = candidate;
            }
        }
    }
    current
}
