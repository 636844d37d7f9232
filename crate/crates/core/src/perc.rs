//! Continuum percolation on the unit square with annihilation: sampled
//! configurations, surviving-edge graphs, crossing events, disjoint
//! witnesses, and Monte Carlo estimation.
//!
//! Unlike the exact modules, everything here is binary64: probabilistic
//! claims are tested with confidence intervals, never exact equality.

use crate::error::{BoxkitError, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::VecDeque;

/// Exhaustive witness search is used up to this many points; beyond it the
/// heuristic only reports validated positives.
pub const DEFAULT_N_EXACT: usize = 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub fn dist(&self, p: [f64; 2], q: [f64; 2]) -> f64 {
        let dx = (p[0] - q[0]).abs();
        let dy = (p[1] - q[1]).abs();
        match self {
            Norm::L1 => dx + dy,
            Norm::L2 => (dx * dx + dy * dy).sqrt(),
            Norm::Linf => dx.max(dy),
        }
    }

    /// Area of the unit ball of the norm.
    pub fn tau(&self) -> f64 {
        match self {
            Norm::L1 => 2.0,
            Norm::L2 => std::f64::consts::PI,
            Norm::Linf => 4.0,
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::Linf),
            other => Err(format!("unknown norm `{other}` (expected l1|l2|linf)")),
        }
    }
}

/// A sampled configuration: point locations plus the model parameters.
#[derive(Clone, Debug)]
pub struct GeometricConfig {
    pub points: Vec<[f64; 2]>,
    /// Connection radius: an edge joins points within distance 2r.
    pub r: f64,
    /// Annihilation radius: two distinct points within distance q lose all
    /// incident edges. q = 0 means exact coincidence only.
    pub q: f64,
    pub norm: Norm,
    /// Upper bound on the sampling density (1 for uniform).
    pub c: f64,
}

/// Crossing direction: left-right or bottom-top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    LeftRight,
    BottomTop,
}

/// Surviving-edge graph over (a subset of) the configuration's points.
/// Annihilated points keep their slot; only their edges vanish.
#[derive(Clone, Debug)]
pub struct SurvivingGraph {
    pub adjacency: Vec<Vec<usize>>,
    pub annihilated: Vec<bool>,
    pub active: Vec<bool>,
}

/// Disjoint index sets whose own points alone produce both crossings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessPair {
    pub k: Vec<usize>,
    pub l: Vec<usize>,
}

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Samples n i.i.d. uniform points on the unit square, deterministically
/// from the seed.
pub fn sample_config(n: usize, r: f64, q: f64, norm: Norm, seed: u64) -> GeometricConfig {
    let mut rng = substream(seed, 0);
    let points = (0..n)
        .map(|_| [rng.gen::<f64>(), rng.gen::<f64>()])
        .collect();
    GeometricConfig {
        points,
        r,
        q,
        norm,
        c: 1.0,
    }
}

/// Builds the surviving graph. With `restrict` present, only the listed
/// points exist: edges form between them and only they can annihilate;
/// points outside the set are invisible.
pub fn build_graph(cfg: &GeometricConfig, restrict: Option<&[usize]>) -> SurvivingGraph {
    let n = cfg.points.len();
    let mut active = vec![restrict.is_none(); n];
    if let Some(indices) = restrict {
        for &i in indices {
            active[i] = true;
        }
    }
    let mut annihilated = vec![false; n];
    for i in 0..n {
        if !active[i] {
            continue;
        }
        for j in (i + 1)..n {
            if !active[j] {
                continue;
            }
            let d = cfg.norm.dist(cfg.points[i], cfg.points[j]);
            if d <= cfg.q {
                annihilated[i] = true;
                annihilated[j] = true;
            }
        }
    }
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        if !active[i] || annihilated[i] {
            continue;
        }
        for j in (i + 1)..n {
            if !active[j] || annihilated[j] {
                continue;
            }
            if cfg.norm.dist(cfg.points[i], cfg.points[j]) <= 2.0 * cfg.r {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    SurvivingGraph {
        adjacency,
        annihilated,
        active,
    }
}

fn near_source(cfg: &GeometricConfig, i: usize, dir: Direction) -> bool {
    match dir {
        Direction::LeftRight => cfg.points[i][0] <= cfg.r,
        Direction::BottomTop => cfg.points[i][1] <= cfg.r,
    }
}

fn near_sink(cfg: &GeometricConfig, i: usize, dir: Direction) -> bool {
    match dir {
        Direction::LeftRight => 1.0 - cfg.points[i][0] <= cfg.r,
        Direction::BottomTop => 1.0 - cfg.points[i][1] <= cfg.r,
    }
}

/// Breadth-first crossing test along surviving edges, from points within r
/// of the near border to points within r of the far border.
pub fn crossing(g: &SurvivingGraph, cfg: &GeometricConfig, dir: Direction) -> bool {
    extract_crossing_path(g, cfg, dir, None).is_some()
}

/// BFS that returns the vertex list of one crossing path, or None. An
/// optional RNG shuffles source and neighbor order for random restarts.
pub fn extract_crossing_path(
    g: &SurvivingGraph,
    cfg: &GeometricConfig,
    dir: Direction,
    rng: Option<&mut ChaCha8Rng>,
) -> Option<Vec<usize>> {
    let n = cfg.points.len();
    let mut sources: Vec<usize> = (0..n)
        .filter(|&i| g.active[i] && near_source(cfg, i, dir))
        .collect();
    let order: Option<&mut ChaCha8Rng> = rng;
    let mut order = order;
    if let Some(r) = order.as_deref_mut() {
        sources.shuffle(r);
    }
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &s in &sources {
        // A single point near both borders is a trivial crossing path.
        if near_sink(cfg, s, dir) {
            return Some(vec![s]);
        }
        seen[s] = true;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        let mut neighbors = g.adjacency[u].clone();
        if let Some(r) = order.as_deref_mut() {
            neighbors.shuffle(r);
        }
        for v in neighbors {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            parent[v] = Some(u);
            if near_sink(cfg, v, dir) {
                let mut path = vec![v];
                let mut cur = v;
                while let Some(p) = parent[cur] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(v);
        }
    }
    None
}

/// Verifies a candidate witness pair: disjointness plus both restricted
/// crossings.
pub fn verify_witness(cfg: &GeometricConfig, pair: &WitnessPair) -> bool {
    let disjoint = pair.k.iter().all(|i| !pair.l.contains(i));
    if !disjoint {
        return false;
    }
    let ga = build_graph(cfg, Some(&pair.k));
    let gb = build_graph(cfg, Some(&pair.l));
    crossing(&ga, cfg, Direction::LeftRight) && crossing(&gb, cfg, Direction::BottomTop)
}

/// Searches for disjoint index sets K, L with a left-right crossing among
/// the K points alone and a bottom-top crossing among the L points alone.
///
/// Exact mode (n <= n_exact) enumerates K over all 2^n subsets; with q = 0
/// crossings are monotone in the point set, so testing L = K^c is complete,
/// and for q > 0 the submasks of K^c are enumerated as well. Heuristic mode
/// extracts an A-path from the full surviving graph with random restarts; a
/// returned pair is always re-verified, absence only means "not found".
pub fn find_disjoint_witness(
    cfg: &GeometricConfig,
    n_exact: usize,
    seed: u64,
) -> Option<WitnessPair> {
    let n = cfg.points.len();
    if n <= n_exact {
        find_witness_exact(cfg)
    } else {
        find_witness_heuristic(cfg, seed, 32)
    }
}

fn indices_of(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask & (1 << i) != 0).collect()
}

fn find_witness_exact(cfg: &GeometricConfig) -> Option<WitnessPair> {
    let n = cfg.points.len();
    debug_assert!(n <= 24);
    for kmask in 0u64..(1 << n) {
        let k = indices_of(kmask, n);
        let ga = build_graph(cfg, Some(&k));
        if !crossing(&ga, cfg, Direction::LeftRight) {
            continue;
        }
        let comp = !kmask & ((1u64 << n) - 1);
        let l_full = indices_of(comp, n);
        let gb = build_graph(cfg, Some(&l_full));
        if let Some(path) = extract_crossing_path(&gb, cfg, Direction::BottomTop, None) {
            // Restricting further to the path vertices can only remove
            // annihilations, so the path survives in the smaller set.
            let pair = WitnessPair { k, l: path };
            debug_assert!(verify_witness(cfg, &pair));
            return Some(pair);
        }
        if cfg.q > 0.0 {
            // Annihilation breaks monotonicity: the full complement may
            // fail while a subset of it crosses.
            let mut l = comp;
            loop {
                if l != comp {
                    let lv = indices_of(l, n);
                    let gb = build_graph(cfg, Some(&lv));
                    if crossing(&gb, cfg, Direction::BottomTop) {
                        let pair = WitnessPair { k, l: lv };
                        debug_assert!(verify_witness(cfg, &pair));
                        return Some(pair);
                    }
                }
                if l == 0 {
                    break;
                }
                l = (l - 1) & comp;
            }
        }
    }
    None
}

fn find_witness_heuristic(cfg: &GeometricConfig, seed: u64, retries: u64) -> Option<WitnessPair> {
    let n = cfg.points.len();
    let full = build_graph(cfg, None);
    for attempt in 0..retries {
        let mut rng = substream(seed, 0x57AA + attempt);
        let a_path = extract_crossing_path(&full, cfg, Direction::LeftRight, Some(&mut rng))?;
        let k = a_path;
        let ga = build_graph(cfg, Some(&k));
        if !crossing(&ga, cfg, Direction::LeftRight) {
            continue;
        }
        let complement: Vec<usize> = (0..n).filter(|i| !k.contains(i)).collect();
        let gb = build_graph(cfg, Some(&complement));
        if let Some(b_path) = extract_crossing_path(&gb, cfg, Direction::BottomTop, Some(&mut rng))
        {
            let pair = WitnessPair { k, l: b_path };
            if verify_witness(cfg, &pair) {
                return Some(pair);
            }
        }
    }
    None
}

/// The largest threshold certified by the annihilation bound:
/// 1 - (c/4) n^2 tau q^2. Refuses when the subtracted term reaches 1.
pub fn prop51_threshold(cfg: &GeometricConfig) -> Result<f64> {
    let n = cfg.points.len() as f64;
    let term = cfg.c / 4.0 * n * n * cfg.norm.tau() * cfg.q * cfg.q;
    if term >= 1.0 {
        return Err(BoxkitError::AnnihilationTermTooLarge { term });
    }
    Ok(1.0 - term)
}

/// A Monte Carlo estimate with a 95% Wilson score interval.
#[derive(Clone, Debug, Serialize)]
pub struct Estimate {
    pub successes: u64,
    pub replicates: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    pub fn from_counts(successes: u64, replicates: u64) -> Self {
        let n = replicates as f64;
        let p = successes as f64 / n;
        let z = 1.959963984540054_f64;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Estimate {
            successes,
            replicates,
            p_hat: p,
            ci_low: (center - half).max(0.0),
            ci_high: (center + half).min(1.0),
        }
    }

    /// Plain binomial standard error of the estimate.
    pub fn std_error(&self) -> f64 {
        let n = self.replicates as f64;
        (self.p_hat * (1.0 - self.p_hat) / n).sqrt()
    }
}

/// Conditional Monte Carlo: the points indexed by `fixed` stay where they
/// are, all others are resampled uniformly, and the fraction of replicates
/// where the full-model crossing holds is reported. Replicate k of seed s
/// uses substream (s, k), so the result is independent of scheduling.
pub fn conditional_mc(
    cfg: &GeometricConfig,
    fixed: &[usize],
    dir: Direction,
    replicates: u64,
    seed: u64,
) -> Estimate {
    let successes: u64 = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(seed, rep + 1);
            let mut trial = cfg.clone();
            for (i, p) in trial.points.iter_mut().enumerate() {
                if !fixed.contains(&i) {
                    *p = [rng.gen::<f64>(), rng.gen::<f64>()];
                }
            }
            let g = build_graph(&trial, None);
            u64::from(crossing(&g, &trial, dir))
        })
        .sum();
    Estimate::from_counts(successes, replicates)
}

/// Full-experiment summary: crossing estimates and witness frequency.
#[derive(Clone, Debug, Serialize)]
pub struct McSummary {
    pub n: usize,
    pub r: f64,
    pub q: f64,
    pub norm: Norm,
    pub replicates: u64,
    pub p_a: Estimate,
    pub p_b: Estimate,
    pub p_ab: Estimate,
    pub witness: Estimate,
}

/// Independent-replicate Monte Carlo over freshly sampled configurations:
/// estimates the crossing probabilities, their intersection, and the
/// frequency of a verified disjoint witness.
pub fn mc_experiment(
    n: usize,
    r: f64,
    q: f64,
    norm: Norm,
    replicates: u64,
    seed: u64,
) -> McSummary {
    let counts = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let cfg = sample_config(n, r, q, norm, seed.wrapping_add(rep.wrapping_mul(0x9E37)));
            let g = build_graph(&cfg, None);
            let a = crossing(&g, &cfg, Direction::LeftRight);
            let b = crossing(&g, &cfg, Direction::BottomTop);
            let w = if a && b {
                find_disjoint_witness(&cfg, DEFAULT_N_EXACT, seed ^ rep).is_some()
            } else {
                false
            };
            [a as u64, b as u64, (a && b) as u64, w as u64]
        })
        .reduce(
            || [0u64; 4],
            |x, y| [x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]],
        );
    McSummary {
        n,
        r,
        q,
        norm,
        replicates,
        p_a: Estimate::from_counts(counts[0], replicates),
        p_b: Estimate::from_counts(counts[1], replicates),
        p_ab: Estimate::from_counts(counts[2], replicates),
        witness: Estimate::from_counts(counts[3], replicates),
    }
}
