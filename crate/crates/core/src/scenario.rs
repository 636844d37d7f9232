//! Named example instances: small bond-percolation grids, biased coin
//! families, a three-sided coin, and a two-coordinate space with a
//! zero-weight symbol. Each scenario fixes a product space and a pair of
//! events exactly.

use crate::error::{BoxkitError, Result};
use crate::rational::Rational;
use crate::space::{Alphabet, Event, ProductSpace};
use std::sync::Arc;

/// Symbol encoding for the coin scenarios.
pub const HEADS: usize = 0;
pub const TAILS: usize = 1;
/// Third face of the three-sided coin.
pub const SIDES: usize = 2;

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub space: Arc<ProductSpace>,
    pub a: Event,
    pub b: Event,
    /// Human-readable description of the coordinate numbering.
    pub coordinates: String,
}

/// A small undirected graph whose edges are the space's coordinates.
/// Edge i is open in an outcome when digit i equals 1.
struct EdgeGraph {
    vertex_count: usize,
    /// Edge i joins endpoints[i].0 and endpoints[i].1.
    endpoints: Vec<(usize, usize)>,
}

impl EdgeGraph {
    /// Two-row grid with `cols` columns of vertices. Vertex (row, col) is
    /// row * cols + col, row 0 on top. Edges are numbered: top horizontals
    /// left to right, then bottom horizontals, then verticals left to
    /// right. A 3-column grid has 7 edges, a 5-column grid has 13.
    fn two_row_grid(cols: usize) -> Self {
        let mut endpoints = Vec::new();
        for row in 0..2 {
            for col in 0..cols - 1 {
                endpoints.push((row * cols + col, row * cols + col + 1));
            }
        }
        for col in 0..cols {
            endpoints.push((col, cols + col));
        }
        EdgeGraph {
            vertex_count: 2 * cols,
            endpoints,
        }
    }

    /// BFS connectivity from any source to any sink along open edges.
    fn connects(&self, open: &[usize], sources: &[usize], sinks: &[usize]) -> bool {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (i, &(u, v)) in self.endpoints.iter().enumerate() {
            if open[i] == 1 {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut seen = vec![false; self.vertex_count];
        let mut stack: Vec<usize> = sources.to_vec();
        for &s in sources {
            seen[s] = true;
        }
        while let Some(u) = stack.pop() {
            if sinks.contains(&u) {
                return true;
            }
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }
}

/// 2-row, 3-column grid of 7 fair edges. A is a crossing between the top
/// corners, B between the bottom corners.
pub fn grid2x3() -> Result<Scenario> {
    let g = EdgeGraph::two_row_grid(3);
    let space = ProductSpace::fair_bits(7)?;
    let a = Event::from_predicate(space.clone(), |x| g.connects(x, &[0], &[2]));
    let b = Event::from_predicate(space.clone(), |x| g.connects(x, &[3], &[5]));
    Ok(Scenario {
        name: "grid2x3".into(),
        space,
        a,
        b,
        coordinates: "edges 0-1 top row left to right, 2-3 bottom row, 4-6 verticals left to right"
            .into(),
    })
}

/// 2-row, 5-column grid of 13 fair edges. A is a left-right crossing (from
/// either left corner to either right corner) together with the all-closed
/// outcome and every outcome with exactly three open edges; B is the plain
/// crossing.
pub fn grid13() -> Result<Scenario> {
    let g = EdgeGraph::two_row_grid(5);
    let space = ProductSpace::fair_bits(13)?;
    let crossing = |x: &[usize]| g.connects(x, &[0, 5], &[4, 9]);
    let a = Event::from_predicate(space.clone(), |x| {
        let open: usize = x.iter().sum();
        crossing(x) || open == 0 || open == 3
    });
    let b = Event::from_predicate(space.clone(), |x| crossing(x));
    Ok(Scenario {
        name: "grid13".into(),
        space,
        a,
        b,
        coordinates:
            "edges 0-3 top row left to right, 4-7 bottom row, 8-12 verticals left to right".into(),
    })
}

/// Fair coin tossed 2m + 1 times. A: first m + 1 tosses all heads.
/// B: last m + 1 tosses all tails.
pub fn coin(m: usize) -> Result<Scenario> {
    let n = 2 * m + 1;
    let space = ProductSpace::fair_bits(n)?;
    let a = Event::from_predicate(space.clone(), |x| x[..m + 1].iter().all(|&v| v == HEADS));
    let b = Event::from_predicate(space.clone(), |x| x[m..].iter().all(|&v| v == TAILS));
    Ok(Scenario {
        name: format!("coin(m={m})"),
        space,
        a,
        b,
        coordinates: format!("tosses 0..{n}, symbol 0 = heads, 1 = tails"),
    })
}

/// Fair three-sided coin (heads, tails, sides) tossed 5 times. A: first
/// three tosses heads. B: last three tosses tails.
pub fn threesided() -> Result<Scenario> {
    let third = Alphabet::new(vec![
        Rational::new(1, 3),
        Rational::new(1, 3),
        Rational::new(1, 3),
    ])?;
    let space = ProductSpace::new(vec![third; 5])?;
    let a = Event::from_predicate(space.clone(), |x| x[..3].iter().all(|&v| v == HEADS));
    let b = Event::from_predicate(space.clone(), |x| x[2..].iter().all(|&v| v == TAILS));
    Ok(Scenario {
        name: "threesided".into(),
        space,
        a,
        b,
        coordinates: "tosses 0..5, symbol 0 = heads, 1 = tails, 2 = sides".into(),
    })
}

/// The toss sequence heads, heads, sides, tails, tails in the three-sided
/// space.
pub fn threesided_hhstt(space: &Arc<ProductSpace>) -> crate::space::OutcomeIndex {
    space
        .encode(&[HEADS, HEADS, SIDES, TAILS, TAILS])
        .expect("fixed outcome of the three-sided space")
}

/// Two coordinates over {0, 1, 2} with weights (1/2, 1/2, 0): symbol 2
/// carries no mass. A = B = {coordinates differ}.
pub fn zeroatom() -> Result<Scenario> {
    let alpha = Alphabet::new(vec![
        Rational::new(1, 2),
        Rational::new(1, 2),
        Rational::zero(),
    ])?;
    let space = ProductSpace::new(vec![alpha; 2])?;
    let a = Event::from_predicate(space.clone(), |x| x[0] != x[1]);
    let b = a.clone();
    Ok(Scenario {
        name: "zeroatom".into(),
        space,
        a,
        b,
        coordinates: "two coordinates over {0, 1, 2}; symbol 2 has weight zero".into(),
    })
}

/// Looks up a scenario by name. `m` is only consulted by the coin family.
pub fn by_name(name: &str, m: usize) -> Result<Scenario> {
    match name {
        "grid2x3" => grid2x3(),
        "grid13" => grid13(),
        "coin" => coin(m),
        "threesided" => threesided(),
        "zeroatom" => zeroatom(),
        other => Err(BoxkitError::UnknownGenerator { name: other.into() }),
    }
}
