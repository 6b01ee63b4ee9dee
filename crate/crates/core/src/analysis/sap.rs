//! Self-avoiding polygon counts on the 4.8.8 lattice and on its prism
//! (4.8.8 layers stacked along a third axis).
//!
//! Counts are per translation class: polygons on a periodic patch large
//! enough that none wraps, divided by the number of unit cells.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_SAP_LENGTH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SapLattice {
    #[serde(rename = "4.8.8")]
    Square488,
    Prism,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SapCounts {
    pub lattice: SapLattice,
    pub l_max: usize,
    /// Side of the periodic patch in unit cells.
    pub patch: usize,
    /// `counts[l]` is the number of polygon classes of length `l`.
    pub counts: Vec<u64>,
}

impl SapCounts {
    /// `sqrt(c(L) / c(L-2))` for the largest even `L` with both counts
    /// nonzero.
    pub fn growth_estimate(&self) -> Option<f64> {
        (4..self.counts.len())
            .rev()
            .filter(|l| l % 2 == 0)
            .find(|&l| self.counts[l] > 0 && self.counts[l - 2] > 0)
            .map(|l| (self.counts[l] as f64 / self.counts[l - 2] as f64).sqrt())
    }
}

/// Cell corners: 0 = E, 1 = N, 2 = W, 3 = S.
struct Torus {
    side: usize,
    layers: usize,
    adj: Vec<Vec<usize>>,
}

impl Torus {
    fn new(side: usize, layers: usize) -> Self {
        let id = |a: usize, b: usize, z: usize, k: usize| (((z * side + b) * side + a) << 2) | k;
        let total = 4 * side * side * layers;
        let mut adj = vec![Vec::new(); total];
        let mut link = |u: usize, v: usize| {
            adj[u].push(v);
            adj[v].push(u);
        };
        for z in 0..layers {
            for b in 0..side {
                for a in 0..side {
                    for k in 0..4 {
                        link(id(a, b, z, k), id(a, b, z, (k + 1) % 4));
                    }
                    link(id(a, b, z, 0), id((a + 1) % side, b, z, 2));
                    link(id(a, b, z, 1), id(a, (b + 1) % side, z, 3));
                    if layers > 1 {
                        for k in 0..4 {
                            link(id(a, b, z, k), id(a, b, (z + 1) % layers, k));
                        }
                    }
                }
            }
        }
        Torus { side, layers, adj }
    }

    fn distances_from(&self, start: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.adj.len()];
        let mut queue = std::collections::VecDeque::from([start]);
        dist[start] = 0;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Directed closed self-avoiding walks through `start` with first step
/// `first`, tallied by length.
fn closed_walks(
    torus: &Torus,
    dist: &[usize],
    start: usize,
    first: usize,
    l_max: usize,
) -> Vec<u64> {
    fn go(
        torus: &Torus,
        dist: &[usize],
        start: usize,
        at: usize,
        len: usize,
        l_max: usize,
        seen: &mut [bool],
        out: &mut [u64],
    ) {
        for &v in &torus.adj[at] {
            if v == start {
                if len + 1 >= 3 {
                    out[len + 1] += 1;
                }
                continue;
            }
            if seen[v] || len + 1 + dist[v] > l_max {
                continue;
            }
            seen[v] = true;
            go(torus, dist, start, v, len + 1, l_max, seen, out);
            seen[v] = false;
        }
    }
    let mut out = vec![0u64; l_max + 1];
    let mut seen = vec![false; torus.adj.len()];
    seen[start] = true;
    seen[first] = true;
    go(torus, dist, start, first, 1, l_max, &mut seen, &mut out);
    out
}

pub fn count_saps(lattice: SapLattice, l_max: usize) -> Result<SapCounts> {
    if l_max > MAX_SAP_LENGTH {
        return Err(Error::Guard(format!(
            "polygon length {l_max} exceeds the enumeration limit {MAX_SAP_LENGTH}"
        )));
    }
    // A wrapping polygon needs at least `side` steps along the wrapped axis.
    let side = l_max.max(4) + 1;
    let layers = match lattice {
        SapLattice::Square488 => 1,
        SapLattice::Prism => side,
    };
    let torus = Torus::new(side, layers);
    debug_assert_eq!(torus.adj.len(), 4 * torus.side * torus.side * torus.layers);
    let starts: Vec<(usize, usize)> = (0..4)
        .flat_map(|v| torus.adj[v].iter().map(move |&w| (v, w)))
        .collect();
    let dists: Vec<Vec<usize>> = (0..4).map(|v| torus.distances_from(v)).collect();
    let directed = starts
        .par_iter()
        .map(|&(v, w)| closed_walks(&torus, &dists[v], v, w, l_max))
        .reduce(
            || vec![0u64; l_max + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut counts = vec![0u64; l_max + 1];
    for (l, &c) in directed.iter().enumerate() {
        if c == 0 {
            continue;
        }
        // Each polygon is traversed from each of its l vertices in two
        // directions; the cell's four corners stand for every translate.
        if c % (2 * l as u64) != 0 {
            return Err(Error::Internal(format!(
                "walk count {c} at length {l} is not a multiple of {}",
                2 * l
            )));
        }
        counts[l] = c / (2 * l as u64);
    }
    Ok(SapCounts {
        lattice,
        l_max,
        patch: side,
        counts,
    })
}
