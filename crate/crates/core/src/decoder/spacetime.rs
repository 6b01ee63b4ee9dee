//! Exact space-time decoding by dynamic programming over rounds.
//!
//! With `V_0(0) = 0` and `V_0(r) = inf` otherwise,
//!
//! ```text
//! V_t(r) = |r| + min_u [ V_{t-1}(u) + W(ds_t ^ r ^ u) ]
//! ```
//!
//! where `W` is the minimum data weight for a syndrome. The inner minimum is a
//! multi-source shortest-path problem on the syndrome Cayley graph (unit edge
//! per qubit), solved with a bucket queue in `O(2^m n)` per round. The answer
//! is `min_r V_T(r)`, or `V_T(0)` when the last round is taken as perfect.

use super::table::SyndromeGraph;

const INF: u16 = u16::MAX;
const NONE: u8 = u8::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpacetimeSolution {
    /// Data correction per round.
    pub x: Vec<u128>,
    /// Syndrome-error assignment per round.
    pub r: Vec<u64>,
    pub weight: u32,
}

impl SpacetimeSolution {
    pub fn data_sum(&self) -> u128 {
        self.x.iter().fold(0, |a, b| a ^ b)
    }
}

/// Reusable buffers; one per worker thread.
pub struct SpacetimeWorkspace<'g> {
    graph: &'g SyndromeGraph,
    labels: Vec<u16>,
    values: Vec<u16>,
    parents: Vec<Vec<u8>>,
    buckets: Vec<Vec<u32>>,
}

impl<'g> SpacetimeWorkspace<'g> {
    pub fn new(graph: &'g SyndromeGraph) -> Self {
        let size = graph.size();
        SpacetimeWorkspace {
            graph,
            labels: vec![INF; size],
            values: vec![INF; size],
            parents: Vec::new(),
            buckets: Vec::new(),
        }
    }

    pub fn solve(&mut self, delta: &[u64], final_round_perfect: bool) -> SpacetimeSolution {
        let rounds = delta.len();
        let size = self.graph.size();
        while self.parents.len() < rounds {
            self.parents.push(vec![NONE; size]);
        }
        if rounds == 0 {
            return SpacetimeSolution {
                x: Vec::new(),
                r: Vec::new(),
                weight: 0,
            };
        }

        for (t, &ds) in delta.iter().enumerate() {
            let parent = &mut self.parents[t];
            if t == 0 {
                // Single source at ds: labels are plain minimum weights.
                for y in 0..size {
                    let s = y as u64 ^ ds;
                    self.labels[y] = self.graph.weight(s) as u16;
                    parent[y] = self.graph.parent(s).map_or(NONE, |q| q as u8);
                }
            } else {
                for b in self.buckets.iter_mut() {
                    b.clear();
                }
                for y in 0..size {
                    let v = self.values[y ^ ds as usize];
                    self.labels[y] = v;
                    parent[y] = NONE;
                    if v != INF {
                        let v = v as usize;
                        if self.buckets.len() <= v + 1 {
                            self.buckets.resize_with(v + 2, Vec::new);
                        }
                        self.buckets[v].push(y as u32);
                    }
                }
                let mut level = 0;
                while level < self.buckets.len() {
                    let current = std::mem::take(&mut self.buckets[level]);
                    let next = (level + 1) as u16;
                    let mut pushed = Vec::new();
                    for &y in &current {
                        if self.labels[y as usize] as usize != level {
                            continue;
                        }
                        for (q, &c) in self.graph.columns.iter().enumerate() {
                            let z = (y as u64 ^ c) as usize;
                            if self.labels[z] > next {
                                self.labels[z] = next;
                                parent[z] = q as u8;
                                pushed.push(z as u32);
                            }
                        }
                    }
                    self.buckets[level] = current;
                    if !pushed.is_empty() {
                        if self.buckets.len() <= level + 1 {
                            self.buckets.resize_with(level + 2, Vec::new);
                        }
                        self.buckets[level + 1].extend_from_slice(&pushed);
                    }
                    level += 1;
                }
            }
            let last = t + 1 == rounds;
            for r in 0..size {
                let d = self.labels[r];
                self.values[r] = if d == INF || (last && final_round_perfect && r != 0) {
                    INF
                } else {
                    d + (r as u64).count_ones() as u16
                };
            }
        }

        let mut best = 0usize;
        for r in 1..size {
            if self.values[r] < self.values[best] {
                best = r;
            }
        }
        let weight = self.values[best] as u32;

        let mut x = vec![0u128; rounds];
        let mut r = vec![0u64; rounds];
        let mut cur = best as u64;
        for t in (0..rounds).rev() {
            r[t] = cur;
            let mut y = cur;
            let parent = &self.parents[t];
            let mut xt = 0u128;
            while parent[y as usize] != NONE {
                let q = parent[y as usize] as usize;
                xt ^= 1 << q;
                y ^= self.graph.columns[q];
            }
            x[t] = xt;
            cur = y ^ delta[t];
        }
        debug_assert_eq!(cur, 0);
        debug_assert_eq!(
            x.iter().map(|v| v.count_ones()).sum::<u32>()
                + r.iter().map(|v| v.count_ones()).sum::<u32>(),
            weight
        );
        SpacetimeSolution { x, r, weight }
    }
}
