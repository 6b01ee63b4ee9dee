//! Depth-first branch and bound for `sum_j x_j c_j = t` over GF(2).
//!
//! Variables are fixed in index order, zero before one, so the first
//! minimum-weight solution reached is the lexicographically smallest one.
//! A node is cut when the residual leaves the span of the unfixed columns or
//! when the weight so far plus `ceil(|residual| / max column weight)` cannot
//! beat the incumbent.

type Basis = [u64; 64];

fn reduce(basis: &Basis, mut r: u64) -> u64 {
    while r != 0 {
        let b = 63 - r.leading_zeros() as usize;
        if basis[b] == 0 {
            return r;
        }
        r ^= basis[b];
    }
    0
}

fn insert(basis: &mut Basis, v: u64) {
    let r = reduce(basis, v);
    if r != 0 {
        basis[63 - r.leading_zeros() as usize] = r;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BnbOutcome {
    pub x: Vec<bool>,
    pub weight: usize,
    /// False when the node budget ran out before the search finished.
    pub optimal: bool,
    pub nodes: u64,
}

struct Search<'a> {
    columns: &'a [u64],
    spans: Vec<Basis>,
    max_weight: Vec<u32>,
    current: Vec<bool>,
    best: Option<(usize, Vec<bool>)>,
    nodes: u64,
    limit: u64,
}

impl Search<'_> {
    fn bound(&self) -> usize {
        self.best.as_ref().map_or(usize::MAX, |(w, _)| *w)
    }

    fn dfs(&mut self, j: usize, residual: u64, weight: usize) {
        if residual == 0 {
            if weight < self.bound() {
                self.best = Some((weight, self.current.clone()));
            }
            return;
        }
        if j == self.columns.len() || self.nodes >= self.limit {
            return;
        }
        let mw = self.max_weight[j].max(1);
        let lower = (residual.count_ones()).div_ceil(mw) as usize;
        if weight + lower >= self.bound() || reduce(&self.spans[j], residual) != 0 {
            return;
        }
        self.nodes += 1;
        self.dfs(j + 1, residual, weight);
        self.current[j] = true;
        self.dfs(j + 1, residual ^ self.columns[j], weight + 1);
        self.current[j] = false;
    }
}

/// Returns `None` when `target` is outside the column span.
pub fn min_weight_solution(
    columns: &[u64],
    target: u64,
    node_limit: Option<u64>,
) -> Option<BnbOutcome> {
    let k = columns.len();
    let mut spans = vec![[0u64; 64]; k + 1];
    let mut max_weight = vec![0u32; k + 1];
    for j in (0..k).rev() {
        spans[j] = spans[j + 1];
        insert(&mut spans[j], columns[j]);
        max_weight[j] = max_weight[j + 1].max(columns[j].count_ones());
    }
    if reduce(&spans[0], target) != 0 {
        return None;
    }
    let mut search = Search {
        columns,
        spans,
        max_weight,
        current: vec![false; k],
        best: None,
        nodes: 0,
        limit: node_limit.unwrap_or(u64::MAX),
    };
    search.dfs(0, target, 0);
    let exhausted = search.nodes < search.limit;
    let nodes = search.nodes;
    search.best.map(|(weight, x)| BnbOutcome {
        x,
        weight,
        optimal: exhausted,
        nodes,
    })
}
