//! The real-arithmetic integer program with slack variables:
//! `[H | -2I | -4I | -8I] y = s`, `y` binary, minimizing the data weight.
//!
//! Kept as an independent cross-check of the GF(2) search. Each face sum
//! `(Hx)_f` must equal `s_f + 2 z1_f + 4 z2_f + 8 z3_f`, so it must have the
//! parity of `s_f` and exceed `s_f` by at most 14.

use crate::error::{invalid, Result};
use crate::lattice::{ColorCode, Shape};

/// Face sums allowed in an optimal single-round solution.
pub fn allowed_sums_2d(shape: Shape, s: bool) -> &'static [usize] {
    match (shape, s) {
        (Shape::Octagon, false) => &[0, 2, 4],
        (Shape::Octagon, true) => &[1, 3],
        (Shape::Square, false) => &[0, 2],
        (Shape::Square, true) => &[1],
    }
}

/// Face sums (data plus both adjacent syndrome errors) allowed in an optimal
/// space-time solution.
pub fn allowed_sums_3d(shape: Shape, s: bool) -> &'static [usize] {
    match (shape, s) {
        (Shape::Octagon, false) => &[0, 2, 4, 6],
        (Shape::Octagon, true) => &[1, 3, 5],
        (Shape::Square, false) => &[0, 2, 4],
        (Shape::Square, true) => &[1, 3],
    }
}

/// The integer matrix `[H | -2I | -4I | -8I]`.
pub fn slack_matrix(code: &ColorCode) -> Vec<Vec<i64>> {
    let (n, m) = (code.n(), code.m());
    let mut a = vec![vec![0i64; n + 3 * m]; m];
    for (f, row) in code.check_matrix.iter().enumerate() {
        for &q in row {
            a[f][q] = 1;
        }
        a[f][n + f] = -2;
        a[f][n + m + f] = -4;
        a[f][n + 2 * m + f] = -8;
    }
    a
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlackSolution {
    pub x: Vec<bool>,
    /// Slack blocks `z1, z2, z3`, each of length m.
    pub z: [Vec<bool>; 3],
    pub weight: usize,
}

impl SlackSolution {
    /// The full variable vector `y = (x, z1, z2, z3)`.
    pub fn y(&self) -> Vec<i64> {
        self.x
            .iter()
            .chain(self.z.iter().flatten())
            .map(|&b| b as i64)
            .collect()
    }
}

struct Search<'a> {
    incidence: &'a [Vec<usize>],
    target: Vec<usize>,
    allowed: Vec<&'static [usize]>,
    restrict: bool,
    sums: Vec<usize>,
    remaining: Vec<usize>,
    x: Vec<bool>,
    best: Option<(usize, Vec<bool>)>,
}

impl Search<'_> {
    fn face_ok(&self, f: usize) -> bool {
        let (sum, s, rem) = (self.sums[f], self.target[f], self.remaining[f]);
        if sum > s + 14 || sum + rem < s {
            return false;
        }
        if rem > 0 {
            return true;
        }
        if self.restrict {
            self.allowed[f].contains(&sum)
        } else {
            sum >= s && (sum - s) % 2 == 0
        }
    }

    fn dfs(&mut self, j: usize, weight: usize) {
        if self.best.as_ref().is_some_and(|(w, _)| weight >= *w) {
            return;
        }
        if j == self.x.len() {
            self.best = Some((weight, self.x.clone()));
            return;
        }
        for value in [false, true] {
            for &f in &self.incidence[j] {
                self.remaining[f] -= 1;
                self.sums[f] += value as usize;
            }
            let ok = self.incidence[j].iter().all(|&f| self.face_ok(f));
            if ok {
                self.x[j] = value;
                self.dfs(j + 1, weight + value as usize);
                self.x[j] = false;
            }
            for &f in &self.incidence[j] {
                self.remaining[f] += 1;
                self.sums[f] -= value as usize;
            }
        }
    }
}

/// Solves the slack program exactly. With `restrict`, face sums are also
/// limited to the allowed sets, which cannot change the optimum.
pub fn solve_slack_ip(
    code: &ColorCode,
    syndrome: &[bool],
    restrict: bool,
) -> Result<SlackSolution> {
    let (n, m) = (code.n(), code.m());
    if syndrome.len() != m {
        return invalid(format!(
            "syndrome has length {}, code has m = {m}",
            syndrome.len()
        ));
    }
    let incidence = code.incidence();
    let mut search = Search {
        incidence: &incidence,
        target: syndrome.iter().map(|&b| b as usize).collect(),
        allowed: code
            .faces
            .iter()
            .zip(syndrome)
            .map(|(f, &s)| allowed_sums_2d(f.shape, s))
            .collect(),
        restrict,
        sums: vec![0; m],
        remaining: code.check_matrix.iter().map(|r| r.len()).collect(),
        x: vec![false; n],
        best: None,
    };
    // Faces with no qubits would never be checked; the codes have none.
    if search
        .remaining
        .iter()
        .zip(&search.target)
        .any(|(&r, &t)| r == 0 && t != 0)
    {
        return invalid("infeasible syndrome");
    }
    search.dfs(0, 0);
    let Some((weight, x)) = search.best else {
        return invalid("infeasible syndrome");
    };
    let mut z = [vec![false; m], vec![false; m], vec![false; m]];
    for (f, row) in code.check_matrix.iter().enumerate() {
        let sum = row.iter().filter(|&&q| x[q]).count();
        let excess = (sum - syndrome[f] as usize) / 2;
        for (k, block) in z.iter_mut().enumerate() {
            block[f] = (excess >> k) & 1 == 1;
        }
    }
    Ok(SlackSolution { x, z, weight })
}
