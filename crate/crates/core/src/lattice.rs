//! Triangular 4.8.8 color codes.
//!
//! Geometry: square cell `(a, b)` is centred at `(4a+2, 4b+2)` and its four
//! vertices sit one unit away along the axes. Octagon `(i, j)` is centred at
//! `(4i, 4j)` with vertices at `(±1, ±2)` and `(±2, ±1)`. A code of distance
//! `d = 2c - 1` keeps the cells with `a, b >= 0` and `a + b < c`, the cells on
//! the diagonal `a + b = c - 1` contributing only their west and south
//! vertices. Octagons on the bottom row keep odd `i + j`, those on the left
//! column keep even `i + j`, and the one vertex left uncovered is dropped.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gf2::{rank, BitVec};

/// Vertex offsets of an octagon, counter-clockwise.
pub const OCTAGON_SLOTS: [[i64; 2]; 8] = [
    [1, -2],
    [2, -1],
    [2, 1],
    [1, 2],
    [-1, 2],
    [-2, 1],
    [-2, -1],
    [-1, -2],
];

/// Vertex offsets of a square (east, north, west, south).
pub const SQUARE_SLOTS: [[i64; 2]; 4] = [[1, 0], [0, 1], [-1, 0], [0, -1]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Blue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Square,
    Octagon,
}

impl Shape {
    pub fn slots(self) -> &'static [[i64; 2]] {
        match self {
            Shape::Square => &SQUARE_SLOTS,
            Shape::Octagon => &OCTAGON_SLOTS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub id: usize,
    pub color: Color,
    pub shape: Shape,
    pub center: [i64; 2],
    /// Qubits in counter-clockwise slot order.
    pub qubit_ids: Vec<usize>,
    /// Slot index of each entry of `qubit_ids`; truncated faces skip slots.
    pub slots: Vec<usize>,
}

impl Face {
    pub fn weight(&self) -> usize {
        self.qubit_ids.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorCode {
    pub distance: usize,
    /// Integer `[x, y]` coordinates, indexed row-major by `(y, x)`.
    pub qubits: Vec<[i64; 2]>,
    pub faces: Vec<Face>,
    /// Row `f` lists the qubits of face `f` in increasing order.
    pub check_matrix: Vec<Vec<usize>>,
    /// Qubits along the bottom side.
    pub logical_support: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorPattern {
    pub bits: Vec<bool>,
}

impl ErrorPattern {
    pub fn zeros(n: usize) -> Self {
        ErrorPattern {
            bits: vec![false; n],
        }
    }

    pub fn from_indices(n: usize, ones: &[usize]) -> Self {
        let mut e = Self::zeros(n);
        for &i in ones {
            e.bits[i] ^= true;
        }
        e
    }

    pub fn from_mask(n: usize, mask: u128) -> Self {
        ErrorPattern {
            bits: (0..n).map(|i| (mask >> i) & 1 == 1).collect(),
        }
    }

    pub fn to_mask(&self) -> u128 {
        assert!(self.bits.len() <= 128, "pattern longer than 128 bits");
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0u128, |acc, (i, _)| acc | (1u128 << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn parity(&self) -> bool {
        self.weight() % 2 == 1
    }

    pub fn xor(&self, other: &ErrorPattern) -> ErrorPattern {
        assert_eq!(self.len(), other.len(), "length mismatch");
        ErrorPattern {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        }
    }

    pub fn support(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

impl ColorCode {
    pub fn n(&self) -> usize {
        self.qubits.len()
    }

    pub fn m(&self) -> usize {
        self.faces.len()
    }

    pub fn expected_n(distance: usize) -> usize {
        (distance + 1) * (distance + 1) / 2 - 1
    }

    pub fn expected_m(distance: usize) -> usize {
        (distance + 1) * (distance + 1) / 4 - 1
    }

    pub fn check_rows(&self) -> Vec<BitVec> {
        self.check_matrix
            .iter()
            .map(|row| BitVec::from_indices(self.n(), row))
            .collect()
    }

    pub fn dense_check_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.n();
        self.check_matrix
            .iter()
            .map(|row| {
                let mut r = vec![0u8; n];
                for &q in row {
                    r[q] = 1;
                }
                r
            })
            .collect()
    }

    /// Faces containing each qubit.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n()];
        for (f, row) in self.check_matrix.iter().enumerate() {
            for &q in row {
                inc[q].push(f);
            }
        }
        inc
    }

    /// Syndrome of each single-qubit flip, packed into a `u64`.
    pub fn syndrome_columns(&self) -> Result<Vec<u64>> {
        if self.m() > 64 {
            return Err(Error::Guard(format!(
                "m = {} checks does not fit a 64-bit syndrome word",
                self.m()
            )));
        }
        Ok(self
            .incidence()
            .iter()
            .map(|fs| fs.iter().fold(0u64, |acc, &f| acc | (1 << f)))
            .collect())
    }

    /// Each check row packed into a `u128` over qubits.
    pub fn row_masks(&self) -> Result<Vec<u128>> {
        if self.n() > 128 {
            return Err(Error::Guard(format!(
                "n = {} qubits does not fit a 128-bit pattern word",
                self.n()
            )));
        }
        Ok(self
            .check_matrix
            .iter()
            .map(|row| row.iter().fold(0u128, |acc, &q| acc | (1 << q)))
            .collect())
    }

    pub fn logical_mask(&self) -> u128 {
        self.logical_support
            .iter()
            .fold(0u128, |acc, &q| acc | (1 << q))
    }

    /// Number of encoded qubits, `n - 2 rank(H)`.
    pub fn dimension(&self) -> usize {
        self.n() - 2 * rank(&self.check_rows())
    }

    /// Checks every structural invariant of the code.
    pub fn verify(&self) -> Result<()> {
        let (n, m, d) = (self.n(), self.m(), self.distance);
        let fail = |msg: String| Err(Error::Internal(msg));
        if n != Self::expected_n(d) || m != Self::expected_m(d) {
            return fail(format!("d={d}: got n={n}, m={m}"));
        }
        if self.logical_support.len() != d {
            return fail(format!(
                "logical support has {} qubits",
                self.logical_support.len()
            ));
        }
        let rows = self.check_rows();
        for (f, face) in self.faces.iter().enumerate() {
            if face.id != f || !(face.weight() == 4 || face.weight() == 8) {
                return fail(format!("face {f} has weight {}", face.weight()));
            }
            let mut sorted = face.qubit_ids.clone();
            sorted.sort_unstable();
            if sorted != self.check_matrix[f] {
                return fail(format!("face {f} disagrees with its check row"));
            }
        }
        for f in 0..m {
            for g in f + 1..m {
                let overlap = rows[f].xor(&rows[g]).count_ones();
                let shared = (rows[f].count_ones() + rows[g].count_ones() - overlap) / 2;
                if shared % 2 == 1 {
                    return fail(format!("faces {f} and {g} share {shared} qubits"));
                }
                if shared > 0 && self.faces[f].color == self.faces[g].color {
                    return fail(format!("faces {f} and {g} share qubits and a color"));
                }
            }
        }
        if rank(&rows) != m {
            return fail("check matrix is rank deficient".into());
        }
        if self.dimension() != 1 {
            return fail(format!("code encodes {} qubits", self.dimension()));
        }
        let logical = BitVec::from_indices(n, &self.logical_support);
        if rows.iter().any(|r| r.dot(&logical)) {
            return fail("logical support has nonzero syndrome".into());
        }
        Ok(())
    }
}

pub fn build_code(distance: usize) -> Result<ColorCode> {
    if distance == 0 || distance % 2 == 0 {
        return invalid(format!("distance must be odd and positive, got {distance}"));
    }
    if distance == 1 {
        return Ok(ColorCode {
            distance,
            qubits: vec![[2, 1]],
            faces: Vec::new(),
            check_matrix: Vec::new(),
            logical_support: vec![0],
        });
    }
    let c = distance.div_ceil(2) as i64;

    let mut points: BTreeSet<(i64, i64)> = BTreeSet::new();
    for a in 0..c {
        for b in 0..c - a {
            let full = a + b + 2 <= c;
            for (k, off) in SQUARE_SLOTS.iter().enumerate() {
                if full || k >= 2 {
                    points.insert((4 * b + 2 + off[1], 4 * a + 2 + off[0]));
                }
            }
        }
    }

    // (center, shape, color, present slots)
    let mut raw: Vec<([i64; 2], Shape, Color, Vec<usize>)> = Vec::new();
    for a in 0..c {
        for b in 0..c - a {
            if a + b + 2 <= c {
                raw.push((
                    [4 * a + 2, 4 * b + 2],
                    Shape::Square,
                    Color::Green,
                    vec![0, 1, 2, 3],
                ));
            }
        }
    }
    for i in 0..=c {
        for j in 0..=c - i {
            let odd = (i + j) % 2 == 1;
            if (j == 0 && !odd) || (i == 0 && odd) {
                continue;
            }
            let slots: Vec<usize> = (0..8)
                .filter(|&k| {
                    let o = OCTAGON_SLOTS[k];
                    points.contains(&(4 * j + o[1], 4 * i + o[0]))
                })
                .collect();
            if slots.len() == 4 || slots.len() == 8 {
                let color = if odd { Color::Blue } else { Color::Red };
                raw.push(([4 * i, 4 * j], Shape::Octagon, color, slots));
            }
        }
    }

    let mut covered: BTreeSet<(i64, i64)> = BTreeSet::new();
    for (center, shape, _, slots) in &raw {
        for &k in slots {
            let o = shape.slots()[k];
            covered.insert((center[1] + o[1], center[0] + o[0]));
        }
    }
    let index: BTreeMap<(i64, i64), usize> =
        covered.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let qubits: Vec<[i64; 2]> = covered.iter().map(|&(y, x)| [x, y]).collect();

    raw.sort_by_key(|(center, ..)| (center[1], center[0]));
    let faces: Vec<Face> = raw
        .into_iter()
        .enumerate()
        .map(|(id, (center, shape, color, slots))| {
            let qubit_ids = slots
                .iter()
                .map(|&k| {
                    let o = shape.slots()[k];
                    index[&(center[1] + o[1], center[0] + o[0])]
                })
                .collect();
            Face {
                id,
                color,
                shape,
                center,
                qubit_ids,
                slots,
            }
        })
        .collect();
    let check_matrix: Vec<Vec<usize>> = faces
        .iter()
        .map(|f| {
            let mut row = f.qubit_ids.clone();
            row.sort_unstable();
            row
        })
        .collect();
    let mut in_red = vec![false; qubits.len()];
    for f in faces.iter().filter(|f| f.color == Color::Red) {
        for &q in &f.qubit_ids {
            in_red[q] = true;
        }
    }
    let logical_support = (0..qubits.len()).filter(|&q| !in_red[q]).collect();

    let code = ColorCode {
        distance,
        qubits,
        faces,
        check_matrix,
        logical_support,
    };
    code.verify()?;
    Ok(code)
}

pub fn syndrome(code: &ColorCode, error: &ErrorPattern) -> Result<Vec<bool>> {
    if error.len() != code.n() {
        return invalid(format!(
            "error pattern has length {}, code has n = {}",
            error.len(),
            code.n()
        ));
    }
    Ok(code
        .check_matrix
        .iter()
        .map(|row| row.iter().filter(|&&q| error.bits[q]).count() % 2 == 1)
        .collect())
}

/// Whether a codespace residual is a logical flip (odd total weight).
pub fn logical_failure(code: &ColorCode, residual: &ErrorPattern) -> Result<bool> {
    if syndrome(code, residual)?.iter().any(|&b| b) {
        return invalid("residual has nonzero syndrome");
    }
    Ok(residual.parity())
}
