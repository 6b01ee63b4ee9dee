//! Most-likely-error decoding as minimum-weight binary optimization.

pub mod bnb;
pub mod slack;
pub mod spacetime;
pub mod table;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{ColorCode, ErrorPattern};

pub use slack::{allowed_sums_2d, allowed_sums_3d, solve_slack_ip, SlackSolution};
pub use spacetime::{SpacetimeSolution, SpacetimeWorkspace};
pub use table::{LookupTable, SyndromeGraph, TABLE_FORMAT_VERSION};

#[derive(Clone, Debug)]
pub struct DecodeProblem2D<'a> {
    pub code: &'a ColorCode,
    pub syndrome: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct DecodeProblem3D<'a> {
    pub code: &'a ColorCode,
    /// Row `t` is `s_t ^ s_{t-1}` with `s_0 = 0`.
    pub delta_s: Vec<Vec<bool>>,
    /// Forces the last round's syndrome errors to zero.
    pub final_round_perfect: bool,
}

impl<'a> DecodeProblem3D<'a> {
    /// Builds the difference syndromes from raw per-round measurements.
    pub fn from_history(code: &'a ColorCode, raw: &[Vec<bool>]) -> Result<Self> {
        let mut prev = vec![false; code.m()];
        let mut delta_s = Vec::with_capacity(raw.len());
        for row in raw {
            if row.len() != code.m() {
                return invalid(format!(
                    "history row has length {}, m = {}",
                    row.len(),
                    code.m()
                ));
            }
            delta_s.push(row.iter().zip(&prev).map(|(a, b)| a ^ b).collect());
            prev.clone_from(row);
        }
        Ok(DecodeProblem3D {
            code,
            delta_s,
            final_round_perfect: false,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeResult {
    /// One pattern per round (a single entry for 2D problems).
    pub data_correction: Vec<ErrorPattern>,
    /// Rounds x m; empty for 2D problems.
    pub syndrome_error_assignment: Vec<Vec<bool>>,
    pub weight: usize,
    pub optimal: bool,
}

pub fn pack_syndrome(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
}

pub fn unpack_syndrome(s: u64, m: usize) -> Vec<bool> {
    (0..m).map(|i| (s >> i) & 1 == 1).collect()
}

fn check_packable(code: &ColorCode) -> Result<()> {
    if code.m() > 64 || code.n() > 128 {
        return Err(Error::Guard(format!(
            "decoders support n <= 128 and m <= 64; got n = {}, m = {}",
            code.n(),
            code.m()
        )));
    }
    Ok(())
}

/// Lexicographically smallest minimum-weight `x` with `Hx = s`.
pub fn decode_2d(problem: &DecodeProblem2D) -> Result<DecodeResult> {
    let code = problem.code;
    check_packable(code)?;
    if problem.syndrome.len() != code.m() {
        return invalid(format!(
            "syndrome has length {}, code has m = {}",
            problem.syndrome.len(),
            code.m()
        ));
    }
    let columns = code.syndrome_columns()?;
    let outcome = bnb::min_weight_solution(&columns, pack_syndrome(&problem.syndrome), None)
        .ok_or_else(|| Error::Internal("syndrome outside the column space".into()))?;
    Ok(DecodeResult {
        data_correction: vec![ErrorPattern { bits: outcome.x }],
        syndrome_error_assignment: Vec::new(),
        weight: outcome.weight,
        optimal: outcome.optimal,
    })
}

fn check_3d(problem: &DecodeProblem3D) -> Result<()> {
    check_packable(problem.code)?;
    if let Some(row) = problem.delta_s.iter().find(|r| r.len() != problem.code.m()) {
        return invalid(format!(
            "delta row has length {}, m = {}",
            row.len(),
            problem.code.m()
        ));
    }
    Ok(())
}

fn result_3d(code: &ColorCode, sol: SpacetimeSolution) -> DecodeResult {
    DecodeResult {
        data_correction: sol
            .x
            .iter()
            .map(|&x| ErrorPattern::from_mask(code.n(), x))
            .collect(),
        syndrome_error_assignment: sol
            .r
            .iter()
            .map(|&r| unpack_syndrome(r, code.m()))
            .collect(),
        weight: sol.weight as usize,
        optimal: true,
    }
}

/// Minimizes data plus syndrome errors subject to
/// `H x_t ^ r_t ^ r_{t-1} = ds_t`, `r_0 = 0`.
pub fn decode_3d(problem: &DecodeProblem3D) -> Result<DecodeResult> {
    check_3d(problem)?;
    let graph = SyndromeGraph::for_code(problem.code)?;
    let mut ws = SpacetimeWorkspace::new(&graph);
    let delta: Vec<u64> = problem.delta_s.iter().map(|r| pack_syndrome(r)).collect();
    Ok(result_3d(
        problem.code,
        ws.solve(&delta, problem.final_round_perfect),
    ))
}

/// Columns of the block matrix acting on `(x_1..x_T, r_1..r_T)`, rows packed
/// as `t * m + f`.
pub fn spacetime_columns(
    code: &ColorCode,
    rounds: usize,
    final_round_perfect: bool,
) -> Result<Vec<u64>> {
    let m = code.m();
    if m * rounds > 64 {
        return Err(Error::Guard(format!(
            "{rounds} rounds of {m} checks exceed 64 rows"
        )));
    }
    let base = code.syndrome_columns()?;
    let mut cols = Vec::new();
    for t in 0..rounds {
        cols.extend(base.iter().map(|&c| c << (t * m)));
    }
    for t in 0..rounds {
        if final_round_perfect && t + 1 == rounds {
            break;
        }
        for f in 0..m {
            let mut c = 1u64 << (t * m + f);
            if t + 1 < rounds {
                c |= 1u64 << ((t + 1) * m + f);
            }
            cols.push(c);
        }
    }
    Ok(cols)
}

/// The same space-time program solved by GF(2) branch and bound over the
/// block matrix. Small instances only.
pub fn decode_3d_bnb(problem: &DecodeProblem3D, node_limit: Option<u64>) -> Result<DecodeResult> {
    check_3d(problem)?;
    let (code, rounds, m, n) = (
        problem.code,
        problem.delta_s.len(),
        problem.code.m(),
        problem.code.n(),
    );
    let cols = spacetime_columns(code, rounds, problem.final_round_perfect)?;
    let target = problem
        .delta_s
        .iter()
        .enumerate()
        .fold(0u64, |acc, (t, r)| acc | (pack_syndrome(r) << (t * m)));
    let out = bnb::min_weight_solution(&cols, target, node_limit)
        .ok_or_else(|| Error::Internal("space-time syndrome outside the column space".into()))?;
    let mut x = vec![0u128; rounds];
    let mut r = vec![0u64; rounds];
    for (j, _) in out.x.iter().enumerate().filter(|(_, &b)| b) {
        if j < n * rounds {
            x[j / n] |= 1 << (j % n);
        } else {
            let k = j - n * rounds;
            r[k / m] |= 1 << (k % m);
        }
    }
    let mut res = result_3d(
        code,
        SpacetimeSolution {
            x,
            r,
            weight: out.weight as u32,
        },
    );
    res.optimal = out.optimal;
    Ok(res)
}

/// Face sums `(Hx)_f` of a correction.
pub fn face_sums(code: &ColorCode, x: &ErrorPattern) -> Vec<usize> {
    code.check_matrix
        .iter()
        .map(|row| row.iter().filter(|&&q| x.bits[q]).count())
        .collect()
}

pub fn build_lookup_table(code: &ColorCode) -> Result<LookupTable> {
    if code.m() > LookupTable::MAX_CHECKS {
        return Err(Error::Guard(format!(
            "table needs 2^{} bits ({} MiB) plus a search buffer of {} MiB; limit is m <= {}",
            code.m(),
            (1u64 << code.m()) >> 23,
            (2u64 << code.m()) >> 20,
            LookupTable::MAX_CHECKS
        )));
    }
    let graph = SyndromeGraph::for_code(code)?;
    Ok(LookupTable::from_graph(code, &graph))
}
