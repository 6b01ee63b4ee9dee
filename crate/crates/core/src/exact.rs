//! Exact failure polynomials under code-capacity noise.
//!
//! Every error with syndrome `s` is either `c ^ g` or its complement, where
//! `c` is the minimum-weight correction for `s` and `g` runs over the
//! stabilizer group. The decoder succeeds on the first family and fails on the
//! second, so one Gray-code walk per syndrome gives the whole histogram.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::SyndromeGraph;
use crate::error::{Error, Result};
use crate::lattice::ColorCode;
use crate::noise::check_probability;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailurePolynomial {
    pub distance: usize,
    pub n: usize,
    /// `counts[w]` is the number of weight-`w` patterns the decoder fails on.
    pub counts: Vec<u64>,
}

/// Largest check count accepted; d = 7 has 15.
pub const MAX_EXACT_CHECKS: usize = 15;

fn guard(code: &ColorCode) -> Result<()> {
    if code.m() > MAX_EXACT_CHECKS || code.n() > 64 {
        return Err(Error::Guard(format!(
            "exact enumeration needs 2^{} pattern weights; limit is d <= 7",
            2 * code.m()
        )));
    }
    Ok(())
}

fn masks(code: &ColorCode) -> Result<Vec<u64>> {
    Ok(code.row_masks()?.into_iter().map(|r| r as u64).collect())
}

pub fn failure_polynomial(code: &ColorCode) -> Result<FailurePolynomial> {
    guard(code)?;
    let n = code.n();
    let rows = masks(code)?;
    let graph = SyndromeGraph::for_code(code)?;
    let counts = (0..graph.size() as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; n + 1],
            |mut hist, s| {
                let mut e = graph.correction(s) as u64;
                hist[n - e.count_ones() as usize] += 1;
                for i in 1u64..(1 << rows.len()) {
                    e ^= rows[i.trailing_zeros() as usize];
                    hist[n - e.count_ones() as usize] += 1;
                }
                hist
            },
        )
        .reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(FailurePolynomial {
        distance: code.distance,
        n,
        counts,
    })
}

/// Scores all `2^n` patterns one by one. Independent of the coset argument;
/// feasible up to d = 5.
pub fn direct_enumeration(code: &ColorCode) -> Result<FailurePolynomial> {
    let n = code.n();
    if n > 24 {
        return Err(Error::Guard(format!(
            "2^{n} patterns is too many for direct enumeration"
        )));
    }
    let graph = SyndromeGraph::for_code(code)?;
    let mut counts = vec![0u64; n + 1];
    for e in 0u64..(1 << n) {
        let s = graph.syndrome_of(e as u128);
        if graph.parity(s) != (e.count_ones() & 1 == 1) {
            counts[e.count_ones() as usize] += 1;
        }
    }
    Ok(FailurePolynomial {
        distance: code.distance,
        n,
        counts,
    })
}

pub fn binomial(n: usize, k: usize) -> u64 {
    (0..k.min(n - k)).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

impl FailurePolynomial {
    /// `sum_w c_w p^w (1-p)^(n-w)`, Horner-style in `p / (1-p)`.
    pub fn evaluate(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        if p == 1.0 {
            return Ok(self.counts[self.n] as f64);
        }
        let ratio = p / (1.0 - p);
        let acc = self
            .counts
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * ratio + c as f64);
        Ok(acc * (1.0 - p).powi(self.n as i32))
    }

    pub fn satisfies_complement_symmetry(&self) -> bool {
        (0..=self.n).all(|w| self.counts[w] + self.counts[self.n - w] == binomial(self.n, w))
    }
}

pub fn evaluate(poly: &FailurePolynomial, p: f64) -> Result<f64> {
    poly.evaluate(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_code;

    #[test]
    fn distance_one_and_three() {
        let p1 = failure_polynomial(&build_code(1).unwrap()).unwrap();
        assert_eq!(p1.counts, vec![0, 1]);
        let p3 = failure_polynomial(&build_code(3).unwrap()).unwrap();
        assert_eq!(p3.counts, vec![0, 0, 21, 7, 28, 0, 7, 1]);
    }

    #[test]
    fn direct_matches_coset_walk() {
        for d in [3, 5] {
            let code = build_code(d).unwrap();
            let a = failure_polynomial(&code).unwrap();
            assert_eq!(a, direct_enumeration(&code).unwrap());
            assert!(a.satisfies_complement_symmetry());
            assert!(a.counts[..d.div_ceil(2)].iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn evaluation_endpoints() {
        let poly = failure_polynomial(&build_code(5).unwrap()).unwrap();
        assert_eq!(poly.evaluate(0.0).unwrap(), 0.0);
        assert_eq!(poly.evaluate(1.0).unwrap(), 1.0);
        assert!((poly.evaluate(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(poly.evaluate(1.5).is_err());
    }

    #[test]
    fn steane_value_at_one_tenth() {
        let poly = failure_polynomial(&build_code(3).unwrap()).unwrap();
        let p: f64 = 0.1;
        let q = 1.0 - p;
        let direct = 21.0 * p.powi(2) * q.powi(5)
            + 7.0 * p.powi(3) * q.powi(4)
            + 28.0 * p.powi(4) * q.powi(3)
            + 7.0 * p.powi(6) * q
            + p.powi(7);
        assert!((poly.evaluate(p).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn guard_refuses_large_codes() {
        assert!(matches!(
            failure_polynomial(&build_code(9).unwrap()),
            Err(Error::Guard(_))
        ));
    }
}
