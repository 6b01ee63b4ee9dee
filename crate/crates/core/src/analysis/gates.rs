//! Thresholds for transversal logical gates, derived from the memory
//! thresholds.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateThresholds {
    pub p_qec: f64,
    pub p_capacity: f64,
    pub identity: f64,
    pub cnot: f64,
    pub hadamard: f64,
    pub s_bit_flip: f64,
    pub s_phase_flip: f64,
    pub t_bit_flip: f64,
    pub t_phase_flip: f64,
    pub measure_x_destructive: f64,
    pub measure_z_destructive: f64,
    pub measure_x_nondestructive: f64,
    pub measure_z_nondestructive: f64,
    pub prepare_zero: f64,
    pub prepare_plus: f64,
}

impl GateThresholds {
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("identity", self.identity),
            ("cnot", self.cnot),
            ("hadamard", self.hadamard),
            ("s_bit_flip", self.s_bit_flip),
            ("s_phase_flip", self.s_phase_flip),
            ("t_bit_flip", self.t_bit_flip),
            ("t_phase_flip", self.t_phase_flip),
            ("measure_x_destructive", self.measure_x_destructive),
            ("measure_z_destructive", self.measure_z_destructive),
            ("measure_x_nondestructive", self.measure_x_nondestructive),
            ("measure_z_nondestructive", self.measure_z_nondestructive),
            ("prepare_zero", self.prepare_zero),
            ("prepare_plus", self.prepare_plus),
        ]
    }
}

/// Largest `q` such that one extra bit-flip channel of strength `q` keeps the
/// combined flip rate `2q(1-q)` at `p`.
pub fn single_bp_budget(p: f64) -> f64 {
    // 1/2 - sqrt(1 - 2p)/2, rearranged for small p.
    p / (1.0 + (1.0 - 2.0 * p).sqrt())
}

/// Phase-flip strength after the three-fold composition.
pub fn phase_cubic(x: f64) -> f64 {
    x * x * x + 3.0 * x * (1.0 - x) * (1.0 - x)
}

/// Root in `[0, 1/2]` of `x^3 + 3x(1-x)^2 = p` by bisection. The cubic rises
/// monotonically from 0 to 1/2 on that interval.
pub fn phase_root(p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phase_cubic(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn gate_thresholds(p_qec: f64, p_capacity: f64) -> Result<GateThresholds> {
    for (name, v) in [("p_qec", p_qec), ("p_capacity", p_capacity)] {
        if !(0.0..0.5).contains(&v) {
            return invalid(format!("{name} must lie in [0, 1/2), got {v}"));
        }
    }
    let bp = single_bp_budget(p_qec);
    let phase = phase_root(p_qec);
    let two_thirds = 2.0 * p_qec / 3.0;
    Ok(GateThresholds {
        p_qec,
        p_capacity,
        identity: p_qec,
        cnot: two_thirds,
        hadamard: bp,
        s_bit_flip: bp,
        s_phase_flip: phase,
        t_bit_flip: bp,
        t_phase_flip: phase,
        measure_x_destructive: p_capacity,
        measure_z_destructive: p_capacity,
        measure_x_nondestructive: two_thirds,
        measure_z_nondestructive: two_thirds,
        prepare_zero: p_qec,
        prepare_plus: p_qec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gives_zero() {
        let g = gate_thresholds(0.0, 0.0).unwrap();
        assert!(g.entries().iter().all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn surd_forms_agree() {
        for p in [1e-4f64, 0.0305, 0.2, 0.49] {
            let direct = 0.5 - 0.5 * (1.0 - 2.0 * p).sqrt();
            assert!((single_bp_budget(p) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn cubic_root_small_p() {
        let x = phase_root(1e-4);
        assert!((phase_cubic(x) - 1e-4).abs() < 1e-12);
        assert!((x / 1e-4 - 1.0 / 3.0).abs() < 0.01 / 3.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(gate_thresholds(0.5, 0.1).is_err());
        assert!(gate_thresholds(0.1, -0.1).is_err());
    }
}
