//! Fault sampling with reproducible per-trial random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::ErrorPattern;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    CodeCapacity,
    Phenomenological,
    CircuitLevel,
}

/// Which two-qubit depolarizing channel follows a CNOT.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DpVariant {
    /// Each of the 16 Pauli pairs with probability p/16.
    #[default]
    SixteenUniform,
    /// Each of the 15 nontrivial pairs with probability p/15.
    FifteenNontrivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p: f64,
    pub model: NoiseModel,
    pub dp_variant: DpVariant,
}

impl NoiseParams {
    pub fn new(p: f64, model: NoiseModel, dp_variant: DpVariant) -> Result<Self> {
        check_probability(p)?;
        Ok(NoiseParams {
            p,
            model,
            dp_variant,
        })
    }
}

pub fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("probability {p} outside [0, 1]"));
    }
    Ok(())
}

/// A ChaCha stream addressed by `(master_seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        RngStream {
            master_seed,
            stream_id,
            rng,
        }
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.random::<f64>() < p
    }

    #[inline]
    pub fn below(&mut self, bound: u32) -> u32 {
        self.rng.random_range(0..bound)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }
}

/// Derives a seed for one campaign point from the master seed.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    #[default]
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

pub fn sample_iid(n: usize, p: f64, rng: &mut RngStream) -> Result<ErrorPattern> {
    check_probability(p)?;
    Ok(ErrorPattern {
        bits: (0..n).map(|_| rng.bernoulli(p)).collect(),
    })
}

/// Same draws as [`sample_iid`], packed into a word. Requires `n <= 128`.
#[inline]
pub fn sample_iid_mask(n: usize, p: f64, rng: &mut RngStream) -> u128 {
    debug_assert!(n <= 128);
    let mut mask = 0u128;
    for i in 0..n {
        if rng.bernoulli(p) {
            mask |= 1 << i;
        }
    }
    mask
}

/// Bit-flip then phase-flip, each with probability `p`.
#[inline]
pub fn sample_bp(p: f64, rng: &mut RngStream) -> Pauli {
    let x = rng.bernoulli(p);
    let z = rng.bernoulli(p);
    Pauli::from_bits(x, z)
}

#[inline]
pub fn sample_two_qubit_pauli(p: f64, rng: &mut RngStream, variant: DpVariant) -> (Pauli, Pauli) {
    if !rng.bernoulli(p) {
        return (Pauli::I, Pauli::I);
    }
    let k = match variant {
        DpVariant::SixteenUniform => rng.below(16),
        DpVariant::FifteenNontrivial => 1 + rng.below(15),
    } as usize;
    (Pauli::ALL[k / 4], Pauli::ALL[k % 4])
}
