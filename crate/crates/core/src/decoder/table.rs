//! All-syndrome minimum weights and the packed parity lookup table.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::ColorCode;

const NONE: u8 = u8::MAX;

/// Breadth-first search over the Cayley graph of the syndrome group generated
/// by the qubit columns. `dist[s]` is the minimum weight of any error with
/// syndrome `s`; following `parent` pointers recovers one such error.
#[derive(Clone, Debug)]
pub struct SyndromeGraph {
    pub m: usize,
    pub columns: Vec<u64>,
    dist: Vec<u8>,
    parent: Vec<u8>,
}

impl SyndromeGraph {
    pub const MAX_CHECKS: usize = 26;

    pub fn for_code(code: &ColorCode) -> Result<Self> {
        Self::new(code.syndrome_columns()?, code.m())
    }

    pub fn new(columns: Vec<u64>, m: usize) -> Result<Self> {
        if m > Self::MAX_CHECKS {
            return Err(Error::Guard(format!(
                "2^{m} syndromes need about {} MiB; limit is m <= {}",
                (2u64 << m) >> 20,
                Self::MAX_CHECKS
            )));
        }
        if columns.len() >= NONE as usize {
            return Err(Error::Guard(format!(
                "{} columns exceed 254",
                columns.len()
            )));
        }
        let size = 1usize << m;
        let mut dist = vec![u8::MAX; size];
        let mut parent = vec![NONE; size];
        let mut queue = Vec::with_capacity(size);
        dist[0] = 0;
        queue.push(0u64);
        let mut head = 0;
        while head < queue.len() {
            let s = queue[head];
            head += 1;
            let next = dist[s as usize] + 1;
            for (q, &c) in columns.iter().enumerate() {
                let t = (s ^ c) as usize;
                if dist[t] == u8::MAX && t != 0 {
                    dist[t] = next;
                    parent[t] = q as u8;
                    queue.push(t as u64);
                }
            }
        }
        if queue.len() != size {
            return Err(Error::Internal(format!(
                "only {} of {size} syndromes are reachable",
                queue.len()
            )));
        }
        Ok(SyndromeGraph {
            m,
            columns,
            dist,
            parent,
        })
    }

    pub fn size(&self) -> usize {
        self.dist.len()
    }

    #[inline]
    pub fn weight(&self, s: u64) -> u32 {
        self.dist[s as usize] as u32
    }

    /// Parity of any minimum-weight error with syndrome `s`.
    #[inline]
    pub fn parity(&self, s: u64) -> bool {
        self.dist[s as usize] & 1 == 1
    }

    #[inline]
    pub fn parent(&self, s: u64) -> Option<usize> {
        match self.parent[s as usize] {
            NONE => None,
            q => Some(q as usize),
        }
    }

    /// One minimum-weight error with syndrome `s`, as a qubit mask.
    pub fn correction(&self, mut s: u64) -> u128 {
        let mut x = 0u128;
        while let Some(q) = self.parent(s) {
            x ^= 1 << q;
            s ^= self.columns[q];
        }
        x
    }

    #[inline]
    pub fn syndrome_of(&self, mut e: u128) -> u64 {
        let mut s = 0;
        while e != 0 {
            let q = e.trailing_zeros() as usize;
            s ^= self.columns[q];
            e &= e - 1;
        }
        s
    }
}

pub const TABLE_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"CHROMALT";
const HEADER_LEN: usize = 8 + 4 * 4 + 8 + 32;

/// Parity of a minimum-weight correction for every syndrome, one bit each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LookupTable {
    pub distance: usize,
    pub n: usize,
    pub m: usize,
    words: Vec<u64>,
}

impl LookupTable {
    pub const MAX_CHECKS: usize = 24;

    pub fn from_graph(code: &ColorCode, graph: &SyndromeGraph) -> Self {
        let size = graph.size();
        let mut words = vec![0u64; size.div_ceil(64)];
        for s in 0..size {
            if graph.parity(s as u64) {
                words[s / 64] |= 1 << (s % 64);
            }
        }
        LookupTable {
            distance: code.distance,
            n: code.n(),
            m: code.m(),
            words,
        }
    }

    pub fn len(&self) -> usize {
        1 << self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn parity(&self, s: u64) -> bool {
        let s = s as usize;
        (self.words[s / 64] >> (s % 64)) & 1 == 1
    }

    fn payload(&self) -> Vec<u8> {
        let bytes = self.len().div_ceil(8);
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(bytes);
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = self.payload();
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(MAGIC);
        for v in [
            TABLE_FORMAT_VERSION,
            self.distance as u32,
            self.n as u32,
            self.m as u32,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&Sha256::digest(&payload));
        out.extend_from_slice(&payload);
        out
    }

    /// Parses a cache file; any header, size or checksum mismatch is an error.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |why: &str| Error::InvalidInput(format!("corrupt lookup table: {why}"));
        if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
            return Err(bad("bad magic"));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap());
        if word(0) != TABLE_FORMAT_VERSION {
            return Err(bad("format version"));
        }
        let (distance, n, m) = (word(1) as usize, word(2) as usize, word(3) as usize);
        if m > Self::MAX_CHECKS {
            return Err(bad("m out of range"));
        }
        let len = u64::from_le_bytes(bytes[24..32].try_into().unwrap()) as usize;
        let payload = &bytes[HEADER_LEN..];
        if len != payload.len() || len != (1usize << m).div_ceil(8) {
            return Err(bad("payload length"));
        }
        if Sha256::digest(payload).as_slice() != &bytes[32..64] {
            return Err(bad("checksum"));
        }
        let mut words = vec![0u64; (1usize << m).div_ceil(64)];
        for (i, b) in payload.iter().enumerate() {
            words[i / 8] |= (*b as u64) << (8 * (i % 8));
        }
        Ok(LookupTable {
            distance,
            n,
            m,
            words,
        })
    }
}
