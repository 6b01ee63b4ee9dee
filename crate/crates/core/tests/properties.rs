//! Randomized invariants and independent statistical oracles.

use std::collections::{HashMap, HashSet};

use chroma::analysis::{
    count_saps, interpolated_crossing, phase_cubic, phase_root, saw_bound, SapLattice, SawModel,
    SawParams,
};
use chroma::circuit::{default_schedules, enumerate_hooks, Schedule};
use chroma::decoder::{
    decode_2d, decode_3d, pack_syndrome, unpack_syndrome, DecodeProblem2D, DecodeProblem3D,
};
use chroma::exact::failure_polynomial;
use chroma::lattice::{logical_failure, syndrome};
use chroma::montecarlo::{
    estimate_capacity, estimate_phenomenological, CapacityTrial, PhenomTrial,
};
use chroma::noise::{sample_two_qubit_pauli, DpVariant, RngStream};
use chroma::{build_code, ColorCode, ErrorPattern};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn code(d: usize) -> ColorCode {
    build_code(d).unwrap()
}

fn pattern(bits: &[bool]) -> ErrorPattern {
    ErrorPattern {
        bits: bits.to_vec(),
    }
}

fn decode(code: &ColorCode, e: &ErrorPattern) -> ErrorPattern {
    let s = syndrome(code, e).unwrap();
    decode_2d(&DecodeProblem2D { code, syndrome: s })
        .unwrap()
        .data_correction[0]
        .clone()
}

fn errors(d: usize) -> impl Strategy<Value = (usize, Vec<bool>)> {
    let n = ColorCode::expected_n(d);
    proptest::collection::vec(any::<bool>(), n).prop_map(move |bits| (d, bits))
}

fn any_distance_errors() -> impl Strategy<Value = (usize, Vec<bool>)> {
    prop_oneof![errors(3), errors(5), errors(7)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn syndrome_is_linear((d, a) in any_distance_errors(), seed in any::<u64>()) {
        let c = code(d);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let b: Vec<bool> = (0..c.n()).map(|_| rng.random()).collect();
        let (ea, eb) = (pattern(&a), pattern(&b));
        let sum = syndrome(&c, &ea.xor(&eb)).unwrap();
        let parts: Vec<bool> = syndrome(&c, &ea).unwrap().iter().zip(syndrome(&c, &eb).unwrap()).map(|(x, y)| x ^ y).collect();
        prop_assert_eq!(sum, parts);
    }

    #[test]
    fn correction_matches_syndrome_and_is_no_heavier((d, bits) in prop_oneof![errors(3), errors(5)]) {
        let c = code(d);
        let e = pattern(&bits);
        let fix = decode(&c, &e);
        prop_assert_eq!(syndrome(&c, &fix).unwrap(), syndrome(&c, &e).unwrap());
        prop_assert!(fix.weight() <= e.weight());
    }

    #[test]
    fn stabilizers_do_not_change_the_outcome((d, bits) in prop_oneof![errors(3), errors(5)], face in any::<prop::sample::Index>()) {
        let c = code(d);
        let e = pattern(&bits);
        let row = &c.check_matrix[face.index(c.m())];
        let shifted = e.xor(&ErrorPattern::from_indices(c.n(), row));
        let fail = |x: &ErrorPattern| logical_failure(&c, &x.xor(&decode(&c, x))).unwrap();
        prop_assert_eq!(fail(&e), fail(&shifted));
    }

    #[test]
    fn low_weight_errors_are_corrected(d in prop::sample::select(vec![3usize, 5, 7]), seed in any::<u64>()) {
        let c = code(d);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let t = rng.random_range(0..=(d - 1) / 2);
        let mut support: Vec<usize> = (0..c.n()).collect();
        for i in 0..t {
            let j = rng.random_range(i..c.n());
            support.swap(i, j);
        }
        let e = ErrorPattern::from_indices(c.n(), &support[..t]);
        prop_assert!(!logical_failure(&c, &e.xor(&decode(&c, &e))).unwrap());
    }

    #[test]
    fn single_perfect_round_matches_the_plane_decoder((d, bits) in prop_oneof![errors(3), errors(5)]) {
        let c = code(d);
        let e = pattern(&bits);
        let s = syndrome(&c, &e).unwrap();
        let mut p3 = DecodeProblem3D::from_history(&c, std::slice::from_ref(&s)).unwrap();
        p3.final_round_perfect = true;
        let flat = decode_2d(&DecodeProblem2D { code: &c, syndrome: s }).unwrap();
        prop_assert_eq!(decode_3d(&p3).unwrap().weight, flat.weight);
    }

    #[test]
    fn spacetime_weight_is_at_most_the_fault_count(seed in any::<u64>(), rounds in 1usize..5) {
        let c = code(5);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut data = ErrorPattern::zeros(c.n());
        let mut faults = 0;
        let mut raw = Vec::new();
        for _ in 0..rounds {
            for q in 0..c.n() {
                if rng.random_bool(0.05) {
                    data.bits[q] ^= true;
                    faults += 1;
                }
            }
            let mut s = syndrome(&c, &data).unwrap();
            for bit in s.iter_mut() {
                if rng.random_bool(0.05) {
                    *bit ^= true;
                    faults += 1;
                }
            }
            raw.push(s);
        }
        let result = decode_3d(&DecodeProblem3D::from_history(&c, &raw).unwrap()).unwrap();
        prop_assert!(result.weight <= faults);
        prop_assert_eq!(result.data_correction.len(), rounds);
    }

    #[test]
    fn syndrome_packing_roundtrips(s in any::<u64>(), m in 1usize..=64) {
        let masked = if m == 64 { s } else { s & ((1 << m) - 1) };
        prop_assert_eq!(pack_syndrome(&unpack_syndrome(masked, m)), masked);
    }

    #[test]
    fn saw_bound_solves_its_quadratic(mu in 1.05f64..4.0) {
        let b = saw_bound(&SawParams { mu, delta_max: 10 }, SawModel::Capacity).unwrap();
        prop_assert!(b > 0.0 && b < 0.5);
        prop_assert!((b * (1.0 - b) - 1.0 / (4.0 * mu * mu)).abs() < 1e-14);
    }

    #[test]
    fn phase_root_solves_its_cubic(p in 0.0f64..0.5) {
        let x = phase_root(p);
        prop_assert!((0.0..=0.5).contains(&x));
        prop_assert!((phase_cubic(x) - p).abs() < 1e-12);
    }

    #[test]
    fn interpolation_finds_line_crossings(root in 0.01f64..0.09, s1 in 0.5f64..5.0, s2 in 5.5f64..20.0) {
        let grid: Vec<f64> = (0..11).map(|i| i as f64 * 0.01).collect();
        let a: Vec<(f64, f64)> = grid.iter().map(|&p| (p, 0.3 + s1 * (p - root))).collect();
        let b: Vec<(f64, f64)> = grid.iter().map(|&p| (p, 0.3 + s2 * (p - root))).collect();
        let x = interpolated_crossing(&a, &b).unwrap();
        prop_assert!((x - root).abs() < 1e-9);
    }
}

#[test]
fn schedules_roundtrip_through_json() {
    for d in [3, 5, 7] {
        let c = code(d);
        let (a, b) = default_schedules(&c).unwrap();
        for s in [a, b] {
            let back = Schedule::from_json(&s.to_json()).unwrap();
            assert_eq!(back.hash(), s.hash());
            assert_eq!(back, s);
        }
    }
}

#[test]
fn measured_hook_weights() {
    for d in [3, 5] {
        let c = code(d);
        let (a, b) = default_schedules(&c).unwrap();
        for s in [a, b] {
            let r = enumerate_hooks(&c, &s).unwrap();
            assert!(r.max_weight_square_ancilla <= 2, "{d} {}: {r:?}", s.name);
            assert!(r.max_weight <= 4, "{d} {}: {r:?}", s.name);
            if d == 3 {
                assert!(r.max_weight <= 2, "{}: {r:?}", s.name);
            }
        }
    }
}

/// Chi-square statistic of observed counts against equal expectations.
fn chi_square(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

#[test]
fn two_qubit_channel_is_uniform() {
    // 99.99th percentiles of chi-square with 15 and 14 degrees of freedom.
    for (variant, first, limit) in [
        (DpVariant::SixteenUniform, 0, 44.3),
        (DpVariant::FifteenNontrivial, 1, 42.6),
    ] {
        let mut rng = RngStream::new(41, 0);
        let mut counts = [0u64; 16];
        for _ in 0..160_000 {
            let (a, b) = sample_two_qubit_pauli(1.0, &mut rng, variant);
            counts[4 * a.index() + b.index()] += 1;
        }
        if first == 1 {
            assert_eq!(counts[0], 0);
        }
        let chi = chi_square(&counts[first..]);
        assert!(
            chi < limit,
            "{variant:?}: chi-square {chi}, counts {counts:?}"
        );
    }
}

#[test]
fn bernoulli_rate_and_stream_independence() {
    let n = 200_000u64;
    for p in [0.001, 0.03, 0.5] {
        let mut rng = RngStream::new(5, 9);
        let hits = (0..n).filter(|_| rng.bernoulli(p)).count() as f64;
        let z = (hits - n as f64 * p) / (n as f64 * p * (1.0 - p)).sqrt();
        assert!(z.abs() < 5.0, "p = {p}: z = {z}");
    }
    let a: Vec<u64> = {
        let mut r = RngStream::new(5, 0);
        (0..4).map(|_| r.next_u64()).collect()
    };
    let b: Vec<u64> = {
        let mut r = RngStream::new(5, 1);
        (0..4).map(|_| r.next_u64()).collect()
    };
    assert_ne!(a, b);
}

#[test]
fn capacity_sampling_matches_exact_polynomial() {
    for (d, p) in [(3, 0.1), (5, 0.08), (5, 0.12)] {
        let c = code(d);
        let exact = failure_polynomial(&c).unwrap().evaluate(p).unwrap();
        let est = estimate_capacity(&c, &CapacityTrial::new(&c).unwrap(), p, 200_000, 8).unwrap();
        let sigma = (exact * (1.0 - exact) / est.trials as f64).sqrt();
        let z = (est.p_fail - exact) / sigma;
        assert!(
            z.abs() < 5.0,
            "d = {d}, p = {p}: sampled {} exact {exact} (z = {z:.2})",
            est.p_fail
        );
    }
}

/// Phenomenological failure rate by a separate simulator: per-syndrome
/// minimum weights by listing every error pattern, a dynamic program over
/// the syndrome-error vectors of each round, and an odd-weight test for a
/// logical operator.
fn phenomenological_oracle(c: &ColorCode, p: f64, trials: u64, seed: u64) -> f64 {
    let (n, m) = (c.n(), c.m());
    let rows = &c.check_matrix;
    let syn = |e: u64| -> usize {
        rows.iter().enumerate().fold(0, |s, (f, q)| {
            let odd = q.iter().filter(|&&i| e >> i & 1 == 1).count() % 2 == 1;
            s | (odd as usize) << f
        })
    };
    let mut best = vec![(u32::MAX, 0u64); 1 << m];
    for e in 0u64..1 << n {
        let s = syn(e);
        if e.count_ones() < best[s].0 {
            best[s] = (e.count_ones(), e);
        }
    }
    let rounds = c.distance;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let mut data = 0u64;
        let mut prev = 0usize;
        let mut delta = Vec::new();
        for _ in 0..rounds {
            for q in 0..n {
                if rng.random_bool(p) {
                    data ^= 1 << q;
                }
            }
            let mut s = syn(data);
            for f in 0..m {
                if rng.random_bool(p) {
                    s ^= 1 << f;
                }
            }
            delta.push(s ^ prev);
            prev = s;
        }
        // cost[r] = best total weight with r the syndrome error of the current round.
        let mut cost: Vec<u32> = (0..1 << m)
            .map(|r: usize| best[delta[0] ^ r].0 + r.count_ones())
            .collect();
        let mut back = vec![vec![0usize; 1 << m]; rounds];
        for t in 1..rounds {
            let mut next = vec![u32::MAX; 1 << m];
            for r in 0..1 << m {
                for q in 0..1 << m {
                    let w = cost[q] + best[delta[t] ^ r ^ q].0 + (r as u32).count_ones();
                    if w < next[r] {
                        next[r] = w;
                        back[t][r] = q;
                    }
                }
            }
            cost = next;
        }
        let mut r = (0..1 << m).min_by_key(|&r| cost[r]).unwrap();
        let mut fix = 0u64;
        for t in (0..rounds).rev() {
            let q = if t == 0 { 0 } else { back[t][r] };
            fix ^= best[delta[t] ^ r ^ q].1;
            r = q;
        }
        let mut residual = data ^ fix;
        residual ^= best[syn(residual)].1;
        if residual.count_ones() % 2 == 1 {
            failures += 1;
        }
    }
    failures as f64 / trials as f64
}

#[test]
fn phenomenological_sampling_matches_oracle() {
    let (p, trials) = (0.03, 4000);
    let c = code(3);
    let oracle = phenomenological_oracle(&c, p, trials, 12);
    let est =
        estimate_phenomenological(&c, &PhenomTrial::new(&c, 3).unwrap(), p, trials, 12).unwrap();
    let var = |x: f64| x * (1.0 - x) / trials as f64;
    let z = (est.p_fail - oracle) / (var(oracle) + var(est.p_fail)).sqrt();
    assert!(
        z.abs() < 5.0,
        "library {} oracle {oracle} (z = {z:.2})",
        est.p_fail
    );
}

type Corner = (i64, i64, u8);
type Graph = HashMap<Corner, Vec<Corner>>;

/// Polygon classes of the 4.8.8 tiling per translation, counted on an open
/// patch. Cell `(i, j)` carries corners E, N, W, S joined in a square; E
/// meets the W corner of the cell to its right and N the S corner above.
fn polygon_classes_488(length: usize) -> u64 {
    let r = length as i64;
    let mut adj: Graph = HashMap::new();
    let mut link = |a: Corner, b: Corner| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for i in -r..=r {
        for j in -r..=r {
            for k in 0..4u8 {
                link((i, j, k), (i, j, (k + 1) % 4));
            }
            link((i, j, 0), (i + 1, j, 2));
            link((i, j, 1), (i, j + 1, 3));
        }
    }
    fn walk(
        adj: &Graph,
        start: Corner,
        at: Corner,
        left: usize,
        seen: &mut HashSet<Corner>,
    ) -> u64 {
        let mut total = 0;
        for &nb in &adj[&at] {
            if nb == start && left == 1 {
                total += 1;
            } else if left > 1 && !seen.contains(&nb) {
                seen.insert(nb);
                total += walk(adj, start, nb, left - 1, seen);
                seen.remove(&nb);
            }
        }
        total
    }
    let closed: u64 = (0..4u8)
        .map(|k| {
            let start = (0, 0, k);
            walk(&adj, start, start, length, &mut HashSet::from([start]))
        })
        .sum();
    closed / (2 * length as u64)
}

#[test]
fn polygon_counts_match_open_patch_oracle() {
    let counts = count_saps(SapLattice::Square488, 12).unwrap().counts;
    for l in (4..=12).step_by(2) {
        assert_eq!(counts[l], polygon_classes_488(l), "length {l}");
    }
}
