//! Pauli-frame simulation of extraction rounds.
//!
//! The frame holds the X and Z parts of the accumulated error on every data
//! qubit and ancilla as `u128` masks. A CNOT copies X from control to target
//! and Z from target to control.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Basis, CheckType, Circuit, Gate, Schedule};
use crate::error::{invalid, Error, Result};
use crate::lattice::{ColorCode, ErrorPattern, Shape};
use crate::noise::{
    sample_bp, sample_two_qubit_pauli, DpVariant, NoiseModel, NoiseParams, Pauli, RngStream,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    AfterPrep,
    AfterCnot,
    BeforeMeasure,
    ResultFlip,
}

/// One injected fault. `gate` indexes the compiled round; for a CNOT
/// `paulis` acts on (control, target), otherwise only the first entry is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultRecord {
    pub round: usize,
    pub gate: usize,
    pub kind: FaultKind,
    pub paulis: [Pauli; 2],
}

pub trait FaultSource {
    fn one_qubit(&mut self, round: usize, gate: usize, kind: FaultKind) -> Pauli;
    fn two_qubit(&mut self, round: usize, gate: usize) -> (Pauli, Pauli);
    fn result_flip(&mut self, round: usize, gate: usize) -> bool;
}

/// Circuit-level noise: BP after preparations and before measurements, DP
/// after CNOTs, and a flipped result with probability `p`.
pub struct NoisyFaults<'r> {
    pub p: f64,
    pub variant: DpVariant,
    pub rng: &'r mut RngStream,
}

impl FaultSource for NoisyFaults<'_> {
    fn one_qubit(&mut self, _: usize, _: usize, _: FaultKind) -> Pauli {
        sample_bp(self.p, self.rng)
    }

    fn two_qubit(&mut self, _: usize, _: usize) -> (Pauli, Pauli) {
        sample_two_qubit_pauli(self.p, self.rng, self.variant)
    }

    fn result_flip(&mut self, _: usize, _: usize) -> bool {
        self.rng.bernoulli(self.p)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InjectedFaults {
    pub records: Vec<FaultRecord>,
}

impl InjectedFaults {
    pub fn new(records: Vec<FaultRecord>) -> Self {
        InjectedFaults { records }
    }

    /// Rejects records that point at a missing gate or the wrong gate kind.
    pub fn check(&self, circuit: &Circuit) -> Result<()> {
        for r in &self.records {
            let Some(g) = circuit.gates.get(r.gate) else {
                return invalid(format!(
                    "fault at gate {} of {}",
                    r.gate,
                    circuit.gates.len()
                ));
            };
            let ok = matches!(
                (r.kind, g.gate),
                (FaultKind::AfterPrep, Gate::Prep { .. })
                    | (FaultKind::AfterCnot, Gate::Cnot { .. })
                    | (
                        FaultKind::BeforeMeasure | FaultKind::ResultFlip,
                        Gate::Measure { .. }
                    )
            );
            if !ok {
                return invalid(format!(
                    "{:?} does not fit gate {} ({:?})",
                    r.kind, r.gate, g.gate
                ));
            }
        }
        Ok(())
    }

    fn find(
        &self,
        round: usize,
        gate: usize,
        kind: FaultKind,
    ) -> impl Iterator<Item = &FaultRecord> {
        self.records
            .iter()
            .filter(move |r| r.round == round && r.gate == gate && r.kind == kind)
    }
}

fn compose(a: Pauli, b: Pauli) -> Pauli {
    Pauli::from_bits(a.has_x() ^ b.has_x(), a.has_z() ^ b.has_z())
}

impl FaultSource for InjectedFaults {
    fn one_qubit(&mut self, round: usize, gate: usize, kind: FaultKind) -> Pauli {
        self.find(round, gate, kind)
            .fold(Pauli::I, |acc, r| compose(acc, r.paulis[0]))
    }

    fn two_qubit(&mut self, round: usize, gate: usize) -> (Pauli, Pauli) {
        self.find(round, gate, FaultKind::AfterCnot)
            .fold((Pauli::I, Pauli::I), |(a, b), r| {
                (compose(a, r.paulis[0]), compose(b, r.paulis[1]))
            })
    }

    fn result_flip(&mut self, round: usize, gate: usize) -> bool {
        self.find(round, gate, FaultKind::ResultFlip).count() % 2 == 1
    }
}

/// X and Z parts of the error on every qubit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Frame {
    pub x: u128,
    pub z: u128,
}

impl Frame {
    #[inline]
    fn apply(&mut self, q: usize, p: Pauli) {
        if p.has_x() {
            self.x ^= 1 << q;
        }
        if p.has_z() {
            self.z ^= 1 << q;
        }
    }
}

/// A compiled round ready for repeated simulation.
#[derive(Clone, Debug)]
pub struct Extractor {
    pub circuit: Circuit,
    data_mask: u128,
}

impl Extractor {
    pub fn new(code: &ColorCode, schedule: &Schedule) -> Result<Self> {
        let circuit = Circuit::compile(code, schedule, false)?;
        if circuit.n_qubits > 128 || circuit.m > 64 {
            return Err(Error::Guard(format!(
                "{} qubits and {} checks exceed the 128/64-bit frame",
                circuit.n_qubits, circuit.m
            )));
        }
        let data_mask = if code.n() == 128 {
            u128::MAX
        } else {
            (1u128 << code.n()) - 1
        };
        Ok(Extractor { circuit, data_mask })
    }

    /// Runs one round, returning the packed (X-check, Z-check) outcomes.
    pub fn round<F: FaultSource>(
        &self,
        frame: &mut Frame,
        faults: &mut F,
        round: usize,
    ) -> (u64, u64) {
        let (mut xs, mut zs) = (0u64, 0u64);
        for (i, g) in self.circuit.gates.iter().enumerate() {
            match g.gate {
                Gate::Prep { qubit, .. } => {
                    frame.x &= !(1 << qubit);
                    frame.z &= !(1 << qubit);
                    frame.apply(qubit, faults.one_qubit(round, i, FaultKind::AfterPrep));
                }
                Gate::Cnot { control, target } => {
                    if (frame.x >> control) & 1 == 1 {
                        frame.x ^= 1 << target;
                    }
                    if (frame.z >> target) & 1 == 1 {
                        frame.z ^= 1 << control;
                    }
                    let (a, b) = faults.two_qubit(round, i);
                    frame.apply(control, a);
                    frame.apply(target, b);
                }
                Gate::Measure { qubit, basis, face } => {
                    frame.apply(qubit, faults.one_qubit(round, i, FaultKind::BeforeMeasure));
                    let flipped = match basis {
                        Basis::X => (frame.z >> qubit) & 1 == 1,
                        Basis::Z => (frame.x >> qubit) & 1 == 1,
                    } ^ faults.result_flip(round, i);
                    let bit = (flipped as u64) << face;
                    match basis {
                        Basis::X => xs |= bit,
                        Basis::Z => zs |= bit,
                    }
                }
            }
        }
        (xs, zs)
    }

    pub fn data_mask(&self) -> u128 {
        self.data_mask
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionOutcome {
    /// X-check results; they flag Z errors.
    pub measured_x_syndrome: Vec<bool>,
    /// Z-check results; they flag X errors.
    pub measured_z_syndrome: Vec<bool>,
    pub residual_x: ErrorPattern,
    pub residual_z: ErrorPattern,
}

/// Raw measured syndromes of one check type, one row per round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeHistory {
    pub check_type: CheckType,
    pub rounds: Vec<Vec<bool>>,
}

fn unpack(bits: u64, m: usize) -> Vec<bool> {
    (0..m).map(|i| (bits >> i) & 1 == 1).collect()
}

fn input_frame(code: &ColorCode, input: (&ErrorPattern, &ErrorPattern)) -> Result<Frame> {
    if input.0.len() != code.n() || input.1.len() != code.n() {
        return invalid(format!("input errors must have length n = {}", code.n()));
    }
    Ok(Frame {
        x: input.0.to_mask(),
        z: input.1.to_mask(),
    })
}

fn require_circuit_model(params: &NoiseParams) -> Result<()> {
    if params.model != NoiseModel::CircuitLevel {
        return invalid(format!(
            "circuit simulation needs the circuit-level model, got {:?}",
            params.model
        ));
    }
    Ok(())
}

/// Runs `rounds` rounds from `frame` with an arbitrary fault source.
pub fn run_rounds<F: FaultSource>(
    extractor: &Extractor,
    frame: &mut Frame,
    faults: &mut F,
    rounds: usize,
) -> (Vec<u64>, Vec<u64>) {
    (0..rounds)
        .map(|t| extractor.round(frame, faults, t))
        .unzip()
}

fn outcome(
    code: &ColorCode,
    extractor: &Extractor,
    frame: Frame,
    xs: u64,
    zs: u64,
) -> ExtractionOutcome {
    ExtractionOutcome {
        measured_x_syndrome: unpack(xs, code.m()),
        measured_z_syndrome: unpack(zs, code.m()),
        residual_x: ErrorPattern::from_mask(code.n(), frame.x & extractor.data_mask),
        residual_z: ErrorPattern::from_mask(code.n(), frame.z & extractor.data_mask),
    }
}

/// One noisy round starting from the given (X, Z) data errors.
pub fn simulate_round(
    code: &ColorCode,
    schedule: &Schedule,
    params: &NoiseParams,
    rng: &mut RngStream,
    input: (&ErrorPattern, &ErrorPattern),
) -> Result<ExtractionOutcome> {
    require_circuit_model(params)?;
    let ex = Extractor::new(code, schedule)?;
    let mut frame = input_frame(code, input)?;
    let mut faults = NoisyFaults {
        p: params.p,
        variant: params.dp_variant,
        rng,
    };
    let (xs, zs) = ex.round(&mut frame, &mut faults, 0);
    Ok(outcome(code, &ex, frame, xs, zs))
}

/// One round with explicitly injected faults and no other noise.
pub fn simulate_round_with_faults(
    code: &ColorCode,
    schedule: &Schedule,
    faults: &InjectedFaults,
    input: (&ErrorPattern, &ErrorPattern),
) -> Result<ExtractionOutcome> {
    let ex = Extractor::new(code, schedule)?;
    faults.check(&ex.circuit)?;
    let mut frame = input_frame(code, input)?;
    let (xs, zs) = ex.round(&mut frame, &mut faults.clone(), 0);
    Ok(outcome(code, &ex, frame, xs, zs))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignHistory {
    pub x_checks: SyndromeHistory,
    pub z_checks: SyndromeHistory,
    pub residual_x: ErrorPattern,
    pub residual_z: ErrorPattern,
}

fn history(
    code: &ColorCode,
    ex: &Extractor,
    frame: Frame,
    xs: Vec<u64>,
    zs: Vec<u64>,
) -> CampaignHistory {
    let m = code.m();
    CampaignHistory {
        x_checks: SyndromeHistory {
            check_type: CheckType::X,
            rounds: xs.into_iter().map(|s| unpack(s, m)).collect(),
        },
        z_checks: SyndromeHistory {
            check_type: CheckType::Z,
            rounds: zs.into_iter().map(|s| unpack(s, m)).collect(),
        },
        residual_x: ErrorPattern::from_mask(code.n(), frame.x & ex.data_mask),
        residual_z: ErrorPattern::from_mask(code.n(), frame.z & ex.data_mask),
    }
}

/// Chains `rounds` noisy rounds, recording every raw syndrome.
pub fn simulate_campaign_history(
    code: &ColorCode,
    schedule: &Schedule,
    params: &NoiseParams,
    rng: &mut RngStream,
    rounds: usize,
    input: (&ErrorPattern, &ErrorPattern),
) -> Result<CampaignHistory> {
    require_circuit_model(params)?;
    if rounds < 1 {
        return invalid("need at least one round");
    }
    let ex = Extractor::new(code, schedule)?;
    let mut frame = input_frame(code, input)?;
    let mut faults = NoisyFaults {
        p: params.p,
        variant: params.dp_variant,
        rng,
    };
    let (xs, zs) = run_rounds(&ex, &mut frame, &mut faults, rounds);
    Ok(history(code, &ex, frame, xs, zs))
}

/// Like [`simulate_campaign_history`] with injected faults only.
pub fn history_with_faults(
    code: &ColorCode,
    schedule: &Schedule,
    faults: &InjectedFaults,
    rounds: usize,
    input: (&ErrorPattern, &ErrorPattern),
) -> Result<CampaignHistory> {
    if rounds < 1 {
        return invalid("need at least one round");
    }
    let ex = Extractor::new(code, schedule)?;
    faults.check(&ex.circuit)?;
    let mut frame = input_frame(code, input)?;
    let (xs, zs) = run_rounds(&ex, &mut frame, &mut faults.clone(), rounds);
    Ok(history(code, &ex, frame, xs, zs))
}

/// Every single fault the noise model can produce in one round.
pub fn single_faults(circuit: &Circuit) -> Vec<FaultRecord> {
    let nontrivial = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut out = Vec::new();
    for (i, g) in circuit.gates.iter().enumerate() {
        let record = |kind, paulis| FaultRecord {
            round: 0,
            gate: i,
            kind,
            paulis,
        };
        match g.gate {
            Gate::Prep { .. } => {
                out.extend(nontrivial.map(|p| record(FaultKind::AfterPrep, [p, Pauli::I])));
            }
            Gate::Cnot { .. } => {
                for a in Pauli::ALL {
                    for b in Pauli::ALL {
                        if (a, b) != (Pauli::I, Pauli::I) {
                            out.push(record(FaultKind::AfterCnot, [a, b]));
                        }
                    }
                }
            }
            Gate::Measure { .. } => {
                out.extend(nontrivial.map(|p| record(FaultKind::BeforeMeasure, [p, Pauli::I])));
                out.push(record(FaultKind::ResultFlip, [Pauli::I, Pauli::I]));
            }
        }
    }
    out
}

/// Smallest weight in the coset `e + <stabilizers>`.
pub struct CosetWeight {
    rows: Vec<u128>,
    cache: HashMap<u128, u32>,
}

impl CosetWeight {
    pub const MAX_CHECKS: usize = 20;

    pub fn new(code: &ColorCode) -> Result<Self> {
        if code.m() > Self::MAX_CHECKS {
            return Err(Error::Guard(format!(
                "coset search over 2^{} stabilizers; limit is m <= {}",
                code.m(),
                Self::MAX_CHECKS
            )));
        }
        Ok(CosetWeight {
            rows: code.row_masks()?,
            cache: HashMap::new(),
        })
    }

    pub fn weight(&mut self, e: u128) -> u32 {
        if let Some(&w) = self.cache.get(&e) {
            return w;
        }
        let mut g = e;
        let mut best = e.count_ones();
        for i in 1u64..(1 << self.rows.len()) {
            g ^= self.rows[i.trailing_zeros() as usize];
            best = best.min(g.count_ones());
        }
        self.cache.insert(e, best);
        best
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HookReport {
    pub schedule: String,
    pub faults_examined: usize,
    /// Largest reduced data-error weight (X or Z part) over all single faults.
    pub max_weight: u32,
    pub max_weight_square_ancilla: u32,
    pub max_weight_octagon_ancilla: u32,
    /// Count of faults per reduced weight.
    pub histogram: Vec<usize>,
    pub worst: Option<FaultRecord>,
}

/// Injects every single fault into a fault-free round and measures the
/// resulting data error modulo stabilizers.
pub fn enumerate_hooks(code: &ColorCode, schedule: &Schedule) -> Result<HookReport> {
    let ex = Extractor::new(code, schedule)?;
    let mut coset = CosetWeight::new(code)?;
    let n = code.n();
    let faults = single_faults(&ex.circuit);
    let mut report = HookReport {
        schedule: schedule.name.clone(),
        faults_examined: faults.len(),
        max_weight: 0,
        max_weight_square_ancilla: 0,
        max_weight_octagon_ancilla: 0,
        histogram: Vec::new(),
        worst: None,
    };
    for record in faults {
        let mut src = InjectedFaults::new(vec![record]);
        let mut frame = Frame::default();
        ex.round(&mut frame, &mut src, 0);
        let w = coset
            .weight(frame.x & ex.data_mask)
            .max(coset.weight(frame.z & ex.data_mask));
        if report.histogram.len() <= w as usize {
            report.histogram.resize(w as usize + 1, 0);
        }
        report.histogram[w as usize] += 1;
        if w > report.max_weight {
            report.max_weight = w;
            report.worst = Some(record);
        }
        let ancilla = ex.circuit.gates[record.gate]
            .gate
            .qubits()
            .into_iter()
            .find(|&q| q >= n)
            .expect("every gate touches an ancilla");
        let face = if schedule.shared_ancilla {
            ancilla - n
        } else {
            (ancilla - n) / 2
        };
        let slot = match code.faces[face].shape {
            Shape::Square => &mut report.max_weight_square_ancilla,
            Shape::Octagon => &mut report.max_weight_octagon_ancilla,
        };
        *slot = (*slot).max(w);
    }
    Ok(report)
}
