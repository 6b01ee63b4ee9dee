//! Syndrome-extraction circuits: schedules, validation and Pauli-frame
//! simulation under circuit-level noise.

pub mod schedule;
pub mod simulate;
pub mod validate;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::ColorCode;

pub use schedule::{
    clockwise_template, default_schedules, default_templates, template_by_name, FaceSchedule,
    Schedule, ScheduleTemplate, ShapeTemplate,
};
pub use simulate::{
    enumerate_hooks, simulate_campaign_history, simulate_round, ExtractionOutcome, FaultKind,
    FaultRecord, FaultSource, HookReport, InjectedFaults, NoisyFaults, SyndromeHistory,
};
pub use validate::{validate_schedule, Collision, ValidationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    X,
    Z,
}

/// Which stabilizer type a check measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckType {
    X,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    Prep {
        qubit: usize,
        basis: Basis,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Measure {
        qubit: usize,
        basis: Basis,
        face: usize,
    },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Prep { qubit, .. } | Gate::Measure { qubit, .. } => vec![qubit],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedGate {
    pub step: usize,
    pub gate: Gate,
}

/// A flat gate list for one extraction round. Data qubits are `0..n`;
/// ancillas follow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub n_data: usize,
    pub n_qubits: usize,
    pub m: usize,
    pub gates: Vec<TimedGate>,
}

impl Circuit {
    /// Compiles `schedule` on `code`. With `split_ancillas` every check gets
    /// its own ancilla even when the schedule shares one per face.
    pub fn compile(code: &ColorCode, schedule: &Schedule, split_ancillas: bool) -> Result<Circuit> {
        schedule.check_references(code)?;
        let n = code.n();
        let shared = schedule.shared_ancilla && !split_ancillas;
        let ancilla = |f: usize, t: CheckType| match (shared, t) {
            (true, _) => n + f,
            (false, CheckType::X) => n + 2 * f,
            (false, CheckType::Z) => n + 2 * f + 1,
        };
        let mut gates = Vec::new();
        for fs in &schedule.faces {
            let (f, ax, az) = (
                fs.face,
                ancilla(fs.face, CheckType::X),
                ancilla(fs.face, CheckType::Z),
            );
            for (step, gate) in [
                (
                    fs.x_prep,
                    Gate::Prep {
                        qubit: ax,
                        basis: Basis::X,
                    },
                ),
                (
                    fs.x_measure,
                    Gate::Measure {
                        qubit: ax,
                        basis: Basis::X,
                        face: f,
                    },
                ),
                (
                    fs.z_prep,
                    Gate::Prep {
                        qubit: az,
                        basis: Basis::Z,
                    },
                ),
                (
                    fs.z_measure,
                    Gate::Measure {
                        qubit: az,
                        basis: Basis::Z,
                        face: f,
                    },
                ),
            ] {
                gates.push(TimedGate { step, gate });
            }
            for &[q, step] in &fs.x_steps {
                gates.push(TimedGate {
                    step,
                    gate: Gate::Cnot {
                        control: ax,
                        target: q,
                    },
                });
            }
            for &[q, step] in &fs.z_steps {
                gates.push(TimedGate {
                    step,
                    gate: Gate::Cnot {
                        control: q,
                        target: az,
                    },
                });
            }
        }
        for g in &gates {
            if g.step == 0 || g.step > schedule.total_steps {
                return invalid(format!(
                    "step {} outside 1..={}",
                    g.step, schedule.total_steps
                ));
            }
        }
        // Preps first and measurements last within a step keep the order
        // well defined even for colliding schedules.
        let rank = |g: &Gate| match g {
            Gate::Prep { .. } => 0,
            Gate::Cnot { .. } => 1,
            Gate::Measure { .. } => 2,
        };
        gates.sort_by_key(|g| (g.step, rank(&g.gate)));
        let n_qubits = n + if shared { code.m() } else { 2 * code.m() };
        Ok(Circuit {
            n_data: n,
            n_qubits,
            m: code.m(),
            gates,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_code;

    #[test]
    fn gate_counts() {
        let code = build_code(5).unwrap();
        let (non, inter) = default_schedules(&code).unwrap();
        let edges: usize = code.faces.iter().map(|f| f.weight()).sum();
        for (s, ancillas) in [(&non, code.m()), (&inter, 2 * code.m())] {
            let c = Circuit::compile(&code, s, false).unwrap();
            assert_eq!(c.gates.len(), 2 * edges + 4 * code.m());
            assert_eq!(c.n_qubits, code.n() + ancillas);
            assert!(c.gates.windows(2).all(|w| w[0].step <= w[1].step));
        }
    }
}
