//! The two schedule constraints: no qubit in two gates at once, and the
//! fault-free round maps the input stabilizer group onto the intended one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Circuit, Gate, Schedule};
use crate::error::Result;
use crate::gf2::{BitVec, RowSpace};
use crate::lattice::ColorCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub step: usize,
    /// Physical qubit; ancillas are numbered after the `n` data qubits.
    pub qubit: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    /// Malformed timetables: wrong qubit sets, CNOTs outside an ancilla's
    /// lifetime, overlapping lifetimes of a shared ancilla.
    pub structural: Vec<String>,
    pub constraint1: Vec<Collision>,
    /// Input stabilizer generators whose image leaves the target group.
    pub constraint2: Vec<String>,
}

fn structural_problems(code: &ColorCode, schedule: &Schedule) -> Vec<String> {
    let mut out = Vec::new();
    for (fs, face) in schedule.faces.iter().zip(&code.faces) {
        let mut want = face.qubit_ids.clone();
        want.sort_unstable();
        for (label, steps, prep, meas) in [
            ("X", &fs.x_steps, fs.x_prep, fs.x_measure),
            ("Z", &fs.z_steps, fs.z_prep, fs.z_measure),
        ] {
            let mut got: Vec<usize> = steps.iter().map(|s| s[0]).collect();
            got.sort_unstable();
            if got != want {
                out.push(format!(
                    "face {}: {label} list does not cover the face once",
                    fs.face
                ));
            }
            if prep >= meas {
                out.push(format!(
                    "face {}: {label} ancilla measured before it is prepared",
                    fs.face
                ));
            }
            for &[q, t] in steps {
                if t <= prep || t >= meas {
                    out.push(format!(
                        "face {}: {label} CNOT on qubit {q} at step {t} outside ({prep}, {meas})",
                        fs.face
                    ));
                }
            }
        }
        if schedule.shared_ancilla && !(fs.x_measure < fs.z_prep || fs.z_measure < fs.x_prep) {
            out.push(format!(
                "face {}: shared ancilla lifetimes overlap",
                fs.face
            ));
        }
    }
    out
}

fn collisions(circuit: &Circuit) -> Vec<Collision> {
    let mut uses: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for g in &circuit.gates {
        for q in g.gate.qubits() {
            *uses.entry((g.step, q)).or_default() += 1;
        }
    }
    uses.into_iter()
        .filter(|&(_, k)| k > 1)
        .map(|((step, qubit), _)| Collision { step, qubit })
        .collect()
}

/// A Pauli operator as `x | z` over `len` qubits.
fn pauli(len: usize, xs: &[usize], zs: &[usize]) -> BitVec {
    let mut v = BitVec::zeros(2 * len);
    for &q in xs {
        v.flip(q);
    }
    for &q in zs {
        v.flip(len + q);
    }
    v
}

fn conjugate(circuit: &Circuit, mut v: BitVec) -> BitVec {
    let len = circuit.n_qubits;
    for g in &circuit.gates {
        if let Gate::Cnot { control, target } = g.gate {
            if v.get(control) {
                v.flip(target);
            }
            if v.get(len + target) {
                v.flip(len + control);
            }
        }
    }
    v
}

fn stabilizer_images(code: &ColorCode, circuit: &Circuit) -> Vec<String> {
    let len = circuit.n_qubits;
    let n = code.n();
    let ax = |f: usize| n + 2 * f;
    let az = |f: usize| n + 2 * f + 1;
    let mut target = RowSpace::new(2 * len);
    for (f, row) in code.check_matrix.iter().enumerate() {
        target.insert(&pauli(len, row, &[]));
        target.insert(&pauli(len, &[], row));
        let mut xa = row.clone();
        xa.push(ax(f));
        let mut za = row.clone();
        za.push(az(f));
        target.insert(&pauli(len, &xa, &[]));
        target.insert(&pauli(len, &[], &za));
    }
    let mut bad = Vec::new();
    for (f, row) in code.check_matrix.iter().enumerate() {
        let inputs = [
            (format!("X stabilizer of face {f}"), pauli(len, row, &[])),
            (format!("Z stabilizer of face {f}"), pauli(len, &[], row)),
            (
                format!("X-check ancilla of face {f}"),
                pauli(len, &[ax(f)], &[]),
            ),
            (
                format!("Z-check ancilla of face {f}"),
                pauli(len, &[], &[az(f)]),
            ),
        ];
        for (name, v) in inputs {
            if !target.contains(&conjugate(circuit, v)) {
                bad.push(name);
            }
        }
    }
    bad
}

/// Checks `schedule` against `code`. Dangling references are an error; every
/// other problem is listed in the report.
pub fn validate_schedule(code: &ColorCode, schedule: &Schedule) -> Result<ValidationReport> {
    schedule.check_references(code)?;
    let structural = structural_problems(code, schedule);
    let physical = Circuit::compile(code, schedule, false)?;
    let constraint1 = collisions(&physical);
    // Separate ancilla per check: a shared ancilla is reset between its two
    // uses, so each lifetime carries its own input stabilizer.
    let split = Circuit::compile(code, schedule, true)?;
    let constraint2 = if structural.is_empty() {
        stabilizer_images(code, &split)
    } else {
        Vec::new()
    };
    Ok(ValidationReport {
        valid: structural.is_empty() && constraint1.is_empty() && constraint2.is_empty(),
        structural,
        constraint1,
        constraint2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{clockwise_template, default_schedules};
    use crate::lattice::build_code;

    #[test]
    fn defaults_are_valid() {
        for d in [3, 5, 7] {
            let code = build_code(d).unwrap();
            let (non, inter) = default_schedules(&code).unwrap();
            for s in [non, inter] {
                let r = validate_schedule(&code, &s).unwrap();
                assert!(r.valid, "d={d} {}: {r:?}", s.name);
            }
        }
    }

    #[test]
    fn double_booking_is_reported() {
        let code = build_code(3).unwrap();
        let (_, mut inter) = default_schedules(&code).unwrap();
        // Put one X interaction on the step where the same data qubit meets
        // the face's Z ancilla.
        let q = inter.faces[0].x_steps[0][0];
        let busy = inter.faces[0].z_steps.iter().find(|s| s[0] == q).unwrap()[1];
        inter.faces[0].x_steps[0][1] = busy;
        let r = validate_schedule(&code, &inter).unwrap();
        assert!(!r.valid);
        assert!(r.constraint1.contains(&Collision {
            step: busy,
            qubit: q
        }));
    }

    #[test]
    fn clockwise_breaks_the_stabilizer_group() {
        let code = build_code(5).unwrap();
        let s = clockwise_template().instantiate(&code).unwrap();
        let r = validate_schedule(&code, &s).unwrap();
        assert!(r.constraint1.is_empty() && r.structural.is_empty());
        assert!(!r.constraint2.is_empty());
    }
}
