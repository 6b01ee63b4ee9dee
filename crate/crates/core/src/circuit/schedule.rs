//! Syndrome-extraction timetables.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::lattice::{ColorCode, Shape};

/// Steps for one face shape, indexed by vertex slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeTemplate {
    pub x_prep: usize,
    pub x_measure: usize,
    pub z_prep: usize,
    pub z_measure: usize,
    pub x_slots: Vec<usize>,
    pub z_slots: Vec<usize>,
}

/// A code-independent schedule: one timetable per face shape. Truncated
/// boundary faces skip their missing slots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleTemplate {
    pub name: String,
    pub total_steps: usize,
    /// One ancilla per face serves both checks, one after the other.
    pub shared_ancilla: bool,
    pub octagon: ShapeTemplate,
    pub square: ShapeTemplate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceSchedule {
    pub face: usize,
    pub x_prep: usize,
    pub x_measure: usize,
    pub z_prep: usize,
    pub z_measure: usize,
    /// `[qubit_id, step]` for each CNOT with the X-check ancilla.
    pub x_steps: Vec<[usize; 2]>,
    pub z_steps: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub name: String,
    pub total_steps: usize,
    #[serde(default)]
    pub shared_ancilla: bool,
    pub faces: Vec<FaceSchedule>,
}

const INTERLEAVED: &str = include_str!("../../data/interleaved.json");
const NONINTERLEAVED: &str = include_str!("../../data/noninterleaved.json");
const CLOCKWISE: &str = include_str!("../../data/clockwise.json");

fn parse_template(text: &str) -> ScheduleTemplate {
    serde_json::from_str(text).expect("bundled schedule template is valid JSON")
}

/// The bundled (noninterleaved, interleaved) templates.
pub fn default_templates() -> (ScheduleTemplate, ScheduleTemplate) {
    (parse_template(NONINTERLEAVED), parse_template(INTERLEAVED))
}

/// Each face visited counter-clockwise; collision-free but it breaks the
/// stabilizer group, so validation rejects it.
pub fn clockwise_template() -> ScheduleTemplate {
    parse_template(CLOCKWISE)
}

pub fn template_by_name(name: &str) -> Result<ScheduleTemplate> {
    match name {
        "interleaved" => Ok(parse_template(INTERLEAVED)),
        "noninterleaved" => Ok(parse_template(NONINTERLEAVED)),
        "clockwise" => Ok(parse_template(CLOCKWISE)),
        other => invalid(format!(
            "unknown schedule '{other}' (expected interleaved or noninterleaved)"
        )),
    }
}

impl ScheduleTemplate {
    pub fn instantiate(&self, code: &ColorCode) -> Result<Schedule> {
        let mut faces = Vec::with_capacity(code.m());
        for face in &code.faces {
            let t = match face.shape {
                Shape::Octagon => &self.octagon,
                Shape::Square => &self.square,
            };
            let width = face.shape.slots().len();
            if t.x_slots.len() != width || t.z_slots.len() != width {
                return invalid(format!(
                    "template '{}' needs {width} steps per {:?} ancilla",
                    self.name, face.shape
                ));
            }
            let pick = |steps: &[usize]| -> Vec<[usize; 2]> {
                face.qubit_ids
                    .iter()
                    .zip(&face.slots)
                    .map(|(&q, &s)| [q, steps[s]])
                    .collect()
            };
            faces.push(FaceSchedule {
                face: face.id,
                x_prep: t.x_prep,
                x_measure: t.x_measure,
                z_prep: t.z_prep,
                z_measure: t.z_measure,
                x_steps: pick(&t.x_slots),
                z_steps: pick(&t.z_slots),
            });
        }
        Ok(Schedule {
            name: self.name.clone(),
            total_steps: self.total_steps,
            shared_ancilla: self.shared_ancilla,
            faces,
        })
    }
}

/// `(noninterleaved, interleaved)` laid out on `code`.
pub fn default_schedules(code: &ColorCode) -> Result<(Schedule, Schedule)> {
    let (a, b) = default_templates();
    Ok((a.instantiate(code)?, b.instantiate(code)?))
}

impl Schedule {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("schedule JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("schedule serializes");
        Sha256::digest(compact.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Rejects references to faces or qubits outside `code`.
    pub fn check_references(&self, code: &ColorCode) -> Result<()> {
        if self.faces.len() != code.m() {
            return invalid(format!(
                "schedule lists {} faces, code has {}",
                self.faces.len(),
                code.m()
            ));
        }
        for (i, fs) in self.faces.iter().enumerate() {
            if fs.face != i {
                return invalid(format!("face entry {i} is labelled {}", fs.face));
            }
            for &[q, _] in fs.x_steps.iter().chain(&fs.z_steps) {
                if q >= code.n() {
                    return invalid(format!("face {i} references qubit {q}, n = {}", code.n()));
                }
            }
        }
        Ok(())
    }
}
