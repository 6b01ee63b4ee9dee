//! Threshold extraction, analytic bounds and gate-threshold tables.

pub mod fit;
pub mod gates;
pub mod sap;
pub mod saw;

pub use fit::{
    fit_threshold, interpolated_crossing, log_ratio_crossing, regression_crossing, FitForm,
    FitOptions, FitPoint, FitResult,
};
pub use gates::{gate_thresholds, phase_cubic, phase_root, GateThresholds};
pub use sap::{count_saps, SapCounts, SapLattice};
pub use saw::{saw_bound, SawModel, SawParams, DELTA_MAX_PRISM, MU_488};
