//! Device calibration profiles.
//!
//! The bundled file carries the three IBM machines used throughout the
//! experiments. Other snapshots can be loaded from a TOML file of the same
//! shape (`[[machine]]` tables).

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::WorkloadError;
use crate::model::QpuNode;

/// Environment variable consulted for an alternative calibration file.
pub const PROFILES_ENV: &str = "QFLOW_PROFILES";

const BUNDLED: &str = include_str!("../data/profiles.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationProfile {
    pub name: String,
    pub qubits: u32,
    pub d1cps: f64,
    pub one_qubit_runtime: f64,
    pub two_qubit_runtime: f64,
    pub readout_runtime: f64,
    pub t1: f64,
    pub t2: f64,
    pub readout_error: f64,
    pub one_qubit_error: f64,
    pub two_qubit_error: f64,
}

#[derive(Deserialize)]
struct ProfileFile {
    machine: Vec<CalibrationProfile>,
}

impl CalibrationProfile {
    pub fn bundled() -> Vec<CalibrationProfile> {
        parse(BUNDLED).expect("bundled calibration file is well-formed")
    }

    pub fn load(path: &Path) -> Result<Vec<CalibrationProfile>, WorkloadError> {
        let text = std::fs::read_to_string(path).map_err(|source| WorkloadError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let profiles = parse(&text)?;
        for p in &profiles {
            p.instantiate(p.name.clone()).validate()?;
        }
        Ok(profiles)
    }

    /// A fresh idle node carrying this calibration.
    pub fn instantiate(&self, id: String) -> QpuNode {
        QpuNode {
            id,
            profile: self.name.clone(),
            qubits: self.qubits,
            readout_error: self.readout_error,
            one_qubit_error: self.one_qubit_error,
            two_qubit_error: self.two_qubit_error,
            one_qubit_runtime: self.one_qubit_runtime,
            two_qubit_runtime: self.two_qubit_runtime,
            readout_runtime: self.readout_runtime,
            t1: self.t1,
            t2: self.t2,
            d1cps: self.d1cps,
            next_available_time: 0.0,
            queue: VecDeque::new(),
            coupling: None,
            gate_set: None,
        }
    }
}

fn parse(text: &str) -> Result<Vec<CalibrationProfile>, WorkloadError> {
    Ok(toml::from_str::<ProfileFile>(text)?.machine)
}

/// Picks the named subset of `profiles`, in the order given.
pub fn select(
    profiles: &[CalibrationProfile],
    names: &[String],
) -> Result<Vec<CalibrationProfile>, WorkloadError> {
    if names.is_empty() {
        return Err(WorkloadError::EmptyProfilePool);
    }
    names
        .iter()
        .map(|n| {
            profiles
                .iter()
                .find(|p| &p.name == n)
                .cloned()
                .ok_or_else(|| WorkloadError::UnknownProfile(n.clone()))
        })
        .collect()
}
