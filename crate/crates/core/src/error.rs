use std::path::PathBuf;

use thiserror::Error;

use crate::model::WorkflowId;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("task {id}: invalid {field}: {reason}")]
    InvalidTask {
        id: String,
        field: &'static str,
        reason: String,
    },
    #[error("workflow {id}: {reason}")]
    InvalidWorkflow { id: WorkflowId, reason: String },
    #[error("node {id}: invalid {field}: {reason}")]
    InvalidNode {
        id: String,
        field: &'static str,
        reason: String,
    },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("malformed allocation: {0}")]
    Structure(String),
    #[error("unknown program family `{0}`")]
    UnknownFamily(String),
}

#[derive(Debug, Error)]
pub enum CostError {
    #[error("workflow edge ({0},{1}) is placed on nodes ({2},{3}) which are not linked")]
    MissingLink(usize, usize, usize, usize),
}

#[derive(Debug, Error)]
pub enum AllocError {
    #[error("exhaustive search limited to {max_tasks} tasks and {max_nodes} nodes, got {tasks} tasks and {nodes} nodes")]
    InstanceTooLarge {
        tasks: usize,
        nodes: usize,
        max_tasks: usize,
        max_nodes: usize,
    },
}

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: {source}")]
    Invalid {
        path: PathBuf,
        line: u64,
        source: ModelError,
    },
    #[error("no catalog task has qubits within [{lo}, {hi}]")]
    EmptyCatalog { lo: u32, hi: u32 },
    #[error("profile pool is empty")]
    EmptyProfilePool,
    #[error("unknown calibration profile `{0}`")]
    UnknownProfile(String),
    #[error("invalid workload spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("workload document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("calibration file: {0}")]
    Toml(#[from] toml::de::Error),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field}: {reason}")]
    Field { field: String, reason: String },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown scenario `{0}` (expected SP-LR, SP-MR, LP-LR or LP-MR)")]
    UnknownScenario(String),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("bad sweep `{0}`: expected KEY=v1,v2,... with KEY in batch, nodes, tasks_per_group, rho_q")]
    BadSweep(String),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
}

impl ConfigError {
    pub fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Field {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("summary output: {0}")]
    Json(#[from] serde_json::Error),
}
