//! Allocation of distributed quantum workflows onto networks of noisy QPUs.
//!
//! A workflow is a small DAG of circuit tasks. Each task must land on its own
//! QPU, dependent tasks must land on linked QPUs, and among the placements
//! that satisfy both rules the allocators look for the one with the lowest
//! weighted cost over queue availability, execution error, runtime and
//! hybrid quantum/classical communication.
//!
//! The crate is organized bottom-up:
//!
//! * [`model`] and [`profiles`]: tasks, workflows, devices and networks.
//! * [`cost`]: the cost terms and their normalization.
//! * [`matcher`]: lazy subgraph-monomorphism enumeration.
//! * [`alloc`]: SoftIso, RandomAware, GreedyDfs and an exhaustive oracle.
//! * [`workload`]: seeded generators for tasks, workloads and topologies.
//! * [`sim`]: the discrete-event simulation and its metrics.
//! * [`experiment`]: repetition runner, scenarios, sweeps and CSV output.
//!
//! Repetitions run on a rayon pool when the `parallel` feature is on (the
//! default) and sequentially otherwise; output is identical either way.

pub mod alloc;
pub mod cost;
pub mod error;
pub mod experiment;
pub mod matcher;
pub mod model;
pub mod profiles;
pub mod sim;
pub mod workload;

pub use alloc::{Algorithm, AlgorithmKind, AllocationOutcome, AllocationRequest};
pub use error::{AllocError, ConfigError, CostError, ExperimentError, ModelError, WorkloadError};
pub use model::{
    validate_allocation, Allocation, NetworkParams, ProgramFamily, QpuNode, ResourceNetwork,
    TaskSpec, WeightConfig, Workflow, WorkflowId,
};
