//! Allocation strategies mapping one workflow onto the network.

mod exhaustive;
mod greedy_dfs;
mod random_aware;
mod soft_iso;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use exhaustive::{exhaustive_oracle, MAX_ORACLE_NODES, MAX_ORACLE_TASKS};
pub use greedy_dfs::{dfs_order, greedy_dfs};
pub use random_aware::{random_aware, RandomAwareConfig};
pub use soft_iso::{soft_iso, SoftIsoConfig};

use crate::error::{AllocError, ConfigError};
use crate::model::{Allocation, NetworkParams, ResourceNetwork, WeightConfig, Workflow};

/// Everything an allocator needs to place one workflow at one decision instant.
#[derive(Debug, Clone, Copy)]
pub struct AllocationRequest<'a> {
    pub workflow: &'a Workflow,
    pub network: &'a ResourceNetwork,
    pub weights: &'a WeightConfig,
    pub params: &'a NetworkParams,
    pub sim_time: f64,
    /// Seed for randomized strategies.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationOutcome {
    /// `None` when no feasible placement was found.
    pub allocation: Option<Allocation>,
    /// Candidate placements whose cost was evaluated.
    pub candidates_examined: u64,
    pub decision_time: Duration,
}

impl AllocationOutcome {
    pub fn is_success(&self) -> bool {
        self.allocation.is_some()
    }

    pub(crate) fn timed(start: Instant, allocation: Option<Allocation>, examined: u64) -> Self {
        AllocationOutcome {
            allocation,
            candidates_examined: examined,
            decision_time: start.elapsed(),
        }
    }
}

/// Strategy selector with its tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    SoftIso(SoftIsoConfig),
    RandomAware(RandomAwareConfig),
    GreedyDfs,
    ExhaustiveOracle,
}

impl Algorithm {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            Algorithm::SoftIso(_) => AlgorithmKind::SoftIso,
            Algorithm::RandomAware(_) => AlgorithmKind::RandomAware,
            Algorithm::GreedyDfs => AlgorithmKind::GreedyDfs,
            Algorithm::ExhaustiveOracle => AlgorithmKind::ExhaustiveOracle,
        }
    }

    pub fn allocate(&self, request: &AllocationRequest<'_>) -> Result<AllocationOutcome, AllocError> {
        Ok(match self {
            Algorithm::SoftIso(cfg) => soft_iso(request, cfg),
            Algorithm::RandomAware(cfg) => random_aware(request, cfg),
            Algorithm::GreedyDfs => greedy_dfs(request),
            Algorithm::ExhaustiveOracle => exhaustive_oracle(request)?,
        })
    }
}

/// Strategy name without parameters, as used in configs and output tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    SoftIso,
    RandomAware,
    GreedyDfs,
    ExhaustiveOracle,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 4] = [
        AlgorithmKind::SoftIso,
        AlgorithmKind::RandomAware,
        AlgorithmKind::GreedyDfs,
        AlgorithmKind::ExhaustiveOracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmKind::SoftIso => "soft_iso",
            AlgorithmKind::RandomAware => "random_aware",
            AlgorithmKind::GreedyDfs => "greedy_dfs",
            AlgorithmKind::ExhaustiveOracle => "exhaustive_oracle",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.as_str() == key || k.as_str().replace('_', "") == key)
            .ok_or_else(|| ConfigError::UnknownAlgorithm(s.to_string()))
    }
}

/// Tasks sorted by ascending qubit demand; ties keep workflow order.
pub(crate) fn tasks_by_qubits(workflow: &Workflow) -> Vec<usize> {
    let mut order: Vec<usize> = (0..workflow.tasks.len()).collect();
    order.sort_by_key(|&j| workflow.tasks[j].qubits);
    order
}
