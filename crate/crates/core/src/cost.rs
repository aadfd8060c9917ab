//! Cost model: per-task error and runtime, link costs, and the weighted
//! objective used to rank candidate placements.
//!
//! Every raw component is divided by a per-decision upper bound
//! ([`NormalizationBounds`]) so that the scalarized total lives in `[0, 1]`
//! and the stopping thresholds of the search are meaningful as absolute
//! numbers.

use crate::error::CostError;
use crate::model::{NetworkParams, QpuNode, ResourceNetwork, TaskSpec, WeightConfig, Workflow};

/// Floor applied to every normalization bound.
pub const BOUND_FLOOR: f64 = 1e-12;

/// Probability that executing `task` on `node` produces a wrong outcome.
pub fn error_cost(task: &TaskSpec, node: &QpuNode) -> f64 {
    let one = (1.0 - node.one_qubit_error).powf(f64::from(task.depth));
    let two = (1.0 - node.two_qubit_error).powf(f64::from(task.two_qubit_gates).sqrt());
    let readout = (1.0 - node.readout_error).powf(f64::from(task.qubits));
    (1.0 - one * two * readout).clamp(0.0, 1.0)
}

pub fn fidelity(task: &TaskSpec, node: &QpuNode) -> f64 {
    1.0 - error_cost(task, node)
}

/// Seconds needed to run every shot of `task` on `node`.
pub fn runtime_cost(task: &TaskSpec, node: &QpuNode) -> f64 {
    f64::from(task.depth) * f64::from(task.shots) / node.d1cps
}

pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Quantum-link share of one endpoint of a dependency edge.
pub fn quantum_link_cost(task: &TaskSpec, node: &QpuNode, params: &NetworkParams) -> f64 {
    let efficiency = params.linear_efficiency().powi(params.switch_count as i32);
    params.success_probability * 10.0 * f64::from(task.qubits) * node.two_qubit_runtime
        / (harmonic_mean(node.t1, node.t2) * efficiency)
}

/// Classical-link share of one endpoint of a dependency edge.
pub fn classical_link_cost(task: &TaskSpec, params: &NetworkParams) -> f64 {
    params.classical_latency * f64::from(task.measured_qubits)
}

/// Cost of one dependency edge `(j, j')` placed on nodes `(k, k')`.
pub fn edge_cost(
    task_a: &TaskSpec,
    node_a: &QpuNode,
    task_b: &TaskSpec,
    node_b: &QpuNode,
    params: &NetworkParams,
) -> f64 {
    let quantum =
        (quantum_link_cost(task_a, node_a, params) + quantum_link_cost(task_b, node_b, params)) / 2.0;
    let classical = (classical_link_cost(task_a, params) + classical_link_cost(task_b, params)) / 2.0;
    quantum + classical
}

/// Communication cost of a placed workflow; every dependency edge must sit on a link.
pub fn workflow_network_cost(
    workflow: &Workflow,
    assignment: &[usize],
    network: &ResourceNetwork,
    params: &NetworkParams,
) -> Result<f64, CostError> {
    let mut total = 0.0;
    for &(a, b) in &workflow.edges {
        let (ka, kb) = (assignment[a], assignment[b]);
        if !network.has_link(ka, kb) {
            return Err(CostError::MissingLink(a, b, ka, kb));
        }
        total += edge_cost(
            &workflow.tasks[a],
            &network.nodes[ka],
            &workflow.tasks[b],
            &network.nodes[kb],
            params,
        );
    }
    Ok(total)
}

/// One cost component before and after normalization.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Component {
    pub raw: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CostBreakdown {
    /// Worst remaining queue time (seconds) over the chosen nodes.
    pub availability: Component,
    pub error: Component,
    pub runtime: Component,
    pub network: Component,
    pub total: f64,
}

/// Upper bounds used to scale each raw component into `[0, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NormalizationBounds {
    pub max_nat: f64,
    pub max_task_error_sum: f64,
    pub max_task_runtime_sum: f64,
    pub max_network_sum: f64,
}

/// Bounds for one allocation decision, computed from the whole network.
///
/// Error and runtime bounds are `|tasks|` times the worst qubit-feasible
/// (task, node) pair. The network bound is `|edges|` times the worst edge term
/// over every (dependency edge, ordered linked node pair) combination that
/// satisfies the qubit constraint.
pub fn compute_bounds(
    workflow: &Workflow,
    network: &ResourceNetwork,
    params: &NetworkParams,
    sim_time: f64,
) -> NormalizationBounds {
    let max_nat = network
        .nodes
        .iter()
        .map(|n| (n.next_available_time - sim_time).max(0.0))
        .fold(0.0, f64::max);

    let mut worst_error: f64 = 0.0;
    let mut worst_runtime: f64 = 0.0;
    for task in &workflow.tasks {
        for node in network.nodes.iter().filter(|n| task.qubits <= n.qubits) {
            worst_error = worst_error.max(error_cost(task, node));
            worst_runtime = worst_runtime.max(runtime_cost(task, node));
        }
    }

    let mut worst_edge: f64 = 0.0;
    for &(a, b) in &workflow.edges {
        let (ta, tb) = (&workflow.tasks[a], &workflow.tasks[b]);
        for (k, kk) in network.links() {
            for (ka, kb) in [(k, kk), (kk, k)] {
                let (na, nb) = (&network.nodes[ka], &network.nodes[kb]);
                if ta.qubits <= na.qubits && tb.qubits <= nb.qubits {
                    worst_edge = worst_edge.max(edge_cost(ta, na, tb, nb, params));
                }
            }
        }
    }

    let n_tasks = workflow.tasks.len() as f64;
    let n_edges = workflow.edges.len() as f64;
    NormalizationBounds {
        max_nat: max_nat.max(BOUND_FLOOR),
        max_task_error_sum: (n_tasks * worst_error).max(BOUND_FLOOR),
        max_task_runtime_sum: (n_tasks * worst_runtime).max(BOUND_FLOOR),
        max_network_sum: (n_edges * worst_edge).max(BOUND_FLOOR),
    }
}

fn component(raw: f64, bound: f64) -> Component {
    Component {
        raw,
        normalized: (raw / bound).clamp(0.0, 1.0),
    }
}

fn scalarize(
    weights: &WeightConfig,
    availability: Component,
    error: Component,
    runtime: Component,
    network: Component,
) -> CostBreakdown {
    let total = weights.zeta * availability.normalized
        + (1.0 - weights.zeta)
            * (weights.alpha * error.normalized
                + weights.beta * runtime.normalized
                + weights.gamma * network.normalized);
    CostBreakdown {
        availability,
        error,
        runtime,
        network,
        total,
    }
}

/// Weighted objective of placing task `j` on `candidate_nodes[j]`.
///
/// Link existence is not checked here; edges are costed on whatever node pair
/// they land on.
pub fn aggregate_cost(
    workflow: &Workflow,
    candidate_nodes: &[usize],
    network: &ResourceNetwork,
    weights: &WeightConfig,
    params: &NetworkParams,
    bounds: &NormalizationBounds,
    sim_time: f64,
) -> CostBreakdown {
    debug_assert_eq!(candidate_nodes.len(), workflow.tasks.len());
    let nodes = &network.nodes;
    let availability = candidate_nodes
        .iter()
        .map(|&k| (nodes[k].next_available_time - sim_time).max(0.0))
        .fold(0.0, f64::max);
    let mut error = 0.0;
    let mut runtime = 0.0;
    for (task, &k) in workflow.tasks.iter().zip(candidate_nodes) {
        error += error_cost(task, &nodes[k]);
        runtime += runtime_cost(task, &nodes[k]);
    }
    let mut net = 0.0;
    for &(a, b) in &workflow.edges {
        net += edge_cost(
            &workflow.tasks[a],
            &nodes[candidate_nodes[a]],
            &workflow.tasks[b],
            &nodes[candidate_nodes[b]],
            params,
        );
    }
    scalarize(
        weights,
        component(availability, bounds.max_nat),
        component(error, bounds.max_task_error_sum),
        component(runtime, bounds.max_task_runtime_sum),
        component(net, bounds.max_network_sum),
    )
}

/// Per-decision lookup tables so that scoring many candidates of the same
/// workflow does not recompute transcendental terms.
///
/// Produces the same sums, in the same order, as [`aggregate_cost`].
#[derive(Debug, Clone)]
pub struct CostModel<'a> {
    workflow: &'a Workflow,
    weights: WeightConfig,
    bounds: NormalizationBounds,
    nodes: usize,
    availability: Vec<f64>,
    error: Vec<f64>,
    runtime: Vec<f64>,
    quantum: Vec<f64>,
    classical: Vec<f64>,
}

impl<'a> CostModel<'a> {
    pub fn new(
        workflow: &'a Workflow,
        network: &ResourceNetwork,
        weights: &WeightConfig,
        params: &NetworkParams,
        sim_time: f64,
    ) -> Self {
        let mut model = Self::with_bounds(
            workflow,
            network,
            weights,
            params,
            NormalizationBounds::default(),
            sim_time,
        );
        model.bounds = model.table_bounds(network);
        model
    }

    /// Same values as [`compute_bounds`], read from the precomputed tables.
    fn table_bounds(&self, network: &ResourceNetwork) -> NormalizationBounds {
        let n = self.nodes;
        let tasks = &self.workflow.tasks;
        let fits = |j: usize, k: usize| tasks[j].qubits <= network.nodes[k].qubits;
        let mut worst_error: f64 = 0.0;
        let mut worst_runtime: f64 = 0.0;
        for j in 0..tasks.len() {
            for k in (0..n).filter(|&k| fits(j, k)) {
                worst_error = worst_error.max(self.error[j * n + k]);
                worst_runtime = worst_runtime.max(self.runtime[j * n + k]);
            }
        }
        let mut worst_edge: f64 = 0.0;
        for &(a, b) in &self.workflow.edges {
            let classical = (self.classical[a] + self.classical[b]) / 2.0;
            for (k, kk) in network.links() {
                for (ka, kb) in [(k, kk), (kk, k)] {
                    if fits(a, ka) && fits(b, kb) {
                        let quantum = (self.quantum[a * n + ka] + self.quantum[b * n + kb]) / 2.0;
                        worst_edge = worst_edge.max(quantum + classical);
                    }
                }
            }
        }
        let max_nat = self.availability.iter().copied().fold(0.0, f64::max);
        let n_tasks = tasks.len() as f64;
        let n_edges = self.workflow.edges.len() as f64;
        NormalizationBounds {
            max_nat: max_nat.max(BOUND_FLOOR),
            max_task_error_sum: (n_tasks * worst_error).max(BOUND_FLOOR),
            max_task_runtime_sum: (n_tasks * worst_runtime).max(BOUND_FLOOR),
            max_network_sum: (n_edges * worst_edge).max(BOUND_FLOOR),
        }
    }

    pub fn with_bounds(
        workflow: &'a Workflow,
        network: &ResourceNetwork,
        weights: &WeightConfig,
        params: &NetworkParams,
        bounds: NormalizationBounds,
        sim_time: f64,
    ) -> Self {
        let n = network.len();
        let cap = workflow.tasks.len() * n;
        let mut error = Vec::with_capacity(cap);
        let mut runtime = Vec::with_capacity(cap);
        let mut quantum = Vec::with_capacity(cap);
        for task in &workflow.tasks {
            for node in &network.nodes {
                error.push(error_cost(task, node));
                runtime.push(runtime_cost(task, node));
                quantum.push(quantum_link_cost(task, node, params));
            }
        }
        CostModel {
            workflow,
            weights: *weights,
            bounds,
            nodes: n,
            availability: network
                .nodes
                .iter()
                .map(|n| (n.next_available_time - sim_time).max(0.0))
                .collect(),
            error,
            runtime,
            quantum,
            classical: workflow
                .tasks
                .iter()
                .map(|t| classical_link_cost(t, params))
                .collect(),
        }
    }

    pub fn bounds(&self) -> &NormalizationBounds {
        &self.bounds
    }

    pub fn evaluate(&self, assignment: &[usize]) -> CostBreakdown {
        let n = self.nodes;
        let availability = assignment
            .iter()
            .map(|&k| self.availability[k])
            .fold(0.0, f64::max);
        let mut error = 0.0;
        let mut runtime = 0.0;
        for (j, &k) in assignment.iter().enumerate() {
            error += self.error[j * n + k];
            runtime += self.runtime[j * n + k];
        }
        let mut net = 0.0;
        for &(a, b) in &self.workflow.edges {
            let (ka, kb) = (assignment[a], assignment[b]);
            let quantum = (self.quantum[a * n + ka] + self.quantum[b * n + kb]) / 2.0;
            let classical = (self.classical[a] + self.classical[b]) / 2.0;
            net += quantum + classical;
        }
        scalarize(
            &self.weights,
            component(availability, self.bounds.max_nat),
            component(error, self.bounds.max_task_error_sum),
            component(runtime, self.bounds.max_task_runtime_sum),
            component(net, self.bounds.max_network_sum),
        )
    }
}
