//! Domain records shared by the cost model, the allocators and the simulator.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cost::CostBreakdown;
use crate::error::ModelError;

/// Maximum number of tasks accepted in one workflow request.
pub const DEFAULT_MAX_TASKS: usize = 5;

/// Benchmark family a task was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProgramFamily {
    Ghz,
    Qft,
    GraphState,
    RandomCircuit,
    Grover,
    Dj,
    Qaoa,
    Qnn,
    Vqe,
    Qpe,
    Ae,
    GroundState,
    Shor,
}

impl ProgramFamily {
    pub const ALL: [ProgramFamily; 13] = [
        ProgramFamily::Ghz,
        ProgramFamily::Qft,
        ProgramFamily::GraphState,
        ProgramFamily::RandomCircuit,
        ProgramFamily::Grover,
        ProgramFamily::Dj,
        ProgramFamily::Qaoa,
        ProgramFamily::Qnn,
        ProgramFamily::Vqe,
        ProgramFamily::Qpe,
        ProgramFamily::Ae,
        ProgramFamily::GroundState,
        ProgramFamily::Shor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProgramFamily::Ghz => "ghz",
            ProgramFamily::Qft => "qft",
            ProgramFamily::GraphState => "graphstate",
            ProgramFamily::RandomCircuit => "randomcircuit",
            ProgramFamily::Grover => "grover",
            ProgramFamily::Dj => "dj",
            ProgramFamily::Qaoa => "qaoa",
            ProgramFamily::Qnn => "qnn",
            ProgramFamily::Vqe => "vqe",
            ProgramFamily::Qpe => "qpe",
            ProgramFamily::Ae => "ae",
            ProgramFamily::GroundState => "groundstate",
            ProgramFamily::Shor => "shor",
        }
    }
}

impl fmt::Display for ProgramFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProgramFamily {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        ProgramFamily::ALL
            .into_iter()
            .find(|f| f.as_str() == key)
            .ok_or_else(|| ModelError::UnknownFamily(s.to_string()))
    }
}

/// Metadata of one transpiled quantum circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub family: ProgramFamily,
    pub qubits: u32,
    pub depth: u32,
    pub two_qubit_gates: u32,
    pub measured_qubits: u32,
    pub shots: u32,
}

impl TaskSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        let field = |name: &'static str, reason: &str| ModelError::InvalidTask {
            id: self.id.clone(),
            field: name,
            reason: reason.to_string(),
        };
        if self.qubits == 0 {
            return Err(field("qubits", "must be at least 1"));
        }
        if self.depth == 0 {
            return Err(field("depth", "must be at least 1"));
        }
        if self.shots == 0 {
            return Err(field("shots", "must be at least 1"));
        }
        if self.measured_qubits > self.qubits {
            return Err(field("measured_qubits", "exceeds qubits"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorkflowId(pub u64);

impl fmt::Display for WorkflowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "wf{}", self.0)
    }
}

/// A user request: a DAG of tasks plus its arrival time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workflow {
    pub id: WorkflowId,
    pub tasks: Vec<TaskSpec>,
    /// Directed dependency edges `(from, to)` between task indices.
    pub edges: Vec<(usize, usize)>,
    pub arrival_time: f64,
    #[serde(default)]
    pub priority: i32,
}

impl Workflow {
    /// Builds a workflow and checks every structural invariant.
    pub fn new(
        id: WorkflowId,
        tasks: Vec<TaskSpec>,
        edges: Vec<(usize, usize)>,
        arrival_time: f64,
    ) -> Result<Self, ModelError> {
        let wf = Workflow {
            id,
            tasks,
            edges,
            arrival_time,
            priority: 0,
        };
        wf.validate(DEFAULT_MAX_TASKS)?;
        Ok(wf)
    }

    pub fn validate(&self, max_tasks: usize) -> Result<(), ModelError> {
        let n = self.tasks.len();
        if n == 0 || n > max_tasks {
            return Err(ModelError::InvalidWorkflow {
                id: self.id,
                reason: format!("task count {n} outside [1, {max_tasks}]"),
            });
        }
        for t in &self.tasks {
            t.validate()?;
        }
        if !(self.arrival_time.is_finite() && self.arrival_time >= 0.0) {
            return Err(ModelError::InvalidWorkflow {
                id: self.id,
                reason: "arrival time must be finite and nonnegative".into(),
            });
        }
        for &(a, b) in &self.edges {
            if a >= n || b >= n {
                return Err(ModelError::InvalidWorkflow {
                    id: self.id,
                    reason: format!("edge ({a},{b}) references a missing task"),
                });
            }
            if a == b {
                return Err(ModelError::InvalidWorkflow {
                    id: self.id,
                    reason: format!("self-loop on task {a}"),
                });
            }
        }
        if self.topological_order().is_none() {
            return Err(ModelError::InvalidWorkflow {
                id: self.id,
                reason: "dependency graph has a cycle".into(),
            });
        }
        if !is_connected(n, &self.skeleton()) {
            return Err(ModelError::InvalidWorkflow {
                id: self.id,
                reason: "undirected skeleton is disconnected".into(),
            });
        }
        Ok(())
    }

    /// Undirected, deduplicated edge set with `a < b`.
    pub fn skeleton(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Kahn's algorithm, always releasing the smallest ready index first.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.tasks.len();
        let mut indegree = vec![0usize; n];
        let mut succ = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            if a >= n || b >= n {
                return None;
            }
            indegree[b] += 1;
            succ[a].push(b);
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &j in &succ[i] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.insert(j);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn predecessors(&self, task: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .filter(move |&&(_, b)| b == task)
            .map(|&(a, _)| a)
    }

    pub fn total_qubits(&self) -> u64 {
        self.tasks.iter().map(|t| u64::from(t.qubits)).sum()
    }
}

/// Reference to one task of one workflow sitting in a QPU queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskRef {
    pub workflow: WorkflowId,
    pub task: usize,
}

/// One quantum device with its calibration and live queue state.
#[derive(Debug, Clone, PartialEq)]
pub struct QpuNode {
    pub id: String,
    /// Name of the calibration profile the node was instantiated from.
    pub profile: String,
    pub qubits: u32,
    pub readout_error: f64,
    pub one_qubit_error: f64,
    pub two_qubit_error: f64,
    pub one_qubit_runtime: f64,
    pub two_qubit_runtime: f64,
    pub readout_runtime: f64,
    pub t1: f64,
    pub t2: f64,
    pub d1cps: f64,
    pub next_available_time: f64,
    pub queue: VecDeque<TaskRef>,
    /// Hardware coupling map; carried but unused by the cost model.
    pub coupling: Option<Vec<(u32, u32)>>,
    /// Native gate set; carried but unused by the cost model.
    pub gate_set: Option<Vec<String>>,
}

impl QpuNode {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |field: &'static str, reason: &str| ModelError::InvalidNode {
            id: self.id.clone(),
            field,
            reason: reason.to_string(),
        };
        for (name, p) in [
            ("readout_error", self.readout_error),
            ("one_qubit_error", self.one_qubit_error),
            ("two_qubit_error", self.two_qubit_error),
        ] {
            if !(0.0..1.0).contains(&p) {
                return Err(bad(name, "probability must lie in [0, 1)"));
            }
        }
        for (name, v) in [
            ("one_qubit_runtime", self.one_qubit_runtime),
            ("two_qubit_runtime", self.two_qubit_runtime),
            ("readout_runtime", self.readout_runtime),
            ("t1", self.t1),
            ("t2", self.t2),
            ("d1cps", self.d1cps),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(name, "must be positive"));
            }
        }
        Ok(())
    }
}

/// Undirected graph of QPUs joined by hybrid quantum-classical links.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceNetwork {
    pub nodes: Vec<QpuNode>,
    links: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl ResourceNetwork {
    /// Builds a network; links are normalized so `(a, b)` and `(b, a)` are one link.
    pub fn new(
        nodes: Vec<QpuNode>,
        links: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ModelError> {
        let n = nodes.len();
        if n == 0 {
            return Err(ModelError::InvalidNetwork("network has no nodes".into()));
        }
        for node in &nodes {
            node.validate()?;
        }
        let mut set = BTreeSet::new();
        for (a, b) in links {
            if a >= n || b >= n {
                return Err(ModelError::InvalidNetwork(format!(
                    "link ({a},{b}) references a missing node"
                )));
            }
            if a == b {
                return Err(ModelError::InvalidNetwork(format!("self-loop on node {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let edges: Vec<_> = set.iter().copied().collect();
        if !is_connected(n, &edges) {
            return Err(ModelError::InvalidNetwork("network is disconnected".into()));
        }
        Ok(ResourceNetwork {
            nodes,
            links: set,
            adjacency,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn has_link(&self, a: usize, b: usize) -> bool {
        self.links.contains(&(a.min(b), a.max(b)))
    }

    /// Neighbors of `node`, ascending by index.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().copied()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }
}

/// How the transmission efficiency figure is to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EfficiencyUnit {
    #[default]
    Linear,
    Decibel,
}

/// Parameters of the hybrid quantum-classical interconnect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkParams {
    pub success_probability: f64,
    pub transmission_efficiency: f64,
    pub efficiency_unit: EfficiencyUnit,
    pub switch_count: u32,
    /// Seconds of classical latency per measured qubit.
    pub classical_latency: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams {
            success_probability: 0.5,
            transmission_efficiency: 1.0,
            efficiency_unit: EfficiencyUnit::Linear,
            switch_count: 1,
            classical_latency: 0.02,
        }
    }
}

impl NetworkParams {
    pub fn linear_efficiency(&self) -> f64 {
        match self.efficiency_unit {
            EfficiencyUnit::Linear => self.transmission_efficiency,
            EfficiencyUnit::Decibel => 10f64.powf(self.transmission_efficiency / 10.0),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(0.0..=1.0).contains(&self.success_probability) {
            return Err(ModelError::InvalidParams(
                "success_probability must lie in [0, 1]".into(),
            ));
        }
        if !(self.linear_efficiency().is_finite() && self.linear_efficiency() > 0.0) {
            return Err(ModelError::InvalidParams(
                "transmission_efficiency must be positive".into(),
            ));
        }
        if !(self.classical_latency.is_finite() && self.classical_latency >= 0.0) {
            return Err(ModelError::InvalidParams(
                "classical_latency must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Weights of the scalarized objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightConfig {
    /// Share given to availability; the rest is split by `alpha`, `beta`, `gamma`.
    pub zeta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            zeta: 0.5,
            alpha: 1.0 / 3.0,
            beta: 1.0 / 3.0,
            gamma: 1.0 / 3.0,
        }
    }
}

impl WeightConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(0.0..=1.0).contains(&self.zeta) {
            return Err(ModelError::InvalidParams("zeta must lie in [0, 1]".into()));
        }
        if self.alpha < 0.0 || self.beta < 0.0 || self.gamma < 0.0 {
            return Err(ModelError::InvalidParams(
                "alpha, beta and gamma must be nonnegative".into(),
            ));
        }
        if (self.alpha + self.beta + self.gamma - 1.0).abs() > 1e-12 {
            return Err(ModelError::InvalidParams(
                "alpha + beta + gamma must equal 1".into(),
            ));
        }
        Ok(())
    }
}

/// An injective task-to-node placement of one workflow.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub workflow_id: WorkflowId,
    /// `assignment[task] = node`.
    pub assignment: Vec<usize>,
    pub cost: CostBreakdown,
}

/// Checks injectivity, the link constraint and the qubit constraint.
///
/// Returns `Err` only for structurally malformed input (wrong arity, indices
/// out of range); a well-formed allocation that breaks a constraint is `Ok(false)`.
pub fn validate_allocation(
    workflow: &Workflow,
    network: &ResourceNetwork,
    allocation: &Allocation,
) -> Result<bool, ModelError> {
    validate_assignment(workflow, network, &allocation.assignment)
}

pub fn validate_assignment(
    workflow: &Workflow,
    network: &ResourceNetwork,
    assignment: &[usize],
) -> Result<bool, ModelError> {
    if assignment.len() != workflow.tasks.len() {
        return Err(ModelError::Structure(format!(
            "assignment covers {} tasks, workflow has {}",
            assignment.len(),
            workflow.tasks.len()
        )));
    }
    if let Some(&bad) = assignment.iter().find(|&&k| k >= network.len()) {
        return Err(ModelError::Structure(format!(
            "node index {bad} out of range for {} nodes",
            network.len()
        )));
    }
    for &(a, b) in &workflow.edges {
        if a >= assignment.len() || b >= assignment.len() {
            return Err(ModelError::Structure(format!(
                "workflow edge ({a},{b}) out of range"
            )));
        }
    }
    let distinct: BTreeSet<_> = assignment.iter().collect();
    if distinct.len() != assignment.len() {
        return Ok(false);
    }
    let links_ok = workflow
        .edges
        .iter()
        .all(|&(a, b)| network.has_link(assignment[a], assignment[b]));
    let qubits_ok = workflow
        .tasks
        .iter()
        .zip(assignment)
        .all(|(t, &k)| t.qubits <= network.nodes[k].qubits);
    Ok(links_ok && qubits_ok)
}

pub(crate) fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n <= 1 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::cost::CostBreakdown;

    fn alloc(assignment: Vec<usize>) -> Allocation {
        Allocation {
            workflow_id: WorkflowId(0),
            assignment,
            cost: CostBreakdown::default(),
        }
    }

    #[test]
    fn single_task_on_large_node_is_valid() {
        let wf = chain(&[5]);
        let net = network(&["brisbane"], &[]);
        assert!(validate_allocation(&wf, &net, &alloc(vec![0])).unwrap());
    }

    #[test]
    fn chain_on_non_adjacent_nodes_is_invalid() {
        let wf = chain(&[5, 5]);
        let net = network(&["brisbane", "torino", "marrakesh"], &[(0, 1), (1, 2)]);
        assert!(!validate_allocation(&wf, &net, &alloc(vec![0, 2])).unwrap());
        assert!(validate_allocation(&wf, &net, &alloc(vec![0, 1])).unwrap());
    }

    #[test]
    fn qubit_constraint_rejects_oversized_task() {
        // 150 > 133 on torino.
        let wf = chain(&[5, 150]);
        let net = network(&["brisbane", "torino"], &[(0, 1)]);
        assert!(!validate_allocation(&wf, &net, &alloc(vec![0, 1])).unwrap());
    }

    #[test]
    fn repeated_node_is_not_injective() {
        let wf = chain(&[5, 5]);
        let net = network(&["brisbane", "torino"], &[(0, 1)]);
        assert!(!validate_allocation(&wf, &net, &alloc(vec![1, 1])).unwrap());
    }

    #[test]
    fn out_of_range_is_structural_error() {
        let wf = chain(&[5, 5]);
        let net = network(&["brisbane", "torino"], &[(0, 1)]);
        assert!(matches!(
            validate_allocation(&wf, &net, &alloc(vec![0, 7])),
            Err(ModelError::Structure(_))
        ));
        assert!(matches!(
            validate_allocation(&wf, &net, &alloc(vec![0])),
            Err(ModelError::Structure(_))
        ));
    }

    #[test]
    fn workflow_rejects_cycles_and_disconnection() {
        let tasks = vec![task(5), task(5), task(5)];
        let cyc = Workflow::new(WorkflowId(1), tasks.clone(), vec![(0, 1), (1, 2), (2, 0)], 0.0);
        assert!(cyc.is_err());
        let split = Workflow::new(WorkflowId(1), tasks.clone(), vec![(0, 1)], 0.0);
        assert!(split.is_err());
        let too_many = Workflow::new(
            WorkflowId(1),
            vec![task(5); 6],
            (1..6).map(|i| (0, i)).collect(),
            0.0,
        );
        assert!(too_many.is_err());
        assert!(Workflow::new(WorkflowId(1), tasks, vec![(0, 2), (1, 2)], 0.0).is_ok());
    }

    #[test]
    fn topological_order_is_smallest_first() {
        let wf = Workflow::new(
            WorkflowId(0),
            vec![task(5); 4],
            vec![(2, 0), (2, 1), (0, 3), (1, 3)],
            0.0,
        )
        .unwrap();
        assert_eq!(wf.topological_order().unwrap(), vec![2, 0, 1, 3]);
        assert_eq!(wf.skeleton(), vec![(0, 2), (0, 3), (1, 2), (1, 3)]);
    }

    #[test]
    fn task_invariants() {
        let mut t = task(5);
        t.measured_qubits = 6;
        assert!(matches!(
            t.validate(),
            Err(ModelError::InvalidTask { field: "measured_qubits", .. })
        ));
        let mut t = task(5);
        t.shots = 0;
        assert!(t.validate().is_err());
    }

    #[test]
    fn network_rejects_self_loop_and_disconnection() {
        let nodes = vec![node("brisbane", 0), node("torino", 1)];
        assert!(ResourceNetwork::new(nodes.clone(), [(0, 0)]).is_err());
        assert!(ResourceNetwork::new(nodes.clone(), []).is_err());
        let net = ResourceNetwork::new(nodes, [(1, 0), (0, 1)]).unwrap();
        assert_eq!(net.link_count(), 1);
        assert!(net.has_link(1, 0));
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(WeightConfig::default().validate().is_ok());
        let w = WeightConfig {
            alpha: 0.5,
            ..WeightConfig::default()
        };
        assert!(w.validate().is_err());
    }

    #[test]
    fn family_parses_loosely() {
        assert_eq!("Graph State".parse::<ProgramFamily>().unwrap(), ProgramFamily::GraphState);
        assert_eq!("GHZ".parse::<ProgramFamily>().unwrap(), ProgramFamily::Ghz);
        assert!("toffoli".parse::<ProgramFamily>().is_err());
    }

    #[test]
    fn decibel_efficiency() {
        let p = NetworkParams {
            transmission_efficiency: 10.0,
            efficiency_unit: EfficiencyUnit::Decibel,
            ..NetworkParams::default()
        };
        assert!((p.linear_efficiency() - 10.0).abs() < 1e-12);
    }
}
