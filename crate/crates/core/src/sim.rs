//! Discrete-event simulation of the allocation pipeline.
//!
//! Each distinct arrival time is a decision instant. At an instant every
//! arrived, unplaced workflow is handed to the allocator in FCFS order (ties:
//! fewer total qubits first, then priority, then id). Placed tasks join the
//! FIFO queue of their QPU; a workflow the allocator cannot place is retried
//! at later instants and dropped after `retries` further attempts.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::alloc::{Algorithm, AllocationRequest};
use crate::cost::{edge_cost, fidelity, runtime_cost, workflow_network_cost};
use crate::error::AllocError;
use crate::model::{
    validate_allocation, Allocation, NetworkParams, ResourceNetwork, TaskRef, WeightConfig,
    Workflow, WorkflowId,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Extra decision instants granted to a workflow after a failed attempt.
    pub retries: u32,
    /// Hold a task until its predecessors finish and their output crosses the link.
    pub dependency_gating: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            retries: 3,
            dependency_gating: true,
        }
    }
}

/// Running totals for the six evaluation metrics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MetricsAccumulator {
    /// Makespan: last finish minus first arrival.
    pub execution_time: f64,
    /// Sum over executed tasks of start minus workflow arrival.
    pub wait_time: f64,
    pub fidelity_sum: f64,
    pub task_count: u64,
    pub communication_overhead: f64,
    /// Seconds spent inside the allocator.
    pub decision_time: f64,
    pub tasks_allocated: u64,
    pub tasks_total: u64,
    pub allocator_calls: u64,
    pub candidates_examined: u64,
}

impl MetricsAccumulator {
    pub fn average_fidelity(&self) -> f64 {
        if self.task_count == 0 {
            0.0
        } else {
            self.fidelity_sum / self.task_count as f64
        }
    }

    pub fn completion_pct(&self) -> f64 {
        if self.tasks_total == 0 {
            0.0
        } else {
            100.0 * self.tasks_allocated as f64 / self.tasks_total as f64
        }
    }
}

/// Execution record of one placed task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskRecord {
    pub workflow: WorkflowId,
    pub task: usize,
    pub node: usize,
    /// Decision instant at which the task was enqueued.
    pub enqueued: f64,
    pub start: f64,
    pub finish: f64,
    pub wait: f64,
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub clock: f64,
    pub pending: Vec<WorkflowId>,
    pub network: ResourceNetwork,
    pub completed: Vec<WorkflowId>,
    pub failed: Vec<WorkflowId>,
    pub metrics: MetricsAccumulator,
    /// Every placed task in enqueue order.
    pub timeline: Vec<TaskRecord>,
    /// Busy seconds per node.
    pub busy: Vec<f64>,
    queued_finish: Vec<VecDeque<f64>>,
}

impl SimState {
    fn new(network: ResourceNetwork) -> Self {
        let n = network.len();
        SimState {
            clock: 0.0,
            pending: Vec::new(),
            network,
            completed: Vec::new(),
            failed: Vec::new(),
            metrics: MetricsAccumulator::default(),
            timeline: Vec::new(),
            busy: vec![0.0; n],
            queued_finish: vec![VecDeque::new(); n],
        }
    }

    /// Percentage of total busy time spent on each node.
    pub fn qpu_time_distribution(&self) -> Vec<f64> {
        let total: f64 = self.busy.iter().sum();
        if total <= 0.0 {
            return vec![0.0; self.busy.len()];
        }
        self.busy.iter().map(|b| 100.0 * b / total).collect()
    }

    /// Drops queue entries that have finished by `now`.
    fn retire(&mut self, now: f64) {
        for (node, finishes) in self.network.nodes.iter_mut().zip(&mut self.queued_finish) {
            while finishes.front().is_some_and(|&f| f <= now) {
                finishes.pop_front();
                node.queue.pop_front();
            }
        }
    }

    fn place(&mut self, wf: &Workflow, allocation: &Allocation, params: &NetworkParams, config: &SimConfig) {
        let now = self.clock;
        let order = wf.topological_order().expect("validated workflow is acyclic");
        let mut finish = vec![0.0; wf.tasks.len()];
        for j in order {
            let k = allocation.assignment[j];
            let task = &wf.tasks[j];
            let mut ready = now.max(self.network.nodes[k].next_available_time);
            if config.dependency_gating {
                for p in wf.predecessors(j) {
                    let kp = allocation.assignment[p];
                    let latency = edge_cost(
                        &wf.tasks[p],
                        &self.network.nodes[kp],
                        task,
                        &self.network.nodes[k],
                        params,
                    );
                    ready = ready.max(finish[p] + latency);
                }
            }
            let node = &mut self.network.nodes[k];
            let duration = runtime_cost(task, node);
            let start = ready;
            let end = start + duration;
            finish[j] = end;
            node.next_available_time = end;
            node.queue.push_back(TaskRef {
                workflow: wf.id,
                task: j,
            });
            self.queued_finish[k].push_back(end);
            self.busy[k] += duration;

            let wait = start - wf.arrival_time;
            self.metrics.wait_time += wait;
            self.metrics.fidelity_sum += fidelity(task, node);
            self.metrics.task_count += 1;
            self.metrics.tasks_allocated += 1;
            self.timeline.push(TaskRecord {
                workflow: wf.id,
                task: j,
                node: k,
                enqueued: now,
                start,
                finish: end,
                wait,
            });
        }
        self.metrics.communication_overhead +=
            workflow_network_cost(wf, &allocation.assignment, &self.network, params)
                .expect("allocation respects workflow links");
    }
}

/// Seed for the allocator call on `workflow` at its `attempt`-th try.
fn call_seed(base: u64, workflow: WorkflowId, attempt: u32) -> u64 {
    crate::workload::derive_seed(base, &[workflow.0, u64::from(attempt)])
}

/// Runs the whole workload through `algorithm` on `network`.
///
/// Fails only if the allocator itself rejects the instance (the exhaustive
/// oracle on an oversized network); unplaceable workflows are recorded in
/// [`SimState::failed`].
pub fn run_simulation(
    workload: &[Workflow],
    network: ResourceNetwork,
    algorithm: &Algorithm,
    weights: &WeightConfig,
    params: &NetworkParams,
    config: &SimConfig,
    seed: u64,
) -> Result<SimState, AllocError> {
    let mut state = SimState::new(network);
    if workload.is_empty() {
        return Ok(state);
    }
    state.metrics.tasks_total = workload.iter().map(|w| w.tasks.len() as u64).sum();

    let mut arrivals: Vec<usize> = (0..workload.len()).collect();
    arrivals.sort_by(|&a, &b| {
        workload[a]
            .arrival_time
            .total_cmp(&workload[b].arrival_time)
            .then(workload[a].id.cmp(&workload[b].id))
    });
    let first_arrival = workload[arrivals[0]].arrival_time;
    let mut next_arrival = 0;
    let mut pending: Vec<(usize, u32)> = Vec::new();
    state.clock = first_arrival;

    loop {
        let now = state.clock;
        state.retire(now);
        while next_arrival < arrivals.len() && workload[arrivals[next_arrival]].arrival_time <= now {
            pending.push((arrivals[next_arrival], 0));
            next_arrival += 1;
        }
        pending.sort_by(|&(a, _), &(b, _)| {
            let (wa, wb) = (&workload[a], &workload[b]);
            wa.arrival_time
                .total_cmp(&wb.arrival_time)
                .then(wa.total_qubits().cmp(&wb.total_qubits()))
                .then(wa.priority.cmp(&wb.priority))
                .then(wa.id.cmp(&wb.id))
        });

        let mut retry = Vec::new();
        for (w, attempt) in pending.drain(..) {
            let wf = &workload[w];
            let request = AllocationRequest {
                workflow: wf,
                network: &state.network,
                weights,
                params,
                sim_time: now,
                seed: call_seed(seed, wf.id, attempt),
            };
            let outcome = algorithm.allocate(&request)?;
            state.metrics.decision_time += outcome.decision_time.as_secs_f64();
            state.metrics.allocator_calls += 1;
            state.metrics.candidates_examined += outcome.candidates_examined;
            match outcome.allocation {
                Some(allocation) => {
                    debug_assert!(validate_allocation(wf, &state.network, &allocation).unwrap());
                    state.place(wf, &allocation, params, config);
                    state.completed.push(wf.id);
                }
                None if attempt < config.retries => retry.push((w, attempt + 1)),
                None => state.failed.push(wf.id),
            }
        }
        pending = retry;
        state.pending = pending.iter().map(|&(w, _)| workload[w].id).collect();

        let next = if next_arrival < arrivals.len() {
            workload[arrivals[next_arrival]].arrival_time
        } else if !pending.is_empty() {
            // Nothing new arrives; wait for the next QPU to drain, if any.
            state
                .network
                .nodes
                .iter()
                .map(|n| n.next_available_time)
                .filter(|&t| t > now)
                .min_by(f64::total_cmp)
                .unwrap_or(now)
        } else {
            break;
        };
        state.clock = next.max(now);
    }

    let last_finish = state.timeline.iter().map(|r| r.finish).fold(f64::NEG_INFINITY, f64::max);
    state.metrics.execution_time = if state.timeline.is_empty() {
        0.0
    } else {
        last_finish - first_arrival
    };
    Ok(state)
}
