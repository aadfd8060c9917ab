use std::time::Instant;

use super::{tasks_by_qubits, AllocationOutcome, AllocationRequest};
use crate::cost::CostModel;
use crate::model::{validate_assignment, Allocation, ResourceNetwork};

/// Depth-first visiting order of the network.
///
/// Starts from the node with the fewest qubits and always descends into the
/// unvisited neighbor with the fewest qubits (ties by index). When a component
/// is exhausted the walk restarts from the smallest unvisited node.
pub fn dfs_order(network: &ResourceNetwork) -> Vec<usize> {
    DfsWalk::new(network).collect()
}

/// Lazy form of [`dfs_order`]; neighbor lists are sorted only when reached.
struct DfsWalk<'a> {
    network: &'a ResourceNetwork,
    seen: Vec<bool>,
    stack: Vec<usize>,
}

impl<'a> DfsWalk<'a> {
    fn new(network: &'a ResourceNetwork) -> Self {
        DfsWalk {
            network,
            seen: vec![false; network.len()],
            stack: Vec::new(),
        }
    }

    fn key(&self, k: usize) -> (u32, usize) {
        (self.network.nodes[k].qubits, k)
    }
}

impl Iterator for DfsWalk<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            let v = match self.stack.pop() {
                Some(v) => v,
                None => (0..self.seen.len())
                    .filter(|&k| !self.seen[k])
                    .min_by_key(|&k| self.key(k))?,
            };
            if self.seen[v] {
                continue;
            }
            self.seen[v] = true;
            let base = self.stack.len();
            let seen = &self.seen;
            self.stack
                .extend(self.network.neighbors(v).iter().copied().filter(|&w| !seen[w]));
            // Largest first, so the smallest neighbor is popped next.
            let network = self.network;
            self.stack[base..]
                .sort_unstable_by_key(|&w| std::cmp::Reverse((network.nodes[w].qubits, w)));
            return Some(v);
        }
    }
}

/// Baseline placement that ignores cost: tasks by ascending qubit demand go to
/// the next node in DFS order that is large enough.
pub fn greedy_dfs(request: &AllocationRequest<'_>) -> AllocationOutcome {
    let start = Instant::now();
    let wf = request.workflow;
    let net = request.network;
    let mut walk = DfsWalk::new(net);
    let mut assignment = vec![usize::MAX; wf.tasks.len()];
    let mut placed = true;
    for j in tasks_by_qubits(wf) {
        let need = wf.tasks[j].qubits;
        match walk.by_ref().find(|&k| net.nodes[k].qubits >= need) {
            Some(k) => assignment[j] = k,
            None => {
                placed = false;
                break;
            }
        }
    }
    let allocation = (placed && validate_assignment(wf, net, &assignment).unwrap_or(false)).then(|| {
        // Recorded for reporting only; it plays no part in the choice.
        let cost = CostModel::new(wf, net, request.weights, request.params, request.sim_time)
            .evaluate(&assignment);
        Allocation {
            workflow_id: wf.id,
            assignment,
            cost,
        }
    });
    AllocationOutcome::timed(start, allocation, 0)
}
