use std::time::Instant;

use super::{AllocationOutcome, AllocationRequest};
use crate::cost::CostModel;
use crate::error::AllocError;
use crate::model::{validate_assignment, Allocation};

pub const MAX_ORACLE_TASKS: usize = 5;
pub const MAX_ORACLE_NODES: usize = 8;

/// Exact minimizer over every injective placement, for testing.
///
/// Tuples are visited in lexicographic order and only a strictly cheaper one
/// replaces the incumbent, so ties resolve to the smallest node-index tuple.
pub fn exhaustive_oracle(request: &AllocationRequest<'_>) -> Result<AllocationOutcome, AllocError> {
    let start = Instant::now();
    let wf = request.workflow;
    let net = request.network;
    let (tasks, nodes) = (wf.tasks.len(), net.len());
    if tasks > MAX_ORACLE_TASKS || nodes > MAX_ORACLE_NODES {
        return Err(AllocError::InstanceTooLarge {
            tasks,
            nodes,
            max_tasks: MAX_ORACLE_TASKS,
            max_nodes: MAX_ORACLE_NODES,
        });
    }
    let model = CostModel::new(wf, net, request.weights, request.params, request.sim_time);
    let mut best: Option<Allocation> = None;
    let mut examined = 0;
    let mut tuple = Vec::with_capacity(tasks);
    let mut used = vec![false; nodes];
    let mut visit = |tuple: &[usize]| {
        if !validate_assignment(wf, net, tuple).unwrap_or(false) {
            return;
        }
        examined += 1;
        let cost = model.evaluate(tuple);
        if best.as_ref().is_none_or(|b| cost.total < b.cost.total) {
            best = Some(Allocation {
                workflow_id: wf.id,
                assignment: tuple.to_vec(),
                cost,
            });
        }
    };
    injective_tuples(tasks, &mut used, &mut tuple, &mut visit);
    Ok(AllocationOutcome::timed(start, best, examined))
}

fn injective_tuples(
    len: usize,
    used: &mut [bool],
    tuple: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if tuple.len() == len {
        visit(tuple);
        return;
    }
    for k in 0..used.len() {
        if !used[k] {
            used[k] = true;
            tuple.push(k);
            injective_tuples(len, used, tuple, visit);
            tuple.pop();
            used[k] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{chain, network};
    use crate::model::{NetworkParams, ResourceNetwork, WeightConfig, Workflow};

    fn run(wf: &Workflow, net: &ResourceNetwork) -> Result<AllocationOutcome, AllocError> {
        let (w, p) = (WeightConfig::default(), NetworkParams::default());
        exhaustive_oracle(&AllocationRequest {
            workflow: wf,
            network: net,
            weights: &w,
            params: &p,
            sim_time: 0.0,
            seed: 0,
        })
    }

    #[test]
    fn guard_rejects_large_instances() {
        let links: Vec<_> = (0..8).map(|k| (k, k + 1)).collect();
        let net = network(&["torino"; 9], &links);
        assert!(matches!(
            run(&chain(&[5]), &net),
            Err(AllocError::InstanceTooLarge { nodes: 9, .. })
        ));
    }

    #[test]
    fn single_feasible_assignment_is_returned() {
        let net = network(&["brisbane", "marrakesh"], &[(0, 1)]);
        let out = run(&chain(&[150, 130]), &net).unwrap();
        // Both tasks exceed brisbane's 127 qubits.
        assert!(out.allocation.is_none());
        let out = run(&chain(&[150, 100]), &net).unwrap();
        assert_eq!(out.allocation.unwrap().assignment, vec![1, 0]);
        assert_eq!(out.candidates_examined, 1);
    }

    #[test]
    fn symmetric_network_breaks_ties_lexicographically() {
        let links: Vec<_> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
        let net = network(&["torino"; 4], &links);
        let out = run(&chain(&[5, 5, 5]), &net).unwrap();
        assert_eq!(out.allocation.unwrap().assignment, vec![0, 1, 2]);
        assert_eq!(out.candidates_examined, 24);
    }
}
