use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{tasks_by_qubits, AllocationOutcome, AllocationRequest};
use crate::cost::CostModel;
use crate::model::{validate_assignment, Allocation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomAwareConfig {
    /// Trials per call are `trial_multiplier * |tasks|`.
    pub trial_multiplier: u32,
}

impl Default for RandomAwareConfig {
    fn default() -> Self {
        RandomAwareConfig { trial_multiplier: 1 }
    }
}

/// Randomized placement: each trial walks tasks by ascending qubit demand and
/// draws a distinct node with enough qubits for each; the cheapest trial that
/// also respects the workflow links wins.
pub fn random_aware(request: &AllocationRequest<'_>, config: &RandomAwareConfig) -> AllocationOutcome {
    random_aware_traced(request, config, |_| {})
}

/// Same as [`random_aware`], reporting the incumbent cost after every trial.
pub fn random_aware_traced(
    request: &AllocationRequest<'_>,
    config: &RandomAwareConfig,
    mut on_trial: impl FnMut(Option<f64>),
) -> AllocationOutcome {
    let start = Instant::now();
    let wf = request.workflow;
    let net = request.network;
    let model = CostModel::new(wf, net, request.weights, request.params, request.sim_time);
    let mut rng = ChaCha8Rng::seed_from_u64(request.seed);
    let order = tasks_by_qubits(wf);
    let trials = wf.tasks.len() as u64 * u64::from(config.trial_multiplier);

    let mut min_cost = f64::INFINITY;
    let mut best: Option<Allocation> = None;
    let mut examined = 0;
    let mut used = vec![false; net.len()];
    let mut pool = Vec::with_capacity(net.len());

    for _ in 0..trials {
        used.fill(false);
        let mut assignment = vec![usize::MAX; wf.tasks.len()];
        let mut complete = true;
        for &j in &order {
            let need = wf.tasks[j].qubits;
            pool.clear();
            pool.extend((0..net.len()).filter(|&k| !used[k] && net.nodes[k].qubits >= need));
            match pool.choose(&mut rng) {
                Some(&k) => {
                    used[k] = true;
                    assignment[j] = k;
                }
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if complete {
            examined += 1;
            let cost = model.evaluate(&assignment);
            if cost.total < min_cost && validate_assignment(wf, net, &assignment).unwrap_or(false) {
                min_cost = cost.total;
                best = Some(Allocation {
                    workflow_id: wf.id,
                    assignment,
                    cost,
                });
            }
        }
        on_trial(best.as_ref().map(|a| a.cost.total));
    }
    AllocationOutcome::timed(start, best, examined)
}
