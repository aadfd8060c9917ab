use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{AllocationOutcome, AllocationRequest};
use crate::cost::CostModel;
use crate::matcher::{feasible_monomorphisms, mapping_feasible, MatchMode};
use crate::model::Allocation;

/// Early-stopping knobs of the isomorphism-driven search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SoftIsoConfig {
    /// Required distance of an improving cost from the worst cost seen.
    pub thres_max: f64,
    /// Required distance of an improving cost from the previous cost.
    pub thres_prev: f64,
    /// At most `counter_cap_base ^ |tasks|` candidates are costed.
    pub counter_cap_base: u64,
    /// Keep the previous-cost reference frozen at 0 instead of tracking the
    /// last evaluated candidate.
    pub strict_pseudocode: bool,
    #[serde(skip)]
    pub mode: MatchMode,
}

impl Default for SoftIsoConfig {
    fn default() -> Self {
        SoftIsoConfig {
            thres_max: 0.1,
            thres_prev: 0.03,
            counter_cap_base: 10,
            strict_pseudocode: false,
            mode: MatchMode::Monomorphism,
        }
    }
}

impl SoftIsoConfig {
    /// No early stopping and no candidate cap: a full search.
    pub fn exhaustive() -> Self {
        SoftIsoConfig {
            thres_max: f64::INFINITY,
            thres_prev: f64::INFINITY,
            counter_cap_base: u64::MAX,
            ..SoftIsoConfig::default()
        }
    }

    pub fn candidate_cap(&self, tasks: usize) -> u64 {
        self.counter_cap_base
            .saturating_pow(u32::try_from(tasks).unwrap_or(u32::MAX))
    }
}

/// Walks embeddings lazily, keeping the cheapest feasible one, and stops once
/// an improving candidate lands far from both the worst and the previous cost.
pub fn soft_iso(request: &AllocationRequest<'_>, config: &SoftIsoConfig) -> AllocationOutcome {
    let start = Instant::now();
    let wf = request.workflow;
    let net = request.network;
    let model = CostModel::new(wf, net, request.weights, request.params, request.sim_time);
    let cap = config.candidate_cap(wf.tasks.len());

    let mut min_cost = f64::INFINITY;
    let mut max_cost = f64::NEG_INFINITY;
    let mut prev_cost = 0.0;
    let mut examined: u64 = 0;
    let mut best = None;

    for candidate in feasible_monomorphisms(wf, net, config.mode) {
        if examined >= cap {
            break;
        }
        let counter = examined;
        examined += 1;
        let cost = model.evaluate(&candidate.mapping);
        max_cost = cost.total.max(max_cost);
        if cost.total < min_cost {
            if mapping_feasible(&candidate, wf, net) {
                min_cost = cost.total;
                best = Some(Allocation {
                    workflow_id: wf.id,
                    assignment: candidate.mapping,
                    cost,
                });
            }
            let far_from_max = (cost.total - max_cost).abs() > config.thres_max;
            let far_from_prev = (cost.total - prev_cost).abs() > config.thres_prev;
            if (far_from_max && far_from_prev) || counter >= cap {
                break;
            }
        }
        if !config.strict_pseudocode {
            prev_cost = cost.total;
        }
    }
    AllocationOutcome::timed(start, best, examined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{chain, network};
    use crate::model::{NetworkParams, WeightConfig, Workflow, WorkflowId};

    fn request<'a>(
        wf: &'a Workflow,
        net: &'a crate::model::ResourceNetwork,
        w: &'a WeightConfig,
        p: &'a NetworkParams,
    ) -> AllocationRequest<'a> {
        AllocationRequest {
            workflow: wf,
            network: net,
            weights: w,
            params: p,
            sim_time: 0.0,
            seed: 0,
        }
    }

    #[test]
    fn single_feasible_node() {
        let (w, p) = (WeightConfig::default(), NetworkParams::default());
        let net = network(&["brisbane", "marrakesh"], &[(0, 1)]);
        let wf = chain(&[140]);
        let out = soft_iso(&request(&wf, &net, &w, &p), &SoftIsoConfig::default());
        assert_eq!(out.allocation.unwrap().assignment, vec![1]);
        assert!(out.candidates_examined >= 1);
    }

    #[test]
    fn triangle_into_tree_fails() {
        let (w, p) = (WeightConfig::default(), NetworkParams::default());
        let net = network(&["torino"; 4], &[(0, 1), (1, 2), (1, 3)]);
        let tasks = chain(&[5, 5, 5]).tasks;
        let wf = Workflow::new(WorkflowId(3), tasks, vec![(0, 1), (1, 2), (0, 2)], 0.0).unwrap();
        let out = soft_iso(&request(&wf, &net, &w, &p), &SoftIsoConfig::default());
        assert!(out.allocation.is_none());
        assert_eq!(out.candidates_examined, 0);
    }

    #[test]
    fn cap_bounds_examined_candidates() {
        let (w, p) = (WeightConfig::default(), NetworkParams::default());
        let links: Vec<_> = (0..12).flat_map(|a| (a + 1..12).map(move |b| (a, b))).collect();
        let net = network(&["torino"; 12], &links);
        let wf = chain(&[5]);
        let cfg = SoftIsoConfig {
            thres_max: f64::INFINITY,
            ..SoftIsoConfig::default()
        };
        let out = soft_iso(&request(&wf, &net, &w, &p), &cfg);
        assert_eq!(out.candidates_examined, 10);
        assert!(out.allocation.is_some());
    }

    #[test]
    fn caps_saturate() {
        assert_eq!(SoftIsoConfig::default().candidate_cap(3), 1000);
        assert_eq!(SoftIsoConfig::exhaustive().candidate_cap(4), u64::MAX);
    }

    #[test]
    fn busy_node_is_avoided() {
        let (w, p) = (WeightConfig::default(), NetworkParams::default());
        let mut net = network(&["torino", "torino"], &[(0, 1)]);
        net.nodes[0].next_available_time = 50.0;
        let wf = chain(&[5]);
        let out = soft_iso(&request(&wf, &net, &w, &p), &SoftIsoConfig::exhaustive());
        assert_eq!(out.allocation.unwrap().assignment, vec![1]);
    }
}
