mod common;

use common::{ghz, network};
use qflow_core::alloc::{RandomAwareConfig, SoftIsoConfig};
use qflow_core::cost::runtime_cost;
use qflow_core::profiles::CalibrationProfile;
use qflow_core::sim::{run_simulation, SimConfig, SimState};
use qflow_core::workload::{generate_network, generate_workload, TaskSource, TopologySpec, WorkloadSpec};
use qflow_core::{Algorithm, NetworkParams, WeightConfig, Workflow, WorkflowId};

// Independent high-precision evaluation of a GHZ-5 chain split over a linked
// brisbane/torino pair (default link parameters).
const CHAIN_SECOND_START: f64 = 0.189_440_681_025_838_91;
const CHAIN_FINISH: f64 = 0.216_713_408_298_566_18;

fn simulate(workload: &[Workflow], net: qflow_core::ResourceNetwork, algorithm: &Algorithm, config: &SimConfig, seed: u64) -> SimState {
    run_simulation(workload, net, algorithm, &WeightConfig::default(), &NetworkParams::default(), config, seed).unwrap()
}

#[test]
fn gated_chain_waits_for_predecessor_and_link() {
    let wf = Workflow::new(WorkflowId(0), vec![ghz("a", 5), ghz("b", 5)], vec![(0, 1)], 0.0).unwrap();
    let net = network(&["brisbane", "torino"], &[(0, 1)]);
    let s = simulate(std::slice::from_ref(&wf), net.clone(), &Algorithm::GreedyDfs, &SimConfig::default(), 0);
    let second = s.timeline.iter().find(|r| r.task == 1).unwrap();
    assert_eq!(second.node, 1);
    assert!((second.start - CHAIN_SECOND_START).abs() < 1e-12);
    assert!((second.finish - CHAIN_FINISH).abs() < 1e-12);
    assert!((s.metrics.execution_time - CHAIN_FINISH).abs() < 1e-12);
    assert!((s.metrics.wait_time - CHAIN_SECOND_START).abs() < 1e-12);

    let ungated = SimConfig { dependency_gating: false, ..SimConfig::default() };
    let s = simulate(&[wf], net, &Algorithm::GreedyDfs, &ungated, 0);
    assert!(s.timeline.iter().all(|r| r.start == 0.0));
}

fn algorithms() -> [Algorithm; 3] {
    [
        Algorithm::SoftIso(SoftIsoConfig::default()),
        Algorithm::RandomAware(RandomAwareConfig::default()),
        Algorithm::GreedyDfs,
    ]
}

fn check_invariants(workload: &[Workflow], s: &SimState, gating: bool) {
    // Every workflow ends in exactly one ledger.
    let mut seen: Vec<WorkflowId> = s.completed.iter().chain(&s.failed).copied().collect();
    seen.sort();
    let mut all: Vec<WorkflowId> = workload.iter().map(|w| w.id).collect();
    all.sort();
    assert_eq!(seen, all);
    assert!(s.pending.is_empty());

    let failed_tasks: u64 = workload
        .iter()
        .filter(|w| s.failed.contains(&w.id))
        .map(|w| w.tasks.len() as u64)
        .sum();
    assert_eq!(s.metrics.tasks_allocated + failed_tasks, s.metrics.tasks_total);
    assert_eq!(s.timeline.len() as u64, s.metrics.tasks_allocated);

    for (k, node) in s.network.nodes.iter().enumerate() {
        let on_node: Vec<_> = s.timeline.iter().filter(|r| r.node == k).collect();
        for pair in on_node.windows(2) {
            assert!(pair[1].start >= pair[0].finish, "FCFS broken on node {k}");
        }
        let last = on_node.last().map_or(0.0, |r| r.finish);
        assert_eq!(node.next_available_time, last);
    }

    for r in &s.timeline {
        assert!(r.wait >= 0.0);
        assert!(r.start >= r.enqueued);
        let wf = workload.iter().find(|w| w.id == r.workflow).unwrap();
        if gating {
            for &(p, _) in wf.edges.iter().filter(|e| e.1 == r.task) {
                let pred = s.timeline.iter().find(|x| x.workflow == r.workflow && x.task == p).unwrap();
                assert!(r.start >= pred.finish);
            }
        }
    }

    let longest = s.timeline.iter().map(|r| r.finish - r.start).fold(0.0, f64::max);
    assert!(s.metrics.execution_time >= longest);
    if !s.timeline.is_empty() {
        let total: f64 = s.qpu_time_distribution().iter().sum();
        assert!((total - 100.0).abs() < 1e-9);
    }
    if s.failed.is_empty() && !workload.is_empty() {
        assert_eq!(s.metrics.completion_pct(), 100.0);
    }
}

#[test]
fn simulation_invariants_hold_for_random_workloads() {
    let profiles = CalibrationProfile::bundled();
    for seed in 0..40 {
        let spec = WorkloadSpec { batch_size: 25, tasks_per_group: 1 + seed as usize % 5, seed, ..WorkloadSpec::default() };
        let workload = generate_workload(&spec, TaskSource::ClosedForm).unwrap();
        let topo = TopologySpec { node_count: 3 + seed as usize % 6, link_probability: 0.4, seed, ..TopologySpec::default() };
        let net = generate_network(&topo, &profiles).unwrap();
        for gating in [true, false] {
            let config = SimConfig { dependency_gating: gating, ..SimConfig::default() };
            for algorithm in algorithms() {
                let s = simulate(&workload, net.clone(), &algorithm, &config, seed);
                check_invariants(&workload, &s, gating);
            }
        }
    }
}

#[test]
fn durations_are_runtime_costs() {
    let wf = Workflow::new(WorkflowId(0), vec![ghz("a", 7)], vec![], 0.5).unwrap();
    let net = network(&["marrakesh"], &[]);
    let s = simulate(std::slice::from_ref(&wf), net.clone(), &Algorithm::GreedyDfs, &SimConfig::default(), 0);
    let r = s.timeline[0];
    assert_eq!(r.start, 0.5);
    assert_eq!(r.finish, 0.5 + runtime_cost(&wf.tasks[0], &net.nodes[0]));
}

#[test]
fn replays_are_identical() {
    let spec = WorkloadSpec { batch_size: 30, seed: 4, ..WorkloadSpec::default() };
    let workload = generate_workload(&spec, TaskSource::ClosedForm).unwrap();
    let net = generate_network(&TopologySpec { node_count: 6, seed: 4, ..TopologySpec::default() }, &CalibrationProfile::bundled()).unwrap();
    let algorithm = Algorithm::RandomAware(RandomAwareConfig::default());
    let a = simulate(&workload, net.clone(), &algorithm, &SimConfig::default(), 8);
    let b = simulate(&workload, net, &algorithm, &SimConfig::default(), 8);
    assert_eq!(a.timeline, b.timeline);
    assert_eq!(a.completed, b.completed);
}

#[test]
fn later_arrivals_queue_behind_earlier_work() {
    let first = Workflow::new(WorkflowId(0), vec![ghz("a", 5)], vec![], 0.0).unwrap();
    let second = Workflow::new(WorkflowId(1), vec![ghz("b", 5)], vec![], 0.01).unwrap();
    let net = network(&["brisbane"], &[]);
    let s = simulate(&[second, first], net, &Algorithm::GreedyDfs, &SimConfig::default(), 0);
    // One thirtieth of a second per GHZ-5 run on brisbane.
    let (a, b) = (s.timeline[0], s.timeline[1]);
    assert_eq!(a.workflow, WorkflowId(0));
    assert_eq!(b.enqueued, 0.01);
    assert!((b.start - 1.0 / 30.0).abs() < 1e-12);
    assert!((b.wait - (1.0 / 30.0 - 0.01)).abs() < 1e-12);
}
