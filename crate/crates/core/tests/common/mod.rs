//! Seeded random instances shared by the integration suites.
#![allow(dead_code)]

use qflow_core::profiles::CalibrationProfile;
use qflow_core::workload::{generate_network, generate_task, random_dag, TopologySpec};
use qflow_core::{
    AllocationRequest, NetworkParams, ProgramFamily, ResourceNetwork, TaskSpec, WeightConfig,
    Workflow, WorkflowId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub workflow: Workflow,
    pub network: ResourceNetwork,
    pub weights: WeightConfig,
    pub params: NetworkParams,
    pub sim_time: f64,
    pub seed: u64,
}

impl Instance {
    pub fn request(&self) -> AllocationRequest<'_> {
        AllocationRequest {
            workflow: &self.workflow,
            network: &self.network,
            weights: &self.weights,
            params: &self.params,
            sim_time: self.sim_time,
            seed: self.seed,
        }
    }
}

pub fn ghz(id: &str, qubits: u32) -> TaskSpec {
    TaskSpec {
        id: id.into(),
        family: ProgramFamily::Ghz,
        qubits,
        depth: qubits + 1,
        two_qubit_gates: qubits - 1,
        measured_qubits: qubits,
        shots: 1000,
    }
}

pub fn profile(name: &str) -> CalibrationProfile {
    CalibrationProfile::bundled()
        .into_iter()
        .find(|p| p.name == name)
        .expect("bundled profile")
}

pub fn network(profiles: &[&str], links: &[(usize, usize)]) -> ResourceNetwork {
    let nodes = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| profile(p).instantiate(format!("{p}-{i}")))
        .collect();
    ResourceNetwork::new(nodes, links.iter().copied()).expect("valid network")
}

/// Random workflow of `1..=max_tasks` tasks and random connected network of
/// `1..=max_nodes` nodes.
///
/// Task sizes reach 160 qubits so the qubit constraint binds on some draws,
/// and queues carry random backlog so availability matters.
pub fn random_instance(seed: u64, max_tasks: usize, max_nodes: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_tasks = rng.random_range(1..=max_tasks);
    let tasks = (0..n_tasks)
        .map(|j| {
            let family = ProgramFamily::ALL[rng.random_range(0..ProgramFamily::ALL.len())];
            let mut t = generate_task(family, rng.random_range(2..=160), 1000, &mut rng).unwrap();
            t.id = format!("t{j}");
            t
        })
        .collect();
    let edges = random_dag(n_tasks, &mut rng);
    let workflow = Workflow::new(WorkflowId(seed), tasks, edges, 0.0).unwrap();

    let spec = TopologySpec {
        node_count: rng.random_range(1..=max_nodes),
        link_probability: rng.random_range(0.0..=1.0),
        seed: rng.random(),
        ..TopologySpec::default()
    };
    let mut network = generate_network(&spec, &CalibrationProfile::bundled()).unwrap();
    for node in &mut network.nodes {
        if rng.random_bool(0.5) {
            node.next_available_time = rng.random_range(0.0..5.0);
        }
    }
    let zeta = rng.random_range(0.0..=1.0);
    let (a, b) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    Instance {
        workflow,
        network,
        weights: WeightConfig {
            zeta,
            alpha: lo,
            beta: hi - lo,
            gamma: 1.0 - hi,
        },
        params: NetworkParams {
            success_probability: rng.random_range(0.0..=1.0),
            ..NetworkParams::default()
        },
        sim_time: rng.random_range(0.0..3.0),
        seed: rng.random(),
    }
}
