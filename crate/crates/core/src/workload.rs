//! Seeded generators for tasks, workloads and network topologies, plus the
//! task-catalog and workload file formats.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, WorkloadError};
use crate::model::{ProgramFamily, ResourceNetwork, TaskSpec, Workflow, WorkflowId};
use crate::profiles::CalibrationProfile;

/// Deterministic child seed of `base` for the given stream labels (splitmix64 mixing).
pub fn derive_seed(base: u64, labels: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    labels.iter().fold(mix(base), |acc, &l| mix(acc ^ mix(l)))
}

/// Depth band for random circuits.
pub const RANDOM_CIRCUIT_DEPTH: (u32, u32) = (5, 25);
/// Probability of each extra forward dependency beyond the spanning arborescence.
pub const EXTRA_EDGE_PROBABILITY: f64 = 0.2;
/// Default simulated span of a workload when no arrival rate is given.
pub const DEFAULT_ARRIVAL_SPAN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadSpec {
    pub batch_size: usize,
    pub tasks_per_group: usize,
    pub qubit_range: (u32, u32),
    /// Workflows per second; `None` spreads the batch over about ten seconds.
    pub arrival_rate: Option<f64>,
    pub seed: u64,
    pub shots: u32,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec {
            batch_size: 50,
            tasks_per_group: 3,
            qubit_range: (5, 100),
            arrival_rate: None,
            seed: 0,
            shots: 1000,
        }
    }
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let bad = |m: &str| Err(WorkloadError::InvalidSpec(m.to_string()));
        if !(1..=crate::model::DEFAULT_MAX_TASKS).contains(&self.tasks_per_group) {
            return bad("tasks_per_group must lie in [1, 5]");
        }
        let (lo, hi) = self.qubit_range;
        if lo == 0 || lo > hi {
            return bad("qubit_range must satisfy 1 <= lo <= hi");
        }
        if self.shots == 0 {
            return bad("shots must be at least 1");
        }
        if let Some(rate) = self.arrival_rate {
            if rate.is_nan() || rate <= 0.0 {
                return bad("arrival_rate must be positive");
            }
        }
        Ok(())
    }

    pub fn effective_arrival_rate(&self) -> f64 {
        self.arrival_rate
            .unwrap_or(self.batch_size.max(1) as f64 / DEFAULT_ARRIVAL_SPAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySpec {
    pub node_count: usize,
    pub link_probability: f64,
    pub profile_pool: Vec<String>,
    pub seed: u64,
}

impl Default for TopologySpec {
    fn default() -> Self {
        TopologySpec {
            node_count: 5,
            link_probability: 0.5,
            profile_pool: vec!["brisbane".into(), "torino".into(), "marrakesh".into()],
            seed: 0,
        }
    }
}

/// Where workflow tasks come from.
#[derive(Debug, Clone, Copy)]
pub enum TaskSource<'a> {
    /// Closed-form metadata per program family.
    ClosedForm,
    /// Records imported from a task catalog.
    Catalog(&'a [TaskSpec]),
}

/// Circuit metadata for `family` on `qubits` qubits.
///
/// | family        | depth                         | two-qubit gates      | measured |
/// |---------------|-------------------------------|----------------------|----------|
/// | GHZ           | n + 1                         | n − 1                | n        |
/// | QFT           | n(n+1)/2 + 1                  | n(n−1)/2             | n        |
/// | GraphState    | 2 + ring colors + chords      | ring + chords        | n        |
/// | RandomCircuit | d ∈ [5, 25]                   | d·⌊n/2⌋              | n        |
/// | Grover        | 2 + r(4(n−1) + 4), r = 1+n/10 | 4r(n−1)              | n        |
/// | DJ            | n + 3                         | n − 1                | n − 1    |
/// | QAOA (p = 2)  | 2 + 2(2·ring colors + 1)      | 4·ring               | n        |
/// | QNN           | 5(n−1) + 6                    | 5(n−1)               | n        |
/// | VQE           | 3n + 2                        | 3(n−1)               | n        |
/// | QPE (c = n−1) | c(c+1)/2 + c + 2              | c(c+1)/2             | c        |
/// | AE  (c = n−1) | c(c+1)/2 + 2c + 2             | c(c−1)/2 + 2c        | c        |
/// | GroundState   | 4n + 7                        | 4(n−1)               | n        |
/// | Shor          | 2n² + n                       | n²                   | ⌈2n/3⌉   |
///
/// `ring` is the edge count of a cycle over the qubits (1 for two qubits, 0
/// for one) and `chords` a uniform draw in `[0, n/2]` limited by the free
/// vertex pairs.
pub fn generate_task(
    family: ProgramFamily,
    qubits: u32,
    shots: u32,
    rng: &mut impl Rng,
) -> Result<TaskSpec, ModelError> {
    let n = qubits;
    let ring = match n {
        0 | 1 => 0,
        2 => 1,
        _ => n,
    };
    let ring_colors = match n {
        0 | 1 => 0,
        2 => 1,
        _ if n.is_multiple_of(2) => 2,
        _ => 3,
    };
    let nm1 = n.saturating_sub(1);
    let (depth, two_qubit_gates, measured_qubits) = match family {
        ProgramFamily::Ghz => (n + 1, nm1, n),
        ProgramFamily::Qft => (n * (n + 1) / 2 + 1, n * nm1 / 2, n),
        ProgramFamily::GraphState => {
            let free_pairs = n * nm1 / 2 - ring;
            let chords = rng.random_range(0..=n / 2).min(free_pairs);
            (2 + ring_colors + chords, ring + chords, n)
        }
        ProgramFamily::RandomCircuit => {
            let d = rng.random_range(RANDOM_CIRCUIT_DEPTH.0..=RANDOM_CIRCUIT_DEPTH.1);
            (d, d * (n / 2), n)
        }
        ProgramFamily::Grover => {
            let r = 1 + n / 10;
            (2 + r * (4 * nm1 + 4), 4 * r * nm1, n)
        }
        ProgramFamily::Dj => (n + 3, nm1, nm1),
        ProgramFamily::Qaoa => (2 + 2 * (2 * ring_colors + 1), 4 * ring, n),
        ProgramFamily::Qnn => (5 * nm1 + 6, 5 * nm1, n),
        ProgramFamily::Vqe => (3 * n + 2, 3 * nm1, n),
        ProgramFamily::Qpe => {
            let c = nm1;
            (c * (c + 1) / 2 + c + 2, c * (c + 1) / 2, c)
        }
        ProgramFamily::Ae => {
            let c = nm1;
            (c * (c + 1) / 2 + 2 * c + 2, c * c.saturating_sub(1) / 2 + 2 * c, c)
        }
        ProgramFamily::GroundState => (4 * n + 7, 4 * nm1, n),
        ProgramFamily::Shor => (2 * n * n + n, n * n, (2 * n).div_ceil(3).min(n)),
    };
    let task = TaskSpec {
        id: format!("{family}-{n}"),
        family,
        qubits: n,
        depth,
        two_qubit_gates,
        measured_qubits,
        shots,
    };
    task.validate()?;
    Ok(task)
}

#[derive(Debug, Serialize, Deserialize)]
struct CatalogRow {
    id: String,
    family: String,
    qubits: u32,
    depth: u32,
    two_qubit_gates: u32,
    measured_qubits: u32,
    shots: u32,
}

/// Reads a comma-separated task catalog with a header row.
pub fn import_task_catalog(path: &Path) -> Result<Vec<TaskSpec>, WorkloadError> {
    let file = std::fs::File::open(path).map_err(|source| WorkloadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_task_catalog(file, path)
}

pub fn read_task_catalog(reader: impl Read, origin: &Path) -> Result<Vec<TaskSpec>, WorkloadError> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let parse_err = |e: csv::Error| WorkloadError::Parse {
        path: origin.to_path_buf(),
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let headers = csv.headers().map_err(parse_err)?.clone();
    let mut tasks = Vec::new();
    let mut record = csv::StringRecord::new();
    while csv.read_record(&mut record).map_err(parse_err)? {
        let line = record.position().map_or(0, |p| p.line());
        let row: CatalogRow = record.deserialize(Some(&headers)).map_err(|e| WorkloadError::Parse {
            path: origin.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        let invalid = |source| WorkloadError::Invalid {
            path: origin.to_path_buf(),
            line,
            source,
        };
        let task = TaskSpec {
            family: row.family.parse().map_err(invalid)?,
            id: row.id,
            qubits: row.qubits,
            depth: row.depth,
            two_qubit_gates: row.two_qubit_gates,
            measured_qubits: row.measured_qubits,
            shots: row.shots,
        };
        task.validate().map_err(invalid)?;
        tasks.push(task);
    }
    Ok(tasks)
}

pub fn write_task_catalog(tasks: &[TaskSpec], writer: impl Write) -> Result<(), csv::Error> {
    let mut csv = csv::Writer::from_writer(writer);
    if tasks.is_empty() {
        csv.write_record([
            "id",
            "family",
            "qubits",
            "depth",
            "two_qubit_gates",
            "measured_qubits",
            "shots",
        ])?;
    }
    for t in tasks {
        csv.serialize(CatalogRow {
            id: t.id.clone(),
            family: t.family.to_string(),
            qubits: t.qubits,
            depth: t.depth,
            two_qubit_gates: t.two_qubit_gates,
            measured_qubits: t.measured_qubits,
            shots: t.shots,
        })?;
    }
    csv.flush()?;
    Ok(())
}

/// Random connected DAG over `n` tasks: a random arborescence rooted at task 0
/// plus extra forward edges with [`EXTRA_EDGE_PROBABILITY`].
pub fn random_dag(n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for i in 1..n {
        edges.insert((rng.random_range(0..i), i));
    }
    for b in 1..n {
        for a in 0..b {
            if !edges.contains(&(a, b)) && rng.random_bool(EXTRA_EDGE_PROBABILITY) {
                edges.insert((a, b));
            }
        }
    }
    edges.into_iter().collect()
}

/// Generates `spec.batch_size` workflows with Poisson arrivals.
pub fn generate_workload(
    spec: &WorkloadSpec,
    source: TaskSource<'_>,
) -> Result<Vec<Workflow>, WorkloadError> {
    spec.validate()?;
    let (lo, hi) = spec.qubit_range;
    let pool: Vec<&TaskSpec> = match source {
        TaskSource::ClosedForm => Vec::new(),
        TaskSource::Catalog(all) => {
            let pool: Vec<_> = all.iter().filter(|t| (lo..=hi).contains(&t.qubits)).collect();
            if pool.is_empty() {
                return Err(WorkloadError::EmptyCatalog { lo, hi });
            }
            pool
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rate = spec.effective_arrival_rate();
    let gaps = Exp::new(rate).ok().filter(|_| rate.is_finite());

    let mut clock = 0.0;
    let mut workflows = Vec::with_capacity(spec.batch_size);
    for i in 0..spec.batch_size {
        if let Some(exp) = &gaps {
            clock += exp.sample(&mut rng);
        }
        let count = rng.random_range(1..=spec.tasks_per_group);
        let mut tasks = Vec::with_capacity(count);
        for j in 0..count {
            let mut task = match source {
                TaskSource::ClosedForm => {
                    let family = *ProgramFamily::ALL.choose(&mut rng).unwrap();
                    let qubits = rng.random_range(lo..=hi);
                    generate_task(family, qubits, spec.shots, &mut rng)?
                }
                TaskSource::Catalog(_) => (*pool.choose(&mut rng).unwrap()).clone(),
            };
            task.id = format!("w{i}t{j}-{}", task.id);
            tasks.push(task);
        }
        let edges = random_dag(count, &mut rng);
        workflows.push(Workflow::new(WorkflowId(i as u64), tasks, edges, clock)?);
    }
    Ok(workflows)
}

#[derive(Serialize, Deserialize)]
struct WorkloadDocument {
    workflows: Vec<Workflow>,
}

pub fn export_workload(workflows: &[Workflow], writer: impl Write) -> Result<(), WorkloadError> {
    let doc = WorkloadDocument {
        workflows: workflows.to_vec(),
    };
    serde_json::to_writer_pretty(writer, &doc)?;
    Ok(())
}

pub fn import_workload(reader: impl Read) -> Result<Vec<Workflow>, WorkloadError> {
    let doc: WorkloadDocument = serde_json::from_reader(reader)?;
    for wf in &doc.workflows {
        wf.validate(crate::model::DEFAULT_MAX_TASKS)?;
    }
    Ok(doc.workflows)
}

/// Random network drawn from `profiles` with replacement.
///
/// Each node pair is linked independently with `link_probability`; any
/// disconnected components are then joined along a uniformly random labeled
/// tree over the components (decoded from a Prüfer sequence), each tree edge
/// landing on a random node of either component.
pub fn generate_network(
    spec: &TopologySpec,
    profiles: &[CalibrationProfile],
) -> Result<ResourceNetwork, WorkloadError> {
    let pool = crate::profiles::select(profiles, &spec.profile_pool)?;
    if spec.node_count == 0 {
        return Err(WorkloadError::InvalidSpec("node_count must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&spec.link_probability) {
        return Err(WorkloadError::InvalidSpec(
            "link_probability must lie in [0, 1]".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.node_count;
    let nodes: Vec<_> = (0..n)
        .map(|i| {
            let profile = pool.choose(&mut rng).unwrap();
            profile.instantiate(format!("{}-{i}", profile.name))
        })
        .collect();
    let mut links = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(spec.link_probability) {
                links.push((a, b));
            }
        }
    }
    let mut components = components(n, &links);
    if components.len() > 1 {
        components.shuffle(&mut rng);
        for (ca, cb) in random_tree(components.len(), &mut rng) {
            let a = *components[ca].choose(&mut rng).unwrap();
            let b = *components[cb].choose(&mut rng).unwrap();
            links.push((a, b));
        }
    }
    Ok(ResourceNetwork::new(nodes, links)?)
}

fn components(n: usize, links: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in links {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut comp = vec![root];
        let mut i = 0;
        while i < comp.len() {
            for &w in &adj[comp[i]] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
            i += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Uniform labeled tree on `m` vertices via a random Prüfer sequence.
fn random_tree(m: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    match m {
        0 | 1 => return Vec::new(),
        2 => return vec![(0, 1)],
        _ => {}
    }
    let code: Vec<usize> = (0..m - 2).map(|_| rng.random_range(0..m)).collect();
    let mut degree = vec![1usize; m];
    for &c in &code {
        degree[c] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..m).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(m - 1);
    for &c in &code {
        let leaf = leaves.pop_first().unwrap();
        edges.push((leaf, c));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.insert(c);
        }
    }
    let last: Vec<_> = leaves.into_iter().collect();
    edges.push((last[0], last[1]));
    edges
}
