//! Repetition runner, named scenarios, parameter sweeps and result files.
//!
//! Every repetition `i` uses seed `base_seed + i`, from which the topology,
//! the workload and the allocator streams are derived independently. Runs
//! are mapped over a rayon pool when the `parallel` feature is enabled and
//! collected in seed order, so the written tables never depend on scheduling.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alloc::{Algorithm, AlgorithmKind, RandomAwareConfig, SoftIsoConfig};
use crate::cost::BOUND_FLOOR;
use crate::error::{ConfigError, ExperimentError};
use crate::model::{NetworkParams, TaskSpec, WeightConfig};
use crate::profiles::CalibrationProfile;
use crate::sim::{run_simulation, SimConfig};
use crate::workload::{
    derive_seed, generate_network, generate_workload, import_task_catalog, TaskSource,
    TopologySpec, WorkloadSpec,
};

/// Column order of the run table.
pub const RUN_COLUMNS: [&str; 12] = [
    "algorithm",
    "seed",
    "batch",
    "nodes",
    "tasks_per_group",
    "rho_q",
    "execution_time",
    "wait_time",
    "avg_fidelity",
    "comm_overhead",
    "decision_time",
    "completion_pct",
];

/// Width of a failure-histogram bin, in percent of unfulfilled tasks.
pub const HISTOGRAM_BIN_WIDTH: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("results"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithms: Vec<AlgorithmKind>,
    pub repetitions: u32,
    pub base_seed: u64,
    /// Record wall-clock decision time. Off by default because it makes the
    /// output differ from run to run.
    pub timing: bool,
    /// Spread repetitions over the rayon pool (ignored without the
    /// `parallel` feature).
    pub parallel: bool,
    pub workload: WorkloadSpec,
    pub topology: TopologySpec,
    pub weights: WeightConfig,
    pub network: NetworkParams,
    pub soft_iso: SoftIsoConfig,
    pub random_aware: RandomAwareConfig,
    pub sim: SimConfig,
    pub output: OutputConfig,
    /// Task catalog to sample from instead of the closed-form families.
    pub catalog: Option<PathBuf>,
    /// Calibration file replacing the bundled profiles.
    pub profiles: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algorithms: vec![AlgorithmKind::SoftIso],
            repetitions: 100,
            base_seed: 0,
            timing: false,
            parallel: true,
            workload: WorkloadSpec::default(),
            topology: TopologySpec::default(),
            weights: WeightConfig::default(),
            network: NetworkParams::default(),
            soft_iso: SoftIsoConfig::default(),
            random_aware: RandomAwareConfig::default(),
            sim: SimConfig::default(),
            output: OutputConfig::default(),
            catalog: None,
            profiles: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.algorithms.is_empty() {
            return Err(ConfigError::field("algorithms", "at least one algorithm is required"));
        }
        if self.repetitions == 0 {
            return Err(ConfigError::field("repetitions", "must be at least 1"));
        }
        self.workload
            .validate()
            .map_err(|e| ConfigError::field("workload", e.to_string()))?;
        if self.topology.node_count == 0 {
            return Err(ConfigError::field("topology.node_count", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.topology.link_probability) {
            return Err(ConfigError::field("topology.link_probability", "must lie in [0, 1]"));
        }
        if self.topology.profile_pool.is_empty() {
            return Err(ConfigError::field("topology.profile_pool", "must not be empty"));
        }
        self.weights
            .validate()
            .map_err(|e| ConfigError::field("weights", e.to_string()))?;
        self.network
            .validate()
            .map_err(|e| ConfigError::field("network", e.to_string()))?;
        if self.soft_iso.thres_max < 0.0 || self.soft_iso.thres_prev < 0.0 {
            return Err(ConfigError::field("soft_iso", "thresholds must be nonnegative"));
        }
        if self.soft_iso.counter_cap_base == 0 {
            return Err(ConfigError::field("soft_iso.counter_cap_base", "must be at least 1"));
        }
        if self.random_aware.trial_multiplier == 0 {
            return Err(ConfigError::field("random_aware.trial_multiplier", "must be at least 1"));
        }
        if self.algorithms.contains(&AlgorithmKind::ExhaustiveOracle)
            && (self.topology.node_count > crate::alloc::MAX_ORACLE_NODES
                || self.workload.tasks_per_group > crate::alloc::MAX_ORACLE_TASKS)
        {
            return Err(ConfigError::field(
                "topology.node_count",
                "exhaustive_oracle is limited to 8 nodes",
            ));
        }
        Ok(())
    }

    pub fn algorithm(&self, kind: AlgorithmKind) -> Algorithm {
        match kind {
            AlgorithmKind::SoftIso => Algorithm::SoftIso(self.soft_iso),
            AlgorithmKind::RandomAware => Algorithm::RandomAware(self.random_aware),
            AlgorithmKind::GreedyDfs => Algorithm::GreedyDfs,
            AlgorithmKind::ExhaustiveOracle => Algorithm::ExhaustiveOracle,
        }
    }

    /// Sets the link probability used both for topology draws and link costs.
    pub fn set_rho_q(&mut self, rho: f64) {
        self.topology.link_probability = rho;
        self.network.success_probability = rho;
    }
}

/// One simulated repetition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub algorithm: AlgorithmKind,
    pub seed: u64,
    pub batch: usize,
    pub nodes: usize,
    pub tasks_per_group: usize,
    pub rho_q: f64,
    pub execution_time: f64,
    pub wait_time: f64,
    pub avg_fidelity: f64,
    pub comm_overhead: f64,
    pub decision_time: Option<f64>,
    pub completion_pct: f64,
}

/// Mean or standard deviation of the metric columns over a group of runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Mean,
    Std,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub statistic: Statistic,
    pub algorithm: AlgorithmKind,
    pub batch: usize,
    pub nodes: usize,
    pub tasks_per_group: usize,
    pub rho_q: f64,
    pub execution_time: f64,
    pub wait_time: f64,
    pub avg_fidelity: f64,
    pub comm_overhead: f64,
    pub decision_time: Option<f64>,
    pub completion_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareRow {
    pub algorithm: AlgorithmKind,
    pub seed: u64,
    pub node: usize,
    pub profile: String,
    pub share: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResult {
    pub runs: Vec<RunRow>,
    pub aggregates: Vec<AggregateRow>,
    pub shares: Vec<ShareRow>,
}

impl ExperimentResult {
    pub fn mean(&self, algorithm: AlgorithmKind) -> Option<&AggregateRow> {
        self.aggregates
            .iter()
            .find(|a| a.algorithm == algorithm && a.statistic == Statistic::Mean)
    }

    fn extend(&mut self, other: ExperimentResult) {
        self.runs.extend(other.runs);
        self.aggregates.extend(other.aggregates);
        self.shares.extend(other.shares);
    }
}

struct Inputs {
    profiles: Vec<CalibrationProfile>,
    catalog: Option<Vec<TaskSpec>>,
}

impl Inputs {
    fn load(config: &ExperimentConfig) -> Result<Self, ExperimentError> {
        let profiles = match &config.profiles {
            Some(path) => CalibrationProfile::load(path)?,
            None => CalibrationProfile::bundled(),
        };
        let catalog = config.catalog.as_deref().map(import_task_catalog).transpose()?;
        Ok(Inputs { profiles, catalog })
    }
}

fn map_seeds<T, F>(seeds: Vec<u64>, parallel: bool, run: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return seeds.into_par_iter().map(run).collect();
    }
    let _ = parallel;
    seeds.into_iter().map(run).collect()
}

fn run_once(
    config: &ExperimentConfig,
    inputs: &Inputs,
    kind: AlgorithmKind,
    seed: u64,
) -> Result<(RunRow, Vec<ShareRow>), ExperimentError> {
    let topology = TopologySpec {
        seed: derive_seed(seed, &[1]),
        ..config.topology.clone()
    };
    let workload_spec = WorkloadSpec {
        seed: derive_seed(seed, &[2]),
        ..config.workload.clone()
    };
    let network = generate_network(&topology, &inputs.profiles)?;
    let source = match &inputs.catalog {
        Some(tasks) => TaskSource::Catalog(tasks),
        None => TaskSource::ClosedForm,
    };
    let workload = generate_workload(&workload_spec, source)?;
    let state = run_simulation(
        &workload,
        network,
        &config.algorithm(kind),
        &config.weights,
        &config.network,
        &config.sim,
        derive_seed(seed, &[3]),
    )?;
    let m = &state.metrics;
    let row = RunRow {
        algorithm: kind,
        seed,
        batch: config.workload.batch_size,
        nodes: config.topology.node_count,
        tasks_per_group: config.workload.tasks_per_group,
        rho_q: config.topology.link_probability,
        execution_time: m.execution_time,
        wait_time: m.wait_time,
        avg_fidelity: m.average_fidelity(),
        comm_overhead: m.communication_overhead,
        decision_time: config.timing.then_some(m.decision_time),
        completion_pct: m.completion_pct(),
    };
    let shares = state
        .qpu_time_distribution()
        .into_iter()
        .enumerate()
        .map(|(node, share)| ShareRow {
            algorithm: kind,
            seed,
            node,
            profile: state.network.nodes[node].profile.clone(),
            share,
        })
        .collect();
    Ok((row, shares))
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn aggregate(runs: &[RunRow]) -> [AggregateRow; 2] {
    let first = &runs[0];
    let stat = |f: fn(&RunRow) -> f64| mean_std(runs.iter().map(f));
    let (et, et_s) = stat(|r| r.execution_time);
    let (wt, wt_s) = stat(|r| r.wait_time);
    let (fi, fi_s) = stat(|r| r.avg_fidelity);
    let (co, co_s) = stat(|r| r.comm_overhead);
    let (cp, cp_s) = stat(|r| r.completion_pct);
    let timing = runs
        .iter()
        .all(|r| r.decision_time.is_some())
        .then(|| mean_std(runs.iter().map(|r| r.decision_time.unwrap())));
    let row = |statistic, e, w, f, c, d, p| AggregateRow {
        statistic,
        algorithm: first.algorithm,
        batch: first.batch,
        nodes: first.nodes,
        tasks_per_group: first.tasks_per_group,
        rho_q: first.rho_q,
        execution_time: e,
        wait_time: w,
        avg_fidelity: f,
        comm_overhead: c,
        decision_time: d,
        completion_pct: p,
    };
    [
        row(Statistic::Mean, et, wt, fi, co, timing.map(|t| t.0), cp),
        row(Statistic::Std, et_s, wt_s, fi_s, co_s, timing.map(|t| t.1), cp_s),
    ]
}

/// Runs every configured algorithm for every repetition seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    config.validate()?;
    let inputs = Inputs::load(config)?;
    let seeds: Vec<u64> = (0..u64::from(config.repetitions))
        .map(|i| config.base_seed.wrapping_add(i))
        .collect();
    let mut result = ExperimentResult::default();
    for &kind in &config.algorithms {
        let outcomes = map_seeds(seeds.clone(), config.parallel, |seed| {
            run_once(config, &inputs, kind, seed)
        });
        let mut runs = Vec::with_capacity(outcomes.len());
        for outcome in outcomes {
            let (row, shares) = outcome?;
            runs.push(row);
            result.shares.extend(shares);
        }
        result.aggregates.extend(aggregate(&runs));
        result.runs.extend(runs);
    }
    Ok(result)
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKey {
    Batch,
    Nodes,
    TasksPerGroup,
    RhoQ,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: SweepKey,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::BadSweep(s.to_string());
        let (key, values) = s.split_once('=').ok_or_else(bad)?;
        let key = match key.trim() {
            "batch" | "batch_size" => SweepKey::Batch,
            "nodes" | "node_count" => SweepKey::Nodes,
            "tasks_per_group" | "tasks" => SweepKey::TasksPerGroup,
            "rho_q" | "rho" => SweepKey::RhoQ,
            _ => return Err(bad()),
        };
        let values = values
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err(bad());
        }
        if key != SweepKey::RhoQ && values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
            return Err(bad());
        }
        Ok(Sweep { key, values })
    }
}

impl Sweep {
    pub fn apply(&self, base: &ExperimentConfig, value: f64) -> ExperimentConfig {
        let mut config = base.clone();
        match self.key {
            SweepKey::Batch => config.workload.batch_size = value as usize,
            SweepKey::Nodes => config.topology.node_count = value as usize,
            SweepKey::TasksPerGroup => config.workload.tasks_per_group = value as usize,
            SweepKey::RhoQ => config.set_rho_q(value),
        }
        config
    }
}

/// One experiment per sweep value, concatenated in sweep order.
pub fn run_sweep(base: &ExperimentConfig, sweep: &Sweep) -> Result<ExperimentResult, ExperimentError> {
    let mut result = ExperimentResult::default();
    for &value in &sweep.values {
        result.extend(run_experiment(&sweep.apply(base, value))?);
    }
    Ok(result)
}

/// Stress-test presets: small or large programs on few or many resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    SpLr,
    SpMr,
    LpLr,
    LpMr,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::SpLr, Scenario::SpMr, Scenario::LpLr, Scenario::LpMr];

    /// `(tasks_per_group, batch)` of the program size.
    pub fn program(self) -> (usize, usize) {
        match self {
            Scenario::SpLr | Scenario::SpMr => (2, 10),
            Scenario::LpLr | Scenario::LpMr => (4, 500),
        }
    }

    /// `(rho_q, nodes)` of the resource level.
    pub fn resources(self) -> (f64, usize) {
        match self {
            Scenario::SpLr | Scenario::LpLr => (0.3, 10),
            Scenario::SpMr | Scenario::LpMr => (0.9, 20),
        }
    }

    pub fn config(self, base: &ExperimentConfig) -> ExperimentConfig {
        let (tasks, batch) = self.program();
        let (rho, nodes) = self.resources();
        let mut config = base.clone();
        config.workload.tasks_per_group = tasks;
        config.workload.batch_size = batch;
        config.topology.node_count = nodes;
        config.set_rho_q(rho);
        config
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::SpLr => "SP-LR",
            Scenario::SpMr => "SP-MR",
            Scenario::LpLr => "LP-LR",
            Scenario::LpMr => "LP-MR",
        })
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_uppercase().replace('_', "-");
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.to_string() == key)
            .ok_or_else(|| ConfigError::UnknownScenario(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub algorithm: AlgorithmKind,
    pub completion_pct: f64,
    /// Mean allocator wall-clock seconds per repetition.
    pub decision_time: f64,
}

/// Runs one scenario for one algorithm with timing enabled.
///
/// `base` supplies everything the scenario does not pin (repetitions, seed,
/// weights, thresholds); its batch size is used only when `batch_override`
/// asks for a scaled-down run.
pub fn run_scenario(
    scenario: Scenario,
    algorithm: AlgorithmKind,
    base: &ExperimentConfig,
    batch_override: Option<usize>,
) -> Result<ScenarioReport, ExperimentError> {
    let mut config = scenario.config(base);
    if let Some(batch) = batch_override {
        config.workload.batch_size = batch;
    }
    config.algorithms = vec![algorithm];
    config.timing = true;
    let result = run_experiment(&config)?;
    let mean = result.mean(algorithm).expect("one aggregate per algorithm");
    Ok(ScenarioReport {
        scenario: scenario.to_string(),
        algorithm,
        completion_pct: mean.completion_pct,
        decision_time: mean.decision_time.unwrap_or(0.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub algorithm: AlgorithmKind,
    /// Lower edge, percent of unfulfilled tasks.
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
}

/// Counts runs per 5%-wide bin of unfulfilled tasks, one series per algorithm.
///
/// The last bin is closed so that 100% unfulfilled falls inside it.
pub fn failure_histogram(runs: &[RunRow]) -> Vec<HistogramBin> {
    let bins = (100.0 / HISTOGRAM_BIN_WIDTH) as usize;
    let mut algorithms: Vec<AlgorithmKind> = runs.iter().map(|r| r.algorithm).collect();
    algorithms.sort();
    algorithms.dedup();
    let mut out = Vec::with_capacity(algorithms.len() * bins);
    for algorithm in algorithms {
        let mut counts = vec![0u64; bins];
        for run in runs.iter().filter(|r| r.algorithm == algorithm) {
            let unfulfilled = (100.0 - run.completion_pct).clamp(0.0, 100.0);
            let bin = ((unfulfilled / HISTOGRAM_BIN_WIDTH) as usize).min(bins - 1);
            counts[bin] += 1;
        }
        out.extend(counts.into_iter().enumerate().map(|(i, count)| HistogramBin {
            algorithm,
            lower: i as f64 * HISTOGRAM_BIN_WIDTH,
            upper: (i + 1) as f64 * HISTOGRAM_BIN_WIDTH,
            count,
        }));
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the run table: every run row, then a mean and a std row per group.
pub fn write_runs(result: &ExperimentResult, writer: impl std::io::Write) -> Result<(), csv::Error> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(RUN_COLUMNS)?;
    for r in &result.runs {
        csv.write_record([
            r.algorithm.to_string(),
            r.seed.to_string(),
            r.batch.to_string(),
            r.nodes.to_string(),
            r.tasks_per_group.to_string(),
            r.rho_q.to_string(),
            r.execution_time.to_string(),
            r.wait_time.to_string(),
            r.avg_fidelity.to_string(),
            r.comm_overhead.to_string(),
            fmt_opt(r.decision_time),
            r.completion_pct.to_string(),
        ])?;
    }
    for a in &result.aggregates {
        let label = match a.statistic {
            Statistic::Mean => "mean",
            Statistic::Std => "std",
        };
        csv.write_record([
            a.algorithm.to_string(),
            label.to_string(),
            a.batch.to_string(),
            a.nodes.to_string(),
            a.tasks_per_group.to_string(),
            a.rho_q.to_string(),
            a.execution_time.to_string(),
            a.wait_time.to_string(),
            a.avg_fidelity.to_string(),
            a.comm_overhead.to_string(),
            fmt_opt(a.decision_time),
            a.completion_pct.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    normalization: Normalization,
    aggregates: &'a [AggregateRow],
}

#[derive(Serialize)]
struct Normalization {
    bound_floor: f64,
    availability: &'static str,
    error: &'static str,
    runtime: &'static str,
    network: &'static str,
}

/// Writes `runs.csv`, `qpu_shares.csv`, `failure_histogram.csv` and
/// `summary.json` into `dir`.
pub fn write_outputs(
    result: &ExperimentResult,
    config: &ExperimentConfig,
    dir: &Path,
) -> Result<(), ExperimentError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExperimentError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let create = |name: &str| {
        let path = dir.join(name);
        fs::File::create(&path).map_err(io(&path))
    };

    write_runs(result, create("runs.csv")?)?;

    let mut shares = csv::Writer::from_writer(create("qpu_shares.csv")?);
    for s in &result.shares {
        shares.serialize(s)?;
    }
    shares.flush().map_err(io(dir))?;

    let mut hist = csv::Writer::from_writer(create("failure_histogram.csv")?);
    for bin in failure_histogram(&result.runs) {
        hist.serialize(bin)?;
    }
    hist.flush().map_err(io(dir))?;

    let summary = Summary {
        config,
        normalization: Normalization {
            bound_floor: BOUND_FLOOR,
            availability: "max over nodes of (next_available_time - now), floored at 0",
            error: "task count x worst qubit-feasible (task, node) error",
            runtime: "task count x worst qubit-feasible (task, node) runtime",
            network: "edge count x worst edge term over linked, qubit-feasible node pairs",
        },
        aggregates: &result.aggregates,
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    let path = dir.join("summary.json");
    fs::write(&path, json).map_err(io(&path))?;
    Ok(())
}
