//! `qflow`: run allocation experiments from a TOML config and flags.
//!
//! Exit status is 0 on success, 1 for configuration errors and 2 for
//! failures while running.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use qflow_core::experiment::{
    run_experiment, run_scenario, run_sweep, write_outputs, ExperimentConfig, Scenario, Sweep,
};
use qflow_core::{AlgorithmKind, ConfigError};

#[derive(Debug, Parser)]
#[command(name = "qflow", version, about = "Distributed quantum workflow allocation experiments")]
struct Cli {
    /// TOML experiment config; defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Algorithm(s): soft_iso, random_aware, greedy_dfs, exhaustive_oracle,
    /// a comma-separated list, or `all` for the first three.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of repetitions.
    #[arg(long)]
    reps: Option<u32>,
    /// Named preset: SP-LR, SP-MR, LP-LR or LP-MR. Prints completion and
    /// decision time per algorithm instead of writing files.
    #[arg(long)]
    scenario: Option<String>,
    /// Batch size override for --scenario.
    #[arg(long, requires = "scenario")]
    batch: Option<usize>,
    /// Parameter sweep such as `tasks_per_group=1,2,3,4`.
    #[arg(long, conflicts_with = "scenario")]
    sweep: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep SoftIso's previous cost fixed at its initial value.
    #[arg(long)]
    strict_pseudocode: bool,
    /// Start tasks without waiting for their predecessors.
    #[arg(long)]
    no_dep_gating: bool,
    /// Record allocator wall-clock time in the output files.
    #[arg(long)]
    timing: bool,
    /// Run repetitions sequentially.
    #[arg(long)]
    sequential: bool,
    /// Calibration profiles file.
    #[arg(long, env = "QFLOW_PROFILES")]
    profiles: Option<PathBuf>,
    /// Task catalog CSV to sample tasks from.
    #[arg(long)]
    catalog: Option<PathBuf>,
}

enum Failure {
    Config(anyhow::Error),
    Run(anyhow::Error),
}

fn parse_algorithms(spec: &str) -> Result<Vec<AlgorithmKind>, ConfigError> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(vec![
            AlgorithmKind::SoftIso,
            AlgorithmKind::RandomAware,
            AlgorithmKind::GreedyDfs,
        ]);
    }
    spec.split(',').map(|s| s.trim().parse()).collect()
}

fn build_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_toml(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(algo) = &cli.algo {
        config.algorithms = parse_algorithms(algo)?;
    }
    if let Some(seed) = cli.seed {
        config.base_seed = seed;
    }
    if let Some(reps) = cli.reps {
        config.repetitions = reps;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    if cli.strict_pseudocode {
        config.soft_iso.strict_pseudocode = true;
    }
    if cli.no_dep_gating {
        config.sim.dependency_gating = false;
    }
    if cli.timing {
        config.timing = true;
    }
    if cli.sequential {
        config.parallel = false;
    }
    if cli.profiles.is_some() {
        config.profiles = cli.profiles.clone();
    }
    if cli.catalog.is_some() {
        config.catalog = cli.catalog.clone();
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = build_config(&cli).map_err(Failure::Config)?;

    if let Some(name) = &cli.scenario {
        let scenario: Scenario = name.parse().map_err(|e| Failure::Config(anyhow::Error::new(e)))?;
        println!("scenario,algorithm,completion_pct,decision_time_s");
        for &algo in &config.algorithms {
            let report = run_scenario(scenario, algo, &config, cli.batch)
                .map_err(|e| Failure::Run(e.into()))?;
            println!(
                "{},{},{:.2},{:.6}",
                report.scenario, report.algorithm, report.completion_pct, report.decision_time
            );
        }
        return Ok(());
    }

    let result = match &cli.sweep {
        Some(spec) => {
            let sweep: Sweep = spec.parse().map_err(|e| Failure::Config(anyhow::Error::new(e)))?;
            for &v in &sweep.values {
                sweep.apply(&config, v).validate().map_err(|e| Failure::Config(e.into()))?;
            }
            run_sweep(&config, &sweep)
        }
        None => run_experiment(&config),
    }
    .map_err(|e| Failure::Run(e.into()))?;

    write_outputs(&result, &config, &config.output.dir).map_err(|e| Failure::Run(e.into()))?;
    for a in result.aggregates.iter().filter(|a| a.statistic == qflow_core::experiment::Statistic::Mean) {
        println!(
            "{} batch={} nodes={} tasks={} rho_q={}: completion {:.2}%, fidelity {:.4}, exec {:.4}s, comm {:.4}",
            a.algorithm,
            a.batch,
            a.nodes,
            a.tasks_per_group,
            a.rho_q,
            a.completion_pct,
            a.avg_fidelity,
            a.execution_time,
            a.comm_overhead
        );
    }
    println!("wrote {}", config.output.dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
