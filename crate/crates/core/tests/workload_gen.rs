mod common;

use std::io::Write;
use std::path::Path;

use common::ghz;
use qflow_core::profiles::CalibrationProfile;
use qflow_core::workload::{
    export_workload, generate_network, generate_workload, import_task_catalog, import_workload,
    read_task_catalog, write_task_catalog, TaskSource, TopologySpec, WorkloadSpec,
};
use qflow_core::{ModelError, WorkloadError};

fn topology(node_count: usize, link_probability: f64, seed: u64) -> TopologySpec {
    TopologySpec {
        node_count,
        link_probability,
        seed,
        ..TopologySpec::default()
    }
}

fn connected(net: &qflow_core::ResourceNetwork) -> bool {
    let mut seen = vec![false; net.len()];
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        if !std::mem::replace(&mut seen[v], true) {
            stack.extend(net.neighbors(v).iter().copied());
        }
    }
    seen.into_iter().all(|s| s)
}

#[test]
fn networks_are_connected_at_any_density() {
    let profiles = CalibrationProfile::bundled();
    for seed in 0..200 {
        for rho in [0.0, 0.05, 0.3, 0.9] {
            let n = 1 + (seed as usize % 20);
            let net = generate_network(&topology(n, rho, seed), &profiles).unwrap();
            assert_eq!(net.len(), n);
            assert!(connected(&net), "seed {seed} rho {rho}");
            if rho == 0.0 {
                assert_eq!(net.link_count(), n - 1);
            }
        }
    }
}

#[test]
fn full_probability_gives_complete_graph() {
    let net = generate_network(&topology(9, 1.0, 3), &CalibrationProfile::bundled()).unwrap();
    assert_eq!(net.link_count(), 36);
}

#[test]
fn network_replays_under_fixed_seed() {
    let profiles = CalibrationProfile::bundled();
    let a = generate_network(&topology(5, 0.4, 11), &profiles).unwrap();
    let b = generate_network(&topology(5, 0.4, 11), &profiles).unwrap();
    assert_eq!(a.links().collect::<Vec<_>>(), b.links().collect::<Vec<_>>());
    assert_eq!(a.nodes, b.nodes);
}

#[test]
fn profile_draws_cover_the_pool() {
    let net = generate_network(&topology(60, 0.1, 5), &CalibrationProfile::bundled()).unwrap();
    for name in ["brisbane", "torino", "marrakesh"] {
        assert!(net.nodes.iter().any(|n| n.profile == name), "{name} never drawn");
    }
}

#[test]
fn workloads_respect_their_spec() {
    for seed in 0..50 {
        let spec = WorkloadSpec {
            batch_size: 40,
            tasks_per_group: 1 + seed as usize % 5,
            seed,
            ..WorkloadSpec::default()
        };
        let wl = generate_workload(&spec, TaskSource::ClosedForm).unwrap();
        assert_eq!(wl.len(), 40);
        let mut last = 0.0;
        for wf in &wl {
            assert!(wf.arrival_time >= last);
            last = wf.arrival_time;
            assert!((1..=spec.tasks_per_group).contains(&wf.tasks.len()));
            assert!(wf.topological_order().is_some());
            assert!(wf.edges.len() >= wf.tasks.len() - 1);
            for t in &wf.tasks {
                t.validate().unwrap();
                assert!((5..=100).contains(&t.qubits));
            }
        }
    }
}

#[test]
fn single_task_groups_have_no_edges() {
    let spec = WorkloadSpec {
        tasks_per_group: 1,
        ..WorkloadSpec::default()
    };
    let wl = generate_workload(&spec, TaskSource::ClosedForm).unwrap();
    assert!(wl.iter().all(|w| w.tasks.len() == 1 && w.edges.is_empty()));
}

#[test]
fn infinite_rate_is_a_simultaneous_batch() {
    let spec = WorkloadSpec {
        arrival_rate: Some(f64::INFINITY),
        ..WorkloadSpec::default()
    };
    let wl = generate_workload(&spec, TaskSource::ClosedForm).unwrap();
    assert!(wl.iter().all(|w| w.arrival_time == 0.0));
}

#[test]
fn default_rate_spans_about_ten_seconds() {
    let spec = WorkloadSpec {
        batch_size: 2000,
        ..WorkloadSpec::default()
    };
    let wl = generate_workload(&spec, TaskSource::ClosedForm).unwrap();
    let span = wl.last().unwrap().arrival_time;
    assert!((9.0..11.0).contains(&span), "span {span}");
}

#[test]
fn workload_export_is_byte_stable_and_round_trips() {
    let spec = WorkloadSpec {
        seed: 99,
        ..WorkloadSpec::default()
    };
    let render = || {
        let wl = generate_workload(&spec, TaskSource::ClosedForm).unwrap();
        let mut buf = Vec::new();
        export_workload(&wl, &mut buf).unwrap();
        (wl, buf)
    };
    let (wl, first) = render();
    let (_, second) = render();
    assert_eq!(first, second);
    assert_eq!(import_workload(first.as_slice()).unwrap(), wl);
}

#[test]
fn catalog_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalog.csv");
    let tasks = vec![ghz("ghz5", 5), ghz("ghz40", 40)];
    write_task_catalog(&tasks, std::fs::File::create(&path).unwrap()).unwrap();
    assert_eq!(import_task_catalog(&path).unwrap(), tasks);
}

#[test]
fn header_only_catalog_is_empty() {
    let mut buf = Vec::new();
    write_task_catalog(&[], &mut buf).unwrap();
    assert_eq!(read_task_catalog(buf.as_slice(), Path::new("mem")).unwrap(), vec![]);
    let err = generate_workload(&WorkloadSpec::default(), TaskSource::Catalog(&[])).unwrap_err();
    assert!(matches!(err, WorkloadError::EmptyCatalog { lo: 5, hi: 100 }));
}

#[test]
fn invalid_catalog_rows_report_line_and_field() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "id,family,qubits,depth,two_qubit_gates,measured_qubits,shots").unwrap();
    writeln!(file, "ok,ghz,5,6,4,5,1000").unwrap();
    writeln!(file, "bad,ghz,5,6,4,7,1000").unwrap();
    let err = import_task_catalog(file.path()).unwrap_err();
    match err {
        WorkloadError::Invalid {
            line,
            source: ModelError::InvalidTask { field, .. },
            ..
        } => assert_eq!((line, field), (3, "measured_qubits")),
        other => panic!("unexpected {other:?}"),
    }

    let garbled = "id,family,qubits,depth,two_qubit_gates,measured_qubits,shots\nx,ghz,five,6,4,5,1\n";
    assert!(matches!(
        read_task_catalog(garbled.as_bytes(), Path::new("mem")),
        Err(WorkloadError::Parse { line: 2, .. })
    ));
    let unknown = "id,family,qubits,depth,two_qubit_gates,measured_qubits,shots\nx,teleport,5,6,4,5,1\n";
    assert!(read_task_catalog(unknown.as_bytes(), Path::new("mem")).is_err());
}

#[test]
fn catalog_source_samples_within_the_qubit_range() {
    let catalog = vec![ghz("small", 3), ghz("mid", 50), ghz("huge", 140)];
    let spec = WorkloadSpec {
        batch_size: 30,
        ..WorkloadSpec::default()
    };
    let wl = generate_workload(&spec, TaskSource::Catalog(&catalog)).unwrap();
    assert!(wl.iter().flat_map(|w| &w.tasks).all(|t| t.qubits == 50));
}
