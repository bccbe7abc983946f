mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use legnet::pipeline::{
    rerender_report, run, verify_manifest, ErgmSettings, RunConfig, SbmSettings, Stage, MANIFEST, SUMMARY,
};

fn config(dir: &Path, out: &str, attrs: bool) -> RunConfig {
    let (edges, attrs_path, _) = common::synthetic_dataset(dir, 40, 11);
    RunConfig {
        edges: Some(edges),
        attributes: attrs.then_some(attrs_path),
        out: Some(dir.join(out)),
        seed: 5,
        party_reassignment: BTreeMap::from([("M039".to_string(), "Democrat".to_string())]),
        sbm: SbmSettings {
            q_min: 1,
            q_max: 5,
            restarts: 3,
            ..SbmSettings::default()
        },
        ..RunConfig::default()
    }
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for f in legnet::pipeline::scan_outputs(root).unwrap() {
        out.insert(f.path.clone(), fs::read(root.join(&f.path)).unwrap());
    }
    out.insert(MANIFEST.into(), fs::read(root.join(MANIFEST)).unwrap());
    out
}

#[test]
fn full_run_writes_a_consistent_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = run(&config(dir.path(), "out", true)).unwrap();
    let root = &bundle.root;
    for f in [
        "ingest/census.json",
        "exports/graph.graphml",
        "exports/graph.dot",
        "topology/centrality.csv",
        "topology/connectivity.csv",
        "topology/group_density.csv",
        "assortativity/assortativity.csv",
        "ergm/model1.csv",
        "ergm/model6.json",
        "ergm/comparison.csv",
        "sbm/icl_curve.csv",
        "sbm/pi.csv",
        "sbm/membership.csv",
        "sbm/communities.csv",
        "score/scores.csv",
        SUMMARY,
    ] {
        assert!(root.join(f).is_file(), "{f} missing");
    }
    let manifest = verify_manifest(root).unwrap();
    assert_eq!(manifest.seed, 5);
    assert_eq!(manifest.inputs.len(), 2);
    assert_eq!(bundle.results.ergm.len(), 6);
    assert!(bundle.results.scores.as_ref().unwrap().get("party").is_some());

    let summary = fs::read_to_string(root.join(SUMMARY)).unwrap();
    for f in summary.lines().filter_map(|l| l.strip_prefix("- [")).map(|l| l.split(']').next().unwrap()) {
        assert!(root.join(f).is_file(), "summary links missing {f}");
    }
    assert!(summary.contains("## Partition agreement"));

    // Re-rendering reproduces the same summary and manifest.
    let before = read_tree(root);
    rerender_report(root).unwrap();
    let after = read_tree(root);
    let differing: Vec<&String> = before.keys().filter(|k| before[*k] != after[*k]).collect();
    assert!(differing.is_empty(), "{differing:?}");
}

#[test]
fn seeded_runs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = config(dir.path(), "a", true);
    a.threads = Some(1);
    let mut b = config(dir.path(), "b", true);
    b.threads = Some(4);
    run(&a).unwrap();
    run(&b).unwrap();
    let (ta, tb) = (read_tree(&dir.path().join("a")), read_tree(&dir.path().join("b")));
    assert_eq!(ta.keys().collect::<Vec<_>>(), tb.keys().collect::<Vec<_>>());
    for (k, v) in &ta {
        assert!(v == &tb[k], "{k} differs");
    }
}

#[test]
fn topology_without_attributes_skips_with_notice() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path(), "out", false);
    c.stages = vec![Stage::Topology, Stage::Assortativity];
    let bundle = run(&c).unwrap();
    let root = &bundle.root;
    assert!(root.join("topology/centrality.csv").is_file());
    assert!(root.join("topology/connectivity.csv").is_file());
    assert!(!root.join("topology/group_density.csv").exists());
    assert!(!root.join("ergm").exists());
    let report = bundle.results.assortativity.unwrap();
    assert!(report.get("party").is_none());
    assert!(report.entries.iter().any(|e| e.variable == "eigen"));
    assert!(bundle.manifest.notices.iter().any(|n| n.contains("attribute assortativity skipped")));
}

#[test]
fn missing_attribute_file_disables_dependent_stages() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path(), "out", false);
    c.attributes = Some(dir.path().join("absent.csv"));
    c.ergm = ErgmSettings {
        models: vec!["model1".into(), "model4".into()],
        ..ErgmSettings::default()
    };
    let bundle = run(&c).unwrap();
    assert_eq!(bundle.results.ergm.len(), 1);
    assert!(bundle.results.scores.is_none());
    let notices = bundle.manifest.notices.join("\n");
    assert!(notices.contains("absent.csv"));
    assert!(notices.contains("model4 skipped"));
    assert!(notices.contains("partition scores skipped"));
}

#[test]
fn centrality_models_force_topology() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path(), "out", true);
    c.stages = vec![Stage::Ergm];
    c.ergm.models = vec!["model3".into()];
    let bundle = run(&c).unwrap();
    assert!(bundle.results.stages.contains(&Stage::Topology));
    assert!(bundle.root.join("topology/centrality.csv").is_file());
}

#[test]
fn invalid_seed_is_a_config_error() {
    let err = RunConfig::from_json(r#"{"seed": -3}"#).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
