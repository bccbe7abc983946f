mod common;

use std::path::Path;
use std::process::{Command, Output};

fn legnet(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_legnet"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn subcommands_write_their_stage_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::synthetic_dataset(d, 30, 3);

    let o = legnet(&["topology", "--edges", "edges.csv", "--out", "topo"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("topo/topology/centrality.csv").is_file());
    assert!(!d.join("topo/sbm").exists());

    let o = legnet(
        &["sbm", "--edges", "edges.csv", "--attrs", "attrs.csv", "--out", "blocks", "--q-range", "1:3", "--restarts", "2", "--threads", "2"],
        d,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("blocks/sbm/icl_curve.csv").is_file());
    let curve = std::fs::read_to_string(d.join("blocks/sbm/icl_curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 4);

    let o = legnet(&["ergm", "--edges", "edges.csv", "--attrs", "attrs.csv", "--out", "models", "--models", "model1,model2"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("models/ergm/model2.csv").is_file());
    assert!(!d.join("models/ergm/model3.csv").exists());

    std::fs::remove_file(d.join("models/summary.md")).unwrap();
    let o = legnet(&["report", "--out", "models"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("models/summary.md").is_file());
    legnet::pipeline::verify_manifest(&d.join("models")).unwrap();
}

#[test]
fn run_from_config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::synthetic_dataset(d, 30, 4);
    std::fs::write(
        d.join("run.json"),
        r#"{"edges": "edges.csv", "attributes": "attrs.csv", "out": "bundle", "seed": 9,
            "ergm": {"models": ["model1", "model6"]}, "sbm": {"q_max": 3, "restarts": 2}}"#,
    )
    .unwrap();
    let o = legnet(&["run", "--config", "run.json", "--seed", "12"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = legnet::pipeline::verify_manifest(&d.join("bundle")).unwrap();
    assert_eq!(m.seed, 12);
    assert!(d.join("bundle/score/scores.csv").is_file());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::synthetic_dataset(d, 12, 5);

    // Configuration errors.
    std::fs::write(d.join("bad.json"), r#"{"edges": "edges.csv", "seed": "seven"}"#).unwrap();
    assert_eq!(code(&legnet(&["run", "--config", "bad.json", "--out", "x"], d)), 2);
    assert_eq!(code(&legnet(&["run", "--edges", "nope.csv", "--out", "x"], d)), 2);
    assert_eq!(code(&legnet(&["run", "--edges", "edges.csv"], d)), 2);
    assert_eq!(code(&legnet(&["sbm", "--edges", "edges.csv", "--out", "x", "--q-range", "3:1"], d)), 2);
    assert_eq!(code(&legnet(&["ergm", "--edges", "edges.csv", "--out", "x", "--models", "model9"], d)), 2);
    assert!(!d.join("x").exists(), "nothing is written before validation passes");

    // Data errors.
    std::fs::write(d.join("loop.csv"), "source,target,weight\na,a,0.5\n").unwrap();
    assert_eq!(code(&legnet(&["ingest", "--edges", "loop.csv", "--out", "y"], d)), 3);
    std::fs::write(d.join("attrs_bad.csv"), "node_id,party\nM000,Green\n").unwrap();
    assert_eq!(code(&legnet(&["ingest", "--edges", "edges.csv", "--attrs", "attrs_bad.csv", "--out", "y"], d)), 3);

    // Estimation failure: the power iteration is not allowed to converge.
    std::fs::write(
        d.join("tight.json"),
        r#"{"edges": "edges.csv", "out": "z", "power": {"max_iter": 1, "tolerance": 1e-300}}"#,
    )
    .unwrap();
    assert_eq!(code(&legnet(&["topology", "--config", "tight.json"], d)), 4);

    assert_eq!(code(&legnet(&["ingest", "--edges", "edges.csv", "--out", "ok"], d)), 0);
}
