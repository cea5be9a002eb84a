//! End-to-end checks of the command-line interface: file formats, exit
//! codes, byte-stable outputs, and the sweep selection rule.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn acmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acmix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_k22(dir: &Path) {
    fs::write(dir.join("edges.txt"), "0 2\n0 3\n1 2\n1 3\n").unwrap();
    fs::write(dir.join("labels.txt"), "0\n0\n1\n1\n").unwrap();
}

fn write_two_triangles(dir: &Path) {
    fs::write(
        dir.join("edges.txt"),
        "# two disjoint triangles\n0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n",
    )
    .unwrap();
    fs::write(dir.join("labels.txt"), "0\n0\n0\n1\n1\n1\n").unwrap();
}

#[test]
fn metrics_on_bipartite_fixture() {
    let dir = tempfile::tempdir().unwrap();
    write_k22(dir.path());
    let out = acmix(&[
        "metrics",
        "--edges",
        dir.path().join("edges.txt").to_str().unwrap(),
        "--labels",
        dir.path().join("labels.txt").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["h_edge"], 0.0);
    assert_eq!(report["h_node"], 0.0);
    assert_eq!(report["h_class"], 0.0);
    assert_eq!(report["h_agg"], 1.0);
    assert_eq!(report["h_agg_mod"], 1.0);
}

#[test]
fn metrics_on_homophilic_fixture_all_ones() {
    let dir = tempfile::tempdir().unwrap();
    write_two_triangles(dir.path());
    let out = acmix(&[
        "metrics",
        "--edges",
        dir.path().join("edges.txt").to_str().unwrap(),
        "--labels",
        dir.path().join("labels.txt").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for field in ["h_edge", "h_node", "h_class", "h_agg", "h_agg_mod", "dd_value"] {
        assert_eq!(report[field], 1.0, "{field}");
    }
}

#[test]
fn gen_writes_dataset_files_and_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let res = acmix(&[
            "gen",
            "--mode",
            "regular",
            "--h",
            "0.4",
            "--classes",
            "3",
            "--nodes-per-class",
            "20",
            "--d-intra",
            "3",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success());
    }
    for name in ["edges.txt", "labels.txt", "features.csv", "spec.json"] {
        let a = fs::read(out1.join(name)).unwrap();
        let b = fs::read(out2.join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn invalid_config_exits_with_code_2_before_work() {
    let dir = tempfile::tempdir().unwrap();
    // Both data sources set: must be rejected during validation.
    let cfg = serde_json::json!({
        "data": {
            "edges": "nonexistent.txt",
            "labels": "nonexistent.txt",
            "synth": {"mode": "regular", "h_edge_target": 0.5}
        },
        "model": {"family": "gcn"},
        "train": {}
    });
    let path = dir.path().join("cfg.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let out = acmix(&["train", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_data_file_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "data": {"edges": "no-such-file.txt", "labels": "no-such-file.txt"},
        "model": {"family": "gcn"},
        "train": {}
    });
    let path = dir.path().join("cfg.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let out = acmix(&["train", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

fn small_synth_config(runs: usize) -> serde_json::Value {
    serde_json::json!({
        "data": {
            "synth": {
                "mode": "regular",
                "h_edge_target": 0.8,
                "num_classes": 3,
                "nodes_per_class": 20,
                "d_intra": 3
            },
            "feature_dim": 16
        },
        "model": {"family": "sgc", "layers": 1},
        "train": {"lr": 0.05, "max_epochs": 60, "patience": 60},
        "runs": runs,
        "seed": 7
    })
}

#[test]
fn train_output_is_byte_stable_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, small_synth_config(1).to_string()).unwrap();
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    for out in [&out_a, &out_b] {
        let res = acmix(&[
            "train",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    assert_eq!(fs::read(&out_a).unwrap(), fs::read(&out_b).unwrap());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_a).unwrap()).unwrap();
    assert!(report["test_accuracy"].as_f64().unwrap() >= 0.0);
}

#[test]
fn sweep_singleton_grid_matches_train_and_picks_best_val() {
    let dir = tempfile::tempdir().unwrap();
    let base = small_synth_config(1);

    // Singleton grid reproduces the plain train result.
    let sweep_cfg = serde_json::json!({"base": base, "grid": {"lr": [0.05]}});
    let sweep_path = dir.path().join("sweep.json");
    fs::write(&sweep_path, sweep_cfg.to_string()).unwrap();
    let sweep_out = acmix(&["sweep", "--config", sweep_path.to_str().unwrap()]);
    assert!(sweep_out.status.success());
    let sweep: serde_json::Value = serde_json::from_slice(&sweep_out.stdout).unwrap();

    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, base.to_string()).unwrap();
    let train_out = acmix(&["train", "--config", cfg_path.to_str().unwrap()]);
    assert!(train_out.status.success());
    let train: serde_json::Value = serde_json::from_slice(&train_out.stdout).unwrap();
    assert_eq!(
        sweep["best"]["test_accuracy_mean"],
        train["test_accuracy"]
    );

    // Two-point grid: the reported best entry carries the higher mean
    // validation accuracy.
    let sweep_cfg = serde_json::json!({"base": base, "grid": {"lr": [0.05, 1e-6]}});
    fs::write(&sweep_path, sweep_cfg.to_string()).unwrap();
    let sweep_out = acmix(&["sweep", "--config", sweep_path.to_str().unwrap()]);
    assert!(sweep_out.status.success());
    let sweep: serde_json::Value = serde_json::from_slice(&sweep_out.stdout).unwrap();
    let best_val = sweep["best"]["val_accuracy_mean"].as_f64().unwrap();
    for entry in sweep["entries"].as_array().unwrap() {
        assert!(entry["val_accuracy_mean"].as_f64().unwrap() <= best_val);
    }
}

#[test]
fn curve_csv_has_expected_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let res = acmix(&[
        "curve",
        "--mode",
        "regular",
        "--models",
        "sgc1,mlp1",
        "--levels",
        "0.3,0.8",
        "--graphs-per-level",
        "2",
        "--classes",
        "3",
        "--nodes-per-class",
        "20",
        "--d-intra",
        "3",
        "--feature-dim",
        "16",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "h_edge,h_node,h_class,h_agg_mod,model,acc_mean,acc_std"
    );
    assert_eq!(lines.count(), 4); // 2 levels x 2 models
}
