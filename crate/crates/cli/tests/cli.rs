use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn profile(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_profile"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_spec(dir: &Path, per_class: usize) -> String {
    let path = dir.join("spec.json");
    let spec = format!(
        r#"{{"sphere": {per_class}, "satellited": {per_class}, "lobed": {per_class}, "rod": {per_class}, "seed": 5, "image_size": 96}}"#
    );
    fs::write(&path, spec).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn synthetic_run_writes_every_output() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), 15);
    let out = tmp.path().join("out");
    let o = profile(&[
        "run",
        "--synthetic",
        &spec,
        "--descriptor",
        "fd10",
        "--clusterer",
        "kmeans",
        "--k",
        "2",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "report.json",
        "particles.csv",
        "model.json",
        "scatter.svg",
        "boxplots.svg",
        "montage.svg",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["n_particles"], 60);
    assert_eq!(report["k"], 2);
    let shares: f64 = report["shares"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .sum();
    assert!((shares - 1.0).abs() < 1e-12);
    assert!(report["ari_vs_truth"].is_number());

    let csv = fs::read_to_string(out.join("particles.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("particle_id,source,area,perimeter,circularity,aspect_ratio,fd_m5"));
    assert!(header.ends_with("fd_p5,cluster,truth"));
    assert_eq!(lines.count(), 60);

    let boxes = fs::read_to_string(out.join("boxplots.svg")).unwrap();
    assert_eq!(boxes.matches("<g class=\"box\"").count(), 4);
    let model = read_json(&out.join("model.json"));
    assert_eq!(model["model"]["kind"], "kmeans");
}

#[test]
fn synth_export_then_directory_run() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), 13);
    let masks = tmp.path().join("masks");
    let o = profile(&["synth", "--spec", &spec, "--out", masks.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let labels = fs::read_to_string(masks.join("labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 1 + 52);

    fs::write(masks.join("notes.png"), b"not an image").unwrap();
    let out = tmp.path().join("out");
    let o = profile(&[
        "run",
        "--input",
        masks.to_str().unwrap(),
        "--descriptor",
        "zm12",
        "--clusterer",
        "gmm",
        "--k",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["n_particles"], 52);
    let skipped = report["skipped"].as_array().unwrap();
    assert_eq!(skipped.len(), 1);
    assert!(skipped[0]["source"].as_str().unwrap().ends_with("notes.png"));
}

#[test]
fn empty_directory_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let o = profile(&[
        "run",
        "--input",
        tmp.path().to_str().unwrap(),
        "--descriptor",
        "cdf100",
        "--clusterer",
        "kmeans",
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), 5);
    // descriptor missing entirely
    let o = profile(&["run", "--synthetic", &spec, "--clusterer", "kmeans"]);
    assert_eq!(code(&o), 2);
    // unknown key in a config file
    let cfg = tmp.path().join("bad.json");
    fs::write(
        &cfg,
        r#"{"descriptor": "fd10", "clusterer": "kmeans", "colour": "red"}"#,
    )
    .unwrap();
    let o = profile(&["run", "--config", cfg.to_str().unwrap(), "--synthetic", &spec]);
    assert_eq!(code(&o), 2);
    // functional descriptors only go with gpmix
    let o = profile(&[
        "run",
        "--synthetic",
        &spec,
        "--descriptor",
        "functional",
        "--clusterer",
        "kmeans",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), 13);
    let cfg = tmp.path().join("run.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"synthetic": "{}", "descriptor": "cdf100", "clusterer": "kmeans", "k": 3, "seed": 1}}"#,
            spec.replace('\\', "\\\\")
        ),
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = profile(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--descriptor",
        "fd10",
        "--k",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["config"]["descriptor"], "fd10");
    assert_eq!(report["k"], 2);
    assert_eq!(report["config"]["seed"], 1);
}

#[test]
fn reruns_are_identical_apart_from_timings() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), 13);
    let mut reports = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let o = profile(&[
            "run",
            "--synthetic",
            &spec,
            "--descriptor",
            "fd10",
            "--clusterer",
            "kmeans",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let mut r = read_json(&out.join("report.json"));
        r.as_object_mut().unwrap().remove("timings");
        // the output directory is the one intended difference
        r["config"].as_object_mut().unwrap().remove("out");
        reports.push(r);
        assert_eq!(
            fs::read(out.join("model.json")).unwrap(),
            fs::read(tmp.path().join("a").join("model.json")).unwrap()
        );
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn bench_writes_table_files() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), 13);
    let out = tmp.path().join("bench");
    let o = profile(&[
        "bench",
        "--synthetic",
        &spec,
        "--descriptor",
        "fd10",
        "--clusterer",
        "kmeans",
        "--descriptors",
        "fd10,zm12",
        "--repeats",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("bench.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("fd10,kmeans,4,52,2,"));
    assert!(lines[2].starts_with("zm12,kmeans,4,52,2,"));
    let rows = read_json(&out.join("bench.json"));
    assert_eq!(rows.as_array().unwrap().len(), 2);
}

#[test]
fn too_few_particles_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), 5);
    let o = profile(&[
        "run",
        "--synthetic",
        &spec,
        "--descriptor",
        "fd10",
        "--clusterer",
        "kmeans",
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("too few particles"));
}
