use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use idsfeat_core::pipeline::{GuardPolicy, PhaseResult};
use idsfeat_core::synth;
use serde_json::Value;

fn idsfeat(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idsfeat"))
        .args(args)
        .env("IDSFEAT_OUT", out)
        .output()
        .expect("binary runs")
}

fn kdd_file(dir: &Path, seed: u64, rows: usize) -> PathBuf {
    let p = dir.join(format!("kdd_{seed}.csv"));
    fs::write(&p, synth::kdd_like_csv(seed, rows)).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn small_config(dir: &Path, train: &Path, stages: &[u8]) -> PathBuf {
    let cfg = serde_json::json!({
        "version": 1,
        "train": train,
        "out": dir.join("run"),
        "seed": 3,
        "stages": stages,
        "search": {"pso": {"swarm": 8, "iterations": 10}, "genetic": {"population": 8, "generations": 8}},
        "models": {
            "final_model": {"kind": "tree", "min_leaf": 2},
            "loop_model": {"kind": "naive_bayes"},
            "compare": [{"kind": "naive_bayes"}, {"kind": "tree"}]
        },
        "cv": {"k": 3}
    });
    let p = dir.join("config.json");
    fs::write(&p, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    p
}

#[test]
fn prep_writes_dedup_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let train = kdd_file(dir.path(), 1, 1500);
    let out = dir.path().join("out");
    let o = idsfeat(&["prep", "--train", train.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stats = read_json(&out.join("stats.json"));
    let after = stats["train"]["dedup"]["total"]["after_count"].as_u64().unwrap();
    let before = stats["train"]["dedup"]["total"]["before_count"].as_u64().unwrap();
    assert_eq!(before, 1500);
    assert!(after < before);
    let lines = fs::read_to_string(out.join("dedup.csv")).unwrap().lines().count() as u64;
    assert_eq!(lines, after);
    for f in ["class_dos.csv", "class_probe.csv", "class_r2l.csv", "class_u2r.csv", "dos_probe.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("NORMAL"));
}

#[test]
fn prep_single_class_counts_class_plus_normal() {
    let dir = tempfile::tempdir().unwrap();
    let train = kdd_file(dir.path(), 2, 800);
    let out = dir.path().join("out");
    let o = idsfeat(&["prep", "--train", train.to_str().unwrap(), "--class", "DOS"], &out);
    assert!(o.status.success());
    let stats = read_json(&out.join("stats.json"));
    let count = |i: usize| stats["train"]["dedup"]["classes"][i]["after_count"].as_u64().unwrap();
    let rows = fs::read_to_string(out.join("class_dos.csv")).unwrap().lines().count() as u64;
    assert_eq!(rows, count(0) + count(1));
    assert!(!out.join("class_probe.csv").exists());
}

#[test]
fn missing_input_exits_two_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = idsfeat(&["prep", "--train", "/nonexistent/kdd.csv"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn malformed_input_exits_one_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "0,tcp,http,SF,1,2\n").unwrap();
    let o = idsfeat(&["prep", "--train", bad.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn gzip_input_matches_plain() {
    use std::io::Write;
    let dir = tempfile::tempdir().unwrap();
    let plain = kdd_file(dir.path(), 4, 300);
    let gz = dir.path().join("kdd.csv.gz");
    let mut enc = flate2::write::GzEncoder::new(fs::File::create(&gz).unwrap(), flate2::Compression::fast());
    enc.write_all(&fs::read(&plain).unwrap()).unwrap();
    enc.finish().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(idsfeat(&["prep", "--train", plain.to_str().unwrap()], &a).status.success());
    assert!(idsfeat(&["prep", "--train", gz.to_str().unwrap()], &b).status.success());
    assert_eq!(fs::read(a.join("dedup.csv")).unwrap(), fs::read(b.join("dedup.csv")).unwrap());
}

#[test]
fn unknown_search_method_exits_two_and_lists_methods() {
    let dir = tempfile::tempdir().unwrap();
    let train = kdd_file(dir.path(), 5, 200);
    let o = idsfeat(
        &["search", "--data", train.to_str().unwrap(), "--methods", "annealing"],
        &dir.path().join("out"),
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("best_first") && err.contains("tabu"), "{err}");
}

#[test]
fn search_is_deterministic_and_single_cell_works() {
    let dir = tempfile::tempdir().unwrap();
    let train = kdd_file(dir.path(), 6, 1200);
    let data = train.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = idsfeat(&["search", "--data", data, "--methods", "all", "--seed", "42"], out);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["grid.json", "grid.csv", "aggregate.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(a.join("grid.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "method,All,DOS,PROBE,R2L,U2R,union");
    assert_eq!(csv.lines().count(), 8);

    let c = dir.path().join("c");
    let o = idsfeat(&["search", "--data", data, "--methods", "greedy", "--dataset", "DOS"], &c);
    assert!(o.status.success());
    let grid = read_json(&c.join("grid.json"));
    assert_eq!(grid["cells"].as_array().unwrap().len(), 1);
}

#[test]
fn evaluate_rejects_bad_features_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let train = kdd_file(dir.path(), 7, 900);
    let data = train.to_str().unwrap();
    let out = dir.path().join("out");
    let o = idsfeat(&["evaluate", "--data", data, "--features", "0,5"], &out);
    assert_eq!(o.status.code(), Some(2));
    let o = idsfeat(&["evaluate", "--data", data, "--features", "44"], &out);
    assert_eq!(o.status.code(), Some(2));

    let run = |out: &Path| {
        let o = idsfeat(
            &["evaluate", "--data", data, "--features", "1,3,5,23", "--cv", "5", "--seed", "7", "--model", "tree"],
            out,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&a);
    run(&b);
    for f in ["metrics_selected.json", "confusion_selected.csv", "plot_selected.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(a.join("timings_selected.json").exists());
    let plot = fs::read_to_string(a.join("plot_selected.csv")).unwrap();
    assert!(plot.starts_with("class,metric,feature_set,value\n"));
}

#[test]
fn select_with_explicit_start_set() {
    let dir = tempfile::tempdir().unwrap();
    let train = kdd_file(dir.path(), 8, 900);
    let data = train.to_str().unwrap();
    let out = dir.path().join("out");
    assert!(idsfeat(&["search", "--data", data, "--seed", "1"], &out).status.success());
    let o = idsfeat(
        &[
            "select", "--data", data, "--strategy", "add", "--start-set", "5,29,39",
            "--cv", "3", "--loop-model", "nb", "--model", "tree",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace: PhaseResult = serde_json::from_str(&fs::read_to_string(out.join("trace_add.json")).unwrap()).unwrap();
    assert_eq!(trace.trace.start.indices(), vec![5, 29, 39]);
    assert_eq!(trace.trace.replay(), trace.set);
    let fin = read_json(&out.join("final_set.json"));
    assert_eq!(fin["winner_phase"], "add");
    assert!(!out.join("trace_delete.json").exists());
}

#[test]
fn select_both_names_winner_and_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let train = kdd_file(dir.path(), 9, 900);
    let data = train.to_str().unwrap();
    let out = dir.path().join("out");
    assert!(idsfeat(&["search", "--data", data, "--seed", "1"], &out).status.success());
    let o = idsfeat(
        &["select", "--data", data, "--cv", "3", "--loop-model", "nb", "--model", "nb"],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fin = read_json(&out.join("final_set.json"));
    assert!(fin["winner"].is_object());
    assert_eq!(fin["candidates"].as_array().unwrap().len(), 2);
    for f in ["trace_reduce.json", "trace_add.json", "trace_delete.json"] {
        let p: PhaseResult = serde_json::from_str(&fs::read_to_string(out.join(f)).unwrap()).unwrap();
        assert_eq!(p.trace.replay(), p.set, "{f}");
        assert!(p.trace.guard_holds(&GuardPolicy::default()), "{f}");
    }
    let csv = fs::read_to_string(out.join("final_set.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn pipeline_manifest_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let train = kdd_file(dir.path(), 10, 1200);
    let cfg = small_config(dir.path(), &train, &[1, 2, 3, 4]);
    let run_dir = dir.path().join("run");
    let o = idsfeat(&["pipeline", cfg.to_str().unwrap()], &run_dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read(run_dir.join("manifest.json")).unwrap();
    let o = idsfeat(&["pipeline", cfg.to_str().unwrap()], &run_dir);
    assert!(o.status.success());
    assert_eq!(first, fs::read(run_dir.join("manifest.json")).unwrap());

    let m: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(m["stages_completed"], serde_json::json!([1, 2, 3, 4]));
    let names: Vec<&str> = m["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["path"].as_str().unwrap())
        .collect();
    for f in ["stats.json", "grid.json", "trace_reduce.json", "trace_add.json", "trace_delete.json", "final_set.json", "metrics_best.json", "metrics_all.json", "classifiers.json"] {
        assert!(names.contains(&f), "{f} missing from manifest");
    }
    for a in m["artifacts"].as_array().unwrap() {
        let bytes = fs::read(run_dir.join(a["path"].as_str().unwrap())).unwrap();
        use sha2::Digest;
        assert_eq!(hex::encode(sha2::Sha256::digest(&bytes)), a["sha256"].as_str().unwrap());
    }
}

#[test]
fn pipeline_config_hash_matches_canonical_serialization() {
    let dir = tempfile::tempdir().unwrap();
    let train = kdd_file(dir.path(), 11, 400);
    let cfg = small_config(dir.path(), &train, &[1]);
    let run_dir = dir.path().join("run");
    assert!(idsfeat(&["pipeline", cfg.to_str().unwrap()], &run_dir).status.success());
    let m = read_json(&run_dir.join("manifest.json"));
    let canonical = fs::read(run_dir.join("config.canonical.json")).unwrap();
    use sha2::Digest;
    assert_eq!(m["config_hash"].as_str().unwrap(), hex::encode(sha2::Sha256::digest(&canonical)));
    // the canonical form holds the file's settings plus the defaults
    let v: Value = serde_json::from_slice(&canonical).unwrap();
    assert_eq!(v["seed"], 3);
    assert_eq!(v["cv"]["k"], 3);
    assert_eq!(v["selection"]["q"], 10);
    assert_eq!(m["seed"], 3);
}

#[test]
fn pipeline_partial_stages_leave_later_artifacts_absent() {
    let dir = tempfile::tempdir().unwrap();
    let train = kdd_file(dir.path(), 12, 600);
    let cfg = small_config(dir.path(), &train, &[1, 2]);
    let run_dir = dir.path().join("run");
    let o = idsfeat(&["pipeline", cfg.to_str().unwrap()], &run_dir);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(run_dir.join("dedup.csv").exists());
    assert!(run_dir.join("classifiers.json").exists());
    for f in ["grid.json", "trace_add.json", "final_set.json", "metrics_best.json"] {
        assert!(!run_dir.join(f).exists(), "{f}");
    }
}

#[test]
fn pipeline_stage_four_alone_needs_stage_three_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let train = kdd_file(dir.path(), 13, 300);
    let cfg = small_config(dir.path(), &train, &[4]);
    let o = idsfeat(&["pipeline", cfg.to_str().unwrap()], &dir.path().join("run"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    fs::write(&p, r#"{"version": 9, "train": "x.csv"}"#).unwrap();
    let o = idsfeat(&["pipeline", p.to_str().unwrap()], &dir.path().join("run"));
    assert_eq!(o.status.code(), Some(2));
}
