use std::process::{Command, Output};

fn koutcube(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_koutcube"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn koutcube_with_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_koutcube"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn components_emits_one_record_per_trial() {
    let out = koutcube(&[
        "components", "--n", "10", "--k", "2", "--trials", "5", "--seed", "7", "--format", "jsonl",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    for (i, line) in lines.iter().enumerate() {
        let value: serde_json::Value = serde_json::from_str(line).expect("valid json");
        assert_eq!(value["n"], 10);
        assert_eq!(value["k"], 2);
        assert_eq!(value["trial"], i as u64);
        assert!(value["metrics"]["component_count"].is_number());
    }
}

#[test]
fn golden_stability_and_seed_sensitivity() {
    let args = [
        "cycles", "--n", "8", "--trials", "4", "--seed", "99", "--format", "jsonl",
    ];
    let a = koutcube(&args);
    let b = koutcube(&args);
    assert_eq!(a.stdout, b.stdout, "same invocation must be byte-identical");
    let c = koutcube(&[
        "cycles", "--n", "8", "--trials", "4", "--seed", "100", "--format", "jsonl",
    ]);
    assert_ne!(a.stdout, c.stdout, "seed must steer the output");
}

#[test]
fn thread_count_does_not_change_output() {
    let one = koutcube(&[
        "components", "--n", "9", "--k", "1", "--trials", "8", "--seed", "5", "--threads", "1",
    ]);
    let four = koutcube(&[
        "components", "--n", "9", "--k", "1", "--trials", "8", "--seed", "5", "--threads", "4",
    ]);
    let via_env = koutcube_with_env(
        &["components", "--n", "9", "--k", "1", "--trials", "8", "--seed", "5"],
        "KOUTCUBE_THREADS",
        "2",
    );
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, via_env.stdout);
}

#[test]
fn kconn_cap_refusal_exits_one() {
    let out = koutcube(&["kconn", "--n", "20", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("refused"), "stderr: {err}");
}

#[test]
fn kconn_small_reports_kappa() {
    let out = koutcube(&[
        "kconn", "--n", "6", "--k", "3", "--trials", "2", "--seed", "3",
    ]);
    assert!(out.status.success());
    for line in stdout_str(&out).lines() {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(value["metrics"]["kappa"].as_f64().unwrap() >= 0.0);
        assert!(value["metrics"]["connected"].is_number());
    }
}

#[test]
fn usage_errors_exit_two() {
    let bad_dim = koutcube(&["components", "--n", "0", "--k", "1"]);
    assert_eq!(bad_dim.status.code(), Some(2));
    let bad_pair = koutcube(&["components", "--n", "4", "--k", "9"]);
    assert_eq!(bad_pair.status.code(), Some(2));
    let unknown_flag = koutcube(&["components", "--n", "4", "--k", "1", "--bogus"]);
    assert_eq!(unknown_flag.status.code(), Some(2));
    let err = String::from_utf8(bad_pair.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "one-line reason: {err}");
}

#[test]
fn walk_summary_meets_bound() {
    let out = koutcube(&["walk", "--n", "40"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(stdout_str(&out).trim()).unwrap();
    let hit = value["window_hit_probability"].as_f64().unwrap();
    assert!(hit <= 3.90625e-7, "window hit {hit}");
    assert_eq!(value["all_ok"], true);
}

#[test]
fn walk_csv_rows_have_expected_shape() {
    let out = koutcube(&["walk", "--n", "6", "--horizon", "6", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,state,mass"));
    assert_eq!(lines.next(), Some("0,0,1"));
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 3);
        let step: usize = fields[0].parse().unwrap();
        let state: usize = fields[1].parse().unwrap();
        assert_eq!((step + state) % 2, 0, "mass only on matching parity");
    }
}

#[test]
fn walk_mc_block_present_when_requested() {
    let out = koutcube(&["walk", "--n", "10", "--mc-runs", "2000", "--seed", "4"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(stdout_str(&out).trim()).unwrap();
    let mc = value["mc"].as_array().expect("mc block");
    assert_eq!(mc.len(), 5);
    for entry in mc {
        let dp = entry["dp"].as_f64().unwrap();
        let emp = entry["empirical"].as_f64().unwrap();
        assert!((dp - emp).abs() < 0.05);
    }
}

#[test]
fn sample_round_trips_through_file() {
    let dir = std::env::temp_dir().join(format!("koutcube-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sample.bin");
    let path_str = path.to_str().unwrap();
    let out = koutcube(&[
        "sample", "--n", "5", "--k", "2", "--seed", "11", "--out", path_str,
    ]);
    assert!(out.status.success());
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(bytes.len(), 8 + 4 + 4 + 8 + 4 * 32);
    assert_eq!(&bytes[..8], b"KOUTCUBE");
    let (sample, seed) = koutcube::sampler::KOutSample::read_from(&mut bytes.as_slice()).unwrap();
    assert_eq!(sample.n().get(), 5);
    assert_eq!(sample.k(), 2);
    assert_eq!(seed.master, 11);
    // stdout emission matches the file payload
    let streamed = koutcube(&["sample", "--n", "5", "--k", "2", "--seed", "11"]);
    assert_eq!(streamed.stdout, bytes);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn summarize_folds_record_stream() {
    let dir = std::env::temp_dir().join(format!("koutcube-cli-sum-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let records_path = dir.join("records.jsonl");
    let out = koutcube(&[
        "components", "--n", "8", "--k", "2", "--trials", "6", "--seed", "21",
    ]);
    std::fs::write(&records_path, &out.stdout).unwrap();
    let summary = koutcube(&["summarize", "--input", records_path.to_str().unwrap()]);
    assert!(summary.status.success());
    let text = stdout_str(&summary);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,k,metric,mean,std,wilson_lo,wilson_hi,min,max,count")
    );
    let body: Vec<&str> = lines.collect();
    assert!(body.iter().any(|l| l.starts_with("8,2,component_count,")));
    assert!(body.iter().all(|l| l.ends_with(",6")));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn summarize_rejects_garbage() {
    let dir = std::env::temp_dir().join(format!("koutcube-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.jsonl");
    std::fs::write(&path, "this is not a record\n").unwrap();
    let out = koutcube(&["summarize", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_labels_thresholds() {
    let out = koutcube(&[
        "sweep", "--n", "8", "--k-min", "7", "--k-max", "8", "--trials", "10", "--seed", "2",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let last: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
    assert_eq!(last["k"], 8);
    assert_eq!(last["rate"], 1.0, "k = n always connects");
    assert!(last["k0"].is_number());
    assert_eq!(last["k1"], 1);
}

#[test]
fn cut_census_isolates_cube_vertex() {
    // k = n = 3 forces the full cube; removing vertex 0's neighbors isolates it
    let out = koutcube(&[
        "cut-census", "--n", "3", "--k", "3", "--seed", "5", "--remove", "1,2,4",
    ]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(stdout_str(&out).trim()).unwrap();
    let sets = value["sets"].as_array().unwrap();
    assert!(sets.iter().any(|s| s == &serde_json::json!([0])));
    assert_eq!(value["removed"], serde_json::json!([1, 2, 4]));
}

#[test]
fn subcube_scan_plant_recovers() {
    let out = koutcube(&[
        "subcube-scan", "--n", "8", "--k", "2", "--trials", "5", "--seed", "13", "--plant",
    ]);
    assert!(out.status.success());
    for line in stdout_str(&out).lines() {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(value["recovered"], true);
        assert_eq!(value["connected"], false);
    }
}

#[test]
fn subcube_scan_plain_counts_hits() {
    let out = koutcube(&[
        "subcube-scan", "--n", "6", "--k", "2", "--trials", "3", "--seed", "13",
    ]);
    assert!(out.status.success());
    for line in stdout_str(&out).lines() {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(value["metrics"]["subcube_hits"].is_number());
    }
}

#[test]
fn csv_format_has_stable_header() {
    let out = koutcube(&[
        "components", "--n", "6", "--k", "2", "--trials", "2", "--seed", "1", "--format", "csv",
    ]);
    let text = stdout_str(&out);
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "experiment,n,k,trial,seed,component_count,giant_fraction,second_fraction,Z_prime,connected"
    );
    assert_eq!(text.lines().count(), 3);
}
