use std::path::Path;
use std::process::{Command, Output};

fn spdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdc")).args(args).env_remove("SPDC_SEED").output().expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn twin_report_has_three_rows_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("twin.csv");
    let run = spdc(&["twin", "--gain-gl", "0.8814", "--reps", "1e5", "--eta", "1.0", "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let text = read(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "statistic,mc_value,mc_se,oracle,deviation_se,pass");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("mean,") && lines[2].starts_with("var,") && lines[3].starts_with("cov,"));
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for (p, threads) in paths.iter().zip(["1", "3"]) {
        let run = spdc(&[
            "hom",
            "--G",
            "1",
            "--reps",
            "20000",
            "--seed",
            "11",
            "--threads",
            threads,
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(run.status.code().is_some_and(|c| c <= 1));
    }
    assert_eq!(read(&paths[0]), read(&paths[1]));
}

#[test]
fn json_report_mirrors_rows() {
    let run = spdc(&["fourfold", "--reps", "20000", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(v["experiment"], "fourfold");
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert_eq!(v["metadata"]["reps"], 20000);
    assert!(v["metadata"]["timestamp"]["wall_time_s"].is_number());
}

#[test]
fn hom2d_curve_has_one_row_per_tilt_and_a_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dip.csv");
    let run = spdc(&["hom2d", "--reps", "10", "--grid", "16", "--theta-points", "7", "--out", out.to_str().unwrap()]);
    assert!(run.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&run.stderr));
    let text = read(&out);
    assert_eq!(text.lines().next(), Some("theta,amplitude,std_error"));
    assert_eq!(text.lines().count(), 1 + 7);
    let side: serde_json::Value = serde_json::from_str(&read(&dir.path().join("dip.csv.json"))).unwrap();
    assert!(side["K"].as_u64().unwrap() > 0);
    assert_eq!(side["seed"], spdc_wigner::DEFAULT_SEED);
    assert_eq!(side["expected"].as_array().unwrap().len(), 7);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "reps = \"2e4\"\nseed = 5\nG = 10.0\n").unwrap();
    let run = spdc(&["twin", "--config", cfg.to_str().unwrap(), "--G", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(v["metadata"]["seed"], 5);
    assert_eq!(v["metadata"]["reps"], 20000);
    assert_eq!(v["metadata"]["config"]["G"], 1.0);
}

#[test]
fn seed_comes_from_environment_when_unset() {
    let run = Command::new(env!("CARGO_BIN_EXE_spdc"))
        .args(["twin", "--reps", "1000", "--format", "json"])
        .env("SPDC_SEED", "77")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(v["metadata"]["seed"], 77);
}

#[test]
fn oracle_table_lists_requested_gains() {
    let run = spdc(&["oracle", "--g-values", "0.01,1,10"]);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8(run.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(2).unwrap().starts_with("1,"));
}

#[test]
fn exit_codes_separate_usage_from_io_errors() {
    assert_eq!(spdc(&["twin", "--gain-gl", "1", "--G", "1"]).status.code(), Some(2));
    assert_eq!(spdc(&["twin", "--eta", "1.5", "--reps", "100"]).status.code(), Some(2));
    assert_eq!(spdc(&["twin", "--reps", "1"]).status.code(), Some(2));
    assert_eq!(spdc(&["bell", "--reps", "abc"]).status.code(), Some(2));
    assert_eq!(spdc(&["twin", "--config", "/nonexistent/run.toml"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("x.csv");
    assert_eq!(spdc(&["twin", "--reps", "100", "--out", bad.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn unresolved_statistic_exits_with_one() {
    // At 0.01 photons per pixel a hundred repetitions leave the summed
    // variances inside the vacuum noise, so no row can agree with its oracle.
    let run = spdc(&["hom2d", "--photons-per-pixel", "0.01", "--reps", "100"]);
    assert_eq!(run.status.code(), Some(1));
}
