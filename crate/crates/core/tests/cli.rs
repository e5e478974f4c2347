use std::path::Path;
use std::process::{Command, Output};

use ofdmim::cli::{config_to_text, manifest_path, parse_config_text, RunManifest, CSV_HEADER};
use ofdmim::experiment::SweepConfig;

fn ofdmim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ofdmim"))
        .args(args)
        .env_clear()
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_sweep(out: &Path, workers: &str) -> Output {
    ofdmim(&[
        "sweep",
        "--out",
        out.to_str().unwrap(),
        "--nt",
        "8",
        "--ns",
        "2,3",
        "--snr-db",
        "0:10:20",
        "--trials",
        "150",
        "--seed",
        "17",
        "--workers",
        workers,
    ])
}

#[test]
fn sweep_writes_all_rows_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let run = small_sweep(&a, "1");
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    assert_eq!(small_sweep(&b, "3").status.code(), Some(0));

    let csv = std::fs::read_to_string(&a).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    // 3 SNR points x 2 modes x 2 strategies x 2 N_S values.
    assert_eq!(lines.len(), 1 + 24);
    assert!(lines[1..].iter().all(|l| l.ends_with(",150")));
    assert_eq!(csv, std::fs::read_to_string(&b).unwrap());
}

#[test]
fn manifest_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    assert_eq!(small_sweep(&out, "2").status.code(), Some(0));
    let text = std::fs::read_to_string(manifest_path(&out)).unwrap();
    let manifest: RunManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(manifest.config.n_t, 8);
    assert_eq!(manifest.config.n_s_list, vec![2, 3]);
    assert_eq!(manifest.config.snr_points_db, vec![0.0, 10.0, 20.0]);
    assert_eq!(manifest.config.master_seed, 17);
    assert_eq!(manifest.output_path, out.display().to_string());
    assert!(manifest.finished_at >= manifest.started_at);
    let again: RunManifest = serde_json::from_str(&serde_json::to_string(&manifest).unwrap()).unwrap();
    assert_eq!(again.config, manifest.config);
}

#[test]
fn config_file_feeds_the_sweep_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = SweepConfig {
        n_t: 6,
        n_s_list: vec![2],
        snr_points_db: vec![5.0],
        trials: 40,
        ..SweepConfig::default()
    };
    let text = config_to_text(&config);
    assert_eq!(parse_config_text(&text).unwrap(), config);
    let path = dir.path().join("sweep.conf");
    std::fs::write(&path, format!("# desk run\n{text}")).unwrap();
    let out = dir.path().join("c.csv");
    let run = ofdmim(&[
        "sweep",
        "--config",
        path.to_str().unwrap(),
        "--trials",
        "12",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("5,") && l.ends_with(",12")));
}

#[test]
fn invalid_n_s_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let run = ofdmim(&["sweep", "--nt", "4", "--ns", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("n_s"), "{}", stderr(&run));
    assert!(!out.exists());
}

#[test]
fn unknown_config_key_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "n_t = 8\nbogus = 1\n").unwrap();
    let run = ofdmim(&["sweep", "--config", path.to_str().unwrap(), "--out", "unused.csv"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("bogus"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("x.csv");
    let run = ofdmim(&[
        "sweep",
        "--nt",
        "4",
        "--ns",
        "1",
        "--snr-db",
        "0",
        "--trials",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(3), "{}", stderr(&run));
}

#[test]
fn missing_config_is_an_io_error() {
    let run = ofdmim(&["sweep", "--config", "/nonexistent/sweep.conf"]);
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn allocate_reports_waterfill_and_uniform_splits() {
    let run = ofdmim(&["allocate", "--gains", "1,0.5", "--budget", "3"]);
    assert_eq!(run.status.code(), Some(0));
    let text = stdout(&run);
    assert!(text.contains("powers: 2,1\n"), "{text}");
    assert!(text.contains("water_level: 3\n"), "{text}");
    assert!(text.contains("total_capacity: 1.08496250072\n"), "{text}");

    let run = ofdmim(&["allocate", "--gains", "1,0.5", "--budget", "3", "--strategy", "uniform"]);
    assert_eq!(run.status.code(), Some(0));
    assert!(stdout(&run).contains("powers: 1.5,1.5\n"));

    let run = ofdmim(&["allocate", "--gains", "0.7", "--budget", "5", "--format", "json"]);
    assert_eq!(run.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&run)).unwrap();
    assert_eq!(v["powers"][0].as_f64(), Some(5.0));
}

#[test]
fn allocate_rejects_bad_input() {
    assert_eq!(ofdmim(&["allocate", "--gains", "1,x", "--budget", "3"]).status.code(), Some(2));
    assert_eq!(ofdmim(&["allocate", "--gains", "1", "--budget", "-1"]).status.code(), Some(2));
    assert_eq!(ofdmim(&["allocate", "--budget", "1"]).status.code(), Some(2));
}

#[test]
fn kkt_check_exit_codes() {
    let pass = ofdmim(&["kkt-check", "--gains", "1,0.5", "--powers", "2,1", "--budget", "3"]);
    assert_eq!(pass.status.code(), Some(0), "{}", stdout(&pass));
    assert!(stdout(&pass).contains("passed: true"));

    let uniform = ofdmim(&["kkt-check", "--gains", "1,0.5", "--powers", "1.5,1.5", "--budget", "3"]);
    assert_eq!(uniform.status.code(), Some(1));
    assert!(stdout(&uniform).contains("passed: false"));

    let overspent = ofdmim(&["kkt-check", "--gains", "1,0.5", "--powers", "2,1", "--budget", "3.5"]);
    assert_eq!(overspent.status.code(), Some(1));

    let mismatch = ofdmim(&["kkt-check", "--gains", "1,0.5", "--powers", "2,1,0", "--budget", "3"]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn env_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let run = Command::new(env!("CARGO_BIN_EXE_ofdmim"))
        .args(["sweep", "--nt", "5", "--ns", "1", "--snr-db", "0", "--out", out.to_str().unwrap()])
        .env_clear()
        .env("OFDMIM_TRIALS", "9")
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",9")));
}

#[test]
fn selftest_passes() {
    let run = ofdmim(&["selftest"]);
    assert_eq!(run.status.code(), Some(0), "{}", stdout(&run));
    assert!(!stdout(&run).contains("FAIL"));
}
