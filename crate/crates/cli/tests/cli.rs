//! End-to-end tests of the `palpate` binary: every subcommand, exit
//! codes, determinism, and the config-file precedence rules.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn palpate(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_palpate"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn spring_trial(dir: &Path, name: &str, seed: u64, noise: f64) -> PathBuf {
    let path = dir.join(name);
    let out = palpate(
        &[
            "synth",
            "--model",
            "spring",
            "--k",
            "1.5",
            "--rate",
            "1",
            "--peak",
            "2",
            "--sample-rate",
            "500",
            "--noise",
            &noise.to_string(),
            "--seed",
            &seed.to_string(),
            "--out",
            path.to_str().unwrap(),
        ],
        dir,
    );
    assert!(out.status.success());
    path
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = spring_trial(dir.path(), "a.csv", 7, 0.02);
    let b = spring_trial(dir.path(), "b.csv", 7, 0.02);
    let c = spring_trial(dir.path(), "c.csv", 8, 0.02);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn cues_directory_of_springs() {
    let dir = tempfile::tempdir().unwrap();
    let trials = dir.path().join("trials");
    fs::create_dir(&trials).unwrap();
    for (name, seed) in [("t1.csv", 1), ("t2.csv", 2), ("t3.csv", 3)] {
        spring_trial(&trials, name, seed, 0.0);
    }
    let out = palpate(
        &["cues", trials.to_str().unwrap(), "--no-timestamp"],
        dir.path(),
    );
    let json = stdout_json(&out);
    let rows = json["trials"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let fused = row["fused_stiffness"].as_f64().unwrap();
        assert!((fused - 1.5).abs() < 1e-6, "fused {fused}");
    }
    assert_eq!(json["errors"].as_array().unwrap().len(), 0);

    // Determinism: identical reruns give byte-identical reports.
    let again = palpate(
        &["cues", trials.to_str().unwrap(), "--no-timestamp"],
        dir.path(),
    );
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn cues_empty_directory_warns_but_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let trials = dir.path().join("empty");
    fs::create_dir(&trials).unwrap();
    let out = palpate(
        &["cues", trials.to_str().unwrap(), "--no-timestamp"],
        dir.path(),
    );
    assert!(out.status.success());
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["trials"].as_array().unwrap().len(), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn cues_reports_bad_file_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let trials = dir.path().join("trials");
    fs::create_dir(&trials).unwrap();
    spring_trial(&trials, "good1.csv", 1, 0.0);
    spring_trial(&trials, "good2.csv", 2, 0.0);
    fs::write(trials.join("bad.csv"), "t,force,displacement\n0,1,\n0,2,\n").unwrap();
    let out = palpate(
        &["cues", trials.to_str().unwrap(), "--no-timestamp"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["trials"].as_array().unwrap().len(), 2);
    let errors = json["errors"].as_array().unwrap();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0]["trial"], "bad");
}

#[test]
fn recognize_time_converges_on_spring() {
    let dir = tempfile::tempdir().unwrap();
    let trial = spring_trial(dir.path(), "t.csv", 4, 0.0);
    let traj = dir.path().join("traj.csv");
    let out = palpate(
        &[
            "recognize-time",
            trial.to_str().unwrap(),
            "--no-timestamp",
            "--trajectory-out",
            traj.to_str().unwrap(),
        ],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["converged"], Value::Bool(true));
    let terminal = json["terminal_estimate"].as_f64().unwrap();
    assert!((terminal - 1.5).abs() < 1e-6);
    let csv = fs::read_to_string(&traj).unwrap();
    assert!(csv.starts_with("t,gain,estimate,variance\n"));
    assert!(csv.lines().count() > 10);
}

#[test]
fn frechet_time_identical_vs_diverging() {
    let dir = tempfile::tempdir().unwrap();
    let a = spring_trial(dir.path(), "a.csv", 1, 0.0);
    let out = palpate(
        &[
            "frechet-time",
            "--first",
            a.to_str().unwrap(),
            "--second",
            a.to_str().unwrap(),
            "--window",
            "1",
            "--no-timestamp",
        ],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["discriminable"], Value::Bool(false));
    assert!(json["time_s"].is_null());

    // A faster ramp against a slower one becomes discriminable.
    let fast = dir.path().join("fast.csv");
    let out = palpate(
        &[
            "synth", "--model", "spring", "--k", "1.5", "--rate", "2", "--peak", "2",
            "--sample-rate", "500", "--out", fast.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let profile = dir.path().join("profile.csv");
    let out = palpate(
        &[
            "frechet-time",
            "--first",
            a.to_str().unwrap(),
            "--second",
            fast.to_str().unwrap(),
            "--window",
            "1",
            "--profile-out",
            profile.to_str().unwrap(),
            "--no-timestamp",
        ],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["discriminable"], Value::Bool(true));
    assert!(json["time_s"].as_f64().unwrap() > 0.0);
    let csv = fs::read_to_string(&profile).unwrap();
    assert!(csv.starts_with("t,dissimilarity,reference,ratio\n"));
}

#[test]
fn dprime_groups_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let resp = dir.path().join("resp.csv");
    let mut rows = String::from("condition,pair,truth,response\n");
    // hit 0.75 (3/4 different answered different), fa 0.25 (1/4).
    for (truth, response, n) in [
        ("different", "different", 3),
        ("different", "same", 1),
        ("same", "different", 1),
        ("same", "same", 3),
    ] {
        for _ in 0..n {
            rows.push_str(&format!("active,p1,{truth},{response}\n"));
        }
    }
    fs::write(&resp, rows).unwrap();
    let out = palpate(&["dprime", resp.to_str().unwrap(), "--no-timestamp"], dir.path());
    let json = stdout_json(&out);
    let row = &json["conditions"][0];
    assert_eq!(row["condition"], "active");
    assert_eq!(row["n_same"].as_u64().unwrap(), 4);
    assert!((row["hit"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert!((row["false_alarm"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!(row["dprime"].as_f64().unwrap() > 0.0);
}

#[test]
fn dprime_flags_malformed_rows() {
    let dir = tempfile::tempdir().unwrap();
    let resp = dir.path().join("resp.csv");
    fs::write(
        &resp,
        "condition,pair,truth,response\na,p,same,same\na,p,different,different\na,p,what,no\n",
    )
    .unwrap();
    let out = palpate(&["dprime", resp.to_str().unwrap(), "--no-timestamp"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["errors"].as_array().unwrap().len(), 1);
}

#[test]
fn area_unit_square() {
    let dir = tempfile::tempdir().unwrap();
    let poly = dir.path().join("poly.csv");
    fs::write(
        &poly,
        "x_px,y_px\n0,0\n1,0\n1,1\n0,1\nscale_bar_px,1\n",
    )
    .unwrap();
    let out = palpate(
        &[
            "area",
            poly.to_str().unwrap(),
            "--scale-bar-cm",
            "1.0",
            "--no-timestamp",
        ],
        dir.path(),
    );
    let json = stdout_json(&out);
    assert_eq!(json["area_cm2"].as_f64().unwrap(), 1.0);
}

#[test]
fn skinfit_round_trips_generated_curve() {
    use palpate_core::skinfit::{forward_compression, LayerStack};
    let dir = tempfile::tempdir().unwrap();
    let stack = LayerStack::with_defaults(2.5).unwrap();
    let max_d = 0.6 * stack.total_thickness_mm();
    let mut csv = String::from("d_mm,force_N\n");
    for i in 1..=40 {
        let d = max_d * i as f64 / 40.0;
        let f = forward_compression(&stack, d).unwrap();
        csv.push_str(&format!("{d},{f}\n"));
    }
    let curve = dir.path().join("curve.csv");
    fs::write(&curve, csv).unwrap();
    let out = palpate(
        &["skinfit", curve.to_str().unwrap(), "--no-timestamp"],
        dir.path(),
    );
    let json = stdout_json(&out);
    let k = json["scale"].as_f64().unwrap();
    assert!((k - 2.5).abs() / 2.5 < 1e-3, "recovered {k}");
    assert!(json["mean_r2"].as_f64().unwrap() > 0.9999);
    assert!((json["softness_index"].as_f64().unwrap() - 0.4).abs() < 1e-3);
}

#[test]
fn psychfit_interpolates_three_levels() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("fit.csv");
    fs::write(&data, "level,n_correct,n_total\n0,12,20\n1,15,20\n2,18,20\n").unwrap();
    let out = palpate(&["psychfit", data.to_str().unwrap(), "--no-timestamp"], dir.path());
    let json = stdout_json(&out);
    assert!(json["deviance"].as_f64().unwrap() <= 1e-6);
    assert!((json["threshold"].as_f64().unwrap() - 1.0).abs() < 1e-2);
}

#[test]
fn cluster_recovers_labels_and_is_seed_stable() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("points.csv");
    let mut csv = String::from("force,disp,label\n");
    for i in 0..20 {
        let jitter = (i % 5) as f64 * 0.01;
        csv.push_str(&format!("{},{},0\n", 1.0 + jitter, 1.0 - jitter));
        csv.push_str(&format!("{},{},1\n", 9.0 + jitter, 8.0 - jitter));
    }
    fs::write(&data, csv).unwrap();
    let args = [
        "cluster",
        data.to_str().unwrap(),
        "--k",
        "2",
        "--truth-col",
        "label",
        "--seed",
        "11",
        "--no-timestamp",
    ];
    let out = palpate(&args, dir.path());
    let json = stdout_json(&out);
    assert_eq!(json["match_rate"].as_f64().unwrap(), 1.0);
    let again = palpate(&args, dir.path());
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn stats_bootstrap_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("vals.csv");
    let mut csv = String::from("x\n");
    for i in 0..200 {
        csv.push_str(&format!("{}\n", (i as f64 * 0.37).sin()));
    }
    fs::write(&data, csv).unwrap();
    let args = [
        "stats",
        data.to_str().unwrap(),
        "--test",
        "bootstrap-mean",
        "--col-a",
        "x",
        "--seed",
        "5",
        "--no-timestamp",
    ];
    let out = palpate(&args, dir.path());
    let json = stdout_json(&out);
    assert!(json["ci_low"].as_f64().unwrap() <= json["ci_high"].as_f64().unwrap());
    let again = palpate(&args, dir.path());
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let trials = dir.path().join("trials");
    fs::create_dir(&trials).unwrap();
    spring_trial(&trials, "t1.csv", 1, 0.0);
    let cfg = dir.path().join("defaults.cfg");
    fs::write(&cfg, "window=9\n").unwrap();

    let from_config = palpate(
        &[
            "cues",
            trials.to_str().unwrap(),
            "--config",
            cfg.to_str().unwrap(),
            "--no-timestamp",
        ],
        dir.path(),
    );
    let json = stdout_json(&from_config);
    assert_eq!(json["settings"]["window"].as_u64().unwrap(), 9);

    let flag_wins = palpate(
        &[
            "cues",
            trials.to_str().unwrap(),
            "--config",
            cfg.to_str().unwrap(),
            "--window",
            "33",
            "--no-timestamp",
        ],
        dir.path(),
    );
    let json = stdout_json(&flag_wins);
    assert_eq!(json["settings"]["window"].as_u64().unwrap(), 33);
}

#[test]
fn report_written_to_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let poly = dir.path().join("poly.csv");
    fs::write(&poly, "x_px,y_px\n0,0\n4,0\n0,3\nscale_bar_px,1\n").unwrap();
    let report = dir.path().join("report.json");
    let out = palpate(
        &[
            "area",
            poly.to_str().unwrap(),
            "--scale-bar-cm",
            "1.0",
            "--out",
            report.to_str().unwrap(),
            "--no-timestamp",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let json: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["area_cm2"].as_f64().unwrap(), 6.0);
    assert_eq!(json["schema"].as_u64().unwrap(), 1);
}
