use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rpwf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpwf")).args(args).env_remove("RPWF_SEED").output().unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_urn_writes_one_row_per_step_plus_start() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("urn.csv");
    let res = rpwf(&["simulate-urn", "--alpha", "1", "--b", "1,1", "--beta", "0.9", "--steps", "10", "--seed", "1", "--out", path_str(&out)]);
    let manifest = json_stdout(&res);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.starts_with("n,color,psi_1,psi_2"));
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["command"], "simulate-urn");
}

#[test]
fn invalid_beta_exits_with_validation_code_and_names_the_flag() {
    let res = rpwf(&["simulate-urn", "--alpha", "1", "--b", "1,1", "--beta", "1.5", "--steps", "10"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("--beta"));
}

#[test]
fn unwritable_output_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let out = blocker.join("out.csv");
    let res = rpwf(&["simulate-urn", "--alpha", "1", "--b", "1,1", "--beta", "0.9", "--steps", "3", "--out", path_str(&out)]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn replay_reproduces_the_output_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wf.csv");
    let res = rpwf(&["simulate-wf", "--alpha", "1", "--b", "1,2", "--t-max", "0.5", "--dt", "0.01", "--replicas", "3", "--seed", "9", "--out", path_str(&out)]);
    assert!(res.status.success());
    let manifest = dir.path().join("manifest.json");
    std::fs::write(&manifest, &res.stdout).unwrap();
    let replay = rpwf(&["replay", "--manifest", path_str(&manifest)]);
    assert_eq!(replay.status.code(), Some(0), "{}", String::from_utf8_lossy(&replay.stderr));

    std::fs::write(&out, b"tampered").unwrap();
    let mut m: Value = serde_json::from_slice(&res.stdout).unwrap();
    m["output_hash"] = Value::String("0".repeat(64));
    std::fs::write(&manifest, serde_json::to_vec(&m).unwrap()).unwrap();
    assert_eq!(rpwf(&["replay", "--manifest", path_str(&manifest)]).status.code(), Some(1));
}

#[test]
fn seed_precedence_is_flag_then_config_then_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 5\nalpha = 1\nb = \"1,1\"\nbeta = 0.5\nsteps = 4\n").unwrap();
    let seed_of = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_rpwf"));
        cmd.args(["simulate-urn", "--out", path_str(&dir.path().join("o.csv"))]).args(extra).env_remove("RPWF_SEED");
        if let Some(v) = env {
            cmd.env("RPWF_SEED", v);
        }
        json_stdout(&cmd.output().unwrap())["seed"].as_u64().unwrap()
    };
    let cfg_args = ["--config", path_str(&cfg)];
    assert_eq!(seed_of(&[&cfg_args[..], &["--seed", "3"]].concat(), Some("8")), 3);
    assert_eq!(seed_of(&cfg_args, Some("8")), 5);
    let bare = ["--alpha", "1", "--b", "1,1", "--beta", "0.5", "--steps", "4"];
    assert_eq!(seed_of(&bare, Some("8")), 8);
    assert_eq!(seed_of(&bare, None), 0);
}

#[test]
fn boundary_reports_the_heavily_weighted_color_dominant() {
    let report = json_stdout(&rpwf(&["boundary", "--alpha", "1", "--b", "1", "--p", "0.9,0.1"]));
    assert_eq!(report["dominant"], serde_json::json!([1]));
    assert_eq!(report["colors"][1]["recessive"], true);
}

#[test]
fn density_at_long_times_matches_the_stationary_density() {
    let report = json_stdout(&rpwf(&["density", "--alpha", "1", "--b", "1", "--p", "0.35,0.65", "--y0", "0.3", "--y", "0.6", "--t", "50", "--format", "json"]));
    let value = report["density"]["value"].as_f64().unwrap();
    let stationary = report["stationary_density"].as_f64().unwrap();
    assert!((value - stationary).abs() < 1e-6);
}

#[test]
fn converge_smoke_run_finishes_quickly() {
    let start = std::time::Instant::now();
    let report = json_stdout(&rpwf(&["converge", "--alpha", "1", "--b", "1", "--p", "0.5,0.5", "--beta", "0.9", "--t", "1", "--replicas", "200"]));
    assert!(start.elapsed().as_secs() < 60);
    assert_eq!(report["mean_ks"].as_array().unwrap().len(), 1);
    assert_eq!(report["comparisons"][0]["ks"]["n"], 200);
}

#[test]
fn hit_prob_without_monte_carlo_is_analytic_only() {
    let report = json_stdout(&rpwf(&["hit-prob", "--a0", "0.3", "--a1", "0.7", "--lower", "0.2", "--upper", "0.8", "--z0", "0.5", "--replicas", "0"]));
    let u = report["hitting_prob"].as_f64().unwrap();
    assert!(u > 0.0 && u < 1.0);
    assert!(report["monte_carlo"].is_null());
}
