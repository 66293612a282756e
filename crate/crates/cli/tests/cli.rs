use std::path::Path;
use std::process::{Command, Output};

fn reff(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reff"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("REFF_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const SMALL_XY: &str = r#"
model = "XY"
n = 3
[data]
N = 2
seed = 5
[train]
cost_kind = "GLOBAL"
target_cost = 1e-6
max_iters = 300
[eval]
M_max = 20
"#;

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn unknown_key_exits_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "model = \"XY\"\nn = 4\n[train]\nlearning_rate = 0.1\n");
    let out = tmp.path().join("out");
    let o = reff(&["train", "--config", &cfg], &out);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn oversized_register_exits_5() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "big.toml", "model = \"XY\"\nn = 20\n");
    let o = reff(&["gen-data", "--config", &cfg], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn missing_config_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reff(&["bounds", "--config", "/nonexistent/reff.toml"], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gen_train_evaluate_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "xy.toml", SMALL_XY);
    let data_dir = tmp.path().join("data");
    let o = reff(&["gen-data", "--config", &cfg], &data_dir);
    assert!(o.status.success());
    let data = data_dir.join("dataset.json");
    let d: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&data).unwrap()).unwrap();
    assert_eq!(d["pairs"].as_array().unwrap().len(), 2);

    let train_dir = tmp.path().join("train");
    let o = reff(&["train", "--config", &cfg, "--data", data.to_str().unwrap()], &train_dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let params = train_dir.join("params.json");
    let p: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&params).unwrap()).unwrap();
    assert_eq!(p["training"]["n_pairs"], 2);
    let trace = std::fs::read_to_string(train_dir.join("trace.csv")).unwrap();
    assert!(trace.lines().count() > 1);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(train_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["inputs"].as_array().unwrap().len(), 1);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);

    let eval_dir = tmp.path().join("eval");
    let o =
        reff(&["evaluate", "--config", &cfg, "--params", params.to_str().unwrap(), "--data", data.to_str().unwrap()], &eval_dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let series = std::fs::read_to_string(eval_dir.join("series.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(lines.next(), Some("t,M,fid_vs_trotter,fid_vs_exact,stderr"));
    assert_eq!(lines.count(), 21);
    assert!(eval_dir.join("bounds.json").exists());
}

#[test]
fn dataset_for_other_model_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "xy.toml", SMALL_XY);
    let other = write_config(tmp.path(), "hb.toml", &SMALL_XY.replace("\"XY\"", "\"HEISENBERG\""));
    let data_dir = tmp.path().join("data");
    assert!(reff(&["gen-data", "--config", &other], &data_dir).status.success());
    let data = data_dir.join("dataset.json");
    let o = reff(&["train", "--config", &cfg, "--data", data.to_str().unwrap()], &tmp.path().join("t"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bounds_reports_thresholds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "b.toml", "model = \"XY\"\nn = 4\n[bounds]\nM0 = 10\neps_target = 0.01\n");
    let out = tmp.path().join("b");
    let o = reff(&["bounds", "--config", &cfg], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("bounds.json")).unwrap()).unwrap();
    assert!(b.is_object());
    assert!(stdout(&o).contains("bounds:"));
}

#[test]
fn verify_small_scale_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "v.toml",
        "model = \"XY\"\nn = 4\n[verify]\nmc_samples = 20000\npair_trials = 10\ngradient_instances = 2\n",
    );
    let out = tmp.path().join("v");
    let o = reff(&["verify", "--config", &cfg], &out);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() > 10);
    assert!(!text.contains("FAIL"));
    assert!(out.join("oracles.json").exists());
}

#[test]
fn out_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "xy.toml", SMALL_XY);
    let out = tmp.path().join("from-env");
    let o =
        Command::new(env!("CARGO_BIN_EXE_reff")).args(["gen-data", "--config", &cfg]).env("REFF_OUT_DIR", &out).output().unwrap();
    assert!(o.status.success());
    assert!(out.join("dataset.json").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn repro_fig2b_quick() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig2b");
    let o = reff(&["repro", "FIG2B", "--quick"], &out);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(text.contains("PASS n = 4"), "{text}");
    assert!(out.join("summary.csv").exists());
    assert!(out.join("n4").join("series.csv").exists());
}
