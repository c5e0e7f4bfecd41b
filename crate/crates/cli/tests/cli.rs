use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fracvexp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracvexp"))
        .current_dir(dir)
        .env_remove("FRACVEXP_THREADS")
        .args(["--output-dir", "out"])
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn result(dir: &Path, name: &str) -> Value {
    let text = fs::read_to_string(dir.join("out").join(name)).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["tool"], "fracvexp");
    assert!(v["config_hash"].as_str().unwrap().len() == 64);
    assert!(v["seed"].is_u64());
    v["result"].clone()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn help_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let help = fracvexp(dir.path(), &["--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("64  usage"));
    assert_eq!(code(&fracvexp(dir.path(), &["--bogus", "eval"])), 64);
    assert_eq!(code(&fracvexp(dir.path(), &["eval", "--u", "1", "--at", "zero"])), 64);
    assert_eq!(code(&fracvexp(dir.path(), &["eval", "--u", "x + z", "--at", "0"])), 64);
    let bad = Command::new(env!("CARGO_BIN_EXE_fracvexp"))
        .current_dir(dir.path())
        .env("FRACVEXP_THREADS", "none")
        .arg("validate-exponent")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 64);
}

#[test]
fn config_schema_errors_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[solver]\nnodez = 5\n");
    assert_eq!(
        code(&fracvexp(dir.path(), &["--config", &cfg, "validate-exponent"])),
        64
    );
    let json = dir.path().join("run.json");
    fs::write(&json, r#"{"seed": 7, "exponent": {"dimension": 2, "order": 0.3}}"#).unwrap();
    let o = fracvexp(dir.path(), &["--config", json.to_str().unwrap(), "validate-exponent"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/validate-exponent.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 7);
}

#[test]
fn validate_exponent_reports_each_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[exponent]\ndimension = 2\norder = 0.3\nq_kind = \"example_ii\"\n",
    );
    assert_eq!(code(&fracvexp(dir.path(), &["--config", &cfg, "validate-exponent"])), 0);
    let r = result(dir.path(), "validate-exponent.json");
    assert_eq!(r["passed"], true);

    // The default order gives s p+ > N in one dimension.
    assert_eq!(code(&fracvexp(dir.path(), &["validate-exponent"])), 2);
    assert_eq!(result(dir.path(), "validate-exponent.json")["p1"]["passed"], false);

    // Example (i) drops at t = 1, so Q is not nondecreasing.
    let cfg = write_config(
        dir.path(),
        "[exponent]\ndimension = 2\norder = 0.3\nq_kind = \"example_i\"\n",
    );
    assert_eq!(code(&fracvexp(dir.path(), &["--config", &cfg, "validate-exponent"])), 2);
    let r = result(dir.path(), "validate-exponent.json");
    let checks = r["p2"]["checks"].as_array().unwrap();
    let q = checks.iter().find(|c| c["name"] == "q_nondecreasing").unwrap();
    assert_eq!(q["passed"], false);
}

#[test]
fn eval_of_constant_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracvexp(dir.path(), &["eval", "--u", "3.0", "--at", "0.0", "--at", "-0.5"]);
    assert_eq!(code(&o), 0);
    let r = result(dir.path(), "eval.json");
    assert_eq!(r["exterior_rule"], "constant:3");
    assert_eq!(r["values"], serde_json::json!([0.0, 0.0]));
    assert!(dir.path().join("out/metadata.json").exists());
}

#[test]
fn eval_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["eval", "--u", "0.5*max(1.0-r^2, 0.0)", "--at", "0.1", "--at", "-0.7"];
    assert_eq!(code(&fracvexp(dir.path(), &args)), 0);
    let first = fs::read(dir.path().join("out/eval.json")).unwrap();
    assert_eq!(code(&fracvexp(dir.path(), &args)), 0);
    assert_eq!(first, fs::read(dir.path().join("out/eval.json")).unwrap());
    let v = result(dir.path(), "eval.json")["values"].as_array().unwrap().clone();
    assert!(v.iter().all(|x| x.as_f64().unwrap() > 0.0));
}

#[test]
fn error_classes_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&fracvexp(dir.path(), &["eval", "--input", "missing.csv", "--at", "0"])),
        5
    );
    assert_eq!(
        code(&fracvexp(
            dir.path(),
            &["solve", "--mode", "power", "--grid", "31", "--q", "1.0"]
        )),
        3
    );
    let o = fracvexp(
        dir.path(),
        &[
            "solve",
            "--mode",
            "general-f",
            "--grid",
            "31",
            "--f",
            "u^2",
            "--df",
            "2.0*u",
        ],
    );
    assert_eq!(code(&o), 3);
    let o = fracvexp(
        dir.path(),
        &["check-mp", "--check", "boundary", "--u", "1.0", "--plane", "1,0,-0.5"],
    );
    assert_eq!(code(&o), 64);
}

#[test]
fn tail_check_of_bounded_field_decays() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracvexp(dir.path(), &["tail-check", "--u", "max(1.0-r^2, 0.0)", "--at", "0.2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(result(dir.path(), "tail-check.json")["verdict"], "decaying");
}

#[test]
fn solve_then_sweep_and_probe() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracvexp(
        dir.path(),
        &["solve", "--mode", "manufactured", "--grid", "81", "--out", "u.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = result(dir.path(), "solve.json");
    assert_eq!(r["report"]["converged"], true);
    assert!(r["error_sup"].as_f64().unwrap() < 5e-3);
    let history = fs::read_to_string(dir.path().join("out/residual_history.csv")).unwrap();
    assert!(history.starts_with("iteration,residual_sup\n"));

    let u = dir.path().join("u.csv");
    let o = fracvexp(
        dir.path(),
        &["sweep-planes", "--input", u.to_str().unwrap(), "--directions", "1;-1"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    for name in ["sweep.csv", "sweep_1.csv"] {
        assert!(fs::read_to_string(dir.path().join("out").join(name))
            .unwrap()
            .starts_with("lambda,min_w\n"));
    }
    assert!(fs::read_to_string(dir.path().join("out/radial_profile.csv"))
        .unwrap()
        .starts_with("r,u\n"));
    assert_eq!(
        result(dir.path(), "sweep-planes.json")["report"]["symmetric_verdict"],
        true
    );

    let o = fracvexp(
        dir.path(),
        &[
            "check-mp",
            "--check",
            "boundary",
            "--input",
            u.to_str().unwrap(),
            "--plane",
            "1,-0.5",
        ],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(result(dir.path(), "check-mp.json")["verdict"], "holds");
}

#[test]
fn power_solve_from_default_guess() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracvexp(
        dir.path(),
        &["solve", "--mode", "power", "--grid", "41", "--q", "2.0+0.5*r"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = result(dir.path(), "solve.json");
    assert_eq!(r["q"], "2.0+0.5*r");
    assert!(dir.path().join("out/u.csv").exists());
}

#[test]
fn strong_mp_on_a_non_supersolution_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracvexp(
        dir.path(),
        &[
            "check-mp",
            "--check",
            "strong",
            "--u",
            "max(1.0-r^2, 0.0)^2",
            "--exterior",
            "zero_outside_ball",
        ],
    );
    assert_eq!(code(&o), 2);
    let r = result(dir.path(), "check-mp.json");
    assert_eq!(r["verdict"], "inconclusive");
    assert_eq!(r["hypothesis_satisfied"], false);
}
