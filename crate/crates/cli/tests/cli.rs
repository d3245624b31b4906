use std::path::Path;
use std::process::{Command, Output};

fn causalnav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causalnav")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = causalnav(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// The machine-readable line each query command ends with.
fn json_tail(stdout: &str) -> serde_json::Value {
    serde_json::from_str(stdout.lines().last().unwrap()).unwrap()
}

#[test]
fn params_document_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let defaults = ok(&["params"]);
    let path = dir.path().join("p.toml");
    std::fs::write(&path, &defaults).unwrap();
    assert_eq!(ok(&["--params", path.to_str().unwrap(), "params"]), defaults);

    std::fs::write(&path, "[task]\nb_min = 35.0\n").unwrap();
    assert!(ok(&["--params", path.to_str().unwrap(), "params"]).contains("b_min = 35.0"));
}

#[test]
fn learned_model_answers_queries_and_plans() {
    let dir = tempfile::tempdir().unwrap();
    let d = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    ok(&["simulate", "--seed", "4", "--out", &d("sim")]);
    let log = Path::new(&d("sim")).join("desk20_4.csv");
    ok(&["learn", "--log", log.to_str().unwrap(), "--seed", "4", "--reference-dag", "--out", &d("m")]);
    let model = Path::new(&d("m")).join("model.json");
    let model = model.to_str().unwrap();

    let q = json_tail(&ok(&["infer", "--model", model, "--target", "D", "--given", "S=S11"]));
    let p: Vec<f64> = q["probabilities"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);

    let plan = json_tail(&ok(&["plan", "--model", model, "--slot", "S2", "--from", "CH", "--to", "A2"]));
    let route: Vec<&str> = plan["route"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(route.first(), Some(&"CH"));
    assert_eq!(route.last(), Some(&"A2"));
    assert_eq!(plan["verdict"], "proceed");

    let low = json_tail(&ok(&["plan", "--model", model, "--slot", "S2", "--from", "CH", "--to", "A2", "--battery", "20"]));
    assert_eq!(low["verdict"], "abort");
}

#[test]
fn bad_input_is_reported_not_panicked() {
    let out = causalnav(&["experiment", "--scenario", "no-such-place"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
