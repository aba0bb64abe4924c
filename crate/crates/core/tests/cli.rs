use std::fs;
use std::process::{Command, Output};

use tempfile::tempdir;

fn rig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rig"))
        .args(args)
        .output()
        .expect("run rig")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const CONFIG: &str = r#"{"n":300,"m":200,"c":1.5,"seed":4}"#;

#[test]
fn gen_is_reproducible_and_feeds_components() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("inc.txt");
    let path_str = path.to_str().unwrap();
    let out = rig(&["gen", "--config", CONFIG, "--out", path_str]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("RIG-INC v1 300 200 4\n"));
    assert_eq!(stdout(&rig(&["gen", "--config", CONFIG])), text);

    let from_file = rig(&["components", "--incidence", path_str]);
    let sampled = rig(&["components", "--config", CONFIG]);
    assert!(from_file.status.success());
    assert_eq!(stdout(&from_file), stdout(&sampled));
    let json: serde_json::Value = serde_json::from_str(&stdout(&sampled)).unwrap();
    let sizes = json["sizes"].as_array().unwrap();
    assert_eq!(sizes.iter().map(|s| s.as_u64().unwrap()).sum::<u64>(), 300);
}

#[test]
fn seed_flag_overrides_config() {
    let a = stdout(&rig(&["gen", "--config", CONFIG, "--seed", "9"]));
    assert!(a.starts_with("RIG-INC v1 300 200 9\n"));
    assert_ne!(a, stdout(&rig(&["gen", "--config", CONFIG])));
}

#[test]
fn config_file_path_is_accepted() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(&path, CONFIG).unwrap();
    let out = rig(&[
        "gen",
        "--config",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["seed"], 4);
    assert!(json["rng"].as_str().unwrap().contains("ChaCha12"));
}

#[test]
fn explore_and_surrogate_write_trace_csv() {
    for cmd in ["explore", "surrogate"] {
        let out = rig(&[cmd, "--config", CONFIG]);
        assert!(out.status.success(), "{cmd}");
        assert!(stdout(&out).starts_with("t,Y,Z,r,phi,wcum\n1,"));
    }
}

#[test]
fn predict_prints_giant_prediction() {
    let out = rig(&["predict", "--c", "2", "--n", "5000"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in ["c", "zeta", "predicted_size", "clt_var", "rho"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert!((json["zeta"].as_f64().unwrap() - 0.7968121).abs() < 1e-6);
}

#[test]
fn sweep_writes_versioned_csv() {
    let dir = tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"cells":[{"n":200,"m":200,"c":0.5}],"reps":3,"seed":2}"#,
    )
    .unwrap();
    let out = rig(&["sweep", "--config", spec.to_str().unwrap(), "--check"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("schema=rigsweep.v1"));
    assert!(lines.next().unwrap().starts_with(
        "n,m,c,shape,s,reps,mean_largest_frac,std_largest_frac,mean_second,zeta_pred,seed"
    ));
}

#[test]
fn failed_check_exits_with_two() {
    // The difference rate shortens stop times enough to fail the KS check.
    let cfg = r#"{"n":40,"m":40,"c":1.5,"seed":1}"#;
    let out = rig(&[
        "surrogate",
        "--config",
        cfg,
        "--reps",
        "5000",
        "--rate",
        "difference",
        "--check",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_input_exits_with_one() {
    for args in [
        vec!["gen", "--config", r#"{"n":10,"m":3,"c":100}"#],
        vec!["gen", "--config", r#"{"n":10,"m":3,"c":1,"bogus":true}"#],
        vec!["gen"],
        vec!["sprinkle", "--config", CONFIG, "--gamma", "1.0"],
        vec!["components", "--incidence", "/nonexistent/file"],
    ] {
        let out = rig(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn depdemo_and_sprinkle_report_json() {
    let out = rig(&[
        "depdemo",
        "--config",
        r#"{"n":10,"profile":[0.5]}"#,
        "--reps",
        "20000",
        "--check",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(
        json["empirical_joint"].as_f64().unwrap() > json["empirical_product"].as_f64().unwrap()
    );

    let out = rig(&["sprinkle", "--config", CONFIG, "--gamma", "1.5", "--check"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(json["largest_after"].as_f64() >= json["largest_before"].as_f64());
}
