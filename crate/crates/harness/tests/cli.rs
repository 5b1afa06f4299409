use std::path::Path;
use std::process::Command;

fn kltransfer(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_kltransfer"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn write(path: &Path, value: serde_json::Value) -> String {
    std::fs::write(path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn experiment(dir: &Path) -> String {
    write(
        &dir.join("cfg.json"),
        serde_json::json!({
            "instance": {"num_states": 3, "num_actions": 4, "beta": 0.5, "r_max": 1.0, "class_size": 5, "seed": 1},
            "sources": {"deltas": [0.0, 0.3]},
            "roster": ["tpo", "online-only", "transfer-fixed:1", "empirical-tpo"],
            "horizon": 100,
            "block_size": 20,
            "trials": 3,
            "master_seed": 9
        }),
    )
}

#[test]
fn full_pipeline_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = experiment(d);
    let inst = d.join("inst.json");
    let (code, _) = kltransfer(&[
        "gen-env",
        "--spec",
        &cfg,
        "--seed",
        "4",
        "--out",
        inst.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    for key in [
        "num_states",
        "num_actions",
        "rho",
        "beta",
        "r_max",
        "pi_ref",
        "r_star",
        "sources",
        "policy_class",
    ] {
        assert!(doc.get(key).is_some(), "{key}");
    }

    let bounds = d.join("bounds.csv");
    let (code, _) = kltransfer(&[
        "bounds",
        "--instance",
        inst.to_str().unwrap(),
        "--out",
        bounds.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&bounds).unwrap();
    assert!(text.starts_with("bound_name,lhs,rhs,slack,satisfied\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")), "{text}");

    let run = d.join("run");
    let (code, stdout) = kltransfer(&["run", "--config", &cfg, "--out", run.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 4);
    let report = d.join("report");
    let (code, _) = kltransfer(&[
        "report",
        "--in",
        run.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    for name in [
        "regret_curves.csv",
        "win_rate_matrix.csv",
        "summary.csv",
        "regret.svg",
    ] {
        assert_eq!(
            std::fs::read(report.join(name)).unwrap(),
            std::fs::read(run.join("report").join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn validation_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = d.join("x").to_str().unwrap().to_string();
    assert_eq!(
        kltransfer(&["run", "--config", "/nonexistent/cfg.json", "--out", &out]).0,
        2
    );
    let bad = write(
        &d.join("bad.json"),
        serde_json::json!({"instance": {"num_states": 2, "num_actions": 3, "beta": 1.0, "r_max": 1.0}, "sources": {"deltas": [1.5]}}),
    );
    assert_eq!(
        kltransfer(&["gen-env", "--spec", &bad, "--seed", "1", "--out", &out]).0,
        2
    );
    let empty_roster = write(
        &d.join("empty.json"),
        serde_json::json!({
            "instance": {"num_states": 2, "num_actions": 3, "beta": 1.0, "r_max": 1.0},
            "roster": [], "horizon": 10, "block_size": 5, "trials": 1, "master_seed": 0
        }),
    );
    assert_eq!(
        kltransfer(&["run", "--config", &empty_roster, "--out", &out]).0,
        2
    );
    assert_eq!(kltransfer(&["run", "--bogus"]).0, 2);
    assert_eq!(
        kltransfer(&["report", "--in", d.to_str().unwrap(), "--out", &out]).0,
        2
    );
}

#[test]
fn unreachable_gap_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        &dir.path().join("spec.json"),
        serde_json::json!({"instance": {"num_states": 2, "num_actions": 3, "beta": 10.0, "r_max": 1.0}, "sources": {"deltas": [0.9]}}),
    );
    let out = dir.path().join("inst.json");
    assert_eq!(
        kltransfer(&[
            "gen-env",
            "--spec",
            &spec,
            "--seed",
            "1",
            "--out",
            out.to_str().unwrap()
        ])
        .0,
        3
    );
    assert!(!out.exists());
}
