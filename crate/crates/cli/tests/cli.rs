use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn epsurr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epsurr"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: &str = r#"{"n": 20, "r": 2, "rho_s": 0.05, "sigma": 0.1, "trials": 2, "seed": 3}"#;

#[test]
fn verify_fast_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = epsurr(
        &["verify", "--level", "fast", "--output", "report.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 8);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["level"], "fast");
}

#[test]
fn bad_level_is_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = epsurr(&["verify", "--level", "thorough"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_or_malformed_config_is_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(epsurr(&["experiment"], dir.path()).status.code(), Some(2));
    assert_eq!(
        epsurr(&["experiment", "--config", "nope.json"], dir.path())
            .status
            .code(),
        Some(2)
    );
    fs::write(
        dir.path().join("bad.json"),
        r#"{"n": 5, "r": 9, "rho_s": 0.1, "sigma": 0.1}"#,
    )
    .unwrap();
    assert_eq!(
        epsurr(&["experiment", "--config", "bad.json"], dir.path())
            .status
            .code(),
        Some(2)
    );
    fs::write(
        dir.path().join("typo.json"),
        r#"{"n": 5, "r": 1, "rho_s": 0.1, "sigma": 0.1, "sigam": 1}"#,
    )
    .unwrap();
    assert_eq!(
        epsurr(&["experiment", "--config", "typo.json"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn experiment_writes_csv_and_honours_seed() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), SMALL).unwrap();
    let run = |seed: &str, out: &str| {
        let o = epsurr(
            &[
                "experiment",
                "--config",
                "cfg.json",
                "--seed",
                seed,
                "--threads",
                "1",
                "--output",
                out,
            ],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read_to_string(dir.path().join(out)).unwrap()
    };
    let drop_time = |csv: &str| -> Vec<String> {
        csv.lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(12);
                f.join(",")
            })
            .collect()
    };
    let a = run("10", "a.csv");
    let b = run("10", "b.csv");
    let c = run("11", "c.csv");
    assert_eq!(a.lines().count(), 4);
    assert!(a.starts_with("trial,n,r,rho_s,sigma,rms_x,rms_y"));
    assert_eq!(drop_time(&a), drop_time(&b));
    assert_ne!(drop_time(&a), drop_time(&c));
}

#[test]
fn generate_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), SMALL).unwrap();
    let out = epsurr(
        &["generate", "--config", "cfg.json", "--output", "inst"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for f in ["m.csv", "m_r.csv", "m_s.csv"] {
        assert!(dir.path().join("inst").join(f).exists());
    }

    fs::write(
        dir.path().join("inst/solve.json"),
        r#"{"matrix": "m.csv", "phi": {"kind": "log", "params": {"epsilon": 0.5}}}"#,
    )
    .unwrap();
    let out = epsurr(
        &["solve", "--config", "inst/solve.json", "--output", "sol"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sol/report.json")).unwrap())
            .unwrap();
    assert!(report["outer_iters"].as_u64().unwrap() >= 1);
    let x = fs::read_to_string(dir.path().join("sol/x_hat.csv")).unwrap();
    assert!(x.lines().nth(1) == Some("20,20"));
}

#[test]
fn solve_rejects_missing_matrix_and_unknown_generator() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.json"), r#"{"matrix": "absent.csv"}"#).unwrap();
    assert_eq!(
        epsurr(&["solve", "--config", "s.json"], dir.path())
            .status
            .code(),
        Some(2)
    );
    fs::write(dir.path().join("m.csv"), "1,2\n3,4\n").unwrap();
    fs::write(
        dir.path().join("t.json"),
        r#"{"matrix": "m.csv", "phi": {"kind": "mcp"}}"#,
    )
    .unwrap();
    assert_eq!(
        epsurr(&["solve", "--config", "t.json"], dir.path())
            .status
            .code(),
        Some(2)
    );
}
