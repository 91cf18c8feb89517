use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn beamtrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamtrack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"trials": 2, "epochs": 12}"#);
    let out = dir.path().join("out");
    let o = beamtrack(&[
        "run",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--plots",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for name in [
        "trace.csv",
        "summary.json",
        "angle_error.svg",
        "rate.svg",
        "angle_track.svg",
    ] {
        assert!(out.join(name).exists(), "{name}");
    }
}

#[test]
fn seed_and_scheme_flags_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"trials": 1, "epochs": 5}"#);
    let run = |seed: &str, sub: &str| {
        let out = dir.path().join(format!("{sub}-{seed}"));
        let o = beamtrack(&[
            "run",
            "--config",
            &cfg,
            "--seed",
            seed,
            "--scheme",
            "feedback",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        fs::read_to_string(out.join("trace.csv")).unwrap()
    };
    let a = run("11", "a");
    assert_eq!(a, run("11", "b"));
    assert_ne!(a, run("12", "c"));
    assert!(a.lines().skip(1).all(|l| l.contains(",feedback,")));
}

#[test]
fn trial_and_sweep_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"trials": 1, "epochs": 6}"#);
    let out = dir.path().join("trial");
    let o = beamtrack(&[
        "trial",
        "--config",
        &cfg,
        "--index",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("# dfrc, trial 3") && stdout.contains("# feedback, trial 3"));

    let out = dir.path().join("sweep");
    let o = beamtrack(&[
        "sweep",
        "--config",
        &cfg,
        "--keys",
        "n_tx,n_rx,m_vehicle",
        "--values",
        "16,32",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("n_tx+n_rx+m_vehicle=16/summary.json").exists());
    assert!(out.join("n_tx+n_rx+m_vehicle=32/summary.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();

    let bad = write_config(dir.path(), r#"{"antennas": 64}"#);
    assert_eq!(
        beamtrack(&["run", "--config", &bad, "--out", out])
            .status
            .code(),
        Some(2)
    );
    let invalid = write_config(dir.path(), r#"{"epochs": 0}"#);
    assert_eq!(
        beamtrack(&["run", "--config", &invalid, "--out", out])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        beamtrack(&["run", "--config", "/no/such/file.json"])
            .status
            .code(),
        Some(2)
    );

    // A condition cap this tight rejects every update.
    let hopeless = write_config(
        dir.path(),
        r#"{"trials": 2, "epochs": 3, "condition_cap": 1.5}"#,
    );
    assert_eq!(
        beamtrack(&["run", "--config", &hopeless, "--out", out])
            .status
            .code(),
        Some(3)
    );

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let ok = write_config(dir.path(), r#"{"trials": 1, "epochs": 2}"#);
    let nested = blocker.join("sub");
    assert_eq!(
        beamtrack(&["run", "--config", &ok, "--out", nested.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );
}
