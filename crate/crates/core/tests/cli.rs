use std::fs;
use std::process::{Command, Output};

fn abatement(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abatement"))
        .args(args)
        .output()
        .unwrap()
}

const SCENARIO: &str = r#"
[scenario]
m_tot = [0.0, 2000.0]

[perturbation]
trials = 5

[[variant]]
name = "none"
"#;

#[test]
fn solve_writes_pathways_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, SCENARIO).unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let o = abatement(&[
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            "2",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in [
        "summary.csv",
        "pathway_none_M0.csv",
        "pathway_none_M2000.csv",
    ] {
        let a = fs::read(out_a.join(name)).unwrap();
        assert_eq!(a, fs::read(out_b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn dt_and_seed_flags_reach_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, SCENARIO).unwrap();
    let out = dir.path().join("o");
    let o = abatement(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--dt",
        "0.1",
        "--seed",
        "3",
    ]);
    assert!(o.status.success());
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(
        summary.lines().last().unwrap().ends_with(",0.1"),
        "{summary}"
    );
}

#[test]
fn unknown_keys_fail_with_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, SCENARIO.replace("trials", "trails")).unwrap();
    let o = abatement(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("trails"));
}

#[test]
fn sweep_writes_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(
        &cfg,
        r#"
response = "overshoot_threshold"
output = "threshold.csv"
axis1 = { param = "start_year", start = 0.0, stop = 10.0, step = 5.0 }
"#,
    )
    .unwrap();
    let o = abatement(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("threshold.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn calibrate_damage_prints_a_config_section() {
    let o = abatement(&[
        "calibrate-damage",
        "--variant",
        "power-law",
        "--p1",
        "2.5,0.05",
        "--p2",
        "5,0.2",
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("variant = \"power-law\""));
    assert!(text.contains("d0 = 0.8\n"));
    assert!(text.contains("d1 = 2\n"));

    let o = abatement(&[
        "calibrate-damage",
        "--variant",
        "logistic",
        "--p1",
        "5,0.2",
        "--p2",
        "2.5,0.05",
    ]);
    assert!(!o.status.success());
}
