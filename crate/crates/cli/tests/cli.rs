use std::path::PathBuf;
use std::process::{Command, Output};

fn geoph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("geoph-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn sampling_is_byte_identical_per_seed() {
    for space in ["circle", "flat-torus", "sphere-minus-cap"] {
        let args = ["sample", "--space", space, "--n", "40", "--seed", "7"];
        let a = geoph(&args);
        let b = geoph(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
        assert!(stdout(&a).starts_with("# space="));
    }
}

#[test]
fn points_metric_ph_detect_pipeline() {
    let points = scratch("circle.txt");
    let metric = scratch("circle.dist");
    let pd = scratch("circle.pd");
    let p = points.to_str().unwrap();
    let m = metric.to_str().unwrap();
    let d = pd.to_str().unwrap();
    assert!(
        geoph(&["sample", "--space", "circle", "--n", "30", "--mode", "regular", "--out", p])
            .status
            .success()
    );
    assert!(
        geoph(&["metric", "--space", "circle", "--points", p, "--out", m])
            .status
            .success()
    );
    let ph = geoph(&[
        "ph",
        "--metric",
        m,
        "--max-dim",
        "3",
        "--threshold",
        "0.45",
        "--out",
        d,
    ]);
    assert!(
        ph.status.success(),
        "{}",
        String::from_utf8_lossy(&ph.stderr)
    );
    let text = std::fs::read_to_string(&pd).unwrap();
    assert!(text.lines().any(|l| l.starts_with("3,")));
    assert!(text.lines().any(|l| l == "0,0,inf"));
    let det = geoph(&["detect", "--pd", d]);
    assert!(det.status.success());
    assert!(stdout(&det).contains("\"classification\": \"topological\""));
}

#[test]
fn oracle_prints_tagged_rows() {
    let o = geoph(&["oracle", "--length", "1", "--max-dim", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0,0,inf,rips-circle\n1,0,0.3333333333333333,rips-circle\n3,0.3333333333333333,0.4,rips-circle\n");
    let b = geoph(&["oracle", "--basis", "1,1.3"]);
    assert!(stdout(&b).lines().all(|l| l.ends_with(",minimal-basis")));
}

#[test]
fn verify_circle_exit_status_follows_the_verdict() {
    let ok = geoph(&["verify-circle"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).ends_with("PASS\n"));
    let bad = geoph(&["verify-circle", "--n", "8", "--tol", "0.001"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("MISMATCH"));
}

#[test]
fn nullhomology_verify_passes() {
    let o = geoph(&["nullhomology-verify", "--trials", "200", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"failures\": []"));
}

#[test]
fn bad_parameters_are_errors() {
    let o = geoph(&[
        "sample",
        "--space",
        "flat-torus",
        "--n",
        "3",
        "--mode",
        "regular",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("square"));
    let o = geoph(&["ph", "--metric", "/nonexistent/file"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn undersampled_experiment_finds_nothing() {
    let dir = scratch("exp");
    let o = geoph(&[
        "experiment-sphere-cap",
        "--n-total",
        "500",
        "--n-sub",
        "10",
        "--n-sub-long",
        "10",
        "--boundary-m",
        "0",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("\"candidates\": []"));
    for f in ["short_pass.pd", "long_pass.pd", "merged.pd", "report.json"] {
        assert!(dir.join(f).exists(), "{f} missing");
    }
}
