use std::path::Path;
use std::process::{Command, Output};

use dynalg::cli::report::TSV_HEADER;

fn dynalg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynalg"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> String {
    format!("{}/scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn verify_weyl_passes_with_enough_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dynalg(&["verify", "weyl", "--output", "out"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let tsv = std::fs::read_to_string(dir.path().join("out/records.tsv")).unwrap();
    let mut lines = tsv.lines();
    assert_eq!(lines.next(), Some(TSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split('\t').collect()).collect();
    assert!(rows.len() >= 12, "only {} checks", rows.len());
    for r in &rows {
        assert_eq!(r.len(), 9);
        assert_eq!(r[0], "weyl");
        assert_eq!(r[6], "true", "{}", r[1]);
        assert_eq!(r[7], "0.000");
    }
    let summary = std::fs::read_to_string(dir.path().join("out/summary.txt")).unwrap();
    assert!(summary.contains("failed\t0\n"));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("weyl.ini");
    for out in ["a", "b"] {
        let r = dynalg(&["run", "--config", &cfg, "--seed", "3", "--output", out], dir.path());
        assert_eq!(r.status.code(), Some(0));
    }
    for file in ["records.tsv", "summary.txt"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
}

#[test]
fn timings_fill_the_ms_column() {
    let dir = tempfile::tempdir().unwrap();
    let r = dynalg(&["verify", "adjoint", "--timings", "--output", "out"], dir.path());
    assert_eq!(r.status.code(), Some(0));
    let tsv = std::fs::read_to_string(dir.path().join("out/records.tsv")).unwrap();
    let ms: f64 = tsv.lines().nth(1).unwrap().split('\t').nth(7).unwrap().parse().unwrap();
    assert!(ms > 0.0);
}

#[test]
fn malformed_config_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ini");
    std::fs::write(
        &path,
        "[scenario]\nid = bad\nkind = weyl\n\n[functionals]\nf = bump(center = 0.5, halfwidth = oops)\n",
    )
    .unwrap();
    let r = dynalg(&["run", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("6:"), "{err}");
    assert!(err.contains("`f`"), "{err}");
}

#[test]
fn unknown_key_and_suite_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ini");
    std::fs::write(&path, "[scenario]\nid = x\nkind = weyl\nspeed = 3\n").unwrap();
    let r = dynalg(&["run", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("speed"));

    let r = dynalg(&["verify", "nonsense"], dir.path());
    assert_eq!(r.status.code(), Some(2));
    let r = dynalg(&["run", "--config", "missing.ini"], dir.path());
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn box_too_small_is_an_environment_error() {
    let dir = tempfile::tempdir().unwrap();
    let r = dynalg(&["verify", "weyl", "--box", "4"], dir.path());
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn loose_tolerance_scale_only_helps() {
    let dir = tempfile::tempdir().unwrap();
    let r = dynalg(&["verify", "causal", "--tolerance-scale", "10"], dir.path());
    assert_eq!(r.status.code(), Some(0));
    let r = dynalg(&["verify", "causal", "--tolerance-scale", "-1"], dir.path());
    assert_eq!(r.status.code(), Some(2));
}
