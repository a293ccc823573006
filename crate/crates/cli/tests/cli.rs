use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geotime"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Coarse disk dataset so the tests stay quick.
fn simulate_disk(out: &Path, seed: &str) -> Output {
    let cfg = config("disk.cfg");
    run(&["simulate", "--config", s(&cfg), "--out", s(out), "--h-src", "0.16", "--sensors", "32", "--seed", seed])
}

#[test]
fn disk_simulation_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate_disk(dir.path(), "1");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("m=32"), "{text}");
    assert!(text.contains("convexity margin"), "{text}");
    for f in ["dataset.bin", "dataset.bin.truth", "manifest.txt"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("config_sha256="));
}

#[test]
fn nonconvex_domain_is_refused_without_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("horseshoe.cfg");
    let out = run(&["simulate", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("convexity margin"), "{err}");
    assert!(!dir.path().join("dataset.bin").exists());
}

#[test]
fn same_seed_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(simulate_disk(a.path(), "5").status.success());
    let threaded = {
        let cfg = config("disk.cfg");
        run(&[
            "--threads", "2", "simulate", "--config", s(&cfg), "--out", s(b.path()), "--h-src", "0.16", "--sensors", "32",
            "--seed", "5",
        ])
    };
    assert!(threaded.status.success());
    for f in ["dataset.bin", "dataset.bin.truth", "manifest.txt"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
}

#[test]
fn truncated_dataset_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(simulate_disk(dir.path(), "1").status.success());
    let path = dir.path().join("dataset.bin");
    let bytes = std::fs::read(&path).unwrap();
    let cut = dir.path().join("cut.bin");
    std::fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
    let out = run(&["reconstruct", s(&cut), "--out", s(&dir.path().join("rec")), "--blind"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("byte"), "{err}");
}

#[test]
fn blind_and_sighted_artifacts_match() {
    let dir = tempfile::tempdir().unwrap();
    assert!(simulate_disk(dir.path(), "1").status.success());
    let data = dir.path().join("dataset.bin");
    let blind = dir.path().join("blind");
    let sighted = dir.path().join("sighted");
    let a = run(&["reconstruct", s(&data), "--out", s(&blind), "--blind", "--h-src", "0.16"]);
    let b = run(&["reconstruct", s(&data), "--out", s(&sighted), "--h-src", "0.16"]);
    assert!(a.status.success() && b.status.success());
    assert!(sighted.join("truth_check.txt").exists());
    assert!(!blind.join("truth_check.txt").exists());
    let mut names: Vec<_> = std::fs::read_dir(&blind).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 7);
    for n in names {
        let x = std::fs::read(blind.join(&n)).unwrap();
        let y = std::fs::read(sighted.join(&n)).unwrap();
        assert!(x == y, "{n:?} differs between blind and sighted runs");
    }

    let cfg = config("disk.cfg");
    let v = run(&["verify", s(&blind), "--data", s(&data), "--config", s(&cfg)]);
    assert!(v.status.success(), "{}", String::from_utf8_lossy(&v.stderr));
    let text = String::from_utf8(v.stdout).unwrap();
    assert!(text.contains("false_boundary=0 false_interior=0"), "{text}");
}

#[test]
fn euclidean_cut_locus_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("disk.cfg");
    let out = run(&["cutlocus", "--config", s(&cfg), "--point", "0.3", "-0.2", "--out", s(dir.path()), "--directions", "128"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("cut locus empty"), "{text}");
    assert!(dir.path().join("cutlocus.svg").exists());
}

#[test]
fn cut_locus_point_outside_domain_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("disk.cfg");
    let out = run(&["cutlocus", "--config", s(&cfg), "--point", "2", "0", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "geotime-config v1\npreset = disk\nsensors = many\n").unwrap();
    let out = run(&["simulate", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn counterexample_collapses_on_gamma_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["counterexample", "--out", s(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("collapse=true full_boundary_separates=true disk_separates=true"), "{text}");
    assert!(dir.path().join("points.csv").exists());
}
