use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hctps_cli::run::without_wall_time;
use hctps_cli::RunManifest;
use hctps_core::persist;

fn hctps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hctps")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn normalized(path: &Path) -> String {
    persist::persist(&without_wall_time(&persist::load_file(path).unwrap()))
}

#[test]
fn global_only_writes_a_single_phase() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hctps(&["run", "--function", "F12", "--mode", "global-only", "--runs", "1", "--seed", "3", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let file = dir.path().join("experiments/F12-d30-s3-global-only.hctps.jsonl");
    let rec = persist::load_file(&file).unwrap();
    assert_eq!(rec.phases.len(), 1);
    assert_eq!(rec.phases[0].runs.len(), 1);
    assert_eq!(rec.status, hctps_core::ExperimentStatus::Satisfied);
    let csv = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "id,variant,mean,best,worst,median,st_dev");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("F12,GA,"));
}

#[test]
fn all_functions_fixture_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hctps(&["run", "--function", "all", "--runs", "2", "--seed", "42", "--mode", "hctps-fixture", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files = fs::read_dir(dir.path().join("experiments")).unwrap().count();
    assert_eq!(files, 14);
    let csv = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 28);
    let md = fs::read_to_string(dir.path().join("comparison.md")).unwrap();
    assert_eq!(md.lines().count(), 2 + 14 * 5);
    assert!(md.starts_with("| ID | | HCTPS-GA | GA |"));
    assert!(stdout(&o).contains("| F14 | Mean |"));

    let f3 = persist::load_file(&dir.path().join("experiments/F3-d30-s42-hctps-fixture.hctps.jsonl")).unwrap();
    assert_eq!(f3.phases.len(), 2);
    assert_eq!(f3.phases[1].subcube_spec.unwrap().octant_index, 8);
}

#[test]
fn reruns_are_identical_apart_from_wall_time() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = dir.path().to_str().unwrap();
        let o = hctps(&["run", "--function", "F4", "--runs", "4", "--seed", "9", "--out", out]);
        assert!(o.status.success());
    }
    for file in ["comparison.csv", "comparison.md"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
    // manifests differ only in the output directory
    let ma = RunManifest::load(&a.path().join("manifest.json")).unwrap();
    let mb = RunManifest::load(&b.path().join("manifest.json")).unwrap();
    assert_eq!(RunManifest { out: mb.out.clone(), ..ma }, mb);
    let name = "experiments/F4-d30-s9-hctps-fixture.hctps.jsonl";
    assert_eq!(normalized(&a.path().join(name)), normalized(&b.path().join(name)));

    // replaying the written manifest reproduces the tables
    let c = tempfile::tempdir().unwrap();
    let mut manifest = RunManifest::load(&a.path().join("manifest.json")).unwrap();
    manifest.out = c.path().to_path_buf();
    let manifest_path = c.path().join("input.json");
    fs::write(&manifest_path, manifest.to_json()).unwrap();
    let o = hctps(&["run", "--manifest", manifest_path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(a.path().join("comparison.csv")).unwrap(), fs::read(c.path().join("comparison.csv")).unwrap());
}

#[test]
fn custom_octant_and_scale() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hctps(&[
        "run", "--function", "F1", "--runs", "2", "--mode", "hctps-custom", "--octant", "6", "--scale-exp", "80", "--out", out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = persist::load_file(&dir.path().join("experiments/F1-d30-s0-hctps-custom.hctps.jsonl")).unwrap();
    let spec = rec.phases[1].subcube_spec.unwrap();
    assert_eq!((spec.octant_index, spec.scale_exponent, spec.dim), (6, 80, 30));
    assert!(rec.report().unwrap().best.value <= 2.2e-37);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["run", "--dim", "2", "--out", out],
        vec!["run", "--mode", "hctps-custom", "--out", out],
        vec!["run", "--mode", "hctps-custom", "--octant", "0", "--out", out],
        vec!["run", "--function", "F22", "--out", out],
        vec!["run", "--budget-per-dim", "1", "--function", "F1", "--out", out],
        vec!["verify", "--only", "no-such-criterion"],
    ] {
        assert_eq!(hctps(&args).status.code(), Some(2), "{args:?}");
    }
    let bad_manifest = dir.path().join("bad.json");
    fs::write(&bad_manifest, "{\"function\": \"F1\"}").unwrap();
    assert_eq!(hctps(&["run", "--manifest", bad_manifest.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(hctps(&["run", "--manifest", missing.to_str().unwrap()]).status.code(), Some(3));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let under_file = blocker.join("out");
    let o = hctps(&["run", "--function", "F1", "--runs", "1", "--out", under_file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn verify_passes_on_clean_fixtures() {
    let o = hctps(&["verify", "--only", "function-spot-checks,geometry-fixtures,coverage-estimate"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}

#[test]
fn verify_catches_a_tampered_subcube_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = include_str!("../../core/fixtures/subcubes.json");
    let start = table.find("\"F1\"").unwrap();
    let end = start + table[start..].find('}').unwrap();
    let row = &table[start..end];
    assert!(row.contains("80"));
    let tampered = format!("{}{}{}", &table[..start], row.replace("80", "8"), &table[end..]);
    fs::write(dir.path().join("subcubes.json"), tampered).unwrap();

    let o = hctps(&["verify", "--fixtures", dir.path().to_str().unwrap(), "--only", "geometry-fixtures"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("FAIL geometry-fixtures")), "{text}");
}

#[test]
fn verify_rejects_a_raised_budget() {
    let o = hctps(&["verify", "--budget-per-dim", "60", "--runs", "2", "--only", "protocol-budget"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().any(|l| l.starts_with("FAIL protocol-budget")));

    let o = hctps(&["verify", "--runs", "2", "--only", "protocol-budget"]);
    assert!(o.status.success(), "{}", stdout(&o));
}
