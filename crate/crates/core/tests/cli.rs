use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lab(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lab"));
    cmd.args(args).env_remove("LAB_THREADS");
    if let Some(t) = threads {
        cmd.env("LAB_THREADS", t);
    }
    cmd.output().expect("lab binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const MINIMAL: &str = r#"
model = "padic{3,2,haar}"
weights = ["power{1}"]
p_grid = [2.0]
checks = ["RHI"]
output_dir = "out"
"#;

#[test]
fn describe_prints_the_level_table() {
    let out = lab(&["describe", "padic{3,2}"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("padic{3,2}: 9 elements, D=3, indices 0..2\n"), "{text}");
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn describe_rejects_bad_models() {
    for spec in ["padic{4,2}", "window{0}", "torus{3}"] {
        let out = lab(&["describe", spec], None);
        assert_eq!(out.status.code(), Some(2), "{spec}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn minimal_run_writes_one_passing_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), MINIMAL);
    let out = lab(&["run", &cfg], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("RHI: 1 rows, 0 failed"), "{stdout}");
    assert!(stdout.contains("status: PASS"));

    let mut rd = csv::Reader::from_path(dir.path().join("out/report.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "RHI");
    assert_eq!(&rows[0][1], "padic{3,2}");
    assert_eq!(&rows[0][2], "power{1}");
    assert_eq!(&rows[0][8], "true");
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 1);
    assert!(dir.path().join("out/constants.csv").exists());
}

#[test]
fn output_dir_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), MINIMAL);
    let target = dir.path().join("elsewhere");
    let out = lab(&["run", &cfg, "--output-dir", target.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("report.csv").exists());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn invalid_configs_exit_with_2() {
    let bodies = [
        MINIMAL.replace(r#"checks = ["RHI"]"#, "checks = []"),
        MINIMAL.replace("RHI", "NOPE"),
        MINIMAL.replace("p_grid = [2.0]", "p_grid = [1.0]"),
        format!("{MINIMAL}\nunknown_key = 1\n"),
        MINIMAL.replace("padic{3,2,haar}", "padic{3,2,missing.csv}"),
    ];
    for body in &bodies {
        let dir = TempDir::new().unwrap();
        let cfg = write_config(dir.path(), body);
        let out = lab(&["run", &cfg], None);
        assert_eq!(out.status.code(), Some(2), "{body}");
    }
    let out = lab(&["run", "/nonexistent/lab.toml"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_checks_exit_with_1() {
    // fold leg: the Fujii-Wilson constant of sigma exceeds [sigma]_{A_{3/2}} here
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
model = "padic{2,1,haar}"
weights = ["power{-1.5}"]
p_grid = [3.0]
checks = ["BUCKLEY"]
output_dir = "out"
"#,
    );
    let out = lab(&["run", &cfg], None);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8(out.stdout).unwrap().contains("status: FAIL"));
}

fn run_tree(threads: Option<&str>) -> Vec<(String, Vec<u8>)> {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
model = "window{4}"
weights = ["power{-1}", "random{-3,3,5,2}"]
p_grid = [1.5, 3.0]
q_grid = [1.0, 2.0]
checks = ["RHI", "OPEN", "WEAK", "DUALITY", "A1", "CZ"]
format = "both"
output_dir = "out"
"#,
    );
    let out = lab(&["run", &cfg], threads);
    assert!(out.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files = Vec::new();
    let mut stack = vec![dir.path().join("out")];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(dir.path()).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn output_is_independent_of_thread_count() {
    let one = run_tree(Some("1"));
    assert!(one.iter().any(|(n, _)| n.contains("cz_families")));
    assert_eq!(one, run_tree(Some("3")));
    assert_eq!(one, run_tree(None));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), MINIMAL);
    assert_eq!(lab(&["run", &cfg], Some("zero")).status.code(), Some(2));
    assert_eq!(lab(&["run", &cfg], Some("0")).status.code(), Some(2));
}
