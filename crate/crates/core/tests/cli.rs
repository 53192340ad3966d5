//! End-to-end checks of the `celsim` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn celsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_celsim")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn working_point_file() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data/working_point.params")
        .display()
        .to_string()
}

/// Value of `key = value` in a key/value body.
fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing from\n{text}"))
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn shipped_parameter_file_is_the_default_working_point() {
    let from_file = stdout(&celsim(&["params", "--params", &working_point_file()]));
    let builtin = stdout(&celsim(&["params"]));
    assert_eq!(from_file, builtin);
    assert!(from_file.contains("Omega = 9.00000000000e8  # Hz"), "{from_file}");
}

#[test]
fn steady_state_without_pump_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("dark.params");
    fs::write(&file, "Omega = 0\n").unwrap();
    let text = stdout(&celsim(&["steady", "--params", file.to_str().unwrap()]));
    assert_eq!(value(&text, "n1"), 0.0);
    assert_eq!(value(&text, "n2"), 0.0);
    assert_eq!(value(&text, "rho_gg0"), 1.0);
}

#[test]
fn steady_state_at_the_working_point_lases_in_both_modes() {
    let text = stdout(&celsim(&["steady"]));
    let (n1, n2) = (value(&text, "n1"), value(&text, "n2"));
    assert!((2.5..=10.0).contains(&n1) && (1.0..=4.0).contains(&n2), "{n1} {n2}");
    assert!(value(&text, "frequency_sum_error").abs() < 1e-9);
    assert!(text.starts_with("# celsim "));
}

#[test]
fn exit_codes_distinguish_configuration_from_io() {
    let missing = celsim(&["steady", "--params", "/definitely/not/here.params"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/definitely/not/here.params"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.params");
    fs::write(&bad, "kappa1 = -3\n").unwrap();
    assert_eq!(
        celsim(&["steady", "--params", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
    fs::write(&bad, "not_a_key = 1\n").unwrap();
    assert_eq!(
        celsim(&["steady", "--params", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );

    assert_eq!(celsim(&["sweep", "--x", "Omega=0,1e8"]).status.code(), Some(2));
    assert_eq!(celsim(&["steady", "--bogus"]).status.code(), Some(2));

    let unwritable = dir.path().join("no/such/dir/out.txt");
    assert_eq!(
        celsim(&["params", "--out", unwritable.to_str().unwrap()]).status.code(),
        Some(4)
    );
}

#[test]
fn sweep_over_pump_strength() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    stdout(&celsim(&[
        "sweep",
        "--x",
        "Omega=0,9e8",
        "--out",
        out.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&out).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.0);
    assert!(rows.iter().all(|r| r.last().unwrap().is_empty()));

    // A single-point sweep reproduces the steady command.
    let steady = stdout(&celsim(&["steady"]));
    let n1: f64 = rows[1][2].parse().unwrap();
    let n2: f64 = rows[1][3].parse().unwrap();
    assert_eq!(n1, value(&steady, "n1"));
    assert_eq!(n2, value(&steady, "n2"));
    assert!(!dir.path().join("sweep.csv.partial").exists());
}

#[test]
fn rerunning_a_finished_sweep_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let args = ["sweep", "--x", "Omega=1e8:9e8:5", "--out", out.to_str().unwrap()];
    stdout(&celsim(&args));
    let first = fs::read(&out).unwrap();
    stdout(&celsim(&args));
    assert_eq!(fs::read(&out).unwrap(), first);
}

#[test]
fn interrupted_sweep_resumes_after_the_last_complete_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let args = ["sweep", "--x", "Omega=1e8:9e8:4", "--out", out.to_str().unwrap()];
    stdout(&celsim(&args));
    let full = fs::read_to_string(&out).unwrap();

    // Keep the header and first two rows, mark row 1 so recomputation would
    // be visible, and leave a torn third row.
    let mut lines: Vec<String> = full.lines().map(str::to_string).collect();
    let first_data = lines.iter().position(|l| l.starts_with("0,")).unwrap();
    lines.truncate(first_data + 2);
    let marked = {
        let mut fields: Vec<&str> = lines[first_data + 1].split(',').collect();
        fields[2] = "7.77700000000e0";
        fields.join(",")
    };
    lines[first_data + 1] = marked.clone();
    let mut partial = lines.join("\n") + "\n";
    partial.push_str("2,5.66");
    fs::remove_file(&out).unwrap();
    fs::write(dir.path().join("s.csv.partial"), &partial).unwrap();

    stdout(&celsim(&args));
    let resumed = fs::read_to_string(&out).unwrap();
    let rows = data_rows(&resumed);
    assert_eq!(rows.len(), 4);
    assert!(resumed.contains(&marked), "completed row was recomputed");
    assert_eq!(data_rows(&full)[2..], rows[2..]);
}

#[test]
fn changed_settings_refuse_to_resume() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    stdout(&celsim(&[
        "sweep",
        "--x",
        "Omega=1e8,2e8",
        "--out",
        out.to_str().unwrap(),
    ]));
    let o = celsim(&["sweep", "--x", "Omega=1e8,3e8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parallel_jobs_do_not_change_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let grid = ["--x", "Omega=1e8:9e8:6", "--y", "phi=0:3:3"];
    stdout(&celsim(&[&["sweep", "--out", a.to_str().unwrap()][..], &grid].concat()));
    stdout(&celsim(
        &[&["sweep", "--jobs", "4", "--out", b.to_str().unwrap()][..], &grid].concat(),
    ));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let wd = "1.19e10:1.21e10:21";
    let serial = stdout(&celsim(&["transmit", "--trunc", "0,3", "--wd", wd]));
    let parallel = stdout(&celsim(&["transmit", "--trunc", "0,3", "--jobs", "3", "--wd", wd]));
    assert_eq!(serial, parallel);
}

#[test]
fn output_file_is_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.txt");
    stdout(&celsim(&["params", "--out", out.to_str().unwrap()]));
    assert_eq!(fs::read_to_string(&out).unwrap(), stdout(&celsim(&["params"])));
    let names: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names.len(), 1, "{names:?}");
}
