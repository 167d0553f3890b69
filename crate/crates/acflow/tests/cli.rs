use std::path::Path;
use std::process::{Command, Output};

use acflow::output::parse_csv;
use acflow::snapshot::read_snapshot;

fn acflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_DIAMETER: &str = "scenario = diameter\ngrid.nr = 32\ngrid.ntheta = 64\nsolver.eps = 0.1\nsolver.t_end = 0.01\ndiagnostics.interface = true\n";

#[test]
fn zero_length_run_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.conf",
        "scenario = diameter\ngrid.nr = 32\ngrid.ntheta = 64\nsolver.eps = 0.1\nsolver.t_end = 0\n",
    );
    let out = dir.path().join("out");
    let o = acflow(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let (header, rows) =
        parse_csv(&std::fs::read_to_string(out.join("diagnostics.csv")).unwrap()).unwrap();
    assert_eq!(header[..3], ["t", "E_total", "E_boundary"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], Some(0.0));
}

#[test]
fn unknown_key_is_a_config_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.conf",
        "scenario = diameter\nsolver.eps = 0.1\nsolver.t_end = 0\nsolver.epsilon = 3\n",
    );
    let o = acflow(&[
        "run",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("solver.epsilon"), "{err}");
    assert!(err.contains('4'), "line number missing: {err}");
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = acflow(&[
        "run",
        "--config",
        "/nonexistent/x.conf",
        "--out",
        "/tmp/never",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_writes_snapshots_and_interfaces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.conf", SMALL_DIAMETER);
    let out = dir.path().join("out");
    let o = acflow(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.code() == Some(0) || o.status.code() == Some(1));
    let first = read_snapshot(&out.join("snapshot_t0.000000.acsnap")).unwrap();
    let last = read_snapshot(&out.join("snapshot_t0.010000.acsnap")).unwrap();
    assert_eq!(first.grid().nr(), 32);
    assert!((last.t - 0.01).abs() < 1e-12);
    let iface = std::fs::read_to_string(out.join("interface_t0.010000.csv")).unwrap();
    assert!(iface.starts_with("x,y,segment\n"));
    assert!(iface.lines().count() > 2);
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("contact_angle"));
}

#[test]
fn identical_configs_give_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.conf", SMALL_DIAMETER);
    let read = |name: &str| {
        let out = dir.path().join(name);
        acflow(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        std::fs::read(out.join("diagnostics.csv")).unwrap()
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn single_member_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.conf",
        "scenario = concentric\nscenario.r0 = 0.6\nsolver.eps = 0.1\nsolver.t_end = 0.06\nprobe.1.y = 0.9, 0.0\nprobe.1.s = 0.07\n",
    );
    let out = dir.path().join("sweep");
    let o = acflow(&[
        "sweep",
        "--config",
        &cfg,
        "--eps",
        "0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        o.status.code() == Some(0) || o.status.code() == Some(1),
        "{o:?}"
    );
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "eps,nr,ntheta,int_abs_xi_t0.05,sup_xi,monotonicity_max_defect,c4_fit,sup_eps_grad"
    );
    assert!(lines.next().unwrap().starts_with("0.1,40,"));
    assert!(lines.next().is_none());
    assert!(out.join("eps_0.1").join("diagnostics.csv").exists());
}

#[test]
fn sweep_rejects_increasing_eps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.conf",
        "scenario = concentric\nscenario.r0 = 0.6\nsolver.eps = 0.1\nsolver.t_end = 0.01\n",
    );
    let o = acflow(&[
        "sweep",
        "--config",
        &cfg,
        "--eps",
        "0.05,0.1",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kernel_check_exit_codes() {
    let ok = acflow(&["kernel-check", "--n", "3", "--samples", "50", "--seed", "7"]);
    assert_eq!(ok.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.starts_with("PASS identity_standard_n3"), "{stdout}");
    assert_eq!(acflow(&["kernel-check", "--n", "5"]).status.code(), Some(2));
    assert_eq!(acflow(&["kernel-check", "--bogus"]).status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let o = acflow(&["selftest"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
}
