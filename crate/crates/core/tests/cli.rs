use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ampenc::circuit::{qasm, Circuit};
use ampenc::run::RunReport;

fn ampenc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ampenc"))
        .args(args)
        .current_dir(dir)
        .env_remove("AMPENC_COST_MODEL")
        .output()
        .expect("binary runs")
}

/// Data rows of `iterates.csv` as numbers (empty cells become NaN).
fn rows(dir: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(dir.join("iterates.csv")).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

fn report(dir: &Path) -> RunReport {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn fixed_point_gate_level_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = ampenc(&["fixed-point", "--problem", "paper-g", "--steps", "3", "--backend", "gate-level", "--out", "o"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = rows(&dir.path().join("o"));
    let want = [[1.0, 1.0], [0.5, 1.0], [0.71875, 0.96875], [0.64404296875, 0.9921875]];
    assert_eq!(rows.len(), 4);
    for (row, w) in rows.iter().zip(want) {
        assert!((row[1] - w[0]).abs() <= 1e-9 && (row[3] - w[1]).abs() <= 1e-9, "{row:?}");
        assert!(row[2].abs() <= 1e-9 && row[4].abs() <= 1e-9);
        // norm column equals the Euclidean norm of the iterate
        assert!((row[5] - (row[1] * row[1] + row[3] * row[3]).sqrt()).abs() < 1e-12);
    }
    // gate counts grow with every step
    assert!(rows.windows(2).all(|w| w[1][8] > w[0][8]));
}

#[test]
fn zero_steps_keeps_only_x0() {
    let dir = tempfile::tempdir().unwrap();
    let o = ampenc(&["fixed-point", "--steps", "0", "--out", "o"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = rows(&dir.path().join("o"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.0);
}

#[test]
fn algebraic_fourth_step_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = ampenc(&["fixed-point", "--backend", "algebraic", "--steps", "4", "--out", "o"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let last = rows(&dir.path().join("o")).pop().unwrap();
    // fixed point of g by damped classical iteration
    let (mut a, mut b) = (1.0f64, 1.0f64);
    for _ in 0..200 {
        let (ga, gb) = (1.0 - (a + b).powi(2) / 8.0, 1.0 - (a - b).powi(2) / 8.0);
        (a, b) = ((a + ga) / 2.0, (b + gb) / 2.0);
    }
    let err = ((last[1] - a).powi(2) + (last[3] - b).powi(2)).sqrt();
    assert!((3e-3..=5e-3).contains(&err), "error {err}");
}

#[test]
fn newton_reference_two_steps() {
    let dir = tempfile::tempdir().unwrap();
    let o = ampenc(
        &["newton", "--problem", "paper-g", "--x0", "2,0.25", "--solver", "reference", "--steps", "2", "--out", "o"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let last = rows(&dir.path().join("o")).pop().unwrap();
    assert!((last[1] - 8f64.sqrt()).abs() <= 1e-2 && last[3].abs() <= 1e-2, "{last:?}");
    let r = report(&dir.path().join("o"));
    assert!(r.report.records.iter().all(|s| s.solver_tolerance.is_some()));
}

#[test]
fn newton_qsvt_first_step() {
    let dir = tempfile::tempdir().unwrap();
    let angles = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/angles-k6-e0.1.txt");
    let o = ampenc(
        &["newton", "--x0", "2,0.25", "--steps", "1", "--solver", "qsvt", "--angles", angles.to_str().unwrap(), "--out", "o"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let last = rows(&dir.path().join("o")).pop().unwrap();
    assert!((last[1] - 3.032).abs() <= 0.05 && (last[3] + 0.129).abs() <= 0.05, "{last:?}");
    let r = report(&dir.path().join("o"));
    assert!(r.report.records[0].angle_deviation.unwrap() <= 0.1);
}

#[test]
fn linear_problem_converges_in_one_step() {
    let dir = tempfile::tempdir().unwrap();
    // f(x) = A0 + A1 x with root -A1⁻¹ A0 = (0.5, -0.5)
    fs::write(dir.path().join("linear.txt"), "N 2\nK 1\nA 0\n-0.5\n0.25\nA 1\n1 0\n0 0.5\n").unwrap();
    let o = ampenc(&["newton", "--problem", "linear.txt", "--x0", "1,1", "--steps", "1", "--out", "o"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let last = rows(&dir.path().join("o")).pop().unwrap();
    assert!((last[1] - 0.5).abs() < 1e-9 && (last[3] + 0.5).abs() < 1e-9, "{last:?}");
}

#[test]
fn outputs_are_deterministic_and_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["fixed-point", "--steps", "2", "--estimator", "monte-carlo", "--shots", "4000", "--reps", "5", "--seed", "11", "--out", "o"];
    assert!(ampenc(&args, dir.path()).status.success());
    let first = (fs::read(dir.path().join("o/report.json")).unwrap(), fs::read(dir.path().join("o/iterates.csv")).unwrap());
    assert!(ampenc(&args, dir.path()).status.success());
    let second = (fs::read(dir.path().join("o/report.json")).unwrap(), fs::read(dir.path().join("o/iterates.csv")).unwrap());
    assert_eq!(first, second);

    let r = report(&dir.path().join("o"));
    assert_eq!((r.seed, r.config.seed), (11, 11));
    assert_eq!(r.version, env!("CARGO_PKG_VERSION"));
    assert_eq!(r.schema_version, ampenc::run::REPORT_SCHEMA_VERSION);
    let csv = String::from_utf8(first.1).unwrap();
    assert!(csv.lines().take_while(|l| l.starts_with('#')).any(|l| l.contains("seed 11") && l.contains("backend gate-level")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = ampenc(&["fixed-point", "--problem", "missing.txt", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("\"category\":\"config\""));

    // singular Jacobian at x1 = x2
    let o = ampenc(&["newton", "--x0", "1,1", "--steps", "1", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("\"category\":\"solver\""));

    // the bundled angles are for κ = 6
    let o = ampenc(&["newton", "--solver", "qsvt", "--kappa", "12", "--steps", "1", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("deviation"));

    let o = ampenc(&["fixed-point", "--backend", "quantum"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_suite_and_fault_injection() {
    let dir = tempfile::tempdir().unwrap();
    let o = ampenc(&["verify"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));

    let o = Command::new(env!("CARGO_BIN_EXE_ampenc"))
        .args(["verify", "--filter", "counts"])
        .env("AMPENC_COST_MODEL", "mcx=2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL counts/"));

    let o = ampenc(&["verify", "--filter", "amplify"], dir.path());
    let out = String::from_utf8_lossy(&o.stdout);
    let ids: Vec<&str> = out.lines().filter_map(|l| l.split_whitespace().nth(1)).filter(|s| s.contains('/')).collect();
    assert!(o.status.success());
    assert_eq!(ids.len(), 3);
    assert!(ids.iter().all(|id| id.starts_with("amplify/")));
}

#[test]
fn qasm_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = ampenc(&["export-qasm", "--steps", "3", "--out", "q"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for step in 0..=3 {
        let text = fs::read_to_string(dir.path().join(format!("q/step-{step}.qasm"))).unwrap();
        assert!(text.starts_with("OPENQASM 3.0;"));
        let c = qasm::import(&text).unwrap();
        assert_eq!(qasm::export(&c), text, "step {step} does not round-trip");
    }
    let step1 = qasm::import(&fs::read_to_string(dir.path().join("q/step-1.qasm")).unwrap()).unwrap();
    assert!(step1.wires() >= 3);

    let o = ampenc(&["export-qasm", "--steps", "5", "--out", "wide"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gate-level limit"));
}

#[test]
fn empty_circuit_exports_header_only() {
    let text = qasm::export(&Circuit::new(2, "empty"));
    assert_eq!(text, "OPENQASM 3.0;\ninclude \"stdgates.inc\";\n// empty\nqubit[2] q;\n");
    let back = qasm::import(&text).unwrap();
    assert!(back.is_empty());
    assert_eq!(back.wires(), 2);
}
