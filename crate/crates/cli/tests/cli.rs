//! End-to-end tests of the command-line interface through the real binary.

use std::path::Path;
use std::process::{Command, Output};

fn cr3d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cr3d"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn gen_mesh_cube_writes_48_tets() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cube.txt");
    let output = cr3d(&["gen-mesh", "cube", "2", "--out", path.to_str().unwrap()]);
    assert!(output.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("t ")).count(), 48);
    assert!(text.starts_with("cr3dmesh 1\n"));
}

#[test]
fn gen_mesh_octahedron_has_8_tets() {
    let output = cr3d(&["gen-mesh", "octahedron"]);
    assert!(output.status.success());
    assert_eq!(
        stdout(&output)
            .lines()
            .filter(|l| l.starts_with("t "))
            .count(),
        8
    );
}

#[test]
fn gen_mesh_rejects_unknown_kind() {
    let output = cr3d(&["gen-mesh", "pyramid"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn check_passes_and_reports() {
    let output = cr3d(&["check", "--p-max", "2"]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.lines().any(|l| l.starts_with("PASS ")));
    assert!(!text.contains("FAIL"));
    assert!(text.contains("0 failed"));
}

#[test]
fn check_subset_at_p_max_one() {
    let output = cr3d(&["check", "--p-max", "1"]);
    assert!(output.status.success());
    let full = cr3d(&["check", "--p-max", "3"]);
    // same number of reported checks, smaller degree coverage
    assert_eq!(
        stdout(&output).lines().count(),
        stdout(&full).lines().count()
    );
}

#[test]
fn check_injected_perturbation_fails() {
    let output = cr3d(&["check", "--p-max", "2", "--inject-perturbation"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout(&output).contains("FAIL matrix-involution"));
}

#[test]
fn check_rejects_large_degree() {
    let output = cr3d(&["check", "--p-max", "9"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn basis_dump_writes_grids() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = cr3d(&[
        "basis-dump",
        "--p",
        "2",
        "--k",
        "0",
        "--family",
        "sym",
        "--grid-n",
        "10",
        "--out",
        out,
    ]);
    assert!(output.status.success());
    let triangle = dir.path().join("sym_p2_k0_triangle.csv");
    let lines = std::fs::read_to_string(&triangle).unwrap().lines().count();
    assert_eq!(lines, 1 + 100);
    assert!(dir.path().join("sym_p2_k0_tet_surface.csv").exists());

    let output = cr3d(&[
        "basis-dump",
        "--p",
        "1",
        "--k",
        "0",
        "--family",
        "refl",
        "--grid-n",
        "10",
        "--out",
        out,
    ]);
    assert!(output.status.success());
    assert!(dir.path().join("refl_p1_k0_triangle.csv").exists());
    assert!(dir.path().join("refl_p1_k0_patch_surface.csv").exists());
}

#[test]
fn basis_dump_rejects_missing_family_member() {
    let dir = tempfile::tempdir().unwrap();
    let output = cr3d(&[
        "basis-dump",
        "--p",
        "1",
        "--k",
        "0",
        "--family",
        "sym",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn solve_reproduces_polynomial_solution() {
    let output = cr3d(&[
        "solve",
        "--p",
        "6",
        "--gen",
        "cube:1",
        "--problem",
        "bubble",
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    let data = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = data.split(',').collect();
    let h1: f64 = fields[1].parse().unwrap();
    assert!(h1 <= 1e-8, "reported H1 error {h1}");
}

#[test]
fn solve_rejects_missing_mesh_file() {
    let output = cr3d(&["solve", "--p", "2", "--mesh", "/does/not/exist.txt"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn solve_accepts_mesh_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mesh.txt");
    let gen = cr3d(&["gen-mesh", "cube", "1", "--out", path.to_str().unwrap()]);
    assert!(gen.status.success());
    let output = cr3d(&["solve", "--p", "1", "--mesh", path.to_str().unwrap()]);
    assert!(output.status.success());
    assert!(stdout(&output).starts_with("dofs,h1_error,l2_error\n"));
}

#[test]
fn convergence_report_shape_and_determinism() {
    let run = || {
        let output = cr3d(&["convergence", "--p", "1", "--levels", "3"]);
        assert!(output.status.success());
        stdout(&output)
    };
    let first = run();
    assert_eq!(first.lines().count(), 4, "header plus three levels");
    assert!(first.starts_with("level,h,dofs,h1_error,l2_error,h1_rate,l2_rate\n"));
    // last level carries a fitted rate near one
    let last = first.lines().last().unwrap();
    let rate: f64 = last.split(',').nth(5).unwrap().parse().unwrap();
    assert!((rate - 1.0).abs() <= 0.2, "rate {rate}");
    // byte-identical on a second run
    assert_eq!(first, run());
}

#[test]
fn outputs_are_deterministic() {
    let a = cr3d(&["solve", "--p", "2", "--gen", "cube:2"]);
    let b = cr3d(&["solve", "--p", "2", "--gen", "cube:2"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));

    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.txt");
    let p2 = dir.path().join("b.txt");
    for p in [&p1, &p2] {
        assert!(
            cr3d(&["gen-mesh", "cube", "3", "--out", p.to_str().unwrap()])
                .status
                .success()
        );
    }
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    let _ = Path::new("unused");
}
