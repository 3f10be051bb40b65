use std::path::Path;
use std::process::{Command, Output};

use heterocyl_cli::formats::Checkpoint;
use tempfile::TempDir;

fn heterocyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heterocyl"))
        .args(args)
        .env_remove("HETEROCYL_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn out(dir: &TempDir) -> &str {
    dir.path().to_str().unwrap()
}

/// Coarse solve; nx = 32 takes well under a second.
fn solve32(dir: &TempDir) -> Output {
    heterocyl(&["solve", "--output-dir", out(dir), "--nx", "32", "--nz-per-unit", "32", "--n-schedule", "4,6,8"])
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn lambda_star_agrees_and_forced_disagreement_exits_2() {
    let d = TempDir::new().unwrap();
    let o = heterocyl(&["lambda-star", "--output-dir", out(&d), "--lambda-nx", "128"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(d.path().join("lambda_star.toml")).unwrap();
    assert!(report.contains("agree = true"));
    let phi = read_csv(&d.path().join("phi.csv"));
    assert_eq!(phi.len(), 129);
    assert_eq!(phi[0][1], 0.0);
    let o = heterocyl(&["lambda-star", "--output-dir", out(&d), "--lambda-nx", "128", "--lambda-tol", "1e-12"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("disagree"));
}

#[test]
fn missing_output_dir_is_a_usage_error() {
    assert_eq!(code(&heterocyl(&["lambda-star", "--lambda-nx", "64"])), 1);
    assert_eq!(code(&heterocyl(&["solve"])), 1);
    assert_eq!(code(&heterocyl(&["no-such-command"])), 1);
    assert_eq!(code(&heterocyl(&["solve", "--grad-tol", "-1", "--output-dir", "/tmp/x"])), 1);
}

#[test]
fn output_dir_from_environment() {
    let d = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_heterocyl"))
        .args(["solve", "--nx", "32", "--nz-per-unit", "32", "--n-schedule", "4"])
        .env("HETEROCYL_OUTPUT_DIR", d.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(d.path().join("field.txt").exists());
}

#[test]
fn solve_writes_reloadable_checkpoint_and_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert_eq!(code(&solve32(&a)), 0);
    assert_eq!(code(&solve32(&b)), 0);
    for name in ["field.txt", "solve_report.toml", "hamiltonian.csv", "phi_solver.csv", "config.toml"] {
        let (x, y) = (std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
        assert!(x == y, "{name} differs between identical runs");
    }
    let text = std::fs::read_to_string(a.path().join("field.txt")).unwrap();
    let cp = Checkpoint::parse(&text).unwrap();
    assert_eq!(cp.to_text(), text);
    assert_eq!(cp.field.nx(), 32);
    assert_eq!(cp.field.half_length(), 8.0);
    let trace = read_csv(&a.path().join("hamiltonian.csv"));
    assert_eq!(trace.len(), cp.field.nz() - 1);
}

#[test]
fn short_cylinder_does_not_converge() {
    let d = TempDir::new().unwrap();
    let o = heterocyl(&["solve", "--output-dir", out(&d), "--nx", "32", "--nz-per-unit", "32", "--n-schedule", "2"]);
    assert_eq!(code(&o), 3);
    // The partial result is still saved.
    assert!(Checkpoint::load(&d.path().join("field.txt")).is_ok());
    assert!(std::fs::read_to_string(d.path().join("solve_report.toml")).unwrap().contains("converged = false"));
}

#[test]
fn converged_checkpoint_verifies() {
    let d = TempDir::new().unwrap();
    let o = heterocyl(&["solve", "--output-dir", out(&d), "--nx", "128", "--nz-per-unit", "128"]);
    assert_eq!(code(&o), 0);
    let o = heterocyl(&["verify", "--output-dir", out(&d)]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}");
    assert!(!stdout.contains("[FAIL]"));
    let report = std::fs::read_to_string(d.path().join("verification.toml")).unwrap();
    assert!(report.contains("all_pass = true"));
    let o = heterocyl(&["report", "--output-dir", out(&d)]);
    assert_eq!(code(&o), 0);
    let summary = std::fs::read_to_string(d.path().join("summary.txt")).unwrap();
    assert!(summary.contains("converged: true") && summary.contains("all pass: true"));
}

#[test]
fn constructed_faults_fail_verification() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&solve32(&d)), 0);
    let cp = Checkpoint::load(&d.path().join("field.txt")).unwrap();

    let mut bad = cp.clone();
    let j = bad.field.nz() / 2;
    let v = bad.field.get(16, j);
    bad.field.set(16, j, -v);
    let path = d.path().join("negated.txt");
    bad.save(&path).unwrap();
    let o = heterocyl(&["verify", "--output-dir", out(&d), "--checkpoint", path.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL] min ∂z u"));

    let mut zero = cp.clone();
    for j in 0..=zero.field.nz() {
        zero.field.row_mut(j).fill(0.0);
    }
    let path = d.path().join("zero.txt");
    zero.save(&path).unwrap();
    let o = heterocyl(&["verify", "--output-dir", out(&d), "--checkpoint", path.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL] top tail"));

    let path = d.path().join("corrupt.txt");
    std::fs::write(&path, "heterocyl-field v1\nnx,4\n").unwrap();
    let o = heterocyl(&["verify", "--output-dir", out(&d), "--checkpoint", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn euler_exports() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&solve32(&d)), 0);
    let o = heterocyl(&["euler-export", "--output-dir", out(&d), "--domain", "strip", "--window", "0,1,-8,8"]);
    assert_eq!(code(&o), 0);
    let flow = read_csv(&d.path().join("euler_strip.csv"));
    assert_eq!(flow.len(), 33 * 513);
    let div = flow.iter().map(|r| r[5]).filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(div <= 1e-12);
    assert!(d.path().join("theta_strip.csv").exists());

    let o = heterocyl(&["euler-export", "--output-dir", out(&d), "--domain", "plane", "--window=-4,4,-4,4"]);
    assert_eq!(code(&o), 0);
    let rows = read_csv(&d.path().join("euler_plane.csv"));
    let w = 8 * 32 + 1;
    for row in rows.chunks(w) {
        for a in 0..w {
            let (l, r) = (&row[a], &row[w - 1 - a]);
            assert_eq!(l[0], -r[0]);
            // u is odd in x₁: u1 = −∂z u odd, u2 = ∂x u and p even.
            assert_eq!(l[2], -r[2]);
            assert_eq!(l[3], r[3]);
            assert_eq!(l[4], r[4]);
        }
    }

    let o = heterocyl(&["euler-export", "--output-dir", out(&d), "--domain", "half-plane", "--window=1.5,2.5,-1,1"]);
    assert_eq!(code(&o), 0);
    let rows = read_csv(&d.path().join("euler_half_plane.csv"));
    let on_line: Vec<_> = rows.iter().filter(|r| r[0] == 2.0).collect();
    assert_eq!(on_line.len(), 65);
    assert!(on_line.iter().all(|r| r[2] == 0.0));

    let o = heterocyl(&["euler-export", "--output-dir", out(&d), "--domain", "strip", "--window=-0.5,1,-1,1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn config_file_and_flags() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, format!("nx = 32\nnz_per_unit = 32\nn_schedule = [4.0]\noutput_dir = {:?}\n", out(&d))).unwrap();
    let o = heterocyl(&["solve", "--config", cfg.to_str().unwrap(), "--n-schedule", "4,6"]);
    assert_eq!(code(&o), 0);
    let saved = heterocyl_cli::RunConfig::load(&d.path().join("config.toml")).unwrap();
    assert_eq!(saved.nx, 32);
    assert_eq!(saved.n_schedule, vec![4.0, 6.0]);
    std::fs::write(&cfg, "nx = \"many\"\n").unwrap();
    assert_eq!(code(&heterocyl(&["solve", "--config", cfg.to_str().unwrap()])), 1);
}
