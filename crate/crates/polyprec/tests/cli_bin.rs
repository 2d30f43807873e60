//! End-to-end tests of the `polyprec` binary: scenario execution with exit
//! codes, matrix generation, polynomial certification, and the
//! POLYPREC_SEED override.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polyprec"))
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("polyprec-bin-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

const SCENARIO: &str = r#"
seed = 11

[matrix]
kind = "laplace2d"
n = 10

[function]
kind = "invsqrt"

[oracle]
enabled = true

[[runs]]
label = "plain"
method = "plain"
tol = 1e-8
max_iter = 100
reorth = true

[[runs]]
label = "cheb-8"
method = "left_prec"
poly = "chebyshev"
d = 8
tol = 1e-7
max_iter = 60
check_every = 4
"#;

#[test]
fn run_subcommand_writes_outputs_and_exits_zero() {
    let dir = tmpdir("run");
    let scenario = dir.join("scenario.toml");
    fs::write(&scenario, SCENARIO).unwrap();
    let out = dir.join("out");
    let status = bin()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--jobs",
            "2",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("summary.csv").exists());
    assert!(out.join("summary.txt").exists());
    assert!(out.join("00_plain_convergence.csv").exists());
    assert!(out.join("01_cheb-8_convergence.csv").exists());
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().count() == 3, "two data rows plus header");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn nonconverged_scenario_exits_two() {
    let dir = tmpdir("cap");
    let scenario = dir.join("scenario.toml");
    fs::write(
        &scenario,
        SCENARIO.replace("max_iter = 100", "max_iter = 1"),
    )
    .unwrap();
    let status = bin()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_scenario_exits_64() {
    let dir = tmpdir("bad");
    let scenario = dir.join("scenario.toml");
    fs::write(&scenario, "this is not toml [").unwrap();
    let status = bin()
        .args(["run", scenario.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(64));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_scenario_exits_74() {
    let status = bin()
        .args(["run", "/definitely/not/here.toml"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(74));
}

#[test]
fn gen_matrix_roundtrips_through_matrix_market() {
    let dir = tmpdir("gen");
    let path = dir.join("lap.mtx");
    let status = bin()
        .args([
            "gen-matrix",
            "laplace2d",
            "--n",
            "6",
            "-o",
            path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let m = polyprec::operators::read_matrix_market(&path).unwrap();
    assert_eq!(m.dim(), 36);
    assert_eq!(m.get(0, 0), polyprec::Scalar::new(4.0, 0.0));

    // A scenario can consume the generated file.
    let scenario = dir.join("mtx.toml");
    fs::write(
        &scenario,
        format!(
            r#"
seed = 5
[matrix]
kind = "matrix_market"
path = "{}"
[function]
kind = "invsqrt"
[[runs]]
method = "plain"
tol = 1e-7
max_iter = 80
reorth = true
"#,
            path.display()
        ),
    )
    .unwrap();
    let status = bin()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn certify_reports_branch_certificate() {
    let dir = tmpdir("cert");
    let path = dir.join("q.poly");
    let q = polyprec::poly::chebyshev_invsqrt(0.5, 8.0, 15).unwrap();
    polyprec::poly::write_poly_file(&path, &q).unwrap();

    let output = bin()
        .args(["certify", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("satisfied:       true"), "{text}");

    // A grid reaching far beyond the interval where q goes negative.
    let output = bin()
        .args(["certify", path.to_str().unwrap(), "--grid", "0.5,80.0,400"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("satisfied:       false"), "{text}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn env_seed_override_changes_runs_deterministically() {
    let dir = tmpdir("seed");
    let scenario = dir.join("scenario.toml");
    fs::write(&scenario, SCENARIO).unwrap();

    let run = |out: &PathBuf, seed: Option<&str>| {
        let mut cmd = bin();
        cmd.args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        match seed {
            Some(s) => cmd.env("POLYPREC_SEED", s),
            None => cmd.env_remove("POLYPREC_SEED"),
        };
        assert_eq!(cmd.status().unwrap().code(), Some(0));
    };
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    let out_c = dir.join("c");
    run(&out_a, Some("123"));
    run(&out_b, Some("123"));
    run(&out_c, None);

    let read = |out: &PathBuf| fs::read(out.join("00_plain_convergence.csv")).unwrap();
    assert_eq!(read(&out_a), read(&out_b), "same override seed must agree");
    assert_ne!(
        read(&out_a),
        read(&out_c),
        "override must differ from the scenario seed"
    );
    fs::remove_dir_all(&dir).ok();
}
