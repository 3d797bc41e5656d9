use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const ZETA_STAR: f64 = 1.199_678_640_257_734;

fn jacobi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jacobi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(stdout(out).trim()).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn expected_code(classification: &str) -> i32 {
    match classification {
        "PositiveDefinite" => 0,
        "Indefinite" | "DegenerateAtB" => 2,
        "PreconditionFailed" => 3,
        other => panic!("unknown classification {other}"),
    }
}

#[test]
fn high_branch_is_stable() {
    let out = jacobi(&[
        "check",
        "catenary-fixed-height",
        "--a",
        "0",
        "--b",
        "1",
        "--yb",
        "2",
        "--branch",
        "high",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("PositiveDefinite"));
}

#[test]
fn low_branch_has_a_conjugate_point() {
    let out = jacobi(&[
        "--json",
        "check",
        "catenary-fixed-height",
        "--yb",
        "2",
        "--branch",
        "low",
    ]);
    assert_eq!(code(&out), 2);
    let v = json(&out);
    assert_eq!(v["classification"], "Indefinite");
    let x = v["conjugate_x"].as_f64().unwrap();
    assert!((x - 0.564).abs() < 1e-3, "{x}");
    assert!((x - ZETA_STAR * 0.470_189_980_469_065).abs() < 1e-8);
    for key in [
        "min_P",
        "R_at_a",
        "Gyp_at_a",
        "min_abs_T",
        "delta_triple_deriv",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["Gyp_at_a"].is_null());
}

#[test]
fn fixed_length_is_stable() {
    let out = jacobi(&["check", "catenary-fixed-length", "--ell", "2", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["classification"], "PositiveDefinite");
    assert!(v["conjugate_x"].is_null());
    assert!((v["delta_triple_deriv"].as_f64().unwrap() - 20.644_110_443).abs() < 1e-6);
}

#[test]
fn infeasible_length_is_an_error() {
    let out = jacobi(&["check", "catenary-fixed-length", "--ell", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("ell"));
}

#[test]
fn sweep_flips_once_at_the_threshold() {
    let out = jacobi(&[
        "--json",
        "check",
        "catenary-fixed-height",
        "--sweep",
        "omega=0.6:1.2:25",
    ]);
    assert_eq!(code(&out), 2);
    let rows: Vec<Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 25);
    let threshold = 1.0 / ZETA_STAR;
    for r in &rows {
        let w = r["omega"].as_f64().unwrap();
        let want = if w < threshold {
            "Indefinite"
        } else {
            "PositiveDefinite"
        };
        assert_eq!(r["classification"], want, "omega {w}");
    }
}

#[test]
fn oracle_agrees_on_builtins() {
    for branch in ["high", "low"] {
        let out = jacobi(&[
            "--json",
            "oracle",
            "catenary-fixed-height",
            "--branch",
            branch,
            "-n",
            "256",
        ]);
        assert_eq!(code(&out), 0, "{}", stdout(&out));
        assert_eq!(json(&out)["agreement"], "agree");
    }
    let out = jacobi(&["--json", "oracle", "catenary-fixed-length"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["agreement"], "agree");
    assert_eq!(v["constrained"], true);
}

#[test]
fn oracle_rejects_coarse_grids() {
    let out = jacobi(&["oracle", "catenary-fixed-height", "-n", "4"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("at least 8"));
}

#[test]
fn trace_columns_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let out = jacobi(&[
        "trace",
        "catenary-fixed-length",
        "--omega",
        "1",
        "--b",
        "2",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,P,Q,R,T,Gyp,u,uprime,v,vprime,m,n,delta"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() >= 1000);
    let first = &rows[0];
    assert_eq!(first[0], 0.0);
    for col in [3, 10, 11, 12] {
        assert_eq!(first[col], 0.0);
    }
    for r in &rows {
        let (u, v, m, n) = (r[6], r[8], r[10], r[11]);
        assert_eq!(m * v - n * u, r[12]);
    }
    let crossing = rows
        .windows(2)
        .find(|w| w[0][6] * w[1][6] <= 0.0)
        .expect("u changes sign");
    assert!(crossing[0][0] <= 1.1998 && crossing[1][0] >= 1.1996);
    assert!(crossing[0][0] <= ZETA_STAR && ZETA_STAR <= crossing[1][0]);
}

#[test]
fn trace_leaves_constraint_columns_empty() {
    let out = jacobi(&["trace", "catenary-fixed-height", "-"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields.len(), 13);
    for i in [4, 5, 8, 9, 10, 11, 12] {
        assert!(fields[i].is_empty(), "column {i}: {row}");
    }
    // 17 significant digits
    assert!(fields[1].split('e').next().unwrap().len() >= 18);
}

const OSCILLATOR: &str = "\
[params]
k = 2
[problem]
F = yp^2 - k^2*y^2
a = 0
b = 3
regime = dirichlet
A = 0
B = 0
[extremal]
y = 0
";

#[test]
fn dirichlet_file_problem() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "osc.ini", OSCILLATOR);
    let out = jacobi(&["--json", "check", &path]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let x = json(&out)["conjugate_x"].as_f64().unwrap();
    assert!((x - std::f64::consts::PI / 2.0).abs() < 1e-6, "{x}");

    let short = write(
        dir.path(),
        "short.ini",
        &OSCILLATOR.replace("b = 3", "b = 1.5"),
    );
    assert_eq!(code(&jacobi(&["check", &short])), 0);
}

#[test]
fn right_free_file_mirrors_left_free() {
    let left = "\
[params]
w = 0.7
[problem]
F = y*sqrt(1+yp^2)
a = 0
b = 1
regime = mixed-left-free
B = w*cosh(1/w)
[extremal]
y = w*cosh(x/w)
";
    let right = "\
[params]
w = 0.7
[problem]
F = y*sqrt(1+yp^2)
a = 0
b = 1
regime = mixed-right-free
A = w*cosh(1/w)
[extremal]
y = w*cosh((1-x)/w)
";
    let dir = tempfile::tempdir().unwrap();
    let l = json(&jacobi(&[
        "--json",
        "check",
        &write(dir.path(), "l.ini", left),
    ]));
    let r = json(&jacobi(&[
        "--json",
        "check",
        &write(dir.path(), "r.ini", right),
    ]));
    assert_eq!(l["classification"], "Indefinite");
    assert_eq!(l["classification"], r["classification"]);
    let (xl, xr) = (
        l["conjugate_x"].as_f64().unwrap(),
        r["conjugate_x"].as_f64().unwrap(),
    );
    assert!((xl - ZETA_STAR * 0.7).abs() < 1e-6, "{xl}");
    assert!((xr - (1.0 - xl)).abs() < 1e-6, "{xr}");
}

#[test]
fn missing_section_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "bad.ini",
        &OSCILLATOR.replace("[extremal]\ny = 0\n", ""),
    );
    let out = jacobi(&["check", &path]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("[extremal]"), "{}", stderr(&out));
}

#[test]
fn parse_errors_report_the_offset() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "bad.ini",
        &OSCILLATOR.replace("yp^2 - k^2*y^2", "y*(1+"),
    );
    let out = jacobi(&["check", &path]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("offset 5"), "{}", stderr(&out));
}

#[test]
fn legendre_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "neg.ini",
        &OSCILLATOR.replace("yp^2 - k^2*y^2", "-yp^2"),
    );
    let out = jacobi(&["--json", "check", &path]);
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["classification"], "PreconditionFailed");
    assert!(v["min_P"].as_f64().unwrap() < 0.0);
}

#[test]
fn exit_code_is_a_function_of_classification() {
    let runs: [&[&str]; 5] = [
        &["--json", "check", "catenary-fixed-height"],
        &[
            "--json",
            "check",
            "catenary-fixed-height",
            "--branch",
            "low",
        ],
        &["--json", "check", "catenary-fixed-length"],
        &[
            "--json",
            "check",
            "catenary-fixed-height",
            "--omega",
            "0.5",
            "--u0",
            "3",
        ],
        &[
            "--json",
            "--tol-scale",
            "10",
            "check",
            "catenary-fixed-length",
            "--ell",
            "3",
        ],
    ];
    for args in runs {
        let out = jacobi(args);
        let c = json(&out)["classification"].as_str().unwrap().to_string();
        assert_eq!(code(&out), expected_code(&c), "{args:?}");
    }
}

#[test]
fn builtin_flags_rejected_for_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "osc.ini", OSCILLATOR);
    assert_eq!(code(&jacobi(&["check", &path, "--yb", "2"])), 1);
}

#[test]
fn usage_and_help() {
    assert_eq!(code(&jacobi(&["--help"])), 0);
    assert_eq!(code(&jacobi(&["--version"])), 0);
    assert_eq!(code(&jacobi(&["check"])), 1);
    assert_eq!(
        code(&jacobi(&["check", "catenary-fixed-height", "--nope"])),
        1
    );
    let out = jacobi(&["examples"]);
    assert_eq!(code(&out), 0);
    assert!(
        stdout(&out).contains("catenary-fixed-height")
            && stdout(&out).contains("catenary-fixed-length")
    );
}
