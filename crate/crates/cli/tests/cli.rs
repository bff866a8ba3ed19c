use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ipld::io::{format_dsl, read_results, TRACE_HEADER};

fn ipld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipld")).args(args).output().expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: [&str; 8] = ["--synthetic", "6", "--seed", "3", "--eps", "1e-2", "--beta", "0.05"];

fn small_solve(extra: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = ["solve"].iter().chain(SMALL.iter()).map(|s| s.to_string()).collect();
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run(args: &[String]) -> Output {
    ipld(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn both_solvers_write_results_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res.json");
    let trace = dir.path().join("trace.csv");
    let o = run(&small_solve(&["--solver", "ipld", "--solver", "cp", "--tau", "1", "--out", arg(&out), "--trace", arg(&trace)]));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let res = read_results(&out).unwrap();
    assert_eq!(res.len(), 2);
    assert_eq!(res[0].solver, "ipld");
    assert_eq!(res[1].solver, "cp");
    assert!(res.iter().all(|r| r.converged));
    let cp = res[1].cp_steps.unwrap();
    assert!((cp.tau * cp.sigma * cp.k_norm * cp.k_norm - 0.99).abs() < 1e-12);

    let text = fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), res[0].iterations);
    assert!(rows.iter().all(|r| r[2] <= 0.05));
}

#[test]
fn output_is_deterministic_up_to_timing() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        assert_eq!(run(&small_solve(&["--out", arg(p)])).status.code(), Some(0));
    }
    let ra = read_results(&a).unwrap();
    let rb = read_results(&b).unwrap();
    assert_eq!(ra[0].without_timing(), rb[0].without_timing());
}

#[test]
fn missing_edge_file_is_a_usage_error() {
    let o = ipld(&["solve", "--edges", "/nonexistent/edges.txt"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ipld(&["solve", "--problem", "num"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).to_lowercase().contains("usage"));
}

#[test]
fn invalid_parameters_are_rejected() {
    assert_eq!(ipld(&["solve", "--synthetic", "6", "--t0", "1.5"]).status.code(), Some(1));
    assert_eq!(ipld(&["solve", "--synthetic", "6", "--bogus"]).status.code(), Some(1));
    assert_eq!(ipld(&["--help"]).status.code(), Some(0));
}

#[test]
fn dsl_file_solve() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("dsl.txt");
    fs::write(&data, format_dsl(&ipld::apps::generate_dsl(2, 3, 5).unwrap())).unwrap();
    let out = dir.path().join("res.json");
    let o = ipld(&["solve", "--problem", "dsl", "--dsl-data", arg(&data), "--eps", "1e-1", "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let res = read_results(&out).unwrap();
    assert!(res[0].converged);
    assert!(res[0].certificate.as_ref().unwrap().primal_within_bound());
}

#[test]
fn small_sweep_writes_one_trace_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("traces");
    fs::create_dir(&traces).unwrap();
    let out = dir.path().join("sweep.json");
    let o = ipld(&[
        "sweep", "--synthetic", "5", "--seed", "2", "--eps", "1e-1", "--axis", "delta", "--grid", "1e-3,1e-5",
        "--trace-dir", arg(&traces), "--out", arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_results(&out).unwrap().len(), 2);
    assert_eq!(fs::read_dir(&traces).unwrap().count(), 2);
}
