//! End-to-end runs of the `levydraw` binary.

use std::path::Path;
use std::process::{Command, Output};

fn levydraw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levydraw")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const BM: &str = "drift = -0.5\nsigma = 1.0\n";

fn verify_config(dir: &Path, sampler: &str) -> String {
    let text = format!(
        "kind = \"overline_u_star\"\nx_grid = [0.5, 1.0]\n[model]\n{BM}[horizon]\ntype = \"exponential\"\nq = 1.0\nbeta = 2.0\n\
         [mc]\nn = 3000\nseed = 3\nsampler = \"{sampler}\"\n"
    );
    write(dir, &format!("{sampler}.toml"), &text)
}

#[test]
fn scale_fn_writes_the_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "bm.toml", BM);
    let out = levydraw(&["scale-fn", "--model", &model, "--q", "1", "--x-grid", "0:1:3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,Wq,Zq,Wq_prime");
    assert_eq!(lines.len(), 4);
    // W(0) = 0 and W'(0+) = 2/σ² for Brownian motion
    let first: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first[1], 0.0);
    assert!((first[3] - 2.0).abs() < 1e-12);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let json = dir.path().join("out.json");
    let ok = verify_config(dir.path(), "representation");
    let out = levydraw(&["verify", "--config", &ok, "--csv", csv.to_str().unwrap(), "--json", json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = levydraw_cli::VerificationReport::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), report.to_csv());

    // the finite-lookahead law describes the representation, not the windowed functional
    let direct = verify_config(dir.path(), "direct");
    assert_eq!(levydraw(&["verify", "--config", &direct]).status.code(), Some(1));

    let bad = write(
        dir.path(),
        "bad.toml",
        &format!("kind = \"u_star\"\nx_grid = [1.0]\n[model]\n{BM}[horizon]\ntype = \"fixed\"\nt = -1.0\ns = 1.0\n"),
    );
    let out = levydraw(&["verify", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("horizon.t"));
}

#[test]
fn simulate_emits_an_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "bm.toml", BM);
    let out = levydraw(&[
        "simulate", "--model", &model, "--kind", "u_star", "--t", "0", "--s", "inf", "--x", "1", "--n", "500",
        "--seed", "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 500);
    assert_eq!(v["seed"], 1);
}

#[test]
fn exact_and_bss_routes_agree() {
    let dir = tempfile::tempdir().unwrap();
    // BSS with μ = 0.1, σ = 0.3 is Brownian motion with drift μ − σ²/2
    let model = write(dir.path(), "bss.toml", "drift = 0.055\nsigma = 0.3\n");
    let exact =
        levydraw(&["exact", "--model", &model, "--kind", "overline_d_star", "--q", "1", "--inf", "--x-grid", "0.5,1"]);
    let report = dir.path().join("r.json");
    let bss = levydraw(&[
        "bss",
        "--mu",
        "0.1",
        "--sigma",
        "0.3",
        "--t",
        "1",
        "--q",
        "1",
        "--x-grid",
        "0.5,1",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(exact.status.success() && bss.status.success());
    let col = |o: &Output| -> Vec<f64> {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect()
    };
    for (a, b) in col(&exact).iter().zip(col(&bss)) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!(report.exists());
}

#[test]
fn usage_errors_exit_two() {
    let out = levydraw(&["exact", "--kind", "u_star"]);
    assert_eq!(out.status.code(), Some(2));
}
