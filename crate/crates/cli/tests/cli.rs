use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use liftlab::Provenance;
use serde_json::Value;

fn liftlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liftlab")).args(args).env_remove("LIFTLAB_THREADS").output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Bare numbers and unknown provenance strings under `results`.
fn untagged(v: &Value, bad: &mut Vec<String>, at: &str) {
    let known: Vec<&str> = Provenance::ALL.iter().map(|p| p.as_str()).collect();
    match v {
        Value::Number(n) => bad.push(format!("{at} = {n}")),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| untagged(x, bad, &format!("{at}[{i}]"))),
        Value::Object(m) => {
            if let Some(p) = m.get("provenance") {
                if !p.as_str().is_some_and(|s| known.contains(&s)) {
                    bad.push(format!("{at}.provenance = {p}"));
                }
            }
            if m.len() == 2 && m.contains_key("value") && m.contains_key("provenance") {
                return;
            }
            for (k, x) in m {
                if k != "provenance" {
                    untagged(x, bad, &format!("{at}.{k}"));
                }
            }
        }
        _ => {}
    }
}

#[test]
fn reproduce_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for target in ["fig1", "gaussian-trel", "circle-scaling", "constants-table"] {
        let mut texts = Vec::new();
        for run in ["a", "b"] {
            let out = dir.path().join(format!("{target}_{run}.json"));
            let o = liftlab(&["reproduce", target, "--out", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0), "{target}: {}", stderr(&o));
            let json = fs::read_to_string(&out).unwrap().replace(&format!("{target}_{run}"), target);
            let csv = fs::read(out.with_extension("csv")).unwrap();
            texts.push((json, csv));
        }
        assert_eq!(texts[0], texts[1], "{target} differs between runs");
    }
}

#[test]
fn stdout_report_when_no_out() {
    let o = liftlab(&["reproduce", "fig1"]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["status"], "ok");
    assert!(report.get("timings").is_none());
    let o = liftlab(&["reproduce", "fig1", "--timings"]);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["timings"]["wall_seconds"].is_number());
}

#[test]
fn every_result_number_is_tagged() {
    let dir = tempfile::tempdir().unwrap();
    let runs: &[&[&str]] = &[
        &["reproduce", "fig1"],
        &["reproduce", "constants-table"],
        &["reproduce", "circle-scaling"],
        &["bounds", "--m", "1", "--kappa-minus", "0", "--auto-T", "--gamma", "auto"],
        &["simulate", "--process", "bps", "--potential", "gaussian:dim=2", "--horizon", "2"],
        &["liftcheck", "--process", "langevin", "--samples", "2000", "--chains", "10"],
        &["spectral", "--process", "langevin", "--gamma", "2"],
        &["circle", "--n", "8,16"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let out = dir.path().join(format!("r{i}.json"));
        let mut all = args.to_vec();
        all.extend(["--out", out.to_str().unwrap()]);
        let o = liftlab(&all);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        let report = read_json(&out);
        let mut bad = Vec::new();
        untagged(&report["results"], &mut bad, "results");
        assert!(bad.is_empty(), "{args:?}: {bad:?}");
        for a in report["artifacts"].as_array().unwrap() {
            assert!(dir.path().join(a.as_str().unwrap()).exists(), "{a}");
        }
    }
}

#[test]
fn schema_provenance_enum_matches_the_library() {
    let schema: Value =
        serde_json::from_str(include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report.schema.json")))
            .unwrap();
    let listed: Vec<&str> =
        schema["$defs"]["provenance"]["enum"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let known: Vec<&str> = Provenance::ALL.iter().map(|p| p.as_str()).collect();
    assert_eq!(listed, known);
}

#[test]
fn csv_headers_are_plot_ready() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&[&str], &str)] = &[
        (&["reproduce", "fig1"], "gamma,gap"),
        (&["reproduce", "gaussian-trel"], "t,norm,closed_form"),
        (&["circle", "--n", "8"], "n,eps,base_steps,lift_steps"),
        (&["spectral", "--process", "langevin", "--gamma", "1"], "t,norm"),
        (&["simulate", "--process", "bps", "--horizon", "1"], "t,x1,v1,event"),
    ];
    for (i, (args, header)) in cases.iter().enumerate() {
        let out = dir.path().join(format!("h{i}.csv"));
        let mut all = args.to_vec();
        all.extend(["--out", out.to_str().unwrap()]);
        let o = liftlab(&all);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        let text = fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().next(), Some(*header), "{args:?}");
        assert!(out.with_extension("json").exists());
    }
}

#[test]
fn simulate_chains_are_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = liftlab(&[
            "simulate",
            "--process",
            "langevin",
            "--chains",
            "2",
            "--horizon",
            "1",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let stem = out.with_extension("");
        let chain = |k: usize| fs::read_to_string(format!("{}_chain{k}.csv", stem.display())).unwrap();
        (chain(0), chain(1))
    };
    let a = run("a.json", "5");
    let b = run("b.json", "5");
    let c = run("c.json", "6");
    assert_eq!(a, b);
    assert_ne!(a.0, a.1);
    assert_ne!(a.0, c.0);
}

#[test]
fn negative_gamma_exits_with_config_error() {
    let o = liftlab(&["spectral", "--process", "langevin", "--gamma", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("gamma") && e.contains("violates the precondition γ > 0"), "{e}");
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_with_config_error() {
    assert_eq!(liftlab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(liftlab(&["circle", "--n", "x"]).status.code(), Some(1));
    assert_eq!(liftlab(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_errors_carry_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "command = \"spectral\"\nprocess = \"langevin\"\nchains = \"many\"\n").unwrap();
    let o = liftlab(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("bad.toml:3:"), "{e}");

    fs::write(&path, "command = \"spectral\"\nprocess = \"langevin\"\ngama = 2.0\n").unwrap();
    let o = liftlab(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.toml:3:1"), "{}", stderr(&o));

    fs::write(&path, "command = \"bounds\"\nm = -1.0\neps = [2.0]\nn = [4]\n").unwrap();
    let o = liftlab(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    for key in ["m:", "eps:", "n:"] {
        assert!(e.contains(key), "missing {key} in {e}");
    }
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bounds.toml");
    fs::write(&path, "command = \"bounds\"\nm = 1.0\nkappa_minus = 1.0\nT = 3.0\ngamma = \"auto\"\n").unwrap();
    let o = liftlab(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let from_file = liftlab(&["run", path.to_str().unwrap()]);
    let from_flags = liftlab(&["bounds", "--m", "1", "--kappa-minus", "1", "--T", "3", "--gamma", "auto"]);
    assert_eq!(from_file.status.code(), Some(0), "{}", stderr(&from_file));
    let a: Value = serde_json::from_slice(&from_file.stdout).unwrap();
    let b: Value = serde_json::from_slice(&from_flags.stdout).unwrap();
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["results"]["report"]["gamma_is_optimal"], true);
}

#[test]
fn truncation_failure_exits_not_converged() {
    let o = liftlab(&[
        "spectral",
        "--process",
        "langevin",
        "--method",
        "empirical",
        "--gamma",
        "2",
        "--outer",
        "50",
        "--inner",
        "2",
        "--grid",
        "0:4:0.5",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
