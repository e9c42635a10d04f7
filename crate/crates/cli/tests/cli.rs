use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn embedlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_embedlab"))
        .args(args)
        .env_remove("EMBEDLAB_SEED")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

#[test]
fn identity_is_embeddable() {
    let dir = TempDir::new().unwrap();
    for d in [2usize, 3, 4] {
        let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| (i == j) as u8 as f64).collect()).collect();
        let text = serde_json::json!({ "d": d, "entries": rows }).to_string();
        let m = write(dir.path(), &format!("id{d}.json"), &text);
        let out = embedlab(&["embed-check", "--matrix", m.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "d = {d}");
        assert_eq!(stdout_json(&out)["status"], "Embeddable");
    }
}

#[test]
fn negative_verdicts_exit_two() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "m.json", r#"{"d":2,"entries":[[0.2,0.9],[0.8,0.1]]}"#);
    let out = embedlab(&["embed-check", "--matrix", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v = stdout_json(&out);
    assert_eq!(v["status"], "NotEmbeddable");
    assert_eq!(v["reason"]["test"], "two_by_two");

    let out = embedlab(&["embed-check", "--circulant", "1", "0"]);
    assert_eq!(out.status.code(), Some(2));

    let out = embedlab(&["qembed", "--circulant", "0.5", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["realized"], false);
}

#[test]
fn errors_exit_one_with_json() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"d":2,"entries":[[0.5,0.5],[0.6,0.5]]}"#);
    let out = embedlab(&["embed-check", "--matrix", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "invalid_input");

    let garbage = write(dir.path(), "garbage.json", "{not json");
    let out = embedlab(&["qembed", "--matrix", garbage.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_json(&out)["message"].is_string());

    let out = embedlab(&["embed-check", "--matrix", "/nonexistent/m.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "io");

    let out = embedlab(&["region-scan"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "usage");

    let out = embedlab(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn region_scan_full_grid() {
    let out = embedlab(&["region-scan", "--grid", "400"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,b,classification"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 400 * 400);
    assert_eq!(rows[0], "0.0,0.0,classical");
    assert_eq!(rows[399], "0.0,1.0,permuted-classical");
    assert!(rows.last().unwrap().ends_with(",outside"));
    let unknown_centre = rows
        .iter()
        .any(|r| r.starts_with("0.5,0.5,") && r.ends_with(",unknown"));
    assert!(!unknown_centre, "0.5 is not a grid value at N = 400");
}

#[test]
fn scans_do_not_depend_on_thread_count() {
    let one = embedlab(&["--threads", "1", "region-scan", "--grid", "61"]);
    let many = embedlab(&["--threads", "4", "region-scan", "--grid", "61"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    assert!(text.contains("0.5,0.5,unknown"));
}

#[test]
fn seeded_sampling_is_reproducible() {
    let a = embedlab(&["typicality", "--d", "64", "--trials", "300", "--seed", "11"]);
    let b = embedlab(&["--threads", "3", "typicality", "--d", "64", "--trials", "300", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let env = Command::new(env!("CARGO_BIN_EXE_embedlab"))
        .args(["typicality", "--d", "64", "--trials", "300"])
        .env("EMBEDLAB_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(a.stdout, env.stdout);

    let other = embedlab(&["typicality", "--d", "64", "--trials", "300", "--seed", "12"]);
    assert_ne!(a.stdout, other.stdout);
    assert_eq!(stdout_json(&a)["seed"], 11);
}

#[test]
fn cost_table_rows() {
    let out = embedlab(&["cost-table", "--function", "f1", "--bits", "32", "--mem", "1,2,4294967296"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "m,classical_kind,classical_lo,classical_hi,classical_lower_bound,quantum_time,quantum_memory"
    );
    assert_eq!(lines[1], "1,interval,4294967297,4294967298,4294967297,2,0");
    assert_eq!(lines[3], "4294967296,interval,2,3,2,2,0");
}

#[test]
fn cost_table_from_function_file() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "f.json", r#"{"table":[1,2,3,3]}"#);
    let out = embedlab(&["cost-table", "--function", f.to_str().unwrap(), "--mem", "0,1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    // d = 4, one fixed point (a cycle of length one), image of size 3.
    assert_eq!(v[0]["classical_kind"], "interval");
    assert_eq!(v[0]["classical_lo"], 4);
    assert_eq!(v[1]["classical_lo"], 2);
}

#[test]
fn realizations_round_trip_losslessly() {
    let dir = TempDir::new().unwrap();
    let x = 0.1 + 0.2;
    let text = serde_json::json!({ "d": 2, "entries": [[x, 0.7], [(1.0 - x), 0.3]] }).to_string();
    let m = write(dir.path(), "m.json", &text);
    let out = embedlab(&["qembed", "--matrix", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let target = v["realization"]["target"].to_string();
    let back = embedlab::io::stochastic_from_json(&target).unwrap();
    let orig = embedlab::io::stochastic_from_json(&text).unwrap();
    assert_eq!(back, orig);
    assert!(v["realization"]["achieved_error"].as_f64().unwrap() < 1e-9);

    let r = write(dir.path(), "r.json", &target);
    let again = embedlab(&["qembed", "--matrix", r.to_str().unwrap()]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn embed_check_witness_reexponentiates() {
    let out = embedlab(&["embed-check", "--circulant", "0.2", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["status"], "Embeddable");
    let stage = &v["witness"][0];
    let g: embedlab::io::MatrixJson = serde_json::from_value(stage["generator"].clone()).unwrap();
    assert_eq!(g.d, 3);
    assert!(v["witness_error"].as_f64().unwrap() < 1e-9);
}

#[test]
fn output_file_matches_stdout() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("scan.csv");
    let to_file = embedlab(&["region-scan", "--grid", "9", "--out", path.to_str().unwrap()]);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    let direct = embedlab(&["region-scan", "--grid", "9"]);
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn access_region_qubit_and_uniform() {
    let dir = TempDir::new().unwrap();
    let e = std::f64::consts::E;
    let p = write(dir.path(), "p.json", r#"{"d":2,"entries":[0.9,0.1]}"#);
    let g = write(
        dir.path(),
        "g.json",
        &serde_json::json!({ "d": 2, "entries": [(e / (1.0 + e)), (1.0 / (1.0 + e))] }).to_string(),
    );
    let out = embedlab(&["access-region", "--p", p.to_str().unwrap(), "--gamma", g.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let lo = v["memory_interval"][0].as_f64().unwrap();
    assert!((lo - (1.0 - 0.9 / e)).abs() < 1e-12);

    let lp = embedlab(&["access-region", "--p", p.to_str().unwrap(), "--gamma", g.to_str().unwrap(), "--lp"]);
    let lp_lo = stdout_json(&lp)["memory_interval"][0].as_f64().unwrap();
    assert!((lp_lo - lo).abs() < 1e-6);

    let q = write(dir.path(), "q.json", r#"{"d":2,"entries":[0.66,0.34]}"#);
    let out = embedlab(&[
        "access-region", "--p", p.to_str().unwrap(), "--gamma", g.to_str().unwrap(), "--q", q.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["target"]["accessible"], false);

    let p3 = write(dir.path(), "p3.json", r#"{"d":3,"entries":[0.5,0.3,0.2]}"#);
    let q3 = write(dir.path(), "q3.json", r#"{"d":3,"entries":[0.4,0.35,0.25]}"#);
    let u3 = write(
        dir.path(),
        "u3.json",
        &serde_json::json!({ "d": 3, "entries": vec![1.0 / 3.0; 3] }).to_string(),
    );
    for method in ["--lp", "--closed-form"] {
        let out = embedlab(&[
            "access-region", "--p", p3.to_str().unwrap(), "--gamma", u3.to_str().unwrap(),
            "--q", q3.to_str().unwrap(), method,
        ]);
        assert_eq!(out.status.code(), Some(0), "{method}");
        let v = stdout_json(&out);
        assert_eq!(v["target"]["accessible"], true);
        assert!(v["target"]["schedule"]["stages"].as_array().unwrap().len() <= 2);
        assert_eq!(v["vertices"].as_array().unwrap().len(), 6);
    }
}

#[test]
fn qubit_path_rows_and_monotones() {
    let out = embedlab(&[
        "qubit-path", "--x", "0", "--z", "-0.3333333333333333", "--zeta", "0.5", "--delta", "0.0066667", "--steps", "100",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["step", "x", "z", "r_plus", "r_minus", "radial_deviation"]
    );
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|s| s.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 101);
    for w in rows.windows(2) {
        assert!(w[1][3] <= w[0][3] + 1e-8 && w[1][4] <= w[0][4] + 1e-8);
    }
    let meta: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(meta["stop_reason"], "max_steps");

    let lower = embedlab(&["qubit-path", "--x", "0", "--z", "0.8333333333333334", "--zeta", "0.25", "--delta", "-0.01", "--steps", "5"]);
    assert_eq!(lower.status.code(), Some(0));
}

#[test]
fn free_energy_audit_columns() {
    let dir = TempDir::new().unwrap();
    let path = embedlab(&["qubit-path", "--x", "0", "--z", "-0.3333333333333333", "--zeta", "0.5", "--delta", "0.01", "--steps", "100"]);
    let text = String::from_utf8(path.stdout).unwrap();
    let mut traj = String::from("t,x,y,z\n");
    for (k, line) in text.lines().skip(1).enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        traj.push_str(&format!("{k},{},0,{}\n", f[1], f[2]));
    }
    let t = write(dir.path(), "traj.csv", &traj);
    // ζ = 1/2 is the Gibbs polarisation of levels (0, ln 3) at β = 1.
    let out = embedlab(&[
        "free-energy-audit", "--trajectory", t.to_str().unwrap(), "--levels", &format!("0,{}", 3f64.ln()), "--beta", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv_text = String::from_utf8(out.stdout).unwrap();
    assert!(csv_text.starts_with("t,F,F_Q,A\n"));
    assert_eq!(csv_text.lines().count(), 102);
    let meta: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(meta["monotone_ok"], true);
    assert_eq!(meta["backflow_detected"], true);

    let cl = write(dir.path(), "cl.csv", "t,p0,p1\n0,0.2,0.8\n1,0.5,0.5\n");
    let out = embedlab(&["free-energy-audit", "--trajectory", cl.to_str().unwrap(), "--levels", "0,1", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0.0")));
}
