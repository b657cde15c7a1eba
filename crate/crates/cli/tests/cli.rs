use std::process::{Command, Output};

fn podles(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_podles"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn invalid_configuration_exits_with_two() {
    for args in [
        &["--q", "1.5", "verify"][..],
        &["--q", "0.01", "seminorm", "A"],
        &["--N", "2", "verify"],
        &["--tolerance", "0.5", "verify"],
        &["seminorm", "a"],
        &["seminorm", "A +"],
        &["--N", "8", "interval", "--kmax", "5"],
    ] {
        let o = podles(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let o = podles(&["--q", "1.5", "verify"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("q out of range"));
    let o = podles(&["--N", "2", "verify"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("N too small"));
}

#[test]
fn extreme_q_needs_the_flag() {
    let o = podles(&["--q", "0.01", "--allow-extreme-q", "--N", "6", "seminorm", "B"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn seminorm_of_generators() {
    let o = podles(&["--format", "json", "seminorm", "A"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["cstar_norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["seminorm_l"].as_f64().unwrap() - 0.75f64.sqrt()).abs() < 1e-12);
    assert_eq!(v["psi_infty"].as_f64().unwrap(), 0.0);

    let o = podles(&["--format", "json", "seminorm", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seminorm_l"].as_f64().unwrap(), 0.0);
    assert_eq!(v["psi_infty"].as_f64().unwrap(), 1.0);

    let text = stdout(&podles(&["seminorm", "A"]));
    assert!(text.contains("L = 0.866"));
}

#[test]
fn interval_csv_layout() {
    let o = podles(&["--N", "12", "interval", "--kmax", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(
        lines[0],
        "q,N,k,d_consecutive,d_from_zero,d_from_psi_infty,gap_estimate,iterations"
    );
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0.5,12,0,"));
}

#[test]
fn interval_matches_the_diagonal_formula() {
    let q: f64 = 0.5;
    let o = podles(&["--N", "16", "--format", "json", "interval", "--kmax", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.len(), 4);
    let r = |i: i32| q.powi(i - 1) * (1.0 - q * q) / (1.0 - q.powi(2 * i)).sqrt();
    for (k, row) in rows.iter().enumerate() {
        let k = k as i32;
        let d_zero: f64 = (1..=k).map(r).sum();
        let d_psi: f64 = (k + 1..=17).map(r).sum();
        assert!((row["d_from_zero"].as_f64().unwrap() - d_zero).abs() < 1e-6);
        assert!((row["d_from_psi_infty"].as_f64().unwrap() - d_psi).abs() < 1e-6);
        assert!((row["d_consecutive"].as_f64().unwrap() - r(k + 1)).abs() < 1e-6);
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["--N", "12", "--seed", "7", "interval", "--kmax", "3"];
    assert_eq!(podles(&args).stdout, podles(&args).stdout);
    let args = ["--N", "8", "--format", "json", "verify"];
    assert_eq!(podles(&args).stdout, podles(&args).stdout);
}

#[test]
fn verify_passes_and_reports_lemma_keys() {
    let o = podles(&["--N", "10", "verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    for key in ["t:fundam", "l:derbasII", "p:continuity", "l:norbou", "p:fibhilb"] {
        assert!(text.contains(key), "missing {key}");
    }
    assert!(!text.contains("[FAIL]"));

    let o = podles(&["--N", "10", "--format", "csv", "verify"]);
    let text = stdout(&o);
    assert!(text.starts_with("check,lemma_key,measured,bound,pass\n"));
    let o = podles(&["--N", "10", "--format", "json", "verify"]);
    let v: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.iter().all(|r| r["pass"].as_bool() == Some(true)));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# run settings\nq = 0.3\nN = 10 # small\nformat = json\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = podles(&["--config", cfg, "interval", "--kmax", "1"]);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows[0]["q"].as_f64(), Some(0.3));
    assert_eq!(rows[0]["N"].as_u64(), Some(10));

    let o = podles(&["--config", cfg, "--q", "0.6", "--format", "csv", "interval", "--kmax", "1"]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("0.6,10,0,"));

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "depth = 3\n").unwrap();
    let o = podles(&["--config", bad.to_str().unwrap(), "verify"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.json");
    let o = podles(&["--format", "json", "--output", out.to_str().unwrap(), "seminorm", "B + B*"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["seminorm_l"].as_f64().unwrap() > 0.0);
}
