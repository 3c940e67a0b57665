use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], config: &Path, out: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_resonance-lab"));
    cmd.args(args).arg("--config").arg(config).arg("--out").arg(out);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("run resonance-lab")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|f| f.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn synthetic_decay_writes_summary_and_tables() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["decay"], &configs().join("synthetic.toml"), out.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.path().join("decay_summary.csv"));
    assert_eq!(header[..5], ["kappa", "lambda_kappa", "lambda_inf", "zeta_re", "zeta_im"]);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[4] < 0.0));
    for i in 0..3 {
        let (_, rows) = read_csv(&out.path().join(format!("decay_kappa_{i:02}.csv")));
        assert_eq!(rows.len(), 201);
        // |A(0)| ≤ 1 for a normalized state and a cutoff bounded by 1
        assert!(rows[0][3] <= 1.0);
    }
    let meta = fs::read_to_string(out.path().join("decay_summary.meta.json")).unwrap();
    assert!(meta.contains("config_hash") && meta.contains("tool_version"));
}

#[test]
fn kappa_and_tmax_overrides() {
    let out = tempfile::tempdir().unwrap();
    let o = run(
        &["decay", "--kappa", "0.07", "0.15", "--tmax", "20"],
        &configs().join("synthetic.toml"),
        out.path(),
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out.path().join("decay_summary.csv"));
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![0.07, 0.15]);
    let (_, rows) = read_csv(&out.path().join("decay_kappa_01.csv"));
    assert_eq!(rows.last().unwrap()[0], 20.0);
    assert!(!out.path().join("decay_kappa_02.csv").exists());
}

#[test]
fn negative_control_exits_with_hypothesis_code() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["spectrum-check"], &configs().join("negative_control.toml"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Im F0"));
    // the report is still written
    assert!(out.path().join("spectrum_check.csv").exists());
}

#[test]
fn config_errors_exit_with_code_4() {
    let out = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[model]\nkind = \"sturm_liouville\"\nk = 1.0\n[sweep]\nkappa = [0.2, 0.1]\n").unwrap();
    assert_eq!(run(&["decay"], &bad, out.path(), &[]).status.code(), Some(4));
    assert_eq!(
        run(&["decay"], &dir.path().join("missing.toml"), out.path(), &[]).status.code(),
        Some(4)
    );
    let o = run(&["decay", "--kappa", "-1"], &configs().join("synthetic.toml"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["scaling"], &configs().join("synthetic.toml"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(4), "three couplings are too few for a fit");
    let o = run(
        &["sojourn"],
        &configs().join("synthetic.toml"),
        out.path(),
        &[("RESONANCE_LAB_THREADS", "zero")],
    );
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn thread_cap_does_not_change_output() {
    let serial = tempfile::tempdir().unwrap();
    let capped = tempfile::tempdir().unwrap();
    let config = configs().join("synthetic.toml");
    assert!(run(&["concentration", "--serial"], &config, serial.path(), &[]).status.success());
    assert!(run(&["concentration"], &config, capped.path(), &[("RESONANCE_LAB_THREADS", "3")])
        .status
        .success());
    let a = fs::read(serial.path().join("concentration.csv")).unwrap();
    let b = fs::read(capped.path().join("concentration.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sojourn_difference_is_small_against_lifetime() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["sojourn"], &configs().join("synthetic.toml"), out.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.path().join("sojourn.csv"));
    let normalized = header.iter().position(|h| h == "normalized").unwrap();
    for r in rows {
        assert!((r[normalized] - 1.0).abs() < 0.02, "{r:?}");
    }
}
