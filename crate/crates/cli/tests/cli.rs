use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirac-scatter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let o = run(args);
    assert!(
        o.status.success(),
        "{:?}: {}",
        args,
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

/// Body rows of a CSV document, split into fields.
fn rows(doc: &str) -> Vec<Vec<String>> {
    let mut lines = doc.lines().filter(|l| !l.starts_with('#'));
    lines.next().expect("header");
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn value(r: &[String]) -> f64 {
    r[4].parse().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["bands", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["--jmax", "99", "bands"]).status.code(), Some(1));
    assert_eq!(run(&["--a", "-1", "bands"]).status.code(), Some(1));
    assert_eq!(run(&["--alpha", "-inf", "bands"]).status.code(), Some(1));
    assert_eq!(run(&["bands", "--k", "1;2"]).status.code(), Some(1));
    assert_eq!(
        run(&["spectrum-scan", "--alpha-min", "2", "--alpha-max", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["--config", "/nonexistent/run.cfg", "bands"])
            .status
            .code(),
        Some(1)
    );
    // lambda equal to |k|^2 hits the free pole.
    let o = run(&["greens-probe", "--lambda", "0.1", "--k", "0.3,0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("dirac-scatter: "));
}

#[test]
fn header_and_mesh_row_count() {
    let doc = stdout(&["--mesh-n", "4", "--jmax", "1", "bands"]);
    let mut lines = doc.lines();
    assert_eq!(lines.next(), Some("# dirac-scatter v1"));
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# command=bands lattice=honeycomb"));
    assert_eq!(
        lines.next(),
        Some("k_index,kx,ky,j,value,multiplicity,provenance")
    );
    assert_eq!(rows(&doc).len(), 19);
}

#[test]
fn runs_are_deterministic_and_file_output_matches_stdout() {
    let args = ["--mesh-n", "4", "--jmax", "3", "bands"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let p = path.to_str().unwrap();
    stdout(&["--mesh-n", "4", "--jmax", "3", "-o", p, "bands"]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), a);
}

#[test]
fn printed_values_round_trip_exactly() {
    let doc = stdout(&[
        "--lattice",
        "tri",
        "--jmax",
        "4",
        "bands",
        "--k",
        "0.7,-0.2",
    ]);
    for r in rows(&doc) {
        let v = value(&r);
        assert_eq!(format!("{:.16e}", v), r[4]);
    }
    let json = stdout(&[
        "--lattice",
        "tri",
        "--jmax",
        "4",
        "--format",
        "json",
        "bands",
        "--k",
        "0.7,-0.2",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    let jv: Vec<f64> = parsed["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["value"].as_f64().unwrap())
        .collect();
    let cv: Vec<f64> = rows(&doc).iter().map(|r| value(r)).collect();
    assert_eq!(jv, cv);
}

#[test]
fn honeycomb_dirac_row_has_paired_bands() {
    let doc = stdout(&["--jmax", "5", "bands", "--path", "G-K", "--steps", "1"]);
    let k: Vec<f64> = rows(&doc)
        .iter()
        .filter(|r| r[0] == "1")
        .map(|r| value(r))
        .collect();
    assert_eq!(k.len(), 5);
    assert_eq!(k[0], k[1]);
    assert_eq!(k[3], k[4]);
    assert!(k[1] < k[2] && k[2] < k[3]);
}

#[test]
fn infinite_strength_gives_free_levels() {
    let doc = stdout(&[
        "--lattice",
        "triangular",
        "--alpha",
        "inf",
        "--jmax",
        "3",
        "bands",
        "--k",
        "0.3,0.1",
    ]);
    let r = rows(&doc);
    assert!(r.iter().all(|r| r[6] == "Free"));
    assert!((value(&r[0]) - 0.1).abs() < 1e-15);
}

#[test]
fn spectrum_scan_rows_and_trailer() {
    let doc = stdout(&[
        "--lattice",
        "tri",
        "--mesh-n",
        "8",
        "--jmax",
        "2",
        "spectrum-scan",
        "--alpha-min",
        "-1",
        "--alpha-max",
        "5",
        "--steps",
        "2",
    ]);
    let r = rows(&doc);
    assert_eq!(r.len(), 2);
    assert_eq!(r[0][1], "2");
    assert_eq!(r[1][1], "1");
    assert!(doc
        .lines()
        .last()
        .unwrap()
        .starts_with("# gap_closing_alpha="));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# test run\nlattice = triangular\njmax = 2\nalpha = inf\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let doc = stdout(&["--config", c, "bands", "--k", "0.3,0.1"]);
    assert!(doc.contains("lattice=triangular"));
    assert_eq!(rows(&doc).len(), 2);
    let doc = stdout(&[
        "--config",
        c,
        "--jmax",
        "3",
        "--lattice",
        "hc",
        "bands",
        "--k",
        "0.3,0.1",
    ]);
    assert!(doc.contains("lattice=honeycomb"));
    assert_eq!(rows(&doc).len(), 3);
    assert!(Path::new(c).exists());
}

#[test]
fn greens_probe_reports_tail_bound() {
    let doc = stdout(&[
        "--lattice",
        "tri",
        "greens-probe",
        "--lambda",
        "5",
        "--k",
        "1,0",
        "--x",
        "0.2,0.1",
    ]);
    let r = rows(&doc);
    assert_eq!(r.len(), 1);
    let tail: f64 = r[0][7].parse().unwrap();
    assert!(tail > 0.0 && tail < 1e-10);
}
