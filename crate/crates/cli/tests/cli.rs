use lame_cli::{run, OutputRecord, EXIT_OK, EXIT_USAGE, SCHEMA_VERSION};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("lame").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> OutputRecord {
    let (code, out, err) = invoke(args);
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn closed_form_row_in_csv() {
    let (code, out, _) = invoke(&["wangerin", "--kind", "1", "--nu", "-1.5", "--k", "0.6", "--mmax", "0", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "label,m,h,truncation,residual");
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    let h: f64 = fields[2].parse().unwrap();
    assert!((h - 0.34).abs() < 1e-12);
}

#[test]
fn near_zero_modulus_floquet() {
    let rec = json(&["floquet", "--mu", "0.4", "--nu", "0.3", "--k", "0.0001", "--mmax", "3"]);
    let hs: Vec<f64> = rec.results.iter().map(|r| r.values[1]).collect();
    for (h, e) in hs.iter().zip([0.16, 2.56, 5.76, 12.96]) {
        assert!((h - e).abs() < 1e-3, "{h} vs {e}");
    }
}

#[test]
fn merge_suite_passes() {
    let (code, _, err) = invoke(&["verify", "--suite", "c1", "--nu", "0.3", "--k", "0.5"]);
    assert_eq!(code, EXIT_OK, "{err}");
}

#[test]
fn zero_and_winding_suites_pass() {
    for suite in ["z1", "z2", "c2", "c3", "recessive"] {
        let rec = json(&["verify", "--suite", suite, "--nu", "-4.2", "--k", "0.5"]);
        assert_eq!(rec.diagnostics["failures"], 0, "{suite}");
        assert!(rec.results.iter().all(|r| r.values[5] == 1.0));
    }
}

#[test]
fn limit_suite_reports_ratios() {
    let rec = json(&["verify", "--suite", "limit", "--nu", "0.3", "--k", "0.5", "--depth", "1"]);
    assert_eq!(rec.results.len(), 4);
    assert!(rec.results.iter().all(|r| r.values[2] < 5e-3));
}

#[test]
fn usage_errors_exit_2() {
    let (code, out, err) = invoke(&["wangerin", "--kind", "1", "--bogus", "1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.is_empty());
    assert!(err.contains("Usage"));
    let (code, _, err) = invoke(&["wangerin", "--kind", "3", "--nu", "0", "--k", "0.5", "--mmax", "1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("kind"));
    let (code, _, _) = invoke(&["elliptic", "--k", "1.5"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, _) = invoke(&["verify", "--suite", "c1", "--grid", "fine"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn help_exits_0() {
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("wangerin"));
}

#[test]
fn json_round_trip_is_exact() {
    let args = ["eigenfunction", "--kind", "2", "--m", "1", "--nu", "-2.7", "--k", "0.5", "--grid", "0.1:1.9:7"];
    let (_, first, _) = invoke(&args);
    let (_, second, _) = invoke(&args);
    assert_eq!(first, second);
    let rec: OutputRecord = serde_json::from_str(&first).unwrap();
    assert_eq!(rec.schema_version, SCHEMA_VERSION);
    assert_eq!(rec.command, "eigenfunction");
    let again = serde_json::to_string_pretty(&rec).unwrap() + "\n";
    assert_eq!(again, first);
    // kind 2 is odd about u = K
    let w: Vec<f64> = rec.results.iter().map(|r| r.values[1]).collect();
    for i in 0..w.len() {
        assert!((w[i] + w[w.len() - 1 - i]).abs() < 1e-10 * w[i].abs().max(1.0));
    }
}

#[test]
fn csv_values_round_trip() {
    let (_, out, _) = invoke(&["elliptic", "--k", "0.7", "--grid", "0:2:5", "--format", "csv"]);
    let rec = json(&["elliptic", "--k", "0.7", "--grid", "0:2:5"]);
    for (line, row) in out.lines().skip(1).zip(&rec.results) {
        let parsed: Vec<f64> = line.split(',').skip(1).map(|f| f.parse().unwrap()).collect();
        assert_eq!(parsed, row.values);
    }
}

#[test]
fn other_subcommands() {
    let rec = json(&["algebraic", "--p", "2", "--k", "0.5"]);
    assert_eq!(rec.results.len(), 2);
    let rec = json(&["polynomial", "--p", "2", "--k", "0.5"]);
    assert_eq!(rec.results.len(), 5);
    assert!(rec.results.iter().all(|r| r.values[2] < 1e-8));
    let rec = json(&["zeros", "--kind", "1", "--m", "0", "--nu", "-4.2", "--k", "0.5"]);
    assert_eq!(rec.diagnostics["segment_count"], 0);
    let winding = rec.results.iter().find(|r| r.label == "winding").unwrap();
    assert_eq!(winding.values[0], 2.0);
    let rec = json(&["limit", "--kind", "1", "--m", "0", "--nu", "0.3", "--klist", "0.1,0.05"]);
    assert_eq!(rec.results.len(), 2);
    let rec = json(&["eigenfunction", "--kind", "1", "--m", "0", "--nu", "0.3", "--k", "0.5", "--grid", "0:2:3", "--where", "real"]);
    assert_eq!(rec.columns, vec!["x", "y", "re", "im"]);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("lame-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("h.json");
    let (code, out, _) = invoke(&["floquet", "--mu", "0.5", "--nu", "0.3", "--k", "0.5", "--mmax", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let rec: OutputRecord = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rec.results.len(), 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_lame");
    let status = std::process::Command::new(bin).args(["verify", "--suite", "c3", "--nu", "-2.7", "--k", "0.5"]).output().unwrap();
    assert_eq!(status.status.code(), Some(0));
    let status = std::process::Command::new(bin).arg("nope").output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(!status.stderr.is_empty());
}

#[test]
fn unwritable_output_exits_1() {
    let (code, _, err) = invoke(&["elliptic", "--k", "0.5", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(code, lame_cli::EXIT_FAILED);
    assert!(err.starts_with("error"));
}
