//! End-to-end tests of the `casimir` binary: subcommand contracts, exit
//! codes, and the bit-exactness of the CSV/JSON emission paths.

use std::process::{Command, Output};

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout_text(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_text(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn parse_records(output: &Output) -> Vec<serde_json::Value> {
    serde_json::from_str::<Vec<serde_json::Value>>(&stdout_text(output))
        .expect("stdout is a JSON array")
}

const RECORD_FIELDS: [&str; 17] = [
    "a",
    "b",
    "ratio",
    "energy_total",
    "energy_route",
    "energy_tail_bound",
    "force_eq11",
    "force_eq11_tail_bound",
    "force_eq14",
    "force_eq14_tail_bound",
    "force_asym_small",
    "force_asym_small_tail_bound",
    "force_asym_large",
    "force_asym_large_tail_bound",
    "piston_l",
    "force_finite_l",
    "force_finite_l_tail_bound",
];

#[test]
fn force_routes_agree_at_the_square_box() {
    let output = casimir(&["force", "--a", "1", "--b", "1"]);
    assert_eq!(exit_code(&output), 0);
    let records = parse_records(&output);
    assert_eq!(records.len(), 1);
    let eq11 = records[0]["force_eq11"].as_f64().unwrap();
    let eq14 = records[0]["force_eq14"].as_f64().unwrap();
    assert!(eq11 < 0.0 && eq14 < 0.0);
    assert!((eq11 - eq14).abs() <= 1e-9 * eq11.abs());
    assert!(records[0]["piston_l"].is_null());
}

#[test]
fn critical_ratio_echoes_root_bracket_and_reference() {
    let output = casimir(&["critical-ratio"]);
    assert_eq!(exit_code(&output), 0);
    let records = parse_records(&output);
    assert_eq!(records.len(), 1);
    let root = records[0]["root"].as_f64().unwrap();
    assert!((2.73..=2.75).contains(&root));
    assert!((root - 2.74).abs() <= 0.01);
    assert_eq!(records[0]["bracket_lo"].as_f64().unwrap(), 2.0);
    assert_eq!(records[0]["bracket_hi"].as_f64().unwrap(), 4.0);
    assert_eq!(records[0]["tolerance"].as_f64().unwrap(), 1e-6);
    assert_eq!(records[0]["reference_ratio"].as_f64().unwrap(), 2.74);
}

#[test]
fn midpoint_piston_force_vanishes() {
    let output = casimir(&["force", "--a", "5", "--b", "1", "--L", "10"]);
    assert_eq!(exit_code(&output), 0);
    let records = parse_records(&output);
    let finite = records[0]["force_finite_l"].as_f64().unwrap();
    assert!(finite.abs() <= 1e-12, "midpoint force {finite:e}");
    assert_eq!(records[0]["piston_l"].as_f64().unwrap(), 10.0);
}

#[test]
fn energy_routes_agree_through_the_cli() {
    let zeta = casimir(&["energy", "--a", "0.7", "--b", "1.3", "--route", "zeta"]);
    let series = casimir(&["energy", "--a", "0.7", "--b", "1.3", "--route", "series"]);
    assert_eq!(exit_code(&zeta), 0);
    assert_eq!(exit_code(&series), 0);
    let zeta_rec = parse_records(&zeta);
    let series_rec = parse_records(&series);
    assert_eq!(zeta_rec[0]["energy_route"], "zeta_reflection");
    assert_eq!(series_rec[0]["energy_route"], "bessel_series");
    let ez = zeta_rec[0]["energy_total"].as_f64().unwrap();
    let es = series_rec[0]["energy_total"].as_f64().unwrap();
    assert!((ez - es).abs() <= 1e-10 * ez.abs().max(es.abs()));
}

#[test]
fn sweep_csv_and_json_carry_identical_values() {
    let sweep = [
        "sweep",
        "--ratio-min",
        "0.5",
        "--ratio-max",
        "2",
        "--points",
        "5",
        "--spacing",
        "log",
    ];
    let csv_run = casimir(&[&sweep[..], &["--format", "csv"]].concat());
    let json_run = casimir(&[&sweep[..], &["--format", "json"]].concat());
    assert_eq!(exit_code(&csv_run), 0);
    assert_eq!(exit_code(&json_run), 0);

    let csv = stdout_text(&csv_run);
    assert!(!csv.contains('\r'), "line endings must be LF only");
    assert!(csv.ends_with('\n'));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), RECORD_FIELDS.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);

    let records = parse_records(&json_run);
    assert_eq!(records.len(), 5);

    for (row, record) in rows.iter().zip(&records) {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), RECORD_FIELDS.len());
        for (field, cell) in RECORD_FIELDS.iter().zip(&cells) {
            if *field == "energy_route" {
                assert_eq!(record[*field].as_str().unwrap(), *cell);
                continue;
            }
            if cell.is_empty() {
                assert!(record[*field].is_null(), "{field} should be absent");
                continue;
            }
            // bit-exact agreement between the two emission paths, and the
            // cell must re-render to the same shortest round-trip text
            let parsed: f64 = cell.parse().unwrap();
            let via_json = record[*field].as_f64().unwrap();
            assert_eq!(parsed.to_bits(), via_json.to_bits(), "{field} mismatch");
            assert_eq!(parsed.to_string(), *cell, "{field} must round-trip");
        }
    }

    // grid endpoints are hit exactly and order is preserved
    assert_eq!(records[0]["ratio"].as_f64().unwrap(), 0.5);
    assert_eq!(records[2]["ratio"].as_f64().unwrap(), 1.0);
    let last = records[4]["ratio"].as_f64().unwrap();
    assert!((last - 2.0).abs() < 1e-15);
}

#[test]
fn cutoff_verify_reports_fit_rows() {
    let output = casimir(&[
        "cutoff-verify",
        "--lambdas",
        "20",
        "--family",
        "gaussian",
        "--format",
        "csv",
    ]);
    assert_eq!(exit_code(&output), 0);
    let text = stdout_text(&output);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda,family,c1_fit,c2_fit,c1_quadrature,c2_quadrature,c1_ratio,c2_ratio,max_abs_residual"
    );
    let cells: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(cells[0], "20");
    assert_eq!(cells[1], "gaussian");
    let c1_ratio: f64 = cells[6].parse().unwrap();
    let c2_ratio: f64 = cells[7].parse().unwrap();
    assert!((c1_ratio - 1.0).abs() < 1e-3, "c1 ratio {c1_ratio}");
    assert!((c2_ratio - 0.25).abs() < 1e-3, "c2 ratio {c2_ratio}");
}

#[test]
fn selftest_reports_and_exits_three_on_documented_deficits() {
    let output = casimir(&["selftest"]);
    assert_eq!(exit_code(&output), 3);
    let text = stdout_text(&output);
    let verdicts: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("PASS ") || l.starts_with("FAIL "))
        .collect();
    assert_eq!(verdicts.len(), 22);
    let failures: Vec<&str> = verdicts
        .iter()
        .filter(|l| l.starts_with("FAIL "))
        .copied()
        .collect();
    assert_eq!(failures.len(), 2);
    assert!(failures[0].contains("casimir/force_route_equivalence"));
    assert!(failures[1].contains("cutoff/fit_residual_default"));
    assert!(text.contains("20 of 22 invariants passed"));
    let diagnostics = stderr_text(&output);
    assert_eq!(diagnostics.lines().count(), 1);
    assert!(diagnostics.contains("selftest"));
}

#[test]
fn input_errors_exit_one_with_one_line_diagnostics() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["energy", "--a", "-1", "--b", "1"],
        vec!["energy", "--a", "1", "--b", "1", "--bogus"],
        vec!["force", "--a", "3", "--b", "1", "--L", "2"],
        vec![
            "sweep",
            "--ratio-min",
            "2",
            "--ratio-max",
            "1",
            "--points",
            "5",
            "--spacing",
            "linear",
            "--format",
            "csv",
        ],
        vec!["cutoff-verify", "--lambdas", "9"],
        vec!["cutoff-verify", "--lambdas", "banana"],
        vec!["energy", "--a", "1", "--b", "1", "--rel-tol", "1.5"],
        vec!["critical-ratio", "--tol", "0.5"],
    ];
    for args in cases {
        let output = casimir(&args);
        assert_eq!(exit_code(&output), 1, "args {args:?}");
        assert!(output.stdout.is_empty(), "args {args:?}");
        let diagnostics = stderr_text(&output);
        assert_eq!(
            diagnostics.trim_end().lines().count(),
            1,
            "diagnostic for {args:?} must be one line: {diagnostics}"
        );
    }
}

#[test]
fn output_flag_writes_the_file_instead_of_stdout() {
    let path = std::env::temp_dir().join("casimir_cli_output_test.json");
    let _ = std::fs::remove_file(&path);
    let output = casimir(&["critical-ratio", "--output", path.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 0);
    assert!(output.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.contains("\"root\""));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn help_documents_the_units_and_exits_zero() {
    let output = casimir(&["--help"]);
    assert_eq!(exit_code(&output), 0);
    let text = stdout_text(&output);
    assert!(text.contains("1/length"));
    assert!(text.contains("selftest"));
}
