//! End-to-end tests of the compiled `tesc` binary: exit codes, report
//! formats, CSV shape and determinism, and certification of emitted numbers
//! against the brute-force oracles from the core crate.

use std::process::{Command, Output};

use tesc_core::{oracle_solve_r, solve_r, Demand, Scenario, SolverSettings};

/// Absolute path of a bundled scenario file.
fn config(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Runs the binary with the given arguments and captures both streams.
fn tesc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tesc"))
        .args(args)
        .output()
        .expect("the tesc binary should run")
}

fn exit_code(out: &Output) -> i32 {
    out.status
        .code()
        .expect("the binary should exit, not be signalled")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout should be UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr should be UTF-8")
}

/// Extracts the value of a `key: value` report line.
fn field(report: &str, key: &str) -> f64 {
    let prefix = format!("{key}: ");
    report
        .lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("report should contain `{key}`:\n{report}"))
        .parse()
        .unwrap_or_else(|e| panic!("`{key}` should be numeric: {e}"))
}

/// The scenario encoded in `configs/fig6.ini`, with a caller-chosen host
/// tax rate so sweep rows can be re-solved and certified independently.
fn fig6_scenario(tau0: f64) -> Scenario {
    Scenario {
        demand: Demand::Normal {
            mu: 220.0,
            sigma: 30.0,
        },
        m: 100.0,
        gamma0: 20.0,
        eta: 1.0,
        k: 36.0,
        tau: 0.35,
        tau0,
        alpha: 0.1,
        beta: 0.3,
        reservation: 5100.0,
    }
}

/// Splits a sweep CSV into its cells; panics unless every row has the full
/// thirteen-column shape.
fn csv_cells(text: &str) -> Vec<Vec<String>> {
    let rows: Vec<Vec<String>> = text
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 13, "row {i} should have 13 cells: {row:?}");
    }
    rows
}

#[test]
fn solve_reports_the_limited_risk_equilibrium() {
    let out = tesc(&["solve", "--structure", "r", "--config", &config("fig6.ini")]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let report = stdout(&out);
    assert!(report.starts_with("structure: R\n"), "report: {report}");
    assert!((field(&report, "y_star") - 251.5088).abs() < 1e-3);
    assert!((field(&report, "e_star") - 6.6553).abs() < 1e-3);
    assert!((field(&report, "b_star") - 0.8660).abs() < 1e-3);
    assert!((field(&report, "pi_pc") - 5100.0).abs() < 1e-6);
    assert!((field(&report, "pi_hq") - 8130.81).abs() < 0.01);
    assert!(field(&report, "lemma2_b_residual").abs() < 1e-6);
}

#[test]
fn overrides_are_applied_after_the_file() {
    let out = tesc(&[
        "solve",
        "--structure",
        "r",
        "--config",
        &config("fig6.ini"),
        "--override",
        "tax.tau0=0.10",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let report = stdout(&out);
    // A lower host rate weakens the incentive share and consolidated profit
    // shifts; these are the solved values for the overridden scenario.
    assert!((field(&report, "b_star") - 0.7218).abs() < 1e-3);
    assert!((field(&report, "pi_hq") - 8123.92).abs() < 0.01);
}

#[test]
fn solve_rejects_an_infeasible_tax_ordering() {
    let out = tesc(&[
        "solve",
        "--structure",
        "r",
        "--config",
        &config("fig6.ini"),
        "--override",
        "tax.tau0=0.40",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(
        stderr(&out).contains("tau0 <= tau"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn unknown_config_keys_fail_with_their_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.ini");
    std::fs::write(
        &path,
        "[demand]\nkind = normal\nmu = 220\nsigma = 30\n\n[market]\nm = 100\n\
         gamma0 = 20\neta = 1\nk = 36\ntypo_key = 3\n\n[tax]\ntau = 0.35\n\
         tau0 = 0.30\n\n[policy]\nalpha = 0.1\nbeta = 0.3\n",
    )
    .unwrap();
    let out = tesc(&[
        "solve",
        "--structure",
        "c",
        "--config",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 4);
    let err = stderr(&out);
    assert!(err.contains("unknown key market.typo_key"), "stderr: {err}");
    assert!(err.contains("line 11"), "stderr: {err}");
}

#[test]
fn usage_errors_exit_four_and_help_exits_zero() {
    assert_eq!(exit_code(&tesc(&["--help"])), 0);
    assert_eq!(exit_code(&tesc(&["solve", "--structure", "c"])), 4);
    assert_eq!(exit_code(&tesc(&["frobnicate"])), 4);
}

/// The central CSV contract: correct header and shape, monotone incentive
/// share along the host-tax axis, byte-identical reruns regardless of the
/// thread count, round-trip agreement with the solver at full precision,
/// and endpoint certification against the brute-force oracle.
#[test]
fn sweep_emits_a_deterministic_certified_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    let base = [
        "sweep",
        "--structure",
        "r",
        "--param",
        "tau0",
        "--from",
        "0.30",
        "--to",
        "0.05",
        "--steps",
        "26",
    ];

    let mut args: Vec<&str> = base.to_vec();
    let cfg = config("fig6.ini");
    args.extend(["--config", &cfg, "--out", first.to_str().unwrap()]);
    let out = tesc(&args);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    let mut again: Vec<&str> = base.to_vec();
    again.extend([
        "--config",
        &cfg,
        "--out",
        second.to_str().unwrap(),
        "--jobs",
        "4",
    ]);
    assert_eq!(exit_code(&tesc(&again)), 0);
    let text = std::fs::read_to_string(&first).unwrap();
    assert_eq!(
        text,
        std::fs::read_to_string(&second).unwrap(),
        "reruns should be byte-identical"
    );

    let rows = csv_cells(&text);
    assert_eq!(rows.len(), 27, "header plus one row per sweep point");
    assert_eq!(
        rows[0].join(","),
        "structure,param_name,param_value,y,e,b,pi_r,pi_pc,pi_hq,foc_residual,\
         boundary_flag,converged,iterations"
    );
    let mut last_b = f64::INFINITY;
    for row in &rows[1..] {
        assert_eq!(row[0], "R");
        assert_eq!(row[1], "tau0");
        assert_eq!(row[11], "true");
        let b: f64 = row[5].parse().unwrap();
        assert!(b < last_b, "the share should fall as the host rate falls");
        last_b = b;
    }

    // Both endpoints: re-solve at full precision, then certify against the
    // brute-force grid oracle within its own resolution.
    for row in [&rows[1], &rows[26]] {
        let tau0: f64 = row[2].parse().unwrap();
        let s = fig6_scenario(tau0);
        let eq = solve_r(&s, &SolverSettings::default()).unwrap();
        for (cell, full) in [
            (&row[3], eq.y_star),
            (&row[4], eq.e_star),
            (&row[5], eq.b_star),
            (&row[6], eq.pi_r),
            (&row[7], eq.pi_pc),
            (&row[8], eq.pi_hq),
        ] {
            let printed: f64 = cell.parse().unwrap();
            let tol = 1e-8 * full.abs().max(1.0);
            assert!(
                (printed - full).abs() <= tol,
                "{printed} should round-trip to {full}"
            );
        }
        let oracle = oracle_solve_r(&s, 600, 200_000).unwrap();
        let (tol_b, tol_e) = oracle.match_tolerances(&s);
        assert!((eq.b_star - oracle.b).abs() <= tol_b, "b at tau0 = {tau0}");
        assert!((eq.e_star - oracle.e).abs() <= tol_e, "e at tau0 = {tau0}");
    }
}

#[test]
fn sweep_marks_infeasible_rows_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("infeasible.csv");
    let out = tesc(&[
        "sweep",
        "--structure",
        "r",
        "--config",
        &config("fig6.ini"),
        "--param",
        "tau0",
        "--from",
        "0.30",
        "--to",
        "0.45",
        "--steps",
        "4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(
        stderr(&out).contains("2 of 4 rows"),
        "stderr: {}",
        stderr(&out)
    );
    let rows = csv_cells(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 5);
    // tau0 = 0.40 and 0.45 exceed the home rate: blank cells, converged false.
    for row in [&rows[3], &rows[4]] {
        assert_eq!(row[11], "false");
        assert!(row[3..11].iter().all(|c| c.is_empty()), "row: {row:?}");
    }
    assert_eq!(rows[1][11], "true");
}

#[test]
fn sweep_rejects_an_unknown_parameter_axis() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("never.csv");
    let out = tesc(&[
        "sweep",
        "--structure",
        "c",
        "--config",
        &config("fig4.ini"),
        "--param",
        "warp",
        "--from",
        "0.1",
        "--to",
        "0.2",
        "--steps",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 4);
    assert!(stderr(&out).contains("warp"), "stderr: {}", stderr(&out));
    assert!(
        !path.exists(),
        "a rejected sweep should not leave an output file"
    );
}

#[test]
fn threshold_locates_the_profit_turning_point() {
    let out = tesc(&[
        "threshold",
        "--structure",
        "r",
        "--config",
        &config("fig7.ini"),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let report = stdout(&out);
    assert!(report.contains("metric: pi_hq"), "report: {report}");
    let location = field(&report, "location");
    assert!((location - 0.18).abs() < 0.02, "location: {location}");
    let left = field(&report, "left_sign");
    let right = field(&report, "right_sign");
    assert!(
        left * right < 0.0,
        "the profit slope should change sign at the turning point"
    );
}

#[test]
fn threshold_exits_five_when_profit_is_monotone() {
    let out = tesc(&[
        "threshold",
        "--structure",
        "c",
        "--config",
        &config("fig4.ini"),
    ]);
    assert_eq!(exit_code(&out), 5);
    assert!(
        stderr(&out).contains("no turning point"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn boundary_traces_a_rising_markup_royalty_frontier() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("boundary.csv");
    let out = tesc(&[
        "boundary",
        "--structure",
        "c",
        "--config",
        &config("fig8c.ini"),
        "--alphas",
        "0.5,0.7,0.9",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "alpha,beta,crossings");
    assert_eq!(rows.len(), 4);
    let mut last = 0.0;
    for row in &rows[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(
            cells[2], "1",
            "each scanned markup should cross exactly once"
        );
        let beta: f64 = cells[1].parse().unwrap();
        assert!(
            beta > last && beta < 1.0,
            "the frontier should rise with the markup"
        );
        last = beta;
    }
}

#[test]
fn boundary_exits_five_when_no_level_crosses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("miss.csv");
    let out = tesc(&[
        "boundary",
        "--structure",
        "c",
        "--config",
        &config("fig4.ini"),
        "--alphas",
        "0.5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 5);
    assert!(stderr(&out).contains("no instrument-ranking crossing"));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(
        text.lines().nth(1).unwrap().contains(",,0"),
        "the miss is still recorded: {text}"
    );
}

#[test]
fn reproduce_writes_every_curve_of_a_figure() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let run = tesc(&[
        "reproduce",
        "fig6",
        "--out",
        out_a.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(exit_code(&run), 0, "stderr: {}", stderr(&run));
    let names = [
        "fig6_alpha_0.1.csv",
        "fig6_alpha_0.3.csv",
        "fig6_alpha_0.5.csv",
    ];
    for name in names {
        let text = std::fs::read_to_string(out_a.join(name)).unwrap();
        assert_eq!(
            text.lines().count(),
            27,
            "{name} should hold the full host-tax sweep"
        );
    }
    assert_eq!(
        exit_code(&tesc(&[
            "reproduce",
            "fig6",
            "--out",
            out_b.to_str().unwrap()
        ])),
        0
    );
    for name in names {
        assert_eq!(
            std::fs::read(out_a.join(name)).unwrap(),
            std::fs::read(out_b.join(name)).unwrap(),
            "{name} should not depend on thread count or rerun"
        );
    }
}

#[test]
fn verify_certifies_the_solvers() {
    let out = tesc(&["verify", "--jobs", "4"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let report = stdout(&out);
    assert!(
        report.contains("oracle equivalence: PASS"),
        "report: {report}"
    );
    assert!(
        report.contains("algebraic invariances: PASS"),
        "report: {report}"
    );
}

/// The output files land where `--out` says, so a path into a directory
/// that does not exist is an I/O error, not silent success.
#[test]
fn missing_output_directory_is_an_io_error() {
    let out = tesc(&[
        "sweep",
        "--structure",
        "c",
        "--config",
        &config("fig4.ini"),
        "--param",
        "alpha",
        "--from",
        "0.1",
        "--to",
        "0.2",
        "--steps",
        "2",
        "--out",
        "/nonexistent-dir/out.csv",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(
        stderr(&out).contains("io error"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn unreadable_config_exits_four() {
    let out = tesc(&["solve", "--structure", "c", "--config", "/no/such/file.ini"]);
    assert_eq!(exit_code(&out), 4);
    assert!(
        stderr(&out).contains("cannot read"),
        "stderr: {}",
        stderr(&out)
    );
}
