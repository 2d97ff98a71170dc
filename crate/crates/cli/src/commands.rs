//! Command implementations and the exit-code contract.
//!
//! Exit codes: 0 success; 1 I/O or self-verification failure; 2 infeasible
//! scenario; 3 non-convergence (including a sweep with non-converged rows);
//! 4 configuration or usage error; 5 threshold or boundary detection
//! failure. A sweep that hits both infeasible and non-converged rows
//! reports the infeasibility.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use tesc_core::{
    dominance_boundary, dtau_turning_point, oracle_solve_c, oracle_solve_r,
    random_feasible_scenarios, solve_c, solve_r, ModelError, Scenario, SolverSettings, Structure,
};

use crate::config::{parse_config, set_param, Config, ConfigError};
use crate::records::{write_boundary_csv, write_sweep_csv, SweepOutcome, SweepRecord};

/// Prints a report line, swallowing broken-pipe errors so that
/// `tesc ... | head` terminates quietly instead of panicking.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

/// Anything a command can fail with, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration file, override, or flag value (exit 4).
    Config(ConfigError),
    /// Model-level failure; the variant decides between exits 2, 3, and 5.
    Model(ModelError),
    /// Output I/O failure (exit 1).
    Io(PathBuf, std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Model(e) => write!(f, "error: {e}"),
            CliError::Io(path, e) => write!(f, "io error on {}: {e}", path.display()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

fn model_exit_code(e: &ModelError) -> u8 {
    match e {
        ModelError::NonConvergence(_) => 3,
        ModelError::NoTurningPoint(_)
        | ModelError::MultipleTurningPoints(_)
        | ModelError::RootNotBracketed { .. } => 5,
        _ => 2,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 4,
            CliError::Model(e) => model_exit_code(e),
            CliError::Io(..) => 1,
        }
    }
}

fn bad_flag(message: impl Into<String>) -> CliError {
    CliError::Config(ConfigError {
        line: None,
        message: message.into(),
    })
}

/// Reads and parses a config file plus overrides; the scenario is validated
/// so an infeasible file surfaces as exit 2, not as a late solver error.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad_flag(format!("cannot read {}: {e}", path.display())))?;
    let cfg = parse_config(&text, overrides)?;
    cfg.scenario.validate().map_err(CliError::Model)?;
    Ok(cfg)
}

fn install_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(bad_flag("jobs must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| bad_flag(e.to_string())),
    }
}

/// `solve`: one equilibrium, fields printed one per line.
pub fn cmd_solve(structure: Structure, cfg: &Config) -> Result<u8, CliError> {
    match structure {
        Structure::Commissionaire => {
            let eq = solve_c(&cfg.scenario, &cfg.settings).map_err(CliError::Model)?;
            if !eq.converged {
                return Err(CliError::Model(ModelError::NonConvergence(eq.iterations)));
            }
            say!("structure: C");
            say!("y_star: {}", eq.y_star);
            say!("e_star: {}", eq.e_star);
            say!("pi_r: {}", eq.pi_r);
            say!("pi_hq: {}", eq.pi_hq);
            say!("foc_residual: {}", eq.foc_residual);
            say!("second_order_ok: {}", eq.second_order_ok);
            say!("boundary: {}", eq.boundary);
            say!("iterations: {}", eq.iterations);
        }
        Structure::LimitedRisk => {
            let eq = solve_r(&cfg.scenario, &cfg.settings).map_err(CliError::Model)?;
            say!("structure: R");
            say!("y_star: {}", eq.y_star);
            say!("e_star: {}", eq.e_star);
            say!("b_star: {}", eq.b_star);
            say!("pi_r: {}", eq.pi_r);
            say!("pi_pc: {}", eq.pi_pc);
            say!("pi_hq: {}", eq.pi_hq);
            say!("fixed_wage: {}", eq.fixed_wage);
            say!("lemma2_b_residual: {}", eq.lemma2_b_residual);
            say!("boundary_b: {}", eq.boundary_b);
            say!("iterations: {}", eq.iterations);
        }
    }
    Ok(0)
}

#[derive(Clone, Copy, PartialEq)]
enum RowStatus {
    Converged,
    Infeasible,
    NonConverged,
}

fn solve_row(
    base: &Scenario,
    settings: &SolverSettings,
    structure: Structure,
    param: &str,
    value: f64,
) -> (SweepRecord, RowStatus) {
    let attempt = || -> Result<SweepOutcome, ModelError> {
        let mut s = *base;
        set_param(&mut s, param, value).map_err(|e| ModelError::InfeasibleScenario(e.message))?;
        s.validate()?;
        match structure {
            Structure::Commissionaire => {
                let eq = solve_c(&s, settings)?;
                if !eq.converged {
                    return Err(ModelError::NonConvergence(eq.iterations));
                }
                Ok(SweepOutcome {
                    y: eq.y_star,
                    e: eq.e_star,
                    b: None,
                    pi_r: eq.pi_r,
                    pi_pc: None,
                    pi_hq: eq.pi_hq,
                    foc_residual: eq.foc_residual,
                    boundary: eq.boundary,
                    iterations: eq.iterations,
                })
            }
            Structure::LimitedRisk => {
                let eq = solve_r(&s, settings)?;
                Ok(SweepOutcome {
                    y: eq.y_star,
                    e: eq.e_star,
                    b: Some(eq.b_star),
                    pi_r: eq.pi_r,
                    pi_pc: Some(eq.pi_pc),
                    pi_hq: eq.pi_hq,
                    foc_residual: eq.lemma2_b_residual,
                    boundary: eq.boundary_b,
                    iterations: eq.iterations,
                })
            }
        }
    };
    let (outcome, status) = match attempt() {
        Ok(o) => (Some(o), RowStatus::Converged),
        Err(e) if model_exit_code(&e) == 2 => (None, RowStatus::Infeasible),
        Err(_) => (None, RowStatus::NonConverged),
    };
    let record = SweepRecord {
        structure,
        param_name: param.to_string(),
        param_value: value,
        outcome,
    };
    (record, status)
}

fn sweep_values(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 {
        return Err(bad_flag("steps must be at least 1"));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    let width = (to - from) / (steps - 1) as f64;
    Ok((0..steps).map(|i| from + i as f64 * width).collect())
}

fn aggregate(statuses: impl Iterator<Item = RowStatus>) -> u8 {
    let mut code = 0u8;
    for status in statuses {
        match status {
            RowStatus::Infeasible => return 2,
            RowStatus::NonConverged => code = 3,
            RowStatus::Converged => {}
        }
    }
    code
}

fn run_sweep(
    cfg: &Config,
    structure: Structure,
    param: &str,
    values: &[f64],
    jobs: Option<usize>,
) -> Result<(Vec<SweepRecord>, u8), CliError> {
    // Reject unknown or family-mismatched parameter names up front (exit 4)
    // rather than emitting a file of blank rows.
    let mut probe = cfg.scenario;
    set_param(&mut probe, param, values[0])?;

    let rows: Vec<(SweepRecord, RowStatus)> = install_pool(jobs, || {
        values
            .par_iter()
            .map(|&v| solve_row(&cfg.scenario, &cfg.settings, structure, param, v))
            .collect()
    })?;
    let code = aggregate(rows.iter().map(|(_, status)| *status));
    Ok((rows.into_iter().map(|(r, _)| r).collect(), code))
}

/// `sweep`: re-solve along one parameter axis and write the records in
/// sweep order.
#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    structure: Structure,
    cfg: &Config,
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
    out: &Path,
    jobs: Option<usize>,
) -> Result<u8, CliError> {
    let values = sweep_values(from, to, steps)?;
    let (records, code) = run_sweep(cfg, structure, param, &values, jobs)?;
    write_sweep_csv(&records, out).map_err(|e| CliError::Io(out.to_path_buf(), e))?;
    let failed = records.iter().filter(|r| r.outcome.is_none()).count();
    if failed > 0 {
        eprintln!(
            "{failed} of {} rows did not produce an equilibrium",
            records.len()
        );
    }
    say!("wrote {} rows to {}", records.len(), out.display());
    Ok(code)
}

/// `threshold`: sign change of dπ/dΔτ along the tax differential.
pub fn cmd_threshold(structure: Structure, cfg: &Config) -> Result<u8, CliError> {
    let t = dtau_turning_point(&cfg.scenario, structure, &cfg.settings).map_err(CliError::Model)?;
    say!("metric: {}", t.metric);
    say!("location: {}", t.location);
    say!("bracket: {} {}", t.bracket.0, t.bracket.1);
    say!("left_sign: {}", t.left_sign);
    say!("right_sign: {}", t.right_sign);
    Ok(0)
}

/// `boundary`: dominance boundary β*(α) at the given markup levels.
pub fn cmd_boundary(
    structure: Structure,
    cfg: &Config,
    alphas: &[f64],
    out: &Path,
) -> Result<u8, CliError> {
    if alphas.is_empty() {
        return Err(bad_flag("at least one --alphas value is required"));
    }
    let points = dominance_boundary(&cfg.scenario, structure, alphas, &cfg.settings)
        .map_err(CliError::Model)?;
    write_boundary_csv(&points, out).map_err(|e| CliError::Io(out.to_path_buf(), e))?;
    let found = points.iter().filter(|p| p.beta.is_some()).count();
    say!(
        "wrote {} boundary points to {}",
        points.len(),
        out.display()
    );
    if found == 0 {
        eprintln!("no instrument-ranking crossing at any requested markup level");
        return Ok(5);
    }
    Ok(0)
}

const FIG4_INI: &str = include_str!("../../../configs/fig4.ini");
const FIG5_INI: &str = include_str!("../../../configs/fig5.ini");
const FIG6_INI: &str = include_str!("../../../configs/fig6.ini");
const FIG7_INI: &str = include_str!("../../../configs/fig7.ini");
const FIG8C_INI: &str = include_str!("../../../configs/fig8c.ini");
const FIG8R_INI: &str = include_str!("../../../configs/fig8r.ini");

/// Bundled figure datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

/// The tax-differential axis every sweep figure shares: tau0 from 0.30 down
/// to 0.05 (Δτ from 0.05 up to 0.30) in 26 steps of 0.01.
const TAU0_FROM: f64 = 0.30;
const TAU0_TO: f64 = 0.05;
const TAU0_STEPS: usize = 26;

struct SweepCurve {
    config: &'static str,
    structure: Structure,
    facet_key: &'static str,
    facet_label: &'static str,
    facet_value: f64,
}

/// Facet labels (as they appear in file names) paired with the parameter
/// value each one sets.
type Facets = &'static [(&'static str, f64)];

fn sweep_curves(figure: Figure) -> Vec<(String, SweepCurve)> {
    let (name, config, structure, alphas, betas): (&str, &'static str, Structure, Facets, Facets) =
        match figure {
            Figure::Fig4 => (
                "fig4",
                FIG4_INI,
                Structure::Commissionaire,
                &[("0.1", 0.1), ("0.3", 0.3), ("0.8", 0.8)],
                &[("0.3", 0.3), ("0.5", 0.5), ("0.7", 0.7)],
            ),
            Figure::Fig5 => (
                "fig5",
                FIG5_INI,
                Structure::Commissionaire,
                &[("0.1", 0.1), ("0.3", 0.3), ("0.5", 0.5)],
                &[("0.3", 0.3), ("0.5", 0.5), ("0.7", 0.7)],
            ),
            Figure::Fig6 => (
                "fig6",
                FIG6_INI,
                Structure::LimitedRisk,
                &[("0.1", 0.1), ("0.3", 0.3), ("0.5", 0.5)],
                &[],
            ),
            Figure::Fig7 => (
                "fig7",
                FIG7_INI,
                Structure::LimitedRisk,
                &[("0.1", 0.1), ("0.3", 0.3), ("0.5", 0.5)],
                &[("0.3", 0.3), ("0.5", 0.5), ("0.7", 0.7)],
            ),
            Figure::Fig8 => return Vec::new(),
        };
    let mut curves = Vec::new();
    for &(label, value) in alphas {
        curves.push((
            format!("{name}_alpha_{label}.csv"),
            SweepCurve {
                config,
                structure,
                facet_key: "alpha",
                facet_label: label,
                facet_value: value,
            },
        ));
    }
    for &(label, value) in betas {
        curves.push((
            format!("{name}_beta_{label}.csv"),
            SweepCurve {
                config,
                structure,
                facet_key: "beta",
                facet_label: label,
                facet_value: value,
            },
        ));
    }
    curves
}

/// Markup grid of the dominance-boundary figure.
const FIG8_ALPHAS: &[f64] = &[0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90];

fn worse(a: u8, b: u8) -> u8 {
    // Severity order for aggregation: infeasible > non-converged >
    // detection miss > success.
    let rank = |c: u8| match c {
        2 => 3,
        3 => 2,
        5 => 1,
        _ => 0,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

/// `reproduce`: write every curve of one bundled figure dataset into a
/// directory, from the committed preset configs.
pub fn cmd_reproduce(figure: Figure, out_dir: &Path, jobs: Option<usize>) -> Result<u8, CliError> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io(out_dir.to_path_buf(), e))?;
    let mut code = 0u8;

    for (file, curve) in sweep_curves(figure) {
        let cfg = parse_config(curve.config, &[])?;
        let mut scenario = cfg.scenario;
        set_param(&mut scenario, curve.facet_key, curve.facet_value)?;
        scenario.validate().map_err(CliError::Model)?;
        let faceted = Config { scenario, ..cfg };
        let values = sweep_values(TAU0_FROM, TAU0_TO, TAU0_STEPS)?;
        let (records, sweep_code) = run_sweep(&faceted, curve.structure, "tau0", &values, jobs)?;
        let path = out_dir.join(&file);
        write_sweep_csv(&records, &path).map_err(|e| CliError::Io(path.clone(), e))?;
        say!(
            "wrote {} ({} = {})",
            path.display(),
            curve.facet_key,
            curve.facet_label
        );
        code = worse(code, sweep_code);
    }

    if figure == Figure::Fig8 {
        let curves: &[(&str, &str, Structure, Facets)] = &[
            (
                "fig8_c",
                FIG8C_INI,
                Structure::Commissionaire,
                &[("0.21", 0.21), ("0.20", 0.20), ("0.19", 0.19)],
            ),
            (
                "fig8_r",
                FIG8R_INI,
                Structure::LimitedRisk,
                &[("0.30", 0.30), ("0.20", 0.20), ("0.10", 0.10)],
            ),
        ];
        for &(name, config, structure, tau0s) in curves {
            for &(label, tau0) in tau0s {
                let cfg = parse_config(config, &[])?;
                let scenario = Scenario {
                    tau0,
                    ..cfg.scenario
                };
                scenario.validate().map_err(CliError::Model)?;
                let points = dominance_boundary(&scenario, structure, FIG8_ALPHAS, &cfg.settings)
                    .map_err(CliError::Model)?;
                let path = out_dir.join(format!("{name}_tau0_{label}.csv"));
                write_boundary_csv(&points, &path).map_err(|e| CliError::Io(path.clone(), e))?;
                say!("wrote {} (tau0 = {label})", path.display());
                if points.iter().all(|p| p.beta.is_none()) {
                    code = worse(code, 5);
                }
            }
        }
    }
    Ok(code)
}

/// `verify`: certify the refined solvers against the brute-force oracles on
/// 100 seeded feasible scenarios and recheck the algebraic invariances on
/// the bundled presets. Exit 1 on any failure.
pub fn cmd_verify(jobs: Option<usize>) -> Result<u8, CliError> {
    let settings = SolverSettings::default();
    let scenarios = random_feasible_scenarios(20260814, 100);
    let oracle_failures: Vec<String> = install_pool(jobs, || {
        scenarios
            .par_iter()
            .flat_map(|s| oracle_check(s, &settings))
            .collect()
    })?;
    let invariance_failures = invariance_check(&settings);

    report_suite("oracle equivalence", scenarios.len(), &oracle_failures);
    report_suite("algebraic invariances", 11, &invariance_failures);
    if oracle_failures.is_empty() && invariance_failures.is_empty() {
        Ok(0)
    } else {
        Ok(1)
    }
}

fn report_suite(name: &str, checks: usize, failures: &[String]) {
    if failures.is_empty() {
        say!("{name}: PASS ({checks} checks)");
    } else {
        say!("{name}: FAIL ({} failures)", failures.len());
        for f in failures {
            eprintln!("  {f}");
        }
    }
}

fn oracle_check(s: &Scenario, settings: &SolverSettings) -> Vec<String> {
    let mut failures = Vec::new();
    match (solve_c(s, settings), oracle_solve_c(s, 1200)) {
        (Ok(eq), Ok(oracle)) => {
            if !eq.converged {
                failures.push(format!("C solver did not converge on {s:?}"));
            } else if (eq.e_star - oracle.e).abs() > oracle.cell_width {
                failures.push(format!(
                    "C effort {} vs oracle {} on {s:?}",
                    eq.e_star, oracle.e
                ));
            }
        }
        (Err(e), _) => failures.push(format!("C solver error {e} on {s:?}")),
        (_, Err(e)) => failures.push(format!("C oracle error {e} on {s:?}")),
    }
    match (solve_r(s, settings), oracle_solve_r(s, 600, 200_000)) {
        (Ok(eq), Ok(oracle)) => {
            let (tol_b, tol_e) = oracle.match_tolerances(s);
            if (eq.b_star - oracle.b).abs() > tol_b {
                failures.push(format!(
                    "R share {} vs oracle {} on {s:?}",
                    eq.b_star, oracle.b
                ));
            } else if (eq.e_star - oracle.e).abs() > tol_e {
                failures.push(format!(
                    "R effort {} vs oracle {} on {s:?}",
                    eq.e_star, oracle.e
                ));
            }
        }
        (Err(e), _) => failures.push(format!("R solver error {e} on {s:?}")),
        (_, Err(e)) => failures.push(format!("R oracle error {e} on {s:?}")),
    }
    failures
}

fn invariance_check(settings: &SolverSettings) -> Vec<String> {
    let mut failures = Vec::new();
    let base_c = match parse_config(FIG4_INI, &[]) {
        Ok(cfg) => cfg.scenario,
        Err(e) => return vec![format!("bundled commissionaire preset: {e}")],
    };
    let base_r = match parse_config(FIG6_INI, &[]) {
        Ok(cfg) => cfg.scenario,
        Err(e) => return vec![format!("bundled limited-risk preset: {e}")],
    };

    // With no tax differential the royalty share must not matter (2 checks).
    let equal_tax_c = Scenario {
        tau0: base_c.tau,
        ..base_c
    };
    let pi_c = |beta: f64| {
        solve_c(
            &Scenario {
                beta,
                ..equal_tax_c
            },
            settings,
        )
        .map(|eq| eq.pi_hq)
    };
    match (pi_c(0.3), pi_c(0.7)) {
        (Ok(a), Ok(b)) => {
            if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
                failures.push(format!(
                    "C profit varies with beta at equal tax: {a} vs {b}"
                ));
            }
        }
        (Err(e), _) | (_, Err(e)) => failures.push(format!("C equal-tax solve: {e}")),
    }
    let equal_tax_r = Scenario {
        tau0: base_r.tau,
        ..base_r
    };
    let pi_r = |beta: f64| {
        solve_r(
            &Scenario {
                beta,
                ..equal_tax_r
            },
            settings,
        )
        .map(|eq| eq.pi_hq)
    };
    match (pi_r(0.3), pi_r(0.7)) {
        (Ok(a), Ok(b)) => {
            if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
                failures.push(format!(
                    "R profit varies with beta at equal tax: {a} vs {b}"
                ));
            }
        }
        (Err(e), _) | (_, Err(e)) => failures.push(format!("R equal-tax solve: {e}")),
    }

    // Effort first-order condition at the commissionaire anchors (4 checks).
    for (alpha, tau0) in [(0.1, 0.30), (0.1, 0.05), (0.8, 0.30), (0.8, 0.05)] {
        let s = Scenario {
            alpha,
            tau0,
            ..base_c
        };
        match solve_c(&s, settings) {
            Ok(eq) => {
                let scale = (s.n_weight() * s.eta * eq.y_star)
                    .abs()
                    .max((1.0 - s.tau) * s.k * eq.e_star)
                    .max(1.0);
                if eq.foc_residual.abs() > 1e-3 * scale {
                    failures.push(format!(
                        "C FOC residual {} at alpha={alpha} tau0={tau0}",
                        eq.foc_residual
                    ));
                }
            }
            Err(e) => failures.push(format!("C anchor alpha={alpha} tau0={tau0}: {e}")),
        }
    }

    // Share-formula residual at the limited-risk anchors (5 checks).
    for (alpha, tau0) in [
        (0.1, 0.30),
        (0.1, 0.05),
        (0.1, 0.10),
        (0.3, 0.10),
        (0.5, 0.10),
    ] {
        let s = Scenario {
            alpha,
            tau0,
            ..base_r
        };
        match solve_r(&s, settings) {
            Ok(eq) => {
                if eq.lemma2_b_residual.abs() > 1e-3 * eq.b_star {
                    failures.push(format!(
                        "R share residual {} at alpha={alpha} tau0={tau0}",
                        eq.lemma2_b_residual
                    ));
                }
            }
            Err(e) => failures.push(format!("R anchor alpha={alpha} tau0={tau0}: {e}")),
        }
    }
    failures
}
