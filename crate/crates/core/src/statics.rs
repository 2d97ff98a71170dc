//! Comparative statics on re-solved equilibria: finite-difference
//! sensitivities, the tax-differential turning point of consolidated profit,
//! and the markup-versus-royalty dominance boundary.
//!
//! Every derivative here is a *total* derivative: the equilibrium is
//! re-solved at the perturbed parameters, so indirect effects through the
//! re-optimized effort, order quantity, and bonus share are included.

use crate::commissionaire::solve_c;
use crate::error::ModelError;
use crate::limited_risk::solve_r;
use crate::scenario::{Scenario, SolverSettings};

/// Organizational structure under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    /// Commissionaire: headquarters chooses effort directly.
    Commissionaire,
    /// Limited-risk: a sales agent chooses effort under a linear contract.
    LimitedRisk,
}

impl Structure {
    /// Single-letter label used in report output.
    pub fn label(&self) -> &'static str {
        match self {
            Structure::Commissionaire => "C",
            Structure::LimitedRisk => "R",
        }
    }
}

/// Scenario parameter that a sensitivity can be taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Tau0,
    Alpha,
    Beta,
    K,
    Eta,
    M,
}

impl Param {
    /// Parameter name as it appears in configuration files and reports.
    pub fn name(&self) -> &'static str {
        match self {
            Param::Tau0 => "tau0",
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::K => "k",
            Param::Eta => "eta",
            Param::M => "m",
        }
    }

    fn value_in(&self, s: &Scenario) -> f64 {
        match self {
            Param::Tau0 => s.tau0,
            Param::Alpha => s.alpha,
            Param::Beta => s.beta,
            Param::K => s.k,
            Param::Eta => s.eta,
            Param::M => s.m,
        }
    }

    fn set_in(&self, s: &Scenario, v: f64) -> Scenario {
        let mut out = *s;
        match self {
            Param::Tau0 => out.tau0 = v,
            Param::Alpha => out.alpha = v,
            Param::Beta => out.beta = v,
            Param::K => out.k = v,
            Param::Eta => out.eta = v,
            Param::M => out.m = v,
        }
        out
    }
}

/// Equilibrium quantity whose sensitivity is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Cost-reduction effort.
    E,
    /// Bonus share (limited-risk structure only).
    B,
    /// Order quantity.
    Y,
    /// Consolidated after-tax profit.
    PiHq,
}

/// Central finite-difference sensitivity of a re-solved equilibrium metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity {
    /// (right − left) / (2·step).
    pub estimate: f64,
    /// Metric at the parameter minus one step.
    pub left: f64,
    /// Metric at the parameter plus one step.
    pub right: f64,
    /// Step h = 1e−4·max(1, |parameter|).
    pub step: f64,
    /// True when either perturbed equilibrium sat against a boundary of its
    /// search interval, which makes the derivative one-sided at best.
    pub boundary_touched: bool,
}

/// A located sign change of a scanned quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    /// Refined location of the sign change.
    pub location: f64,
    /// Final bisection bracket around `location`.
    pub bracket: (f64, f64),
    /// Name of the differentiated quantity.
    pub metric: &'static str,
    /// Sign of the scanned derivative left of the change (−1 or +1).
    pub left_sign: f64,
    /// Sign of the scanned derivative right of the change (−1 or +1).
    pub right_sign: f64,
}

/// Dominance-boundary crossing at one markup level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    /// Markup level the royalty-share axis was scanned at.
    pub alpha: f64,
    /// Royalty share where the instrument ranking flips; `None` when the
    /// scan found no crossing (the gap is recorded, not invented).
    pub beta: Option<f64>,
    /// Number of sign changes seen on the scan grid.
    pub crossings: usize,
}

/// Width of the tax-differential bisection bracket at termination.
const TURNING_TOL: f64 = 1e-4;

/// Width of the royalty-share bisection bracket at termination.
const BOUNDARY_TOL: f64 = 1e-4;

/// Royalty-share scan window for the dominance boundary.
const BETA_SCAN: (f64, f64) = (0.01, 0.95);

/// Knife-edge markup level α̂(β) = β/(1−β): below it a larger tax
/// differential depresses commissionaire effort, above it the markup income
/// channel wins and effort rises.
pub fn alpha_hat(beta: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&beta));
    beta / (1.0 - beta)
}

/// Re-solves the requested structure and extracts `(metric, boundary flag)`.
fn solved_metric(
    s: &Scenario,
    structure: Structure,
    metric: Metric,
    settings: &SolverSettings,
) -> Result<(f64, bool), ModelError> {
    match structure {
        Structure::Commissionaire => {
            let eq = solve_c(s, settings)?;
            if !eq.converged {
                return Err(ModelError::NonConvergence(eq.iterations));
            }
            let v = match metric {
                Metric::E => eq.e_star,
                Metric::Y => eq.y_star,
                Metric::PiHq => eq.pi_hq,
                Metric::B => {
                    return Err(ModelError::InvariantViolation(
                        "bonus share is not defined under the commissionaire structure".to_string(),
                    ))
                }
            };
            Ok((v, eq.boundary))
        }
        Structure::LimitedRisk => {
            let eq = solve_r(s, settings)?;
            let v = match metric {
                Metric::E => eq.e_star,
                Metric::Y => eq.y_star,
                Metric::PiHq => eq.pi_hq,
                Metric::B => eq.b_star,
            };
            Ok((v, eq.boundary_b))
        }
    }
}

/// Total-derivative sensitivity of an equilibrium metric with respect to a
/// scenario parameter, by central finite differences on re-solved
/// equilibria with step 1e−4·max(1, |parameter|).
///
/// A perturbation that leaves the feasible parameter region is a
/// [`ModelError::FeasibilityLoss`], not a silently shrunken step.
pub fn sensitivity(
    s: &Scenario,
    structure: Structure,
    param: Param,
    metric: Metric,
    settings: &SolverSettings,
) -> Result<Sensitivity, ModelError> {
    s.validate()?;
    let v0 = param.value_in(s);
    let step = 1e-4 * v0.abs().max(1.0);
    let mut sides = [(v0 - step, 0.0, false), (v0 + step, 0.0, false)];
    for (v, out, boundary) in sides.iter_mut() {
        let perturbed = param.set_in(s, *v);
        perturbed
            .validate()
            .map_err(|e| ModelError::FeasibilityLoss {
                param: param.name(),
                reason: format!("perturbed value {v} is infeasible: {e}"),
            })?;
        let (m, b) = solved_metric(&perturbed, structure, metric, settings)?;
        *out = m;
        *boundary = b;
    }
    let (_, left, left_boundary) = sides[0];
    let (_, right, right_boundary) = sides[1];
    Ok(Sensitivity {
        estimate: (right - left) / (2.0 * step),
        left,
        right,
        step,
        boundary_touched: left_boundary || right_boundary,
    })
}

/// Locates the interior extremum of consolidated profit as a function of
/// the tax differential Δτ = τ − τ0 (holding τ fixed and moving τ0).
///
/// A 26-point scan of Δτ over [0.01, τ−0.01] looks for a single sign change
/// in the successive profit differences; the change is then bisected (on
/// the sign of a short central difference) to a bracket of width 1e−4.
///
/// No sign change is [`ModelError::NoTurningPoint`]; several are
/// [`ModelError::MultipleTurningPoints`]. Under the commissionaire
/// structure consolidated profit is monotone in the differential, and with
/// no effort effectiveness the profit ranking never turns, so both cases
/// short-circuit to [`ModelError::NoTurningPoint`].
pub fn dtau_turning_point(
    s: &Scenario,
    structure: Structure,
    settings: &SolverSettings,
) -> Result<ThresholdResult, ModelError> {
    s.validate()?;
    if structure == Structure::Commissionaire {
        return Err(ModelError::NoTurningPoint(
            "consolidated profit is monotone in the tax differential under the \
             commissionaire structure"
                .to_string(),
        ));
    }
    if s.eta == 0.0 {
        return Err(ModelError::NoTurningPoint(
            "without effort effectiveness the contract never responds to the tax \
             differential"
                .to_string(),
        ));
    }
    let lo = 0.01;
    let hi = s.tau - 0.01;
    if hi <= lo {
        return Err(ModelError::NoTurningPoint(format!(
            "tax rate tau = {} leaves no differential window to scan",
            s.tau
        )));
    }

    let profit_at = |dtau: f64| -> Result<f64, ModelError> {
        let probe = Scenario {
            tau0: s.tau - dtau,
            ..*s
        };
        Ok(solved_metric(&probe, structure, Metric::PiHq, settings)?.0)
    };

    const POINTS: usize = 26;
    let grid: Vec<f64> = (0..POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (POINTS - 1) as f64)
        .collect();
    let mut profits = Vec::with_capacity(POINTS);
    for &d in &grid {
        profits.push(profit_at(d)?);
    }
    let diffs: Vec<f64> = profits.windows(2).map(|w| w[1] - w[0]).collect();
    let mut changes = Vec::new();
    for i in 0..diffs.len() - 1 {
        if diffs[i] * diffs[i + 1] < 0.0 {
            changes.push(i);
        }
    }
    match changes.len() {
        0 => {
            return Err(ModelError::NoTurningPoint(format!(
                "no sign change in profit differences across {POINTS} points on \
                 [{lo}, {hi}]"
            )))
        }
        1 => {}
        _ => {
            return Err(ModelError::MultipleTurningPoints(
                changes.iter().map(|&i| grid[i + 1]).collect(),
            ))
        }
    }

    // Bisect the derivative sign inside (grid[i], grid[i+2]).
    let i = changes[0];
    let (mut a, mut b) = (grid[i], grid[i + 2]);
    let delta = 1e-5;
    let slope_sign = |d: f64| -> Result<f64, ModelError> {
        Ok((profit_at(d + delta)? - profit_at(d - delta)?).signum())
    };
    let left_sign = diffs[i].signum();
    let right_sign = diffs[i + 1].signum();
    while b - a > TURNING_TOL {
        let mid = 0.5 * (a + b);
        if slope_sign(mid)? == left_sign {
            a = mid;
        } else {
            b = mid;
        }
    }
    // The bracket must still straddle a genuine sign change of the
    // re-solved profit slope.
    debug_assert!(slope_sign(a)? == left_sign && slope_sign(b)? == right_sign);
    Ok(ThresholdResult {
        location: 0.5 * (a + b),
        bracket: (a, b),
        metric: "pi_hq",
        left_sign,
        right_sign,
    })
}

/// Advantage of the markup instrument over the royalty instrument: the
/// profit sensitivity to the markup minus the profit sensitivity to the
/// royalty share, both on re-solved equilibria. Positive means raising the
/// markup pays more than raising the royalty share.
pub fn dominance_gap(
    s: &Scenario,
    structure: Structure,
    settings: &SolverSettings,
) -> Result<f64, ModelError> {
    let sa = sensitivity(s, structure, Param::Alpha, Metric::PiHq, settings)?;
    let sb = sensitivity(s, structure, Param::Beta, Metric::PiHq, settings)?;
    Ok(sa.estimate - sb.estimate)
}

/// Finds the royalty share where the instrument ranking flips at a fixed
/// markup level, scanning β over (0.01, 0.95) and bisecting the single
/// crossing to a bracket of width 1e−4. Returns the refined crossing (the
/// smallest, if several) and the number of sign changes seen on the grid.
pub fn dominance_root(
    s: &Scenario,
    structure: Structure,
    alpha: f64,
    settings: &SolverSettings,
) -> Result<(f64, usize), ModelError> {
    const SCAN_POINTS: usize = 25;
    let probe = |beta: f64| -> Result<f64, ModelError> {
        let p = Scenario { alpha, beta, ..*s };
        dominance_gap(&p, structure, settings)
    };
    let (lo, hi) = BETA_SCAN;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    let mut gaps = Vec::with_capacity(SCAN_POINTS);
    for &beta in &grid {
        gaps.push(probe(beta)?);
    }
    let mut crossings = Vec::new();
    for i in 0..gaps.len() - 1 {
        if gaps[i] == 0.0 || gaps[i] * gaps[i + 1] < 0.0 {
            crossings.push(i);
        }
    }
    let Some(&first) = crossings.first() else {
        return Err(ModelError::RootNotBracketed { alpha, lo, hi });
    };
    let (mut a, mut b) = (grid[first], grid[first + 1]);
    let mut fa = gaps[first];
    while b - a > BOUNDARY_TOL {
        let mid = 0.5 * (a + b);
        let fm = probe(mid)?;
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Ok((0.5 * (a + b), crossings.len()))
}

/// Traces the markup-versus-royalty dominance boundary over a set of markup
/// levels. Levels where the scan finds no crossing are recorded with an
/// empty royalty share rather than dropped or interpolated.
pub fn dominance_boundary(
    s: &Scenario,
    structure: Structure,
    alphas: &[f64],
    settings: &SolverSettings,
) -> Result<Vec<BoundaryPoint>, ModelError> {
    s.validate()?;
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        match dominance_root(s, structure, alpha, settings) {
            Ok((beta, crossings)) => out.push(BoundaryPoint {
                alpha,
                beta: Some(beta),
                crossings,
            }),
            Err(ModelError::RootNotBracketed { .. }) => out.push(BoundaryPoint {
                alpha,
                beta: None,
                crossings: 0,
            }),
            Err(other) => return Err(other),
        }
    }
    Ok(out)
}
