//! Brute-force reference solvers and a random scenario generator.
//!
//! The oracles share the model formulas with the production solvers but none
//! of the search machinery: they return dense-grid argmaxes with no
//! refinement. They exist to certify the refined solvers to within one grid
//! step on arbitrary feasible scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commissionaire::{hq_profit_c, retail_best_response_c};
use crate::demand::Demand;
use crate::error::ModelError;
use crate::limited_risk::hq_profit_r;
use crate::scenario::Scenario;

/// Best cell found by the commissionaire oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleC {
    /// Midpoint of the winning effort cell.
    pub e: f64,
    /// Retail response at that effort.
    pub y: f64,
    /// Consolidated after-tax profit at that effort.
    pub pi_hq: f64,
    /// Width of one effort cell (the certification tolerance).
    pub cell_width: f64,
}

/// Best cell found by the limited-risk oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleR {
    /// Midpoint of the winning bonus-share cell.
    pub b: f64,
    /// Agent's best effort on the effort grid at that share.
    pub e: f64,
    /// Retail response at that effort.
    pub y: f64,
    /// Consolidated after-tax profit at that point.
    pub pi_hq: f64,
    /// Width of one bonus-share cell.
    pub b_cell_width: f64,
    /// Width of one effort cell.
    pub e_cell_width: f64,
}

impl OracleR {
    /// Certification tolerances `(tol_b, tol_e)` — one step in each grid —
    /// for comparing a refined solution against this oracle point.
    ///
    /// Consolidated profit depends on the share only through the induced
    /// effort, so steps convert between the two grids through the agent's
    /// equilibrium response
    ///
    ///   de/db = [(1+α)ηy/k] / (1 − ρ),   ρ = b(1+α)η·y′(e)/k,
    ///
    /// the bare incentive slope amplified by the effort→stock→effort
    /// feedback (y′ = (1+α)η/(m·f(y)) from the critical fractile; ρ < 1 at a
    /// stable rest point). One effort step is worth a share step of
    /// e_cell/slope, and a share difference certified to `tol_b` moves the
    /// responding effort by up to (de/db)·tol_b. When the effort sits pinned
    /// at the top of the feasible interval it does not respond to the share
    /// at all, so the feedback term is dropped there.
    pub fn match_tolerances(&self, s: &Scenario) -> (f64, f64) {
        let slope = (1.0 + s.alpha) * s.eta * self.y / s.k;
        if slope <= 0.0 {
            return (self.b_cell_width, self.e_cell_width);
        }
        let top_pinned = s
            .feasible_effort_interval()
            .map(|iv| !iv.unbounded && iv.hi - self.e <= 1.5 * self.e_cell_width)
            .unwrap_or(false);
        let response = if top_pinned {
            0.0
        } else {
            let y_slope = (1.0 + s.alpha) * s.eta / (s.m * s.demand.pdf(self.y));
            let rho = (self.b * (1.0 + s.alpha) * s.eta * y_slope / s.k).clamp(0.0, 0.99);
            slope / (1.0 - rho)
        };
        let tol_b = self.b_cell_width + self.e_cell_width / slope;
        let tol_e = self.e_cell_width + response * tol_b;
        (tol_b, tol_e)
    }
}

/// Commissionaire reference solver: scans at least 1000 effort-cell
/// midpoints across the feasible interval and returns the argmax cell.
pub fn oracle_solve_c(s: &Scenario, grid: usize) -> Result<OracleC, ModelError> {
    s.validate()?;
    let interval = s.feasible_effort_interval()?;
    if interval.unbounded {
        // Effort is pure cost here; the answer is e = 0 exactly.
        let y = retail_best_response_c(s, 0.0)?;
        return Ok(OracleC {
            e: 0.0,
            y,
            pi_hq: hq_profit_c(s, y, 0.0)?,
            cell_width: 0.0,
        });
    }
    let n = grid.max(1000);
    let width = (interval.hi - interval.lo) / n as f64;
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..n {
        let e = interval.lo + (i as f64 + 0.5) * width;
        let Ok(y) = retail_best_response_c(s, e) else {
            continue;
        };
        let Ok(pi) = hq_profit_c(s, y, e) else {
            continue;
        };
        if best.is_none_or(|(_, _, bp)| pi > bp) {
            best = Some((e, y, pi));
        }
    }
    let (e, y, pi_hq) = best.ok_or(ModelError::NonConvergence(n))?;
    Ok(OracleC {
        e,
        y,
        pi_hq,
        cell_width: width,
    })
}

/// Limited-risk reference solver: for each bonus share on a uniform [0, 1)
/// grid (at least 500 points, including b = 0), the agent's payoff
/// a + b·π_R(y(e), e) − k e²/2 is maximized over a dense inclusive effort
/// grid — a direct argmax replacing the incentive fixed point — and the
/// consolidated profit is evaluated at that agent optimum. Returns the
/// outer argmax.
///
/// Over the share, each effort column is the line b ↦ (a − k e²/2) + b·π_R,
/// and the slopes π_R are strictly increasing along the grid; the agent's
/// column argmax is therefore read off the upper envelope of those lines in
/// one pass instead of rescanning every column per share. The result is
/// exactly the grid argmax the quadratic scan would produce, which keeps
/// very dense effort grids affordable.
pub fn oracle_solve_r(s: &Scenario, b_grid: usize, e_grid: usize) -> Result<OracleR, ModelError> {
    s.validate()?;
    let interval = s.feasible_effort_interval()?;
    let n_b = b_grid.max(500);
    let n_e = e_grid.max(500);

    // The retail response and retail profit depend on effort alone, so the
    // effort-grid columns are shared across every bonus-share candidate.
    // Columns that never win (retail profit not above every cheaper
    // column's) are dominated for all b ≥ 0 and dropped up front.
    let mut columns: Vec<(f64, f64, f64)> = Vec::with_capacity(n_e);
    let e_width;
    if interval.unbounded {
        let y = retail_best_response_c(s, 0.0)?;
        columns.push((0.0, y, s.retail_profit(y, 0.0)?));
        e_width = 0.0;
    } else {
        e_width = (interval.hi - interval.lo) / (n_e - 1) as f64;
        for j in 0..n_e {
            let e = interval.lo + j as f64 * e_width;
            let Ok(y) = retail_best_response_c(s, e) else {
                continue;
            };
            let Ok(pi_r) = s.retail_profit(y, e) else {
                continue;
            };
            if columns.last().is_none_or(|&(_, _, prev)| pi_r > prev) {
                columns.push((e, y, pi_r));
            }
        }
    }
    if columns.is_empty() {
        return Err(ModelError::NonConvergence(n_e));
    }

    // Upper envelope of the agent-payoff lines: `hull` holds column indices
    // with the share at which each one takes over from its predecessor.
    let intercept = |col: &(f64, f64, f64)| s.reservation - s.effort_cost(col.0);
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        loop {
            let Some(&(t, from_t)) = hull.last() else {
                hull.push((j, f64::NEG_INFINITY));
                break;
            };
            let takeover = (intercept(&columns[t]) - intercept(col)) / (col.2 - columns[t].2);
            if takeover <= from_t {
                hull.pop();
            } else {
                hull.push((j, takeover));
                break;
            }
        }
    }

    let b_width = 1.0 / n_b as f64;
    let mut segment = 0usize;
    let mut hq_cache: Vec<Option<f64>> = vec![None; hull.len()];
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for i in 0..n_b {
        let b = i as f64 * b_width;
        while segment + 1 < hull.len() && hull[segment + 1].1 <= b {
            segment += 1;
        }
        let (e, y, _) = columns[hull[segment].0];
        let pi = match hq_cache[segment] {
            Some(pi) => pi,
            None => {
                let Ok(pi) = hq_profit_r(s, y, e) else {
                    continue;
                };
                hq_cache[segment] = Some(pi);
                pi
            }
        };
        if best.is_none_or(|(_, _, _, bp)| pi > bp) {
            best = Some((b, e, y, pi));
        }
    }
    let (b, e, y, pi_hq) = best.ok_or(ModelError::NonConvergence(n_b))?;
    Ok(OracleR {
        b,
        e,
        y,
        pi_hq,
        b_cell_width: b_width,
        e_cell_width: e_width,
    })
}

/// Deterministically generates `count` feasible scenarios from a seed,
/// rotating through the three demand families.
///
/// Draws keep the marked-up base cost at or below 97% of the retail price,
/// so the feasible effort interval always starts at zero and the critical
/// fractile stays bounded away from the degenerate edges.
pub fn random_feasible_scenarios(seed: u64, count: usize) -> Vec<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let family = out.len() % 3;
        let demand = match family {
            0 => {
                let mu = rng.random_range(120.0..320.0);
                let sigma = rng.random_range(mu / 12.0..mu / 7.0);
                Demand::Normal { mu, sigma }
            }
            1 => Demand::Uniform {
                lo: 0.0,
                hi: rng.random_range(150.0..550.0),
            },
            _ => Demand::Exponential {
                rate: 1.0 / rng.random_range(80.0..300.0),
            },
        };
        let m = rng.random_range(60.0..180.0);
        let alpha = rng.random_range(0.0..0.6);
        let gamma0 = rng.random_range(0.08..0.97 / (1.0 + alpha)) * m;
        let tau = rng.random_range(0.15..0.45);
        let tau0 = rng.random_range(0.02..tau);
        let s = Scenario {
            demand,
            m,
            gamma0,
            eta: rng.random_range(0.5..2.0),
            k: rng.random_range(20.0..90.0),
            tau,
            tau0,
            alpha,
            beta: rng.random_range(0.0..0.8),
            reservation: rng.random_range(0.0..1500.0),
        };
        if s.validate().is_ok() {
            out.push(s);
        }
    }
    out
}
