//! Equilibrium of the limited-risk structure: a sales agent is hired on a
//! linear contract (fixed wage plus bonus share of retail profit), chooses
//! cost-reduction effort, and headquarters picks the bonus share that
//! maximizes consolidated after-tax profit subject to the agent's incentive
//! and participation constraints.

use crate::commissionaire::retail_best_response_c;
use crate::error::ModelError;
use crate::scenario::{Scenario, SolverSettings};
use crate::search::grid_golden_max;

/// Largest admissible bonus share: a full profit pass-through is excluded to
/// keep the contracting problem interior.
pub const B_MAX: f64 = 1.0 - 1e-6;

/// Consecutive growth steps of the fixed-point update before the iteration
/// is declared divergent.
const DIVERGENCE_RUN: usize = 50;

/// Solved limited-risk equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumR {
    /// Retail entity's order quantity at the equilibrium effort.
    pub y_star: f64,
    /// Agent's cost-reduction effort induced by the bonus share.
    pub e_star: f64,
    /// Optimal bonus share of retail profit.
    pub b_star: f64,
    /// Retail entity's expected pre-tax profit.
    pub pi_r: f64,
    /// Agent's payoff; equals the reservation value because participation
    /// binds at the optimum.
    pub pi_pc: f64,
    /// Headquarters' consolidated after-tax profit.
    pub pi_hq: f64,
    /// Fixed wage balancing participation: a − b·π_R + k e²/2. Often
    /// negative — the agent effectively buys into the bonus stream.
    pub fixed_wage: f64,
    /// Gap between the solved bonus share and the closed-form candidate
    /// evaluated at the solved order quantity (meaningful at interior
    /// optima with effective effort).
    pub lemma2_b_residual: f64,
    /// True when the bonus share landed against 0 or the admissible cap.
    pub boundary_b: bool,
    /// Total damped fixed-point iterations spent across the search.
    pub iterations: usize,
}

/// Agent's incentive-compatible effort e = b(1+α)ηy / k given the bonus
/// share and the order quantity, truncated to the feasible effort interval.
/// The second component reports whether truncation occurred.
pub fn agent_effort(s: &Scenario, b: f64, y: f64) -> Result<(f64, bool), ModelError> {
    let interval = s.feasible_effort_interval()?;
    let raw = b * (1.0 + s.alpha) * s.eta * y / s.k;
    let clamped = raw.clamp(interval.lo, interval.hi);
    Ok((clamped, clamped != raw))
}

/// Damped fixed point of effort and order quantity at a fixed bonus share:
///
///   e ← (1−λ)e + λ·(agent effort at the retail response to e),
///
/// starting from `e0` (0 is the canonical cold start) with relaxation
/// λ = `settings.damping`, until the update falls below `settings.tol`.
/// Returns `(e, y, iterations)`. A run of growing updates or an exhausted
/// iteration budget is a convergence failure.
pub fn inner_fixed_point(
    s: &Scenario,
    b: f64,
    e0: f64,
    settings: &SolverSettings,
) -> Result<(f64, f64, usize), ModelError> {
    let interval = s.feasible_effort_interval()?;
    let mut e = e0.clamp(interval.lo, interval.hi);
    let mut prev_step = f64::INFINITY;
    let mut growing = 0usize;
    for it in 1..=settings.max_iter {
        let y = retail_best_response_c(s, e)?;
        let (target, _) = agent_effort(s, b, y)?;
        let next = (1.0 - settings.damping) * e + settings.damping * target;
        let step = (next - e).abs();
        e = next;
        if step <= settings.tol {
            let y = retail_best_response_c(s, e)?;
            return Ok((e, y, it));
        }
        if step > prev_step {
            growing += 1;
            if growing >= DIVERGENCE_RUN {
                return Err(ModelError::NonConvergence(it));
            }
        } else {
            growing = 0;
        }
        prev_step = step;
    }
    Err(ModelError::NonConvergence(settings.max_iter))
}

/// Agent's actual effort choice at a bonus share, with the retail response
/// folded in: `(e, y, iterations)`.
///
/// The incentive map e ↦ b(1+α)η·y(e)/k is increasing and convex in effort
/// (the retail response steepens as the transfer price falls), so along the
/// equilibrium path the agent's payoff has at most two local maxima: the
/// damped fixed point reached from e = 0, and the top of the feasible
/// interval when the map still points upward there. Iterating alone can
/// return the wrong one — a cold start never crosses the repelling middle
/// rest point — so the two candidates are compared by the agent's own
/// payoff and the better one is returned.
pub fn agent_best_response(
    s: &Scenario,
    b: f64,
    settings: &SolverSettings,
) -> Result<(f64, f64, usize), ModelError> {
    let (e, y, iterations) = inner_fixed_point(s, b, 0.0, settings)?;
    let interval = s.feasible_effort_interval()?;
    if interval.unbounded {
        return Ok((e, y, iterations));
    }
    let y_hi = retail_best_response_c(s, interval.hi)?;
    let points_up = b * (1.0 + s.alpha) * s.eta * y_hi / s.k >= interval.hi;
    if interval.hi - e <= settings.tol {
        // The iteration ran into the top of the interval. When the incentive
        // map still points upward there, the exact rest point is the boundary
        // itself; return it exactly so the induced consolidated profit is
        // flat — not iteration-noisy — across the whole clamped share range.
        return if points_up {
            Ok((interval.hi, y_hi, iterations))
        } else {
            Ok((e, y, iterations))
        };
    }
    if !points_up {
        // The incentive map points back down at the top of the interval, so
        // the clamp is not a rest point and the fixed point is the optimum.
        return Ok((e, y, iterations));
    }
    let payoff_top = b * s.retail_profit(y_hi, interval.hi)? - s.effort_cost(interval.hi);
    let payoff_fp = b * s.retail_profit(y, e)? - s.effort_cost(e);
    if payoff_top > payoff_fp {
        return Ok((interval.hi, y_hi, iterations));
    }
    Ok((e, y, iterations))
}

/// Closed-form candidate for the optimal bonus share at order quantity `y`:
///
///   b = [N·g(y) + (1−τ0)α] / [(1−τ0)(1+α)·g(y)],
///
/// with N the composite after-tax weight and g the generalized failure
/// rate. This is the stationarity condition of the consolidated profit in
/// the bonus share; values above the admissible cap indicate a boundary
/// optimum.
pub fn lemma2_b(s: &Scenario, y: f64) -> Result<f64, ModelError> {
    let g = s.demand.gfr(y)?;
    let host = 1.0 - s.tau0;
    Ok((s.n_weight() * g + host * s.alpha) / (host * (1.0 + s.alpha) * g))
}

/// Headquarters' consolidated after-tax profit with the agent's
/// participation constraint substituted in (wage = a − b·π_R + k e²/2):
///
/// π = (1−τ)(1−β)·π_R + (1−τ0)[β·π_R − a − k e²/2 + α γ(e) y].
///
/// The bonus share influences profit only through the induced effort.
pub fn hq_profit_r(s: &Scenario, y: f64, e: f64) -> Result<f64, ModelError> {
    let pi_r = s.retail_profit(y, e)?;
    let host = s.beta * pi_r - s.reservation - s.effort_cost(e) + s.alpha * s.unit_cost(e) * y;
    Ok((1.0 - s.tau) * (1.0 - s.beta) * pi_r + (1.0 - s.tau0) * host)
}

/// Solves the limited-risk equilibrium by maximizing consolidated profit
/// over the bonus share on [0, [`B_MAX`]] (coarse grid plus golden-section
/// refinement), resolving the agent's best response — fixed point plus
/// boundary-branch comparison — cold at every candidate share.
pub fn solve_r(s: &Scenario, settings: &SolverSettings) -> Result<EquilibriumR, ModelError> {
    s.validate()?;
    settings.validate()?;

    let mut inner_total = 0usize;
    let mut failed: Option<ModelError> = None;
    let found = {
        let mut objective = |b: f64| -> f64 {
            match agent_best_response(s, b, settings) {
                Ok((e, y, used)) => {
                    inner_total += used;
                    hq_profit_r(s, y, e).unwrap_or(f64::NAN)
                }
                Err(err) => {
                    failed = Some(err);
                    f64::NAN
                }
            }
        };
        grid_golden_max(
            &mut objective,
            0.0,
            B_MAX,
            settings.grid_points,
            settings.tol,
            settings.max_iter,
        )
    };
    if !found.value.is_finite() {
        // Nothing evaluable anywhere on the share grid.
        return Err(failed.unwrap_or(ModelError::NonConvergence(found.iterations)));
    }

    let b_star = found.x;
    let (e_star, y_star, used) = agent_best_response(s, b_star, settings)?;
    inner_total += used;
    let pi_r = s.retail_profit(y_star, e_star)?;
    let pi_hq = hq_profit_r(s, y_star, e_star)?;
    let fixed_wage = s.reservation - b_star * pi_r + s.effort_cost(e_star);
    let lemma2_b_residual = match lemma2_b(s, y_star) {
        Ok(b) => b_star - b,
        Err(_) => f64::NAN,
    };

    Ok(EquilibriumR {
        y_star,
        e_star,
        b_star,
        pi_r,
        pi_pc: s.reservation,
        pi_hq,
        fixed_wage,
        lemma2_b_residual,
        boundary_b: found.at_lower || found.at_upper,
        iterations: inner_total,
    })
}
