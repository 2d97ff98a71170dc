//! Equilibrium of the commissionaire structure: headquarters chooses
//! cost-reduction effort, the retail entity orders at the newsvendor critical
//! fractile implied by the marked-up transfer price, and profits are split
//! through the royalty share and the markup income.

use crate::error::ModelError;
use crate::scenario::{Scenario, SolverSettings};
use crate::search::grid_golden_max;

/// Densities below this bound make the order-quantity response slope
/// meaningless.
const DENSITY_FLOOR: f64 = 1e-15;

/// Solved commissionaire equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumC {
    /// Retail entity's order quantity at the equilibrium effort.
    pub y_star: f64,
    /// Headquarters' cost-reduction effort.
    pub e_star: f64,
    /// Retail entity's expected pre-tax profit.
    pub pi_r: f64,
    /// Headquarters' consolidated after-tax profit.
    pub pi_hq: f64,
    /// Effort first-order condition evaluated at the solution (NaN when the
    /// condition is undefined there, e.g. a vanishing density at a boundary
    /// solution).
    pub foc_residual: f64,
    /// True when the objective does not improve one comparison step
    /// (1e−4·max(1, e*)) to either side within the feasible interval.
    pub second_order_ok: bool,
    /// Objective evaluations spent by the search.
    pub iterations: usize,
    /// True when the effort landed against an end of the feasible interval.
    pub boundary: bool,
    /// False when the search hit an iteration cap or never found a finite
    /// objective value.
    pub converged: bool,
}

/// Retail entity's optimal order quantity given effort `e`: the newsvendor
/// critical fractile y = F⁻¹(1 − T/m) at transfer price T = (1+α)γ(e).
pub fn retail_best_response_c(s: &Scenario, e: f64) -> Result<f64, ModelError> {
    let t = s.transfer_price(e)?;
    s.demand.quantile(1.0 - t / s.m)
}

/// Headquarters' consolidated after-tax profit at order quantity `y` and
/// effort `e`:
///
/// π = (1−τ)[(1−β)·π_R − k e²/2] + (1−τ0)[β·π_R − a + α γ(e) y].
///
/// The home country taxes the royalty stream net of the effort cost; the
/// host country taxes the retained retail share plus the markup income on
/// the transferred units, net of the fixed agent payment.
pub fn hq_profit_c(s: &Scenario, y: f64, e: f64) -> Result<f64, ModelError> {
    let pi_r = s.retail_profit(y, e)?;
    let home = (1.0 - s.beta) * pi_r - s.effort_cost(e);
    let host = s.beta * pi_r - s.reservation + s.alpha * s.unit_cost(e) * y;
    Ok((1.0 - s.tau) * home + (1.0 - s.tau0) * host)
}

/// Effort first-order condition of the commissionaire structure, with the
/// order quantity at its best response:
///
/// N η y + (1−τ0) α γ0 (dy/de) − [(1−τ0)(α η (dy/de) + k) − Δτ k] e,
///
/// where N is [`Scenario::n_weight`] and dy/de = (1+α)η / (m f(y)) is the
/// slope of the retail response. Zero at interior optima.
pub fn effort_foc_c(s: &Scenario, e: f64) -> Result<f64, ModelError> {
    let y = retail_best_response_c(s, e)?;
    let density = s.demand.pdf(y);
    if density < DENSITY_FLOOR {
        return Err(ModelError::DensityVanishes(y));
    }
    let dyde = (1.0 + s.alpha) * s.eta / (s.m * density);
    let n = s.n_weight();
    let host_weight = 1.0 - s.tau0;
    let foc = n * s.eta * y + host_weight * s.alpha * s.gamma0 * dyde
        - (host_weight * (s.alpha * s.eta * dyde + s.k) - s.delta_tau() * s.k) * e;

    // The grouped-coefficient form above must agree with the direct
    // envelope-theorem derivative
    //   N η y + (1−τ0) α γ(e) (dy/de) − (1−τ)k e
    // through the identity (1−τ0)k − Δτ k = (1−τ)k.
    #[cfg(debug_assertions)]
    {
        let direct =
            n * s.eta * y + host_weight * s.alpha * s.unit_cost(e) * dyde - (1.0 - s.tau) * s.k * e;
        debug_assert!(
            (foc - direct).abs() <= 1e-8 * foc.abs().max(1.0),
            "grouped FOC {foc} disagrees with direct form {direct}"
        );
    }
    Ok(foc)
}

/// Solves the commissionaire equilibrium by maximizing headquarters' profit
/// over the feasible effort interval (coarse grid plus golden-section
/// refinement), then recovering the retail response and diagnostics.
///
/// Boundary solutions are reported through the `boundary` flag, not as
/// errors. With no effort effectiveness (η = 0) effort is pure cost and the
/// solution is e = 0 directly.
pub fn solve_c(s: &Scenario, settings: &SolverSettings) -> Result<EquilibriumC, ModelError> {
    s.validate()?;
    settings.validate()?;
    let interval = s.feasible_effort_interval()?;

    if interval.unbounded {
        // Effort cannot move the unit cost; any e > 0 only burns k e²/2.
        let e = 0.0;
        let y = retail_best_response_c(s, e)?;
        return Ok(EquilibriumC {
            y_star: y,
            e_star: e,
            pi_r: s.retail_profit(y, e)?,
            pi_hq: hq_profit_c(s, y, e)?,
            foc_residual: effort_foc_c(s, e).unwrap_or(f64::NAN),
            second_order_ok: true,
            iterations: 1,
            boundary: true,
            converged: true,
        });
    }

    let mut objective = |e: f64| -> f64 {
        retail_best_response_c(s, e)
            .and_then(|y| hq_profit_c(s, y, e))
            .unwrap_or(f64::NAN)
    };
    let found = grid_golden_max(
        &mut objective,
        interval.lo,
        interval.hi,
        settings.grid_points,
        settings.tol,
        settings.max_iter,
    );
    if !found.value.is_finite() {
        return Err(ModelError::NonConvergence(found.iterations));
    }

    let e_star = found.x;
    let y_star = retail_best_response_c(s, e_star)?;
    let pi_r = s.retail_profit(y_star, e_star)?;
    let pi_hq = hq_profit_c(s, y_star, e_star)?;

    // Local-maximum certificate: neither comparison point inside the
    // interval may beat the solution beyond rounding slack.
    let h = 1e-4 * e_star.abs().max(1.0);
    let slack = 1e-9 * pi_hq.abs().max(1.0);
    let no_better = |e: f64| -> bool {
        if e < interval.lo || e > interval.hi {
            return true;
        }
        let v = objective(e);
        !v.is_finite() || v <= pi_hq + slack
    };
    let second_order_ok = no_better(e_star - h) && no_better(e_star + h);

    Ok(EquilibriumC {
        y_star,
        e_star,
        pi_r,
        pi_hq,
        foc_residual: effort_foc_c(s, e_star).unwrap_or(f64::NAN),
        second_order_ok,
        iterations: found.iterations,
        boundary: found.at_lower || found.at_upper,
        converged: found.converged,
    })
}
