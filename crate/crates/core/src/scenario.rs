//! Scenario parameters shared by both organizational structures, plus the
//! derived quantities (unit cost, transfer price, retail profit) that every
//! solver builds on.

use crate::demand::Demand;
use crate::error::ModelError;

/// A complete parameterization of the two-entity supply chain.
///
/// The headquarters (taxed at `tau`) owns the brand and chooses the
/// cost-reduction effort; the retail entity (taxed at `tau0 <= tau`) buys at
/// the transfer price and serves stochastic demand. `alpha` is the markup on
/// the realized unit cost, `beta` the royalty share of retail profit left
/// with the retail entity, and `reservation` the sales agent's outside
/// option under the limited-risk structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    /// Demand distribution faced by the retail entity.
    pub demand: Demand,
    /// Retail price per unit sold.
    pub m: f64,
    /// Base unit production cost before effort.
    pub gamma0: f64,
    /// Effort effectiveness: unit cost falls by `eta` per unit of effort.
    pub eta: f64,
    /// Quadratic effort cost coefficient (cost is `k e^2 / 2`).
    pub k: f64,
    /// Headquarters (home-country) tax rate.
    pub tau: f64,
    /// Retail-entity (host-country) tax rate.
    pub tau0: f64,
    /// Cost markup applied to the realized unit cost.
    pub alpha: f64,
    /// Royalty share of retail profit retained by the retail entity.
    pub beta: f64,
    /// Sales agent's reservation payoff (limited-risk structure only).
    pub reservation: f64,
}

/// Numerical controls for the equilibrium solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Absolute tolerance on the effort (and contract-share) arguments.
    pub tol: f64,
    /// Iteration cap shared by refinement and fixed-point loops.
    pub max_iter: usize,
    /// Coarse grid size used to bracket the global maximum.
    pub grid_points: usize,
    /// Relaxation factor for the agent-effort fixed point.
    pub damping: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-9,
            max_iter: 10_000,
            grid_points: 512,
            damping: 0.5,
        }
    }
}

impl SolverSettings {
    /// Checks the numerical controls.
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: &str| Err(ModelError::InvariantViolation(msg.to_string()));
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return bad("solver tol must be positive");
        }
        if self.max_iter == 0 {
            return bad("solver max_iter must be at least 1");
        }
        if self.grid_points < 2 {
            return bad("solver grid_points must be at least 2");
        }
        if !self.damping.is_finite() || self.damping <= 0.0 || self.damping > 1.0 {
            return bad("solver damping must lie in (0, 1]");
        }
        Ok(())
    }
}

/// The set of efforts at which the transfer price stays inside the
/// arm's-length window and the unit cost stays positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffortInterval {
    /// Smallest admissible effort (0 unless the markup alone would push the
    /// transfer price above the retail price).
    pub lo: f64,
    /// Largest admissible effort; `f64::INFINITY` when `unbounded`.
    pub hi: f64,
    /// True when effort has no upper bound (no effort effectiveness, so the
    /// unit cost never reaches zero).
    pub unbounded: bool,
}

impl Scenario {
    /// Checks every parameter invariant, including nonemptiness of the
    /// feasible effort interval.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.demand.validate()?;
        let bad = |msg: &str| Err(ModelError::InvariantViolation(msg.to_string()));
        for (name, v) in [
            ("m", self.m),
            ("gamma0", self.gamma0),
            ("eta", self.eta),
            ("k", self.k),
            ("tau", self.tau),
            ("tau0", self.tau0),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("reservation", self.reservation),
        ] {
            if !v.is_finite() {
                return Err(ModelError::InvariantViolation(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        if !(0.0..1.0).contains(&self.tau) || self.tau0 < 0.0 || self.tau0 > self.tau {
            return bad("tax rates must satisfy 0 <= tau0 <= tau < 1");
        }
        if self.alpha < 0.0 {
            return bad("markup alpha must be nonnegative");
        }
        if !(0.0..1.0).contains(&self.beta) {
            return bad("royalty share beta must lie in [0, 1)");
        }
        if self.m <= 0.0 {
            return bad("retail price m must be positive");
        }
        if self.gamma0 <= 0.0 {
            return bad("base unit cost gamma0 must be positive");
        }
        if self.eta < 0.0 {
            return bad("effort effectiveness eta must be nonnegative");
        }
        if self.k <= 0.0 {
            return bad("effort cost coefficient k must be positive");
        }
        if self.reservation < 0.0 {
            return bad("agent reservation payoff must be nonnegative");
        }
        self.feasible_effort_interval()?;
        Ok(())
    }

    /// Tax-rate differential tau − tau0.
    pub fn delta_tau(&self) -> f64 {
        self.tau - self.tau0
    }

    /// Unit production cost γ(e) = γ0 − ηe.
    pub fn unit_cost(&self, e: f64) -> f64 {
        self.gamma0 - self.eta * e
    }

    /// Transfer price T = (1+α)γ(e), enforcing the arm's-length ceiling
    /// T ≤ m. (The floor T ≥ γ(e) holds automatically for α ≥ 0.)
    pub fn transfer_price(&self, e: f64) -> Result<f64, ModelError> {
        let price = (1.0 + self.alpha) * self.unit_cost(e);
        if price > self.m {
            return Err(ModelError::ArmLengthViolation { price, m: self.m });
        }
        Ok(price)
    }

    /// Retail entity's expected pre-tax profit m·s(y) − T·y at order
    /// quantity `y` and effort `e`.
    pub fn retail_profit(&self, y: f64, e: f64) -> Result<f64, ModelError> {
        let t = self.transfer_price(e)?;
        let sales = self.demand.expected_sales(y)?;
        Ok(self.m * sales - t * y)
    }

    /// Quadratic effort cost k e² / 2.
    pub fn effort_cost(&self, e: f64) -> f64 {
        0.5 * self.k * e * e
    }

    /// Efforts keeping the transfer price inside the arm's-length window and
    /// the unit cost positive.
    ///
    /// With `eta > 0` the interval is
    /// `[max(0, (γ0 − m/(1+α))/η), (γ0/η)(1 − 1e−9)]`, the upper end shaved
    /// to keep the unit cost strictly positive. With `eta = 0` effort is
    /// free but useless, so the interval is `[0, ∞)` provided the fixed
    /// transfer price `(1+α)γ0` clears the ceiling `m`; otherwise no effort
    /// can restore feasibility.
    pub fn feasible_effort_interval(&self) -> Result<EffortInterval, ModelError> {
        let marked_up_base = (1.0 + self.alpha) * self.gamma0;
        if self.eta == 0.0 {
            if marked_up_base >= self.m {
                return Err(ModelError::InfeasibleScenario(format!(
                    "transfer price (1+alpha)*gamma0 = {marked_up_base} cannot fall below \
                     the retail price m = {} without effort effectiveness",
                    self.m
                )));
            }
            return Ok(EffortInterval {
                lo: 0.0,
                hi: f64::INFINITY,
                unbounded: true,
            });
        }
        let lo = ((self.gamma0 - self.m / (1.0 + self.alpha)) / self.eta).max(0.0);
        let hi = self.gamma0 / self.eta * (1.0 - 1e-9);
        if lo >= hi {
            return Err(ModelError::InfeasibleScenario(format!(
                "feasible effort interval is empty: lo = {lo}, hi = {hi}"
            )));
        }
        Ok(EffortInterval {
            lo,
            hi,
            unbounded: false,
        })
    }

    /// Composite after-tax weight on retail profit under the commissionaire
    /// structure:
    /// N = [(1−τ)(1−β) + (1−τ0)β](1+α) − (1−τ0)α.
    pub fn n_weight(&self) -> f64 {
        let blended = (1.0 - self.tau) * (1.0 - self.beta) + (1.0 - self.tau0) * self.beta;
        blended * (1.0 + self.alpha) - (1.0 - self.tau0) * self.alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Calibration used throughout: normal(220, 30) demand, m = 100,
    /// γ0 = 20, η = 1, k = 56, τ = 0.35, τ0 = 0.30, α = 0.1, β = 0.3.
    pub(crate) fn baseline() -> Scenario {
        Scenario {
            demand: Demand::Normal {
                mu: 220.0,
                sigma: 30.0,
            },
            m: 100.0,
            gamma0: 20.0,
            eta: 1.0,
            k: 56.0,
            tau: 0.35,
            tau0: 0.30,
            alpha: 0.1,
            beta: 0.3,
            reservation: 0.0,
        }
    }

    #[test]
    fn baseline_is_valid() {
        assert!(baseline().validate().is_ok());
    }

    #[test]
    fn invariants_are_enforced() {
        let cases: Vec<(&str, Scenario)> = vec![
            (
                "tau0 > tau",
                Scenario {
                    tau0: 0.40,
                    ..baseline()
                },
            ),
            (
                "tau >= 1",
                Scenario {
                    tau: 1.0,
                    ..baseline()
                },
            ),
            (
                "tau0 < 0",
                Scenario {
                    tau0: -0.1,
                    ..baseline()
                },
            ),
            (
                "alpha < 0",
                Scenario {
                    alpha: -0.1,
                    ..baseline()
                },
            ),
            (
                "beta >= 1",
                Scenario {
                    beta: 1.0,
                    ..baseline()
                },
            ),
            (
                "beta < 0",
                Scenario {
                    beta: -0.2,
                    ..baseline()
                },
            ),
            (
                "m <= 0",
                Scenario {
                    m: 0.0,
                    ..baseline()
                },
            ),
            (
                "gamma0 <= 0",
                Scenario {
                    gamma0: 0.0,
                    ..baseline()
                },
            ),
            (
                "eta < 0",
                Scenario {
                    eta: -1.0,
                    ..baseline()
                },
            ),
            (
                "k <= 0",
                Scenario {
                    k: 0.0,
                    ..baseline()
                },
            ),
            (
                "a < 0",
                Scenario {
                    reservation: -1.0,
                    ..baseline()
                },
            ),
            (
                "nan",
                Scenario {
                    m: f64::NAN,
                    ..baseline()
                },
            ),
        ];
        for (label, s) in cases {
            assert!(s.validate().is_err(), "expected rejection: {label}");
        }
    }

    #[test]
    fn unit_cost_and_transfer_price() {
        let s = baseline();
        assert!((s.unit_cost(4.56) - 15.44).abs() < 1e-12);
        assert!((s.transfer_price(4.56).unwrap() - 16.984).abs() < 1e-12);

        // A fixed markup that lands above the retail price is rejected.
        let wide = Scenario {
            alpha: 5.0,
            eta: 0.0,
            ..baseline()
        };
        assert!(matches!(
            wide.transfer_price(0.0),
            Err(ModelError::ArmLengthViolation { .. })
        ));
    }

    #[test]
    fn retail_profit_matches_locked_value() {
        let s = baseline();
        let pi = s.retail_profit(249.9, 5.5).unwrap();
        assert!(
            (pi - 17762.557998371285).abs() < 1e-6,
            "retail profit = {pi}"
        );
    }

    #[test]
    fn effort_cost_is_quadratic() {
        let s = baseline();
        assert_eq!(s.effort_cost(0.0), 0.0);
        assert!((s.effort_cost(4.0) - 448.0).abs() < 1e-12);
    }

    #[test]
    fn feasible_interval_cases() {
        // Baseline: markup never binds from below, cap at gamma0/eta.
        let iv = baseline().feasible_effort_interval().unwrap();
        assert_eq!(iv.lo, 0.0);
        assert!((iv.hi - 20.0).abs() < 1e-6 && iv.hi < 20.0);
        assert!(!iv.unbounded);

        // Steep markup forces a positive lower bound: (1+1.5)*50 = 125 > 100,
        // so effort must first pull gamma below m/(1+alpha) = 40.
        let steep = Scenario {
            gamma0: 50.0,
            alpha: 1.5,
            ..baseline()
        };
        let iv = steep.feasible_effort_interval().unwrap();
        assert!((iv.lo - 10.0).abs() < 1e-12);

        // eta = 0 with a feasible fixed price: unbounded interval.
        let flat = Scenario {
            eta: 0.0,
            ..baseline()
        };
        let iv = flat.feasible_effort_interval().unwrap();
        assert!(iv.unbounded && iv.hi.is_infinite() && iv.lo == 0.0);

        // eta = 0 with an infeasible fixed price: hard error.
        let stuck = Scenario {
            eta: 0.0,
            gamma0: 95.0,
            ..baseline()
        };
        assert!(matches!(
            stuck.feasible_effort_interval(),
            Err(ModelError::InfeasibleScenario(_))
        ));
        assert!(stuck.validate().is_err());
    }

    #[test]
    fn n_weight_matches_hand_computation() {
        // [(0.65)(0.7) + (0.70)(0.3)] * 1.1 - 0.70 * 0.1 = 0.6615.
        assert!((baseline().n_weight() - 0.6615).abs() < 1e-12);

        // With tau = tau0 the weight collapses to (1-tau)(1+alpha-alpha)
        // = 1 - tau regardless of beta.
        let flat = Scenario {
            tau0: 0.35,
            ..baseline()
        };
        for beta in [0.0, 0.3, 0.7] {
            let s = Scenario { beta, ..flat };
            assert!((s.n_weight() - 0.65).abs() < 1e-12);
        }
    }

    #[test]
    fn solver_settings_defaults_and_validation() {
        let d = SolverSettings::default();
        assert_eq!(d.tol, 1e-9);
        assert_eq!(d.max_iter, 10_000);
        assert_eq!(d.grid_points, 512);
        assert_eq!(d.damping, 0.5);
        assert!(d.validate().is_ok());

        assert!(SolverSettings { tol: 0.0, ..d }.validate().is_err());
        assert!(SolverSettings { max_iter: 0, ..d }.validate().is_err());
        assert!(SolverSettings {
            grid_points: 1,
            ..d
        }
        .validate()
        .is_err());
        assert!(SolverSettings { damping: 0.0, ..d }.validate().is_err());
        assert!(SolverSettings { damping: 1.5, ..d }.validate().is_err());
    }
}
