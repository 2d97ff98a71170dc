//! Benchmark-only crate; the measurements live in `benches/equilibrium.rs`.
//!
//! Shared here: the two reference scenarios the benchmarks solve, so the
//! numbers stay comparable across runs and machines.

use tesc_core::{Demand, Scenario};

/// Moderate-noise scenario solved by the commissionaire benchmarks.
pub fn commissionaire_scenario() -> Scenario {
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

/// Delegated-effort scenario with a binding reservation payoff, solved by
/// the limited-risk benchmarks; the share search dominates its cost.
pub fn limited_risk_scenario() -> Scenario {
    Scenario {
        k: 36.0,
        reservation: 5100.0,
        ..commissionaire_scenario()
    }
}
