//! Equilibrium analysis of tax-motivated transfer pricing in a two-entity
//! supply chain.
//!
//! A headquarters entity sells through a retail entity in a lower-tax
//! country, moving profit with two instruments: a markup `alpha` on the
//! effort-dependent unit cost, and a royalty arrangement leaving the share
//! `beta` of retail profit in the low-tax country. Demand is stochastic, the
//! retail entity orders at the newsvendor critical fractile, and
//! headquarters exerts cost-reduction effort either directly (the
//! *commissionaire* structure) or through an incentivized sales agent (the
//! *limited-risk* structure).
//!
//! The crate provides:
//!
//! - [`Demand`]: normal, uniform, and exponential demand with quantiles,
//!   generalized failure rates, and expected sales;
//! - [`Scenario`]: validated model parameters and derived quantities;
//! - [`solve_c`] / [`solve_r`]: equilibrium solvers for the two structures;
//! - [`oracle_solve_c`] / [`oracle_solve_r`]: slow brute-force references
//!   used to certify the solvers;
//! - [`sensitivity`], [`dtau_turning_point`], [`dominance_boundary`]:
//!   comparative statics on re-solved equilibria.

mod commissionaire;
mod demand;
mod error;
mod limited_risk;
mod oracle;
mod scenario;
mod search;
mod statics;

pub use commissionaire::{
    effort_foc_c, hq_profit_c, retail_best_response_c, solve_c, EquilibriumC,
};
pub use demand::Demand;
pub use error::ModelError;
pub use limited_risk::{
    agent_best_response, agent_effort, hq_profit_r, inner_fixed_point, lemma2_b, solve_r,
    EquilibriumR, B_MAX,
};
pub use oracle::{oracle_solve_c, oracle_solve_r, random_feasible_scenarios, OracleC, OracleR};
pub use scenario::{EffortInterval, Scenario, SolverSettings};
pub use search::{grid_golden_max, GridGoldenResult};
pub use statics::{
    alpha_hat, dominance_boundary, dominance_gap, dominance_root, dtau_turning_point, sensitivity,
    BoundaryPoint, Metric, Param, Sensitivity, Structure, ThresholdResult,
};
