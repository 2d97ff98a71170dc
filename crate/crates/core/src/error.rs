//! Error taxonomy shared by the demand kernel, the equilibrium solvers, and
//! the comparative-statics layer.

use thiserror::Error;

/// Everything that can go wrong while evaluating the model or solving for an
/// equilibrium. Callers that drive sweeps decide per variant whether a
/// failure aborts the run or is recorded as a non-converged row.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    /// A probability argument fell outside `[0, 1]`.
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    /// The normal distribution has unbounded support on both sides, so its
    /// quantile at p = 0 or p = 1 is not a number.
    #[error("normal quantile is unbounded at p = {0}")]
    NormalUnboundedQuantile(f64),

    /// The generalized failure rate divides by the tail mass 1 − F(y); below
    /// 1e−12 the ratio is numerically meaningless.
    #[error("tail mass 1 - F(y) is below 1e-12 at y = {0}; generalized failure rate undefined")]
    TailDegenerate(f64),

    /// Expected sales require a nonnegative order quantity.
    #[error("order quantity {0} is negative")]
    NegativeOrder(f64),

    /// The effort first-order condition divides by the demand density at the
    /// stocking point; a vanishing density makes dy/de unbounded.
    #[error("demand density vanishes at y = {0}; dy/de undefined")]
    DensityVanishes(f64),

    /// The cost-plus transfer price exceeded the retail price, violating the
    /// arm's-length bound gamma(e) <= T <= m.
    #[error("transfer price {price} exceeds retail price {m} (arm's-length bound)")]
    ArmLengthViolation { price: f64, m: f64 },

    /// The scenario admits no feasible effort level (or violates a field
    /// invariant); the message names the failed condition.
    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(String),

    /// A scenario or settings field violated a stated invariant.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// An iterative solve ran out of its iteration budget or diverged.
    #[error("no convergence after {0} iterations")]
    NonConvergence(usize),

    /// A finite-difference perturbation pushed the scenario outside its
    /// feasible region, so the sensitivity is undefined at this point.
    #[error("perturbing {param} lost feasibility: {reason}")]
    FeasibilityLoss { param: &'static str, reason: String },

    /// The profit curve is monotone over the scanned range: no turning point.
    #[error("no turning point: {0}")]
    NoTurningPoint(String),

    /// More than one sign change was detected; the location is ambiguous and
    /// is reported rather than guessed away.
    #[error("multiple turning points detected near {0:?}")]
    MultipleTurningPoints(Vec<f64>),

    /// A root search found no sign change inside its bracket.
    #[error("no sign change bracketed in [{lo}, {hi}] at alpha = {alpha}")]
    RootNotBracketed { alpha: f64, lo: f64, hi: f64 },
}
