//! Randomized distributional properties of the demand kernel and
//! deterministic finite-difference sanity checks on the equilibrium layer.

use proptest::prelude::*;
use tesc_core::{
    sensitivity, solve_c, solve_r, Demand, Metric, Param, Scenario, SolverSettings, Structure,
};

/// Demand families with parameters in the ranges the solvers are exercised
/// on: means well clear of zero so the normal family's negative mass stays
/// negligible.
fn any_demand() -> impl Strategy<Value = Demand> {
    prop_oneof![
        (100.0..300.0f64, (1.0 / 12.0)..(1.0 / 6.0)).prop_map(|(mu, frac)| Demand::Normal {
            mu,
            sigma: mu * frac,
        }),
        (50.0..500.0f64).prop_map(|hi| Demand::Uniform { lo: 0.0, hi }),
        (50.0..300.0f64).prop_map(|mean| Demand::Exponential { rate: 1.0 / mean }),
    ]
}

proptest! {
    /// Quantile and cumulative round-trip to 1e−9 absolute across the whole
    /// probability range, for every family.
    #[test]
    fn quantile_cdf_round_trip(d in any_demand(), p in 1e-9..=(1.0 - 1e-9)) {
        let y = d.quantile(p).unwrap();
        prop_assert!(
            (d.cdf(y) - p).abs() <= 1e-9,
            "family {d:?}: cdf(quantile({p})) = {} drifted",
            d.cdf(y),
        );
    }

    /// The generalized failure rate y·f/(1−F) is nondecreasing on the
    /// interior of the support for all three families.
    #[test]
    fn generalized_failure_rate_is_nondecreasing(
        d in any_demand(),
        u1 in 0.01..0.99f64,
        u2 in 0.01..0.99f64,
    ) {
        let (lo, hi) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
        let g1 = d.gfr(d.quantile(lo).unwrap()).unwrap();
        let g2 = d.gfr(d.quantile(hi).unwrap()).unwrap();
        prop_assert!(g1 <= g2 + 1e-9 * g2.abs().max(1.0));
    }

    /// Closed-form expected sales agree with the adaptive-quadrature
    /// fallback to 1e−8 relative anywhere in the support.
    #[test]
    fn closed_form_sales_match_quadrature(d in any_demand(), u in 0.01..0.99f64) {
        let y = d.quantile(u).unwrap();
        let closed = d.expected_sales(y).unwrap();
        let quad = d.expected_sales_quadrature(y).unwrap();
        prop_assert!(
            (closed - quad).abs() <= 1e-8 * closed.abs().max(1.0),
            "family {d:?} at y={y}: closed {closed} vs quadrature {quad}",
        );
    }

    /// d/dy E[min(D, y)] = 1 − F(y): a short central difference of the
    /// closed form reproduces the survival function to 1e−6 relative.
    #[test]
    fn expected_sales_slope_is_the_survival_function(
        d in any_demand(),
        u in 0.05..0.95f64,
    ) {
        let y = d.quantile(u).unwrap();
        let h = 1e-5 * y.abs().max(1.0);
        let fd = (d.expected_sales(y + h).unwrap() - d.expected_sales(y - h).unwrap())
            / (2.0 * h);
        let tail = d.survival(y);
        prop_assert!(
            (fd - tail).abs() <= 1e-6 * tail,
            "family {d:?} at y={y}: slope {fd} vs survival {tail}",
        );
    }

    /// Expected sales are nondecreasing and concave in the order quantity.
    #[test]
    fn expected_sales_are_nondecreasing_and_concave(
        d in any_demand(),
        u1 in 0.01..0.99f64,
        u2 in 0.01..0.99f64,
    ) {
        let (a, b) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
        let y1 = d.quantile(a).unwrap();
        let y2 = d.quantile(b).unwrap();
        let s1 = d.expected_sales(y1).unwrap();
        let s2 = d.expected_sales(y2).unwrap();
        let mid = d.expected_sales(0.5 * (y1 + y2)).unwrap();
        let slack = 1e-9 * s2.abs().max(1.0);
        prop_assert!(s1 <= s2 + slack, "sales fell from {s1} to {s2}");
        prop_assert!(mid >= 0.5 * (s1 + s2) - slack, "chord above the curve");
    }
}

/// Figure-5 commissionaire baseline (normal demand, markup 0.1, royalty 0.3).
fn commissionaire_base() -> Scenario {
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

/// Figure-7 limited-risk baseline (softer effort cost, paid agent).
fn limited_risk_base() -> Scenario {
    Scenario {
        k: 36.0,
        tau0: 0.10,
        reservation: 5100.0,
        ..commissionaire_base()
    }
}

/// Re-solves the requested structure and reads off one metric plus the
/// boundary flag, for the half-step probes below.
fn resolve_metric(
    s: &Scenario,
    structure: Structure,
    metric: Metric,
    settings: &SolverSettings,
) -> (f64, bool) {
    match structure {
        Structure::Commissionaire => {
            let eq = solve_c(s, settings).unwrap();
            assert!(eq.converged);
            let v = match metric {
                Metric::E => eq.e_star,
                Metric::Y => eq.y_star,
                Metric::PiHq => eq.pi_hq,
                Metric::B => unreachable!("share metric never probed under C"),
            };
            (v, eq.boundary)
        }
        Structure::LimitedRisk => {
            let eq = solve_r(s, settings).unwrap();
            let v = match metric {
                Metric::E => eq.e_star,
                Metric::Y => eq.y_star,
                Metric::PiHq => eq.pi_hq,
                Metric::B => eq.b_star,
            };
            (v, eq.boundary_b)
        }
    }
}

/// Halving the finite-difference step moves each smooth-region sensitivity
/// by less than 5% (Richardson sanity check). Boundary-flagged equilibria
/// would invalidate the comparison, so the probes assert none appear.
#[test]
fn halving_the_difference_step_barely_moves_smooth_sensitivities() {
    type Setter = fn(&mut Scenario, f64);
    let probes: [(Structure, Param, Setter, Metric); 7] = [
        (
            Structure::Commissionaire,
            Param::Tau0,
            |s, v| s.tau0 = v,
            Metric::PiHq,
        ),
        (
            Structure::Commissionaire,
            Param::Beta,
            |s, v| s.beta = v,
            Metric::PiHq,
        ),
        (
            Structure::Commissionaire,
            Param::K,
            |s, v| s.k = v,
            Metric::PiHq,
        ),
        (
            Structure::Commissionaire,
            Param::Tau0,
            |s, v| s.tau0 = v,
            Metric::E,
        ),
        (
            Structure::LimitedRisk,
            Param::Tau0,
            |s, v| s.tau0 = v,
            Metric::PiHq,
        ),
        (
            Structure::LimitedRisk,
            Param::Beta,
            |s, v| s.beta = v,
            Metric::PiHq,
        ),
        (
            Structure::LimitedRisk,
            Param::Tau0,
            |s, v| s.tau0 = v,
            Metric::B,
        ),
    ];
    let settings = SolverSettings::default();
    for (structure, param, set, metric) in probes {
        let s = match structure {
            Structure::Commissionaire => commissionaire_base(),
            Structure::LimitedRisk => limited_risk_base(),
        };
        let full = sensitivity(&s, structure, param, metric, &settings).unwrap();
        assert!(
            !full.boundary_touched,
            "{} probe under {} touched a search boundary",
            param.name(),
            structure.label(),
        );
        let h2 = full.step / 2.0;
        let v0 = match param {
            Param::Tau0 => s.tau0,
            Param::Beta => s.beta,
            Param::K => s.k,
            _ => unreachable!("probe list stays within tau0/beta/k"),
        };
        let mut left = s;
        set(&mut left, v0 - h2);
        let mut right = s;
        set(&mut right, v0 + h2);
        let (ml, bl) = resolve_metric(&left, structure, metric, &settings);
        let (mr, br) = resolve_metric(&right, structure, metric, &settings);
        assert!(!bl && !br);
        let halved = (mr - ml) / (2.0 * h2);
        assert!(
            (halved - full.estimate).abs() < 0.05 * full.estimate.abs(),
            "{}/{:?} under {}: step {} gave {}, step {} gave {}",
            param.name(),
            metric,
            structure.label(),
            full.step,
            full.estimate,
            h2,
            halved,
        );
    }
}

/// External incentive-compatibility check: holding the solved order
/// quantity and bonus share fixed, the agent's own payoff over a dense
/// effort grid peaks at the reported effort (within grid resolution).
#[test]
fn reported_effort_is_the_agents_grid_argmax() {
    let s = Scenario {
        tau0: 0.30,
        ..limited_risk_base()
    };
    let eq = solve_r(&s, &SolverSettings::default()).unwrap();
    let interval = s.feasible_effort_interval().unwrap();
    assert!(!interval.unbounded);
    let n = 10_000usize;
    let width = (interval.hi - interval.lo) / (n - 1) as f64;
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for j in 0..n {
        let e = interval.lo + j as f64 * width;
        let payoff =
            s.reservation + eq.b_star * s.retail_profit(eq.y_star, e).unwrap() - s.effort_cost(e);
        if payoff > best.0 {
            best = (payoff, e);
        }
    }
    assert!(
        (best.1 - eq.e_star).abs() <= width,
        "agent grid argmax {} vs reported effort {}",
        best.1,
        eq.e_star,
    );
}
