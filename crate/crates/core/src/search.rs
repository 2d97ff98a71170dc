//! Derivative-free scalar maximization: a coarse bracketing grid followed by
//! golden-section refinement of every near-optimal cell.
//!
//! The objectives in this crate are piecewise-smooth and, away from knife-edge
//! parameter choices, unimodal on the feasible interval. The grid stage makes
//! the search robust to the occasional flat or multi-peaked objective; the
//! refinement stage delivers the final argument to absolute tolerance.

/// Outcome of [`grid_golden_max`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGoldenResult {
    /// Maximizing argument.
    pub x: f64,
    /// Objective value at `x`.
    pub value: f64,
    /// Total objective evaluations spent.
    pub iterations: usize,
    /// False when an iteration cap was hit or the best value is not finite.
    pub converged: bool,
    /// True when `x` sits against the lower end of the interval.
    pub at_lower: bool,
    /// True when `x` sits against the upper end of the interval.
    pub at_upper: bool,
}

/// Golden-ratio complement (√5 − 1)/2.
const INVPHI: f64 = 0.618_033_988_749_894_8;

/// Maximizes `f` on `[lo, hi]`.
///
/// A `grid_points`-point scan brackets every candidate cell whose value ties
/// the grid maximum to within `tol`; each such cell is refined by
/// golden-section search to an argument tolerance of `tol` (capped at
/// `max_iter` shrink steps per cell). The best refined value wins; exact
/// value ties resolve to the smaller argument. Non-finite objective values
/// are treated as negative infinity so that infeasible edges lose to any
/// feasible point.
pub fn grid_golden_max(
    f: &mut dyn FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    grid_points: usize,
    tol: f64,
    max_iter: usize,
) -> GridGoldenResult {
    debug_assert!(lo < hi && grid_points >= 2);
    let n = grid_points.max(2);
    let mut evals = 0usize;
    let mut guard = |x: f64| -> f64 {
        evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };

    let step = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| guard(x)).collect();

    let best_grid = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if best_grid == f64::NEG_INFINITY {
        // Nothing feasible anywhere on the grid.
        return GridGoldenResult {
            x: lo,
            value: f64::NEG_INFINITY,
            iterations: evals,
            converged: false,
            at_lower: true,
            at_upper: false,
        };
    }

    let mut best: Option<(f64, f64)> = None;
    let mut all_converged = true;
    for i in 0..n {
        if values[i] < best_grid - tol {
            continue;
        }
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(n - 1)];
        let (x, v, ok) = golden_max(&mut guard, a, b, tol, max_iter);
        all_converged &= ok;
        best = match best {
            None => Some((x, v)),
            Some((bx, bv)) => {
                if v > bv || (v == bv && x < bx) {
                    Some((x, v))
                } else {
                    Some((bx, bv))
                }
            }
        };
    }

    let (x, value) = best.expect("at least one grid cell ties the maximum");
    GridGoldenResult {
        x,
        value,
        iterations: evals,
        converged: all_converged && value.is_finite(),
        at_lower: x - lo <= 4.0 * tol,
        at_upper: hi - x <= 4.0 * tol,
    }
}

/// Golden-section maximization on `[a, b]` to argument tolerance `tol`.
/// Returns `(x, f(x), converged)`.
fn golden_max(
    f: &mut impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64, bool) {
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0usize;
    while b - a > tol {
        if iter >= max_iter {
            break;
        }
        iter += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x), b - a <= tol)
}
