//! Hypothesis checking: midpoint convexity on the co-ordinates over a grid,
//! and the five-term Hadamard chain as an end-to-end sanity suite for
//! coordinate-convex inputs.

use std::fmt;

use crate::domain::Rectangle;
use crate::expr::{EvalError, Expr, FunctionModel};
use crate::quad::{integrate_1d, integrate_2d, QuadConfig, QuadError};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

/// A concrete violation of midpoint convexity: along `axis`, with the other
/// coordinate fixed at `fixed_coord`, the value at the midpoint of `t1, t2`
/// exceeds the chord average by `violation` (> tolerance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness<S: Scalar> {
    pub axis: Axis,
    pub fixed_coord: S,
    pub t1: S,
    pub t2: S,
    pub violation: S,
}

/// Outcome of the grid convexity check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport<S: Scalar> {
    pub passed: bool,
    pub witness: Option<Witness<S>>,
    pub grid_n: u32,
}

/// Checks convexity of both partial mappings `u -> g(u, y)` and
/// `v -> g(x, v)` by midpoint inequality over a `grid_n` lattice per axis.
///
/// The scan runs axis x first, fixed coordinate ascending, then pairs
/// `(t1, t2)` ascending, and stops at the first violation, so the reported
/// witness is the lexicographically smallest by `(axis, fixed_coord, t1,
/// t2)` and the result is deterministic.
pub fn is_coordinate_convex<S: Scalar>(
    g: &Expr<S>,
    r: &Rectangle<S>,
    grid_n: u32,
    tol: S,
) -> Result<ConvexityReport<S>, EvalError<S>> {
    assert!(grid_n >= 3, "convexity grid needs at least 3 points");
    let xs = lattice(r.a(), r.b(), grid_n);
    let ys = lattice(r.c(), r.d(), grid_n);

    // lattice values up front; midpoints are evaluated on demand
    let n = grid_n as usize;
    let mut values = vec![S::zero(); n * n];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            values[i * n + j] = g.eval(x, y)?;
        }
    }

    // axis x: fix y, vary (t1, t2) over the x lattice
    for (j, &y) in ys.iter().enumerate() {
        for i1 in 0..n {
            for i2 in (i1 + 1)..n {
                let t1 = xs[i1];
                let t2 = xs[i2];
                let mid = g.eval((t1 + t2) / lit(2.0), y)?;
                let excess = mid - (values[i1 * n + j] + values[i2 * n + j]) / lit(2.0);
                if excess > tol {
                    return Ok(ConvexityReport {
                        passed: false,
                        witness: Some(Witness {
                            axis: Axis::X,
                            fixed_coord: y,
                            t1,
                            t2,
                            violation: excess,
                        }),
                        grid_n,
                    });
                }
            }
        }
    }
    // axis y: fix x, vary (t1, t2) over the y lattice
    for (i, &x) in xs.iter().enumerate() {
        for j1 in 0..n {
            for j2 in (j1 + 1)..n {
                let t1 = ys[j1];
                let t2 = ys[j2];
                let mid = g.eval(x, (t1 + t2) / lit(2.0))?;
                let excess = mid - (values[i * n + j1] + values[i * n + j2]) / lit(2.0);
                if excess > tol {
                    return Ok(ConvexityReport {
                        passed: false,
                        witness: Some(Witness {
                            axis: Axis::Y,
                            fixed_coord: x,
                            t1,
                            t2,
                            violation: excess,
                        }),
                        grid_n,
                    });
                }
            }
        }
    }
    Ok(ConvexityReport {
        passed: true,
        witness: None,
        grid_n,
    })
}

fn lattice<S: Scalar>(lo: S, hi: S, n: u32) -> Vec<S> {
    let step = (hi - lo) / lit(f64::from(n - 1));
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + lit::<S>(f64::from(i)) * step
            }
        })
        .collect()
}

/// The five expressions of the two-dimensional Hadamard chain, in order:
/// center value, half-sum of midline averages, averaged double integral,
/// quarter-sum of edge averages, corner mean. For a coordinate-convex
/// function they are weakly increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HadamardChain<S: Scalar> {
    pub v1: S,
    pub v2: S,
    pub v3: S,
    pub v4: S,
    pub v5: S,
    /// Accumulated quadrature error estimate behind v2..v4.
    pub quad_err_est: S,
}

impl<S: Scalar> HadamardChain<S> {
    pub fn values(&self) -> [S; 5] {
        [self.v1, self.v2, self.v3, self.v4, self.v5]
    }

    /// Weak monotonicity `v1 <= ... <= v5` up to `slack`.
    pub fn is_monotone(&self, slack: S) -> bool {
        let v = self.values();
        v.windows(2).all(|w| w[1] >= w[0] - slack)
    }
}

/// Computes all five chain expressions via the oracle.
pub fn hadamard_chain<S: Scalar>(
    f: &FunctionModel<S>,
    r: &Rectangle<S>,
    cfg: &QuadConfig<S>,
) -> Result<HadamardChain<S>, QuadError<S>> {
    let (mx, my) = (r.mid_x(), r.mid_y());
    let v1 = f.eval_f(mx, my)?;

    let avg_x = |y: S| -> Result<(S, S), QuadError<S>> {
        let (v, e) = integrate_1d(|x| f.eval_f(x, y).map_err(Into::into), r.a(), r.b(), cfg)?;
        Ok((v / r.width(), e / r.width()))
    };
    let avg_y = |x: S| -> Result<(S, S), QuadError<S>> {
        let (v, e) = integrate_1d(|y| f.eval_f(x, y).map_err(Into::into), r.c(), r.d(), cfg)?;
        Ok((v / r.height(), e / r.height()))
    };

    let (mid_x_avg, e1) = avg_x(my)?;
    let (mid_y_avg, e2) = avg_y(mx)?;
    let v2 = (mid_x_avg + mid_y_avg) / lit(2.0);

    let (raw, e3) = integrate_2d(f, r, cfg)?;
    let v3 = raw / r.area();

    let (bottom, e4) = avg_x(r.c())?;
    let (top, e5) = avg_x(r.d())?;
    let (left, e6) = avg_y(r.a())?;
    let (right, e7) = avg_y(r.b())?;
    let v4 = (bottom + top + left + right) / lit(4.0);

    let mut v5 = S::zero();
    for (x, y) in r.corners() {
        v5 += f.eval_f(x, y)?;
    }
    v5 = v5 / lit(4.0);

    Ok(HadamardChain {
        v1,
        v2,
        v3,
        v4,
        v5,
        quad_err_est: e1 + e2 + e3 / r.area() + e4 + e5 + e6 + e7,
    })
}
