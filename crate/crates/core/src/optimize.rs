//! Numerical optimizers behind the rate and exponent evaluations: scalar
//! convex minimization on a half-line, small-dimension convex minimization
//! over a constrained set, and derivative-free outer maximization.
//!
//! Infeasibility is signalled through the objective: `f64::INFINITY` for
//! minimization, `f64::NEG_INFINITY` for maximization. Objectives here blow
//! up on their own near the feasible boundary (log terms), so feasibility
//! rejection in the line search is all the barrier that is needed.

use serde::Serialize;

/// Termination state of an optimizer run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OptStatus {
    Converged,
    /// The minimum sits on the boundary of the search domain.
    Boundary,
    Infeasible,
    MaxIterations,
}

/// Result of a scalar or vector optimization.
#[derive(Debug, Clone, Serialize)]
pub struct OptResult {
    pub arg: Vec<f64>,
    pub value: f64,
    pub status: OptStatus,
    pub iterations: usize,
    pub tolerance_achieved: f64,
}

impl OptResult {
    fn infeasible() -> Self {
        OptResult {
            arg: Vec::new(),
            value: f64::INFINITY,
            status: OptStatus::Infeasible,
            iterations: 0,
            tolerance_achieved: f64::INFINITY,
        }
    }

    pub fn converged(&self) -> bool {
        matches!(self.status, OptStatus::Converged | OptStatus::Boundary)
    }
}

const GOLDEN_STEP: f64 = 0.381_966_011_250_105; // 2 - golden ratio

/// Minimizes a convex function on `[lower, inf)`.
///
/// Expands a bracket exponentially from `lower`, then runs golden-section
/// search until the argmin is located to within `tol`. A function that
/// never descends away from `lower` yields the boundary minimum.
pub fn minimize_scalar_convex(
    f: impl Fn(f64) -> f64,
    lower: f64,
    initial_bracket: (f64, f64),
    tol: f64,
) -> OptResult {
    let f_low = f(lower);
    if !f_low.is_finite() {
        return OptResult::infeasible();
    }
    let mut evals = 1usize;

    // Find a step at which the function has descended below f(lower).
    let mut step = (initial_bracket.1 - initial_bracket.0).abs().max(tol);
    let mut descended = false;
    for _ in 0..80 {
        let v = f(lower + step);
        evals += 1;
        if v < f_low {
            descended = true;
            break;
        }
        step *= 0.25;
        if step < tol * 1e-3 {
            break;
        }
    }
    if !descended {
        return OptResult {
            arg: vec![lower],
            value: f_low,
            status: OptStatus::Boundary,
            iterations: evals,
            tolerance_achieved: step,
        };
    }

    // Exponential expansion until the function turns upward.
    let mut a = lower;
    let mut m = lower + step;
    let mut fm = f(m);
    let mut b = lower + 2.0 * step;
    let mut fb = f(b);
    evals += 2;
    while fb < fm {
        a = m;
        m = b;
        fm = fb;
        b = lower + 2.0 * (b - lower);
        fb = f(b);
        evals += 1;
        if !fb.is_finite() && fb.is_sign_positive() {
            break;
        }
        if evals > 200 {
            return OptResult {
                arg: vec![m],
                value: fm,
                status: OptStatus::MaxIterations,
                iterations: evals,
                tolerance_achieved: b - a,
            };
        }
    }

    // Golden-section on [a, b].
    let mut x1 = a + GOLDEN_STEP * (b - a);
    let mut x2 = b - GOLDEN_STEP * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    evals += 2;
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + GOLDEN_STEP * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - GOLDEN_STEP * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }
    let (arg, value) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    let (arg, value) = if f_low < value { (lower, f_low) } else { (arg, value) };
    OptResult {
        arg: vec![arg],
        value,
        status: if arg == lower { OptStatus::Boundary } else { OptStatus::Converged },
        iterations: evals,
        tolerance_achieved: b - a,
    }
}

/// Minimizes a convex function over a feasible set given by a membership
/// predicate, starting from an interior point.
///
/// Quasi-Newton (BFGS) iteration with central finite differences (relative
/// step 1e-6) and a backtracking line search that rejects infeasible or
/// non-finite trial points. Converges when successive values change by
/// less than `tol` twice in a row.
pub fn minimize_vector_convex(
    f: impl Fn(&[f64]) -> f64,
    feasible: impl Fn(&[f64]) -> bool,
    start: &[f64],
    tol: f64,
) -> OptResult {
    let obj = |x: &[f64]| -> f64 {
        if feasible(x) {
            f(x)
        } else {
            f64::INFINITY
        }
    };
    if !feasible(start) {
        return OptResult::infeasible();
    }
    let mut x = start.to_vec();
    let mut fx = obj(&x);
    if !fx.is_finite() {
        return OptResult::infeasible();
    }

    let d = x.len();
    let mut h_inv = identity(d);
    let mut grad = fd_gradient(&obj, &x, fx);
    let mut small_changes = 0usize;
    let mut last_change = f64::INFINITY;
    let max_iter = 200 + 100 * d;
    let mut iterations = 0usize;
    let mut sweep_cycles = 0usize;

    // Quasi-Newton steps, with coordinate descent both as a fallback and
    // as the convergence confirmation: near a boundary of the feasible set
    // the joint search directions get clipped to nothing, while moves
    // along single coordinates still reach face and corner minima.
    while iterations < max_iter {
        iterations += 1;
        let mut dir: Vec<f64> = (0..d)
            .map(|i| -(0..d).map(|j| h_inv[i][j] * grad[j]).sum::<f64>())
            .collect();
        let descent: f64 = dir.iter().zip(&grad).map(|(a, b)| a * b).sum();
        if !descent.is_finite() || descent >= 0.0 {
            h_inv = identity(d);
            dir = grad.iter().map(|g| -g).collect();
        }

        let (t, x_new, f_new) = backtrack(&obj, &x, fx, &dir, &grad);
        let stalled = t == 0.0;
        if !stalled {
            let g_new = fd_gradient(&obj, &x_new, f_new);
            let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
            let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if sy > 1e-12 * s_norm * y_norm {
                bfgs_update(&mut h_inv, &s, &y, sy);
            }
            last_change = (fx - f_new).abs();
            x = x_new;
            fx = f_new;
            grad = g_new;
            if last_change < tol {
                small_changes += 1;
            } else {
                small_changes = 0;
            }
        }

        if stalled || small_changes >= 2 {
            // Confirm with coordinate descent; resume quasi-Newton only on
            // real progress, and only a bounded number of times so the
            // tail of the refinement cannot degenerate into a crawl.
            let before = fx;
            for _ in 0..60 {
                let (x2, f2, improved) = coordinate_sweep(&obj, &x, fx, &grad);
                if !improved {
                    break;
                }
                let gain = fx - f2;
                x = x2;
                fx = f2;
                grad = fd_gradient(&obj, &x, fx);
                if gain <= tol {
                    break;
                }
            }
            sweep_cycles += 1;
            if before - fx > tol && sweep_cycles < 4 {
                h_inv = identity(d);
                small_changes = 0;
                last_change = before - fx;
                continue;
            }
            return OptResult {
                arg: x,
                value: fx,
                status: OptStatus::Converged,
                iterations,
                tolerance_achieved: last_change.min(before - fx),
            };
        }
    }
    OptResult {
        arg: x,
        value: fx,
        status: OptStatus::MaxIterations,
        iterations: max_iter,
        tolerance_achieved: last_change,
    }
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Central finite differences with relative step 1e-6; falls back to a
/// one-sided difference when a probe leaves the feasible set.
fn fd_gradient(obj: &impl Fn(&[f64]) -> f64, x: &[f64], fx: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let step = 1e-6 * (1.0 + x[i].abs());
        probe[i] = x[i] + step;
        let fp = obj(&probe);
        probe[i] = x[i] - step;
        let fm = obj(&probe);
        probe[i] = x[i];
        g[i] = if fp.is_finite() && fm.is_finite() {
            (fp - fm) / (2.0 * step)
        } else if fp.is_finite() {
            (fp - fx) / step
        } else if fm.is_finite() {
            (fx - fm) / step
        } else {
            0.0
        };
    }
    g
}

/// One descent pass over the coordinates, each probed downhill along its
/// gradient sign: backtrack from a unit-scaled step until the objective
/// improves, then keep walking while the same move helps.
fn coordinate_sweep(
    obj: &impl Fn(&[f64]) -> f64,
    x: &[f64],
    fx: f64,
    grad: &[f64],
) -> (Vec<f64>, f64, bool) {
    let mut x = x.to_vec();
    let mut fx = fx;
    let mut improved = false;
    for i in 0..x.len() {
        if grad[i].abs() < 1e-9 {
            continue;
        }
        let dir = -grad[i].signum();
        let mut t = 0.5 * (1.0 + x[i].abs());
        let mut taken = false;
        let mut prev_slope: Option<f64> = None;
        for _ in 0..60 {
            let mut cand = x.clone();
            cand[i] = x[i] + dir * t;
            let fc = obj(&cand);
            if fc.is_finite() && fc < fx {
                x = cand;
                fx = fc;
                improved = true;
                taken = true;
                break;
            }
            if fc.is_finite() {
                // Secant slopes of a convex section converge from above as
                // t halves; a positive Richardson extrapolation certifies
                // the direction is uphill at the point itself.
                let slope = (fc - fx) / t;
                if let Some(prev) = prev_slope {
                    if 2.0 * slope - prev > 0.0 {
                        break;
                    }
                }
                prev_slope = Some(slope);
            }
            t *= 0.5;
        }
        // Geometric walk while the move keeps helping, so remote
        // one-dimensional optima cost logarithmically many probes.
        let mut walks = 0;
        while taken && walks < 60 {
            walks += 1;
            t *= 2.0;
            let mut cand = x.clone();
            cand[i] = x[i] + dir * t;
            let fc = obj(&cand);
            if fc.is_finite() && fc < fx {
                x = cand;
                fx = fc;
            } else {
                break;
            }
        }
    }
    (x, fx, improved)
}

/// Armijo backtracking; returns (step, point, value), step 0 on failure.
fn backtrack(
    obj: &impl Fn(&[f64]) -> f64,
    x: &[f64],
    fx: f64,
    dir: &[f64],
    grad: &[f64],
) -> (f64, Vec<f64>, f64) {
    let slope: f64 = dir.iter().zip(grad).map(|(a, b)| a * b).sum();
    let mut t = 1.0;
    for _ in 0..60 {
        let cand: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + t * di).collect();
        let fc = obj(&cand);
        if fc.is_finite() && fc <= fx + 1e-4 * t * slope.min(0.0) && fc < fx {
            return (t, cand, fc);
        }
        t *= 0.5;
    }
    (0.0, x.to_vec(), fx)
}

fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let d = s.len();
    let hy: Vec<f64> = (0..d)
        .map(|i| (0..d).map(|j| h[i][j] * y[j]).sum::<f64>())
        .collect();
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..d {
        for j in 0..d {
            h[i][j] += (sy + yhy) * s[i] * s[j] / (sy * sy)
                - (hy[i] * s[j] + s[i] * hy[j]) / sy;
        }
    }
}

/// Maximizes over an axis-aligned box: exhaustive coarse grid followed by
/// Nelder-Mead refinement from the best grid point. Infeasible points score
/// `-inf`; grid ties go to the lowest multi-index.
pub fn maximize_outer(
    f: impl Fn(&[f64]) -> f64 + Sync + Send,
    bounds: &[(f64, f64)],
    grid_per_axis: usize,
) -> OptResult {
    assert!(!bounds.is_empty() && grid_per_axis >= 2);
    let d = bounds.len();
    let total = grid_per_axis.pow(d as u32);
    // Lexicographic decomposition: axis 0 most significant, so ties go to
    // the lowest multi-index regardless of evaluation order.
    let grid_point = |flat: usize| -> Vec<f64> {
        let mut rem = flat;
        (0..d)
            .map(|i| {
                let stride = grid_per_axis.pow((d - 1 - i) as u32);
                let k = rem / stride;
                rem %= stride;
                let (lo, hi) = bounds[i];
                lo + (hi - lo) * k as f64 / (grid_per_axis - 1) as f64
            })
            .collect()
    };
    let values = crate::run_indexed(total, |flat| f(&grid_point(flat)));
    let evals = total;
    let mut best_val = f64::NEG_INFINITY;
    let mut best_point: Option<Vec<f64>> = None;
    for (flat, &v) in values.iter().enumerate() {
        if v > best_val {
            best_val = v;
            best_point = Some(grid_point(flat));
        }
    }

    let Some(start) = best_point else {
        return OptResult {
            arg: Vec::new(),
            value: f64::NEG_INFINITY,
            status: OptStatus::Infeasible,
            iterations: evals,
            tolerance_achieved: f64::INFINITY,
        };
    };
    if !best_val.is_finite() {
        return OptResult {
            arg: Vec::new(),
            value: f64::NEG_INFINITY,
            status: OptStatus::Infeasible,
            iterations: evals,
            tolerance_achieved: f64::INFINITY,
        };
    }

    let steps: Vec<f64> = bounds
        .iter()
        .map(|(lo, hi)| (hi - lo) / (grid_per_axis - 1) as f64 / 2.0)
        .collect();
    let (arg, value, nm_evals, spread) = nelder_mead_max(&f, &start, &steps, bounds);
    OptResult {
        arg,
        value,
        status: OptStatus::Converged,
        iterations: evals + nm_evals,
        tolerance_achieved: spread,
    }
}

/// Standard Nelder-Mead (maximization via negation), confined to the box by
/// scoring outside points as -inf.
fn nelder_mead_max(
    f: &impl Fn(&[f64]) -> f64,
    start: &[f64],
    steps: &[f64],
    bounds: &[(f64, f64)],
) -> (Vec<f64>, f64, usize, f64) {
    let d = start.len();
    let g = |x: &[f64]| -> f64 {
        for (xi, (lo, hi)) in x.iter().zip(bounds) {
            if xi < lo || xi > hi {
                return f64::INFINITY;
            }
        }
        -f(x)
    };
    let mut evals = 0usize;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let v0 = g(start);
    evals += 1;
    simplex.push((start.to_vec(), v0));
    for i in 0..d {
        let mut p = start.to_vec();
        let (lo, hi) = bounds[i];
        p[i] = (p[i] + steps[i]).clamp(lo, hi);
        if (p[i] - start[i]).abs() < 1e-12 {
            p[i] = (start[i] - steps[i]).clamp(lo, hi);
        }
        let v = g(&p);
        evals += 1;
        simplex.push((p, v));
    }

    let max_iter = 400 * d.max(1);
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (simplex[d].1 - simplex[0].1).abs();
        if spread < 1e-12 && simplex[d].1.is_finite() {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|i| simplex[..d].iter().map(|(p, _)| p[i]).sum::<f64>() / d as f64)
            .collect();
        let worst = simplex[d].clone();
        let reflect: Vec<f64> = (0..d)
            .map(|i| centroid[i] + (centroid[i] - worst.0[i]))
            .collect();
        let fr = g(&reflect);
        evals += 1;
        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..d)
                .map(|i| centroid[i] + 2.0 * (centroid[i] - worst.0[i]))
                .collect();
            let fe = g(&expand);
            evals += 1;
            simplex[d] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..d)
                .map(|i| centroid[i] + 0.5 * (worst.0[i] - centroid[i]))
                .collect();
            let fc = g(&contract);
            evals += 1;
            if fc < worst.1 {
                simplex[d] = (contract, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = (0..d)
                        .map(|i| best[i] + 0.5 * (entry.0[i] - best[i]))
                        .collect();
                    let fs = g(&shrunk);
                    evals += 1;
                    *entry = (shrunk, fs);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let spread = (simplex[d].1 - simplex[0].1).abs();
    let (arg, value) = simplex.swap_remove(0);
    (arg, -value, evals, spread)
}
