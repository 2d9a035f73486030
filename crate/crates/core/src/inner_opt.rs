//! Smooth inner solvers for resolvent and augmented-Lagrangian subproblems.
//!
//! Two first-order methods cover everything the outer loops need:
//!
//! * **Unconstrained:** limited-memory BFGS (memory 10) with a backtracking
//!   Armijo line search (`c = 1e−4`, halving). On a curvature failure the pair
//!   is skipped and the direction falls back to steepest descent, which keeps
//!   the method safe on the merely `C¹` objectives produced by power kernels
//!   with `p < 2`.
//! * **Box / simplex constrained:** projected gradient with a Barzilai–Borwein
//!   step and a nonmonotone (window 5) Armijo search on the projected arc.
//!
//! Termination is on the ℓ∞ stationarity measure: the gradient norm when
//! unconstrained, and the natural residual `‖x − P_C(x − ∇f(x))‖∞` otherwise.
//! Hitting the iteration cap is *not* an error: the report carries the best
//! iterate with `converged = false` and callers decide how to proceed.
//!
//! The module also hosts [`sup_separable_concave`], the per-coordinate maximiser
//! of `⟨c, η⟩ − φ(y − η)` over a box or simplex that evaluates nonlinearly
//! preconditioned augmented Lagrangians.

use crate::prox::ProxKernel;
use crate::{Error, Result};
use nalgebra::DVector;

/// Feasible set for [`minimize`].
#[derive(Debug, Clone)]
pub enum Constraint {
    Unconstrained,
    /// Coordinate bounds `lo ≤ x ≤ hi`.
    Box { lo: DVector<f64>, hi: DVector<f64> },
    /// The probability simplex `{x ≥ 0, Σ xᵢ = 1}`.
    Simplex,
}

/// A smooth objective with its feasible set.
///
/// The closure returns the value and gradient at a point; it is the caller's
/// responsibility that the objective is continuously differentiable on the
/// feasible set.
pub struct SmoothProblem<'a> {
    pub dim: usize,
    #[allow(clippy::type_complexity)]
    pub objective: Box<dyn Fn(&DVector<f64>) -> (f64, DVector<f64>) + 'a>,
    pub constraint: Constraint,
}

/// Outcome of an inner solve.
#[derive(Debug, Clone)]
pub struct InnerSolveReport {
    pub x: DVector<f64>,
    pub value: f64,
    /// ℓ∞ gradient norm (unconstrained) or projected-gradient residual.
    pub stationarity: f64,
    pub iters: usize,
    pub f_evals: usize,
    pub converged: bool,
}

const ARMIJO_C: f64 = 1e-4;
const LBFGS_MEMORY: usize = 10;
const NONMONOTONE_WINDOW: usize = 5;

/// Projects onto the box `[lo, hi]` coordinate-wise.
pub fn project_box(v: &DVector<f64>, lo: &DVector<f64>, hi: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(v.len(), |i, _| v[i].clamp(lo[i], hi[i]))
}

/// Projects onto the probability simplex by the sort-and-threshold rule:
/// with `u` the coordinates of `v` sorted in decreasing order, the threshold is
/// `θ = (Σ_{i≤ρ} uᵢ − 1)/ρ` for the largest `ρ` with `u_ρ > (Σ_{i≤ρ} uᵢ − 1)/ρ`,
/// and the projection is `max(v − θ, 0)`.
pub fn project_simplex(v: &DVector<f64>) -> DVector<f64> {
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let candidate = (cumsum - 1.0) / (i + 1) as f64;
        if ui > candidate {
            theta = candidate;
        }
    }
    v.map(|t| (t - theta).max(0.0))
}

fn project(v: &DVector<f64>, constraint: &Constraint) -> DVector<f64> {
    match constraint {
        Constraint::Unconstrained => v.clone(),
        Constraint::Box { lo, hi } => project_box(v, lo, hi),
        Constraint::Simplex => project_simplex(v),
    }
}

/// Minimises a smooth problem from `x0` to ℓ∞ stationarity `tol`.
///
/// Dispatches on the constraint: L-BFGS when unconstrained, projected
/// Barzilai–Borwein otherwise. Infeasible starting points are projected first.
pub fn minimize(
    problem: &SmoothProblem,
    x0: &DVector<f64>,
    tol: f64,
    max_iters: usize,
) -> Result<InnerSolveReport> {
    if x0.len() != problem.dim {
        return Err(Error::DimensionMismatch {
            expected: problem.dim,
            got: x0.len(),
        });
    }
    if !x0.iter().all(|t| t.is_finite()) {
        return Err(Error::NonFinite("inner solve starting point"));
    }
    match problem.constraint {
        Constraint::Unconstrained => lbfgs(problem, x0, tol, max_iters),
        _ => projected_bb(problem, x0, tol, max_iters),
    }
}

fn lbfgs(
    problem: &SmoothProblem,
    x0: &DVector<f64>,
    tol: f64,
    max_iters: usize,
) -> Result<InnerSolveReport> {
    let f = &problem.objective;
    let mut x = x0.clone();
    let (mut fx, mut g) = f(&x);
    let mut f_evals = 1usize;
    // (s, y, 1/sᵀy) pairs, most recent last
    let mut pairs: Vec<(DVector<f64>, DVector<f64>, f64)> = Vec::with_capacity(LBFGS_MEMORY);

    for iter in 0..max_iters {
        let stationarity = g.amax();
        if stationarity <= tol {
            return Ok(InnerSolveReport {
                x,
                value: fx,
                stationarity,
                iters: iter,
                f_evals,
                converged: true,
            });
        }

        // two-loop recursion
        let mut d = -&g;
        let mut alphas = vec![0.0; pairs.len()];
        for (i, (s, y, inv_sy)) in pairs.iter().enumerate().rev() {
            let a = inv_sy * s.dot(&d);
            d.axpy(-a, y, 1.0);
            alphas[i] = a;
        }
        if let Some((s, y, _)) = pairs.last() {
            let gamma = s.dot(y) / y.dot(y);
            d *= gamma;
        }
        for (i, (s, y, inv_sy)) in pairs.iter().enumerate() {
            let b = inv_sy * y.dot(&d);
            d.axpy(alphas[i] - b, s, 1.0);
        }
        let mut slope = g.dot(&d);
        if !slope.is_finite() || slope >= 0.0 {
            // not a descent direction: restart from steepest descent
            pairs.clear();
            d = -&g;
            slope = -g.dot(&g);
        }

        // backtracking Armijo
        let mut t = 1.0;
        let mut accepted = false;
        let mut x_new = DVector::zeros(problem.dim);
        let mut fx_new = fx;
        let mut g_new = g.clone();
        for _ in 0..60 {
            x_new = &x + &d * t;
            let (fv, gv) = f(&x_new);
            f_evals += 1;
            if fv.is_finite() && fv <= fx + ARMIJO_C * t * slope {
                fx_new = fv;
                g_new = gv;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // step collapsed: the current point is as good as the search gets
            return Ok(InnerSolveReport {
                stationarity: g.amax(),
                x,
                value: fx,
                iters: iter,
                f_evals,
                converged: g.amax() <= tol,
            });
        }

        let s = &x_new - &x;
        let yv = &g_new - &g;
        let sy = s.dot(&yv);
        // curvature check: skip the pair when sᵀy is not safely positive
        if sy > 1e-12 * s.norm() * yv.norm() {
            if pairs.len() == LBFGS_MEMORY {
                pairs.remove(0);
            }
            pairs.push((s, yv, 1.0 / sy));
        } else {
            pairs.clear();
        }
        x = x_new;
        fx = fx_new;
        g = g_new;
    }

    let stationarity = g.amax();
    Ok(InnerSolveReport {
        converged: stationarity <= tol,
        x,
        value: fx,
        stationarity,
        iters: max_iters,
        f_evals,
    })
}

fn projected_bb(
    problem: &SmoothProblem,
    x0: &DVector<f64>,
    tol: f64,
    max_iters: usize,
) -> Result<InnerSolveReport> {
    let f = &problem.objective;
    let mut x = project(x0, &problem.constraint);
    let (mut fx, mut g) = f(&x);
    let mut f_evals = 1usize;
    let mut alpha = 1.0;
    let mut recent: Vec<f64> = vec![fx];
    let mut prev: Option<(DVector<f64>, DVector<f64>)> = None;

    for iter in 0..max_iters {
        let stationarity = (&x - project(&(&x - &g), &problem.constraint)).amax();
        if stationarity <= tol {
            return Ok(InnerSolveReport {
                x,
                value: fx,
                stationarity,
                iters: iter,
                f_evals,
                converged: true,
            });
        }

        if let Some((xp, gp)) = &prev {
            let s = &x - xp;
            let yv = &g - gp;
            let sy = s.dot(&yv);
            alpha = if sy > 0.0 {
                (s.dot(&s) / sy).clamp(1e-12, 1e12)
            } else {
                1.0
            };
        }

        // projected arc direction at the BB step, then nonmonotone backtracking
        let d = project(&(&x - &g * alpha), &problem.constraint) - &x;
        let slope = g.dot(&d);
        let f_ref = recent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut t = 1.0;
        let mut accepted = false;
        let mut x_new = x.clone();
        let mut fx_new = fx;
        let mut g_new = g.clone();
        if slope < 0.0 {
            for _ in 0..60 {
                x_new = &x + &d * t;
                let (fv, gv) = f(&x_new);
                f_evals += 1;
                if fv.is_finite() && fv <= f_ref + ARMIJO_C * t * slope {
                    fx_new = fv;
                    g_new = gv;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
        }
        if !accepted {
            let stationarity = (&x - project(&(&x - &g), &problem.constraint)).amax();
            return Ok(InnerSolveReport {
                converged: stationarity <= tol,
                x,
                value: fx,
                stationarity,
                iters: iter,
                f_evals,
            });
        }

        prev = Some((x.clone(), g.clone()));
        x = x_new;
        fx = fx_new;
        g = g_new;
        recent.push(fx);
        if recent.len() > NONMONOTONE_WINDOW {
            recent.remove(0);
        }
    }

    let stationarity = (&x - project(&(&x - &g), &problem.constraint)).amax();
    Ok(InnerSolveReport {
        converged: stationarity <= tol,
        x,
        value: fx,
        stationarity,
        iters: max_iters,
        f_evals,
    })
}

/// Maximises the separable concave function `η ↦ ⟨c, η⟩ − φ(y − η)` over the
/// given constraint set, returning the maximiser and the optimal value.
///
/// The kernel must be separable. Coordinate-wise stationarity reads
/// `∇φ(y − η)ᵢ = −cᵢ`, i.e. `ηᵢ = yᵢ − ∇φ*(−cᵢ)`:
///
/// * **Unconstrained:** the stationary point itself.
/// * **Box:** the stationary point clamped to `[lo, hi]` (KKT-consistent since
///   each coordinate function is strictly concave).
/// * **Simplex:** with multiplier `μ` for `Σ ηᵢ = 1`, the coordinates are
///   `ηᵢ(μ) = max(0, yᵢ − ∇φ*(μ − cᵢ))`, nonincreasing in `μ`; `μ` is found by
///   bisection until `|Σ ηᵢ(μ) − 1| ≤ tol`.
pub fn sup_separable_concave(
    c: &DVector<f64>,
    y: &DVector<f64>,
    kernel: &ProxKernel,
    constraint: &Constraint,
    tol: f64,
) -> Result<(DVector<f64>, f64)> {
    if !kernel.is_separable() {
        return Err(Error::InvalidParameter(format!(
            "sup_separable_concave requires a separable kernel, got {kernel}"
        )));
    }
    let n = kernel.dim();
    if c.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: c.len() });
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }

    let eta = match constraint {
        Constraint::Unconstrained => {
            DVector::from_fn(n, |i, _| y[i] - kernel.grad_conj_coord(-c[i]))
        }
        Constraint::Box { lo, hi } => DVector::from_fn(n, |i, _| {
            (y[i] - kernel.grad_conj_coord(-c[i])).clamp(lo[i], hi[i])
        }),
        Constraint::Simplex => {
            let eta_of = |mu: f64| -> DVector<f64> {
                DVector::from_fn(n, |i, _| (y[i] - kernel.grad_conj_coord(mu - c[i])).max(0.0))
            };
            // At μ ≥ cᵢ + ∇φ(yᵢ) coordinate i is clipped to zero; below
            // cᵢ + ∇φ(yᵢ − 1) it alone already exceeds one.
            let mut hi = c
                .iter()
                .zip(y.iter())
                .map(|(&ci, &yi)| ci + kernel.grad_coord(yi))
                .fold(f64::NEG_INFINITY, f64::max);
            let mut lo = c
                .iter()
                .zip(y.iter())
                .map(|(&ci, &yi)| ci + kernel.grad_coord(yi - 1.0))
                .fold(f64::INFINITY, f64::min);
            let mut eta = eta_of(0.5 * (lo + hi));
            for _ in 0..200 {
                let mu = 0.5 * (lo + hi);
                eta = eta_of(mu);
                let gap = eta.sum() - 1.0;
                if gap.abs() <= tol || (hi - lo) <= 1e-16 * (1.0 + mu.abs()) {
                    break;
                }
                if gap > 0.0 {
                    lo = mu;
                } else {
                    hi = mu;
                }
            }
            eta
        }
    };
    let value = c.dot(&eta) - kernel.eval(&(y - &eta))?;
    Ok((eta, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{seeded_rng, uniform_vector};
    use approx::assert_abs_diff_eq;

    #[test]
    fn lbfgs_solves_shifted_quadratic() {
        let a = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        let problem = SmoothProblem {
            dim: 3,
            objective: Box::new(|x: &DVector<f64>| {
                let d = x - DVector::from_vec(vec![1.0, -2.0, 3.0]);
                (0.5 * d.norm_squared(), d)
            }),
            constraint: Constraint::Unconstrained,
        };
        let report = minimize(&problem, &DVector::zeros(3), 1e-10, 100).unwrap();
        assert!(report.converged);
        assert!((report.x - a).amax() <= 1e-9);
    }

    /// Quartic-plus-linear has the separable closed form xᵢ = −sign(gᵢ)|gᵢ|^{1/3}.
    #[test]
    fn lbfgs_solves_quartic_plus_linear() {
        let g: DVector<f64> = DVector::from_vec(vec![2.0, -0.5, 1.0]);
        let problem = SmoothProblem {
            dim: 3,
            objective: Box::new(move |x: &DVector<f64>| {
                let v = x.iter().map(|t| t.powi(4) / 4.0).sum::<f64>()
                    + x.dot(&DVector::from_vec(vec![2.0, -0.5, 1.0]));
                let grad = x.map(|t| t.powi(3)) + DVector::from_vec(vec![2.0, -0.5, 1.0]);
                (v, grad)
            }),
            constraint: Constraint::Unconstrained,
        };
        let report = minimize(&problem, &DVector::from_element(3, 0.1), 1e-9, 500).unwrap();
        assert!(report.converged, "stationarity {}", report.stationarity);
        for i in 0..3 {
            let expected = -g[i].signum() * g[i].abs().powf(1.0 / 3.0);
            assert_abs_diff_eq!(report.x[i], expected, epsilon = 1e-8);
        }
    }

    #[test]
    fn lbfgs_solves_rosenbrock() {
        let problem = SmoothProblem {
            dim: 2,
            objective: Box::new(|x: &DVector<f64>| {
                let (a, b) = (x[0], x[1]);
                let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
                let g = DVector::from_vec(vec![
                    -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                    200.0 * (b - a * a),
                ]);
                (v, g)
            }),
            constraint: Constraint::Unconstrained,
        };
        let report = minimize(&problem, &DVector::from_vec(vec![-1.2, 1.0]), 1e-8, 500).unwrap();
        assert!(report.converged);
        assert!((report.x - DVector::from_element(2, 1.0)).amax() <= 1e-6);
    }

    #[test]
    fn projected_bb_box_constrained_quadratic_clamps() {
        let a = DVector::from_vec(vec![2.0, -3.0, 0.25]);
        let lo = DVector::from_element(3, -1.0);
        let hi = DVector::from_element(3, 1.0);
        let problem = SmoothProblem {
            dim: 3,
            objective: Box::new(move |x: &DVector<f64>| {
                let d = x - DVector::from_vec(vec![2.0, -3.0, 0.25]);
                (0.5 * d.norm_squared(), d)
            }),
            constraint: Constraint::Box { lo: lo.clone(), hi: hi.clone() },
        };
        let report = minimize(&problem, &DVector::zeros(3), 1e-10, 200).unwrap();
        assert!(report.converged);
        let expected = project_box(&a, &lo, &hi);
        assert!((report.x - expected).amax() <= 1e-9);
    }

    #[test]
    fn projected_bb_simplex_quadratic_matches_projection() {
        let mut rng = seeded_rng(3);
        for _ in 0..20 {
            let a = uniform_vector(&mut rng, 4, -2.0, 2.0);
            let a2 = a.clone();
            let problem = SmoothProblem {
                dim: 4,
                objective: Box::new(move |x: &DVector<f64>| {
                    let d = x - &a2;
                    (0.5 * d.norm_squared(), d)
                }),
                constraint: Constraint::Simplex,
            };
            let report = minimize(&problem, &DVector::from_element(4, 0.25), 1e-10, 500).unwrap();
            assert!(report.converged);
            assert!((report.x - project_simplex(&a)).amax() <= 1e-8);
        }
    }

    #[test]
    fn projected_bb_linear_on_simplex_finds_vertex() {
        let c = DVector::from_vec(vec![0.3, -1.0, 0.7]);
        let problem = SmoothProblem {
            dim: 3,
            objective: Box::new(move |x: &DVector<f64>| {
                (x.dot(&DVector::from_vec(vec![0.3, -1.0, 0.7])), DVector::from_vec(vec![0.3, -1.0, 0.7]))
            }),
            constraint: Constraint::Simplex,
        };
        let report = minimize(&problem, &DVector::from_element(3, 1.0 / 3.0), 1e-12, 500).unwrap();
        assert!(report.converged);
        let _ = c;
        assert!((report.x - DVector::from_vec(vec![0.0, 1.0, 0.0])).amax() <= 1e-10);
    }

    #[test]
    fn simplex_projection_examples_and_properties() {
        // already on the simplex: fixed point
        let v = DVector::from_vec(vec![0.5, 0.5]);
        assert_eq!(project_simplex(&v), v);
        // single dominant coordinate
        let v = DVector::from_vec(vec![2.0, 0.0]);
        assert_eq!(project_simplex(&v), DVector::from_vec(vec![1.0, 0.0]));
        // uniform shift case: (0.3, 0.3, 0.3) → each + 1/30
        let v = DVector::from_element(3, 0.3);
        let p = project_simplex(&v);
        assert_abs_diff_eq!((p - DVector::from_element(3, 0.3 + 1.0 / 30.0)).amax(), 0.0, epsilon = 1e-15);

        let mut rng = seeded_rng(17);
        for _ in 0..200 {
            let v = uniform_vector(&mut rng, 5, -3.0, 3.0);
            let p = project_simplex(&v);
            assert!(p.iter().all(|&t| t >= 0.0));
            assert_abs_diff_eq!(p.sum(), 1.0, epsilon = 1e-12);
            // idempotent
            assert!((project_simplex(&p) - &p).amax() <= 1e-12);
            // variational characterisation against random simplex points
            for _ in 0..5 {
                let w = project_simplex(&uniform_vector(&mut rng, 5, -1.0, 1.0));
                assert!((&v - &p).dot(&(w - &p)) <= 1e-10);
            }
        }
    }

    #[test]
    fn sup_separable_box_quadratic_closed_form() {
        // p = 2 kernel: η* = clamp(y + c, lo, hi)
        let kernel = ProxKernel::euclidean(3);
        let y = DVector::from_vec(vec![0.2, -0.4, 0.9]);
        let c = DVector::from_vec(vec![1.5, 0.1, -3.0]);
        let lo = DVector::from_element(3, -1.0);
        let hi = DVector::from_element(3, 1.0);
        let (eta, value) = sup_separable_concave(
            &c,
            &y,
            &kernel,
            &Constraint::Box { lo: lo.clone(), hi: hi.clone() },
            1e-12,
        )
        .unwrap();
        let expected = project_box(&(&y + &c), &lo, &hi);
        assert!((eta.clone() - &expected).amax() <= 1e-14);
        assert_abs_diff_eq!(
            value,
            c.dot(&eta) - kernel.eval(&(&y - &eta)).unwrap(),
            epsilon = 1e-14
        );
    }

    /// 1-D oracle: dense grid scan with local refinement.
    fn grid_max_1d(obj: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
        let mut best = (lo, obj(lo));
        let mut a = lo;
        let mut b = hi;
        for _ in 0..8 {
            let n = 400;
            for i in 0..=n {
                let t = a + (b - a) * i as f64 / n as f64;
                let v = obj(t);
                if v > best.1 {
                    best = (t, v);
                }
            }
            let w = (b - a) / n as f64;
            a = (best.0 - 2.0 * w).max(lo);
            b = (best.0 + 2.0 * w).min(hi);
        }
        best
    }

    #[test]
    fn sup_separable_box_matches_grid_oracle_nonquadratic() {
        for spec in ["sep_power:p=3", "cosh", "exp:rho=0.01"] {
            let kernel = ProxKernel::parse(spec, 1).unwrap();
            for (c, y) in [(1.5, 0.2), (-0.7, -0.3), (0.05, 0.9)] {
                let (eta, value) = sup_separable_concave(
                    &DVector::from_vec(vec![c]),
                    &DVector::from_vec(vec![y]),
                    &kernel,
                    &Constraint::Box {
                        lo: DVector::from_element(1, -1.0),
                        hi: DVector::from_element(1, 1.0),
                    },
                    1e-12,
                )
                .unwrap();
                let k2 = kernel.clone();
                let (eta_oracle, value_oracle) = grid_max_1d(
                    move |t| c * t - k2.eval(&DVector::from_vec(vec![y - t])).unwrap(),
                    -1.0,
                    1.0,
                );
                assert!(
                    (eta[0] - eta_oracle).abs() <= 1e-5,
                    "{spec}: η {} vs oracle {eta_oracle}",
                    eta[0]
                );
                assert!(value >= value_oracle - 1e-9, "{spec}: value {value} vs {value_oracle}");
            }
        }
    }

    #[test]
    fn sup_separable_simplex_satisfies_kkt() {
        let mut rng = seeded_rng(23);
        for spec in ["sep_power:p=2", "sep_power:p=3", "cosh", "exp:rho=0.01"] {
            let kernel = ProxKernel::parse(spec, 4).unwrap();
            for _ in 0..50 {
                let c = uniform_vector(&mut rng, 4, -2.0, 2.0);
                let y = uniform_vector(&mut rng, 4, -1.0, 1.0);
                let (eta, _) =
                    sup_separable_concave(&c, &y, &kernel, &Constraint::Simplex, 1e-12).unwrap();
                assert!(eta.iter().all(|&t| t >= 0.0), "{spec}: negative coordinate");
                assert_abs_diff_eq!(eta.sum(), 1.0, epsilon = 1e-9);
                // common multiplier on the active set, dominating the inactive one
                let mu: Vec<f64> = (0..4)
                    .filter(|&i| eta[i] > 1e-9)
                    .map(|i| c[i] + kernel.grad_coord(y[i] - eta[i]))
                    .collect();
                assert!(!mu.is_empty());
                let mu0 = mu[0];
                for &m in &mu {
                    assert!((m - mu0).abs() <= 1e-7, "{spec}: multipliers {mu:?}");
                }
                for i in 0..4 {
                    if eta[i] <= 1e-9 {
                        assert!(
                            c[i] + kernel.grad_coord(y[i]) <= mu0 + 1e-7,
                            "{spec}: inactive coordinate beats multiplier"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sup_separable_rejects_isotropic_kernel() {
        let kernel = ProxKernel::isotropic_power(3.0, 2).unwrap();
        let z = DVector::zeros(2);
        assert!(sup_separable_concave(&z, &z, &kernel, &Constraint::Simplex, 1e-10).is_err());
    }

    #[test]
    fn max_iters_returns_report_not_error() {
        // Rosenbrock cannot be solved in a single iteration
        let problem = SmoothProblem {
            dim: 2,
            objective: Box::new(|x: &DVector<f64>| {
                let (a, b) = (x[0], x[1]);
                let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
                let g = DVector::from_vec(vec![
                    -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                    200.0 * (b - a * a),
                ]);
                (v, g)
            }),
            constraint: Constraint::Unconstrained,
        };
        let report = minimize(&problem, &DVector::from_vec(vec![-1.2, 1.0]), 1e-10, 1).unwrap();
        assert!(!report.converged);
        assert!(report.stationarity.is_finite());
        assert_eq!(report.iters, 1);
    }
}
