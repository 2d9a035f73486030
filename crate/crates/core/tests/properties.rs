//! Randomised property tests for the kernel calculus, the projection and
//! separable-sup helpers, and the resolvent solvers.
//!
//! Each property states an exact mathematical invariant (inverse gradients,
//! epi-scaling identities, feasibility/optimality of maximisers, residual
//! contracts) and checks it on generated inputs across the kernel families.

use aniso_ppa::inner_opt::{project_box, project_simplex, sup_separable_concave, Constraint};
use aniso_ppa::nalgebra::{DMatrix, DVector};
use aniso_ppa::operators::OperatorSpec;
use aniso_ppa::prox::{lp_norm, ProxKernel};
use aniso_ppa::resolvents::{anisotropic_resolvent, SolverTolerances};
use proptest::prelude::*;

fn kernels(dim: usize) -> impl Strategy<Value = ProxKernel> {
    prop_oneof![
        Just(ProxKernel::separable_power(1.5, dim).unwrap()),
        Just(ProxKernel::separable_power(2.0, dim).unwrap()),
        Just(ProxKernel::separable_power(3.0, dim).unwrap()),
        Just(ProxKernel::separable_power(4.0, dim).unwrap()),
        Just(ProxKernel::isotropic_power(3.0, dim).unwrap()),
        Just(ProxKernel::cosh(dim).unwrap()),
        Just(ProxKernel::exp_penalty(0.5, dim).unwrap()),
    ]
}

fn point(dim: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-5.0..5.0f64, dim).prop_map(DVector::from_vec)
}

/// A monotone affine operator on ℝ²: positive diagonal plus a skew part.
fn monotone_affine() -> impl Strategy<Value = OperatorSpec> {
    (0.0..4.0f64, 0.0..4.0f64, -3.0..3.0f64, point(2)).prop_map(|(a1, a2, c, b)| {
        let m = DMatrix::from_row_slice(2, 2, &[a1, c, -c, a2]);
        OperatorSpec::affine(m, b).unwrap()
    })
}

proptest! {
    /// `∇φ*` inverts `∇φ` on all kernel families.
    #[test]
    fn gradient_and_conjugate_gradient_are_inverse(kernel in kernels(3), x in point(3)) {
        let back = kernel.grad_conj(&kernel.grad(&x).unwrap()).unwrap();
        let err = (&back - &x).amax();
        prop_assert!(err <= 1e-8 * (1.0 + x.amax()), "round trip error {err:.3e}");
    }

    /// Epi-scaling: `(λ★φ)(x) = λφ(x/λ)`, `∇(λ★φ)(x) = ∇φ(x/λ)`, and
    /// `(λ★φ)* = λφ*`.
    #[test]
    fn epi_scaling_identities(kernel in kernels(3), x in point(3), lambda in 0.05..3.0f64) {
        let scaled = kernel.epi_scaled(lambda).unwrap();
        let x_over = x.map(|t| t / lambda);

        let value = scaled.eval(&x).unwrap();
        let want_value = lambda * kernel.eval(&x_over).unwrap();
        prop_assert!((value - want_value).abs() <= 1e-9 * (1.0 + want_value.abs()));

        let grad = scaled.grad(&x).unwrap();
        let want_grad = kernel.grad(&x_over).unwrap();
        prop_assert!((&grad - &want_grad).amax() <= 1e-9 * (1.0 + want_grad.amax()));

        let v = kernel.grad(&x).unwrap();
        let conj = scaled.conjugate(&v).unwrap();
        let want_conj = lambda * kernel.conjugate(&v).unwrap();
        prop_assert!((conj - want_conj).abs() <= 1e-9 * (1.0 + want_conj.abs()));
    }

    /// Bregman distances are nonnegative, vanish on the diagonal, and are
    /// strictly positive at well-separated arguments.
    #[test]
    fn bregman_distance_separates_points(kernel in kernels(3), x in point(3), y in point(3)) {
        let d = kernel.bregman(&x, &y).unwrap().value;
        prop_assert!(d >= 0.0);
        prop_assert_eq!(kernel.bregman(&x, &x).unwrap().value, 0.0);
        if (&x - &y).amax() >= 0.1 {
            prop_assert!(d > 1e-8, "D = {d:.3e} at separation {:.3}", (&x - &y).amax());
        }
    }

    /// The simplex projection is feasible, idempotent, and satisfies the
    /// variational inequality against feasible competitors.
    #[test]
    fn simplex_projection_is_feasible_and_optimal(v in point(6), w_raw in point(6)) {
        let p = project_simplex(&v);
        prop_assert!(p.iter().all(|&t| t >= 0.0));
        prop_assert!((p.sum() - 1.0).abs() <= 1e-12);
        let again = project_simplex(&p);
        prop_assert!((&again - &p).amax() <= 1e-12);
        let w = project_simplex(&w_raw);
        prop_assert!((&v - &p).dot(&(&w - &p)) <= 1e-10);
    }

    /// The box projection clamps coordinatewise and fixes feasible points.
    #[test]
    fn box_projection_clamps(v in point(4), lo_raw in point(4), width in prop::collection::vec(0.1..4.0f64, 4)) {
        let lo = lo_raw.clone();
        let hi = DVector::from_fn(4, |i, _| lo[i] + width[i]);
        let p = project_box(&v, &lo, &hi);
        prop_assert!((0..4).all(|i| lo[i] <= p[i] && p[i] <= hi[i]));
        let again = project_box(&p, &lo, &hi);
        prop_assert!((&again - &p).amax() == 0.0);
    }

    /// The separable concave maximiser beats every sampled feasible
    /// competitor on the simplex.
    #[test]
    fn separable_sup_is_optimal_on_simplex(c in point(5), y in point(5), w_raw in point(5)) {
        let kernel = ProxKernel::separable_power(2.0, 5).unwrap();
        let objective = |eta: &DVector<f64>| c.dot(eta) - kernel.eval(&(&y - eta)).unwrap();
        let (eta, value) = sup_separable_concave(&c, &y, &kernel, &Constraint::Simplex, 1e-12).unwrap();
        prop_assert!(eta.iter().all(|&t| t >= -1e-9));
        prop_assert!((eta.sum() - 1.0).abs() <= 1e-9);
        prop_assert!((value - objective(&eta)).abs() <= 1e-8 * (1.0 + value.abs()));
        let w = project_simplex(&w_raw);
        prop_assert!(objective(&w) <= value + 1e-8 * (1.0 + value.abs()));
    }

    /// Same optimality property under box constraints, for a non-quadratic
    /// kernel.
    #[test]
    fn separable_sup_is_optimal_on_box(c in point(4), y in point(4), w_raw in point(4)) {
        let kernel = ProxKernel::separable_power(3.0, 4).unwrap();
        let lo = DVector::from_element(4, -1.0);
        let hi = DVector::from_element(4, 1.0);
        let objective = |eta: &DVector<f64>| c.dot(eta) - kernel.eval(&(&y - eta)).unwrap();
        let constraint = Constraint::Box { lo: lo.clone(), hi: hi.clone() };
        let (eta, value) = sup_separable_concave(&c, &y, &kernel, &constraint, 1e-12).unwrap();
        prop_assert!((0..4).all(|i| lo[i] - 1e-12 <= eta[i] && eta[i] <= hi[i] + 1e-12));
        let w = project_box(&w_raw, &lo, &hi);
        prop_assert!(objective(&w) <= value + 1e-8 * (1.0 + value.abs()));
    }

    /// ℓp norms are absolutely homogeneous and satisfy the triangle
    /// inequality for p ≥ 1.
    #[test]
    fn lp_norm_axioms(x in point(4), y in point(4), t in -3.0..3.0f64, p in 1.0..4.0f64) {
        let homog = (lp_norm(&(x.map(|c| t * c)), p) - t.abs() * lp_norm(&x, p)).abs();
        prop_assert!(homog <= 1e-10 * (1.0 + lp_norm(&x, p)));
        prop_assert!(lp_norm(&(&x + &y), p) <= lp_norm(&x, p) + lp_norm(&y, p) + 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The resolvent solver honours its residual contract and returns a pair
    /// on the operator graph satisfying the defining inclusion.
    #[test]
    fn resolvent_satisfies_defining_equation(kernel in kernels(2), op in monotone_affine(), x in point(2)) {
        let tols = SolverTolerances::default();
        let sol = anisotropic_resolvent(&op, &kernel, &x, &tols).unwrap();
        prop_assert!(sol.converged, "residual {:.3e}", sol.residual_norm);
        prop_assert!(sol.residual_norm <= tols.residual_tol);
        let graph_err = (&sol.v - &op.eval(&sol.z).unwrap()).amax();
        prop_assert!(graph_err <= 1e-9 * (1.0 + sol.v.amax()));
        let eq_err = (&sol.z + kernel.grad_conj(&sol.v).unwrap() - &x).amax();
        prop_assert!(eq_err <= 1e-8 * (1.0 + x.amax()), "equation error {eq_err:.3e}");
    }

    /// In one dimension the resolvent of a monotone affine map is monotone
    /// in its argument.
    #[test]
    fn scalar_resolvent_is_monotone(
        p in prop_oneof![Just(1.5), Just(2.0), Just(3.0), Just(4.0)],
        slope in 0.0..5.0f64,
        offset in -3.0..3.0f64,
        x1 in -4.0..4.0f64,
        gap in 0.01..4.0f64,
    ) {
        let kernel = ProxKernel::separable_power(p, 1).unwrap();
        let op = OperatorSpec::affine(
            DMatrix::from_element(1, 1, slope),
            DVector::from_element(1, offset),
        ).unwrap();
        let tols = SolverTolerances::default();
        let z1 = anisotropic_resolvent(&op, &kernel, &DVector::from_element(1, x1), &tols).unwrap().z[0];
        let z2 = anisotropic_resolvent(&op, &kernel, &DVector::from_element(1, x1 + gap), &tols).unwrap().z[0];
        prop_assert!(z2 >= z1 - 1e-9, "z({x1}) = {z1}, z({}) = {z2}", x1 + gap);
    }

    /// With the quadratic kernel the dual-gradient composition keeps the
    /// monotonicity of the underlying operator (the witnesses in the library
    /// show this fails for other kernels).
    #[test]
    fn quadratic_kernel_preserves_monotonicity(op in monotone_affine(), x in point(2), y in point(2)) {
        let kernel = ProxKernel::euclidean(2);
        let probe = aniso_ppa::operators::probe_nonmonotonicity(&op, &kernel, &[(x, y)]).unwrap();
        prop_assert!(probe >= -1e-10, "probe {probe:.3e}");
    }
}
