//! Batch verification suites over a built-in grid of operators and kernels.
//!
//! Each suite sweeps one of the structural identities of the library across
//! `{zero, identity, growth_linear, skew2} × {ℓ^p kernels, isotropic cube,
//! cosh}` with seeded sample points and reports the worst residual seen:
//!
//! * [`run_identity_suite`] — the Moreau-type decomposition
//!   `R_T(x) = x − ∇φ*(B_{T⁻¹}(∇φ x))` and the relaxation-absorption law
//!   `(id + τ∇φ* T_ρ)⁻¹ = (1 − λ) id + λ (id + (τ+ρ)∇φ* T)⁻¹`, `λ = τ/(τ+ρ)`,
//!   over the weight pairs `(τ, ρ) ∈ {(1,0), (½,½), (¼,¾)}`;
//! * [`run_algebraic_suite`] — the dual three-point expansion and the
//!   conjugate-duality exchange `D_{φ*}(∇φ x, ∇φ y) = D_φ(y, x)`;
//! * [`run_dfirm_suite`] — firm nonexpansiveness of dual-space resolvents in
//!   the `∇φ*` pairing;
//! * [`run_enlargement_suite`] — consistency of ε-enlargement membership on
//!   affine operators (graph points belong at `ε = 0`, inflated certificates
//!   at matching ε, deflated ones are rejected).
//!
//! [`run_all`] bundles the suites into one pass/fail table ([`CheckReport`])
//! for the command-line `verify` entry point. The hidden [`FaultInjection`]
//! hook deliberately corrupts one computation so harness tests can confirm
//! the suite actually detects regressions.

use crate::operators::{self, OperatorSpec};
use crate::prox::ProxKernel;
use crate::resolvents::{self, SolverTolerances};
use crate::sampling;
use crate::{Error, Result};
use nalgebra::DVector;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    /// Worst residual (or violation magnitude) across all cases.
    pub worst: f64,
    /// Tolerance the worst value is compared against.
    pub tol: f64,
    /// Number of individual cases evaluated.
    pub cases: usize,
    pub pass: bool,
}

impl CheckReport {
    fn new(name: &str, worst: f64, tol: f64, cases: usize) -> Self {
        CheckReport {
            name: name.to_string(),
            worst,
            tol,
            cases,
            pass: worst.is_finite() && worst <= tol,
        }
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<24} worst {:>10.3e}  tol {:>8.1e}  cases {:>6}  {}",
            self.name,
            self.worst,
            self.tol,
            self.cases,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Sampling and solver options shared by all suites.
#[derive(Debug, Clone)]
pub struct SuiteOptions {
    /// Sample points per grid cell (identity suite) or per kernel
    /// (algebraic suite) or pairs (d-firm suite).
    pub points: usize,
    pub seed: u64,
    /// Worker threads for the identity suite's grid sweep.
    pub threads: usize,
    pub solver: SolverTolerances,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            points: 100,
            seed: 2024,
            threads: std::thread::available_parallelism().map_or(1, |p| p.get()),
            solver: SolverTolerances::default(),
        }
    }
}

/// Per-suite pass tolerances.
#[derive(Debug, Clone)]
pub struct VerifyTolerances {
    /// Moreau / relaxation-absorption residual bound.
    pub identity: f64,
    /// Three-point / conjugate-duality residual bound.
    pub algebraic: f64,
    /// Maximal admissible negative slack of the firm-nonexpansiveness
    /// inequality.
    pub dfirm: f64,
    /// Margin by which enlargement membership answers must be decisive.
    pub enlargement: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            identity: 1e-8,
            algebraic: 1e-12,
            dfirm: 1e-9,
            enlargement: 1e-9,
        }
    }
}

/// Deliberate corruption switch for mutation-sanity tests of the suites.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultInjection {
    None,
    /// Flips the sign of the `∇φ*` term in the Moreau recombination.
    FlipGradConjSign,
}

/// The operator grid every suite sweeps: zero and identity maps, the
/// rotation-plus-shift instance with linear growth, and the skew rotation.
pub fn operator_grid() -> Vec<OperatorSpec> {
    vec![
        OperatorSpec::zero(2),
        OperatorSpec::identity(2),
        OperatorSpec::growth_instance_linear(),
        OperatorSpec::skew2(),
    ]
}

/// The kernel grid: separable powers `p ∈ {1.5, 2, 3, 4}`, the isotropic
/// cube, and cosh, all over `ℝ²`.
pub fn kernel_grid() -> Result<Vec<ProxKernel>> {
    Ok(vec![
        ProxKernel::separable_power(1.5, 2)?,
        ProxKernel::separable_power(2.0, 2)?,
        ProxKernel::separable_power(3.0, 2)?,
        ProxKernel::separable_power(4.0, 2)?,
        ProxKernel::isotropic_power(3.0, 2)?,
        ProxKernel::cosh(2)?,
    ])
}

const WEIGHT_PAIRS: [(f64, f64); 3] = [(1.0, 0.0), (0.5, 0.5), (0.25, 0.75)];
const SAMPLE_RANGE: (f64, f64) = (-5.0, 5.0);

/// Moreau recombination with an optional injected sign fault.
fn moreau_residual_with_fault(
    op: &OperatorSpec,
    kernel: &ProxKernel,
    x: &DVector<f64>,
    tols: &SolverTolerances,
    fault: FaultInjection,
) -> Result<f64> {
    let primal = resolvents::anisotropic_resolvent(op, kernel, x, tols)?;
    let dual = resolvents::bregman_resolvent_of_inverse(op, kernel, &kernel.grad(x)?, tols)?;
    if !primal.converged || !dual.converged {
        return Err(Error::NonConvergence {
            residual: primal.residual_norm.max(dual.residual_norm),
            iters: primal.inner_iters + dual.inner_iters,
            tol: tols.residual_tol,
        });
    }
    let correction = kernel.grad_conj(&dual.z)?;
    let right = match fault {
        FaultInjection::None => x - &correction,
        FaultInjection::FlipGradConjSign => x + &correction,
    };
    Ok((primal.z - right).amax())
}

/// One grid cell of the identity suite: worst Moreau and worst
/// relaxation-absorption residual over `points` samples.
fn identity_cell(
    op: &OperatorSpec,
    kernel: &ProxKernel,
    points: usize,
    seed: u64,
    tols: &SolverTolerances,
    fault: FaultInjection,
) -> Result<(f64, f64)> {
    let mut rng = sampling::seeded_rng(seed);
    let mut worst_moreau = 0.0_f64;
    let mut worst_relax = 0.0_f64;
    for _ in 0..points {
        let x = sampling::uniform_vector(&mut rng, op.dim(), SAMPLE_RANGE.0, SAMPLE_RANGE.1);
        worst_moreau = worst_moreau.max(moreau_residual_with_fault(op, kernel, &x, tols, fault)?);
        for (tau, rho) in WEIGHT_PAIRS {
            let r = resolvents::relaxation_absorption_residual(op, kernel, tau, rho, &x, tols)?;
            worst_relax = worst_relax.max(r);
        }
    }
    Ok((worst_moreau, worst_relax))
}

/// Sweeps the Moreau decomposition and the relaxation-absorption identity
/// over the full operator × kernel grid with `points` seeded samples per
/// cell; returns the two aggregate reports. Grid cells run on
/// `options.threads` workers; each cell draws from its own seeded stream, so
/// results do not depend on the thread count.
pub fn run_identity_suite(
    options: &SuiteOptions,
    tols: &VerifyTolerances,
    fault: FaultInjection,
) -> Result<Vec<CheckReport>> {
    let ops = operator_grid();
    let kernels = kernel_grid()?;
    let cells: Vec<(usize, &OperatorSpec, &ProxKernel)> = ops
        .iter()
        .flat_map(|o| kernels.iter().map(move |k| (o, k)))
        .enumerate()
        .map(|(i, (o, k))| (i, o, k))
        .collect();

    let workers = options.threads.max(1).min(cells.len().max(1));
    let chunk = cells.len().div_ceil(workers);
    let results: Vec<Result<(f64, f64)>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for part in cells.chunks(chunk) {
            handles.push(scope.spawn(move || {
                let mut worst = (0.0_f64, 0.0_f64);
                for (i, op, kernel) in part {
                    let (m, r) = identity_cell(
                        op,
                        kernel,
                        options.points,
                        options.seed.wrapping_add(*i as u64),
                        &options.solver,
                        fault,
                    )?;
                    worst.0 = worst.0.max(m);
                    worst.1 = worst.1.max(r);
                }
                Ok(worst)
            }));
        }
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut worst_moreau = 0.0_f64;
    let mut worst_relax = 0.0_f64;
    for r in results {
        let (m, rel) = r?;
        worst_moreau = worst_moreau.max(m);
        worst_relax = worst_relax.max(rel);
    }
    let cases = cells.len() * options.points;
    Ok(vec![
        CheckReport::new("moreau", worst_moreau, tols.identity, cases),
        CheckReport::new(
            "relaxation_absorption",
            worst_relax,
            tols.identity,
            cases * WEIGHT_PAIRS.len(),
        ),
    ])
}

/// Sweeps the dual three-point expansion (seeded triples) and the
/// conjugate-duality exchange `D_{φ*}(∇φ x, ∇φ y) = D_φ(y, x)` (seeded
/// pairs) over the kernel grid.
pub fn run_algebraic_suite(
    options: &SuiteOptions,
    tols: &VerifyTolerances,
) -> Result<Vec<CheckReport>> {
    let kernels = kernel_grid()?;
    let mut worst_three = 0.0_f64;
    let mut worst_duality = 0.0_f64;
    for (i, kernel) in kernels.iter().enumerate() {
        let mut rng = sampling::seeded_rng(options.seed.wrapping_add(1000 + i as u64));
        let n = kernel.dim();
        for _ in 0..options.points {
            let u = sampling::uniform_vector(&mut rng, n, SAMPLE_RANGE.0, SAMPLE_RANGE.1);
            let v = sampling::uniform_vector(&mut rng, n, SAMPLE_RANGE.0, SAMPLE_RANGE.1);
            let w = sampling::uniform_vector(&mut rng, n, SAMPLE_RANGE.0, SAMPLE_RANGE.1);
            worst_three = worst_three.max(kernel.three_point_residual(&u, &v, &w)?.abs());

            let x = sampling::uniform_vector(&mut rng, n, SAMPLE_RANGE.0, SAMPLE_RANGE.1);
            let y = sampling::uniform_vector(&mut rng, n, SAMPLE_RANGE.0, SAMPLE_RANGE.1);
            let lhs = kernel
                .bregman_conj(&kernel.grad(&x)?, &kernel.grad(&y)?)?
                .value;
            let rhs = kernel.bregman(&y, &x)?.value;
            let scale = 1.0_f64.max(lhs.abs() + rhs.abs());
            worst_duality = worst_duality.max((lhs - rhs).abs() / scale);
        }
    }
    let cases = kernels.len() * options.points;
    Ok(vec![
        CheckReport::new("three_point", worst_three, tols.algebraic, cases),
        CheckReport::new("conjugate_duality", worst_duality, tols.algebraic, cases),
    ])
}

/// Verifies `∇φ*`-firm nonexpansiveness of the dual-space resolvent of
/// `S = (growth instance)⁻¹` for kernels `p ∈ {2, 3}` over seeded pairs; the
/// reported value is the largest violation (negative slack magnitude).
pub fn run_dfirm_suite(options: &SuiteOptions, tols: &VerifyTolerances) -> Result<CheckReport> {
    let s_op = OperatorSpec::inverse(OperatorSpec::growth_instance_linear())?;
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for (i, p) in [2.0, 3.0].into_iter().enumerate() {
        let kernel = ProxKernel::separable_power(p, 2)?;
        let mut rng = sampling::seeded_rng(options.seed.wrapping_add(2000 + i as u64));
        let pairs: Vec<(DVector<f64>, DVector<f64>)> = (0..options.points)
            .map(|_| {
                (
                    sampling::uniform_vector(&mut rng, 2, SAMPLE_RANGE.0, SAMPLE_RANGE.1),
                    sampling::uniform_vector(&mut rng, 2, SAMPLE_RANGE.0, SAMPLE_RANGE.1),
                )
            })
            .collect();
        let min_slack = resolvents::dfirm_violation(&s_op, &kernel, &pairs, &options.solver)?;
        worst = worst.max((-min_slack).max(0.0));
        cases += pairs.len();
    }
    Ok(CheckReport::new("dfirm_slack", worst, tols.dfirm, cases))
}

/// Exercises ε-enlargement membership on the affine grid operators: graph
/// points are members at `ε = 0`, certificates inflated by a computed margin
/// stay members, and the same certificates must be rejected once ε is cut
/// below the required level. The reported value is the worst margin by which
/// any of those three answers was wrong.
pub fn run_enlargement_suite(
    options: &SuiteOptions,
    tols: &VerifyTolerances,
) -> Result<CheckReport> {
    let ops = [OperatorSpec::growth_instance_linear(), OperatorSpec::skew2()];
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for (i, op) in ops.iter().enumerate() {
        let mut rng = sampling::seeded_rng(options.seed.wrapping_add(3000 + i as u64));
        for _ in 0..options.points {
            let x = sampling::uniform_vector(&mut rng, 2, SAMPLE_RANGE.0, SAMPLE_RANGE.1);
            let d = sampling::uniform_vector(&mut rng, 2, -1.0, 1.0);
            // Graph point: member at ε = 0.
            let u = op.eval(&x)?;
            let exact = operators::check_enlargement_member(op, 0.0, &x, &u)?;
            if !exact.member {
                worst = worst.max(-exact.infimum);
            }
            // Perturbed certificate u + d: member exactly for ε ≥ −inf.
            let up = &u + &d;
            let free = operators::check_enlargement_member(op, 0.0, &x, &up)?;
            if free.infimum.is_finite() {
                let needed = -free.infimum;
                let inflated =
                    operators::check_enlargement_member(op, needed + 1e-12, &x, &up)?;
                if !inflated.member {
                    worst = worst.max(needed + 1e-12 + inflated.infimum);
                }
                if needed > 1e-6 {
                    let deflated =
                        operators::check_enlargement_member(op, 0.5 * needed, &x, &up)?;
                    if deflated.member {
                        worst = worst.max(needed - 0.5 * needed);
                    }
                }
            }
            cases += 3;
        }
    }
    Ok(CheckReport::new(
        "enlargement_membership",
        worst,
        tols.enlargement,
        cases,
    ))
}

/// Runs every suite and returns the combined table.
pub fn run_all(options: &SuiteOptions, tols: &VerifyTolerances) -> Result<Vec<CheckReport>> {
    let mut reports = run_identity_suite(options, tols, FaultInjection::None)?;
    reports.extend(run_algebraic_suite(options, tols)?);
    reports.push(run_dfirm_suite(options, tols)?);
    reports.push(run_enlargement_suite(options, tols)?);
    Ok(reports)
}
