//! Anisotropic proximal augmented Lagrangian method for convex-concave
//! saddle problems.
//!
//! The problem class is
//!
//! ```text
//! min_x max_η  L(x, η) = f(x) + ⟨η, A x⟩ − g*(η),
//! ```
//!
//! with `A ∈ ℝ^{m×n}`, a convex primal term `f` ([`PrimalTerm`]) and a convex
//! conjugate term `g*` ([`ConjTerm`]). Smoothing the maximisation with a dual
//! kernel `φ` yields the φ-augmented Lagrangian
//!
//! ```text
//! L_φ(x, y) = sup_η { L(x, η) − φ(y − η) },
//! ```
//!
//! which is finite and continuously differentiable in `x` whenever the
//! supremum is attained; its maximiser `η*` gives `∇_x L_φ = ∇f(x) + Aᵀη*`
//! (envelope theorem) and `∇_y L_φ = −∇φ(y − η*)`. One outer step of the
//! method ([`run_alm`]) is
//!
//! ```text
//! x^{k+1} = argmin_x { L_φ(x, y^k) + ϑ(x^k − x) },
//! y^{k+1} = y^k + ∇φ*(−∇φ(y^k − η*)),
//! ```
//!
//! with a primal kernel `ϑ`; for kernels with odd gradients (all power and
//! cosh kernels) the dual update collapses to `y^{k+1} = η*`. The pair
//! `(x^k, y^k)` is exactly the anisotropic proximal point iteration applied
//! to the saddle operator `T(x, y) = (∇f(x) + Aᵀy, ∂g*(y) − Ax)` under the
//! block kernel `ϑ ⊕ φ`; [`alm_as_ppa_gap`] verifies that identity
//! numerically when both kernels come from the same family.
//!
//! [`build_zero_sum_game`] and [`build_l1_regression`] construct the two
//! seeded experiment families (matrix games on probability simplices and
//! ℓ¹-regression with Tikhonov term), [`primal_dual_gap`] and
//! [`kkt_residual`] measure progress, and [`AlmTrace::write_csv`] exports
//! per-iterate diagnostics with a fixed column schema.

use crate::inner_opt::{self, Constraint, SmoothProblem};
use crate::operators::{LinearObjective, OperatorSpec, QuadraticObjective};
use crate::ppa::{self, PpaConfig};
use crate::prox::ProxKernel;
use crate::resolvents::SolverTolerances;
use crate::sampling;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::io::Write;
use std::sync::Arc;

/// Primal term `f` of the saddle problem.
#[derive(Debug, Clone)]
pub enum PrimalTerm {
    /// `f(x) = (θ/2) ‖x‖²` with `θ > 0`.
    ScaledSquaredNorm { theta: f64 },
    /// `f = δ_Δ`, the indicator of the probability simplex.
    SimplexIndicator,
}

impl PrimalTerm {
    /// Smooth part of `f` (zero for the indicator, whose geometry lives in
    /// [`PrimalTerm::constraint`]).
    pub fn smooth_value(&self, x: &DVector<f64>) -> f64 {
        match self {
            PrimalTerm::ScaledSquaredNorm { theta } => 0.5 * theta * x.norm_squared(),
            PrimalTerm::SimplexIndicator => 0.0,
        }
    }

    /// Gradient of the smooth part.
    pub fn smooth_grad(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            PrimalTerm::ScaledSquaredNorm { theta } => x * *theta,
            PrimalTerm::SimplexIndicator => DVector::zeros(x.len()),
        }
    }

    /// Feasible set handed to the inner solver.
    pub fn constraint(&self) -> Constraint {
        match self {
            PrimalTerm::ScaledSquaredNorm { .. } => Constraint::Unconstrained,
            PrimalTerm::SimplexIndicator => Constraint::Simplex,
        }
    }
}

/// Conjugate term `g*` of the saddle problem; the variant determines which
/// augmented-Lagrangian path is valid.
#[derive(Debug, Clone)]
pub enum ConjTerm {
    /// `g*(η) = δ_Δ(η)`, so `g(z) = max_i z_i` (matrix games).
    SimplexIndicator,
    /// `g*(η) = δ_{[−1,1]^m}(η) + ⟨b, η⟩`, so `g(z) = ‖z − b‖₁`.
    BoxPlusLinear { b: DVector<f64> },
    /// `g*(η) = ⟨b, η⟩`, so `g = δ_{{b}}` (equality constraints `Ax = b`).
    PointIndicator { b: DVector<f64> },
}

impl ConjTerm {
    fn name(&self) -> &'static str {
        match self {
            ConjTerm::SimplexIndicator => "simplex",
            ConjTerm::BoxPlusLinear { .. } => "box+linear",
            ConjTerm::PointIndicator { .. } => "point",
        }
    }
}

/// A convex-concave saddle problem `min_x max_η f(x) + ⟨η, Ax⟩ − g*(η)`.
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    pub f: PrimalTerm,
    pub gstar: ConjTerm,
    /// Coupling matrix, `m × n`.
    pub a: DMatrix<f64>,
    /// Optimal value of the primal objective `f(x) + g(Ax)`, when known.
    pub known_value: Option<f64>,
    /// A known saddle point `(x*, y*)`, when available.
    pub known_point: Option<(DVector<f64>, DVector<f64>)>,
}

impl SaddleProblem {
    pub fn new(f: PrimalTerm, gstar: ConjTerm, a: DMatrix<f64>) -> Result<Self> {
        let m = a.nrows();
        match &gstar {
            ConjTerm::BoxPlusLinear { b } | ConjTerm::PointIndicator { b } => {
                if b.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        got: b.len(),
                    });
                }
            }
            ConjTerm::SimplexIndicator => {}
        }
        Ok(SaddleProblem {
            f,
            gstar,
            a,
            known_value: None,
            known_point: None,
        })
    }

    /// Primal dimension `n`.
    pub fn primal_dim(&self) -> usize {
        self.a.ncols()
    }

    /// Dual dimension `m`.
    pub fn dual_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Parses a problem spec string.
    ///
    /// Grammar: `game:n=30,m=32,seed=7` (zero-sum matrix game) or
    /// `l1reg:n=29,m=30,theta=0.1,seed=7` (ℓ¹ regression with Tikhonov
    /// term).
    pub fn parse(spec: &str) -> Result<Self> {
        let err = |reason: &str| Error::ParseSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let spec = spec.trim();
        let (head, args) = spec
            .split_once(':')
            .ok_or_else(|| err("expected `kind:key=value,...`"))?;
        let mut n = None;
        let mut m = None;
        let mut theta = None;
        let mut seed = None;
        for part in args.split(',') {
            let part = part.trim();
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| err(&format!("expected key=value, got `{part}`")))?;
            match key {
                "n" => n = Some(value.parse::<usize>().map_err(|_| err("cannot parse n"))?),
                "m" => m = Some(value.parse::<usize>().map_err(|_| err("cannot parse m"))?),
                "theta" => {
                    theta = Some(
                        value
                            .parse::<f64>()
                            .map_err(|_| err("cannot parse theta"))?,
                    )
                }
                "seed" => {
                    seed = Some(value.parse::<u64>().map_err(|_| err("cannot parse seed"))?)
                }
                other => return Err(err(&format!("unknown key `{other}`"))),
            }
        }
        let n = n.ok_or_else(|| err("missing n="))?;
        let m = m.ok_or_else(|| err("missing m="))?;
        let seed = seed.ok_or_else(|| err("missing seed="))?;
        match head {
            "game" => build_zero_sum_game(n, m, seed),
            "l1reg" => {
                let theta = theta.ok_or_else(|| err("l1reg requires theta="))?;
                build_l1_regression(n, m, theta, seed)
            }
            other => Err(err(&format!("unknown problem kind `{other}`"))),
        }
    }

    /// The saddle operator `T(x, y) = (∇f(x) + Aᵀy, ∇g*(y) − Ax)` as an
    /// [`OperatorSpec`], available when both terms are smooth — that is, for
    /// the quadratic primal term with an equality conjugate term.
    pub fn saddle_operator(&self) -> Result<OperatorSpec> {
        let theta = match self.f {
            PrimalTerm::ScaledSquaredNorm { theta } => theta,
            PrimalTerm::SimplexIndicator => {
                return Err(Error::UnsupportedGStar(
                    "saddle operator requires a smooth primal term".to_string(),
                ))
            }
        };
        let b = match &self.gstar {
            ConjTerm::PointIndicator { b } => b.clone(),
            other => {
                return Err(Error::UnsupportedGStar(format!(
                    "saddle operator requires an equality conjugate term, got {}",
                    other.name()
                )))
            }
        };
        let op = OperatorSpec::saddle(
            Arc::new(QuadraticObjective { theta }),
            Arc::new(LinearObjective { c: b }),
            self.a.clone(),
        );
        if let Some((xs, ys)) = &self.known_point {
            let mut z = DVector::zeros(xs.len() + ys.len());
            z.rows_mut(0, xs.len()).copy_from(xs);
            z.rows_mut(xs.len(), ys.len()).copy_from(ys);
            return op.with_known_zero(z);
        }
        Ok(op)
    }
}

/// Value, primal gradient and dual maximiser of the φ-augmented Lagrangian
/// at one point.
#[derive(Debug, Clone)]
pub struct AugmentedLagrangian {
    /// `L_φ(x, y)`.
    pub value: f64,
    /// `∇_x L_φ(x, y) = ∇f(x) + Aᵀη*`.
    pub grad_x: DVector<f64>,
    /// The maximiser `η*` of `η ↦ L(x, η) − φ(y − η)`.
    pub eta: DVector<f64>,
}

/// Evaluates the φ-augmented Lagrangian `L_φ(x, y) = sup_η L(x, η) − φ(y−η)`.
///
/// For the equality conjugate term the supremum is unconstrained and closed
/// form: `L_φ(x, y) = f(x) + ⟨Ax − b, y⟩ + φ*(b − Ax)` with maximiser
/// `η* = y − ∇φ*(b − Ax)` (any kernel). The simplex and box terms reduce to a
/// separable concave maximisation handled by
/// [`inner_opt::sup_separable_concave`], which requires a separable dual
/// kernel; `tol` bounds the residual of its simplex bisection.
pub fn aug_lagrangian(
    problem: &SaddleProblem,
    x: &DVector<f64>,
    y: &DVector<f64>,
    dual_kernel: &ProxKernel,
    tol: f64,
) -> Result<AugmentedLagrangian> {
    let (n, m) = (problem.primal_dim(), problem.dual_dim());
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if y.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: y.len(),
        });
    }
    if dual_kernel.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: dual_kernel.dim(),
        });
    }
    let ax = &problem.a * x;
    let f_value = problem.f.smooth_value(x);
    let f_grad = problem.f.smooth_grad(x);
    let (eta, coupling_value) = match &problem.gstar {
        ConjTerm::SimplexIndicator => {
            inner_opt::sup_separable_concave(&ax, y, dual_kernel, &Constraint::Simplex, tol)?
        }
        ConjTerm::BoxPlusLinear { b } => {
            let c = &ax - b;
            let box_constraint = Constraint::Box {
                lo: DVector::from_element(m, -1.0),
                hi: DVector::from_element(m, 1.0),
            };
            inner_opt::sup_separable_concave(&c, y, dual_kernel, &box_constraint, tol)?
        }
        ConjTerm::PointIndicator { b } => {
            let c = &ax - b;
            let penalty_arg = -&c;
            let eta = y - dual_kernel.grad_conj(&penalty_arg)?;
            let value = c.dot(y) + dual_kernel.conjugate(&penalty_arg)?;
            (eta, value)
        }
    };
    let grad_x = f_grad + problem.a.transpose() * &eta;
    Ok(AugmentedLagrangian {
        value: f_value + coupling_value,
        grad_x,
        eta,
    })
}

/// Configuration of the outer augmented-Lagrangian iteration.
#[derive(Debug, Clone)]
pub struct AlmConfig {
    /// Primal proximal kernel `ϑ` over `ℝⁿ`.
    pub primal_kernel: ProxKernel,
    /// Dual smoothing kernel `φ` over `ℝ^m`.
    pub dual_kernel: ProxKernel,
    /// Outer iteration budget.
    pub max_outer: usize,
    /// Initial inner tolerance of the geometric schedule
    /// `tol_k = max(solver.residual_tol, eps0 · 2^{−k})`; `0` solves every
    /// subproblem to the fixed floor.
    pub eps0: f64,
    /// Stop once the primal-dual gap falls below this; `0` disables.
    pub gap_tol: f64,
    /// Stop once the KKT residual falls below this; `0` disables.
    pub kkt_tol: f64,
    /// Iteration budget of each primal subproblem solve.
    pub inner_max_iters: usize,
    /// Floor tolerances shared with the inner machinery.
    pub solver: SolverTolerances,
}

impl AlmConfig {
    /// Defaults: 300 outer iterations, schedule `eps0 = 1e−3`, gap stop at
    /// `1e−6`, KKT stop disabled.
    pub fn new(primal_kernel: ProxKernel, dual_kernel: ProxKernel) -> Self {
        AlmConfig {
            primal_kernel,
            dual_kernel,
            max_outer: 300,
            eps0: 1e-3,
            gap_tol: 1e-6,
            kkt_tol: 0.0,
            inner_max_iters: 2000,
            solver: SolverTolerances::default(),
        }
    }
}

/// Why an augmented-Lagrangian run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlmStopReason {
    /// Primal-dual gap fell below `gap_tol`.
    Gap,
    /// KKT residual fell below `kkt_tol`.
    Kkt,
    /// Iteration budget exhausted.
    MaxOuter,
}

/// Diagnostics of one outer iterate.
///
/// Step-indexed quantities (`dual_norm`, `bregman_to_zero`, `inner_iters`,
/// `eps_k`) are `NaN`/zero at `k = 0`; gap-type quantities are `NaN` when the
/// problem supports no closed-form gap (equality conjugate term).
#[derive(Debug, Clone)]
pub struct AlmRecord {
    pub k: usize,
    /// Primal iterate `x^k`.
    pub x: DVector<f64>,
    /// Dual iterate `y^k`.
    pub y: DVector<f64>,
    /// Primal objective `f(x) + g(Ax)` at the (feasibility-projected) iterate.
    pub primal_value: f64,
    /// Dual objective `−f*(−Aᵀy) − g*(y)` at the (projected) iterate.
    pub dual_value: f64,
    /// `primal_value − dual_value`.
    pub gap: f64,
    /// ℓ∞ norm of the natural KKT residual map.
    pub kkt_residual: f64,
    /// Euclidean norm of the concatenated dual certificates
    /// `(∇ϑ(x^{k−1} − x^k), ∇φ(y^{k−1} − y^k))`.
    pub dual_norm: f64,
    /// `D_{ϑ*}(v_x, 0) + D_{φ*}(v_y, 0)` for the certificates above.
    pub bregman_to_zero: f64,
    /// Iterations spent by the primal subproblem solve producing `x^k`.
    pub inner_iters: usize,
    /// Running total of inner iterations.
    pub cum_inner: usize,
    /// Stationarity reached by that solve.
    pub inner_stationarity: f64,
    /// Inner tolerance in force for the step producing this iterate.
    pub eps_k: f64,
}

/// Trace of one augmented-Lagrangian run.
#[derive(Debug, Clone)]
pub struct AlmTrace {
    pub records: Vec<AlmRecord>,
    pub x_final: DVector<f64>,
    pub y_final: DVector<f64>,
    pub stop: AlmStopReason,
    pub primal_kernel_desc: String,
    pub dual_kernel_desc: String,
}

impl AlmTrace {
    /// Writes the per-iterate diagnostics as CSV with a fixed column schema.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "k,primal_value,dual_value,gap,kkt_residual,dual_norm,bregman_to_zero,inner_iters,cum_inner,eps_k"
        )?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.k,
                ppa::fmt_csv(r.primal_value),
                ppa::fmt_csv(r.dual_value),
                ppa::fmt_csv(r.gap),
                ppa::fmt_csv(r.kkt_residual),
                ppa::fmt_csv(r.dual_norm),
                ppa::fmt_csv(r.bregman_to_zero),
                r.inner_iters,
                r.cum_inner,
                ppa::fmt_csv(r.eps_k),
            )?;
        }
        Ok(())
    }

    /// Gap of the last iterate.
    pub fn final_gap(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.gap)
    }

    /// KKT residual of the last iterate.
    pub fn final_kkt(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.kkt_residual)
    }
}

/// Primal objective `f(x) + g(Ax)`, evaluated at the iterate projected onto
/// the domain of `f` (simplex term) so that values stay finite along a run.
pub fn primal_objective(problem: &SaddleProblem, x: &DVector<f64>) -> Result<f64> {
    let x = match problem.f {
        PrimalTerm::SimplexIndicator => inner_opt::project_simplex(x),
        PrimalTerm::ScaledSquaredNorm { .. } => x.clone(),
    };
    let ax = &problem.a * &x;
    let g = match &problem.gstar {
        ConjTerm::SimplexIndicator => ax.max(),
        ConjTerm::BoxPlusLinear { b } => (&ax - b).abs().sum(),
        ConjTerm::PointIndicator { .. } => {
            return Err(Error::UnsupportedGStar(
                "equality conjugate term has no finite primal objective off the constraint"
                    .to_string(),
            ))
        }
    };
    Ok(problem.f.smooth_value(&x) + g)
}

/// Dual objective `−f*(−Aᵀy) − g*(y)`, evaluated at the iterate projected
/// onto the domain of `g*`.
pub fn dual_objective(problem: &SaddleProblem, y: &DVector<f64>) -> Result<f64> {
    let (y, linear) = match &problem.gstar {
        ConjTerm::SimplexIndicator => (inner_opt::project_simplex(y), 0.0),
        ConjTerm::BoxPlusLinear { b } => {
            let ones = DVector::from_element(problem.dual_dim(), 1.0);
            let yp = inner_opt::project_box(y, &(-&ones), &ones);
            let linear = b.dot(&yp);
            (yp, linear)
        }
        ConjTerm::PointIndicator { .. } => {
            return Err(Error::UnsupportedGStar(
                "equality conjugate term has no bounded dual objective".to_string(),
            ))
        }
    };
    let aty = problem.a.transpose() * &y;
    let f_conj = match problem.f {
        // (δ_Δ)*(u) = max_j u_j.
        PrimalTerm::SimplexIndicator => (-&aty).max(),
        // ((θ/2)‖·‖²)*(u) = ‖u‖²/(2θ).
        PrimalTerm::ScaledSquaredNorm { theta } => aty.norm_squared() / (2.0 * theta),
    };
    Ok(-f_conj - linear)
}

/// Primal-dual gap `[f(x) + g(Ax)] − [−f*(−Aᵀy) − g*(y)]`, both sides
/// evaluated at feasibility-projected iterates. For matrix games this is
/// exactly `max_i (Ax)_i − min_j (Aᵀy)_j`. Equality conjugate terms have no
/// bounded dual objective and return [`Error::UnsupportedGStar`].
pub fn primal_dual_gap(problem: &SaddleProblem, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    Ok(primal_objective(problem, x)? - dual_objective(problem, y)?)
}

/// ℓ∞ norm of the natural-residual KKT map of the saddle problem at `(x, y)`:
/// the fixed-point residuals of a projected gradient step for each block
/// (`x − P_C(x − Aᵀy − ∇f(x))` style), with the equality term measured by
/// `‖Ax − b‖∞` directly.
pub fn kkt_residual(problem: &SaddleProblem, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let ax = &problem.a * x;
    let aty = problem.a.transpose() * y;
    let rx = match problem.f {
        PrimalTerm::ScaledSquaredNorm { theta } => {
            let g = x * theta + &aty;
            g.abs().max()
        }
        PrimalTerm::SimplexIndicator => {
            let step = x - &aty;
            (x - inner_opt::project_simplex(&step)).abs().max()
        }
    };
    let ry = match &problem.gstar {
        ConjTerm::SimplexIndicator => {
            let step = y + &ax;
            (y - inner_opt::project_simplex(&step)).abs().max()
        }
        ConjTerm::BoxPlusLinear { b } => {
            let step = y + &ax - b;
            let ones = DVector::from_element(problem.dual_dim(), 1.0);
            (y - inner_opt::project_box(&step, &(-&ones), &ones))
                .abs()
                .max()
        }
        ConjTerm::PointIndicator { b } => (&ax - b).abs().max(),
    };
    rx.max(ry)
}

fn gap_or_nan(problem: &SaddleProblem, x: &DVector<f64>, y: &DVector<f64>) -> (f64, f64, f64) {
    match (primal_objective(problem, x), dual_objective(problem, y)) {
        (Ok(p), Ok(d)) => (p, d, p - d),
        _ => (f64::NAN, f64::NAN, f64::NAN),
    }
}

/// Runs the anisotropic proximal augmented Lagrangian method from `(x0, y0)`.
///
/// Each outer step minimises `L_φ(·, y^k) + ϑ(x^k − ·)` over the domain of
/// `f` with the inner tolerance schedule of [`AlmConfig::eps0`], then applies
/// the dual update `y^{k+1} = y^k + ∇φ*(−∇φ(y^k − η*))` at the maximiser
/// `η*` of the new primal point. Inner solves that stop at their iteration
/// budget are accepted (their stationarity is recorded); hard evaluation
/// failures abort with [`Error::ResolventFailure`] carrying the outer index.
pub fn run_alm(
    problem: &SaddleProblem,
    config: &AlmConfig,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
) -> Result<AlmTrace> {
    let (n, m) = (problem.primal_dim(), problem.dual_dim());
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if y0.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: y0.len(),
        });
    }
    if config.primal_kernel.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: config.primal_kernel.dim(),
        });
    }
    if config.dual_kernel.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: config.dual_kernel.dim(),
        });
    }
    if config.eps0 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "inner tolerance schedule must start nonnegative, got {}",
            config.eps0
        )));
    }
    if config.max_outer == 0 {
        return Err(Error::InvalidParameter(
            "outer iteration budget must be positive".to_string(),
        ));
    }
    let theta_kernel = &config.primal_kernel;
    let phi_kernel = &config.dual_kernel;

    let mut x = match problem.f {
        PrimalTerm::SimplexIndicator => inner_opt::project_simplex(x0),
        PrimalTerm::ScaledSquaredNorm { .. } => x0.clone(),
    };
    let mut y = y0.clone();

    let (p0, d0, gap0) = gap_or_nan(problem, &x, &y);
    let mut records = vec![AlmRecord {
        k: 0,
        x: x.clone(),
        y: y.clone(),
        primal_value: p0,
        dual_value: d0,
        gap: gap0,
        kkt_residual: kkt_residual(problem, &x, &y),
        dual_norm: f64::NAN,
        bregman_to_zero: f64::NAN,
        inner_iters: 0,
        cum_inner: 0,
        inner_stationarity: f64::NAN,
        eps_k: f64::NAN,
    }];
    let mut stop = AlmStopReason::MaxOuter;
    let mut cum_inner = 0usize;

    let initial = records.last().unwrap();
    if config.gap_tol > 0.0 && initial.gap.is_finite() && initial.gap <= config.gap_tol {
        stop = AlmStopReason::Gap;
    } else if config.kkt_tol > 0.0 && initial.kkt_residual <= config.kkt_tol {
        stop = AlmStopReason::Kkt;
    } else {
        for k in 0..config.max_outer {
            let tol_k = config
                .solver
                .residual_tol
                .max(config.eps0 * 0.5_f64.powi(k as i32));
            let sup_tol = (tol_k * 1e-2).max(1e-14);

            let x_prev = x.clone();
            let y_k = y.clone();
            let x_anchor = x.clone();
            let subproblem = SmoothProblem {
                dim: n,
                objective: Box::new(move |xi: &DVector<f64>| {
                    let al = aug_lagrangian(problem, xi, &y_k, phi_kernel, sup_tol);
                    let step = &x_anchor - xi;
                    match (al, theta_kernel.eval(&step), theta_kernel.grad(&step)) {
                        (Ok(al), Ok(tv), Ok(tg)) => (al.value + tv, al.grad_x - tg),
                        _ => (f64::INFINITY, DVector::zeros(n)),
                    }
                }),
                constraint: problem.f.constraint(),
            };
            let report = inner_opt::minimize(&subproblem, &x, tol_k, config.inner_max_iters)
                .map_err(|e| Error::ResolventFailure {
                    iter: k,
                    source: Box::new(e),
                })?;
            let x_next = report.x;

            let al = aug_lagrangian(problem, &x_next, &y, phi_kernel, sup_tol).map_err(|e| {
                Error::ResolventFailure {
                    iter: k,
                    source: Box::new(e),
                }
            })?;
            let ascent = phi_kernel.grad(&(&y - &al.eta)).map_err(|e| {
                Error::ResolventFailure {
                    iter: k,
                    source: Box::new(e),
                }
            })?;
            let y_next = &y + phi_kernel.grad_conj(&(-ascent))?;

            let v_x = theta_kernel.grad(&(&x_prev - &x_next))?;
            let v_y = phi_kernel.grad(&(&y - &y_next))?;
            let dual_norm = (v_x.norm_squared() + v_y.norm_squared()).sqrt();
            let zero_n = DVector::zeros(n);
            let zero_m = DVector::zeros(m);
            let bregman_to_zero = theta_kernel.bregman_conj(&v_x, &zero_n)?.value
                + phi_kernel.bregman_conj(&v_y, &zero_m)?.value;

            x = x_next;
            y = y_next;
            cum_inner += report.iters;
            let (p, d, gap) = gap_or_nan(problem, &x, &y);
            let kkt = kkt_residual(problem, &x, &y);
            records.push(AlmRecord {
                k: k + 1,
                x: x.clone(),
                y: y.clone(),
                primal_value: p,
                dual_value: d,
                gap,
                kkt_residual: kkt,
                dual_norm,
                bregman_to_zero,
                inner_iters: report.iters,
                cum_inner,
                inner_stationarity: report.stationarity,
                eps_k: tol_k,
            });

            if config.gap_tol > 0.0 && gap.is_finite() && gap <= config.gap_tol {
                stop = AlmStopReason::Gap;
                break;
            }
            if config.kkt_tol > 0.0 && kkt <= config.kkt_tol {
                stop = AlmStopReason::Kkt;
                break;
            }
        }
    }

    Ok(AlmTrace {
        records,
        x_final: x,
        y_final: y,
        stop,
        primal_kernel_desc: theta_kernel.to_string(),
        dual_kernel_desc: phi_kernel.to_string(),
    })
}

/// Builds a zero-sum matrix game `min_{x∈Δ_n} max_{η∈Δ_m} ⟨η, Ax⟩` with
/// entries of `A` i.i.d. uniform on `[−5, 5]` from a seeded generator.
pub fn build_zero_sum_game(n: usize, m: usize, seed: u64) -> Result<SaddleProblem> {
    if n < 2 || m < 2 {
        return Err(Error::InvalidParameter(format!(
            "matrix game needs n, m ≥ 2, got n={n}, m={m}"
        )));
    }
    let mut rng = sampling::seeded_rng(seed);
    let a = sampling::uniform_matrix(&mut rng, m, n, -5.0, 5.0);
    SaddleProblem::new(PrimalTerm::SimplexIndicator, ConjTerm::SimplexIndicator, a)
}

/// Builds the ℓ¹-regression problem `min_x (θ/2)‖x‖² + ‖Ax − b‖₁` in saddle
/// form with `g*(η) = δ_{[−1,1]^m}(η) + ⟨b, η⟩`; entries of `A` and `b` are
/// i.i.d. uniform on `[−5, 5]` from a seeded generator.
pub fn build_l1_regression(n: usize, m: usize, theta: f64, seed: u64) -> Result<SaddleProblem> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Tikhonov weight must be positive, got {theta}"
        )));
    }
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "regression dimensions must be positive".to_string(),
        ));
    }
    let mut rng = sampling::seeded_rng(seed);
    let a = sampling::uniform_matrix(&mut rng, m, n, -5.0, 5.0);
    let b = sampling::uniform_vector(&mut rng, m, -5.0, 5.0);
    SaddleProblem::new(
        PrimalTerm::ScaledSquaredNorm { theta },
        ConjTerm::BoxPlusLinear { b },
        a,
    )
}

/// Measures the worst componentwise deviation over `iters` steps between
/// [`run_alm`] on `problem` and [`run_ppa`](ppa::run_ppa) on the saddle
/// operator under the block kernel `ϑ ⊕ φ`.
///
/// Requires a smooth-plus-equality problem (so the saddle operator exists)
/// and primal/dual kernels from the same family, so that the block kernel is
/// again a single [`ProxKernel`] over `ℝ^{n+m}`.
pub fn alm_as_ppa_gap(
    problem: &SaddleProblem,
    config: &AlmConfig,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
    iters: usize,
) -> Result<f64> {
    if !config.primal_kernel.same_family(&config.dual_kernel) {
        return Err(Error::InvalidParameter(
            "block kernel requires primal and dual kernels from the same family".to_string(),
        ));
    }
    let (n, m) = (problem.primal_dim(), problem.dual_dim());
    let op = problem.saddle_operator()?;
    let joint_kernel = config.primal_kernel.redim(n + m)?;

    let mut alm_config = config.clone();
    alm_config.max_outer = iters;
    alm_config.gap_tol = 0.0;
    alm_config.kkt_tol = 0.0;
    let alm_trace = run_alm(problem, &alm_config, x0, y0)?;

    let mut ppa_config = PpaConfig::new(joint_kernel);
    ppa_config.max_outer = iters;
    ppa_config.dual_norm_tol = 0.0;
    ppa_config.solver = config.solver;
    let mut w0 = DVector::zeros(n + m);
    w0.rows_mut(0, n).copy_from(x0);
    w0.rows_mut(n, m).copy_from(y0);
    let ppa_trace = ppa::run_ppa(&op, &ppa_config, &w0)?;

    // The proximal-point trace records the base point of each step
    // (k = 0..iters−1) with the last iterate in `x_final`; the Lagrangian
    // trace records every iterate including the initial one.
    if alm_trace.records.len() < iters + 1 || ppa_trace.records.len() < iters {
        return Err(Error::InsufficientData {
            usable: ppa_trace.records.len().min(alm_trace.records.len()),
            needed: iters,
        });
    }
    let mut worst = 0.0_f64;
    let mut compare = |ar: &AlmRecord, px: &DVector<f64>| {
        for i in 0..n {
            worst = worst.max((ar.x[i] - px[i]).abs());
        }
        for j in 0..m {
            worst = worst.max((ar.y[j] - px[n + j]).abs());
        }
    };
    for (ar, pr) in alm_trace.records.iter().zip(ppa_trace.records.iter()) {
        compare(ar, &pr.x);
    }
    compare(&alm_trace.records[iters], &ppa_trace.x_final);
    Ok(worst)
}
