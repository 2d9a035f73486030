//! Monotone operator descriptions, enlargements, and Yosida-type envelopes.
//!
//! An [`OperatorSpec`] is an immutable description of a (maximally) monotone
//! operator `T` on `ℝⁿ`, in one of six shapes: affine `T(x) = Mx − b`,
//! coordinate-wise monotone scalar maps, the subdifferential of a convex
//! function given through a smooth or projection oracle, the saddle operator of
//! a convex-concave Lagrangian, the inverse of an affine operator, and the
//! anisotropic Yosida envelope `T_ρ = (ρ ∇φ* + T⁻¹)⁻¹`. All shapes compose with
//! the resolvent solvers; single-valued shapes also support direct evaluation.
//!
//! Beyond evaluation, the module provides the two probes the convergence theory
//! leans on:
//!
//! * [`check_enlargement_member`] — membership of `u` in the ε-enlargement
//!   `T^e(ε, x) = {u : ⟨y − x, v − u⟩ ≥ −ε for all (y, v) ∈ gph T}`, decided in
//!   closed form for affine `T` by minimising a convex quadratic;
//! * [`probe_nonmonotonicity`] — the smallest pairing
//!   `⟨∇φ*(T x) − ∇φ*(T y), x − y⟩` over a list of pairs, which certifies that a
//!   composition `∇φ* ∘ T` fails to be monotone whenever the result is negative.

use crate::inner_opt::Constraint;
use crate::prox::ProxKernel;
use crate::resolvents::{self, SolverTolerances};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// A smooth convex function given by value and gradient oracles.
pub trait SmoothOracle: Send + Sync {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn grad(&self, x: &DVector<f64>) -> DVector<f64>;
}

/// `(θ/2) ‖x‖²`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    pub theta: f64,
}

impl SmoothOracle for QuadraticObjective {
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * self.theta * x.norm_squared()
    }
    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        x * self.theta
    }
}

/// `⟨c, x⟩`.
#[derive(Debug, Clone)]
pub struct LinearObjective {
    pub c: DVector<f64>,
}

impl SmoothOracle for LinearObjective {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.c.dot(x)
    }
    fn grad(&self, _x: &DVector<f64>) -> DVector<f64> {
        self.c.clone()
    }
}

/// A nondecreasing scalar map for [`OperatorKind::Diagonal`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarMap {
    /// `t ↦ slope·t − offset` with `slope ≥ 0`.
    Linear { slope: f64, offset: f64 },
    /// `t ↦ sign(t) |t|^γ` with `γ > 0`.
    OddPower { gamma: f64 },
    /// `t ↦ eᵗ − 1`.
    ExpM1,
}

impl ScalarMap {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ScalarMap::Linear { slope, offset } => slope * t - offset,
            ScalarMap::OddPower { gamma } => t.signum() * t.abs().powf(gamma),
            ScalarMap::ExpM1 => t.exp_m1(),
        }
    }

    /// Derivative, `None` where unbounded (`OddPower` with `γ < 1` at 0).
    pub fn deriv(&self, t: f64) -> Option<f64> {
        match *self {
            ScalarMap::Linear { slope, .. } => Some(slope),
            ScalarMap::OddPower { gamma } => {
                if (gamma - 1.0).abs() < 1e-15 {
                    Some(1.0)
                } else if t == 0.0 {
                    if gamma > 1.0 {
                        Some(0.0)
                    } else {
                        None
                    }
                } else {
                    Some(gamma * t.abs().powf(gamma - 1.0))
                }
            }
            ScalarMap::ExpM1 => Some(t.exp()),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ScalarMap::Linear { slope, .. } if slope < 0.0 => Err(Error::InvalidParameter(
                format!("diagonal map slope must be nonnegative, got {slope}"),
            )),
            ScalarMap::OddPower { gamma } if !(gamma.is_finite() && gamma > 0.0) => {
                Err(Error::InvalidParameter(format!(
                    "odd power exponent must be positive, got {gamma}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Oracle backing a subdifferential operator `T = ∂f`.
#[derive(Clone)]
pub enum SubdiffOracle {
    /// `f` smooth: `T` is single-valued with `T(x) = ∇f(x)`.
    Smooth(Arc<dyn SmoothOracle>),
    /// `f` the indicator of a projectable set: `T` is the normal cone map.
    Projection(Constraint),
}

/// The operator shapes supported by the crate.
#[derive(Clone)]
pub enum OperatorKind {
    /// `T(x) = M x − b` with `M + Mᵀ ⪰ 0`.
    Affine { m: DMatrix<f64>, b: DVector<f64> },
    /// `T(x)ᵢ = mapᵢ(xᵢ)` with each map nondecreasing.
    Diagonal { maps: Vec<ScalarMap> },
    /// `T = ∂f`.
    Subdifferential { oracle: SubdiffOracle },
    /// The saddle operator `T(x, y) = (∇f(x) + Aᵀ y, ∇g*(y) − A x)` of the
    /// Lagrangian `f(x) + ⟨y, Ax⟩ − g*(y)`, for smooth `f` and `g*`.
    Saddle {
        f: Arc<dyn SmoothOracle>,
        gstar: Arc<dyn SmoothOracle>,
        a: DMatrix<f64>,
    },
    /// `T⁻¹` of an affine operator (requires `M` nonsingular for evaluation).
    Inverse { inner: Box<OperatorSpec> },
    /// The anisotropic Yosida envelope `T_ρ = (ρ ∇φ* + T⁻¹)⁻¹`; evaluation
    /// solves `v = T(x − ρ ∇φ*(v))` through the resolvent of the inner
    /// operator. `ρ = 0` degenerates to the inner operator itself.
    Yosida {
        inner: Box<OperatorSpec>,
        rho: f64,
        kernel: ProxKernel,
    },
}

/// An immutable monotone operator description with optional known-zero metadata.
#[derive(Clone)]
pub struct OperatorSpec {
    kind: OperatorKind,
    dim: usize,
    known_zero: Option<DVector<f64>>,
}

impl std::fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match &self.kind {
            OperatorKind::Affine { .. } => "Affine",
            OperatorKind::Diagonal { .. } => "Diagonal",
            OperatorKind::Subdifferential { .. } => "Subdifferential",
            OperatorKind::Saddle { .. } => "Saddle",
            OperatorKind::Inverse { .. } => "Inverse",
            OperatorKind::Yosida { .. } => "Yosida",
        };
        f.debug_struct("OperatorSpec")
            .field("kind", &name)
            .field("dim", &self.dim)
            .finish()
    }
}

/// Relative threshold under which a symmetric-part eigenvalue counts as zero.
const MONOTONE_EIG_TOL: f64 = 1e-12;

impl OperatorSpec {
    /// Builds an affine operator `T(x) = Mx − b`, validating monotonicity: the
    /// least eigenvalue of `(M + Mᵀ)/2` must be `≥ −1e−12` (scaled by the
    /// largest eigenvalue magnitude). Fails loudly otherwise.
    pub fn affine(m: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidParameter(format!(
                "affine operator matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if b.len() != m.nrows() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: b.len(),
            });
        }
        if !(m.iter().all(|t| t.is_finite()) && b.iter().all(|t| t.is_finite())) {
            return Err(Error::NonFinite("affine operator data"));
        }
        let sym = (&m + m.transpose()) * 0.5;
        let eigs = sym.symmetric_eigenvalues();
        let min_eig = eigs.min();
        let scale = eigs.amax().max(1.0);
        if min_eig < -MONOTONE_EIG_TOL * scale {
            return Err(Error::NotMonotone { min_eig });
        }
        let dim = b.len();
        Ok(OperatorSpec {
            kind: OperatorKind::Affine { m, b },
            dim,
            known_zero: None,
        })
    }

    /// The 2×2 rotation-like skew operator `T(x) = (x₂, −x₁)`, whose unique
    /// zero is the origin. The canonical witness that `∇φ* ∘ T` can lose
    /// monotonicity.
    pub fn skew2() -> Self {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        OperatorSpec {
            kind: OperatorKind::Affine { m, b: DVector::zeros(2) },
            dim: 2,
            known_zero: Some(DVector::zeros(2)),
        }
    }

    /// The 2×2 affine instance `T(x) = Ax − b` with `A = [[0, −½], [½, 0]]`,
    /// `b = (1, 1)`, whose unique zero is `x* = (2, −2)` and which satisfies the
    /// sharp growth bound `‖T(x)‖₂ = ½ ‖x − x*‖₂` everywhere.
    pub fn growth_instance_linear() -> Self {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        let b = DVector::from_vec(vec![1.0, 1.0]);
        OperatorSpec {
            kind: OperatorKind::Affine { m, b },
            dim: 2,
            known_zero: Some(DVector::from_vec(vec![2.0, -2.0])),
        }
    }

    /// The identity operator as an affine description (Newton solver path).
    pub fn identity(dim: usize) -> Self {
        OperatorSpec {
            kind: OperatorKind::Affine {
                m: DMatrix::identity(dim, dim),
                b: DVector::zeros(dim),
            },
            dim,
            known_zero: Some(DVector::zeros(dim)),
        }
    }

    /// The identity operator as a diagonal description (scalar solver path).
    pub fn identity_diagonal(dim: usize) -> Self {
        OperatorSpec {
            kind: OperatorKind::Diagonal {
                maps: vec![ScalarMap::Linear { slope: 1.0, offset: 0.0 }; dim],
            },
            dim,
            known_zero: Some(DVector::zeros(dim)),
        }
    }

    /// The zero operator.
    pub fn zero(dim: usize) -> Self {
        OperatorSpec {
            kind: OperatorKind::Affine {
                m: DMatrix::zeros(dim, dim),
                b: DVector::zeros(dim),
            },
            dim,
            known_zero: Some(DVector::zeros(dim)),
        }
    }

    /// Builds a coordinate-wise operator from nondecreasing scalar maps.
    pub fn diagonal(maps: Vec<ScalarMap>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidParameter("diagonal operator needs at least one map".into()));
        }
        for map in &maps {
            map.validate()?;
        }
        let dim = maps.len();
        Ok(OperatorSpec {
            kind: OperatorKind::Diagonal { maps },
            dim,
            known_zero: None,
        })
    }

    /// Builds `T = ∂f` from an oracle.
    pub fn subdifferential(oracle: SubdiffOracle, dim: usize) -> Self {
        OperatorSpec {
            kind: OperatorKind::Subdifferential { oracle },
            dim,
            known_zero: None,
        }
    }

    /// Builds the saddle operator of `f(x) + ⟨y, Ax⟩ − g*(y)` on `ℝⁿ⁺ᵐ` for
    /// smooth `f` and `g*`, with `A` of shape `m×n`.
    pub fn saddle(
        f: Arc<dyn SmoothOracle>,
        gstar: Arc<dyn SmoothOracle>,
        a: DMatrix<f64>,
    ) -> Self {
        let dim = a.nrows() + a.ncols();
        OperatorSpec {
            kind: OperatorKind::Saddle { f, gstar, a },
            dim,
            known_zero: None,
        }
    }

    /// Builds `T⁻¹` for affine `T`; requires `M` nonsingular (checked here, so
    /// that failures surface at construction rather than at evaluation).
    pub fn inverse(inner: OperatorSpec) -> Result<Self> {
        match &inner.kind {
            OperatorKind::Affine { m, .. } => {
                if !m.clone().lu().is_invertible() {
                    return Err(Error::SingularMatrix);
                }
            }
            _ => return Err(Error::NotAffine("inverse operator")),
        }
        let dim = inner.dim;
        Ok(OperatorSpec {
            kind: OperatorKind::Inverse { inner: Box::new(inner) },
            dim,
            known_zero: None,
        })
    }

    /// Builds the anisotropic Yosida envelope `T_ρ = (ρ ∇φ* + T⁻¹)⁻¹` with
    /// `ρ ≥ 0`. Zeros of `T` are preserved, so known-zero metadata carries over.
    pub fn yosida(inner: OperatorSpec, rho: f64, kernel: ProxKernel) -> Result<Self> {
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Yosida regularisation weight must be nonnegative, got {rho}"
            )));
        }
        if kernel.dim() != inner.dim {
            return Err(Error::DimensionMismatch {
                expected: inner.dim,
                got: kernel.dim(),
            });
        }
        let dim = inner.dim;
        let known_zero = inner.known_zero.clone();
        Ok(OperatorSpec {
            kind: OperatorKind::Yosida {
                inner: Box::new(inner),
                rho,
                kernel,
            },
            dim,
            known_zero,
        })
    }

    /// Attaches known-zero metadata (used for distance-to-solution diagnostics).
    pub fn with_known_zero(mut self, z: DVector<f64>) -> Result<Self> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        self.known_zero = Some(z);
        Ok(self)
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// A zero of the operator, when one is known analytically.
    pub fn known_zero(&self) -> Option<&DVector<f64>> {
        self.known_zero.as_ref()
    }

    /// The affine pieces `(M, b)` when this operator is affine.
    pub fn as_affine(&self) -> Option<(&DMatrix<f64>, &DVector<f64>)> {
        match &self.kind {
            OperatorKind::Affine { m, b } => Some((m, b)),
            _ => None,
        }
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            })
        }
    }

    /// Evaluates the operator where it is single-valued.
    ///
    /// Defined for affine, diagonal, smooth-subdifferential, smooth-saddle,
    /// inverse-affine and Yosida shapes; projection-backed subdifferentials
    /// return [`Error::SetValuedAt`]. Yosida evaluation solves the fixed-point
    /// inclusion `v = T(x − ρ∇φ*(v))` through the resolvent module at its
    /// default tolerances.
    pub fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.eval_with_tol(x, &SolverTolerances::default())
    }

    /// [`Self::eval`] with explicit tolerances for any implicit solves.
    pub fn eval_with_tol(&self, x: &DVector<f64>, tols: &SolverTolerances) -> Result<DVector<f64>> {
        self.check_dim(x)?;
        if !x.iter().all(|t| t.is_finite()) {
            return Err(Error::NonFinite("operator argument"));
        }
        match &self.kind {
            OperatorKind::Affine { m, b } => Ok(m * x - b),
            OperatorKind::Diagonal { maps } => {
                Ok(DVector::from_fn(self.dim, |i, _| maps[i].eval(x[i])))
            }
            OperatorKind::Subdifferential { oracle } => match oracle {
                SubdiffOracle::Smooth(f) => Ok(f.grad(x)),
                SubdiffOracle::Projection(_) => Err(Error::SetValuedAt(
                    "normal cone of an indicator; use the resolvent instead".into(),
                )),
            },
            OperatorKind::Saddle { f, gstar, a } => {
                let n = a.ncols();
                let xn = DVector::from_column_slice(&x.as_slice()[..n]);
                let ym = DVector::from_column_slice(&x.as_slice()[n..]);
                let top = f.grad(&xn) + a.transpose() * &ym;
                let bottom = gstar.grad(&ym) - a * &xn;
                let mut out = DVector::zeros(self.dim);
                out.rows_mut(0, n).copy_from(&top);
                out.rows_mut(n, self.dim - n).copy_from(&bottom);
                Ok(out)
            }
            OperatorKind::Inverse { inner } => match &inner.kind {
                OperatorKind::Affine { m, b } => m
                    .clone()
                    .lu()
                    .solve(&(x + b))
                    .ok_or(Error::SingularMatrix),
                _ => Err(Error::NotAffine("inverse evaluation")),
            },
            OperatorKind::Yosida { inner, rho, kernel } => {
                if *rho == 0.0 {
                    return inner.eval_with_tol(x, tols);
                }
                let scaled = kernel.epi_scaled(*rho)?;
                let res = resolvents::anisotropic_resolvent(inner, &scaled, x, tols)?;
                if !res.converged {
                    return Err(Error::NonConvergence {
                        residual: res.residual_norm,
                        iters: res.inner_iters,
                        tol: tols.residual_tol,
                    });
                }
                // v = ∇(ρ★φ)(x − z) ∈ T(z) is the envelope value
                Ok(res.v)
            }
        }
    }

    /// Parses an operator spec string: `skew2`, `growth_linear`,
    /// `identity:dim=N`, `zero:dim=N`, `affine:file=PATH`, or
    /// `yosida(INNER;rho=R;kernel=KERNEL)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let err = |reason: &str| Error::ParseSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("yosida(") {
            let body = rest.strip_suffix(')').ok_or_else(|| err("unbalanced parentheses"))?;
            let mut inner = None;
            let mut rho = None;
            let mut kernel_spec = None;
            for (i, part) in body.split(';').enumerate() {
                let part = part.trim();
                if i == 0 {
                    inner = Some(OperatorSpec::parse(part)?);
                } else if let Some(v) = part.strip_prefix("rho=") {
                    rho = Some(v.parse::<f64>().map_err(|_| err("cannot parse rho"))?);
                } else if let Some(v) = part.strip_prefix("kernel=") {
                    kernel_spec = Some(v.to_string());
                } else {
                    return Err(err(&format!("unknown yosida segment `{part}`")));
                }
            }
            let inner = inner.ok_or_else(|| err("yosida requires an inner operator"))?;
            let rho = rho.ok_or_else(|| err("yosida requires rho="))?;
            let kernel = ProxKernel::parse(
                &kernel_spec.ok_or_else(|| err("yosida requires kernel="))?,
                inner.dim,
            )?;
            return OperatorSpec::yosida(inner, rho, kernel);
        }
        let (head, args) = match spec.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (spec, None),
        };
        let get_dim = || -> Result<usize> {
            let args = args.ok_or_else(|| err("missing dim= argument"))?;
            let v = args
                .strip_prefix("dim=")
                .ok_or_else(|| err("expected dim=N"))?;
            v.parse().map_err(|_| err("cannot parse dimension"))
        };
        match head {
            "skew2" => Ok(OperatorSpec::skew2()),
            "growth_linear" => Ok(OperatorSpec::growth_instance_linear()),
            "identity" => Ok(OperatorSpec::identity(get_dim()?)),
            "zero" => Ok(OperatorSpec::zero(get_dim()?)),
            "affine" => {
                let args = args.ok_or_else(|| err("affine requires file=PATH"))?;
                let path = args
                    .strip_prefix("file=")
                    .ok_or_else(|| err("affine requires file=PATH"))?;
                let text = std::fs::read_to_string(path).map_err(|e| Error::ParseSpec {
                    spec: spec.to_string(),
                    reason: format!("cannot read `{path}`: {e}"),
                })?;
                parse_affine_file(&text).map_err(|reason| Error::ParseSpec {
                    spec: spec.to_string(),
                    reason,
                })?
            }
            other => Err(err(&format!("unknown operator `{other}`"))),
        }
    }
}

/// Parses the affine operator file format: whitespace-separated numbers, `#`
/// comments; first the dimension `n`, then the `n²` entries of `M` row-major,
/// then the `n` entries of `b`.
fn parse_affine_file(text: &str) -> std::result::Result<Result<OperatorSpec>, String> {
    let mut numbers = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            numbers.push(tok.parse::<f64>().map_err(|_| format!("bad token `{tok}`"))?);
        }
    }
    if numbers.is_empty() {
        return Err("empty affine file".into());
    }
    let n = numbers[0] as usize;
    if numbers[0].fract() != 0.0 || n == 0 {
        return Err(format!("first entry must be a positive dimension, got {}", numbers[0]));
    }
    if numbers.len() != 1 + n * n + n {
        return Err(format!(
            "expected {} numbers for dim {n}, got {}",
            1 + n * n + n,
            numbers.len()
        ));
    }
    let m = DMatrix::from_row_slice(n, n, &numbers[1..1 + n * n]);
    let b = DVector::from_column_slice(&numbers[1 + n * n..]);
    Ok(OperatorSpec::affine(m, b))
}

/// Result of an ε-enlargement membership check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnlargementCheck {
    /// `inf_y ⟨y − x, T(y) − u⟩`, possibly `−∞`.
    pub infimum: f64,
    /// Whether `infimum ≥ −ε`.
    pub member: bool,
}

/// Decides whether `u ∈ T^e(ε, x)` for an affine operator `T(y) = My − b` by
/// evaluating `inf_y ⟨y − x, T(y) − u⟩` in closed form.
///
/// Substituting `w = y − x` gives the convex quadratic `wᵀSw + ⟨w, r⟩` with
/// `S = (M + Mᵀ)/2` and `r = T(x) − u`. In the eigenbasis of `S` the infimum is
/// `−¼ Σ_{λᵢ>0} ⟨eᵢ, r⟩²/λᵢ`, and `−∞` exactly when `r` has a component in the
/// null space of `S`. Membership is inclusive: `u ∈ T^e(ε, x)` iff the infimum
/// is `≥ −ε`.
pub fn check_enlargement_member(
    op: &OperatorSpec,
    eps: f64,
    x: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<EnlargementCheck> {
    if eps < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "enlargement parameter must be nonnegative, got {eps}"
        )));
    }
    let (m, _) = op
        .as_affine()
        .ok_or(Error::NotAffine("enlargement membership"))?;
    op.check_dim(x)?;
    op.check_dim(u)?;
    let r = op.eval(x)? - u;
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let lam_max = eig.eigenvalues.amax().max(1.0);
    let rank_tol = 1e-12 * lam_max;
    let null_tol = 1e-9 * (1.0 + r.norm());
    let mut infimum = 0.0;
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let ri = eig.eigenvectors.column(i).dot(&r);
        if lam > rank_tol {
            infimum -= ri * ri / (4.0 * lam);
        } else if ri.abs() > null_tol {
            return Ok(EnlargementCheck {
                infimum: f64::NEG_INFINITY,
                member: false,
            });
        }
    }
    Ok(EnlargementCheck {
        infimum,
        member: infimum >= -eps,
    })
}

/// Minimum of `⟨∇φ*(T x) − ∇φ*(T y), x − y⟩` over the given pairs.
///
/// A negative result is a witness that the composition `∇φ* ∘ T` is not
/// monotone even though `T` is.
pub fn probe_nonmonotonicity(
    op: &OperatorSpec,
    kernel: &ProxKernel,
    pairs: &[(DVector<f64>, DVector<f64>)],
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("nonmonotonicity probe needs at least one pair".into()));
    }
    let mut min = f64::INFINITY;
    for (x, y) in pairs {
        let gx = kernel.grad_conj(&op.eval(x)?)?;
        let gy = kernel.grad_conj(&op.eval(y)?)?;
        min = min.min((gx - gy).dot(&(x - y)));
    }
    Ok(min)
}
