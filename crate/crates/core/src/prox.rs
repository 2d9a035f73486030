//! Legendre prox-kernels and their Bregman calculus.
//!
//! A prox-kernel `φ` here is a Legendre function (essentially smooth, strictly
//! convex) that is super-coercive and normalised so that `φ(0) = 0` and
//! `∇φ(0) = 0`. Its convex conjugate `φ*` is then Legendre with full domain, and
//! the gradient maps `∇φ` and `∇φ*` are mutually inverse bijections. Four
//! families are provided:
//!
//! * [`KernelKind::SeparablePower`] — `φ(x) = (1/p) Σᵢ |xᵢ|^p`, `p > 1`;
//! * [`KernelKind::IsotropicPower`] — `φ(x) = (1/p) ‖x‖₂^p`, `p > 1`;
//! * [`KernelKind::Cosh`] — `φ(x) = Σᵢ (cosh(xᵢ) − 1)`;
//! * [`KernelKind::ExpPenalty`] — `φ(x) = Σᵢ ρ (exp(|xᵢ|) − |xᵢ| − 1)`, `ρ > 0`.
//!
//! All four are sign-symmetric (`φ(−x) = φ(x)`), so their conjugate gradients are
//! odd maps. Each kernel also carries an *epi-scaling* parameter `λ > 0`
//! implementing `(λ ★ φ)(x) = λ φ(x/λ)`; the key identities are
//! `(λ ★ φ)* = λ φ*`, `∇(λ ★ φ)(x) = ∇φ(x/λ)` and `∇(λ ★ φ)*(v) = λ ∇φ*(v)`.
//! Epi-scaling is what turns a relaxed proximal step into an unrelaxed step on a
//! Yosida-regularised operator, so it appears throughout the resolvent calculus.
//!
//! Bregman distances are taken primarily in the dual: `D_{φ*}(u, v) = φ*(u) −
//! φ*(v) − ⟨∇φ*(v), u − v⟩`. The duality `D_{φ*}(∇φ(x), ∇φ(y)) = D_φ(y, x)`
//! (note the swap) and the three-point expansion implemented by
//! [`ProxKernel::three_point_residual`] are the identities the outer-loop
//! convergence diagnostics rest on.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// The kernel families supported by this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    /// `φ(x) = (1/p) Σ |xᵢ|^p` with `p > 1`; fully separable, conjugate exponent
    /// `q = p/(p−1)`.
    SeparablePower { p: f64 },
    /// `φ(x) = (1/p) ‖x‖₂^p` with `p > 1`; rotationally invariant, conjugate
    /// `φ*(v) = (1/q) ‖v‖₂^q`. For `p ≠ 2` the gradient maps are not separable
    /// and their Jacobians are singular or unbounded at the origin.
    IsotropicPower { p: f64 },
    /// `φ(x) = Σ (cosh(xᵢ) − 1)`; conjugate `φ*(v) = Σ (vᵢ asinh(vᵢ) − √(1+vᵢ²) + 1)`.
    Cosh,
    /// `φ(x) = Σ ρ (exp(|xᵢ|) − |xᵢ| − 1)` with `ρ > 0`; conjugate
    /// `φ*(v) = Σ ((|vᵢ|+ρ) ln(1+|vᵢ|/ρ) − |vᵢ|)`, with the closed-form inverse
    /// gradient `∇φ*(v)ᵢ = sign(vᵢ) ln(1 + |vᵢ|/ρ)`.
    ExpPenalty { rho: f64 },
}

/// A nonnegative Bregman distance value.
///
/// Values are clamped at zero when floating-point cancellation produces a tiny
/// negative (more negative results indicate a genuine convexity violation and are
/// passed through so that tests can catch them).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BregmanDistanceValue {
    pub value: f64,
}

impl BregmanDistanceValue {
    fn new(raw: f64, scale: f64) -> Self {
        let tol = 1e-9 * scale.max(1.0);
        let value = if raw < 0.0 && raw > -tol { 0.0 } else { raw };
        BregmanDistanceValue { value }
    }
}

/// Jacobian of a kernel gradient map (`∇φ` or `∇φ*`) at a point, as consumed
/// by Newton-type resolvent solvers.
#[derive(Debug, Clone)]
pub enum KernelJacobian {
    /// Separable kernel: the Jacobian is `diag(d)`.
    Diagonal(DVector<f64>),
    /// Isotropic kernel: the Jacobian is `a·I + b·v vᵀ`.
    Rank1Update { a: f64, b: f64, v: DVector<f64> },
    /// The Jacobian does not exist (or is unbounded) at the queried point; the
    /// caller must fall back to a derivative-free damped step.
    Unavailable,
}

impl KernelJacobian {
    /// Materialises the Jacobian as a dense matrix, if it exists.
    pub fn to_matrix(&self, dim: usize) -> Option<DMatrix<f64>> {
        match self {
            KernelJacobian::Diagonal(d) => Some(DMatrix::from_diagonal(d)),
            KernelJacobian::Rank1Update { a, b, v } => {
                let mut m = DMatrix::identity(dim, dim) * *a;
                m.ger(*b, v, v, 1.0);
                Some(m)
            }
            KernelJacobian::Unavailable => None,
        }
    }
}

/// A Legendre prox-kernel with an epi-scaling factor.
///
/// `ProxKernel` values are cheap to clone and immutable; every evaluation method
/// validates dimensions and finiteness and returns [`Error`] on violation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxKernel {
    kind: KernelKind,
    dim: usize,
    scale: f64,
}

impl std::fmt::Display for ProxKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            KernelKind::SeparablePower { p } => write!(f, "sep_power:p={p}")?,
            KernelKind::IsotropicPower { p } => write!(f, "iso_power:p={p}")?,
            KernelKind::Cosh => write!(f, "cosh")?,
            KernelKind::ExpPenalty { rho } => write!(f, "exp:rho={rho}")?,
        }
        if self.scale != 1.0 {
            write!(f, ":scale={}", self.scale)?;
        }
        Ok(())
    }
}

fn check_finite(v: &DVector<f64>, what: &'static str) -> Result<()> {
    if v.iter().all(|t| t.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

impl ProxKernel {
    /// Creates a kernel, validating its parameters (`p > 1`, `ρ > 0`).
    pub fn new(kind: KernelKind, dim: usize) -> Result<Self> {
        match kind {
            KernelKind::SeparablePower { p } | KernelKind::IsotropicPower { p } => {
                if !(p.is_finite() && p > 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "power kernel exponent must satisfy p > 1, got {p}"
                    )));
                }
            }
            KernelKind::ExpPenalty { rho } => {
                if !(rho.is_finite() && rho > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "exp kernel weight must satisfy rho > 0, got {rho}"
                    )));
                }
            }
            KernelKind::Cosh => {}
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("kernel dimension must be positive".into()));
        }
        Ok(ProxKernel { kind, dim, scale: 1.0 })
    }

    /// Convenience constructor for the separable power kernel.
    pub fn separable_power(p: f64, dim: usize) -> Result<Self> {
        Self::new(KernelKind::SeparablePower { p }, dim)
    }

    /// Convenience constructor for the isotropic power kernel.
    pub fn isotropic_power(p: f64, dim: usize) -> Result<Self> {
        Self::new(KernelKind::IsotropicPower { p }, dim)
    }

    /// Convenience constructor for the hyperbolic-cosine kernel.
    pub fn cosh(dim: usize) -> Result<Self> {
        Self::new(KernelKind::Cosh, dim)
    }

    /// Convenience constructor for the exponential-penalty kernel.
    pub fn exp_penalty(rho: f64, dim: usize) -> Result<Self> {
        Self::new(KernelKind::ExpPenalty { rho }, dim)
    }

    /// The Euclidean kernel `½‖·‖²` (power `p = 2`; separable and isotropic agree).
    pub fn euclidean(dim: usize) -> Self {
        ProxKernel {
            kind: KernelKind::SeparablePower { p: 2.0 },
            dim,
            scale: 1.0,
        }
    }

    /// Returns a copy epi-scaled by `λ > 0`: `(λ ★ φ)(x) = λ φ(x/λ)`.
    ///
    /// Scaling composes multiplicatively with any scale already present.
    pub fn epi_scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epi-scaling factor must be positive, got {lambda}"
            )));
        }
        Ok(ProxKernel {
            kind: self.kind,
            dim: self.dim,
            scale: self.scale * lambda,
        })
    }

    /// Parses a kernel spec string such as `sep_power:p=4`, `iso_power:p=3`,
    /// `cosh`, `exp:rho=0.01`, each optionally suffixed with `:scale=λ`.
    pub fn parse(spec: &str, dim: usize) -> Result<Self> {
        let err = |reason: &str| Error::ParseSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let mut parts = spec.trim().split(':');
        let head = parts.next().ok_or_else(|| err("empty spec"))?.trim();
        let mut p: Option<f64> = None;
        let mut rho: Option<f64> = None;
        let mut scale: f64 = 1.0;
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| err("expected key=value segment"))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| err(&format!("cannot parse numeric value in `{part}`")))?;
            match key.trim() {
                "p" => p = Some(value),
                "rho" => rho = Some(value),
                "scale" => scale = value,
                other => return Err(err(&format!("unknown key `{other}`"))),
            }
        }
        let kind = match head {
            "sep_power" => KernelKind::SeparablePower {
                p: p.ok_or_else(|| err("sep_power requires p="))?,
            },
            "iso_power" => KernelKind::IsotropicPower {
                p: p.ok_or_else(|| err("iso_power requires p="))?,
            },
            "cosh" => KernelKind::Cosh,
            "exp" => KernelKind::ExpPenalty {
                rho: rho.ok_or_else(|| err("exp requires rho="))?,
            },
            other => return Err(err(&format!("unknown kernel kind `{other}`"))),
        };
        ProxKernel::new(kind, dim)?.epi_scaled(scale)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The epi-scaling factor `λ` (1 for an unscaled kernel).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `true` when `φ` is a sum of scalar functions of the coordinates.
    pub fn is_separable(&self) -> bool {
        matches!(
            self.kind,
            KernelKind::SeparablePower { .. } | KernelKind::Cosh | KernelKind::ExpPenalty { .. }
        )
    }

    /// Whether `∇φ` is continuously differentiable on all of ℝⁿ. Power kernels
    /// with `p < 2` have an unbounded Hessian at the origin (their conjugate
    /// gradient `∇φ*` is the globally smooth map instead, since `q > 2`).
    pub fn primal_smooth(&self) -> bool {
        match self.kind {
            KernelKind::SeparablePower { p } | KernelKind::IsotropicPower { p } => p >= 2.0,
            KernelKind::Cosh | KernelKind::ExpPenalty { .. } => true,
        }
    }

    /// Whether two kernels share kind, parameters, and epi-scale (only the
    /// dimension may differ). A separable kernel applied block-wise to a
    /// concatenated vector equals the same-family kernel on the full vector,
    /// which is what makes block-diagonal preconditioning collapse to a single
    /// kernel.
    pub fn same_family(&self, other: &ProxKernel) -> bool {
        self.kind == other.kind && self.scale == other.scale
    }

    /// The same kernel on a space of a different dimension.
    pub fn redim(&self, dim: usize) -> Result<Self> {
        let mut k = ProxKernel::new(self.kind, dim)?;
        k.scale = self.scale;
        Ok(k)
    }

    /// The primal power `p` for power kernels.
    pub fn primal_exponent(&self) -> Option<f64> {
        match self.kind {
            KernelKind::SeparablePower { p } | KernelKind::IsotropicPower { p } => Some(p),
            _ => None,
        }
    }

    /// The conjugate power `q = p/(p−1)` for power kernels.
    pub fn conjugate_exponent(&self) -> Option<f64> {
        self.primal_exponent().map(|p| p / (p - 1.0))
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            })
        }
    }

    // ---- scalar pieces (unscaled base kernel, separable kinds only) ----

    fn scalar_eval(&self, t: f64) -> f64 {
        match self.kind {
            KernelKind::SeparablePower { p } => t.abs().powf(p) / p,
            // cosh(t) − 1 = 2 sinh²(t/2) avoids cancellation near 0
            KernelKind::Cosh => 2.0 * (t / 2.0).sinh().powi(2),
            // exp(|t|) − |t| − 1 = Σ_{k≥2} |t|^k/k!; the explicit series is used
            // for small |t| where subtracting |t| from exp_m1 would cancel
            KernelKind::ExpPenalty { rho } => {
                let a = t.abs();
                if a <= 0.01 {
                    let mut term = a * a / 2.0;
                    let mut sum = 0.0;
                    for k in 2..12 {
                        sum += term;
                        term *= a / (k as f64 + 1.0);
                    }
                    rho * sum
                } else {
                    rho * (a.exp_m1() - a)
                }
            }
            KernelKind::IsotropicPower { .. } => unreachable!("isotropic kernel is not separable"),
        }
    }

    fn scalar_grad(&self, t: f64) -> f64 {
        match self.kind {
            KernelKind::SeparablePower { p } => t.signum() * t.abs().powf(p - 1.0),
            KernelKind::Cosh => t.sinh(),
            KernelKind::ExpPenalty { rho } => t.signum() * rho * t.abs().exp_m1(),
            KernelKind::IsotropicPower { .. } => unreachable!("isotropic kernel is not separable"),
        }
    }

    fn scalar_conj_eval(&self, v: f64) -> f64 {
        match self.kind {
            KernelKind::SeparablePower { p } => {
                let q = p / (p - 1.0);
                v.abs().powf(q) / q
            }
            // v asinh(v) − (√(1+v²) − 1); the parenthesised term is computed as
            // v²/(1 + √(1+v²)) to avoid cancellation for small v
            KernelKind::Cosh => {
                let s = (1.0 + v * v).sqrt();
                v * v.asinh() - v * v / (1.0 + s)
            }
            // ρ [(1+u) ln(1+u) − u] with u = |v|/ρ; for small u the bracket is
            // Σ_{k≥2} (−1)^k u^k/(k(k−1)), used directly to avoid cancellation
            KernelKind::ExpPenalty { rho } => {
                let u = v.abs() / rho;
                if u <= 0.01 {
                    let mut term = u * u / 2.0;
                    let mut sum = 0.0;
                    for k in 2..12 {
                        sum += term;
                        term *= -u * (k as f64 - 1.0) / (k as f64 + 1.0);
                    }
                    rho * sum
                } else {
                    rho * ((1.0 + u) * u.ln_1p() - u)
                }
            }
            KernelKind::IsotropicPower { .. } => unreachable!("isotropic kernel is not separable"),
        }
    }

    fn scalar_conj_grad(&self, v: f64) -> f64 {
        match self.kind {
            KernelKind::SeparablePower { p } => {
                let q = p / (p - 1.0);
                v.signum() * v.abs().powf(q - 1.0)
            }
            KernelKind::Cosh => v.asinh(),
            KernelKind::ExpPenalty { rho } => v.signum() * (v.abs() / rho).ln_1p(),
            KernelKind::IsotropicPower { .. } => unreachable!("isotropic kernel is not separable"),
        }
    }

    /// Derivative of the scalar gradient, `φ''` per coordinate. Returns `None`
    /// where it is undefined or unbounded (zero argument with power `p < 2`).
    fn scalar_grad_deriv(&self, t: f64) -> Option<f64> {
        match self.kind {
            KernelKind::SeparablePower { p } => {
                if (p - 2.0).abs() < 1e-15 {
                    Some(1.0)
                } else if t == 0.0 {
                    // |t|^{p−2}: zero for p > 2, unbounded for p < 2
                    if p > 2.0 {
                        Some(0.0)
                    } else {
                        None
                    }
                } else {
                    Some((p - 1.0) * t.abs().powf(p - 2.0))
                }
            }
            KernelKind::Cosh => Some(t.cosh()),
            KernelKind::ExpPenalty { rho } => Some(rho * t.abs().exp()),
            KernelKind::IsotropicPower { .. } => unreachable!("isotropic kernel is not separable"),
        }
    }

    /// Derivative of the scalar conjugate gradient, `(φ*)''` per coordinate.
    /// Returns `None` where it is undefined or unbounded.
    fn scalar_conj_grad_deriv(&self, v: f64) -> Option<f64> {
        match self.kind {
            KernelKind::SeparablePower { p } => {
                let q = p / (p - 1.0);
                if (q - 2.0).abs() < 1e-15 {
                    Some(1.0)
                } else if v == 0.0 {
                    // |v|^{q−2}: zero for q > 2, unbounded for q < 2
                    if q > 2.0 {
                        Some(0.0)
                    } else {
                        None
                    }
                } else {
                    Some((q - 1.0) * v.abs().powf(q - 2.0))
                }
            }
            KernelKind::Cosh => Some(1.0 / (1.0 + v * v).sqrt()),
            KernelKind::ExpPenalty { rho } => Some(1.0 / (rho + v.abs())),
            KernelKind::IsotropicPower { .. } => unreachable!("isotropic kernel is not separable"),
        }
    }

    // ---- scalar views with epi-scaling, for per-coordinate solvers ----

    /// Scalar `∇φ` for separable kernels: `φ_s'(t/λ)`.
    ///
    /// # Panics
    /// Panics if the kernel is not separable; guard with [`Self::is_separable`].
    pub(crate) fn grad_coord(&self, t: f64) -> f64 {
        self.scalar_grad(t / self.scale)
    }

    /// Scalar `∇φ*` for separable kernels: `λ (φ_s*)'(v)`.
    pub(crate) fn grad_conj_coord(&self, v: f64) -> f64 {
        self.scale * self.scalar_conj_grad(v)
    }

    /// Scalar `(∇φ*)'` for separable kernels, `None` at nonsmooth points.
    pub(crate) fn grad_conj_deriv_coord(&self, v: f64) -> Option<f64> {
        self.scalar_conj_grad_deriv(v).map(|d| self.scale * d)
    }

    /// Scalar `(∇φ)'` for separable kernels: `φ_s''(t/λ)/λ`, `None` at
    /// nonsmooth points.
    pub(crate) fn grad_deriv_coord(&self, t: f64) -> Option<f64> {
        self.scalar_grad_deriv(t / self.scale).map(|d| d / self.scale)
    }

    // ---- vector evaluations (epi-scaled) ----

    /// Evaluates `φ(x)` (with epi-scaling: `λ φ(x/λ)`).
    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        check_finite(x, "kernel argument")?;
        let s = self.scale;
        let value = match self.kind {
            KernelKind::IsotropicPower { p } => s * (x.norm() / s).powf(p) / p,
            _ => s * x.iter().map(|&t| self.scalar_eval(t / s)).sum::<f64>(),
        };
        Ok(value)
    }

    /// Evaluates the conjugate `φ*(v)` (with epi-scaling: `λ φ*(v)`).
    pub fn conjugate(&self, v: &DVector<f64>) -> Result<f64> {
        self.check_dim(v)?;
        check_finite(v, "conjugate argument")?;
        let s = self.scale;
        let value = match self.kind {
            KernelKind::IsotropicPower { p } => {
                let q = p / (p - 1.0);
                s * v.norm().powf(q) / q
            }
            _ => s * v.iter().map(|&t| self.scalar_conj_eval(t)).sum::<f64>(),
        };
        Ok(value)
    }

    /// Evaluates `∇φ(x)` (with epi-scaling: `∇φ(x/λ)`).
    pub fn grad(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x)?;
        check_finite(x, "kernel argument")?;
        let s = self.scale;
        let g = match self.kind {
            KernelKind::IsotropicPower { p } => {
                let y = x / s;
                let n = y.norm();
                if n == 0.0 {
                    DVector::zeros(self.dim)
                } else {
                    y * n.powf(p - 2.0)
                }
            }
            _ => x.map(|t| self.scalar_grad(t / s)),
        };
        Ok(g)
    }

    /// Evaluates `∇φ*(v)` (with epi-scaling: `λ ∇φ*(v)`).
    pub fn grad_conj(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(v)?;
        check_finite(v, "conjugate argument")?;
        let s = self.scale;
        let g = match self.kind {
            KernelKind::IsotropicPower { p } => {
                let q = p / (p - 1.0);
                let n = v.norm();
                if n == 0.0 {
                    DVector::zeros(self.dim)
                } else {
                    v * (s * n.powf(q - 2.0))
                }
            }
            _ => v.map(|t| s * self.scalar_conj_grad(t)),
        };
        Ok(g)
    }

    /// Jacobian of the (epi-scaled) primal gradient `∇φ` at `x`, i.e. the
    /// Hessian `∇²φ(x/λ)/λ`, for Newton solvers. [`KernelJacobian::Unavailable`]
    /// marks nonsmooth points: the origin of an isotropic kernel with `p < 2`,
    /// or any zero coordinate of a separable power kernel with `p < 2`.
    pub fn grad_jacobian(&self, x: &DVector<f64>) -> Result<KernelJacobian> {
        self.check_dim(x)?;
        check_finite(x, "kernel argument")?;
        let s = self.scale;
        let jac = match self.kind {
            KernelKind::IsotropicPower { p } => {
                let y = x / s;
                let n = y.norm();
                if (p - 2.0).abs() < 1e-15 {
                    KernelJacobian::Diagonal(DVector::from_element(self.dim, 1.0 / s))
                } else if n == 0.0 {
                    // ∇²φ ~ ‖y‖^{p−2}: vanishes for p > 2, unbounded for p < 2
                    if p > 2.0 {
                        KernelJacobian::Diagonal(DVector::zeros(self.dim))
                    } else {
                        KernelJacobian::Unavailable
                    }
                } else {
                    // ∇²φ(y) = ‖y‖^{p−2} I + (p−2) ‖y‖^{p−4} y yᵀ
                    KernelJacobian::Rank1Update {
                        a: n.powf(p - 2.0) / s,
                        b: (p - 2.0) * n.powf(p - 4.0) / s,
                        v: y,
                    }
                }
            }
            _ => {
                let mut d = DVector::zeros(self.dim);
                for (i, &t) in x.iter().enumerate() {
                    match self.scalar_grad_deriv(t / s) {
                        Some(dd) => d[i] = dd / s,
                        None => return Ok(KernelJacobian::Unavailable),
                    }
                }
                KernelJacobian::Diagonal(d)
            }
        };
        Ok(jac)
    }

    /// Jacobian of the (epi-scaled) conjugate gradient `∇φ*` at `v`, for Newton
    /// solvers. [`KernelJacobian::Unavailable`] marks nonsmooth points: the
    /// origin of an isotropic kernel with `p ≠ 2`, or any zero coordinate of a
    /// separable power kernel with `p > 2`.
    pub fn conj_grad_jacobian(&self, v: &DVector<f64>) -> Result<KernelJacobian> {
        self.check_dim(v)?;
        check_finite(v, "conjugate argument")?;
        let s = self.scale;
        let jac = match self.kind {
            KernelKind::IsotropicPower { p } => {
                let q = p / (p - 1.0);
                let n = v.norm();
                if (q - 2.0).abs() < 1e-15 {
                    KernelJacobian::Diagonal(DVector::from_element(self.dim, s))
                } else if n == 0.0 {
                    KernelJacobian::Unavailable
                } else {
                    // ∇²φ*(v) = ‖v‖^{q−2} I + (q−2) ‖v‖^{q−4} v vᵀ
                    KernelJacobian::Rank1Update {
                        a: s * n.powf(q - 2.0),
                        b: s * (q - 2.0) * n.powf(q - 4.0),
                        v: v.clone(),
                    }
                }
            }
            _ => {
                let mut d = DVector::zeros(self.dim);
                for (i, &t) in v.iter().enumerate() {
                    match self.scalar_conj_grad_deriv(t) {
                        Some(dd) => d[i] = s * dd,
                        None => return Ok(KernelJacobian::Unavailable),
                    }
                }
                KernelJacobian::Diagonal(d)
            }
        };
        Ok(jac)
    }

    // ---- Bregman calculus ----

    /// Primal Bregman distance `D_φ(x, y) = φ(x) − φ(y) − ⟨∇φ(y), x − y⟩`.
    pub fn bregman(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<BregmanDistanceValue> {
        let fx = self.eval(x)?;
        let fy = self.eval(y)?;
        let gy = self.grad(y)?;
        let raw = fx - fy - gy.dot(&(x - y));
        Ok(BregmanDistanceValue::new(
            raw,
            fx.abs() + fy.abs() + gy.norm() * (x - y).norm(),
        ))
    }

    /// Dual Bregman distance `D_{φ*}(u, v) = φ*(u) − φ*(v) − ⟨∇φ*(v), u − v⟩`.
    pub fn bregman_conj(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<BregmanDistanceValue> {
        let fu = self.conjugate(u)?;
        let fv = self.conjugate(v)?;
        let gv = self.grad_conj(v)?;
        let raw = fu - fv - gv.dot(&(u - v));
        Ok(BregmanDistanceValue::new(
            raw,
            fu.abs() + fv.abs() + gv.norm() * (u - v).norm(),
        ))
    }

    /// Relative residual of the dual three-point expansion
    ///
    /// ```text
    /// D_{φ*}(w, v) = D_{φ*}(u, v) + D_{φ*}(w, u) + ⟨∇φ*(u) − ∇φ*(v), w − u⟩,
    /// ```
    ///
    /// i.e. `(lhs − rhs) / max(1, Σ |terms|)`. Identically zero in exact
    /// arithmetic for any `u, v, w`.
    pub fn three_point_residual(
        &self,
        u: &DVector<f64>,
        v: &DVector<f64>,
        w: &DVector<f64>,
    ) -> Result<f64> {
        let dwv = self.bregman_conj(w, v)?.value;
        let duv = self.bregman_conj(u, v)?.value;
        let dwu = self.bregman_conj(w, u)?.value;
        let cross = (self.grad_conj(u)? - self.grad_conj(v)?).dot(&(w - u));
        let raw = dwv - duv - dwu - cross;
        let scale = 1.0_f64.max(dwv.abs() + duv.abs() + dwu.abs() + cross.abs());
        Ok(raw / scale)
    }

    /// The norm used for dual-space stopping tests and trace columns: the ℓ_q
    /// norm with `q` the conjugate exponent for separable power kernels, and
    /// the ℓ₂ norm for isotropic and transcendental kernels (whose natural
    /// pairing is Euclidean).
    pub fn dual_norm(&self, v: &DVector<f64>) -> f64 {
        match self.kind {
            KernelKind::SeparablePower { .. } => lp_norm(v, self.conjugate_exponent().unwrap()),
            _ => v.norm(),
        }
    }
}

/// The ℓ_p norm `(Σ |xᵢ|^p)^{1/p}` for `p ≥ 1` (not restricted to integers).
pub fn lp_norm(x: &DVector<f64>, p: f64) -> f64 {
    debug_assert!(p >= 1.0);
    // rescale by the max to avoid overflow for large p
    let m = x.amax();
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * x.iter().map(|t| (t.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}
