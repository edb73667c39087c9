//! Norm, entropy, and probability inequalities evaluated as certificates.
//!
//! Every check computes both sides of one inequality numerically and
//! reports a [`BoundCertificate`]: left side, right side, slack
//! `rhs - lhs`, and the error bars of each side. A certificate counts as
//! violated only when the slack is more negative than the combined error
//! bars allow, so numerical noise cannot raise false alarms; near-zero
//! slack is flagged as tight instead.
//!
//! The inequalities:
//!
//! - `thm1` (one-dimensional): `||f||_q <= (C(alpha) mu_{q,alpha}^(1/alpha))^(1/q - 1/r) ||f||_r`
//!   with `C(alpha) = (2/alpha) Gamma(1/alpha) (alpha e)^(1/alpha)`.
//! - `thm2` (any dimension): `||f||_q <= (C(n) det(Sigma_{q,b})^(1/2))^(1/q - 1/r) ||f||_r`
//!   with `C(n) = (2 pi e)^(n/2)`.
//! - `eq1` (finite measure baseline): `||f||_q <= vol(S)^(1/q - 1/r) ||f||_r`.
//! - `renyi`: `h_p <= (1/2) log det Sigma + log C(n)` (ordinary covariance
//!   for `p > 1`, escort covariance of order `p` for `p < 1`; the `p -> 1`
//!   limit is the classical Shannon bound).
//! - `renyi-pair`: `((1-q)/q) h_q <= ((1-r)/r) h_r + (1/q - 1/r) ((1/2) log det Sigma_q + log C(n))`.
//! - `tsallis`: `exp_q(S_q) <= C(n) det(Sigma)^(1/2)` (escort covariance for `q < 1`).
//! - `prob`: `P(W)^(1 + n/2 - n/(2r)) <= (C(n) det(Sigma_f)^(1/2))^(1 - 1/r) ||f I_W||_r`.
//! - `prob-sup`: `P(W) <= (C(n) det(Sigma_f)^(1/2) sup_W f)^(2/(n+2))`.
//!
//! `r = inf` is legal everywhere it appears: the exponent uses `1/inf = 0`
//! and the norm switches to the essential supremum.

use std::f64::consts::{E, PI};
use std::fmt;

use crate::density::{Density, Region};
use crate::entropy::{self, ORDER_ONE_GUARD};
use crate::error::{Error, Result};
use crate::escort::{self, CenterSpec, MomentSpec, QCovariance, ValueWithError};
use crate::integrate::EvalOpts;
use crate::special::gamma;

/// Identifier of one inequality family (also the CLI `--ineq` vocabulary
/// and the first CSV column of sweep reports).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InequalityId {
    Thm1,
    Thm2,
    Eq1,
    Renyi,
    RenyiPair,
    Tsallis,
    Prob,
    ProbSup,
}

impl InequalityId {
    pub const ALL: [InequalityId; 8] = [
        InequalityId::Thm1,
        InequalityId::Thm2,
        InequalityId::Eq1,
        InequalityId::Renyi,
        InequalityId::RenyiPair,
        InequalityId::Tsallis,
        InequalityId::Prob,
        InequalityId::ProbSup,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            InequalityId::Thm1 => "thm1",
            InequalityId::Thm2 => "thm2",
            InequalityId::Eq1 => "eq1",
            InequalityId::Renyi => "renyi",
            InequalityId::RenyiPair => "renyi-pair",
            InequalityId::Tsallis => "tsallis",
            InequalityId::Prob => "prob",
            InequalityId::ProbSup => "prob-sup",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown inequality id '{s}'")))
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters shared by the norm inequalities: `0 < q < r <= inf`, the
/// moment order `alpha` (one-dimensional checks only), and the center.
#[derive(Clone, Debug)]
pub struct BoundParams {
    pub q: f64,
    pub r: f64,
    pub alpha: Option<f64>,
    pub center: CenterSpec,
}

impl BoundParams {
    pub fn new(q: f64, r: f64) -> Self {
        Self {
            q,
            r,
            alpha: None,
            center: CenterSpec::Central,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_center(mut self, center: CenterSpec) -> Self {
        self.center = center;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0) || self.q == f64::INFINITY {
            return Err(Error::InvalidParameter(format!(
                "q must be positive and finite, got {}",
                self.q
            )));
        }
        if !(self.r > self.q) {
            return Err(Error::InvalidParameter(format!(
                "requires q < r, got q = {}, r = {}",
                self.q, self.r
            )));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0) || a == f64::INFINITY {
                return Err(Error::InvalidParameter(format!(
                    "alpha must be positive and finite, got {a}"
                )));
            }
        }
        Ok(())
    }
}

/// Input record stored on a certificate.
#[derive(Clone, Debug)]
pub struct CertificateInputs {
    pub density_label: String,
    pub dim: usize,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub alpha: Option<f64>,
}

/// One inequality evaluation: both sides, slack, error bars, verdict.
#[derive(Clone, Debug)]
pub struct BoundCertificate {
    pub inequality: InequalityId,
    pub inputs: CertificateInputs,
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_error: f64,
    pub rhs_error: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    /// `slack >= -(lhs_error + rhs_error)`.
    pub satisfied: bool,
    /// `|slack| <= 10 (lhs_error + rhs_error)`: equality within noise.
    pub tight: bool,
    pub notes: String,
}

impl BoundCertificate {
    fn build(
        inequality: InequalityId,
        inputs: CertificateInputs,
        lhs: ValueWithError,
        rhs: ValueWithError,
        notes: String,
    ) -> Self {
        let slack = rhs.value - lhs.value;
        let combined = lhs.abs_error + rhs.abs_error;
        Self {
            inequality,
            inputs,
            lhs: lhs.value,
            rhs: rhs.value,
            lhs_error: lhs.abs_error,
            rhs_error: rhs.abs_error,
            slack,
            satisfied: slack >= -combined,
            tight: slack.abs() <= 10.0 * combined,
            notes,
        }
    }
}

impl fmt::Display for BoundCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "inequality : {}", self.inequality)?;
        writeln!(f, "density    : {} (n = {})", self.inputs.density_label, self.inputs.dim)?;
        if let Some(q) = self.inputs.q {
            writeln!(f, "q          : {q}")?;
        }
        if let Some(r) = self.inputs.r {
            writeln!(f, "r          : {}", if r == f64::INFINITY { "inf".into() } else { format!("{r}") })?;
        }
        if let Some(a) = self.inputs.alpha {
            writeln!(f, "alpha      : {a}")?;
        }
        writeln!(f, "lhs        : {:.16e} (err {:.3e})", self.lhs, self.lhs_error)?;
        writeln!(f, "rhs        : {:.16e} (err {:.3e})", self.rhs, self.rhs_error)?;
        writeln!(f, "slack      : {:.16e}", self.slack)?;
        writeln!(f, "satisfied  : {}", self.satisfied)?;
        if !self.notes.is_empty() {
            writeln!(f, "notes      : {}", self.notes)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// One-dimensional constant `C(alpha) = (2/alpha) Gamma(1/alpha) (alpha e)^(1/alpha)`.
pub fn constant_1d(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    Ok(2.0 / alpha * gamma(1.0 / alpha) * (alpha * E).powf(1.0 / alpha))
}

/// Multivariate constant `C(n) = (2 pi e)^(n/2)`.
pub fn constant_nd(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    Ok((2.0 * PI * E).powf(n as f64 / 2.0))
}

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

fn inv(r: f64) -> f64 {
    if r == f64::INFINITY {
        0.0
    } else {
        1.0 / r
    }
}

/// `x^e` with first-order error propagation (`x >= 0`).
fn pow_with_error(x: ValueWithError, e: f64) -> ValueWithError {
    if x.value <= 0.0 {
        return ValueWithError {
            value: 0.0,
            abs_error: if e >= 1.0 { 0.0 } else { x.abs_error.powf(e.max(1e-12)) },
        };
    }
    let value = x.value.powf(e);
    ValueWithError {
        value,
        abs_error: e.abs() * value / x.value * x.abs_error,
    }
}

fn mul_with_error(a: ValueWithError, b: ValueWithError) -> ValueWithError {
    ValueWithError {
        value: a.value * b.value,
        abs_error: a.value.abs() * b.abs_error + b.value.abs() * a.abs_error,
    }
}

fn exact(value: f64) -> ValueWithError {
    ValueWithError {
        value,
        abs_error: 0.0,
    }
}

/// Escort covariance with the eigenvalue floor applied: any eigenvalue
/// below `1e-14 * trace` makes the bound vacuous and errors out.
fn covariance_checked(
    f: &Density,
    q: f64,
    center: &CenterSpec,
    opts: &EvalOpts,
) -> Result<QCovariance> {
    let cov = escort::q_covariance(f, q, center, opts)?;
    let floor = crate::linalg::EIGENVALUE_FLOOR * cov.matrix.trace().abs();
    if let Some(&min) = cov
        .eigenvalues
        .iter()
        .min_by(|a, b| a.total_cmp(b))
    {
        if min < floor {
            return Err(Error::SingularCovariance(format!(
                "eigenvalue {min:e} below floor {floor:e}"
            )));
        }
    }
    if cov.det <= 0.0 {
        return Err(Error::SingularCovariance(format!(
            "non-positive determinant {:e}",
            cov.det
        )));
    }
    Ok(cov)
}

fn det_sqrt(cov: &QCovariance) -> ValueWithError {
    pow_with_error(
        ValueWithError {
            value: cov.det,
            abs_error: cov.det_error,
        },
        0.5,
    )
}

fn inputs_for(f: &Density, q: Option<f64>, r: Option<f64>, alpha: Option<f64>) -> CertificateInputs {
    CertificateInputs {
        density_label: f.label().to_string(),
        dim: f.dim(),
        q,
        r,
        alpha,
    }
}

// ---------------------------------------------------------------------------
// Norm inequalities
// ---------------------------------------------------------------------------

/// One-dimensional moment-norm inequality (`thm1`).
pub fn theorem1_check(
    f: &Density,
    params: &BoundParams,
    opts: &EvalOpts,
) -> Result<BoundCertificate> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.dim(),
        });
    }
    params.validate()?;
    let alpha = params
        .alpha
        .ok_or_else(|| Error::InvalidParameter("thm1 requires alpha".into()))?;

    let moment = escort::q_moment(
        f,
        &MomentSpec {
            q: params.q,
            alpha,
            center: params.center.clone(),
        },
        opts,
    )?;
    if !(moment.value > 0.0) {
        return Err(Error::InvalidParameter(
            "q-moment is zero; the bound is vacuous".into(),
        ));
    }
    let norm_q = escort::lp_norm(f, params.q, opts)?;
    let norm_r = escort::lp_norm(f, params.r, opts)?;

    let c = constant_1d(alpha)?;
    let radius = pow_with_error(moment, 1.0 / alpha); // mu^(1/alpha)
    let base = mul_with_error(exact(c), radius);
    let exponent = 1.0 / params.q - inv(params.r);
    let factor = pow_with_error(base, exponent);
    let rhs = mul_with_error(factor, norm_r);

    Ok(BoundCertificate::build(
        InequalityId::Thm1,
        inputs_for(f, Some(params.q), Some(params.r), Some(alpha)),
        norm_q,
        rhs,
        String::new(),
    ))
}

/// Multivariate covariance-norm inequality (`thm2`).
pub fn theorem2_check(
    f: &Density,
    params: &BoundParams,
    opts: &EvalOpts,
) -> Result<BoundCertificate> {
    params.validate()?;
    let cov = covariance_checked(f, params.q, &params.center, opts)?;
    let norm_q = escort::lp_norm(f, params.q, opts)?;
    let norm_r = escort::lp_norm(f, params.r, opts)?;

    let c = constant_nd(f.dim())?;
    let base = mul_with_error(exact(c), det_sqrt(&cov));
    let exponent = 1.0 / params.q - inv(params.r);
    let factor = pow_with_error(base, exponent);
    let rhs = mul_with_error(factor, norm_r);

    Ok(BoundCertificate::build(
        InequalityId::Thm2,
        inputs_for(f, Some(params.q), Some(params.r), None),
        norm_q,
        rhs,
        String::new(),
    ))
}

/// Finite-measure baseline (`eq1`): `||f||_q <= vol(S)^(1/q - 1/r) ||f||_r`
/// on a bounded support.
pub fn finite_measure_check(
    f: &Density,
    q: f64,
    r: f64,
    opts: &EvalOpts,
) -> Result<BoundCertificate> {
    BoundParams::new(q, r).validate()?;
    let vol = f.support().volume().ok_or_else(|| {
        Error::UnboundedSupport("the finite-measure inequality needs a bounded support".into())
    })?;
    let norm_q = escort::lp_norm(f, q, opts)?;
    let norm_r = escort::lp_norm(f, r, opts)?;
    let factor = vol.powf(1.0 / q - inv(r));
    let rhs = mul_with_error(exact(factor), norm_r);
    Ok(BoundCertificate::build(
        InequalityId::Eq1,
        inputs_for(f, Some(q), Some(r), None),
        norm_q,
        rhs,
        String::new(),
    ))
}

// ---------------------------------------------------------------------------
// Entropy bounds
// ---------------------------------------------------------------------------

/// Upper bound on the Rényi entropy with a given covariance (`renyi`):
/// `h_p <= (1/2) log det Sigma + log C(n)`, where `Sigma` is the ordinary
/// central covariance for `p > 1` and the order-`p` escort covariance for
/// `0 < p < 1`.
pub fn renyi_upper_bound(f: &Density, p: f64, opts: &EvalOpts) -> Result<BoundCertificate> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "order must be positive, got {p}"
        )));
    }
    if (p - 1.0).abs() < ORDER_ONE_GUARD {
        return Err(Error::InvalidParameter(
            "order within 1e-6 of 1: use shannon_bound_check (the p -> 1 limit)".into(),
        ));
    }
    let lhs = entropy::renyi_entropy(f, p, opts)?;
    let cov_order = if p > 1.0 { 1.0 } else { p };
    let cov = covariance_checked(f, cov_order, &CenterSpec::Central, opts)?;
    let c = constant_nd(f.dim())?;
    let rhs = ValueWithError {
        value: 0.5 * cov.det.ln() + c.ln(),
        abs_error: 0.5 * cov.det_error / cov.det,
    };
    Ok(BoundCertificate::build(
        InequalityId::Renyi,
        inputs_for(f, Some(p), None, None),
        ValueWithError {
            value: lhs.value,
            abs_error: lhs.abs_error,
        },
        rhs,
        if p > 1.0 {
            "ordinary covariance".into()
        } else {
            format!("escort covariance of order {p}")
        },
    ))
}

/// The `p -> 1` limit of [`renyi_upper_bound`]: the classical upper bound
/// on the Shannon differential entropy with a given covariance.
pub fn shannon_bound_check(f: &Density, opts: &EvalOpts) -> Result<BoundCertificate> {
    let lhs = entropy::shannon_entropy(f, opts)?;
    let cov = covariance_checked(f, 1.0, &CenterSpec::Central, opts)?;
    let c = constant_nd(f.dim())?;
    let rhs = ValueWithError {
        value: 0.5 * cov.det.ln() + c.ln(),
        abs_error: 0.5 * cov.det_error / cov.det,
    };
    Ok(BoundCertificate::build(
        InequalityId::Renyi,
        inputs_for(f, Some(1.0), None, None),
        ValueWithError {
            value: lhs.value,
            abs_error: lhs.abs_error,
        },
        rhs,
        "shannon limit of the Rényi bound".into(),
    ))
}

/// Inequality between two Rényi entropies (`renyi-pair`):
/// `((1-q)/q) h_q <= ((1-r)/r) h_r + (1/q - 1/r)((1/2) log det Sigma_q + log C(n))`.
///
/// Orders within 1e-6 of 1 contribute a vanishing coefficient times the
/// (finite) Shannon entropy, i.e. zero; `r = inf` uses
/// `(1-r)/r -> -1` and `h_inf = -log ||f||_inf`.
pub fn renyi_pair_check(f: &Density, q: f64, r: f64, opts: &EvalOpts) -> Result<BoundCertificate> {
    BoundParams::new(q, r).validate()?;
    entropy::check_normalized(f, opts)?;

    let side = |order: f64| -> Result<ValueWithError> {
        if order != f64::INFINITY && (order - 1.0).abs() < ORDER_ONE_GUARD {
            return Ok(exact(0.0)); // (1-x)/x -> 0 against a finite Shannon entropy
        }
        let coef = if order == f64::INFINITY {
            -1.0
        } else {
            (1.0 - order) / order
        };
        let h = entropy::renyi_entropy(f, order, opts)?;
        Ok(ValueWithError {
            value: coef * h.value,
            abs_error: coef.abs() * h.abs_error,
        })
    };

    let lhs = side(q)?;
    let entropy_term = side(r)?;
    let cov = covariance_checked(f, q, &CenterSpec::Central, opts)?;
    let c = constant_nd(f.dim())?;
    let exponent = 1.0 / q - inv(r);
    let cov_term = ValueWithError {
        value: exponent * (0.5 * cov.det.ln() + c.ln()),
        abs_error: exponent.abs() * 0.5 * cov.det_error / cov.det,
    };
    let rhs = ValueWithError {
        value: entropy_term.value + cov_term.value,
        abs_error: entropy_term.abs_error + cov_term.abs_error,
    };

    Ok(BoundCertificate::build(
        InequalityId::RenyiPair,
        inputs_for(f, Some(q), Some(r), None),
        lhs,
        rhs,
        String::new(),
    ))
}

/// Upper bound on the q-exponential of the Tsallis entropy (`tsallis`):
/// `exp_q(S_q) <= C(n) det(Sigma)^(1/2)` with the ordinary covariance for
/// `q > 1`, the order-`q` escort covariance for `0 < q < 1`.
pub fn tsallis_bound_check(f: &Density, q: f64, opts: &EvalOpts) -> Result<BoundCertificate> {
    if !(q > 0.0) || q == f64::INFINITY {
        return Err(Error::InvalidParameter(format!(
            "order must be positive and finite, got {q}"
        )));
    }
    if (q - 1.0).abs() < ORDER_ONE_GUARD {
        return Err(Error::InvalidParameter(
            "order within 1e-6 of 1: use shannon_bound_check (the q -> 1 limit)".into(),
        ));
    }
    let s = entropy::tsallis_entropy(f, q, opts)?;
    let bracket = 1.0 + (1.0 - q) * s.value;
    if !(bracket > 0.0) {
        return Err(Error::Divergent(
            "q-exponential of the Tsallis entropy is not finite".into(),
        ));
    }
    let lhs_value = entropy::q_exp(s.value, q);
    // d exp_q(x)/dx = bracket^(q/(1-q))
    let lhs = ValueWithError {
        value: lhs_value,
        abs_error: bracket.powf(q / (1.0 - q)) * s.abs_error,
    };

    let cov_order = if q > 1.0 { 1.0 } else { q };
    let cov = covariance_checked(f, cov_order, &CenterSpec::Central, opts)?;
    let c = constant_nd(f.dim())?;
    let rhs = mul_with_error(exact(c), det_sqrt(&cov));

    Ok(BoundCertificate::build(
        InequalityId::Tsallis,
        inputs_for(f, Some(q), None, None),
        lhs,
        rhs,
        if q > 1.0 {
            "ordinary covariance".into()
        } else {
            format!("escort covariance of order {q}")
        },
    ))
}

// ---------------------------------------------------------------------------
// Probability bounds
// ---------------------------------------------------------------------------

/// Probability upper bound with a restricted norm (`prob`):
/// `P(W)^(1 + n/2 - n/(2r)) <= (C(n) det(Sigma_f)^(1/2))^(1 - 1/r) ||f I_W||_r`
/// for finite `r > 1`.
pub fn prob_bound_check(
    f: &Density,
    omega: &Region,
    r: f64,
    opts: &EvalOpts,
) -> Result<BoundCertificate> {
    if !(r > 1.0) {
        return Err(Error::InvalidParameter(format!("requires r > 1, got {r}")));
    }
    if r == f64::INFINITY {
        return Err(Error::InvalidParameter(
            "r = inf: use prob_bound_sup_check".into(),
        ));
    }
    omega.validate(f.dim())?;
    entropy::check_normalized(f, opts)?;

    let n = f.dim() as f64;
    let prob = escort::lp_norm_on(f, omega, 1.0, opts)?;
    let lhs = pow_with_error(prob, 1.0 + n / 2.0 - n / (2.0 * r));

    let cov = covariance_checked(f, 1.0, &CenterSpec::Central, opts)?;
    let c = constant_nd(f.dim())?;
    let base = mul_with_error(exact(c), det_sqrt(&cov));
    let factor = pow_with_error(base, 1.0 - 1.0 / r);
    let restricted = escort::lp_norm_on(f, omega, r, opts)?;
    let rhs = mul_with_error(factor, restricted);

    Ok(BoundCertificate::build(
        InequalityId::Prob,
        inputs_for(f, None, Some(r), None),
        lhs,
        rhs,
        String::new(),
    ))
}

/// Probability upper bound with the supremum over the region (`prob-sup`):
/// `P(W) <= (C(n) det(Sigma_f)^(1/2) sup_W f)^(2/(n+2))`.
pub fn prob_bound_sup_check(
    f: &Density,
    omega: &Region,
    opts: &EvalOpts,
) -> Result<BoundCertificate> {
    omega.validate(f.dim())?;
    entropy::check_normalized(f, opts)?;

    let prob = escort::lp_norm_on(f, omega, 1.0, opts)?;
    let cov = covariance_checked(f, 1.0, &CenterSpec::Central, opts)?;
    let c = constant_nd(f.dim())?;
    let sup = escort::ess_sup_on(f, omega, opts)?;
    let base = mul_with_error(mul_with_error(exact(c), det_sqrt(&cov)), sup);
    let n = f.dim() as f64;
    let rhs = pow_with_error(base, 2.0 / (n + 2.0));

    Ok(BoundCertificate::build(
        InequalityId::ProbSup,
        inputs_for(f, None, Some(f64::INFINITY), None),
        prob,
        rhs,
        String::new(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Side, SupportDescriptor};

    fn opts() -> EvalOpts {
        EvalOpts::default()
    }

    fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
        let scale = expected.abs().max(1e-12);
        assert!(
            ((actual - expected) / scale).abs() <= tol,
            "{what}: got {actual}, want {expected}"
        );
    }

    fn std_normal() -> Density {
        Density::gaussian_1d(0.0, 1.0).unwrap()
    }

    fn std_normal_2d() -> Density {
        Density::gaussian(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn constants() {
        // 2e
        assert_close(constant_1d(1.0).unwrap(), 5.4365636569180905, 1e-12, "C(1)");
        // sqrt(2 pi e)
        assert_close(constant_1d(2.0).unwrap(), 4.1327313541224929, 1e-12, "C(2)");
        assert_close(constant_nd(1).unwrap(), 4.1327313541224929, 1e-12, "Cn(1)");
        assert_close(constant_nd(2).unwrap(), 17.079468445347134, 1e-12, "Cn(2)");
        assert_close(constant_nd(3).unwrap(), 70.584854755831851, 1e-12, "Cn(3)");
        // consistency of the two routes at the Gaussian case
        let rel = (constant_1d(2.0).unwrap() - constant_nd(1).unwrap()).abs()
            / constant_nd(1).unwrap();
        assert!(rel < 1e-12);
        assert!(constant_1d(0.0).is_err());
        assert!(constant_nd(0).is_err());
    }

    #[test]
    fn thm1_worked_certificates() {
        // standard normal, q=1, r=2, alpha=2, central: rhs = (e/2)^(1/4)
        let c = theorem1_check(
            &std_normal(),
            &BoundParams::new(1.0, 2.0).with_alpha(2.0),
            &opts(),
        )
        .unwrap();
        assert_close(c.lhs, 1.0, 1e-7, "thm1 gauss lhs");
        assert_close(c.rhs, 1.0797323699873789, 1e-6, "thm1 gauss rhs");
        assert!(c.satisfied);

        // uniform [0,1], q=1, r=inf, alpha=2: rhs = sqrt(2 pi e / 12)
        let u = Density::uniform_box(vec![(0.0, 1.0)]).unwrap();
        let c = theorem1_check(
            &u,
            &BoundParams::new(1.0, f64::INFINITY).with_alpha(2.0),
            &opts(),
        )
        .unwrap();
        assert_close(c.lhs, 1.0, 1e-8, "thm1 uniform lhs");
        assert_close(c.rhs, 1.1930167798955139, 1e-6, "thm1 uniform rhs");
        assert!(c.satisfied);

        // exponential rate 1, q=1, r=2, alpha=1, b=0: rhs = sqrt(e)
        let e = Density::exponential(1.0).unwrap();
        let c = theorem1_check(
            &e,
            &BoundParams::new(1.0, 2.0)
                .with_alpha(1.0)
                .with_center(CenterSpec::explicit_1d(0.0)),
            &opts(),
        )
        .unwrap();
        assert_close(c.lhs, 1.0, 1e-8, "thm1 exp lhs");
        assert_close(c.rhs, 1.6487212707001281, 1e-6, "thm1 exp rhs");
        assert!(c.satisfied);
    }

    #[test]
    fn thm1_rejects_bad_orders() {
        let err = theorem1_check(
            &std_normal(),
            &BoundParams::new(2.0, 2.0).with_alpha(2.0),
            &opts(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("requires q < r"), "{err}");
        assert!(theorem1_check(&std_normal_2d(), &BoundParams::new(1.0, 2.0).with_alpha(2.0), &opts()).is_err());
    }

    #[test]
    fn thm2_worked_certificates() {
        // rhs = sqrt(e/2) for every Gaussian at q=1, r=2 (affine invariance)
        let want = 1.1658219907985621;
        let c = theorem2_check(&std_normal_2d(), &BoundParams::new(1.0, 2.0), &opts()).unwrap();
        assert_close(c.lhs, 1.0, 1e-6, "thm2 lhs");
        assert_close(c.rhs, want, 1e-6, "thm2 rhs identity cov");
        assert!(c.satisfied);

        let d = Density::gaussian(vec![0.0, 0.0], vec![vec![4.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let c = theorem2_check(&d, &BoundParams::new(1.0, 2.0), &opts()).unwrap();
        assert_close(c.rhs, want, 1e-6, "thm2 rhs diag(4,1)");
        assert!(c.satisfied);

        let err = theorem2_check(&d, &BoundParams::new(2.0, 2.0), &opts()).unwrap_err();
        assert!(err.to_string().contains("requires q < r"), "{err}");
    }

    #[test]
    fn eq1_baseline() {
        // f(x) = x on [0,1]: lhs 1/2, rhs 1/sqrt(3)
        let ramp = Density::from_fn(
            1,
            SupportDescriptor::bounded_box(vec![(0.0, 1.0)]).unwrap(),
            "ramp",
            |x| x[0],
        )
        .unwrap();
        let c = finite_measure_check(&ramp, 1.0, 2.0, &opts()).unwrap();
        assert_close(c.lhs, 0.5, 1e-9, "eq1 ramp lhs");
        assert_close(c.rhs, 0.57735026918962576, 1e-9, "eq1 ramp rhs");
        assert!(c.satisfied);

        // constant densities achieve equality
        let ind = Density::indicator_box(vec![(0.0, 4.0)]).unwrap();
        let c = finite_measure_check(&ind, 1.0, 2.0, &opts()).unwrap();
        assert_close(c.lhs, 4.0, 1e-9, "eq1 indicator lhs");
        assert_close(c.rhs, 4.0, 1e-9, "eq1 indicator rhs");
        assert!(c.satisfied && c.tight);

        let u = Density::uniform_box(vec![(0.0, 1.0)]).unwrap();
        let c = finite_measure_check(&u, 1.0, f64::INFINITY, &opts()).unwrap();
        assert_close(c.lhs, 1.0, 1e-9, "eq1 uniform lhs");
        assert_close(c.rhs, 1.0, 1e-9, "eq1 uniform rhs");

        assert!(matches!(
            finite_measure_check(&std_normal(), 1.0, 2.0, &opts()),
            Err(Error::UnboundedSupport(_))
        ));
    }

    #[test]
    fn renyi_bound_certificates() {
        let c = renyi_upper_bound(&std_normal(), 2.0, &opts()).unwrap();
        assert_close(c.lhs, 1.2655121234846454, 1e-6, "renyi p=2 lhs");
        assert_close(c.rhs, 1.4189385332046727, 1e-6, "renyi p=2 rhs");
        assert!(c.satisfied);

        // p = 1/2: escort covariance 2, rhs = (1/2) ln 2 + ln sqrt(2 pi e)
        let c = renyi_upper_bound(&std_normal(), 0.5, &opts()).unwrap();
        assert_close(c.lhs, 1.6120857137646181, 1e-6, "renyi p=0.5 lhs");
        assert_close(c.rhs, 1.7655121234846454, 1e-6, "renyi p=0.5 rhs");
        assert!(c.satisfied);

        // the Gaussian saturates the Shannon limit
        let c = shannon_bound_check(&std_normal(), &opts()).unwrap();
        assert_close(c.lhs, 1.4189385332046727, 1e-6, "shannon lhs");
        assert_close(c.rhs, 1.4189385332046727, 1e-6, "shannon rhs");
        assert!(c.slack.abs() < 1e-6);
        assert!(c.satisfied && c.tight);

        assert!(renyi_upper_bound(&std_normal(), 1.0 + 1e-9, &opts()).is_err());
    }

    #[test]
    fn renyi_pair_certificates() {
        let c = renyi_pair_check(&std_normal(), 0.5, 2.0, &opts()).unwrap();
        assert_close(c.lhs, 1.6120857137646181, 1e-6, "pair lhs");
        assert_close(c.rhs, 2.0155121234846454, 1e-6, "pair rhs");
        assert!(c.satisfied);

        // uniform [0,1]: Sigma_q = 1/12 for every q
        let u = Density::uniform_box(vec![(0.0, 1.0)]).unwrap();
        let c = renyi_pair_check(&u, 0.5, 2.0, &opts()).unwrap();
        assert!(c.lhs.abs() < 1e-8, "uniform pair lhs {}", c.lhs);
        assert_close(c.rhs, 0.26472781246600888, 1e-6, "uniform pair rhs");
        assert!(c.satisfied);

        // r = inf leg
        let c = renyi_pair_check(&std_normal(), 0.5, f64::INFINITY, &opts()).unwrap();
        assert!(c.satisfied);

        let err = renyi_pair_check(&std_normal(), 2.0, 0.5, &opts()).unwrap_err();
        assert!(err.to_string().contains("requires q < r"), "{err}");
    }

    #[test]
    fn tsallis_certificates() {
        let c = tsallis_bound_check(&std_normal(), 2.0, &opts()).unwrap();
        assert_close(c.lhs, 3.5449077018110321, 1e-6, "tsallis q=2 lhs");
        assert_close(c.rhs, 4.1327313541224929, 1e-6, "tsallis q=2 rhs");
        assert!(c.satisfied);

        let c = tsallis_bound_check(&std_normal(), 0.5, &opts()).unwrap();
        assert_close(c.lhs, 5.0132565492620010, 1e-6, "tsallis q=0.5 lhs");
        assert_close(c.rhs, 5.8445647306445557, 1e-6, "tsallis q=0.5 rhs");
        assert!(c.satisfied);

        let u = Density::uniform_box(vec![(0.0, 1.0)]).unwrap();
        let c = tsallis_bound_check(&u, 2.0, &opts()).unwrap();
        assert_close(c.lhs, 1.0, 1e-8, "tsallis uniform lhs");
        assert_close(c.rhs, 1.1930167798955139, 1e-6, "tsallis uniform rhs");
        assert!(c.satisfied);

        assert!(tsallis_bound_check(&std_normal(), 1.0 + 1e-8, &opts()).is_err());
    }

    #[test]
    fn prob_certificates() {
        let half = Region::Halfspace {
            axis: 0,
            bound: 0.0,
            side: Side::Ge,
        };
        let c = prob_bound_check(&std_normal(), &half, 2.0, &opts()).unwrap();
        assert_close(c.lhs, 0.42044820762685727, 1e-6, "prob lhs");
        assert_close(c.rhs, 0.76348608068469791, 1e-6, "prob rhs");
        assert!(c.satisfied);

        // empty region: both sides zero
        let empty = Region::Complement {
            of: Box::new(Region::All),
        };
        let c = prob_bound_check(&std_normal(), &empty, 2.0, &opts()).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert_eq!(c.rhs, 0.0);
        assert!(c.satisfied);

        // restriction to the whole space reduces to the covariance bound
        let c = prob_bound_check(&std_normal(), &Region::All, 2.0, &opts()).unwrap();
        assert_close(c.lhs, 1.0, 1e-7, "prob all lhs");
        assert!(c.rhs >= 1.0);
        assert!(c.satisfied);

        assert!(prob_bound_check(&std_normal(), &half, 1.0, &opts()).is_err());
        assert!(prob_bound_check(&std_normal(), &half, f64::INFINITY, &opts()).is_err());
    }

    #[test]
    fn prob_sup_certificates() {
        // whole line: rhs = e^(1/3)
        let c = prob_bound_sup_check(&std_normal(), &Region::All, &opts()).unwrap();
        assert_close(c.lhs, 1.0, 1e-7, "prob-sup all lhs");
        assert_close(c.rhs, 1.3956124250860895, 1e-6, "prob-sup all rhs");
        assert!(c.satisfied);

        // tail [3, inf): rhs = e^(-8/3)
        let tail = Region::Halfspace {
            axis: 0,
            bound: 3.0,
            side: Side::Ge,
        };
        let c = prob_bound_sup_check(&std_normal(), &tail, &opts()).unwrap();
        assert_close(c.lhs, 0.0013498980316300945, 1e-5, "prob-sup tail lhs");
        assert_close(c.rhs, 0.069483451222801535, 1e-5, "prob-sup tail rhs");
        assert!(c.satisfied);

        // uniform [0,1] restricted to [0, 0.5]
        let u = Density::uniform_box(vec![(0.0, 1.0)]).unwrap();
        let half = Region::Box {
            bounds: vec![(0.0, 0.5)],
        };
        let c = prob_bound_sup_check(&u, &half, &opts()).unwrap();
        assert_close(c.lhs, 0.5, 1e-8, "prob-sup uniform lhs");
        assert_close(c.rhs, 1.1248580000820947, 1e-6, "prob-sup uniform rhs");
        assert!(c.satisfied);
    }

    #[test]
    fn limits_agree_with_shannon_bound() {
        // both entropy bounds approach the Shannon-limit bound linearly in
        // eps: the escort covariance of order 1 - eps shifts the bound by
        // (n/2) ln(1/(1-eps)) ~ eps/2, the entropy side by ~eps/4
        let d = std_normal();
        let shannon = shannon_bound_check(&d, &opts()).unwrap();
        for eps in [1e-3, 1e-4] {
            let tol = 0.6 * eps;
            for p in [1.0 - eps, 1.0 + eps] {
                let c = renyi_upper_bound(&d, p, &opts()).unwrap();
                assert!(
                    (c.rhs - shannon.rhs).abs() < tol,
                    "renyi rhs at p={p}: {} vs {}",
                    c.rhs,
                    shannon.rhs
                );
                assert!(
                    (c.lhs - shannon.lhs).abs() < tol,
                    "renyi lhs at p={p}: {} vs {}",
                    c.lhs,
                    shannon.lhs
                );
                let t = tsallis_bound_check(&d, p, &opts()).unwrap();
                // compare on the log scale where the Shannon bound lives
                assert!(
                    (t.rhs.ln() - shannon.rhs).abs() < tol,
                    "tsallis log-rhs at q={p}: {} vs {}",
                    t.rhs.ln(),
                    shannon.rhs
                );
            }
        }
    }

    #[test]
    fn certificate_flags_are_consistent() {
        let c = theorem1_check(
            &std_normal(),
            &BoundParams::new(0.5, 4.0).with_alpha(1.0),
            &opts(),
        )
        .unwrap();
        assert_eq!(c.satisfied, c.slack >= -(c.lhs_error + c.rhs_error));
        assert_close(c.slack, c.rhs - c.lhs, 1e-12, "slack definition");
    }

    #[test]
    fn inequality_id_roundtrip() {
        for id in InequalityId::ALL {
            assert_eq!(InequalityId::parse(id.as_str()).unwrap(), id);
        }
        assert!(InequalityId::parse("thm3").is_err());
    }
}
