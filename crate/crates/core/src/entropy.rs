//! Rényi, Shannon, and Tsallis entropy functionals and the q-exponential.
//!
//! All entropies are differential entropies in nats (natural log
//! throughout). The three functionals are tied together by
//! `exp_q(S_q(X)) = ||f||_q^(q / (1 - q))` and by the limit of the Rényi
//! entropy at order 1, which is the Shannon entropy. The Shannon path
//! integrates `-f log f` directly instead of taking a numerical limit so
//! nothing cancels catastrophically near order 1.

use crate::density::Density;
use crate::error::{Error, Result};
use crate::escort::{self, ValueWithError};
use crate::integrate::EvalOpts;

/// Which entropy functional a value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyKind {
    Renyi,
    Shannon,
    Tsallis,
}

/// An entropy value in nats with its error estimate.
#[derive(Clone, Copy, Debug)]
pub struct EntropyValue {
    pub kind: EntropyKind,
    /// The order (`p` or `q`); `None` for Shannon.
    pub order: Option<f64>,
    pub value: f64,
    pub abs_error: f64,
}

/// Orders this close to 1 are rejected and redirected to the Shannon path.
pub const ORDER_ONE_GUARD: f64 = 1e-6;

/// Relative mass error beyond which a density does not count as normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Checks that `f` integrates to 1 within the normalization tolerance.
pub(crate) fn check_normalized(f: &Density, opts: &EvalOpts) -> Result<ValueWithError> {
    let mass = escort::lp_norm(f, 1.0, opts)?;
    if (mass.value - 1.0).abs() > NORMALIZATION_TOLERANCE + mass.abs_error {
        return Err(Error::NotNormalized(format!(
            "total mass {} deviates from 1 beyond {NORMALIZATION_TOLERANCE:e}",
            mass.value
        )));
    }
    Ok(mass)
}

/// Rényi entropy `h_p(X) = (p / (1 - p)) log ||f||_p` for `p != 1`.
///
/// `p = inf` gives the min-entropy `-log ||f||_inf`. Orders within
/// [`ORDER_ONE_GUARD`] of 1 error and point to [`shannon_entropy`].
pub fn renyi_entropy(f: &Density, p: f64, opts: &EvalOpts) -> Result<EntropyValue> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Rényi order must be positive, got {p}"
        )));
    }
    if (p - 1.0).abs() < ORDER_ONE_GUARD {
        return Err(Error::InvalidParameter(format!(
            "Rényi order {p} is within {ORDER_ONE_GUARD:e} of 1; use the Shannon entropy"
        )));
    }
    check_normalized(f, opts)?;
    let norm = escort::lp_norm(f, p, opts)?;
    if !(norm.value > 0.0) {
        return Err(Error::Divergent("vanishing norm in Rényi entropy".into()));
    }
    let (value, abs_error) = if p == f64::INFINITY {
        (-norm.value.ln(), norm.abs_error / norm.value)
    } else {
        let coef = p / (1.0 - p);
        (
            coef * norm.value.ln(),
            coef.abs() * norm.abs_error / norm.value,
        )
    };
    Ok(EntropyValue {
        kind: EntropyKind::Renyi,
        order: Some(p),
        value,
        abs_error,
    })
}

/// Shannon differential entropy `-int f log f` (with `0 log 0 = 0`).
pub fn shannon_entropy(f: &Density, opts: &EvalOpts) -> Result<EntropyValue> {
    check_normalized(f, opts)?;
    let integrand = |x: &[f64]| {
        let v = f.eval_unchecked(x);
        if v <= 0.0 {
            0.0
        } else {
            -v * v.ln()
        }
    };
    let res = crate::integrate::integrate(
        &crate::integrate::IntegrationRequest::new(f.dim(), &integrand)
            .with_region(support_region(f))
            .with_tolerance(opts.resolve_tolerance(f.dim()))
            .with_budget(opts.resolve_budget(f.dim()))
            .with_seed(opts.seed)
            .with_centers(f.center().to_vec()),
    )?;
    if !res.converged {
        return Err(Error::NotConverged("Shannon entropy integral".into()));
    }
    Ok(EntropyValue {
        kind: EntropyKind::Shannon,
        order: None,
        value: res.value,
        abs_error: res.abs_error,
    })
}

fn support_region(f: &Density) -> crate::density::Region {
    match f.support().kind() {
        crate::density::SupportKind::AllSpace => crate::density::Region::All,
        _ => crate::density::Region::Box {
            bounds: f.support().bounds().to_vec(),
        },
    }
}

/// Tsallis entropy `S_q(X) = (1 - ||f||_q^q) / (q - 1)` for `q != 1`.
pub fn tsallis_entropy(f: &Density, q: f64, opts: &EvalOpts) -> Result<EntropyValue> {
    if !(q > 0.0) || q == f64::INFINITY {
        return Err(Error::InvalidParameter(format!(
            "Tsallis order must be positive and finite, got {q}"
        )));
    }
    if (q - 1.0).abs() < ORDER_ONE_GUARD {
        return Err(Error::InvalidParameter(format!(
            "Tsallis order {q} is within {ORDER_ONE_GUARD:e} of 1; use the Shannon entropy"
        )));
    }
    check_normalized(f, opts)?;
    let norm = escort::lp_norm(f, q, opts)?;
    // int f^q = norm^q
    let power_mass = norm.value.powf(q);
    let power_mass_err = if norm.value > 0.0 {
        q * power_mass * norm.abs_error / norm.value
    } else {
        norm.abs_error
    };
    Ok(EntropyValue {
        kind: EntropyKind::Tsallis,
        order: Some(q),
        value: (1.0 - power_mass) / (q - 1.0),
        abs_error: power_mass_err / (q - 1.0).abs(),
    })
}

/// q-exponential `exp_q(x) = [1 + (1 - q) x]^(1 / (1 - q))`, the inverse of
/// the q-logarithm, with the standard cutoff conventions:
///
/// - `q = 1` returns `exp(x)`;
/// - a non-positive bracket returns 0 when the exponent is positive and
///   `+inf` when it is negative.
pub fn q_exp(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        return x.exp();
    }
    let one_minus_q = 1.0 - q;
    let bracket = 1.0 + one_minus_q * x;
    let exponent = 1.0 / one_minus_q;
    if bracket <= 0.0 {
        return if exponent > 0.0 { 0.0 } else { f64::INFINITY };
    }
    bracket.powf(exponent)
}
