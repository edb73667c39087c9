//! Escort-distribution statistics and `L^p`-norms.
//!
//! For a non-negative `f` the escort distribution of order `q` is
//! `|f|^q / int |f|^q`; its mean is the q-expectation `E_q[X]`, its
//! absolute moments are the q-moments `mu_{q,alpha} = E_q[|X - b|^alpha]`,
//! and its second-moment matrix about `b` is the q-covariance
//! `Sigma_{q,b} = E_q[(X-b)(X-b)^T]`. All operations accept any
//! non-negative integrable function, not only normalized densities.
//!
//! Centers: both an explicit `b` and the central choice `b = E_q[X]` are
//! supported everywhere (the inequalities hold for any center; the central
//! one usually gives the tightest bound). Escort integrals with `q < 1` can
//! diverge on unbounded support; the divergence heuristic runs first and
//! turns garbage into an error.

use nalgebra::DMatrix;

use crate::density::{intersect_bounds, Density, Region, ResolvedRegion, SupportKind};
use crate::error::{Error, Result};
use crate::integrate::{self, EvalOpts, IntegrationRequest};
use crate::linalg;

/// A scalar with an absolute error estimate.
#[derive(Clone, Copy, Debug)]
pub struct ValueWithError {
    pub value: f64,
    pub abs_error: f64,
}

/// Choice of the moment center `b`.
#[derive(Clone, Debug, PartialEq)]
pub enum CenterSpec {
    /// `b = E_q[X]`, computed on demand.
    Central,
    /// A fixed point.
    Explicit(Vec<f64>),
}

impl CenterSpec {
    pub fn explicit_1d(b: f64) -> Self {
        CenterSpec::Explicit(vec![b])
    }
}

/// Order parameters of a one-dimensional q-moment.
#[derive(Clone, Debug)]
pub struct MomentSpec {
    pub q: f64,
    pub alpha: f64,
    pub center: CenterSpec,
}

impl MomentSpec {
    pub fn central(q: f64, alpha: f64) -> Self {
        Self {
            q,
            alpha,
            center: CenterSpec::Central,
        }
    }

    pub fn about(q: f64, alpha: f64, b: f64) -> Self {
        Self {
            q,
            alpha,
            center: CenterSpec::explicit_1d(b),
        }
    }
}

/// q-covariance matrix with its determinant and error estimates.
#[derive(Clone, Debug)]
pub struct QCovariance {
    pub matrix: DMatrix<f64>,
    pub entry_errors: DMatrix<f64>,
    pub det: f64,
    pub det_error: f64,
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// The center the matrix was taken about.
    pub center: Vec<f64>,
    /// Escort normalizer `int |f|^q`.
    pub mass: ValueWithError,
}

/// Bundle of escort statistics at a fixed order `q`.
#[derive(Clone, Debug)]
pub struct QStats {
    pub q: f64,
    pub q_mass: ValueWithError,
    pub q_mean: Vec<ValueWithError>,
    /// One-dimensional `mu_{q,alpha}` when an order was requested.
    pub q_moment: Option<ValueWithError>,
    pub q_cov: QCovariance,
}

// ---------------------------------------------------------------------------
// Integration plumbing
// ---------------------------------------------------------------------------

fn effective_region(f: &Density, region: Option<&Region>) -> Region {
    let support_box = match f.support().kind() {
        SupportKind::AllSpace => Region::All,
        _ => Region::Box {
            bounds: f.support().bounds().to_vec(),
        },
    };
    match region {
        None => support_box,
        Some(r) => Region::Intersection {
            of: vec![support_box, r.clone()],
        },
    }
}

fn request<'a>(
    f: &Density,
    region: Option<&Region>,
    integrand: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    opts: &EvalOpts,
) -> IntegrationRequest<'a> {
    IntegrationRequest::new(f.dim(), integrand)
        .with_region(effective_region(f, region))
        .with_tolerance(opts.resolve_tolerance(f.dim()))
        .with_budget(opts.resolve_budget(f.dim()))
        .with_seed(opts.seed)
        .with_centers(f.center().to_vec())
}

fn integrate_weighted(
    f: &Density,
    region: Option<&Region>,
    integrand: &(dyn Fn(&[f64]) -> f64 + Sync),
    opts: &EvalOpts,
    what: &str,
) -> Result<ValueWithError> {
    let res = integrate::integrate(&request(f, region, integrand, opts))?;
    if !res.converged {
        return Err(Error::NotConverged(format!(
            "{what}: evaluation budget exhausted at error {:e}",
            res.abs_error
        )));
    }
    Ok(ValueWithError {
        value: res.value,
        abs_error: res.abs_error,
    })
}

fn diverges(
    f: &Density,
    region: Option<&Region>,
    integrand: &(dyn Fn(&[f64]) -> f64 + Sync),
    opts: &EvalOpts,
) -> bool {
    integrate::detect_divergence(&request(f, region, integrand, opts))
}

fn region_is_bounded(f: &Density, region: Option<&Region>) -> bool {
    match effective_region(f, region).resolve(f.dim()) {
        ResolvedRegion::Empty => true,
        ResolvedRegion::Clip(b) => b.iter().all(|&(lo, hi)| lo.is_finite() && hi.is_finite()),
        ResolvedRegion::Difference { outer, .. } => outer
            .iter()
            .all(|&(lo, hi)| lo.is_finite() && hi.is_finite()),
        ResolvedRegion::General => false,
    }
}

/// `w(x) * |f(x)|^power` with a short-circuit once the density part has
/// underflowed to zero, so polynomial weights cannot turn `0 * inf` into NaN
/// out in the tails.
fn power_weighted<'a>(
    f: &'a Density,
    power: f64,
    weight: impl Fn(&[f64]) -> f64 + Sync + 'a,
) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    move |x: &[f64]| {
        let base = f.eval_unchecked(x);
        if base == 0.0 {
            return 0.0;
        }
        let pw = base.powf(power);
        if pw == 0.0 {
            return 0.0;
        }
        pw * weight(x)
    }
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// `L^p`-norm of `|f|` over its support: `(int |f|^p)^(1/p)` for finite `p`,
/// the essential supremum for `p = inf`.
pub fn lp_norm(f: &Density, p: f64, opts: &EvalOpts) -> Result<ValueWithError> {
    lp_norm_on(f, &Region::All, p, opts)
}

/// `L^p`-norm of `f` restricted to a region, i.e. `||f I_region||_p`.
pub fn lp_norm_on(f: &Density, region: &Region, p: f64, opts: &EvalOpts) -> Result<ValueWithError> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "norm order must be positive, got {p}"
        )));
    }
    region.validate(f.dim())?;
    if p == f64::INFINITY {
        return ess_sup_on(f, region, opts);
    }
    let integrand = power_weighted(f, p, |_| 1.0);
    if p < 1.0 && !region_is_bounded(f, Some(region)) && diverges(f, Some(region), &integrand, opts)
    {
        return Err(Error::Divergent(format!("int |f|^p with p = {p}")));
    }
    let mass = integrate_weighted(f, Some(region), &integrand, opts, "lp_norm")?;
    if mass.value < 0.0 {
        return Err(Error::NotConverged("negative power mass".into()));
    }
    if mass.value == 0.0 {
        return Ok(ValueWithError {
            value: 0.0,
            abs_error: mass.abs_error.powf(1.0 / p),
        });
    }
    let value = mass.value.powf(1.0 / p);
    let abs_error = value * mass.abs_error / (p * mass.value);
    Ok(ValueWithError { value, abs_error })
}

/// Essential supremum of `|f|` (equal to the supremum for the continuous
/// families here): multi-start coarse grid over the support, or over
/// `center +- 12 * scale` on unbounded axes, followed by compass refinement.
pub fn ess_sup(f: &Density, opts: &EvalOpts) -> Result<ValueWithError> {
    ess_sup_on(f, &Region::All, opts)
}

/// Essential supremum of `f` over a region.
pub fn ess_sup_on(f: &Density, region: &Region, _opts: &EvalOpts) -> Result<ValueWithError> {
    region.validate(f.dim())?;
    let dim = f.dim();

    // search box: support bounds, widened hints on unbounded axes
    let mut box_bounds: Vec<(f64, f64)> = f
        .support()
        .bounds()
        .iter()
        .zip(f.center().iter().zip(f.scales()))
        .map(|(&(lo, hi), (&c, &s))| {
            let w = 12.0 * s.max(1e-12);
            (lo.max(c - w), hi.min(c + w))
        })
        .collect();
    match effective_region(f, Some(region)).resolve(dim) {
        ResolvedRegion::Empty => {
            return Ok(ValueWithError {
                value: 0.0,
                abs_error: 0.0,
            })
        }
        ResolvedRegion::Clip(clip) => match intersect_bounds(&box_bounds, &clip) {
            Some(b) => box_bounds = b,
            None => {
                return Ok(ValueWithError {
                    value: 0.0,
                    abs_error: 0.0,
                })
            }
        },
        _ => {} // keep the hint box; the mask below handles the holes
    }

    let objective = |x: &[f64]| -> f64 {
        if region.indicator(x) == 0.0 {
            0.0
        } else {
            f.eval_unchecked(x)
        }
    };

    let per_axis: usize = match dim {
        1 => 2049,
        2 => 65,
        3 => 17,
        _ => (100_000f64.powf(1.0 / dim as f64)).floor().max(3.0) as usize,
    };

    // coarse scan keeping the best starts
    const STARTS: usize = 8;
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut x = vec![0.0f64; dim];
    let mut index = vec![0usize; dim];
    let total: usize = per_axis.pow(dim as u32);
    for flat in 0..total {
        let mut rem = flat;
        for d in 0..dim {
            index[d] = rem % per_axis;
            rem /= per_axis;
        }
        for d in 0..dim {
            let (lo, hi) = box_bounds[d];
            x[d] = if per_axis == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * index[d] as f64 / (per_axis - 1) as f64
            };
        }
        let v = objective(&x);
        if best.len() < STARTS {
            best.push((v, x.clone()));
            best.sort_by(|a, b| b.0.total_cmp(&a.0));
        } else if v > best[STARTS - 1].0 {
            best[STARTS - 1] = (v, x.clone());
            best.sort_by(|a, b| b.0.total_cmp(&a.0));
        }
    }

    // compass refinement from each start
    let spans: Vec<f64> = box_bounds.iter().map(|&(lo, hi)| hi - lo).collect();
    let mut global = best.first().map(|b| b.0).unwrap_or(0.0);
    for (v0, start) in &best {
        let mut cur = start.clone();
        let mut val = *v0;
        let mut steps: Vec<f64> = spans
            .iter()
            .map(|s| (s / (per_axis.max(2) - 1) as f64).max(1e-300))
            .collect();
        for _ in 0..240 {
            let mut improved = false;
            for d in 0..dim {
                for dir in [-1.0, 1.0] {
                    let mut cand = cur.clone();
                    cand[d] = (cand[d] + dir * steps[d]).clamp(box_bounds[d].0, box_bounds[d].1);
                    let v = objective(&cand);
                    if v > val {
                        val = v;
                        cur = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                let max_step = steps.iter().cloned().fold(0.0f64, f64::max);
                let scale = spans.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
                if max_step < 1e-11 * scale {
                    break;
                }
                for s in &mut steps {
                    *s *= 0.5;
                }
            }
        }
        global = global.max(val);
    }

    Ok(ValueWithError {
        value: global,
        abs_error: 1e-8 * global, // refinement converges far tighter; kept conservative
    })
}

// ---------------------------------------------------------------------------
// Escort moments
// ---------------------------------------------------------------------------

fn escort_mass(f: &Density, q: f64, opts: &EvalOpts) -> Result<ValueWithError> {
    if !(q > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "escort order q must be positive, got {q}"
        )));
    }
    let integrand = power_weighted(f, q, |_| 1.0);
    if q < 1.0 && !region_is_bounded(f, None) && diverges(f, None, &integrand, opts) {
        return Err(Error::Divergent(format!("int |f|^q with q = {q}")));
    }
    let mass = integrate_weighted(f, None, &integrand, opts, "escort mass")?;
    if !(mass.value > 0.0) {
        return Err(Error::InvalidParameter(
            "escort mass is zero; the function vanishes on its support".into(),
        ));
    }
    Ok(mass)
}

/// q-expectation `E_q[X]`: mean of the escort distribution, one entry per
/// axis. For `q = 1` this is the ordinary expectation.
pub fn q_expectation(f: &Density, q: f64, opts: &EvalOpts) -> Result<Vec<ValueWithError>> {
    let mass = escort_mass(f, q, opts)?;
    q_expectation_with_mass(f, q, &mass, opts)
}

fn q_expectation_with_mass(
    f: &Density,
    q: f64,
    mass: &ValueWithError,
    opts: &EvalOpts,
) -> Result<Vec<ValueWithError>> {
    let unbounded = !region_is_bounded(f, None);
    let mut out = Vec::with_capacity(f.dim());
    for axis in 0..f.dim() {
        let integrand = power_weighted(f, q, move |x: &[f64]| x[axis]);
        // absolute convergence is what makes the expectation exist
        let abs_integrand = power_weighted(f, q, move |x: &[f64]| x[axis].abs());
        if unbounded && diverges(f, None, &abs_integrand, opts) {
            return Err(Error::Divergent(format!(
                "q-expectation numerator on axis {axis}"
            )));
        }
        let num = integrate_weighted(f, None, &integrand, opts, "q-expectation")?;
        let value = num.value / mass.value;
        let abs_error = (num.abs_error + value.abs() * mass.abs_error) / mass.value;
        out.push(ValueWithError { value, abs_error });
    }
    Ok(out)
}

pub(crate) fn resolve_center(
    f: &Density,
    q: f64,
    center: &CenterSpec,
    opts: &EvalOpts,
) -> Result<Vec<ValueWithError>> {
    match center {
        CenterSpec::Central => q_expectation(f, q, opts),
        CenterSpec::Explicit(b) => {
            if b.len() != f.dim() {
                return Err(Error::DimensionMismatch {
                    expected: f.dim(),
                    got: b.len(),
                });
            }
            Ok(b.iter()
                .map(|&v| ValueWithError {
                    value: v,
                    abs_error: 0.0,
                })
                .collect())
        }
    }
}

/// One-dimensional q-moment `mu_{q,alpha} = E_q[|X - b|^alpha]`.
pub fn q_moment(f: &Density, spec: &MomentSpec, opts: &EvalOpts) -> Result<ValueWithError> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.dim(),
        });
    }
    if !(spec.q > 0.0) || !(spec.alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "q and alpha must be positive, got q = {}, alpha = {}",
            spec.q, spec.alpha
        )));
    }
    let mass = escort_mass(f, spec.q, opts)?;
    let center = resolve_center(f, spec.q, &spec.center, opts)?;
    let b = center[0];
    let alpha = spec.alpha;
    let integrand = power_weighted(f, spec.q, move |x: &[f64]| (x[0] - b.value).abs().powf(alpha));
    if !region_is_bounded(f, None) && diverges(f, None, &integrand, opts) {
        return Err(Error::Divergent(format!(
            "q-moment of order alpha = {alpha} at q = {}",
            spec.q
        )));
    }
    let num = integrate_weighted(f, None, &integrand, opts, "q-moment")?;
    let value = num.value / mass.value;
    let abs_error =
        (num.abs_error + value.abs() * mass.abs_error) / mass.value + alpha * b.abs_error;
    Ok(ValueWithError { value, abs_error })
}

/// Multivariate q-moment matrix `Sigma_{q,b} = E_q[(X-b)(X-b)^T]` with its
/// determinant. With the central choice this is the q-covariance; at
/// `q = 1` central it is the ordinary covariance.
pub fn q_covariance(
    f: &Density,
    q: f64,
    center: &CenterSpec,
    opts: &EvalOpts,
) -> Result<QCovariance> {
    let mass = escort_mass(f, q, opts)?;
    let b = resolve_center(f, q, center, opts)?;
    q_covariance_with(f, q, &mass, &b, opts)
}

fn q_covariance_with(
    f: &Density,
    q: f64,
    mass: &ValueWithError,
    b: &[ValueWithError],
    opts: &EvalOpts,
) -> Result<QCovariance> {
    let n = f.dim();
    let unbounded = !region_is_bounded(f, None);
    let mut matrix = DMatrix::zeros(n, n);
    let mut entry_errors = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let (bi, bj) = (b[i].value, b[j].value);
            let integrand = power_weighted(f, q, move |x: &[f64]| (x[i] - bi) * (x[j] - bj));
            if i == j && unbounded && diverges(f, None, &integrand, opts) {
                return Err(Error::Divergent(format!("second escort moment on axis {i}")));
            }
            let num = integrate_weighted(f, None, &integrand, opts, "q-covariance")?;
            let value = num.value / mass.value;
            let err = (num.abs_error + value.abs() * mass.abs_error) / mass.value
                + b[i].abs_error
                + b[j].abs_error;
            matrix[(i, j)] = value;
            matrix[(j, i)] = value;
            entry_errors[(i, j)] = err;
            entry_errors[(j, i)] = err;
        }
    }

    let (eigenvalues, vectors) = linalg::sym_eigen(&matrix);
    let det: f64 = eigenvalues.iter().product();
    if !det.is_finite() || det.abs() < 1e-300 {
        return Err(Error::SingularCovariance(format!(
            "determinant {det:e} below 1e-300"
        )));
    }
    // d det / d Sigma_ij = det * (Sigma^-1)_ji
    let floor = 1e-14 * matrix.trace().abs().max(1e-300);
    let mut diag = DMatrix::zeros(n, n);
    for (k, &l) in eigenvalues.iter().enumerate() {
        diag[(k, k)] = 1.0 / l.abs().max(floor);
    }
    let inv = &vectors * diag * vectors.transpose();
    let mut det_error = 0.0;
    for i in 0..n {
        for j in 0..n {
            det_error += det.abs() * inv[(j, i)].abs() * entry_errors[(i, j)];
        }
    }

    Ok(QCovariance {
        matrix,
        entry_errors,
        det,
        det_error,
        eigenvalues,
        center: b.iter().map(|v| v.value).collect(),
        mass: *mass,
    })
}

/// All escort statistics of order `q` in one pass (shared normalizer):
/// mean, covariance with determinant, and for one-dimensional densities the
/// `alpha`-th moment when requested.
pub fn q_stats(
    f: &Density,
    q: f64,
    center: &CenterSpec,
    alpha: Option<f64>,
    opts: &EvalOpts,
) -> Result<QStats> {
    let mass = escort_mass(f, q, opts)?;
    let q_mean = q_expectation_with_mass(f, q, &mass, opts)?;
    let b = match center {
        CenterSpec::Central => q_mean.clone(),
        CenterSpec::Explicit(_) => resolve_center(f, q, center, opts)?,
    };
    let q_cov = q_covariance_with(f, q, &mass, &b, opts)?;
    let q_moment_value = match alpha {
        Some(a) if f.dim() == 1 => Some(q_moment(
            f,
            &MomentSpec {
                q,
                alpha: a,
                center: CenterSpec::explicit_1d(b[0].value),
            },
            opts,
        )?),
        _ => None,
    };
    Ok(QStats {
        q,
        q_mass: mass,
        q_mean,
        q_moment: q_moment_value,
        q_cov,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::SupportDescriptor;

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

    fn cauchy() -> Density {
        Density::from_fn(1, SupportDescriptor::all_space(1), "cauchy", |x| {
            1.0 / (std::f64::consts::PI * (1.0 + x[0] * x[0]))
        })
        .unwrap()
    }

    #[test]
    fn uniform_norms_are_one() {
        let d = Density::uniform_box(vec![(0.0, 1.0)]).unwrap();
        for p in [0.5, 1.0, 2.0, 17.0, f64::INFINITY] {
            let n = lp_norm(&d, p, &opts()).unwrap();
            assert_close(n.value, 1.0, 1e-9, "uniform norm");
        }
    }

    #[test]
    fn gaussian_l2_and_peak() {
        let d = Density::gaussian_1d(0.0, 1.0).unwrap();
        // (4 pi)^(-1/4)
        let n2 = lp_norm(&d, 2.0, &opts()).unwrap();
        assert_close(n2.value, 0.53112596601359843, 1e-8, "gaussian l2");
        let ni = lp_norm(&d, f64::INFINITY, &opts()).unwrap();
        assert_close(ni.value, 0.39894228040143268, 1e-8, "gaussian linf");
    }

    #[test]
    fn indicator_l2() {
        let d = Density::indicator_box(vec![(0.0, 2.0)]).unwrap();
        let n = lp_norm(&d, 2.0, &opts()).unwrap();
        assert_close(n.value, std::f64::consts::SQRT_2, 1e-9, "indicator l2");
    }

    #[test]
    fn shifted_gaussian_q_expectation() {
        let d = Density::gaussian_1d(3.0, 1.0).unwrap();
        for q in [0.5, 1.0, 2.0] {
            let m = q_expectation(&d, q, &opts()).unwrap();
            assert_close(m[0].value, 3.0, 1e-8, "escort mean");
        }
    }

    #[test]
    fn exponential_and_uniform_q_expectation() {
        let d = Density::exponential(1.0).unwrap();
        let m = q_expectation(&d, 2.0, &opts()).unwrap();
        assert_close(m[0].value, 0.5, 1e-8, "exp escort mean");
        let u = Density::uniform_box(vec![(0.0, 1.0)]).unwrap();
        for q in [0.5, 1.0, 3.0] {
            let m = q_expectation(&u, q, &opts()).unwrap();
            assert_close(m[0].value, 0.5, 1e-9, "uniform escort mean");
        }
    }

    #[test]
    fn gaussian_q_moments() {
        let d = Density::gaussian_1d(0.0, 1.0).unwrap();
        let m = q_moment(&d, &MomentSpec::central(1.0, 2.0), &opts()).unwrap();
        assert_close(m.value, 1.0, 1e-8, "variance");
        let m = q_moment(&d, &MomentSpec::about(2.0, 2.0, 0.0), &opts()).unwrap();
        assert_close(m.value, 0.5, 1e-8, "escort variance");
    }

    #[test]
    fn invalid_orders_rejected() {
        let d = Density::gaussian_1d(0.0, 1.0).unwrap();
        assert!(q_moment(&d, &MomentSpec::central(-1.0, 2.0), &opts()).is_err());
        assert!(q_moment(&d, &MomentSpec::central(1.0, 0.0), &opts()).is_err());
        assert!(lp_norm(&d, 0.0, &opts()).is_err());
    }

    #[test]
    fn cauchy_second_moment_diverges() {
        let err = q_moment(&cauchy(), &MomentSpec::central(1.0, 2.0), &opts()).unwrap_err();
        assert!(matches!(err, Error::Divergent(_)), "{err}");
    }

    #[test]
    fn cauchy_half_norm_diverges() {
        // |f|^0.5 has |x|^-1 tails
        let err = lp_norm(&cauchy(), 0.5, &opts()).unwrap_err();
        assert!(matches!(err, Error::Divergent(_)), "{err}");
    }

    #[test]
    fn gaussian_2d_covariances() {
        let d = Density::gaussian(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let c = q_covariance(&d, 1.0, &CenterSpec::Central, &opts()).unwrap();
        assert_close(c.matrix[(0, 0)], 1.0, 1e-6, "cov 00");
        assert_close(c.matrix[(1, 1)], 1.0, 1e-6, "cov 11");
        assert!(c.matrix[(0, 1)].abs() < 1e-7);
        assert_close(c.det, 1.0, 1e-6, "det");

        let c2 = q_covariance(&d, 2.0, &CenterSpec::Central, &opts()).unwrap();
        assert_close(c2.matrix[(0, 0)], 0.5, 1e-6, "escort cov 00");
        assert_close(c2.det, 0.25, 1e-6, "escort det");
    }

    #[test]
    fn one_dim_covariance_matches_moment() {
        let d = Density::exponential(1.0).unwrap();
        let c = q_covariance(&d, 1.5, &CenterSpec::Central, &opts()).unwrap();
        let m = q_moment(&d, &MomentSpec::central(1.5, 2.0), &opts()).unwrap();
        assert_close(c.matrix[(0, 0)], m.value, 1e-8, "1d cov == alpha-2 moment");
    }

    #[test]
    fn gaussian_cov_oracle_full_matrix() {
        let cov = vec![vec![4.0, 0.0], vec![0.0, 1.0]];
        let d = Density::gaussian(vec![1.0, -2.0], cov.clone()).unwrap();
        let c = q_covariance(&d, 1.0, &CenterSpec::Central, &opts()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = cov[i][j];
                if want == 0.0 {
                    assert!(c.matrix[(i, j)].abs() < 1e-6);
                } else {
                    assert_close(c.matrix[(i, j)], want, 1e-6, "cov entry");
                }
            }
        }
        assert_close(c.center[0], 1.0, 1e-7, "mean 0");
        assert_close(c.center[1], -2.0, 1e-7, "mean 1");
    }

    #[test]
    fn escort_normalization_across_families() {
        let families = [
            Density::gaussian_1d(0.0, 1.0).unwrap(),
            Density::uniform_box(vec![(0.0, 1.0)]).unwrap(),
            Density::exponential(1.0).unwrap(),
            Density::laplace(0.0, 1.0).unwrap(),
            Density::gen_gaussian(0.0, 1.0, 4.0).unwrap(),
        ];
        for f in &families {
            for q in [0.5, 1.0, 2.0] {
                let mass = escort_mass(f, q, &opts()).unwrap();
                let escort = power_weighted(f, q, |_| 1.0);
                let normalized = |x: &[f64]| escort(x) / mass.value;
                let res = integrate::integrate(&request(f, None, &normalized, &opts())).unwrap();
                assert!(
                    (res.value - 1.0).abs() <= 1e-8 + res.abs_error,
                    "escort of {} at q={q} integrates to {}",
                    f.label(),
                    res.value
                );
            }
        }
    }

    #[test]
    fn norm_ordering_on_bounded_support() {
        // ||f||_q <= vol^(1/q - 1/r) ||f||_r for q < r on a finite box
        let ramp = Density::from_fn(
            1,
            SupportDescriptor::bounded_box(vec![(0.0, 1.0)]).unwrap(),
            "ramp",
            |x| x[0],
        )
        .unwrap();
        let cases = [
            Density::uniform_box(vec![(0.0, 1.0)]).unwrap(),
            Density::indicator_box(vec![(0.0, 4.0)]).unwrap(),
            ramp,
        ];
        for f in &cases {
            let vol = f.support().volume().unwrap();
            for (q, r) in [(0.5, 1.0), (1.0, 2.0), (2.0, 4.0), (1.0, f64::INFINITY)] {
                let nq = lp_norm(f, q, &opts()).unwrap();
                let nr = lp_norm(f, r, &opts()).unwrap();
                let inv_r = if r.is_finite() { 1.0 / r } else { 0.0 };
                let rhs = vol.powf(1.0 / q - inv_r) * nr.value;
                assert!(
                    nq.value <= rhs + nq.abs_error + nr.abs_error + 1e-9,
                    "{}: ||f||_{q} = {} > {}",
                    f.label(),
                    nq.value,
                    rhs
                );
            }
        }
    }

    #[test]
    fn central_moment_is_minimal() {
        let d = Density::exponential(1.0).unwrap();
        let q = 1.5;
        let central = q_moment(&d, &MomentSpec::central(q, 2.0), &opts()).unwrap();
        let b0 = q_expectation(&d, q, &opts()).unwrap()[0].value;
        for offset in [-0.5, -0.1, 0.1, 0.5, 1.0] {
            let m = q_moment(&d, &MomentSpec::about(q, 2.0, b0 + offset), &opts()).unwrap();
            assert!(
                m.value + 1e-9 >= central.value,
                "moment at offset {offset} ({}) below central ({})",
                m.value,
                central.value
            );
        }
    }

    #[test]
    fn affine_scaling_of_central_moments() {
        // f_c(x) = f(x/c)/c scales central mu_{q,alpha} by c^alpha
        let base = Density::gaussian_1d(0.0, 1.0).unwrap();
        let c = 2.5f64;
        let scaled = Density::from_fn(1, SupportDescriptor::all_space(1), "scaled", move |x| {
            let phi = (-x[0] * x[0] / (2.0 * c * c)).exp() / (2.0 * std::f64::consts::PI).sqrt();
            phi / c
        })
        .unwrap()
        .with_hints(vec![0.0], vec![c]);
        for (q, alpha) in [(1.0, 2.0), (2.0, 1.0), (0.5, 2.0)] {
            let m0 = q_moment(&base, &MomentSpec::central(q, alpha), &opts()).unwrap();
            let m1 = q_moment(&scaled, &MomentSpec::central(q, alpha), &opts()).unwrap();
            assert_close(m1.value, c.powf(alpha) * m0.value, 1e-7, "affine scaling");
        }
    }

    #[test]
    fn psd_within_tolerance() {
        let d = Density::gaussian(vec![0.0, 0.0], vec![vec![2.0, 1.2], vec![1.2, 1.0]]).unwrap();
        let c = q_covariance(&d, 1.0, &CenterSpec::Central, &opts()).unwrap();
        let floor = -1e-10 * c.matrix.trace();
        assert!(c.eigenvalues.iter().all(|&l| l >= floor));
    }

    #[test]
    fn q_stats_bundle_consistency() {
        let d = Density::exponential(1.0).unwrap();
        let s = q_stats(&d, 2.0, &CenterSpec::Central, Some(2.0), &opts()).unwrap();
        assert_close(s.q_mean[0].value, 0.5, 1e-8, "bundle mean");
        let m = s.q_moment.unwrap();
        assert_close(s.q_cov.matrix[(0, 0)], m.value, 1e-8, "bundle cov vs moment");
        assert!(s.q_mass.value > 0.0);
    }

    #[test]
    fn oracle_agrees_with_numerics() {
        let families = [
            Density::gaussian_1d(0.5, 2.0).unwrap(),
            Density::uniform_box(vec![(-1.0, 3.0)]).unwrap(),
            Density::exponential(2.0).unwrap(),
            Density::laplace(1.0, 0.5).unwrap(),
            Density::gen_gaussian(0.0, 1.0, 4.0).unwrap(),
        ];
        for f in &families {
            for p in [0.5, 1.0, 2.0, 3.0, f64::INFINITY] {
                if let Some(want) = f.oracle().lp_norm(p) {
                    let got = lp_norm(f, p, &opts()).unwrap();
                    assert_close(got.value, want, 1e-6, &format!("{} norm p={p}", f.label()));
                }
            }
            if f.dim() == 1 {
                let b = f.center()[0];
                for q in [0.5, 1.0, 2.0] {
                    for alpha in [1.0, 2.0] {
                        if let Some(want) = f.oracle().q_moment(q, alpha, b) {
                            let got = q_moment(f, &MomentSpec::about(q, alpha, b), &opts()).unwrap();
                            assert_close(
                                got.value,
                                want,
                                1e-6,
                                &format!("{} moment q={q} alpha={alpha}", f.label()),
                            );
                        }
                    }
                }
            }
        }
    }
}
