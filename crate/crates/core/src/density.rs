//! Densities and non-negative measurable functions on `R^n`.
//!
//! A [`Density`] is an evaluable non-negative function together with a
//! support descriptor and optional closed-form oracles. Built-in families:
//!
//! | family          | parameters                  | support        |
//! |-----------------|-----------------------------|----------------|
//! | `gaussian`      | `mean`, `cov`               | all space      |
//! | `uniform`       | `box`                       | box            |
//! | `exponential`   | `rate`                      | `[0, inf)`     |
//! | `laplace`       | `mean`, `scale`             | all space      |
//! | `gen_gaussian`  | `mean`, `scale`, `shape`    | all space      |
//! | `mixture`       | `weights`, `components`     | union          |
//! | `grid`          | `grid: {xs, values}`        | `[xs0, xsN]`   |
//!
//! Specs are JSON documents, e.g. `{"family":"gaussian","mean":[0],"cov":[[1]]}`.
//! Signed functions are admitted by taking the absolute value at
//! construction; everything downstream consumes `|f|`. Grid densities are
//! normalized to unit mass at construction and are zero outside their box.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gamma;

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type NormOracleFn = Arc<dyn Fn(f64) -> Option<f64> + Send + Sync>;
type MomentOracleFn = Arc<dyn Fn(f64, f64, f64) -> Option<f64> + Send + Sync>;
type EntropyOracleFn = Arc<dyn Fn(f64) -> Option<f64> + Send + Sync>;

// ---------------------------------------------------------------------------
// Support descriptors
// ---------------------------------------------------------------------------

/// Shape of a density's support.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportKind {
    AllSpace,
    Box,
    HalfspaceProduct,
}

/// Per-axis lower/upper bounds over-approximating `{x : f(x) > 0}`.
/// Infinite entries mark unbounded axes.
#[derive(Clone, Debug)]
pub struct SupportDescriptor {
    kind: SupportKind,
    bounds: Vec<(f64, f64)>,
}

impl SupportDescriptor {
    pub fn all_space(dim: usize) -> Self {
        Self {
            kind: SupportKind::AllSpace,
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); dim],
        }
    }

    pub fn bounded_box(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &bounds {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::InvalidSpec(format!(
                    "box bounds must be finite with lower <= upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            kind: SupportKind::Box,
            bounds,
        })
    }

    pub fn halfspace_product(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &bounds {
            if lo > hi {
                return Err(Error::InvalidSpec(format!(
                    "bounds must satisfy lower <= upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            kind: SupportKind::HalfspaceProduct,
            bounds,
        })
    }

    pub fn kind(&self) -> SupportKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn is_bounded(&self) -> bool {
        self.bounds.iter().all(|&(lo, hi)| lo.is_finite() && hi.is_finite())
    }

    /// Lebesgue measure of the support box; `None` when unbounded.
    pub fn volume(&self) -> Option<f64> {
        if !self.is_bounded() {
            return None;
        }
        Some(self.bounds.iter().map(|&(lo, hi)| hi - lo).product())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.bounds)
            .all(|(&xi, &(lo, hi))| xi >= lo && xi <= hi)
    }
}

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

/// Which side of a hyperplane a halfspace keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `x[axis] >= bound`
    Ge,
    /// `x[axis] <= bound`
    Le,
}

/// Declarative subset of `R^n` with a pointwise indicator.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    All,
    Box { bounds: Vec<(f64, f64)> },
    Halfspace { axis: usize, bound: f64, side: Side },
    Complement { of: Box<Region> },
    Intersection { of: Vec<Region> },
}

/// Axis-aligned resolution of a region, used by the integrator to clip
/// integration bounds instead of integrating through an indicator jump.
#[derive(Clone, Debug)]
pub enum ResolvedRegion {
    Empty,
    /// Intersection of per-axis intervals (entries may be infinite).
    Clip(Vec<(f64, f64)>),
    /// `outer \ inner`, both axis-aligned; integrates as a difference.
    Difference {
        outer: Vec<(f64, f64)>,
        inner: Vec<(f64, f64)>,
    },
    /// No axis-aligned form; fall back to the indicator.
    General,
}

impl Region {
    pub fn from_json(text: &str) -> Result<Region> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("region: {e}")))
    }

    /// Indicator function: 1.0 inside, 0.0 outside.
    pub fn indicator(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            1.0
        } else {
            0.0
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::All => true,
            Region::Box { bounds } => x
                .iter()
                .zip(bounds)
                .all(|(&xi, &(lo, hi))| xi >= lo && xi <= hi),
            Region::Halfspace { axis, bound, side } => match side {
                Side::Ge => x[*axis] >= *bound,
                Side::Le => x[*axis] <= *bound,
            },
            Region::Complement { of } => !of.contains(x),
            Region::Intersection { of } => of.iter().all(|r| r.contains(x)),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Region::All => Ok(()),
            Region::Box { bounds } => {
                if bounds.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: bounds.len(),
                    });
                }
                for &(lo, hi) in bounds {
                    if lo > hi {
                        return Err(Error::InvalidSpec(format!(
                            "region box bounds must satisfy lower <= upper, got [{lo}, {hi}]"
                        )));
                    }
                }
                Ok(())
            }
            Region::Halfspace { axis, .. } => {
                if *axis >= dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: *axis + 1,
                    });
                }
                Ok(())
            }
            Region::Complement { of } => of.validate(dim),
            Region::Intersection { of } => of.iter().try_for_each(|r| r.validate(dim)),
        }
    }

    /// Resolve to an axis-aligned form when possible.
    pub fn resolve(&self, dim: usize) -> ResolvedRegion {
        let full = || vec![(f64::NEG_INFINITY, f64::INFINITY); dim];
        match self {
            Region::All => ResolvedRegion::Clip(full()),
            Region::Box { bounds } => {
                if bounds.iter().any(|&(lo, hi)| lo > hi) {
                    ResolvedRegion::Empty
                } else {
                    ResolvedRegion::Clip(bounds.clone())
                }
            }
            Region::Halfspace { axis, bound, side } => {
                let mut b = full();
                match side {
                    Side::Ge => b[*axis].0 = *bound,
                    Side::Le => b[*axis].1 = *bound,
                }
                ResolvedRegion::Clip(b)
            }
            Region::Complement { of } => match of.resolve(dim) {
                ResolvedRegion::Empty => ResolvedRegion::Clip(full()),
                ResolvedRegion::Clip(b) => {
                    if b.iter().all(|&(lo, hi)| lo == f64::NEG_INFINITY && hi == f64::INFINITY) {
                        ResolvedRegion::Empty
                    } else if let Some(flipped) = flip_single_sided(&b) {
                        ResolvedRegion::Clip(flipped)
                    } else {
                        ResolvedRegion::Difference {
                            outer: full(),
                            inner: b,
                        }
                    }
                }
                ResolvedRegion::Difference { outer, inner } => {
                    // complement of (full \ inner) is inner itself
                    if outer
                        .iter()
                        .all(|&(lo, hi)| lo == f64::NEG_INFINITY && hi == f64::INFINITY)
                    {
                        ResolvedRegion::Clip(inner)
                    } else {
                        ResolvedRegion::General
                    }
                }
                ResolvedRegion::General => ResolvedRegion::General,
            },
            Region::Intersection { of } => {
                let mut acc = full();
                let mut hole: Option<Vec<(f64, f64)>> = None;
                for r in of {
                    match r.resolve(dim) {
                        ResolvedRegion::Empty => return ResolvedRegion::Empty,
                        ResolvedRegion::Clip(b) => {
                            match intersect_bounds(&acc, &b) {
                                Some(next) => acc = next,
                                None => return ResolvedRegion::Empty,
                            }
                        }
                        ResolvedRegion::Difference { outer, inner } => {
                            if hole.is_some() {
                                return ResolvedRegion::General; // two holes
                            }
                            match intersect_bounds(&acc, &outer) {
                                Some(next) => acc = next,
                                None => return ResolvedRegion::Empty,
                            }
                            hole = Some(inner);
                        }
                        ResolvedRegion::General => return ResolvedRegion::General,
                    }
                }
                match hole {
                    None => ResolvedRegion::Clip(acc),
                    Some(inner) => match intersect_bounds(&acc, &inner) {
                        None => ResolvedRegion::Clip(acc),
                        Some(h) => {
                            if h == acc {
                                ResolvedRegion::Empty
                            } else {
                                ResolvedRegion::Difference {
                                    outer: acc,
                                    inner: h,
                                }
                            }
                        }
                    },
                }
            }
        }
    }
}

/// A clip whose complement is again axis-aligned: exactly one finite side on
/// exactly one axis (i.e. a halfspace). Returns the flipped halfspace.
fn flip_single_sided(bounds: &[(f64, f64)]) -> Option<Vec<(f64, f64)>> {
    let mut finite_sides = 0usize;
    let mut which: Option<(usize, bool)> = None;
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if lo.is_finite() {
            finite_sides += 1;
            which = Some((i, true));
        }
        if hi.is_finite() {
            finite_sides += 1;
            which = Some((i, false));
        }
    }
    let (axis, is_lower) = which?;
    if finite_sides != 1 {
        return None;
    }
    let mut out = vec![(f64::NEG_INFINITY, f64::INFINITY); bounds.len()];
    if is_lower {
        out[axis].1 = bounds[axis].0;
    } else {
        out[axis].0 = bounds[axis].1;
    }
    Some(out)
}

/// Intersect two sets of per-axis bounds; `None` when empty.
pub fn intersect_bounds(a: &[(f64, f64)], b: &[(f64, f64)]) -> Option<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(a.len());
    for (&(alo, ahi), &(blo, bhi)) in a.iter().zip(b) {
        let lo = alo.max(blo);
        let hi = ahi.min(bhi);
        if lo > hi {
            return None;
        }
        out.push((lo, hi));
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// Analytic oracles
// ---------------------------------------------------------------------------

/// Closed-form values attached to a density for cross-checking the numerics.
///
/// Each entry is optional; `None` (or a closure returning `None`) means the
/// family has no closed form for that quantity. Oracle entries must agree
/// with numerical recomputation within 1e-6 relative; the tests enforce this
/// for every populated entry.
#[derive(Clone, Default)]
pub struct AnalyticOracle {
    /// `p -> ||f||_p`, including `p = inf` for the peak.
    pub lp_norm: Option<NormOracleFn>,
    /// `(q, alpha, b) -> E_q[|X - b|^alpha]` for one-dimensional densities.
    pub q_moment: Option<MomentOracleFn>,
    /// `p -> h_p(f)` in nats; `p = 1` means the Shannon entropy.
    pub entropy: Option<EntropyOracleFn>,
}

impl AnalyticOracle {
    pub fn lp_norm(&self, p: f64) -> Option<f64> {
        self.lp_norm.as_ref().and_then(|f| f(p))
    }

    pub fn q_moment(&self, q: f64, alpha: f64, b: f64) -> Option<f64> {
        self.q_moment.as_ref().and_then(|f| f(q, alpha, b))
    }

    pub fn entropy(&self, p: f64) -> Option<f64> {
        self.entropy.as_ref().and_then(|f| f(p))
    }
}

// ---------------------------------------------------------------------------
// Density
// ---------------------------------------------------------------------------

/// Evaluable non-negative function on `R^n` with support metadata.
///
/// Evaluation is pure and deterministic; a `Density` is immutable after
/// construction and cheap to clone (the evaluator is shared).
#[derive(Clone)]
pub struct Density {
    dim: usize,
    label: String,
    support: SupportDescriptor,
    center: Vec<f64>,
    scales: Vec<f64>,
    eval_fn: EvalFn,
    oracle: AnalyticOracle,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("support", &self.support)
            .finish()
    }
}

impl Density {
    /// Wrap an arbitrary function; the absolute value is taken pointwise.
    pub fn from_fn<F>(dim: usize, support: SupportDescriptor, label: &str, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if support.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: support.dim(),
            });
        }
        let (center, scales) = hints_from_support(&support);
        Ok(Self {
            dim,
            label: label.to_string(),
            support,
            center,
            scales,
            eval_fn: Arc::new(move |x| f(x).abs()),
            oracle: AnalyticOracle::default(),
        })
    }

    /// Override the location/scale hints used by the essential-supremum
    /// search and the divergence heuristic on unbounded supports.
    pub fn with_hints(mut self, center: Vec<f64>, scales: Vec<f64>) -> Self {
        assert_eq!(center.len(), self.dim);
        assert_eq!(scales.len(), self.dim);
        self.center = center;
        self.scales = scales;
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    /// Indicator of a box: 1 inside, 0 outside (not normalized).
    pub fn indicator_box(bounds: Vec<(f64, f64)>) -> Result<Self> {
        let support = SupportDescriptor::bounded_box(bounds)?;
        let b = support.bounds().to_vec();
        let dim = support.dim();
        let mut d = Self::from_fn(dim, support, "indicator", move |x| {
            if x.iter().zip(&b).all(|(&xi, &(lo, hi))| xi >= lo && xi <= hi) {
                1.0
            } else {
                0.0
            }
        })?;
        d.oracle.lp_norm = {
            let vol: f64 = d.support.volume().expect("bounded box");
            Some(Arc::new(move |p: f64| {
                if p == f64::INFINITY {
                    Some(1.0)
                } else {
                    Some(vol.powf(1.0 / p))
                }
            }))
        };
        Ok(d)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support(&self) -> &SupportDescriptor {
        &self.support
    }

    pub fn oracle(&self) -> &AnalyticOracle {
        &self.oracle
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// `|f(x)|` with a dimension check.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok((self.eval_fn)(x))
    }

    /// `|f(x)|` without the dimension check (hot path for integrands).
    #[inline]
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        (self.eval_fn)(x)
    }

    // -- built-in families --------------------------------------------------

    /// Multivariate Gaussian with full covariance.
    pub fn gaussian(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let n = mean.len();
        if n == 0 || cov.len() != n || cov.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpec(
                "gaussian: cov must be square and match mean length".into(),
            ));
        }
        let m = DMatrix::from_fn(n, n, |i, j| cov[i][j]);
        crate::linalg::check_symmetric(&m)
            .map_err(|_| Error::InvalidSpec("gaussian: cov must be symmetric".into()))?;
        let chol = Cholesky::new(m.clone())
            .ok_or_else(|| Error::InvalidSpec("non-positive-definite covariance".into()))?;
        let det = chol.determinant();
        let precision = chol.inverse();
        let prec_rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| precision[(i, j)]).collect())
            .collect();
        let norm_const = ((2.0 * std::f64::consts::PI).powi(n as i32) * det).powf(-0.5);
        let mean_eval = mean.clone();
        let eval = move |x: &[f64]| {
            let mut quad = 0.0;
            for i in 0..n {
                let di = x[i] - mean_eval[i];
                let mut acc = 0.0;
                for j in 0..n {
                    acc += prec_rows[i][j] * (x[j] - mean_eval[j]);
                }
                quad += di * acc;
            }
            norm_const * (-0.5 * quad).exp()
        };

        let scales: Vec<f64> = (0..n).map(|i| cov[i][i].sqrt()).collect();
        let two_pi_n_det = (2.0 * std::f64::consts::PI).powi(n as i32) * det;
        let lp = move |p: f64| {
            if p == f64::INFINITY {
                Some(two_pi_n_det.powf(-0.5))
            } else {
                Some(two_pi_n_det.powf((1.0 - p) / (2.0 * p)) * p.powf(-(n as f64) / (2.0 * p)))
            }
        };
        let nf = n as f64;
        let ent = move |p: f64| {
            if p == f64::INFINITY {
                return Some(-(two_pi_n_det.powf(-0.5)).ln());
            }
            if p <= 0.0 {
                return None;
            }
            if (p - 1.0).abs() < 1e-12 {
                Some(0.5 * two_pi_n_det.ln() + nf / 2.0)
            } else {
                Some(0.5 * two_pi_n_det.ln() + nf / 2.0 * p.ln() / (p - 1.0))
            }
        };
        let mut oracle = AnalyticOracle {
            lp_norm: Some(Arc::new(lp)),
            entropy: Some(Arc::new(ent)),
            q_moment: None,
        };
        if n == 1 {
            let mu = mean[0];
            let var = cov[0][0];
            oracle.q_moment = Some(Arc::new(move |q: f64, alpha: f64, b: f64| {
                if (b - mu).abs() > 1e-12 * (1.0 + mu.abs()) {
                    return None; // closed form kept to the symmetric center
                }
                let s2 = var / q;
                Some((2.0 * s2).powf(alpha / 2.0) * gamma((alpha + 1.0) / 2.0)
                    / std::f64::consts::PI.sqrt())
            }));
        }

        let support = SupportDescriptor::all_space(n);
        Ok(Self {
            dim: n,
            label: "gaussian".into(),
            support,
            center: mean,
            scales,
            eval_fn: Arc::new(eval),
            oracle,
        })
    }

    pub fn gaussian_1d(mean: f64, var: f64) -> Result<Self> {
        Self::gaussian(vec![mean], vec![vec![var]])
    }

    /// Uniform density on a box, normalized to unit mass.
    pub fn uniform_box(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidSpec("uniform: empty box".into()));
        }
        let support = SupportDescriptor::bounded_box(bounds.clone())?;
        let vol = support.volume().expect("bounded");
        if vol <= 0.0 {
            return Err(Error::InvalidSpec(
                "uniform: box must have positive volume".into(),
            ));
        }
        let height = 1.0 / vol;
        let n = bounds.len();
        let b = bounds.clone();
        let eval = move |x: &[f64]| {
            if x.iter().zip(&b).all(|(&xi, &(lo, hi))| xi >= lo && xi <= hi) {
                height
            } else {
                0.0
            }
        };
        let lp = move |p: f64| {
            if p == f64::INFINITY {
                Some(height)
            } else {
                Some(vol.powf(1.0 / p - 1.0))
            }
        };
        let ent = move |p: f64| {
            if p == f64::INFINITY {
                Some(-height.ln())
            } else if p > 0.0 {
                Some(vol.ln())
            } else {
                None
            }
        };
        let mut oracle = AnalyticOracle {
            lp_norm: Some(Arc::new(lp)),
            entropy: Some(Arc::new(ent)),
            q_moment: None,
        };
        if n == 1 {
            let (lo, hi) = bounds[0];
            oracle.q_moment = Some(Arc::new(move |_q: f64, alpha: f64, b: f64| {
                // escort of a constant is the same constant
                let anti = |x: f64| {
                    let d: f64 = x - b;
                    d.signum() * d.abs().powf(alpha + 1.0) / (alpha + 1.0)
                };
                Some((anti(hi) - anti(lo)) / (hi - lo))
            }));
        }
        let center: Vec<f64> = bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect();
        let scales: Vec<f64> = bounds.iter().map(|&(lo, hi)| 0.5 * (hi - lo)).collect();
        Ok(Self {
            dim: n,
            label: "uniform".into(),
            support,
            center,
            scales,
            eval_fn: Arc::new(eval),
            oracle,
        })
    }

    /// Exponential density `rate * exp(-rate * x)` on `[0, inf)`.
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "exponential: rate must be positive and finite, got {rate}"
            )));
        }
        let support = SupportDescriptor::halfspace_product(vec![(0.0, f64::INFINITY)])?;
        let eval = move |x: &[f64]| {
            if x[0] < 0.0 {
                0.0
            } else {
                rate * (-rate * x[0]).exp()
            }
        };
        let lp = move |p: f64| {
            if p == f64::INFINITY {
                Some(rate)
            } else {
                Some(rate.powf(1.0 - 1.0 / p) * p.powf(-1.0 / p))
            }
        };
        let ent = move |p: f64| {
            if p == f64::INFINITY {
                Some(-rate.ln())
            } else if (p - 1.0).abs() < 1e-12 {
                Some(1.0 - rate.ln())
            } else if p > 0.0 {
                let norm = rate.powf(1.0 - 1.0 / p) * p.powf(-1.0 / p);
                Some(p / (1.0 - p) * norm.ln())
            } else {
                None
            }
        };
        let q_moment = move |q: f64, alpha: f64, b: f64| {
            if b.abs() > 1e-300 {
                return None; // closed form only about the origin
            }
            Some(gamma(alpha + 1.0) / (rate * q).powf(alpha))
        };
        Ok(Self {
            dim: 1,
            label: "exponential".into(),
            support,
            center: vec![1.0 / rate],
            scales: vec![1.0 / rate],
            eval_fn: Arc::new(eval),
            oracle: AnalyticOracle {
                lp_norm: Some(Arc::new(lp)),
                entropy: Some(Arc::new(ent)),
                q_moment: Some(Arc::new(q_moment)),
            },
        })
    }

    /// Laplace density `exp(-|x - mean| / scale) / (2 scale)`.
    pub fn laplace(mean: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "laplace: scale must be positive and finite, got {scale}"
            )));
        }
        let support = SupportDescriptor::all_space(1);
        let eval = move |x: &[f64]| (-(x[0] - mean).abs() / scale).exp() / (2.0 * scale);
        let lp = move |p: f64| {
            if p == f64::INFINITY {
                Some(1.0 / (2.0 * scale))
            } else {
                Some((2.0 * scale).powf((1.0 - p) / p) * p.powf(-1.0 / p))
            }
        };
        let ent = move |p: f64| {
            if p == f64::INFINITY {
                Some((2.0 * scale).ln())
            } else if (p - 1.0).abs() < 1e-12 {
                Some(1.0 + (2.0 * scale).ln())
            } else if p > 0.0 {
                let norm = (2.0 * scale).powf((1.0 - p) / p) * p.powf(-1.0 / p);
                Some(p / (1.0 - p) * norm.ln())
            } else {
                None
            }
        };
        let q_moment = move |q: f64, alpha: f64, b: f64| {
            if (b - mean).abs() > 1e-12 * (1.0 + mean.abs()) {
                return None;
            }
            Some(gamma(alpha + 1.0) * (scale / q).powf(alpha))
        };
        Ok(Self {
            dim: 1,
            label: "laplace".into(),
            support,
            center: vec![mean],
            scales: vec![scale],
            eval_fn: Arc::new(eval),
            oracle: AnalyticOracle {
                lp_norm: Some(Arc::new(lp)),
                entropy: Some(Arc::new(ent)),
                q_moment: Some(Arc::new(q_moment)),
            },
        })
    }

    /// Generalized Gaussian `A exp(-(|x - mean| / scale)^shape)` with
    /// `A = shape / (2 scale Gamma(1/shape))`.
    pub fn gen_gaussian(mean: f64, scale: f64, shape: f64) -> Result<Self> {
        if !(scale > 0.0 && shape > 0.0) || !scale.is_finite() || !shape.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "gen_gaussian: scale and shape must be positive, got scale={scale} shape={shape}"
            )));
        }
        let support = SupportDescriptor::all_space(1);
        let a = shape / (2.0 * scale * gamma(1.0 / shape));
        let eval = move |x: &[f64]| a * (-((x[0] - mean).abs() / scale).powf(shape)).exp();
        let lp = move |p: f64| {
            if p == f64::INFINITY {
                Some(a)
            } else {
                // int f^p = A^(p-1) p^(-1/shape)
                Some((a.powf(p - 1.0) * p.powf(-1.0 / shape)).powf(1.0 / p))
            }
        };
        let ent = move |p: f64| {
            if p == f64::INFINITY {
                Some(-a.ln())
            } else if (p - 1.0).abs() < 1e-12 {
                Some(1.0 / shape - a.ln())
            } else if p > 0.0 {
                let norm = (a.powf(p - 1.0) * p.powf(-1.0 / shape)).powf(1.0 / p);
                Some(p / (1.0 - p) * norm.ln())
            } else {
                None
            }
        };
        let q_moment = move |q: f64, alpha: f64, b: f64| {
            if (b - mean).abs() > 1e-12 * (1.0 + mean.abs()) {
                return None;
            }
            let se = scale / q.powf(1.0 / shape);
            Some(se.powf(alpha) * gamma((alpha + 1.0) / shape) / gamma(1.0 / shape))
        };
        Ok(Self {
            dim: 1,
            label: "gen_gaussian".into(),
            support,
            center: vec![mean],
            scales: vec![scale],
            eval_fn: Arc::new(eval),
            oracle: AnalyticOracle {
                lp_norm: Some(Arc::new(lp)),
                entropy: Some(Arc::new(ent)),
                q_moment: Some(Arc::new(q_moment)),
            },
        })
    }

    /// Finite mixture `sum_i w_i f_i`. Weights must sum to 1 within 1e-12.
    pub fn mixture(weights: Vec<f64>, components: Vec<Density>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::InvalidSpec(
                "mixture: weights and components must be non-empty and equal length".into(),
            ));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidSpec(
                "mixture: weights must be non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec("weights must sum to 1".into()));
        }
        let dim = components[0].dim;
        if components.iter().any(|c| c.dim != dim) {
            return Err(Error::InvalidSpec(
                "mixture: components must share one dimension".into(),
            ));
        }

        // support: union, over-approximated per axis
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        for c in &components {
            for (b, &(lo, hi)) in bounds.iter_mut().zip(c.support.bounds()) {
                b.0 = b.0.min(lo);
                b.1 = b.1.max(hi);
            }
        }
        let bounded = bounds.iter().all(|&(lo, hi)| lo.is_finite() && hi.is_finite());
        let support = if bounded {
            SupportDescriptor::bounded_box(bounds.clone())?
        } else {
            SupportDescriptor::halfspace_product(bounds.clone())?
        };

        let mut center = vec![0.0; dim];
        for (w, c) in weights.iter().zip(&components) {
            for (acc, &ci) in center.iter_mut().zip(c.center()) {
                *acc += w * ci;
            }
        }
        let mut scales = vec![0.0f64; dim];
        for c in &components {
            for axis in 0..dim {
                let spread = c.scales[axis] + (c.center[axis] - center[axis]).abs();
                scales[axis] = scales[axis].max(spread);
            }
        }

        let parts: Vec<(f64, EvalFn)> = weights
            .iter()
            .zip(&components)
            .map(|(&w, c)| (w, c.eval_fn.clone()))
            .collect();
        let eval = move |x: &[f64]| parts.iter().map(|(w, f)| w * f(x)).sum::<f64>();

        Ok(Self {
            dim,
            label: "mixture".into(),
            support,
            center,
            scales,
            eval_fn: Arc::new(eval),
            oracle: AnalyticOracle::default(),
        })
    }

    /// One-dimensional tabulated density with linear interpolation between
    /// knots, zero outside `[xs[0], xs[last]]`, normalized to unit mass.
    pub fn grid_1d(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() {
            return Err(Error::InvalidSpec(
                "grid: need at least two knots and values of equal length".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSpec(
                "grid: xs must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::InvalidSpec(
                "grid: values must be finite and non-negative".into(),
            ));
        }
        // exact trapezoid mass of the piecewise-linear interpolant
        let mass: f64 = xs
            .windows(2)
            .zip(values.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
            .sum();
        if mass <= 0.0 {
            return Err(Error::InvalidSpec("grid: zero total mass".into()));
        }
        let values: Vec<f64> = values.iter().map(|v| v / mass).collect();
        let (lo, hi) = (xs[0], *xs.last().unwrap());
        let support = SupportDescriptor::bounded_box(vec![(lo, hi)])?;
        let knots = xs.clone();
        let eval = move |x: &[f64]| {
            let v = x[0];
            if v < lo || v > hi {
                return 0.0;
            }
            let idx = knots.partition_point(|&k| k <= v).min(knots.len() - 1);
            let (i0, i1) = (idx - 1, idx);
            let t = (v - knots[i0]) / (knots[i1] - knots[i0]);
            values[i0] + t * (values[i1] - values[i0])
        };
        Ok(Self {
            dim: 1,
            label: "grid".into(),
            support,
            center: vec![0.5 * (lo + hi)],
            scales: vec![0.5 * (hi - lo)],
            eval_fn: Arc::new(eval),
            oracle: AnalyticOracle::default(),
        })
    }
}

fn hints_from_support(support: &SupportDescriptor) -> (Vec<f64>, Vec<f64>) {
    let center = support
        .bounds()
        .iter()
        .map(|&(lo, hi)| {
            if lo.is_finite() && hi.is_finite() {
                0.5 * (lo + hi)
            } else if lo.is_finite() {
                lo + 1.0
            } else if hi.is_finite() {
                hi - 1.0
            } else {
                0.0
            }
        })
        .collect();
    let scales = support
        .bounds()
        .iter()
        .map(|&(lo, hi)| {
            if lo.is_finite() && hi.is_finite() {
                (0.5 * (hi - lo)).max(1e-12)
            } else {
                1.0
            }
        })
        .collect();
    (center, scales)
}

// ---------------------------------------------------------------------------
// Spec parsing
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct GaussianParams {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct UniformParams {
    #[serde(rename = "box")]
    bounds: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct ExponentialParams {
    rate: f64,
}

#[derive(Deserialize)]
struct LaplaceParams {
    #[serde(default)]
    mean: f64,
    scale: f64,
}

#[derive(Deserialize)]
struct GenGaussianParams {
    #[serde(default)]
    mean: f64,
    #[serde(default = "one")]
    scale: f64,
    shape: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
struct MixtureParams {
    weights: Vec<f64>,
    components: Vec<serde_json::Value>,
}

#[derive(Deserialize)]
struct GridParams {
    grid: GridData,
}

#[derive(Deserialize)]
struct GridData {
    xs: Vec<f64>,
    values: Vec<f64>,
}

/// Parse a JSON density-spec document into a [`Density`].
pub fn parse_density_spec(spec_text: &str) -> Result<Density> {
    let value: serde_json::Value =
        serde_json::from_str(spec_text).map_err(|e| Error::Parse(format!("density spec: {e}")))?;
    density_from_value(&value)
}

fn density_from_value(value: &serde_json::Value) -> Result<Density> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::InvalidSpec("density spec must be a JSON object".into()))?;
    let family = obj
        .get("family")
        .and_then(|f| f.as_str())
        .ok_or_else(|| Error::InvalidSpec("missing 'family' field".into()))?;
    let label = obj.get("label").and_then(|l| l.as_str());

    let mut density = match family {
        "gaussian" => {
            let p: GaussianParams = from_value(value)?;
            Density::gaussian(p.mean, p.cov)?
        }
        "uniform" => {
            let p: UniformParams = from_value(value)?;
            Density::uniform_box(p.bounds)?
        }
        "exponential" => {
            let p: ExponentialParams = from_value(value)?;
            Density::exponential(p.rate)?
        }
        "laplace" => {
            let p: LaplaceParams = from_value(value)?;
            Density::laplace(p.mean, p.scale)?
        }
        "gen_gaussian" => {
            let p: GenGaussianParams = from_value(value)?;
            Density::gen_gaussian(p.mean, p.scale, p.shape)?
        }
        "mixture" => {
            let p: MixtureParams = from_value(value)?;
            let components = p
                .components
                .iter()
                .map(density_from_value)
                .collect::<Result<Vec<_>>>()?;
            Density::mixture(p.weights, components)?
        }
        "grid" => {
            let p: GridParams = from_value(value)?;
            Density::grid_1d(p.grid.xs, p.grid.values)?
        }
        other => return Err(Error::UnknownFamily(other.into())),
    };
    if let Some(l) = label {
        density = density.with_label(l);
    }
    Ok(density)
}

fn from_value<T: serde::de::DeserializeOwned>(value: &serde_json::Value) -> Result<T> {
    let mut v = value.clone();
    if let Some(obj) = v.as_object_mut() {
        obj.remove("family");
        obj.remove("label");
    }
    serde_json::from_value(v).map_err(|e| Error::InvalidSpec(e.to_string()))
}
