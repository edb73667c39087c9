//! Escort statistics, `L^p`-norms, and norm-inequality certificates for
//! densities on `R^n`.
//!
//! The crate is organized around a small pipeline:
//!
//! - [`density`]: density families (Gaussian, uniform box, exponential,
//!   Laplace, generalized Gaussian, mixtures, tabulated grids) plus regions
//!   of `R^n`, built from a declarative JSON schema.
//! - [`integrate`]: the single numerical substrate. Adaptive Gauss-Kronrod
//!   in one dimension, iterated tensor rules for 2-3 dimensions, scrambled
//!   quasi-Monte-Carlo above that. Every result carries an error estimate.
//! - [`escort`]: q-expectations, q-moments, q-covariances and `L^p`-norms
//!   (including the essential supremum at `p = inf`).
//! - [`entropy`]: Rényi, Shannon, and Tsallis entropy functionals and the
//!   q-exponential.
//! - [`bounds`]: each norm/entropy/probability inequality evaluated as a
//!   [`bounds::BoundCertificate`] with both sides, slack, and error bars.
//! - [`harness`]: verification campaigns: parameter sweeps, proof-chain
//!   sandwich checks, whitening identities, GM-AM checks, CSV reports.
//!
//! All computations are pure and deterministic for a fixed seed; values are
//! safe to share across threads.

pub mod bounds;
pub mod density;
pub mod entropy;
pub mod error;
pub mod escort;
pub mod harness;
pub mod integrate;
pub mod linalg;
pub mod special;

pub use error::{Error, Result};
