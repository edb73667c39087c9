//! Verification campaigns: proof-chain sandwich checks, whitening
//! identities, GM-AM checks, and parameter sweeps with CSV reports.
//!
//! The sweep machinery evaluates a set of inequalities over a grid of
//! (density, q, r, alpha) cells and writes one row per certificate. Grid
//! cells that violate an inequality's preconditions (q >= r, wrong
//! dimension, unbounded support for the finite-measure baseline) are
//! counted as skipped, and per-cell numerical failures are recorded in the
//! row's status column; neither aborts a sweep. Two runs with the same
//! config produce byte-identical report bodies.
