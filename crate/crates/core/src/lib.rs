//! Multi-index rearrangements of conditionally convergent series.
//!
//! Given a conditionally convergent series `a_m` and, for every summation
//! order `σ ∈ Sym(n)`, a target sequence `s_k^σ`, [`builder`] constructs a
//! finite truncation of an n-dimensional rearrangement `b(j_1, ..., j_n)`
//! whose iterated prefix sums in each order approximate the targets, and
//! [`verify`] checks it. [`fubini`] turns such coefficients into a smooth
//! function whose iterated integrals depend on the integration order.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod builder;
pub mod cli;
pub mod fubini;
pub mod par;
pub mod partition;
pub mod quad;
pub mod riemann;
pub mod series;
pub mod sum;
pub mod verify;
