//! Metrics for comparing binary-outcome risk models — AUC, average precision
//! (AP), and the scaled Brier score (sBrS) — together with their incremental
//! values (the change in each metric when moving from an "old" model to a
//! "new" one).
//!
//! Everything is available in two flavors:
//!
//! * **empirical** — nonparametric estimators on a labeled [`empirical::Cohort`];
//! * **analytic** — exact population values computed by quadrature from a
//!   [`distributions::ScoreDistribution`] (the pair of event / non-event
//!   conditional score distributions plus the event rate).
//!
//! On top of these sits a probit population study ([`probit`], [`study`]):
//! a true risk model `Phi(b0 + b1*X + b2*Y + b3*X*Y)` with standard-normal
//! markers, two misspecified working models fitted by population estimating
//! equations, and a grid runner that sweeps thousands of coefficient
//! combinations and summarizes how the three incremental-value metrics agree.

// Reference constants are kept at the full precision they were computed at,
// and validation guards negate comparisons on purpose so that NaN fails them.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod distributions;
pub mod empirical;
mod error;
pub mod numerics;
pub mod probit;
pub mod sim;
pub mod study;

pub use error::{Error, Result, SolverReport};
