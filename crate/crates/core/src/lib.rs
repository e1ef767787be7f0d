//! Matched inner/outer asymptotics for the viscous Burgers equation
//! `u_t + u u_x = nu u_xx` near the first shock formation point of the
//! inviscid flow, together with exact reference solutions and error metrics.
//!
//! Every datum is first moved to a normal frame in which the shock forms at
//! `(t, x) = (0, 0)` with `u = 0` there; see [`data::normalize_gauge`].

// Negated float comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod data;
pub mod error;
pub mod experiment;
pub mod inner;
pub mod inviscid;
pub mod jet;
pub mod metrics;
pub mod outer;
pub mod profile;
pub mod quadrature;
pub mod spline;
pub mod viscous;

pub use error::{Error, Result};
