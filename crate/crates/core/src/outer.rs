//! First viscous corrector of the outer expansion and the partial sums
//! `u0 + nu u1`.
//!
//! The corrector solves `d_t u1 + d_x(u0 u1) = d_x^2 u0` with zero data at
//! `t0`. Along the characteristic with foot `xi` it equals
//! `(t - t0) u0''(xi) / J^2`, `J = 1 + (t - t0) u0'(xi)`; in hodograph
//! variables `-d_x^2 u0 / d_x u0 + f(u0) d_x u0` with `f = -w0'' / w0'`.

use crate::data::{inverse_derivatives, InitialDatum};
use crate::error::{Error, Result};
use crate::inviscid::{entropy_solution, entropy_state, window_solution};
use crate::profile::{eval_profile, ProfileParams};

/// Hodograph route; only defined where `u0(t, x)` lies in the window.
pub fn u1_hodograph(d: &InitialDatum, t: f64, x: f64) -> Result<f64> {
    let y = window_solution(d, t, x)?;
    let s = t - d.t0();
    let (_, w1, w2) = inverse_derivatives(d, y)?;
    let wy = w1 + s;
    let ux = 1.0 / wy;
    let uxx = -w2 / (wy * wy * wy);
    let f = -w2 / w1;
    Ok(-uxx / ux + f * ux)
}

/// Characteristic route, valid on all of `[t0, 0) x R`.
pub fn u1_transported(d: &InitialDatum, t: f64, x: f64) -> Result<f64> {
    let st = entropy_state(d, t, x)?;
    let s = t - d.t0();
    let second = d.derivatives(st.foot)[2];
    Ok(s * second / (st.jacobian * st.jacobian))
}

/// First outer corrector `u1(t, x)`.
pub fn u1_exact(d: &InitialDatum, t: f64, x: f64) -> Result<f64> {
    if t >= 0.0 {
        return Err(Error::InvalidArgument(format!("corrector needs t < 0, got {t}")));
    }
    if (x - d.c_far() * (t - d.t0())).abs() >= d.support() {
        return Ok(0.0);
    }
    match u1_hodograph(d, t, x) {
        Err(Error::WindowRequired { .. }) => u1_transported(d, t, x),
        other => other,
    }
}

/// Leading homogeneous term `-6 beta3 u m^2` of the corrector.
pub fn u10_closed_form(params: &ProfileParams, t: f64, x: f64) -> Result<f64> {
    let p = eval_profile(params, t, x)?;
    Ok(-6.0 * params.beta3 * p.u * p.m * p.m)
}

/// `u0 + [K = 1] nu u1`.
pub fn outer_sum(d: &InitialDatum, k: u8, nu: f64, t: f64, x: f64) -> Result<f64> {
    if k > 1 {
        return Err(Error::InvalidArgument(format!("outer truncation K = {k} not supported")));
    }
    if !(nu >= 0.0) {
        return Err(Error::InvalidArgument(format!("viscosity must be non-negative, got {nu}")));
    }
    let u0 = entropy_solution(d, t, x)?;
    if k == 0 || nu == 0.0 {
        return Ok(u0);
    }
    Ok(u0 + nu * u1_exact(d, t, x)?)
}
