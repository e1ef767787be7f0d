//! Entropy solution of the inviscid problem on `[t0, 0]`, before the shock.
//! Near the value window the solution is found by inverting the hodograph
//! map `w(t, y) = w0(y) + (t - t0) y`; elsewhere by following the
//! characteristic back to its foot point.

use crate::data::{inverse_derivatives, inverse_on_window, InitialDatum};
use crate::error::{Error, Result};
use crate::profile::{eval_profile, ProfileParams};

/// Solution value with its first two `x` derivatives and the foot point
/// `xi` of the characteristic through `(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InviscidState {
    pub u: f64,
    pub ux: f64,
    pub uxx: f64,
    pub foot: f64,
    /// `1 + (t - t0) u0'(xi)`.
    pub jacobian: f64,
}

fn elapsed(d: &InitialDatum, t: f64) -> Result<f64> {
    if !t.is_finite() || t < d.t0() {
        return Err(Error::InvalidArgument(format!("time {t} precedes the initial time {}", d.t0())));
    }
    if t > 0.0 {
        return Err(Error::CharacteristicsCrossed(t));
    }
    Ok(t - d.t0())
}

/// `w(t, y) = w0(y) + (t - t0) y`.
pub fn omega(d: &InitialDatum, t: f64, y: f64) -> Result<f64> {
    let s = elapsed(d, t)?;
    Ok(inverse_on_window(d, y)? + s * y)
}

/// `(w, d_y w, d_y^2 w)` at `(t, y)`.
pub fn omega_derivatives(d: &InitialDatum, t: f64, y: f64) -> Result<(f64, f64, f64)> {
    let s = elapsed(d, t)?;
    let (w, w1, w2) = inverse_derivatives(d, y)?;
    Ok((w + s * y, w1 + s, w2))
}

/// Foot point `xi` with `xi + (t - t0) u0(xi) = x`.
pub fn characteristic_foot(d: &InitialDatum, t: f64, x: f64) -> Result<f64> {
    let s = elapsed(d, t)?;
    let c = d.c_far();
    let flat = x - c * s;
    if flat.abs() >= d.support() {
        return Ok(flat);
    }
    let (umin, umax) = d.range();
    let (mut a, mut b) = (x - s * umax, x - s * umin);
    let mut xi = flat.clamp(a, b);
    for _ in 0..200 {
        let der = d.derivatives(xi);
        let g = xi + s * der[0] - x;
        let dg = 1.0 + s * der[1];
        if dg < 0.0 {
            return Err(Error::CharacteristicsCrossed(t));
        }
        if g == 0.0 {
            return Ok(xi);
        }
        if g > 0.0 {
            b = xi;
        } else {
            a = xi;
        }
        let mut next = if dg > 0.0 { xi - g / dg } else { f64::NAN };
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - xi).abs() <= 2.0 * f64::EPSILON * xi.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        xi = next;
    }
    Ok(xi)
}

/// Solution and derivatives through the characteristic foot:
/// `d_x u = u0'/J`, `d_x^2 u = u0''/J^3`.
pub fn entropy_state(d: &InitialDatum, t: f64, x: f64) -> Result<InviscidState> {
    let s = elapsed(d, t)?;
    let xi = characteristic_foot(d, t, x)?;
    let der = d.derivatives(xi);
    let jac = 1.0 + s * der[1];
    Ok(InviscidState { u: der[0], ux: der[1] / jac, uxx: der[2] / (jac * jac * jac), foot: xi, jacobian: jac })
}

/// Spatial interval covered by the hodograph window at time `t`.
pub fn window_span(d: &InitialDatum, t: f64) -> Result<(f64, f64)> {
    let s = elapsed(d, t)?;
    let (lo, hi) = d.foot_interval();
    let e = d.window();
    Ok((lo + s * e, hi - s * e))
}

/// Hodograph route: the `y` in the window with `w(t, y) = x`.
pub fn window_solution(d: &InitialDatum, t: f64, x: f64) -> Result<f64> {
    let s = elapsed(d, t)?;
    let (left, right) = window_span(d, t)?;
    if !(x > left && x < right) {
        return Err(Error::WindowRequired { t, x });
    }
    let e = d.window();
    // w is decreasing in y
    let (mut a, mut b) = (-e, e);
    let mut y = (x / t.min(-f64::MIN_POSITIVE)).clamp(-0.5 * e, 0.5 * e);
    for _ in 0..200 {
        let (w, w1, _) = inverse_derivatives(d, y)?;
        let g = w + s * y - x;
        let dg = w1 + s;
        if g == 0.0 {
            return Ok(y);
        }
        if g > 0.0 {
            a = y;
        } else {
            b = y;
        }
        let mut next = if dg < 0.0 { y - g / dg } else { f64::NAN };
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - y).abs() <= 2.0 * f64::EPSILON * y.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        y = next;
    }
    Ok(y)
}

/// Entropy solution `u0(t, x)` for `t0 <= t <= 0`.
pub fn entropy_solution(d: &InitialDatum, t: f64, x: f64) -> Result<f64> {
    let s = elapsed(d, t)?;
    if (x - d.c_far() * s).abs() >= d.support() {
        return Ok(d.c_far());
    }
    match window_solution(d, t, x) {
        Ok(y) => Ok(y),
        Err(Error::WindowRequired { .. }) => Ok(entropy_state(d, t, x)?.u),
        Err(e) => Err(e),
    }
}

/// Leading homogeneous pieces of the entropy solution near the origin:
/// the cubic profile and the correction `beta4 u^4 m`.
pub fn u0_homog_components(params: &ProfileParams, beta4: f64, t: f64, x: f64) -> Result<(f64, f64)> {
    let p = eval_profile(params, t, x)?;
    Ok((p.u, beta4 * p.u.powi(4) * p.m))
}
