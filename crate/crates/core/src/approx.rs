//! The blended approximate solution `theta u_in + (1 - theta) u_out`, its
//! zone classification by the adapted distance `d`, and the residual
//! `E = -d_t u - u d_x u + nu d_x^2 u`.

use crate::data::InitialDatum;
use crate::error::{Error, Result};
use crate::inner::inner_state_physical;
use crate::inviscid::{entropy_solution, entropy_state};
use crate::outer::outer_sum;
use crate::profile::eval_profile;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxConfig {
    pub nu: f64,
    /// Truncation order, 0 or 1.
    pub k: u8,
    pub alpha: f64,
    pub eps_t: f64,
    pub quad_tol: f64,
}

impl ApproxConfig {
    pub fn new(nu: f64, k: u8) -> Result<Self> {
        ApproxConfig { nu, k, alpha: 0.2, eps_t: 1e-6, quad_tol: 1e-10 }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("viscosity must be positive, got {}", self.nu));
        }
        if self.k > 1 {
            return bad(format!("truncation K = {} not supported", self.k));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.eps_t > 0.0) {
            return bad(format!("eps_t must be positive, got {}", self.eps_t));
        }
        if !(1e-14..=1e-6).contains(&self.quad_tol) {
            return bad(format!("quad_tol {} outside [1e-14, 1e-6]", self.quad_tol));
        }
        Ok(self)
    }

    /// Inner radius `nu^alpha`; the matching zone is `[nu^alpha, 2 nu^alpha]`.
    pub fn inner_radius(&self) -> f64 {
        self.nu.powf(self.alpha)
    }
}

fn smooth_step(r: f64) -> f64 {
    if r > 0.0 {
        (-1.0 / r).exp()
    } else {
        0.0
    }
}

/// Smooth cutoff: 1 on `[0, 1]`, 0 on `[2, inf)`.
pub fn vartheta(s: f64) -> f64 {
    if s <= 1.0 {
        return 1.0;
    }
    if s >= 2.0 {
        return 0.0;
    }
    let a = smooth_step(2.0 - s);
    a / (a + smooth_step(s - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Zone {
    Inner,
    Matching,
    Outer,
}

pub fn classify(cfg: &ApproxConfig, d: &InitialDatum, t: f64, x: f64) -> Result<Zone> {
    let r = eval_profile(&d.profile_params(), t, x)?.d / cfg.inner_radius();
    Ok(if r <= 1.0 {
        Zone::Inner
    } else if r >= 2.0 {
        Zone::Outer
    } else {
        Zone::Matching
    })
}

pub fn cutoff_theta(cfg: &ApproxConfig, d: &InitialDatum, t: f64, x: f64) -> Result<f64> {
    if !(t < 0.0) {
        return Err(Error::InvalidArgument(format!("cutoff needs t < 0, got {t}")));
    }
    Ok(vartheta(eval_profile(&d.profile_params(), t, x)?.d / cfg.inner_radius()))
}

/// Pieces of the blend at one point. `inner` is only evaluated where
/// `theta > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxParts {
    pub theta: f64,
    pub inner: Option<f64>,
    pub outer: f64,
    pub value: f64,
}

fn check_time(cfg: &ApproxConfig, d: &InitialDatum, t: f64) -> Result<()> {
    if !(t >= d.t0() && t <= -cfg.eps_t) {
        return Err(Error::InvalidArgument(format!("time {t} outside [{}, {}]", d.t0(), -cfg.eps_t)));
    }
    Ok(())
}

/// For `K = 1` the outer part carries `nu u1` while the inner part stays
/// `U0`; the first inner corrector is not available.
pub fn u_app_parts(cfg: &ApproxConfig, d: &InitialDatum, t: f64, x: f64) -> Result<ApproxParts> {
    check_time(cfg, d, t)?;
    let theta = cutoff_theta(cfg, d, t, x)?;
    let outer = outer_sum(d, cfg.k, cfg.nu, t, x)?;
    if theta == 0.0 {
        return Ok(ApproxParts { theta, inner: None, outer, value: outer });
    }
    let inner = inner_state_physical(&d.profile_params(), cfg.nu, t, x, cfg.quad_tol)?.u;
    let value = if theta == 1.0 { inner } else { theta * inner + (1.0 - theta) * outer };
    Ok(ApproxParts { theta, inner: Some(inner), outer, value })
}

pub fn u_app(cfg: &ApproxConfig, d: &InitialDatum, t: f64, x: f64) -> Result<f64> {
    Ok(u_app_parts(cfg, d, t, x)?.value)
}

const CENTRAL_1: [f64; 5] = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
const CENTRAL_2: [f64; 5] = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
const FORWARD_1: [f64; 5] = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -1.0 / 4.0];

/// Finite-difference steps `(h_t, h_x)` adapted to the local scale `d`.
pub fn residual_steps(d: &InitialDatum, t: f64, x: f64) -> Result<(f64, f64)> {
    // beyond d = 1 the datum's own unit scale takes over
    let dd = eval_profile(&d.profile_params(), t, x)?.d.min(1.0);
    let hx = (1e-3 * dd.powi(3)).max(1e-5);
    let ht = (1e-3 * dd * dd).max(1e-5).min(0.25 * t.abs());
    Ok((ht, hx))
}

/// `E` by 5-point differences of [`u_app`]. Near `t0` the time derivative
/// switches to a one-sided stencil.
pub fn residual_e(cfg: &ApproxConfig, d: &InitialDatum, t: f64, x: f64) -> Result<f64> {
    let (ht, hx) = residual_steps(d, t, x)?;
    residual_e_with_steps(cfg, d, t, x, ht, hx)
}

/// [`residual_e`] with explicit steps.
pub fn residual_e_with_steps(cfg: &ApproxConfig, d: &InitialDatum, t: f64, x: f64, ht: f64, hx: f64) -> Result<f64> {
    if cfg.k != 0 {
        return Err(Error::InvalidArgument("residual is implemented for K = 0 only".into()));
    }
    check_time(cfg, d, t)?;
    let f = |t: f64, x: f64| u_app(cfg, d, t, x);
    let mut row = [0.0; 5];
    for (k, v) in row.iter_mut().enumerate() {
        *v = f(t, x + (k as f64 - 2.0) * hx)?;
    }
    let u = row[2];
    let ux = dot(&CENTRAL_1, &row) / hx;
    let uxx = dot(&CENTRAL_2, &row) / (hx * hx);
    let ut = if t - 2.0 * ht >= d.t0() && t + 2.0 * ht <= -cfg.eps_t {
        let mut col = [0.0; 5];
        for (k, v) in col.iter_mut().enumerate() {
            *v = f(t + (k as f64 - 2.0) * ht, x)?;
        }
        dot(&CENTRAL_1, &col) / ht
    } else {
        let sign = if t - 2.0 * ht < d.t0() { 1.0 } else { -1.0 };
        let h = ht.min(0.25 * (-cfg.eps_t - d.t0()));
        let mut col = [0.0; 5];
        for (k, v) in col.iter_mut().enumerate() {
            *v = f(t + sign * k as f64 * h, x)?;
        }
        sign * dot(&FORWARD_1, &col) / h
    };
    Ok(-ut - u * ux + cfg.nu * uxx)
}

fn dot(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Closed-form residual where one is known at `K = 0`: zero where
/// `theta = 1`, `nu d_x^2 u0` where `theta = 0`, `None` in between.
pub fn residual_closed_form(cfg: &ApproxConfig, d: &InitialDatum, t: f64, x: f64) -> Result<Option<f64>> {
    check_time(cfg, d, t)?;
    let theta = cutoff_theta(cfg, d, t, x)?;
    if theta == 1.0 {
        Ok(Some(0.0))
    } else if theta == 0.0 {
        Ok(Some(cfg.nu * entropy_state(d, t, x)?.uxx))
    } else {
        Ok(None)
    }
}

/// `|u_in - u_out|` at `K = 0`, for the overlap diagnostics.
pub fn mismatch(cfg: &ApproxConfig, d: &InitialDatum, t: f64, x: f64) -> Result<f64> {
    let inner = inner_state_physical(&d.profile_params(), cfg.nu, t, x, cfg.quad_tol)?.u;
    Ok((inner - entropy_solution(d, t, x)?).abs())
}
