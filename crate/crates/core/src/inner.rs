//! Leading inner solution `U0(T, X) = -<zeta>` under the weight
//! `exp(X zeta / 2 + T zeta^2 / 4 - beta3 zeta^4 / 8)`, which solves the
//! unit-viscosity Burgers equation on the whole plane.
//!
//! Moments are taken about the maximiser `zeta*` of the exponent, so for
//! `T <= 0` (where `zeta* = -u(T, X)` for the cubic profile `u`) the
//! deviation `U0 - u` is available without cancellation.

use crate::error::{Error, Result};
use crate::profile::{eval_profile, ProfileParams};
use crate::quadrature::{integrate, QuadOptions};

pub const DEFAULT_TOL: f64 = 1e-12;
const TAIL_MARGIN: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticLaplaceIntegrand {
    pub t: f64,
    pub x: f64,
    pub beta3: f64,
    /// Power of `zeta` in the numerator.
    pub moment: u32,
}

/// A positive or signed quantity stored as `scaled * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceValue {
    pub log_scale: f64,
    pub scaled: f64,
}

impl LaplaceValue {
    pub fn value(&self) -> f64 {
        self.scaled * self.log_scale.exp()
    }
}

#[derive(Debug, Clone, Copy)]
struct Exponent {
    t: f64,
    x: f64,
    beta3: f64,
}

impl Exponent {
    fn at(&self, z: f64) -> f64 {
        0.5 * self.x * z + 0.25 * self.t * z * z - 0.125 * self.beta3 * z.powi(4)
    }

    /// `f(c + eta) - f(c)` expanded exactly in `eta`.
    fn increment(&self, c: f64, eta: f64) -> f64 {
        let b = self.beta3;
        let d1 = 0.5 * self.x + 0.5 * self.t * c - 0.5 * b * c * c * c;
        let d2 = 0.5 * self.t - 1.5 * b * c * c;
        let d3 = -3.0 * b * c;
        let d4 = -3.0 * b;
        eta * (d1 + eta * (d2 / 2.0 + eta * (d3 / 6.0 + eta * d4 / 24.0)))
    }

    /// Real critical points `beta3 z^3 - T z - X = 0`, ascending.
    fn critical_points(&self, params: &ProfileParams) -> Result<Vec<f64>> {
        if self.t <= 0.0 {
            return Ok(vec![-eval_profile(params, self.t, self.x)?.u]);
        }
        let p = -self.t / self.beta3;
        let q = -self.x / self.beta3;
        let disc = 4.0 * p * p * p + 27.0 * q * q;
        let mut roots = if disc >= 0.0 {
            let s = (0.25 * q * q + p * p * p / 27.0).max(0.0).sqrt();
            let a = -q.signum() * (0.5 * q.abs() + s).cbrt();
            vec![if a == 0.0 { 0.0 } else { a - p / (3.0 * a) }]
        } else {
            let r = 2.0 * (-p / 3.0).sqrt();
            let phi = ((3.0 * q / (p * r)).clamp(-1.0, 1.0)).acos() / 3.0;
            (0..3).map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos()).collect()
        };
        for z in roots.iter_mut() {
            for _ in 0..3 {
                let g = self.beta3 * *z * *z * *z - self.t * *z - self.x;
                let dg = 3.0 * self.beta3 * *z * *z - self.t;
                if dg.abs() > 0.0 {
                    *z -= g / dg;
                }
            }
        }
        roots.sort_by(|a, b| a.total_cmp(b));
        Ok(roots)
    }
}

/// Truncated integration domain and global maximiser for the weight.
fn weight_domain(e: &Exponent, params: &ProfileParams, tol: f64) -> Result<(f64, Vec<f64>, f64, f64)> {
    let crit = e.critical_points(params)?;
    let center = crit.iter().copied().max_by(|a, b| e.at(*a).total_cmp(&e.at(*b))).ok_or(Error::EmptyGrid)?;
    let drop = (1.0 / tol).ln() + TAIL_MARGIN;
    let curvature = (1.5 * e.beta3 * center * center - 0.5 * e.t).abs().max(1e-3 * e.beta3.sqrt());
    let width = curvature.sqrt().recip();
    let reach = |from: f64, dir: f64| -> f64 {
        let mut step = width;
        let mut inside = from;
        while e.increment(center, from + dir * step - center) > -drop {
            inside = from + dir * step;
            step *= 2.0;
        }
        let mut outside = from + dir * step;
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if e.increment(center, mid - center) > -drop {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        outside
    };
    let lo = reach(crit[0], -1.0);
    let hi = reach(crit[crit.len() - 1], 1.0);
    Ok((center, crit, lo, hi))
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-14..=1e-6).contains(&tol) {
        return Err(Error::InvalidArgument(format!("tolerance {tol:e} outside [1e-14, 1e-6]")));
    }
    Ok(())
}

/// `int zeta^k exp(X zeta/2 + T zeta^2/4 - beta3 zeta^4/8) d zeta`.
pub fn quartic_laplace(q: &QuarticLaplaceIntegrand, tol: f64) -> Result<LaplaceValue> {
    check_tol(tol)?;
    let params = ProfileParams::new(q.beta3)?;
    let e = Exponent { t: q.t, x: q.x, beta3: q.beta3 };
    let (center, crit, lo, hi) = weight_domain(&e, &params, tol)?;
    let k = q.moment as i32;
    let r = integrate(
        |z| [z.powi(k) * e.increment(center, z - center).exp()],
        lo,
        hi,
        &crit,
        &QuadOptions::relative(tol),
    )?;
    Ok(LaplaceValue { log_scale: e.at(center), scaled: r.value[0] })
}

/// `U0` with its first derivatives, `d_X^2 U0`, and the deviation from
/// the cubic profile (`NaN` for `T > 0`, where the profile is undefined).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerState {
    pub u: f64,
    pub u_x: f64,
    pub u_t: f64,
    pub u_xx: f64,
    pub deviation: f64,
}

/// Evaluated at `|X|` and reflected, so oddness in `X` holds exactly.
pub fn inner_state(params: &ProfileParams, t: f64, x: f64, tol: f64) -> Result<InnerState> {
    check_tol(tol)?;
    if !(t.is_finite() && x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite inner coordinates".into()));
    }
    let s = inner_state_nonneg(params, t, x.abs(), tol)?;
    Ok(if x > 0.0 {
        s
    } else if x < 0.0 {
        InnerState { u: -s.u, u_x: s.u_x, u_t: -s.u_t, u_xx: -s.u_xx, deviation: -s.deviation }
    } else {
        InnerState { u: 0.0, u_x: s.u_x, u_t: 0.0, u_xx: 0.0, deviation: if t <= 0.0 { 0.0 } else { f64::NAN } }
    })
}

fn inner_state_nonneg(params: &ProfileParams, t: f64, x: f64, tol: f64) -> Result<InnerState> {
    let e = Exponent { t, x, beta3: params.beta3 };
    let (c, crit, lo, hi) = weight_domain(&e, params, tol)?;
    let r = integrate(
        |z| {
            let eta = z - c;
            let w = e.increment(c, eta).exp();
            [w, eta * w, eta * eta * w, eta * eta * eta * w]
        },
        lo,
        hi,
        &crit,
        &QuadOptions::relative(tol),
    )?;
    let m0 = r.value[0];
    let (m1, m2, m3) = (r.value[1] / m0, r.value[2] / m0, r.value[3] / m0);
    let var = m2 - m1 * m1;
    Ok(InnerState {
        u: -(c + m1),
        u_x: -0.5 * var,
        u_t: -0.25 * (2.0 * c * var + m3 - m1 * m2),
        u_xx: -0.25 * (m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1),
        deviation: if t <= 0.0 { -m1 } else { f64::NAN },
    })
}

/// `U0(T, X)`.
pub fn u0_inner(params: &ProfileParams, t: f64, x: f64) -> Result<f64> {
    Ok(inner_state(params, t, x, DEFAULT_TOL)?.u)
}

/// `nu^{1/4} U0(nu^{-1/2} t, nu^{-3/4} x)` together with physical derivatives.
pub fn inner_state_physical(params: &ProfileParams, nu: f64, t: f64, x: f64, tol: f64) -> Result<InnerState> {
    if !(nu > 0.0) {
        return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
    }
    let q = nu.sqrt().sqrt();
    let s = inner_state(params, t / (q * q), x / (q * q * q), tol)?;
    Ok(InnerState {
        u: q * s.u,
        u_x: s.u_x / (q * q),
        u_t: s.u_t / q,
        u_xx: s.u_xx / (q * q * q * q * q),
        deviation: q * s.deviation,
    })
}

pub fn inner_term_physical(params: &ProfileParams, nu: f64, t: f64, x: f64) -> Result<f64> {
    Ok(inner_state_physical(params, nu, t, x, DEFAULT_TOL)?.u)
}

/// `-sqrt(T / beta3) tanh(xi / (2 sqrt(beta3)))`: the far-future shape of
/// `U0(T, T^{-1/2} xi)`.
pub fn viscous_shock_profile(params: &ProfileParams, t: f64, xi: f64) -> f64 {
    -(t / params.beta3).sqrt() * (xi / (2.0 * params.beta3.sqrt())).tanh()
}

/// Half jump `sqrt(t / beta3)` of the inviscid shock shortly after it forms.
pub fn shock_half_height(params: &ProfileParams, t: f64) -> f64 {
    (t.max(0.0) / params.beta3).sqrt()
}
