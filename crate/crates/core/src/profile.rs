//! The cubic profile: `u` is the real root of `t u - beta3 u^3 = x` for
//! `t <= 0`, with companions `m = 1 / (|t| + 3 beta3 u^2)` and
//! `d = m^{-1/2}`. Under `(t, x) -> (l^2 t, l^3 x)` the root and `d` scale
//! like `l`, and `m` like `l^-2`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams {
    pub beta3: f64,
}

impl ProfileParams {
    pub fn new(beta3: f64) -> Result<Self> {
        if !(beta3 > 0.0 && beta3.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta3 must be positive, got {beta3}")));
        }
        Ok(ProfileParams { beta3 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub u: f64,
    pub m: f64,
    pub d: f64,
}

/// Real root of `beta3 u^3 - t u + x = 0` for `t <= 0`.
fn cubic_root(beta3: f64, t: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let p = -t / beta3;
    let q = x / beta3;
    let disc = (0.25 * q * q + p * p * p / 27.0).sqrt();
    let a = -q.signum() * (0.5 * q.abs() + disc).cbrt();
    let mut u = if a == 0.0 { 0.0 } else { a - p / (3.0 * a) };
    for _ in 0..4 {
        let h = beta3 * u * u * u - t * u + x;
        let dh = 3.0 * beta3 * u * u - t;
        if dh <= 0.0 {
            break;
        }
        let step = h / dh;
        u -= step;
        if step.abs() <= 4.0 * f64::EPSILON * u.abs() {
            break;
        }
    }
    u
}

pub fn eval_profile(params: &ProfileParams, t: f64, x: f64) -> Result<ProfilePoint> {
    if t > 0.0 {
        return Err(Error::InvalidArgument(format!("profile requires t <= 0, got {t}")));
    }
    if !(t.is_finite() && x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite profile argument".into()));
    }
    let u = cubic_root(params.beta3, t, x);
    let d2 = t.abs() + 3.0 * params.beta3 * u * u;
    Ok(ProfilePoint { u, m: 1.0 / d2, d: d2.sqrt() })
}

/// `beta3^b u^i m^j` with an integer coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monomial {
    pub coef: i64,
    pub beta_pow: u32,
    pub u_pow: u32,
    pub m_pow: u32,
}

/// A polynomial in `(beta3, u, m)`; closed under the profile derivatives.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MonomialTable {
    pub terms: Vec<Monomial>,
}

impl MonomialTable {
    pub fn monomial(coef: i64, beta_pow: u32, u_pow: u32, m_pow: u32) -> Self {
        MonomialTable { terms: vec![Monomial { coef, beta_pow, u_pow, m_pow }] }
    }

    fn push(&mut self, t: Monomial) {
        if t.coef == 0 {
            return;
        }
        if let Some(e) = self
            .terms
            .iter_mut()
            .find(|e| e.beta_pow == t.beta_pow && e.u_pow == t.u_pow && e.m_pow == t.m_pow)
        {
            e.coef += t.coef;
        } else {
            self.terms.push(t);
        }
        self.terms.retain(|e| e.coef != 0);
    }

    /// Uses `d_x u = -m` and `d_x m = 6 beta3 u m^3`.
    pub fn dx(&self) -> Self {
        let mut out = MonomialTable::default();
        for t in &self.terms {
            let (a, b) = (t.u_pow as i64, t.m_pow as i64);
            if a > 0 {
                out.push(Monomial { coef: -a * t.coef, beta_pow: t.beta_pow, u_pow: t.u_pow - 1, m_pow: t.m_pow + 1 });
            }
            if b > 0 {
                out.push(Monomial { coef: 6 * b * t.coef, beta_pow: t.beta_pow + 1, u_pow: t.u_pow + 1, m_pow: t.m_pow + 2 });
            }
        }
        out
    }

    /// Uses `d_t u = u m` and `d_t m = m^2 - 6 beta3 u^2 m^3`.
    pub fn dt(&self) -> Self {
        let mut out = MonomialTable::default();
        for t in &self.terms {
            let (a, b) = (t.u_pow as i64, t.m_pow as i64);
            if a + b > 0 {
                out.push(Monomial { coef: (a + b) * t.coef, beta_pow: t.beta_pow, u_pow: t.u_pow, m_pow: t.m_pow + 1 });
            }
            if b > 0 {
                out.push(Monomial { coef: -6 * b * t.coef, beta_pow: t.beta_pow + 1, u_pow: t.u_pow + 2, m_pow: t.m_pow + 2 });
            }
        }
        out
    }

    pub fn eval(&self, beta3: f64, p: &ProfilePoint) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef as f64 * beta3.powi(t.beta_pow as i32) * p.u.powi(t.u_pow as i32) * p.m.powi(t.m_pow as i32))
            .sum()
    }
}

/// Table for `d_t^j d_x^i u`.
pub fn derivative_table(i: usize, j: usize) -> MonomialTable {
    let mut tab = MonomialTable::monomial(1, 0, 1, 0);
    for _ in 0..i {
        tab = tab.dx();
    }
    for _ in 0..j {
        tab = tab.dt();
    }
    tab
}

/// `d_t^j d_x^i u` for `i <= 3`, `j <= 1`.
pub fn profile_derivatives(params: &ProfileParams, t: f64, x: f64, i: usize, j: usize) -> Result<f64> {
    if i > 3 || j > 1 {
        return Err(Error::InvalidArgument(format!("derivative order ({i}, {j}) exceeds (3, 1)")));
    }
    let p = eval_profile(params, t, x)?;
    Ok(derivative_table(i, j).eval(params.beta3, &p))
}

/// Size function `|u|^a m^b` for `a >= 0`, and `m^{b + |a|/2}` for `a < 0`.
pub fn envelope(params: &ProfileParams, a: f64, b: f64, t: f64, x: f64) -> Result<f64> {
    let p = eval_profile(params, t, x)?;
    Ok(if a >= 0.0 { p.u.abs().powf(a) * p.m.powf(b) } else { p.m.powf(b + 0.5 * a.abs()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> ProfileParams {
        ProfileParams::new(1.0).unwrap()
    }

    #[test]
    fn known_values() {
        let p = eval_profile(&params(), -1.0, 0.0).unwrap();
        assert_eq!((p.u, p.m, p.d), (0.0, 1.0, 1.0));
        let p = eval_profile(&params(), 0.0, -8.0).unwrap();
        assert!((p.u - 2.0).abs() < 1e-15);
        assert!((p.m - 1.0 / 12.0).abs() < 1e-15);
        assert!(eval_profile(&params(), 0.5, 0.0).is_err());
    }

    #[test]
    fn first_derivative_tables_match_closed_forms() {
        assert_eq!(derivative_table(1, 0), MonomialTable::monomial(-1, 0, 0, 1));
        assert_eq!(derivative_table(0, 1), MonomialTable::monomial(1, 0, 1, 1));
        // d_x^2 u = -6 beta3 u m^3
        assert_eq!(derivative_table(2, 0), MonomialTable::monomial(-6, 1, 1, 3));
    }

    #[test]
    fn derivatives_agree_with_finite_differences() {
        let pr = params();
        let (t, x) = (-0.7, 0.31);
        let f = |t: f64, x: f64, i: usize| profile_derivatives(&pr, t, x, i, 0).unwrap();
        for i in 0..3 {
            let h = 1e-4;
            let fd = (-f(t, x + 2.0 * h, i) + 8.0 * f(t, x + h, i) - 8.0 * f(t, x - h, i) + f(t, x - 2.0 * h, i)) / (12.0 * h);
            let exact = f(t, x, i + 1);
            assert!((fd - exact).abs() < 1e-8 * exact.abs().max(1.0), "i={i}");
        }
        for i in 0..4 {
            let h = 1e-4;
            let g = |tt: f64| f(tt, x, i);
            let fd = (-g(t + 2.0 * h) + 8.0 * g(t + h) - 8.0 * g(t - h) + g(t - 2.0 * h)) / (12.0 * h);
            let exact = profile_derivatives(&pr, t, x, i, 1).unwrap();
            assert!((fd - exact).abs() < 1e-7 * exact.abs().max(1.0), "i={i}");
        }
    }

    #[test]
    fn envelope_branches() {
        let pr = params();
        let p = eval_profile(&pr, -0.5, 0.2).unwrap();
        let e = envelope(&pr, 2.0, 1.0, -0.5, 0.2).unwrap();
        assert!((e - p.u * p.u * p.m).abs() < 1e-15);
        let e = envelope(&pr, -2.0, 1.0, -0.5, 0.2).unwrap();
        assert!((e - p.m * p.m).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn root_satisfies_cubic(beta3 in 0.05f64..20.0, t in -50.0f64..0.0, x in -1e3f64..1e3) {
            let pr = ProfileParams::new(beta3).unwrap();
            let p = eval_profile(&pr, t, x).unwrap();
            let r = t * p.u - beta3 * p.u.powi(3) - x;
            let scale = x.abs().max(t.abs() * p.u.abs()).max(beta3 * p.u.abs().powi(3)).max(1e-300);
            prop_assert!(r.abs() <= 1e-13 * scale);
            prop_assert!(p.m > 0.0 && (p.m - 1.0 / (t.abs() + 3.0 * beta3 * p.u * p.u)).abs() <= 1e-15 * p.m);
        }

        #[test]
        fn scaling_homogeneity(t in -4.0f64..-1e-3, x in -5.0f64..5.0, lam in 0.05f64..20.0) {
            let pr = ProfileParams::new(1.3).unwrap();
            let a = eval_profile(&pr, t, x).unwrap();
            let b = eval_profile(&pr, lam * lam * t, lam.powi(3) * x).unwrap();
            prop_assert!((b.u - lam * a.u).abs() <= 1e-11 * (lam * a.u).abs().max(1e-300) + 1e-300);
            prop_assert!((b.m - a.m / (lam * lam)).abs() <= 1e-11 * a.m / (lam * lam));
            prop_assert!((b.d - lam * a.d).abs() <= 1e-11 * lam * a.d);
        }

        #[test]
        fn odd_in_x_and_sign_opposite(t in -4.0f64..0.0, x in 1e-9f64..5.0) {
            let pr = params();
            let a = eval_profile(&pr, t, x).unwrap();
            let b = eval_profile(&pr, t, -x).unwrap();
            prop_assert!(a.u < 0.0);
            prop_assert_eq!(a.u, -b.u);
            prop_assert_eq!(a.m, b.m);
        }

        #[test]
        fn slope_bounded_by_reciprocal_time(t in -4.0f64..-1e-4, x in -5.0f64..5.0) {
            let pr = params();
            let ux = profile_derivatives(&pr, t, x, 1, 0).unwrap();
            prop_assert!(ux < 0.0 && ux.abs() <= 1.0 / t.abs() * (1.0 + 1e-14));
        }
    }
}
