//! Reference viscous solutions: the Cole-Hopf integral evaluated by
//! adaptive quadrature, and an independent finite-volume solver used to
//! cross-check it.
//!
//! With `P` the primitive of the datum and `s = t - t0`,
//! `u = <(x - z) / s>` under the weight `exp(-G(z) / 2 nu)`,
//! `G(z) = (x - z)^2 / 2s + P(z)`. Before the shock `G` is convex with
//! minimizer at the characteristic foot `xi`, so the weight is normalized
//! there and `u - u0 = <xi - z> / s` is integrated directly.

use rayon::prelude::*;

use crate::data::InitialDatum;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Smallest viscosity accepted by the Cole-Hopf evaluator.
pub const MIN_NU: f64 = 1e-7;

/// Data for the viscous problem started at `initial_time()`.
pub trait HeatData: Sync {
    fn initial_time(&self) -> f64;
    fn value(&self, z: f64) -> f64;
    fn slope(&self, z: f64) -> f64;
    /// `int_0^z` of the datum.
    fn primitive(&self, z: f64) -> f64;
    fn value_range(&self) -> (f64, f64);
    fn far_value(&self) -> f64;
    /// The datum equals `far_value()` outside `[-support, support]`.
    fn support(&self) -> f64;
}

impl HeatData for InitialDatum {
    fn initial_time(&self) -> f64 {
        self.t0()
    }
    fn value(&self, z: f64) -> f64 {
        InitialDatum::value(self, z)
    }
    fn slope(&self, z: f64) -> f64 {
        self.derivatives(z)[1]
    }
    fn primitive(&self, z: f64) -> f64 {
        InitialDatum::primitive(self, z)
    }
    fn value_range(&self) -> (f64, f64) {
        self.range()
    }
    fn far_value(&self) -> f64 {
        self.c_far()
    }
    fn support(&self) -> f64 {
        InitialDatum::support(self)
    }
}

/// Spatially constant state, started at `initial_time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformState {
    pub value: f64,
    pub initial_time: f64,
}

impl HeatData for UniformState {
    fn initial_time(&self) -> f64 {
        self.initial_time
    }
    fn value(&self, _: f64) -> f64 {
        self.value
    }
    fn slope(&self, _: f64) -> f64 {
        0.0
    }
    fn primitive(&self, z: f64) -> f64 {
        self.value * z
    }
    fn value_range(&self) -> (f64, f64) {
        (self.value, self.value)
    }
    fn far_value(&self) -> f64 {
        self.value
    }
    fn support(&self) -> f64 {
        0.0
    }
}

fn elapsed<D: HeatData + ?Sized>(d: &D, nu: f64, t: f64) -> Result<f64> {
    if !(nu >= MIN_NU) {
        return Err(Error::NuTooSmall(nu));
    }
    let t0 = d.initial_time();
    if !(t > t0) {
        return Err(Error::InvalidArgument(format!("time {t} must exceed the initial time {t0}")));
    }
    if t > 0.0 {
        return Err(Error::CharacteristicsCrossed(t));
    }
    Ok(t - t0)
}

/// Minimizer of `G`, i.e. the root of `(z - x) / s + u0(z)`.
fn minimizer<D: HeatData + ?Sized>(d: &D, s: f64, x: f64) -> f64 {
    let (umin, umax) = d.value_range();
    let (mut a, mut b) = (x - s * umax, x - s * umin);
    if b - a <= 0.0 {
        return a;
    }
    let mut z = (x - s * d.far_value()).clamp(a, b);
    for _ in 0..200 {
        let g = (z - x) / s + d.value(z);
        if g == 0.0 {
            return z;
        }
        if g > 0.0 {
            b = z;
        } else {
            a = z;
        }
        let dg = 1.0 / s + d.slope(z);
        let mut next = z - g / dg;
        if !(dg > 0.0 && next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - z).abs() <= 2.0 * f64::EPSILON * z.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        z = next;
    }
    z
}

/// Cole-Hopf evaluation at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColeHopfPoint {
    pub u: f64,
    /// `u - u0`, with `u0 = (x - xi) / s` the inviscid value.
    pub deviation: f64,
    pub log_phi: f64,
    pub foot: f64,
}

pub fn colehopf_point<D: HeatData + ?Sized>(d: &D, nu: f64, t: f64, x: f64, tol: f64) -> Result<ColeHopfPoint> {
    let s = elapsed(d, nu, t)?;
    if !(1e-14..=1e-4).contains(&tol) {
        return Err(Error::InvalidArgument(format!("quadrature tolerance {tol} outside [1e-14, 1e-4]")));
    }
    let xi = minimizer(d, s, x);
    let p_xi = d.primitive(xi);
    // G(z) - G(xi) >= 0, arranged to avoid cancelling large squares
    let excess = |z: f64| ((xi - z) * (2.0 * x - z - xi) / (2.0 * s) + d.primitive(z) - p_xi) / (2.0 * nu);
    let drop = (1.0 / tol).ln() + 20.0;
    let jac = (1.0 + s * d.slope(xi)).max(1e-6);
    let scale = (2.0 * nu * s / jac).sqrt();
    let reach = |dir: f64| {
        let mut step = scale;
        while excess(xi + dir * step) < drop {
            step *= 2.0;
        }
        while step > 1e-300 && excess(xi + dir * 0.5 * step) >= drop {
            step *= 0.5;
        }
        xi + dir * step
    };
    let (lo, hi) = (reach(-1.0), reach(1.0));
    let weight = |z: f64| {
        let w = (-excess(z)).exp();
        [w, (xi - z) * w]
    };
    let opts = QuadOptions { rel_tol: tol, abs_tol: 0.0, max_intervals: 4000, initial_panels: 4 };
    let int = integrate(weight, lo, hi, &[xi], &opts)?;
    let [mass, first] = int.value;
    let deviation = first / (s * mass);
    let g_xi = (x - xi) * (x - xi) / (2.0 * s) + p_xi;
    let log_phi = -g_xi / (2.0 * nu) + mass.ln() - 0.5 * (4.0 * std::f64::consts::PI * nu * s).ln();
    Ok(ColeHopfPoint { u: (x - xi) / s + deviation, deviation, log_phi, foot: xi })
}

/// `u^nu(t, x)` from the Cole-Hopf integral.
pub fn reference_colehopf<D: HeatData + ?Sized>(d: &D, nu: f64, t: f64, x: f64, tol: f64) -> Result<f64> {
    Ok(colehopf_point(d, nu, t, x, tol)?.u)
}

/// Exact average of `u^nu(t, .)` over `[a, b]`, since `u = -2 nu d_x ln phi`.
pub fn colehopf_cell_average<D: HeatData + ?Sized>(d: &D, nu: f64, t: f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(b > a) {
        return Err(Error::InvalidArgument(format!("empty cell [{a}, {b}]")));
    }
    let la = colehopf_point(d, nu, t, a, tol)?.log_phi;
    let lb = colehopf_point(d, nu, t, b, tol)?.log_phi;
    Ok(-2.0 * nu * (lb - la) / (b - a))
}

/// Largest CFL number the finite-volume solver accepts.
pub const MAX_CFL: f64 = 0.4;
const GHOSTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FvConfig {
    pub cells: usize,
    pub half_width: f64,
    pub cfl: f64,
}

/// Cell averages on `[-half_width, half_width]` at `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct FvSolution {
    pub time: f64,
    pub dx: f64,
    pub centers: Vec<f64>,
    pub averages: Vec<f64>,
    pub steps: usize,
}

/// Domain needed so the Dirichlet boundary sees only the far state.
pub fn min_half_width<D: HeatData + ?Sized>(d: &D, nu: f64, t_end: f64) -> f64 {
    let span = (t_end - d.initial_time()).max(0.0);
    d.support() + d.far_value().abs() * span + 10.0 * (nu * d.initial_time().abs()).sqrt()
}

/// WENO-Z reconstruction of the left state at the right edge of `v[2]`.
fn weno_left(v: [f64; 5]) -> f64 {
    let q0 = (2.0 * v[0] - 7.0 * v[1] + 11.0 * v[2]) / 6.0;
    let q1 = (-v[1] + 5.0 * v[2] + 2.0 * v[3]) / 6.0;
    let q2 = (2.0 * v[2] + 5.0 * v[3] - v[4]) / 6.0;
    let sq = |a: f64| a * a;
    let b0 = 13.0 / 12.0 * sq(v[0] - 2.0 * v[1] + v[2]) + 0.25 * sq(v[0] - 4.0 * v[1] + 3.0 * v[2]);
    let b1 = 13.0 / 12.0 * sq(v[1] - 2.0 * v[2] + v[3]) + 0.25 * sq(v[1] - v[3]);
    let b2 = 13.0 / 12.0 * sq(v[2] - 2.0 * v[3] + v[4]) + 0.25 * sq(3.0 * v[2] - 4.0 * v[3] + v[4]);
    let tau = (b0 - b2).abs();
    let eps = 1e-40;
    let a0 = 0.1 * (1.0 + sq(tau / (b0 + eps)));
    let a1 = 0.6 * (1.0 + sq(tau / (b1 + eps)));
    let a2 = 0.3 * (1.0 + sq(tau / (b2 + eps)));
    (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)
}

/// `du/dt` for the padded state `u` (ghosts included).
fn rhs(u: &[f64], nu: f64, dx: f64, out: &mut [f64], flux: &mut [f64]) {
    let n = out.len();
    // flux[k] sits between padded cells k + GHOSTS - 1 and k + GHOSTS
    for (k, f) in flux.iter_mut().enumerate() {
        let i = k + GHOSTS - 1;
        let left = weno_left([u[i - 2], u[i - 1], u[i], u[i + 1], u[i + 2]]);
        let right = weno_left([u[i + 3], u[i + 2], u[i + 1], u[i], u[i - 1]]);
        let speed = left.abs().max(right.abs());
        let conv = 0.25 * (left * left + right * right) - 0.5 * speed * (right - left);
        let grad = (u[i - 1] - 15.0 * u[i] + 15.0 * u[i + 1] - u[i + 2]) / (12.0 * dx);
        *f = conv - nu * grad;
    }
    for i in 0..n {
        out[i] = -(flux[i + 1] - flux[i]) / dx;
    }
}

/// Fifth-order WENO / Rusanov convection with fourth-order central
/// diffusion, advanced by three-stage SSP Runge-Kutta from exact initial
/// cell averages. The boundary holds the far state.
pub fn reference_fv<D: HeatData + ?Sized>(d: &D, nu: f64, t_end: f64, cfg: &FvConfig) -> Result<FvSolution> {
    let t0 = d.initial_time();
    if !(nu > 0.0) {
        return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
    }
    if !(t_end > t0) || t_end > 0.0 {
        return Err(Error::InvalidArgument(format!("final time {t_end} outside ({t0}, 0]")));
    }
    if !(cfg.cfl > 0.0 && cfg.cfl <= MAX_CFL) {
        return Err(Error::UnstableParameters(format!("CFL {} outside (0, {MAX_CFL}]", cfg.cfl)));
    }
    let need = min_half_width(d, nu, t_end);
    if !(cfg.half_width >= need) || cfg.cells < 8 {
        return Err(Error::UnstableParameters(format!(
            "domain half-width {} with {} cells; need half-width >= {need} and >= 8 cells",
            cfg.half_width, cfg.cells
        )));
    }
    let n = cfg.cells;
    let dx = 2.0 * cfg.half_width / n as f64;
    let edge = |i: usize| -cfg.half_width + i as f64 * dx;
    let centers: Vec<f64> = (0..n).map(|i| edge(i) + 0.5 * dx).collect();
    let prim: Vec<f64> = (0..=n).into_par_iter().map(|i| d.primitive(edge(i))).collect();
    let far = d.far_value();
    let mut u = vec![far; n + 2 * GHOSTS];
    for i in 0..n {
        u[i + GHOSTS] = (prim[i + 1] - prim[i]) / dx;
    }

    let (umin, umax) = d.value_range();
    let speed = umin.abs().max(umax.abs()).max(1e-12);
    // 4th-order diffusion symbol peaks at 16/3; RK3 covers about 2.5 on the negative axis
    let dt_max = (cfg.cfl * dx / speed).min(cfg.cfl * dx * dx / nu);
    let steps = ((t_end - t0) / dt_max).ceil().max(1.0) as usize;
    let dt = (t_end - t0) / steps as f64;

    let mut k = vec![0.0; n];
    let mut flux = vec![0.0; n + 1];
    let mut stage = u.clone();
    for _ in 0..steps {
        rhs(&u, nu, dx, &mut k, &mut flux);
        for i in 0..n {
            stage[i + GHOSTS] = u[i + GHOSTS] + dt * k[i];
        }
        rhs(&stage, nu, dx, &mut k, &mut flux);
        for i in 0..n {
            let j = i + GHOSTS;
            stage[j] = 0.75 * u[j] + 0.25 * (stage[j] + dt * k[i]);
        }
        rhs(&stage, nu, dx, &mut k, &mut flux);
        for i in 0..n {
            let j = i + GHOSTS;
            u[j] = u[j] / 3.0 + 2.0 / 3.0 * (stage[j] + dt * k[i]);
        }
    }
    Ok(FvSolution { time: t_end, dx, centers, averages: u[GHOSTS..GHOSTS + n].to_vec(), steps })
}

/// Largest gap between the finite-volume averages and exact Cole-Hopf
/// cell averages.
pub fn fv_colehopf_gap<D: HeatData + ?Sized>(d: &D, nu: f64, fv: &FvSolution, tol: f64) -> Result<f64> {
    let half = 0.5 * fv.dx;
    let gaps: Result<Vec<f64>> = fv
        .centers
        .par_iter()
        .zip(&fv.averages)
        .map(|(&c, &a)| Ok((colehopf_cell_average(d, nu, fv.time, c - half, c + half, tol)? - a).abs()))
        .collect();
    Ok(gaps?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{builtin_datum, normalize_gauge};
    use crate::inviscid::entropy_solution;
    use crate::quadrature::integrate_scalar;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn odd() -> &'static InitialDatum {
        static D: OnceLock<InitialDatum> = OnceLock::new();
        D.get_or_init(|| normalize_gauge(builtin_datum("gaussian-odd").unwrap()).unwrap())
    }

    fn skew() -> &'static InitialDatum {
        static D: OnceLock<InitialDatum> = OnceLock::new();
        D.get_or_init(|| normalize_gauge(builtin_datum("gaussian-skew").unwrap()).unwrap())
    }

    #[test]
    fn constant_state_is_preserved() {
        let c = UniformState { value: 0.7, initial_time: -1.0 };
        for &x in &[-3.0, 0.0, 2.5] {
            let p = colehopf_point(&c, 1e-3, -0.2, x, 1e-12).unwrap();
            assert!((p.u - 0.7).abs() < 1e-13 && p.deviation.abs() < 1e-13);
        }
        let fv = reference_fv(&c, 0.01, -0.5, &FvConfig { cells: 64, half_width: 2.0, cfl: 0.4 }).unwrap();
        assert!(fv.averages.iter().all(|a| (a - 0.7).abs() < 1e-13));
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = odd();
        assert_eq!(reference_colehopf(d, 1e-8, -0.5, 0.0, 1e-10).unwrap_err(), Error::NuTooSmall(1e-8));
        assert!(reference_colehopf(d, 1e-3, d.t0(), 0.0, 1e-10).is_err());
        assert!(matches!(reference_colehopf(d, 1e-3, 0.1, 0.0, 1e-10), Err(Error::CharacteristicsCrossed(_))));
        let cfg = FvConfig { cells: 256, half_width: 8.0, cfl: 0.5 };
        assert!(matches!(reference_fv(d, 0.05, -0.5, &cfg), Err(Error::UnstableParameters(_))));
        let cfg = FvConfig { cells: 256, half_width: 3.0, cfl: 0.4 };
        assert!(matches!(reference_fv(d, 0.05, -0.5, &cfg), Err(Error::UnstableParameters(_))));
    }

    #[test]
    fn starts_from_the_datum() {
        for d in [odd(), skew()] {
            let t = d.t0() + 1e-8;
            for i in 0..=24 {
                let x = -3.0 + 0.25 * i as f64;
                let u = reference_colehopf(d, 1e-3, t, x, 1e-12).unwrap();
                assert!((u - d.value(x)).abs() < 1e-4, "{x}: {u}");
            }
        }
    }

    /// Rarefaction datum `-1/2` left of 0 and `1/2` right of it.
    struct Fan;

    impl HeatData for Fan {
        fn initial_time(&self) -> f64 {
            -1.0
        }
        fn value(&self, z: f64) -> f64 {
            if z < 0.0 {
                -0.5
            } else {
                0.5
            }
        }
        fn slope(&self, _: f64) -> f64 {
            0.0
        }
        fn primitive(&self, z: f64) -> f64 {
            0.5 * z.abs()
        }
        fn value_range(&self) -> (f64, f64) {
            (-0.5, 0.5)
        }
        fn far_value(&self) -> f64 {
            0.0
        }
        fn support(&self) -> f64 {
            0.0
        }
    }

    #[test]
    fn piecewise_constant_oracle() {
        // each half-line contributes a truncated Gaussian, so the moments
        // reduce to erfc and exp terms
        use statrs::function::erf::erfc;
        let (nu, s) = (0.05f64, 0.5f64);
        let r = (4.0 * nu * s).sqrt();
        let g = 0.5 * std::f64::consts::PI.sqrt() * r;
        let exact = |x: f64| {
            let (a, b) = (x + 0.5 * s, x - 0.5 * s);
            let (wl, wr) = ((x / (4.0 * nu)).exp(), (-x / (4.0 * nu)).exp());
            let (ml, mr) = (g * erfc(a / r), g * erfc(-b / r));
            let nl = (-0.5 * s * ml + 0.5 * r * r * (-(a * a) / (r * r)).exp()) / s;
            let nr = (0.5 * s * mr - 0.5 * r * r * (-(b * b) / (r * r)).exp()) / s;
            (wl * nl + wr * nr) / (wl * ml + wr * mr)
        };
        for &x in &[-0.6, -0.2, -0.01, 0.0, 0.03, 0.2, 0.5] {
            let u = reference_colehopf(&Fan, nu, -0.5, x, 1e-13).unwrap();
            assert!((u - exact(x)).abs() < 1e-10, "{x}: {u} vs {}", exact(x));
        }
    }

    #[test]
    fn mass_is_conserved() {
        let d = skew();
        let (nu, t, r) = (0.01, -0.2, 14.0);
        let c = d.c_far();
        let mass = integrate_scalar(
            |x| reference_colehopf(d, nu, t, x, 1e-13).unwrap() - c,
            -r,
            r,
            &QuadOptions { rel_tol: 1e-12, abs_tol: 1e-14, max_intervals: 4000, initial_panels: 16 },
        )
        .unwrap();
        let initial = d.primitive(r) - d.primitive(-r) - 2.0 * r * c;
        assert!((mass - initial).abs() <= 1e-8 * initial.abs().max(1.0), "{mass} vs {initial}");
    }

    #[test]
    fn finite_volume_agrees_with_colehopf() {
        let d = odd();
        let (nu, t) = (0.05, -0.1);
        let hw = min_half_width(d, nu, t);
        let gap = |cells: usize| {
            let fv = reference_fv(d, nu, t, &FvConfig { cells, half_width: hw, cfl: 0.4 }).unwrap();
            fv_colehopf_gap(d, nu, &fv, 1e-13).unwrap()
        };
        let (g1, g2) = (gap(256), gap(512));
        assert!(g2 < 1e-4, "{g1} {g2}");
        assert!(g1 / g2 > 8.0, "observed order {}", (g1 / g2).log2());
    }

    #[test]
    fn viscous_solution_is_close_to_inviscid_away_from_origin() {
        let d = odd();
        for &(t, x) in &[(-0.5, 0.7), (-0.3, -1.2)] {
            let dev = colehopf_point(d, 1e-4, t, x, 1e-12).unwrap().deviation;
            let u0 = entropy_solution(d, t, x).unwrap();
            let u = reference_colehopf(d, 1e-4, t, x, 1e-12).unwrap();
            assert!(dev.abs() < 1e-3 && (u - u0 - dev).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn bounded_by_datum_range(lnu in -6.0f64..-1.0, tf in 1e-3f64..0.999, x in -8.0f64..8.0) {
            for d in [odd(), skew()] {
                let u = reference_colehopf(d, 10f64.powf(lnu), tf * d.t0(), x, 1e-10).unwrap();
                let (lo, hi) = d.range();
                prop_assert!(u >= lo - 1e-12 && u <= hi + 1e-12);
            }
        }

        #[test]
        fn odd_datum_stays_odd(lnu in -6.0f64..-1.0, tf in 1e-3f64..1.0, x in 0.0f64..5.0) {
            let d = odd();
            let t = tf * d.t0();
            let nu = 10f64.powf(lnu);
            let a = reference_colehopf(d, nu, t, x, 1e-12).unwrap();
            let b = reference_colehopf(d, nu, t, -x, 1e-12).unwrap();
            prop_assert!((a + b).abs() <= 1e-9 * a.abs().max(1e-3));
        }
    }
}
