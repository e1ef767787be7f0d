//! Initial data: built-in profiles, tabulated user data, validation of the
//! shock-formation hypotheses and the move to the normal frame in which the
//! steepest point sits at the origin with zero value.

use std::fmt::Debug;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{Jet, ORDER};
use crate::profile::ProfileParams;
use crate::quadrature::{integrate_scalar, QuadOptions};
use crate::spline::CubicSpline;

/// A smooth profile in its original coordinates, constant outside a bounded
/// set (up to round-off).
pub trait RawDatum: Send + Sync + Debug {
    fn name(&self) -> String;
    /// Taylor jet of the profile at `x`.
    fn jet(&self, x: f64) -> Jet;
    fn far_value(&self) -> f64;
    fn support_radius(&self) -> f64;
    /// `int_0^x` of the profile, when known in closed form.
    fn primitive(&self, _x: f64) -> Option<f64> {
        None
    }
}

/// `-x exp(-x^2)`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianOdd;

impl RawDatum for GaussianOdd {
    fn name(&self) -> String {
        "gaussian-odd".into()
    }
    fn jet(&self, x: f64) -> Jet {
        let v = Jet::variable(x);
        -(v * (-(v * v)).exp())
    }
    fn far_value(&self) -> f64 {
        0.0
    }
    fn support_radius(&self) -> f64 {
        6.1
    }
    fn primitive(&self, x: f64) -> Option<f64> {
        Some(0.5 * (-x * x).exp_m1())
    }
}

/// `-x exp(-x^2) + skew x^2 exp(-x^2)`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianSkew {
    pub skew: f64,
}

impl Default for GaussianSkew {
    fn default() -> Self {
        GaussianSkew { skew: 0.2 }
    }
}

impl RawDatum for GaussianSkew {
    fn name(&self) -> String {
        "gaussian-skew".into()
    }
    fn jet(&self, x: f64) -> Jet {
        let v = Jet::variable(x);
        let g = (-(v * v)).exp();
        (v * v * self.skew - v) * g
    }
    fn far_value(&self) -> f64 {
        0.0
    }
    fn support_radius(&self) -> f64 {
        6.3
    }
    fn primitive(&self, x: f64) -> Option<f64> {
        let e = (-x * x).exp();
        let sq = std::f64::consts::PI.sqrt();
        Some(0.5 * (-x * x).exp_m1() + self.skew * (0.25 * sq * statrs::function::erf::erf(x) - 0.5 * x * e))
    }
}

/// `-x psi(x / L)` with the smooth bump `psi(r) = exp(-r^2 / (1 - r^2))` on
/// `|r| < 1`; exactly zero for `|x| >= L`.
#[derive(Debug, Clone, Copy)]
pub struct CompactBump {
    pub half_width: f64,
}

impl Default for CompactBump {
    fn default() -> Self {
        CompactBump { half_width: 2.0 }
    }
}

impl RawDatum for CompactBump {
    fn name(&self) -> String {
        "compact".into()
    }
    fn jet(&self, x: f64) -> Jet {
        if x.abs() >= self.half_width {
            return Jet::constant(0.0);
        }
        let v = Jet::variable(x);
        let r = v * (1.0 / self.half_width);
        let r2 = r * r;
        let psi = (-(r2 / (Jet::constant(1.0) - r2))).exp();
        -(v * psi)
    }
    fn far_value(&self) -> f64 {
        0.0
    }
    fn support_radius(&self) -> f64 {
        self.half_width
    }
}

/// Constant profile; has no shock.
#[derive(Debug, Clone, Copy)]
pub struct ConstantDatum {
    pub value: f64,
}

impl RawDatum for ConstantDatum {
    fn name(&self) -> String {
        format!("constant({})", self.value)
    }
    fn jet(&self, _x: f64) -> Jet {
        Jet::constant(self.value)
    }
    fn far_value(&self) -> f64 {
        self.value
    }
    fn support_radius(&self) -> f64 {
        1.0
    }
    fn primitive(&self, x: f64) -> Option<f64> {
        Some(self.value * x)
    }
}

/// `inner(x - shift) + offset`.
#[derive(Debug, Clone)]
pub struct Translated {
    pub inner: Arc<dyn RawDatum>,
    pub shift: f64,
    pub offset: f64,
}

impl RawDatum for Translated {
    fn name(&self) -> String {
        format!("{}[x-{}]+{}", self.inner.name(), self.shift, self.offset)
    }
    fn jet(&self, x: f64) -> Jet {
        self.inner.jet(x - self.shift) + self.offset
    }
    fn far_value(&self) -> f64 {
        self.inner.far_value() + self.offset
    }
    fn support_radius(&self) -> f64 {
        self.inner.support_radius() + self.shift.abs()
    }
    fn primitive(&self, x: f64) -> Option<f64> {
        let a = self.inner.primitive(x - self.shift)?;
        let b = self.inner.primitive(-self.shift)?;
        Some(a - b + self.offset * x)
    }
}

/// Tabulated samples `(x, u)` reconstructed by a natural cubic spline.
/// Orders above two come from cascaded 5-point central differences with
/// step `1e-3`, so high derivatives are only approximate.
#[derive(Debug, Clone)]
pub struct TableDatum {
    spline: CubicSpline,
    label: String,
}

const TABLE_FD_STEP: f64 = 1e-3;

impl TableDatum {
    pub fn new(x: Vec<f64>, u: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if let (Some(a), Some(b)) = (u.first(), u.last()) {
            if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::DegenerateInput(format!(
                    "table must approach the same constant on both ends ({a} vs {b})"
                )));
            }
        }
        Ok(TableDatum { spline: CubicSpline::new(x, u)?, label: label.into() })
    }

    /// Reads a two-column `x,u` CSV file (header optional).
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
        let (mut xs, mut us) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |k: usize| rec.get(k).and_then(|s| s.parse::<f64>().ok());
            match (parse(0), parse(1)) {
                (Some(x), Some(u)) => {
                    xs.push(x);
                    us.push(u);
                }
                _ if i == 0 => continue,
                _ => return Err(Error::DegenerateInput(format!("unparsable table row {}", i + 1))),
            }
        }
        TableDatum::new(xs, us, path.display().to_string())
    }

    fn derivative(&self, x: f64, k: usize) -> f64 {
        if k <= 2 {
            return self.spline.eval(x)[k];
        }
        let h = TABLE_FD_STEP;
        let f = |y: f64| self.derivative(y, k - 1);
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    }
}

impl RawDatum for TableDatum {
    fn name(&self) -> String {
        self.label.clone()
    }
    fn jet(&self, x: f64) -> Jet {
        let mut c = [0.0; ORDER + 1];
        let mut fact = 1.0;
        for (k, ck) in c.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *ck = self.derivative(x, k) / fact;
        }
        Jet { c }
    }
    fn far_value(&self) -> f64 {
        self.spline.eval(self.spline.domain().1)[0]
    }
    fn support_radius(&self) -> f64 {
        let (a, b) = self.spline.domain();
        a.abs().max(b.abs())
    }
    fn primitive(&self, x: f64) -> Option<f64> {
        Some(self.spline.integral_from_start(x) - self.spline.integral_from_start(0.0))
    }
}

/// Looks up a built-in profile by its registry name.
pub fn builtin_datum(name: &str) -> Result<Arc<dyn RawDatum>> {
    match name {
        "gaussian-odd" => Ok(Arc::new(GaussianOdd)),
        "gaussian-skew" => Ok(Arc::new(GaussianSkew::default())),
        "compact" => Ok(Arc::new(CompactBump::default())),
        other => Err(Error::InvalidArgument(format!(
            "unknown datum '{other}' (expected gaussian-odd, gaussian-skew or compact)"
        ))),
    }
}

/// Primitive of the normalized datum tabulated on a uniform grid and
/// interpolated by quintic Hermite pieces.
#[derive(Debug, Clone)]
struct PrimitiveTable {
    lo: f64,
    h: f64,
    p: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl PrimitiveTable {
    fn build(f: &dyn Fn(f64) -> Jet, radius: f64) -> Result<Self> {
        let n_half = ((radius / (1.0 / 256.0)).ceil() as usize).max(8);
        let h = radius / n_half as f64;
        let n = 2 * n_half + 1;
        let lo = -radius;
        let mut p = vec![0.0; n];
        let opts = QuadOptions::relative(1e-13);
        for i in n_half + 1..n {
            let a = lo + (i - 1) as f64 * h;
            p[i] = p[i - 1] + integrate_scalar(|z| f(z).value(), a, a + h, &opts)?;
        }
        for i in (0..n_half).rev() {
            let a = lo + i as f64 * h;
            p[i] = p[i + 1] - integrate_scalar(|z| f(z).value(), a, a + h, &opts)?;
        }
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for i in 0..n {
            let j = f(lo + i as f64 * h);
            d1[i] = j.derivative(0);
            d2[i] = j.derivative(1);
        }
        Ok(PrimitiveTable { lo, h, p, d1, d2 })
    }

    fn eval(&self, z: f64, far: f64) -> f64 {
        let n = self.p.len();
        let hi = self.lo + (n - 1) as f64 * self.h;
        if z <= self.lo {
            return self.p[0] + far * (z - self.lo);
        }
        if z >= hi {
            return self.p[n - 1] + far * (z - hi);
        }
        let pos = (z - self.lo) / self.h;
        let i = (pos.floor() as usize).min(n - 2);
        let s = pos - i as f64;
        let (s2, s3) = (s * s, s * s * s);
        let (s4, s5) = (s3 * s, s3 * s2);
        let h = self.h;
        let h00 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h10 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h20 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
        let h01 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        let h11 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h21 = 0.5 * (s3 - 2.0 * s4 + s5);
        self.p[i] * h00
            + h * self.d1[i] * h10
            + h * h * self.d2[i] * h20
            + self.p[i + 1] * h01
            + h * self.d1[i + 1] * h11
            + h * h * self.d2[i + 1] * h21
    }
}

/// Gauge-normalized initial datum: the steepest point is at `x = 0`, where
/// the datum vanishes and has slope `1 / t0`.
#[derive(Debug, Clone)]
pub struct InitialDatum {
    raw: Arc<dyn RawDatum>,
    x_crit: f64,
    u_crit: f64,
    t0: f64,
    c_far: f64,
    l_support: f64,
    beta: Vec<f64>,
    window: f64,
    foot: (f64, f64),
    range: (f64, f64),
    table: Option<PrimitiveTable>,
}

const SCAN_POINTS: usize = 20_001;

/// Validates the shock-formation hypotheses on `raw` and returns it in the
/// normal frame `x -> x + x_crit`, `u -> u - u(x_crit)`.
pub fn normalize_gauge(raw: Arc<dyn RawDatum>) -> Result<InitialDatum> {
    let r = raw.support_radius();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::DegenerateInput("support radius must be positive".into()));
    }
    let h = 2.0 * r / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| -r + i as f64 * h).collect();
    let slopes: Vec<f64> = grid.iter().map(|&x| raw.jet(x).derivative(1)).collect();
    let (imin, &smin) = slopes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::EmptyGrid)?;
    if !(smin < 0.0) {
        return Err(Error::NoShock);
    }
    let near: Vec<usize> = (0..SCAN_POINTS)
        .filter(|&i| {
            let left = i == 0 || slopes[i] <= slopes[i - 1];
            let right = i + 1 == SCAN_POINTS || slopes[i] <= slopes[i + 1];
            left && right && slopes[i] <= smin + 1e-9
        })
        .collect();
    if let (Some(&a), Some(&b)) = (near.first(), near.last()) {
        if (grid[b] - grid[a]) > 2.0 * h {
            return Err(Error::NonUniqueMin(grid[a], grid[b]));
        }
    }

    // Newton on u'' = 0, kept inside the neighbouring grid cells.
    let (lo, hi) = (grid[imin.saturating_sub(1)], grid[(imin + 1).min(SCAN_POINTS - 1)]);
    let mut x = grid[imin];
    for _ in 0..60 {
        let j = raw.jet(x);
        let (f, df) = (j.derivative(2), j.derivative(3));
        if f == 0.0 {
            break;
        }
        let mut next = if df > 0.0 { x - f / df } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = if f > 0.0 { 0.5 * (lo + x) } else { 0.5 * (x + hi) };
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) {
            x = next;
            break;
        }
        x = next;
    }
    let j = raw.jet(x);
    let third = j.derivative(3);
    if !(third > 1e-8) {
        return Err(Error::DegenerateShock(third));
    }
    let slope = j.derivative(1);
    let t0 = 1.0 / slope;
    let u_crit = j.value();
    let c_far = raw.far_value() - u_crit;

    let range = grid
        .iter()
        .map(|&g| raw.jet(g).value() - u_crit)
        .fold((c_far, c_far), |(a, b), v| (a.min(v), b.max(v)));

    let mut d = InitialDatum {
        x_crit: x,
        u_crit,
        t0,
        c_far,
        l_support: r + x.abs(),
        beta: Vec::new(),
        window: 0.0,
        foot: (0.0, 0.0),
        range,
        table: None,
        raw,
    };
    d.beta = taylor_of_inverse(&d, ORDER)?;
    let (window, foot) = compute_window(&d, h)?;
    d.window = window;
    d.foot = foot;
    if d.raw.primitive(0.0).is_none() {
        let raw = d.raw.clone();
        let (xc, uc) = (d.x_crit, d.u_crit);
        let f = move |z: f64| raw.jet(z + xc) - uc;
        d.table = Some(PrimitiveTable::build(&f, d.l_support)?);
    }
    Ok(d)
}

/// Half-width of the value window on which the datum is inverted, and the
/// matching foot interval. Uses the slope criterion at the singular time:
/// `-d_x u(0, x) >= 1` iff `-u'(xi) >= 1 / (1 + |t0|)`.
fn compute_window(d: &InitialDatum, h: f64) -> Result<(f64, (f64, f64))> {
    let threshold = 1.0 / (1.0 + d.t0.abs());
    let steep = |x: f64| -d.derivatives(x)[1] - threshold;
    let edge = |dir: f64| -> f64 {
        let mut a = 0.0;
        let mut b = dir * h;
        while steep(b) > 0.0 {
            a = b;
            b += dir * h;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            if steep(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        a
    };
    let (xl, xr) = (edge(-1.0), edge(1.0));
    let eps = d.value(xl).abs().min(d.value(xr).abs());
    if !(eps > 0.0) {
        return Err(Error::DegenerateInput("empty inversion window".into()));
    }
    // Foot points where the datum takes the values +eps and -eps.
    let solve = |mut a: f64, mut b: f64, target: f64| -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            if d.value(m) > target {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let lo = solve(xl, 0.0, eps);
    let hi = solve(0.0, xr, -eps);
    Ok((eps, (lo, hi)))
}

impl InitialDatum {
    pub fn name(&self) -> String {
        self.raw.name()
    }

    /// Jet of the normalized datum at `x`.
    pub fn jet(&self, x: f64) -> Jet {
        self.raw.jet(x + self.x_crit) - self.u_crit
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x).value()
    }

    /// Derivatives of orders `0..=6` at `x`.
    pub fn derivatives(&self, x: f64) -> [f64; ORDER + 1] {
        self.jet(x).derivatives()
    }

    /// `int_0^z` of the normalized datum.
    pub fn primitive(&self, z: f64) -> f64 {
        if let Some(tab) = &self.table {
            return tab.eval(z, self.c_far);
        }
        let p = |y: f64| self.raw.primitive(y).expect("closed-form primitive");
        p(z + self.x_crit) - p(self.x_crit) - self.u_crit * z
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn c_far(&self) -> f64 {
        self.c_far
    }

    pub fn support(&self) -> f64 {
        self.l_support
    }

    /// Position of the steepest point in the original coordinates.
    pub fn x_crit(&self) -> f64 {
        self.x_crit
    }

    /// Value at the steepest point in the original coordinates; also the
    /// Galilean frame velocity.
    pub fn u_crit(&self) -> f64 {
        self.u_crit
    }

    /// Maps normal-frame `(t, x, u)` back to the original frame.
    pub fn to_original_frame(&self, t: f64, x: f64, u: f64) -> (f64, f64) {
        (x + self.x_crit + self.u_crit * (t - self.t0), u + self.u_crit)
    }

    /// `(beta_3, ..., beta_6)`.
    pub fn beta_table(&self) -> &[f64] {
        &self.beta
    }

    pub fn beta(&self, m: usize) -> f64 {
        self.beta.get(m.wrapping_sub(3)).copied().unwrap_or(0.0)
    }

    pub fn beta3(&self) -> f64 {
        self.beta[0]
    }

    pub fn profile_params(&self) -> ProfileParams {
        ProfileParams { beta3: self.beta3() }
    }

    /// Half-width `eps0` of the value window.
    pub fn window(&self) -> f64 {
        self.window
    }

    /// Interval of initial positions whose values lie in the window.
    pub fn foot_interval(&self) -> (f64, f64) {
        self.foot
    }

    /// `(min, max)` of the normalized datum.
    pub fn range(&self) -> (f64, f64) {
        self.range
    }
}

/// Coefficients `b_1..b_M` of the compositional inverse of
/// `a_1 x + a_2 x^2 + ...` (requires `a_1 != 0`).
pub fn reverse_series(a: &[f64], order: usize) -> Vec<f64> {
    let mut b = vec![0.0; order + 1];
    b[1] = 1.0 / a[1];
    for n in 2..=order {
        // coefficient of y^n in a(b(y)) with b truncated below n
        let mut pow = vec![0.0; order + 1];
        pow[..=order].copy_from_slice(&b[..=order]);
        let mut acc = 0.0;
        for (k, &ak) in a.iter().enumerate().skip(1).take(n) {
            if k > 1 {
                let mut next = vec![0.0; order + 1];
                for i in 1..=order {
                    for j in 1..=order - i {
                        next[i + j] += pow[i] * b[j];
                    }
                }
                pow = next;
            }
            acc += ak * pow[n];
        }
        b[n] = -acc / a[1];
    }
    b
}

/// Taylor coefficients `(beta_3, ..., beta_M)` of the inverse datum at zero,
/// with `w(y) = t0 y - beta_3 y^3 + sum_{m >= 4} beta_m y^m`.
pub fn taylor_of_inverse(d: &InitialDatum, order: usize) -> Result<Vec<f64>> {
    if !(3..=ORDER).contains(&order) {
        return Err(Error::InvalidArgument(format!("series order {order} outside 3..={ORDER}")));
    }
    let j = d.jet(0.0);
    let b = reverse_series(&j.c, order);
    let mut out = vec![-b[3]];
    out.extend_from_slice(&b[4..=order]);
    Ok(out)
}

/// Value `w(y)` of the inverse datum: the foot point in the window with
/// datum value `y`.
pub fn inverse_on_window(d: &InitialDatum, y: f64) -> Result<f64> {
    if !(y.abs() < d.window) {
        return Err(Error::OutOfWindow { value: y, half_width: d.window });
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    // the datum decreases on the foot interval
    let (mut a, mut b) = d.foot;
    let mut x = (d.t0 * y).clamp(a, b);
    for _ in 0..200 {
        let der = d.derivatives(x);
        let g = der[0] - y;
        if g == 0.0 {
            return Ok(x);
        }
        if g > 0.0 {
            a = x;
        } else {
            b = x;
        }
        let mut next = x - g / der[1];
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs() || a == b {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// `(w, w', w'')` of the inverse datum at `y`.
pub fn inverse_derivatives(d: &InitialDatum, y: f64) -> Result<(f64, f64, f64)> {
    let x = inverse_on_window(d, y)?;
    let der = d.derivatives(x);
    let w1 = 1.0 / der[1];
    Ok((x, w1, -der[2] * w1 * w1 * w1))
}
