//! Globally adaptive 7/15-point Gauss–Kronrod quadrature for vector-valued
//! integrands. All components share the same subdivision; the interval with
//! the largest scaled error is bisected until every component converges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Relative tolerance, measured against the integral of `|f_k|`.
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    pub initial_panels: usize,
}

impl QuadOptions {
    pub fn relative(rel_tol: f64) -> Self {
        QuadOptions { rel_tol, abs_tol: 0.0, max_intervals: 4000, initial_panels: 4 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub abs_value: [f64; N],
    pub error: [f64; N],
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    abs_value: [f64; N],
    error: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, o: &Self) -> bool {
        self.priority == o.priority
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.priority.total_cmp(&o.priority)
    }
}

fn kronrod<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> Panel<N> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = [0.0; N];
    let mut rg = [0.0; N];
    let mut rabs = [0.0; N];
    let mut vals = [[0.0; N]; 15];
    vals[7] = fc;
    for k in 0..N {
        rk[k] = WGK[7] * fc[k];
        rg[k] = WG[3] * fc[k];
        rabs[k] = WGK[7] * fc[k].abs();
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        vals[j] = f1;
        vals[14 - j] = f2;
        for k in 0..N {
            rk[k] += WGK[j] * (f1[k] + f2[k]);
            rabs[k] += WGK[j] * (f1[k].abs() + f2[k].abs());
            if j % 2 == 1 {
                rg[k] += WG[j / 2] * (f1[k] + f2[k]);
            }
        }
    }
    let mut error = [0.0; N];
    let mut value = [0.0; N];
    let mut abs_value = [0.0; N];
    for k in 0..N {
        let mean = 0.5 * rk[k];
        let mut asc = WGK[7] * (fc[k] - mean).abs();
        for j in 0..7 {
            asc += WGK[j] * ((vals[j][k] - mean).abs() + (vals[14 - j][k] - mean).abs());
        }
        let asc = asc * h.abs();
        let diff = ((rk[k] - rg[k]) * h).abs();
        let mut err = diff;
        if asc != 0.0 && diff != 0.0 {
            err = asc * (200.0 * diff / asc).powf(1.5).min(1.0);
        }
        let round = 50.0 * f64::EPSILON * rabs[k] * h.abs();
        if round > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(round);
        }
        error[k] = err;
        value[k] = rk[k] * h;
        abs_value[k] = rabs[k] * h.abs();
    }
    Panel { a, b, value, abs_value, error, priority: 0.0 }
}

/// Adaptive integral of a vector integrand over `[a, b]`, with optional
/// interior break points that always become panel boundaries.
pub fn integrate<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<Integral<N>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument("integration limits must be finite".into()));
    }
    let mut nodes = vec![a, b];
    nodes.extend(breaks.iter().copied().filter(|x| *x > a.min(b) && *x < a.max(b)));
    nodes.sort_by(|p, q| p.total_cmp(q));
    if b < a {
        nodes.reverse();
    }
    let mut edges = Vec::new();
    for w in nodes.windows(2) {
        let p = opts.initial_panels.max(1);
        for i in 0..p {
            let lo = w[0] + (w[1] - w[0]) * i as f64 / p as f64;
            let hi = w[0] + (w[1] - w[0]) * (i + 1) as f64 / p as f64;
            edges.push((lo, hi));
        }
    }

    let mut total_abs = [0.0; N];
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    let mut panels: Vec<Panel<N>> = Vec::new();
    for (lo, hi) in edges {
        let p = kronrod(&f, lo, hi);
        evaluations += 15;
        for k in 0..N {
            total_abs[k] += p.abs_value[k];
        }
        panels.push(p);
    }
    let scaled = |p: &Panel<N>, totals: &[f64; N]| -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..N {
            let target = (opts.rel_tol * totals[k]).max(opts.abs_tol).max(f64::MIN_POSITIVE);
            worst = worst.max(p.error[k] / target);
        }
        worst
    };
    for mut p in panels {
        p.priority = scaled(&p, &total_abs);
        heap.push(p);
    }

    loop {
        let mut value = [0.0; N];
        let mut abs_value = [0.0; N];
        let mut error = [0.0; N];
        for p in heap.iter() {
            for k in 0..N {
                value[k] += p.value[k];
                abs_value[k] += p.abs_value[k];
                error[k] += p.error[k];
            }
        }
        let converged = (0..N).all(|k| {
            let floor = 100.0 * f64::EPSILON * abs_value[k];
            error[k] <= (opts.rel_tol * abs_value[k]).max(opts.abs_tol).max(floor)
        });
        if converged {
            return Ok(Integral { value, abs_value, error, evaluations });
        }
        if heap.len() >= opts.max_intervals {
            let estimate = (0..N)
                .map(|k| error[k] / abs_value[k].max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            return Err(Error::ToleranceNotMet { tol: opts.rel_tol, estimate });
        }
        let worst = heap.pop().expect("non-empty panel set");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            let estimate = (0..N)
                .map(|k| error[k] / abs_value[k].max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            return Err(Error::ToleranceNotMet { tol: opts.rel_tol, estimate });
        }
        let mut left = kronrod(&f, worst.a, mid);
        let mut right = kronrod(&f, mid, worst.b);
        evaluations += 30;
        left.priority = scaled(&left, &abs_value);
        right.priority = scaled(&right, &abs_value);
        heap.push(left);
        heap.push(right);
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64> {
    integrate(|x| [f(x)], a, b, &[], opts).map(|r| r.value[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_degree_22() {
        let p = kronrod(&|x: f64| [x.powi(22), x.powi(21)], -1.0, 1.0);
        assert!((p.value[0] - 2.0 / 23.0).abs() < 1e-15);
        assert!(p.value[1].abs() < 1e-15);
    }

    #[test]
    fn gaussian_integral_to_tight_tolerance() {
        let r = integrate(|x| [(-x * x).exp(), x * x * (-x * x).exp()], -12.0, 12.0, &[], &QuadOptions::relative(1e-13))
            .unwrap();
        let sp = std::f64::consts::PI.sqrt();
        assert!((r.value[0] - sp).abs() < 1e-13);
        assert!((r.value[1] - sp / 2.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let opts = QuadOptions::relative(1e-12);
        let a = integrate_scalar(|x| x.cos(), 0.0, 2.0, &opts).unwrap();
        let b = integrate_scalar(|x| x.cos(), 2.0, 0.0, &opts).unwrap();
        assert!((a + b).abs() < 1e-14);
        assert!((a - 2f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn sharp_peak_is_resolved_via_break_point() {
        let f = |x: f64| [1.0 / (1e-6 + (x - 0.3) * (x - 0.3))];
        let r = integrate(f, 0.0, 1.0, &[0.3], &QuadOptions::relative(1e-11)).unwrap();
        let exact = ((0.7f64 / 1e-3).atan() + (0.3f64 / 1e-3).atan()) / 1e-3;
        assert!(((r.value[0] - exact) / exact).abs() < 1e-10);
    }

    #[test]
    fn impossible_budget_reports_tolerance_failure() {
        let opts = QuadOptions { rel_tol: 1e-15, abs_tol: 0.0, max_intervals: 3, initial_panels: 1 };
        let err = integrate(|x: f64| [x.abs().sqrt()], -1.0, 1.0, &[], &opts).unwrap_err();
        assert!(matches!(err, Error::ToleranceNotMet { .. }));
    }
}
