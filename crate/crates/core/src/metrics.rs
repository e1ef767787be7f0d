//! Sampled fields, norms, Hölder seminorms and convergence-rate fits.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// A scalar field on a tensor grid `times x xs`, stored slice by slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub label: String,
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl FieldSample {
    pub fn new(label: impl Into<String>, times: Vec<f64>, xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || xs.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if values.len() != times.len() * xs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a {}x{} grid",
                values.len(),
                times.len(),
                xs.len()
            )));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("spatial grid must be strictly increasing".into()));
        }
        Ok(FieldSample { label: label.into(), times, xs, values })
    }

    pub fn slice(&self, i: usize) -> &[f64] {
        let n = self.xs.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// CSV with columns `t,x,value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "x", "value"])?;
        for (i, &t) in self.times.iter().enumerate() {
            for (x, v) in self.xs.iter().zip(self.slice(i)) {
                out.write_record([fmt_float(t), fmt_float(*x), fmt_float(*v)])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Shortest text with 17 significant digits, which round-trips exactly.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Linf,
    L1,
    L2,
}

/// Closed space-time window; infinite bounds are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub t_min: f64,
    pub t_max: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Window {
    pub fn everything() -> Self {
        Window { t_min: f64::NEG_INFINITY, t_max: f64::INFINITY, x_min: f64::NEG_INFINITY, x_max: f64::INFINITY }
    }
}

/// Norm of one slice; `L1`/`L2` by the trapezoidal rule on the given nodes.
pub fn slice_norm(xs: &[f64], vals: &[f64], kind: NormKind) -> f64 {
    match kind {
        NormKind::Linf => vals.iter().fold(0.0, |m, v| m.max(v.abs())),
        NormKind::L1 | NormKind::L2 => {
            let p = |v: f64| if kind == NormKind::L1 { v.abs() } else { v * v };
            let s: f64 = xs
                .windows(2)
                .zip(vals.windows(2))
                .map(|(x, v)| 0.5 * (x[1] - x[0]) * (p(v[0]) + p(v[1])))
                .sum();
            if kind == NormKind::L1 {
                s
            } else {
                s.sqrt()
            }
        }
    }
}

fn restrict(f: &FieldSample, w: &Window) -> Result<(Vec<usize>, std::ops::Range<usize>)> {
    let ts: Vec<usize> = (0..f.times.len()).filter(|&i| f.times[i] >= w.t_min && f.times[i] <= w.t_max).collect();
    let lo = f.xs.partition_point(|&x| x < w.x_min);
    let hi = f.xs.partition_point(|&x| x <= w.x_max);
    if ts.is_empty() || hi <= lo {
        return Err(Error::EmptyGrid);
    }
    Ok((ts, lo..hi))
}

/// Sup over time slices of the spatial norm inside `window`.
pub fn grid_norm(f: &FieldSample, kind: NormKind, window: &Window) -> Result<f64> {
    let (ts, xr) = restrict(f, window)?;
    Ok(ts
        .par_iter()
        .map(|&i| slice_norm(&f.xs[xr.clone()], &f.slice(i)[xr.clone()], kind))
        .reduce(|| 0.0, f64::max))
}

/// Exact discrete `sup |f(x) - f(y)| / |x - y|^gamma` over node pairs with
/// `|x - y| <= 1`. Pairs are pruned with suffix extrema: once the largest
/// possible increment over the remaining nodes cannot beat the current
/// best at the current distance, the inner scan stops.
pub fn holder_seminorm(xs: &[f64], vals: &[f64], gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidArgument(format!("Hölder exponent {gamma} outside (0, 1]")));
    }
    let n = xs.len();
    if n < 2 || vals.len() != n {
        return Err(Error::EmptyGrid);
    }
    let mut sufmax = vals.to_vec();
    let mut sufmin = vals.to_vec();
    for i in (0..n - 1).rev() {
        sufmax[i] = sufmax[i].max(sufmax[i + 1]);
        sufmin[i] = sufmin[i].min(sufmin[i + 1]);
    }
    let ratio = |i: usize, j: usize| (vals[j] - vals[i]).abs() / (xs[j] - xs[i]).powf(gamma);
    let mut best = (0..n - 1).filter(|&i| xs[i + 1] - xs[i] <= 1.0).map(|i| ratio(i, i + 1)).fold(0.0, f64::max);
    for i in 0..n - 1 {
        for j in i + 1..n {
            let dist = xs[j] - xs[i];
            if dist > 1.0 {
                break;
            }
            let reach = (sufmax[j] - vals[i]).max(vals[i] - sufmin[j]);
            if reach / dist.powf(gamma) <= best {
                break;
            }
            best = best.max(ratio(i, j));
        }
    }
    Ok(best)
}

/// Sup over time slices of [`holder_seminorm`] inside `window`.
pub fn holder_seminorm_field(f: &FieldSample, gamma: f64, window: &Window) -> Result<f64> {
    let (ts, xr) = restrict(f, window)?;
    let per: Result<Vec<f64>> =
        ts.par_iter().map(|&i| holder_seminorm(&f.xs[xr.clone()], &f.slice(i)[xr.clone()], gamma)).collect();
    Ok(per?.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Largest `|error - fit| / error` over the table.
    pub max_rel_residual: f64,
    pub table: Vec<(f64, f64)>,
}

fn sorted_table(table: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if table.len() < 3 {
        return Err(Error::DegenerateInput(format!("rate fit needs at least 3 points, got {}", table.len())));
    }
    if table.iter().any(|&(nu, e)| !(nu > 0.0 && e > 0.0 && nu.is_finite() && e.is_finite())) {
        return Err(Error::DegenerateInput("rate fit needs positive finite entries".into()));
    }
    let mut t = table.to_vec();
    t.sort_by(|a, b| b.0.total_cmp(&a.0));
    if t[0].0 == t[t.len() - 1].0 {
        return Err(Error::DegenerateInput("all viscosities are equal".into()));
    }
    Ok(t)
}

/// Least-squares line through `(ln nu, ln error)`.
pub fn fit_rate(table: &[(f64, f64)]) -> Result<RateFit> {
    let t = sorted_table(table)?;
    let n = t.len() as f64;
    let xs: Vec<f64> = t.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = t.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    let max_rel_residual = t
        .iter()
        .map(|&(nu, e)| ((e - (intercept + slope * nu.ln()).exp()) / e).abs())
        .fold(0.0, f64::max);
    Ok(RateFit { exponent: slope, intercept, r_squared, max_rel_residual, table: t })
}

/// One-parameter model `error = A nu ln(1/nu)` fitted in log space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogCorrectedFit {
    pub amplitude: f64,
    pub max_rel_residual: f64,
    /// The free power law on the same table, for comparison.
    pub power: RateFit,
    pub beats_power_law: bool,
}

pub fn fit_log_corrected(table: &[(f64, f64)]) -> Result<LogCorrectedFit> {
    let t = sorted_table(table)?;
    if t.iter().any(|p| p.0 >= 1.0) {
        return Err(Error::DegenerateInput("log-corrected model needs nu < 1".into()));
    }
    let shape = |nu: f64| nu * (1.0 / nu).ln();
    let ln_a = t.iter().map(|&(nu, e)| e.ln() - shape(nu).ln()).sum::<f64>() / t.len() as f64;
    let amplitude = ln_a.exp();
    let max_rel_residual = t.iter().map(|&(nu, e)| ((e - amplitude * shape(nu)) / e).abs()).fold(0.0, f64::max);
    let power = fit_rate(&t)?;
    let beats_power_law = max_rel_residual < power.max_rel_residual;
    Ok(LogCorrectedFit { amplitude, max_rel_residual, power, beats_power_law })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform(n: usize, a: f64, b: f64) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let xs = uniform(11, -1.0, 1.0);
        let f = FieldSample::new("z", vec![-1.0, -0.5], xs, vec![0.0; 22]).unwrap();
        for k in [NormKind::Linf, NormKind::L1, NormKind::L2] {
            assert_eq!(grid_norm(&f, k, &Window::everything()).unwrap(), 0.0);
        }
        let w = Window { t_min: 0.0, t_max: 1.0, ..Window::everything() };
        assert_eq!(grid_norm(&f, NormKind::Linf, &w).unwrap_err(), Error::EmptyGrid);
    }

    #[test]
    fn indicator_and_gaussian_integrals() {
        let xs = uniform(4001, -2.0, 2.0);
        let ind: Vec<f64> = xs.iter().map(|&x| if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 }).collect();
        assert!((slice_norm(&xs, &ind, NormKind::L1) - 1.0).abs() < 2e-3);
        let xs = uniform(4001, -8.0, 8.0);
        let g: Vec<f64> = xs.iter().map(|&x| (-x * x).exp()).collect();
        // int exp(-2x^2) = sqrt(pi/2)
        let exact = (std::f64::consts::PI / 2.0).sqrt().sqrt();
        assert!((slice_norm(&xs, &g, NormKind::L2) - exact).abs() < 1e-10);
    }

    #[test]
    fn trapezoid_converges_at_second_order() {
        let err = |n: usize| {
            let xs = uniform(n, 0.0, 1.0);
            let v: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
            (slice_norm(&xs, &v, NormKind::L1) - (1.0 - 1f64.cos())).abs()
        };
        let order = (err(51) / err(101)).log2();
        assert!((order - 2.0).abs() < 0.05);
    }

    fn brute(xs: &[f64], v: &[f64], g: f64) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                if xs[j] - xs[i] <= 1.0 {
                    best = best.max((v[j] - v[i]).abs() / (xs[j] - xs[i]).powf(g));
                }
            }
        }
        best
    }

    #[test]
    fn holder_examples() {
        let xs = uniform(101, -1.0, 1.0);
        assert!((holder_seminorm(&xs, &xs, 1.0).unwrap() - 1.0).abs() < 1e-14);
        let xs = uniform(1000, -1.0, 1.0);
        let v: Vec<f64> = xs.iter().map(|x: &f64| x.abs().cbrt()).collect();
        let h = holder_seminorm(&xs, &v, 1.0 / 3.0).unwrap();
        assert!((h - brute(&xs, &v, 1.0 / 3.0)).abs() < 1e-14);
        assert!((h - 1.0).abs() < 0.3);
        // the exponent-1/2 seminorm grows as the grid refines toward the cusp
        let coarse = holder_seminorm(&uniform(101, -1.0, 1.0), &uniform(101, -1.0, 1.0).iter().map(|x| x.abs().cbrt()).collect::<Vec<_>>(), 0.5).unwrap();
        let fine_x = uniform(10001, -1.0, 1.0);
        let fine_v: Vec<f64> = fine_x.iter().map(|x| x.abs().cbrt()).collect();
        assert!(holder_seminorm(&fine_x, &fine_v, 0.5).unwrap() > 2.0 * coarse);
    }

    #[test]
    fn rate_fit_examples() {
        let nus = [1e-2, 1e-3, 1e-4, 1e-5];
        let f = fit_rate(&nus.map(|n| (n, n))).unwrap();
        assert!((f.exponent - 1.0).abs() < 1e-12 && f.max_rel_residual < 1e-12);
        let f = fit_rate(&nus.map(|n| (n, 3.0 * n.powf(0.25)))).unwrap();
        assert!((f.exponent - 0.25).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit_rate(&[(1e-2, 1.0), (1e-2, 2.0), (1e-2, 3.0)]).is_err());
        assert!(fit_rate(&[(1e-2, 1.0), (1e-3, 2.0)]).is_err());
    }

    #[test]
    fn log_corrected_data() {
        // log-log slope of nu ln(1/nu) is 1 - 1/ln(1/nu)
        let wide: Vec<(f64, f64)> = (0..5).map(|i| 10f64.powf(-2.0 - 0.5 * i as f64)).map(|n| (n, n * (1.0 / n).ln())).collect();
        let narrow: Vec<(f64, f64)> = (0..5).map(|i| 10f64.powf(-6.0 - 0.5 * i as f64)).map(|n| (n, n * (1.0 / n).ln())).collect();
        let (a, b) = (fit_rate(&wide).unwrap().exponent, fit_rate(&narrow).unwrap().exponent);
        assert!(a < b && b < 1.0);
        assert!((a - (1.0 - 1.0 / (1e-3f64).recip().ln())).abs() < 0.01);
        let lc = fit_log_corrected(&wide).unwrap();
        assert!((lc.amplitude - 1.0).abs() < 1e-12 && lc.max_rel_residual < 1e-12 && lc.beats_power_law);
    }

    #[test]
    fn csv_round_trips_floats() {
        let f = FieldSample::new("f", vec![-0.1], vec![0.1, 0.2], vec![1.0 / 3.0, -2e-300]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut rows = text.lines().skip(1);
        let first: Vec<f64> = rows.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(first[2], 1.0 / 3.0);
        assert_eq!(rows.next().unwrap().split(',').nth(2).unwrap().parse::<f64>().unwrap(), -2e-300);
    }

    proptest! {
        #[test]
        fn pruned_holder_equals_brute_force(seed in proptest::collection::vec(-1.0f64..1.0, 2..80), g in 0.1f64..1.0) {
            let n = seed.len();
            let xs: Vec<f64> = (0..n).map(|i| -1.3 + 2.6 * (i as f64 / n as f64).powi(2)).collect();
            let h = holder_seminorm(&xs, &seed, g).unwrap();
            prop_assert!((h - brute(&xs, &seed, g)).abs() <= 1e-12 * h.max(1.0));
        }

        #[test]
        fn holder_grows_under_refinement(n in 5usize..60) {
            let coarse = uniform(n, -1.0, 1.0);
            let fine = uniform(2 * n - 1, -1.0, 1.0);
            let f = |x: &f64| (3.0 * x).sin() + x.abs().sqrt();
            let hc = holder_seminorm(&coarse, &coarse.iter().map(f).collect::<Vec<_>>(), 0.5).unwrap();
            let hf = holder_seminorm(&fine, &fine.iter().map(f).collect::<Vec<_>>(), 0.5).unwrap();
            prop_assert!(hf >= hc - 1e-12);
        }
    }
}
