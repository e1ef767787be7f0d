//! Natural cubic spline through tabulated samples.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 4 || y.len() != n {
            return Err(Error::DegenerateInput("spline needs at least 4 matching samples".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput("spline abscissae must be finite and strictly increasing".into()));
        }
        // Thomas algorithm on the interior second-derivative system.
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let cc = h1 / 6.0;
            let rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (rhs - a * d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(CubicSpline { x, y, m })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Value and first three derivatives; constant extension outside the table.
    pub fn eval(&self, t: f64) -> [f64; 4] {
        let n = self.x.len();
        if t <= self.x[0] {
            return [self.y[0], 0.0, 0.0, 0.0];
        }
        if t >= self.x[n - 1] {
            return [self.y[n - 1], 0.0, 0.0, 0.0];
        }
        let i = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let d2 = a * m0 + b * m1;
        let d3 = (m1 - m0) / h;
        [v, d1, d2, d3]
    }

    /// Exact integral of the spline over `[x0, t]`, constant extension outside.
    pub fn integral_from_start(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0] * (t - self.x[0]);
        }
        let mut acc = 0.0;
        for i in 0..n - 1 {
            let (lo, hi) = (self.x[i], self.x[i + 1]);
            if t <= lo {
                break;
            }
            let h = hi - lo;
            let top = t.min(hi);
            // integrate a, b cubic basis on [lo, top]
            let prim = |s: f64| {
                let a = (hi - s) / h;
                let b = (s - lo) / h;
                -h * a * a / 2.0 * self.y[i] + h * b * b / 2.0 * self.y[i + 1]
                    + (-(a.powi(4) / 4.0 - a * a / 2.0) * self.m[i] + (b.powi(4) / 4.0 - b * b / 2.0) * self.m[i + 1]) * h.powi(3)
                        / 6.0
            };
            acc += prim(top) - prim(lo);
        }
        if t > self.x[n - 1] {
            acc += self.y[n - 1] * (t - self.x[n - 1]);
        }
        acc
    }
}
