//! Truncated Taylor arithmetic: a [`Jet`] stores `f(x0 + h) = sum c_k h^k`
//! for `k <= ORDER`, which gives exact derivatives of closed-form data.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const ORDER: usize = 6;
const N: usize = ORDER + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub c: [f64; N],
}

const FACT: [f64; N] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Jet { c }
    }

    /// The identity function expanded at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = x0;
        c[1] = 1.0;
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        self.c[k] * FACT[k]
    }

    pub fn derivatives(&self) -> [f64; N] {
        let mut d = [0.0; N];
        for (k, v) in d.iter_mut().enumerate() {
            *v = self.derivative(k);
        }
        d
    }

    pub fn scale(self, s: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|v| *v *= s);
        Jet { c }
    }

    pub fn exp(self) -> Self {
        // (e^f)' = f' e^f  =>  k r_k = sum_{j=1}^{k} j f_j r_{k-j}
        let mut r = [0.0; N];
        r[0] = self.c[0].exp();
        for k in 1..N {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * r[k - j];
            }
            r[k] = acc / k as f64;
        }
        Jet { c: r }
    }

    pub fn recip(self) -> Self {
        Jet::constant(1.0) / self
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c) {
            *a += b;
        }
        Jet { c }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c) {
            *a -= b;
        }
        Jet { c }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; N];
        for i in 0..N {
            for j in 0..N - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let mut q = [0.0; N];
        for k in 0..N {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= o.c[j] * q[k - j];
            }
            q[k] = acc / o.c[0];
        }
        Jet { c: q }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, v: f64) -> Jet {
        self.c[0] += v;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, v: f64) -> Jet {
        self.c[0] -= v;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, v: f64) -> Jet {
        self.scale(v)
    }
}
