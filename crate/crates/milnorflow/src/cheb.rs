//! Chebyshev interpolation on an interval: evaluation, antiderivative, integral.

use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct Cheb {
    a: f64,
    b: f64,
    c: Vec<f64>,
}

impl Cheb {
    /// Chebyshev-Lobatto nodes `x_k = cos(πk/n)` mapped to `[a, b]`.
    pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..=n)
            .map(|k| {
                let x = (PI * k as f64 / n as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * x
            })
            .collect()
    }

    /// Interpolant through values at `nodes(a, b, n)`.
    pub fn from_values(a: f64, b: f64, vals: &[f64]) -> Self {
        let n = vals.len() - 1;
        let mut c = vec![0.0; n + 1];
        for (j, cj) in c.iter_mut().enumerate() {
            let mut s = 0.0;
            for (k, v) in vals.iter().enumerate() {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                s += w * v * (PI * (j * k) as f64 / n as f64).cos();
            }
            *cj = 2.0 * s / n as f64;
        }
        c[0] *= 0.5;
        c[n] *= 0.5;
        Self { a, b, c }
    }

    pub fn fit<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> Self {
        let vals: Vec<f64> = Self::nodes(a, b, n).into_iter().map(&mut f).collect();
        Self::from_values(a, b, &vals)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Magnitude of the trailing coefficients relative to the largest one.
    pub fn tail_ratio(&self) -> f64 {
        let n = self.c.len();
        let big = self.c.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let tail = self.c[n.saturating_sub(3)..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        tail / big
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in self.c.iter().skip(1).rev() {
            let b0 = 2.0 * u * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        u * b1 - b2 + self.c[0]
    }

    /// Antiderivative vanishing at `a`.
    pub fn antiderivative(&self) -> Self {
        let n = self.c.len();
        let half = 0.5 * (self.b - self.a);
        let mut ext = self.c.clone();
        ext.push(0.0);
        ext.push(0.0);
        let mut d = vec![0.0; n + 1];
        for k in 1..=n {
            let prev = if k == 1 { 2.0 * ext[0] } else { ext[k - 1] };
            d[k] = half * (prev - ext[k + 1]) / (2.0 * k as f64);
        }
        let mut out = Self {
            a: self.a,
            b: self.b,
            c: d,
        };
        let at_a = out.eval(self.a);
        out.c[0] -= at_a;
        out
    }

    pub fn derivative(&self) -> Self {
        let n = self.c.len() - 1;
        let mut d = vec![0.0; n.max(1)];
        if n >= 1 {
            let mut next = 0.0;
            let mut next2 = 0.0;
            for k in (0..n).rev() {
                let v = next2 + 2.0 * (k + 1) as f64 * self.c[k + 1];
                next2 = next;
                next = v;
                d[k] = v;
            }
            d[0] *= 0.5;
        }
        let scale = 2.0 / (self.b - self.a);
        Self {
            a: self.a,
            b: self.b,
            c: d.into_iter().map(|x| x * scale).collect(),
        }
    }

    pub fn integral(&self) -> f64 {
        let half = 0.5 * (self.b - self.a);
        self.c
            .iter()
            .enumerate()
            .filter(|(k, _)| k % 2 == 0)
            .map(|(k, c)| c * 2.0 / (1.0 - (k * k) as f64))
            .sum::<f64>()
            * half
    }
}

/// Adaptive piecewise Chebyshev fit of `f` on `[a, b]` to relative coefficient decay `tol`.
pub fn fit_adaptive<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, tol: f64, max_depth: u32, f: &F) -> Vec<Cheb> {
    let c = Cheb::fit(a, b, n, f);
    if max_depth == 0 || c.tail_ratio() <= tol {
        return vec![c];
    }
    let m = 0.5 * (a + b);
    let mut left = fit_adaptive(a, m, n, tol, max_depth - 1, f);
    left.extend(fit_adaptive(m, b, n, tol, max_depth - 1, f));
    left
}
