//! Truncated Taylor series (forward-mode derivatives up to order 4).

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

pub const ORDER: usize = 4;
const N: usize = ORDER + 1;
const FACT: [f64; N] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Coefficients `c[k] = f⁽ᵏ⁾(t₀) / k!`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub c: [f64; N],
}

impl Jet {
    pub fn constant(x: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = x;
        Self { c }
    }

    /// The independent variable at `x`.
    pub fn var(x: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = x;
        c[1] = 1.0;
        Self { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative.
    pub fn d(&self, k: usize) -> f64 {
        self.c[k] * FACT[k]
    }

    pub fn scale(self, s: f64) -> Self {
        Self {
            c: self.c.map(|x| x * s),
        }
    }

    pub fn recip(self) -> Self {
        let a = &self.c;
        let mut b = [0.0; N];
        b[0] = 1.0 / a[0];
        for k in 1..N {
            let s: f64 = (1..=k).map(|i| a[i] * b[k - i]).sum();
            b[k] = -s * b[0];
        }
        Self { c: b }
    }

    pub fn exp(self) -> Self {
        let a = &self.c;
        let mut e = [0.0; N];
        e[0] = a[0].exp();
        for k in 1..N {
            let s: f64 = (1..=k).map(|i| i as f64 * a[i] * e[k - i]).sum();
            e[k] = s / k as f64;
        }
        Self { c: e }
    }

    pub fn sin_cos(self) -> (Self, Self) {
        let a = &self.c;
        let mut s = [0.0; N];
        let mut c = [0.0; N];
        (s[0], c[0]) = a[0].sin_cos();
        for k in 1..N {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for i in 1..=k {
                ss += i as f64 * a[i] * c[k - i];
                cc -= i as f64 * a[i] * s[k - i];
            }
            s[k] = ss / k as f64;
            c[k] = cc / k as f64;
        }
        (Self { c: s }, Self { c })
    }

    pub fn sin(self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(self) -> Self {
        self.sin_cos().1
    }

    pub fn sqrt(self) -> Self {
        let a = &self.c;
        let mut r = [0.0; N];
        r[0] = a[0].sqrt();
        for k in 1..N {
            let s: f64 = (1..k).map(|i| r[i] * r[k - i]).sum();
            r[k] = (a[k] - s) / (2.0 * r[0]);
        }
        Self { c: r }
    }

    pub fn square(self) -> Self {
        self * self
    }

    /// `f ∘ self` given `f⁽ⁿ⁾(self(t₀))` for `n = 0..=4`.
    pub fn compose(self, derivs: [f64; N]) -> Self {
        let mut d = self;
        d.c[0] = 0.0;
        let mut out = Jet::constant(derivs[0]);
        let mut pow = Jet::constant(1.0);
        for (n, fd) in derivs.iter().enumerate().skip(1) {
            pow = d * pow;
            out += pow.scale(fd / FACT[n]);
        }
        out
    }

    /// Solves `f(x) = self` for the jet `x`, given the root `x0` of `f(x0) = self.value()`.
    pub fn invert<F: Fn(Jet) -> Jet>(self, x0: f64, f: F) -> Jet {
        let fp = f(Jet::var(x0)).c[1];
        let mut x = Jet::constant(x0);
        for _ in 0..ORDER {
            let r = f(x) - self;
            x = x - r.scale(1.0 / fp);
        }
        x
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c) {
            *x += y;
        }
        Jet { c }
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, o: Jet) {
        *self = *self + o;
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
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
        let a = &self.c;
        let b = &o.c;
        let mut c = [0.0; N];
        for k in 0..N {
            c[k] = (0..=k).map(|i| a[i] * b[k - i]).sum();
        }
        Jet { c }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, x: f64) -> Jet {
        self.c[0] += x;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, x: f64) -> Jet {
        self.c[0] -= x;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, x: f64) -> Jet {
        self.scale(x)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, x: f64) -> Jet {
        self.scale(1.0 / x)
    }
}

/// A curve in R³ with Taylor coefficients per component.
pub type Jet3 = [Jet; 3];

pub fn dot3(a: &Jet3, b: &Jet3) -> Jet {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: &Jet3, b: &Jet3) -> Jet3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn scale3(a: &Jet3, s: Jet) -> Jet3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn normalize3(a: &Jet3) -> Jet3 {
    scale3(a, dot3(a, a).sqrt().recip())
}

/// `k`-th derivative vector of a `Jet3`.
pub fn deriv3(a: &Jet3, k: usize) -> nalgebra::Vector3<f64> {
    nalgebra::Vector3::new(a[0].d(k), a[1].d(k), a[2].d(k))
}

/// Applies a constant matrix.
pub fn mat_mul3(m: &nalgebra::Matrix3<f64>, a: &Jet3) -> Jet3 {
    let row = |i: usize| a[0] * m[(i, 0)] + a[1] * m[(i, 1)] + a[2] * m[(i, 2)];
    [row(0), row(1), row(2)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn check(j: Jet, f: &dyn Fn(f64) -> f64, x: f64) {
        let h = 1e-3;
        // Five-point stencils for derivatives 1 and 2; spot checks beyond that are analytic.
        let d1 = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        let d2 = (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h);
        assert_relative_eq!(j.value(), f(x), max_relative = 1e-14);
        assert_relative_eq!(j.d(1), d1, max_relative = 1e-9);
        assert_relative_eq!(j.d(2), d2, max_relative = 1e-6);
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        let x = 0.7;
        let t = Jet::var(x);
        check(t.sin() * t.exp(), &|x| x.sin() * x.exp(), x);
        check((t * t + 1.0).sqrt().recip(), &|x| 1.0 / (x * x + 1.0).sqrt(), x);
        check(t.cos() / (t + 2.0), &|x| x.cos() / (x + 2.0), x);
    }

    #[test]
    fn high_orders_are_exact_for_known_series() {
        let e = Jet::var(0.0).exp();
        for k in 0..=ORDER {
            assert_relative_eq!(e.d(k), 1.0, epsilon = 1e-15);
        }
        let s = Jet::var(0.0).sin();
        assert_eq!([s.d(1), s.d(2), s.d(3), s.d(4)], [1.0, 0.0, -1.0, 0.0]);
        let p = Jet::var(2.0).square().square();
        assert_relative_eq!(p.d(4), 24.0);
        assert_relative_eq!(p.d(3), 48.0);
    }

    #[test]
    fn compose_matches_direct() {
        let t = Jet::var(0.3);
        let u = t.sin() * 2.0;
        let v = u.value();
        let direct = u.exp();
        let composed = u.compose([v.exp(); 5]);
        for k in 0..=ORDER {
            assert_relative_eq!(direct.d(k), composed.d(k), max_relative = 1e-13);
        }
    }

    #[test]
    fn invert_recovers_inverse_function() {
        // x = y^{1/3} from f(x) = x^3.
        let y = Jet::var(8.0);
        let x = y.invert(2.0, |x| x * x * x);
        let exact = [2.0, 1.0 / 12.0, -2.0 / 144.0 * 2.0 / 2.0];
        assert_relative_eq!(x.d(0), exact[0]);
        assert_relative_eq!(x.d(1), exact[1], max_relative = 1e-14);
        // d²/dy² y^{1/3} = -2/9 y^{-5/3}
        assert_relative_eq!(x.d(2), -2.0 / 9.0 / 32.0, max_relative = 1e-13);
        // d⁴/dy⁴ y^{1/3} = -80/81 y^{-11/3}
        assert_relative_eq!(x.d(4), -80.0 / 81.0 / 2048.0, max_relative = 1e-12);
    }
}
