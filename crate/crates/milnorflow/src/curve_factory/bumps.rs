//! Smooth transition functions and the closing-flow bump.

use std::f64::consts::{E, FRAC_PI_2, TAU};

use crate::jet::Jet;

/// `C^∞` step: 0 for `x ≤ 0`, 1 for `x ≥ 1`, flat at both ends.
pub fn smooth_step(x: Jet) -> Jet {
    let v = x.value();
    if v <= 0.0 {
        return Jet::constant(0.0);
    }
    if v >= 1.0 {
        return Jet::constant(1.0);
    }
    let f = (-x.recip()).exp();
    let g = (-(-x + 1.0).recip()).exp();
    f / (f + g)
}

pub fn smooth_step_f(x: f64) -> f64 {
    smooth_step(Jet::constant(x)).value()
}

/// Plateau equal to 1 on `[c - inner, c + inner]`, vanishing outside `[c - outer, c + outer]`.
pub fn plateau(x: Jet, c: f64, inner: f64, outer: f64) -> Jet {
    let d = x - c;
    let width = outer - inner;
    if d.value() >= 0.0 {
        smooth_step((-d + outer) / width)
    } else {
        smooth_step((d + outer) / width)
    }
}

/// Exponent cut-off beyond which the bump is treated as zero.
const FLAT_CUTOFF: f64 = 600.0;
const B_SCALE: f64 = FRAC_PI_2 / E;

/// `f(x) = x exp(1/(1 - x²))` on `(-1, 1)`.
fn f_jet(x: Jet) -> Jet {
    x * (-(x * x) + 1.0).recip().exp()
}

fn f_scalar(x: f64) -> f64 {
    x * (1.0 / (1.0 - x * x)).exp()
}

/// Solves `f(x) = y` for `x ∈ (-1, 1)`.
fn f_inverse(y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let s = y.signum();
    let ly = y.abs().ln();
    // ln x + 1/(1 - x²) = ln|y| is increasing on (0, 1).
    let g = |x: f64| x.ln() + 1.0 / (1.0 - x * x) - ly;
    let dg = |x: f64| 1.0 / x + 2.0 * x / ((1.0 - x * x) * (1.0 - x * x));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x = if y.abs() < 1.0 { y.abs() / E } else { 0.5 };
    for _ in 0..200 {
        let gx = g(x);
        if gx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let step = gx / dg(x);
        let mut nx = x - step;
        if !(nx > lo && nx < hi) {
            nx = 0.5 * (lo + hi);
        }
        if (nx - x).abs() <= 1e-17 * x.max(1e-300) || hi - lo < 1e-17 {
            x = nx;
            break;
        }
        x = nx;
    }
    s * x
}

/// Closing bump supported in `(3π/2, 5π/2)`, `β = 1 / B'` with
/// `B(θ) = (π/2) x exp(1/(1-x²)) / e`, `x = (θ - 2π)/(π/2)`; `β(2π) = 1`.
#[derive(Debug, Clone, Copy)]
pub struct ClosingBump;

impl ClosingBump {
    pub const CENTER: f64 = TAU;
    pub const HALF_WIDTH: f64 = FRAC_PI_2;

    fn x_of(theta: f64) -> f64 {
        (theta - Self::CENTER) / Self::HALF_WIDTH
    }

    fn in_core(x: f64) -> bool {
        x.abs() < 1.0 && 1.0 / (1.0 - x * x) < FLAT_CUTOFF
    }

    pub fn beta(&self, theta: f64) -> f64 {
        let x = Self::x_of(theta);
        if !Self::in_core(x) {
            return 0.0;
        }
        let q = 1.0 - x * x;
        E * (-1.0 / q).exp() / (1.0 + 2.0 * x * x / (q * q))
    }

    /// `B(θ)`; only meaningful inside the support.
    pub fn big_b(&self, theta: f64) -> f64 {
        B_SCALE * f_scalar(Self::x_of(theta))
    }

    /// Time-`s` flow of `-β ∂θ` applied to `θ`, as a jet.
    pub fn flow(&self, theta: Jet, s: Jet) -> Jet {
        let x = Self::x_of(theta.value());
        if !Self::in_core(x) || s.value() == 0.0 && s.c.iter().all(|c| *c == 0.0) {
            return theta;
        }
        let xj = (theta - Self::CENTER) / Self::HALF_WIDTH;
        let yj = f_jet(xj) - s / B_SCALE;
        let x1 = f_inverse(yj.value());
        let x1j = yj.invert(x1, f_jet);
        x1j * Self::HALF_WIDTH + Self::CENTER
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smooth_step_is_monotone_and_flat() {
        let mut prev = -1.0;
        for k in 0..=100 {
            let v = smooth_step_f(k as f64 / 100.0);
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(smooth_step_f(0.0), 0.0);
        assert_eq!(smooth_step_f(1.0), 1.0);
        assert_relative_eq!(smooth_step_f(0.5), 0.5);
        let j = smooth_step(Jet::var(1e-3));
        assert!(j.d(1).abs() < 1e-100 && j.d(4).abs() < 1e-100);
    }

    #[test]
    fn bump_shape() {
        let b = ClosingBump;
        assert_relative_eq!(b.beta(TAU), 1.0, epsilon = 1e-15);
        assert_eq!(b.beta(1.4 * std::f64::consts::PI), 0.0);
        assert_eq!(b.beta(2.6 * std::f64::consts::PI), 0.0);
        for k in 1..100 {
            let th = 1.5 * std::f64::consts::PI + k as f64 * std::f64::consts::PI / 100.0;
            let v = b.beta(th);
            assert!((0.0..=1.0 + 1e-15).contains(&v));
        }
    }

    #[test]
    fn flow_inverts_b_and_matches_ode() {
        let b = ClosingBump;
        let theta = TAU + 0.05;
        let s = 0.02;
        let z = b.flow(Jet::constant(theta), Jet::constant(s)).value();
        assert_relative_eq!(b.big_b(z), b.big_b(theta) - s, epsilon = 1e-15);
        // Euler-Richardson integration of the ODE dθ/ds = -β(θ).
        let n = 20000;
        let ds = s / n as f64;
        let mut th = theta;
        for _ in 0..n {
            let k1 = -b.beta(th);
            let k2 = -b.beta(th + 0.5 * ds * k1);
            let k3 = -b.beta(th + 0.5 * ds * k2);
            let k4 = -b.beta(th + ds * k3);
            th += ds * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        assert_relative_eq!(z, th, epsilon = 1e-13);
        // dζ/dθ = β(ζ)/β(θ)
        let zj = b.flow(Jet::var(theta), Jet::constant(s));
        assert_relative_eq!(zj.d(1), b.beta(z) / b.beta(theta), max_relative = 1e-12);
    }

    #[test]
    fn inverse_handles_large_arguments() {
        for &y in &[1e-8, 0.3, 2.0, 1e5, 1e200, -7.0] {
            let x: f64 = f_inverse(y);
            // Relative error allowed by the conditioning of f at x.
            let cond = 1.0 + x.abs() * (1.0 / x.abs() + 2.0 * x.abs() / (1.0 - x * x).powi(2));
            assert_relative_eq!(f_scalar(x), y, max_relative = 1e-15 * cond.max(100.0));
        }
    }
}
