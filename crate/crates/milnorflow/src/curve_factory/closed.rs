//! Final smooth closed curve `Γ_λ` with arc-length lookup.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use super::arclength::{ArcLength, SpeedFn, DIRECT_MAX};
use super::bumps::smooth_step;
use super::geodesic::{kg_from_jet, SphereCurveFn};
use super::model::{close_curve, kuiper_smooth, lift_to_sphere, split_param, trochoid, SphereCurve};
use super::TrochoidParams;
use crate::error::{Error, Result, Stage};
use crate::geom_core::Vec3;
use crate::jet::{deriv3, normalize3, Jet, Jet3};

pub const LAMBDA_MIN: f64 = 0.5;
const QUADRATURE_MAX_LOOPS: f64 = 65536.0;

pub const LAMBDA_MAX: f64 = 6.0;

/// Samples per loop when scanning curvature extrema.
const SCAN_PER_LOOP: usize = 96;
/// Maximum number of tail loops visited by the curvature scan.
const SCAN_TAIL_LOOPS: f64 = 1024.0;

/// Summary numbers of a built curve.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct CurveStats {
    pub lambda: f64,
    pub loops: f64,
    pub period: f64,
    pub length: f64,
    pub max_inv_kg: f64,
    pub min_kg: f64,
    pub delta_theta: f64,
}

/// Seam residuals between the two ends of a closed curve.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct SeamResidual {
    pub position: f64,
    pub tangent: f64,
    pub curvature: f64,
}

impl SeamResidual {
    pub fn max(&self) -> f64 {
        self.position.max(self.tangent).max(self.curvature)
    }
}

/// Smooth closed curve on S² with parameter `t = 2π n + τ ∈ [0, 2π m)`.
#[derive(Debug, Clone)]
pub struct SmoothClosedSphereCurve {
    kuiper: SphereCurve,
    w: f64,
    m: f64,
    arc: ArcLength,
    stats: CurveStats,
}

/// Full pipeline for `λ ∈ [LAMBDA_MIN, LAMBDA_MAX]`.
pub fn build_gamma(lambda: f64) -> Result<SmoothClosedSphereCurve> {
    if !(LAMBDA_MIN..=LAMBDA_MAX).contains(&lambda) {
        return Err(Error::LambdaRange(lambda));
    }
    SmoothClosedSphereCurve::from_params(&TrochoidParams::new(lambda)?)
}

/// Replaces the corner by a blend of the two analytic branches over `|t| < h²`.
pub fn corner_smooth(c: &SphereCurve) -> Result<SmoothClosedSphereCurve> {
    if c.kuiper().is_none() {
        return Err(Error::construction(Stage::Smoothing, "rotation stage missing"));
    }
    let p = *c.params();
    let m = c.loops();
    let w = blend_window(p.h);
    // The Kuiper transition occupies t ∈ [π m, 3π m / 2].
    if w >= PI || w >= 0.5 * PI * m {
        return Err(Error::construction(
            Stage::Smoothing,
            format!("window {w} overlaps the rotation zone"),
        ));
    }
    let mut out = SmoothClosedSphereCurve {
        kuiper: c.clone(),
        w,
        m,
        arc: ArcLength::build(1.0, 1.0, &|_, _, _| 1.0, 0.0),
        stats: CurveStats {
            lambda: p.lambda,
            loops: m,
            period: TAU * m,
            length: 0.0,
            max_inv_kg: 0.0,
            min_kg: 0.0,
            delta_theta: c.kuiper().map_or(0.0, |k| k.angle),
        },
    };
    let pure = pure_loops(&p, m);
    out.arc = ArcLength::build(m, pure, &|n, tau, blend| out.speed(n, tau, blend), DIRECT_MAX);
    out.stats.length = out.arc.total();
    out.scan_curvature()?;
    Ok(out)
}

/// Blend half-width `h²`, floored where roundoff in the branch difference would dominate.
pub fn blend_window(h: f64) -> f64 {
    (h * h).max((BLEND_NOISE / h).sqrt())
}

/// Squared minimum window times `h`: roundoff of the two branches relative to the curvature scale.
const BLEND_NOISE: f64 = 1e-10;

/// First loop index touched by the rotation zone or the closing bump.
fn pure_loops(p: &TrochoidParams, m: f64) -> f64 {
    let kuiper = (0.5 * m).floor();
    let closing = ((1.5 * PI - 2.0 * p.h) / (TAU * p.a)).floor();
    kuiper.min(closing).max(1.0)
}

impl SmoothClosedSphereCurve {
    /// Pipeline without the `λ` range guard.
    pub fn from_params(p: &TrochoidParams) -> Result<Self> {
        let plane = close_curve(&trochoid(p))?;
        let sphere = lift_to_sphere(&plane)?;
        let dt = sphere.corner_angle();
        corner_smooth(&kuiper_smooth(&sphere, dt))
    }

    pub fn params(&self) -> &TrochoidParams {
        self.kuiper.params()
    }

    pub fn lambda(&self) -> f64 {
        self.params().lambda
    }

    pub fn stats(&self) -> &CurveStats {
        &self.stats
    }

    pub fn loops(&self) -> f64 {
        self.m
    }

    /// Parameter period `2π m`.
    pub fn period(&self) -> f64 {
        TAU * self.m
    }

    pub fn length(&self) -> f64 {
        self.stats.length
    }

    pub fn max_inv_kg(&self) -> f64 {
        self.stats.max_inv_kg
    }

    pub fn min_kg(&self) -> f64 {
        self.stats.min_kg
    }

    pub fn blend_width(&self) -> f64 {
        self.w
    }

    /// Unsmoothed stage.
    pub fn unsmoothed(&self) -> &SphereCurve {
        &self.kuiper
    }

    /// Jets at `t = 2π n + τ`; `blend = false` skips the seam blend.
    pub fn at_with(&self, n: f64, tau: Jet, blend: bool) -> Jet3 {
        let n = n.rem_euclid(self.m);
        if blend {
            let s = tau.value();
            if n == 0.0 && s < self.w {
                return self.blend(tau);
            }
            if n == self.m - 1.0 && s > TAU - self.w {
                return self.blend(tau - TAU);
            }
        }
        self.kuiper.at(n, tau)
    }

    pub fn at(&self, n: f64, tau: Jet) -> Jet3 {
        self.at_with(n, tau, true)
    }

    /// `normalize((1 - χ) E + χ A)` with `χ = S((σ + w) / 2w)`.
    fn blend(&self, sigma: Jet) -> Jet3 {
        let a = self.kuiper.at(0.0, sigma);
        let e = self.kuiper.at(self.m, sigma);
        let chi = smooth_step((sigma + self.w) / (2.0 * self.w));
        let one = -chi + 1.0;
        normalize3(&std::array::from_fn(|i| e[i] * one + a[i] * chi))
    }

    fn speed(&self, n: f64, tau: f64, blend: bool) -> f64 {
        deriv3(&self.at_with(n, Jet::var(tau), blend), 1).norm()
    }

    fn speed_fn(&self) -> impl Fn(f64, f64, bool) -> f64 + Sync + '_ {
        move |n, tau, blend| self.speed(n, tau, blend)
    }

    pub fn point_at(&self, n: f64, tau: f64) -> Vec3 {
        deriv3(&self.at(n, Jet::constant(tau)), 0)
    }

    pub fn point(&self, t: f64) -> Vec3 {
        let (n, tau) = split_param(t);
        self.point_at(n, tau)
    }

    pub fn kg_at(&self, n: f64, tau: f64) -> Result<f64> {
        kg_from_jet(&self.at(n, Jet::var(tau))).map_err(|e| match e {
            Error::Singular { speed, .. } => Error::Singular {
                t: TAU * n + tau,
                speed,
            },
            other => other,
        })
    }

    pub fn kg(&self, t: f64) -> Result<f64> {
        let (n, tau) = split_param(t);
        self.kg_at(n, tau)
    }

    /// `(n, τ)` at arc length `l` from `γ(0)`, periodic in `l`.
    pub fn param_at_arclength(&self, l: f64) -> (f64, f64) {
        let f = self.speed_fn();
        let sf: &SpeedFn<'_> = &f;
        self.arc.param_of(l, sf)
    }

    /// Arc length from `γ(0)` to `(n, τ)`.
    pub fn arclength_at(&self, n: f64, tau: f64) -> f64 {
        let f = self.speed_fn();
        self.arc.arc_of(n.rem_euclid(self.m), tau, &f)
    }

    pub fn kappa_at_arclength(&self, l: f64) -> Result<f64> {
        let (n, tau) = self.param_at_arclength(l);
        self.kg_at(n, tau)
    }

    /// Point, unit tangent and geodesic curvature at arc length `l`.
    pub fn frame_at_arclength(&self, l: f64) -> Result<(Vec3, Vec3, f64)> {
        let (n, tau) = self.param_at_arclength(l);
        let j = self.at(n, Jet::var(tau));
        let k = kg_from_jet(&j)?;
        Ok((deriv3(&j, 0), deriv3(&j, 1).normalize(), k))
    }

    /// Seam residuals: point, unit tangent and `k_g` at `t → 2π m⁻` against `t = 0`.
    pub fn seam_residual(&self) -> Result<SeamResidual> {
        let end = self.at(self.m - 1.0, Jet::var(TAU));
        let start = self.at(0.0, Jet::var(0.0));
        let (e0, s0) = (deriv3(&end, 0), deriv3(&start, 0));
        let (e1, s1) = (deriv3(&end, 1).normalize(), deriv3(&start, 1).normalize());
        Ok(SeamResidual {
            position: (e0 - s0).norm(),
            tangent: (e1 - s1).norm(),
            curvature: (kg_from_jet(&end)? - kg_from_jet(&start)?).abs(),
        })
    }

    /// Loops visited by the curvature scan.
    fn scan_loops(&self) -> Vec<f64> {
        let m = self.m;
        let p = self.arc.pure_end();
        let mut loops = vec![0.0];
        if m > 1.0 {
            loops.push(m - 1.0);
        }
        if p > 1.0 {
            loops.push(1.0);
        }
        let span = (m - 1.0 - p).max(0.0);
        let stride = (span / SCAN_TAIL_LOOPS).ceil().max(1.0);
        let mut n = p;
        while n < m - 1.0 {
            loops.push(n);
            n += stride;
        }
        loops
    }

    fn scan_curvature(&mut self) -> Result<()> {
        let mut max_inv = 0.0f64;
        let mut min_k = f64::INFINITY;
        for n in self.scan_loops() {
            for k in 0..SCAN_PER_LOOP {
                let tau = TAU * k as f64 / SCAN_PER_LOOP as f64;
                let kg = self.kg_at(n, tau)?;
                max_inv = max_inv.max(1.0 / kg.abs());
                min_k = min_k.min(kg);
            }
            // Both ends of the seam window.
            if n == 0.0 {
                for k in 0..=16 {
                    let kg = self.kg_at(0.0, self.w * k as f64 / 16.0)?;
                    max_inv = max_inv.max(1.0 / kg.abs());
                    min_k = min_k.min(kg);
                }
            }
        }
        self.stats.max_inv_kg = max_inv;
        self.stats.min_kg = min_k;
        Ok(())
    }

    /// `∮ k_g ds` by Chebyshev quadrature loop by loop over the full curve.
    pub fn total_curvature(&self) -> Result<f64> {
        let f = |n: f64| -> f64 {
            let g = |tau: f64| {
                let j = self.at(n, Jet::var(tau));
                kg_from_jet(&j).unwrap_or(f64::NAN) * deriv3(&j, 1).norm()
            };
            crate::cheb::fit_adaptive(0.0, TAU, 24, 1e-14, 8, &g)
                .iter()
                .map(|c| c.integral())
                .sum()
        };
        let m = self.m;
        if m > QUADRATURE_MAX_LOOPS {
            return Err(Error::Domain(format!("{m} loops exceed the quadrature budget")));
        }
        let p = self.arc.pure_end();
        let mut total = f(0.0);
        if p > 1.0 {
            total += (p - 1.0) * f(1.0);
        }
        let mut n = p.max(1.0);
        while n < m {
            total += f(n);
            n += 1.0;
        }
        if total.is_nan() {
            return Err(Error::Singular {
                t: f64::NAN,
                speed: 0.0,
            });
        }
        Ok(total)
    }
}

impl SphereCurveFn for SmoothClosedSphereCurve {
    fn jet(&self, t: f64) -> Jet3 {
        let (n, tau) = split_param(t);
        self.at(n, Jet::var(tau))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lambda_range_is_guarded() {
        assert!(matches!(build_gamma(0.1), Err(Error::LambdaRange(_))));
        assert!(matches!(build_gamma(7.0), Err(Error::LambdaRange(_))));
    }

    #[test]
    fn smooth_curve_closes_and_stays_on_sphere() {
        let c = build_gamma(1.0).unwrap();
        let r = c.seam_residual().unwrap();
        assert!(r.max() <= 1e-8, "{r:?}");
        for k in 0..500 {
            let t = c.period() * k as f64 / 500.0;
            assert_relative_eq!(c.point(t).norm(), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn blend_is_smooth_across_window_edges() {
        let c = build_gamma(1.0).unwrap();
        let w = c.blend_width();
        for s in [w, 2.0 * std::f64::consts::PI - w] {
            let n = if s < 1.0 { 0.0 } else { c.loops() - 1.0 };
            let a = c.at_with(n, Jet::var(s), true);
            let b = c.at_with(n, Jet::var(s), false);
            for k in 0..3 {
                assert!((deriv3(&a, k) - deriv3(&b, k)).norm() <= 1e-9 * (1.0 + deriv3(&b, k).norm()));
            }
        }
    }

    #[test]
    fn arclength_round_trip() {
        let c = build_gamma(1.5).unwrap();
        let len = c.length();
        for f in [0.0, 0.1, 0.5, 0.77, 0.999] {
            let l = f * len;
            let (n, tau) = c.param_at_arclength(l);
            assert_relative_eq!(c.arclength_at(n, tau), l, epsilon = 1e-11 * len);
        }
    }

    #[test]
    fn length_matches_direct_quadrature() {
        let c = build_gamma(0.5).unwrap();
        let mut total = 0.0;
        for n in 0..c.loops() as usize {
            let g = |tau: f64| deriv3(&c.at(n as f64, Jet::var(tau)), 1).norm();
            total += crate::cheb::Cheb::fit(0.0, TAU, 200, g).integral();
        }
        assert_relative_eq!(total, c.length(), max_relative = 1e-11);
    }

    #[test]
    fn curvature_is_positive_and_flat_scale() {
        let c = build_gamma(2.0).unwrap();
        assert!(c.min_kg() > 0.0);
        let h = c.params().h;
        assert!(c.max_inv_kg() > 0.5 * h && c.max_inv_kg() < 2.0 * h);
    }
}
