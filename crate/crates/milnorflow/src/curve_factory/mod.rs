//! Closed curves on S² with exponentially flat reciprocal geodesic curvature
//! and unbounded length.

mod arclength;
pub mod bumps;
mod closed;
pub mod geodesic;
mod model;

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet;

pub use closed::{
    blend_window, build_gamma, corner_smooth, CurveStats, SeamResidual, SmoothClosedSphereCurve, LAMBDA_MAX, LAMBDA_MIN,
};
pub use geodesic::{
    curvature_cross_check, geodesic_curvature, geodesic_curvature_christoffel, stereo_from_plane, stereo_to_plane,
    SphereCurveFn,
};
pub use model::{close_curve, kuiper_smooth, lift_to_sphere, trochoid, PlaneCurve, SphereCurve};

/// Amplitudes of the trochoid family: `h`, `g`, `a = g h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrochoidParams {
    pub lambda: f64,
    pub h: f64,
    pub g: f64,
    pub a: f64,
}

impl TrochoidParams {
    pub const DEFAULT_H0: f64 = 0.2;
    pub const DEFAULT_G0: f64 = 0.2;

    /// Default schedule `h = h₀ e^{-λ}`, `g = g₀ e^{-λ}`.
    pub fn new(lambda: f64) -> Result<Self> {
        Self::with_prefactors(lambda, Self::DEFAULT_H0, Self::DEFAULT_G0)
    }

    pub fn with_prefactors(lambda: f64, h0: f64, g0: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
        }
        Self::custom(lambda, h0 * (-lambda).exp(), g0 * (-lambda).exp())
    }

    pub fn custom(lambda: f64, h: f64, g: f64) -> Result<Self> {
        if !(h > 0.0 && h < 0.5) {
            return Err(Error::Domain(format!("h must lie in (0, 0.5), got {h}")));
        }
        if !(g > 0.0 && g < 1.0) {
            return Err(Error::Domain(format!("g must lie in (0, 1), got {g}")));
        }
        Ok(Self { lambda, h, g, a: g * h })
    }

    /// Angular gap `s(λ) = 2π a` between consecutive crossings of `ρ = 1 + a`.
    pub fn crossing_gap(&self) -> f64 {
        TAU * self.a
    }

    pub(crate) fn rho_theta(&self, n: f64, tau: Jet) -> (Jet, Jet) {
        let (s, c) = tau.sin_cos();
        let rho = s * self.h + (1.0 + self.a);
        let theta = tau * self.a + (-c + 1.0) * self.h + TAU * (self.a * n);
        (rho, theta)
    }
}

/// `ρ = 1 + a + h sin t`, `θ = a t + h (1 - cos t)` (mod 2π).
pub fn trochoid_point(p: &TrochoidParams, t: f64) -> Result<(f64, f64)> {
    if !(0.0..=3.0 * PI / p.a).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, 3π/a]")));
    }
    let (rho, theta) = p.rho_theta(0.0, Jet::constant(t));
    Ok((rho.value(), theta.value().rem_euclid(TAU)))
}

/// Closed-form trochoid curvature and its reciprocal.
pub fn trochoid_curvature(p: &TrochoidParams, t: f64) -> (f64, f64) {
    let c = (t + PI / 2.0).cos();
    let k = (1.0 - p.g * c) / (p.h * (1.0 + p.g * p.g - 2.0 * p.g * c).powf(1.5));
    (k, 1.0 / k)
}

/// Curvature of the polar curve `ρ e^{iθ}` from jets in the curve parameter.
pub fn polar_curvature(rho: Jet, theta: Jet) -> Result<f64> {
    let (s, c) = theta.sin_cos();
    let x = rho * c;
    let y = rho * s;
    let speed = x.d(1).hypot(y.d(1));
    if speed < 1e-12 {
        return Err(Error::Singular { t: f64::NAN, speed });
    }
    Ok((x.d(1) * y.d(2) - y.d(1) * x.d(2)) / speed.powi(3))
}

/// Factors of `k = k_tr ξ + χ` for a polar curve, with `k_tr` the curvature of the `(θ, ρ)` graph.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureSplit {
    pub k_tr: f64,
    pub xi: f64,
    pub chi: f64,
}

impl CurvatureSplit {
    pub fn total(&self) -> f64 {
        self.k_tr * self.xi + self.chi
    }
}

pub fn polar_curvature_split(rho: Jet, theta: Jet) -> CurvatureSplit {
    let (r, r1, r2) = (rho.d(0), rho.d(1), rho.d(2));
    let (t1, t2) = (theta.d(1), theta.d(2));
    let flat = r1 * r1 + t1 * t1;
    let polar = r1 * r1 + r * r * t1 * t1;
    let k_tr = (r1 * t2 - t1 * r2) / flat.powf(1.5);
    CurvatureSplit {
        k_tr,
        xi: r * (flat / polar).powf(1.5),
        chi: t1 * (r * r * t1 * t1 + 2.0 * r1 * r1) / polar.powf(1.5),
    }
}

/// Cartesian curvature of the trochoid in the plane.
pub fn plane_curvature(p: &TrochoidParams, t: f64) -> Result<f64> {
    let (rho, theta) = p.rho_theta(0.0, Jet::var(t));
    polar_curvature(rho, theta).map_err(|e| match e {
        Error::Singular { speed, .. } => Error::Singular { t, speed },
        other => other,
    })
}
