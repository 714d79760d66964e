//! Staged curve construction: trochoid, closed plane curve, sphere lift, Kuiper rotation.

use std::f64::consts::{PI, TAU};

use super::bumps::{plateau, smooth_step, ClosingBump};
use super::geodesic::stereo_from_plane;
use super::TrochoidParams;
use crate::error::{Error, Result, Stage};
use crate::geom_core::Vec3;
use crate::jet::{cross3, deriv3, dot3, Jet, Jet3};

/// Data of the closing deformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Closing {
    /// Unwrapped angle `θ(t_close)` of the open trochoid.
    pub theta_end: f64,
    /// Flow time `τ₀` with `Φ_{τ₀}(θ_end) = 2π`.
    pub tau0: f64,
    /// Signed angle from the end tangent to the start tangent at the seam.
    pub delta_theta: f64,
}

/// Plane curve `t ↦ (ρ(t), θ(t))` with `t = 2π n + τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCurve {
    pub(crate) p: TrochoidParams,
    /// Number of trochoid loops before the closing crossing.
    pub(crate) m: f64,
    pub(crate) closing: Option<Closing>,
}

/// The open trochoid on `[0, 3π/a]`.
pub fn trochoid(p: &TrochoidParams) -> PlaneCurve {
    PlaneCurve {
        p: *p,
        m: (1.0 / p.a).ceil(),
        closing: None,
    }
}

impl PlaneCurve {
    pub fn params(&self) -> &TrochoidParams {
        &self.p
    }

    pub fn is_closed(&self) -> bool {
        self.closing.is_some()
    }

    pub fn closing(&self) -> Option<&Closing> {
        self.closing.as_ref()
    }

    pub fn delta_theta(&self) -> Option<f64> {
        self.closing.map(|c| c.delta_theta)
    }

    /// Number of loops `m`; the closed curve lives on `[0, 2π m]`.
    pub fn loops(&self) -> f64 {
        self.m
    }

    /// Parameter interval end: `2π m` when closed, `3π/a` otherwise.
    pub fn t_end(&self) -> f64 {
        if self.is_closed() {
            TAU * self.m
        } else {
            3.0 * PI / self.p.a
        }
    }

    /// `α(ρ)`: 1 on `[1+a-1.5h, 1+a+1.5h]`, 0 outside `[1+a-2h, 1+a+2h]`.
    pub fn alpha(&self, rho: Jet) -> Jet {
        plateau(rho, 1.0 + self.p.a, 1.5 * self.p.h, 2.0 * self.p.h)
    }

    /// Polar jets at `t = 2π n + τ`, unwrapped angle.
    pub fn polar_at(&self, n: f64, tau: Jet) -> (Jet, Jet) {
        let (rho, theta) = self.p.rho_theta(n, tau);
        match &self.closing {
            None => (rho, theta),
            Some(c) => {
                let s = self.alpha(rho) * c.tau0;
                (rho, ClosingBump.flow(theta, s))
            }
        }
    }

    pub fn polar_jet(&self, t: f64) -> (Jet, Jet) {
        let (n, tau) = split_param(t);
        self.polar_at(n, Jet::var(tau))
    }

    /// `(ρ, θ mod 2π)` at `t`.
    pub fn point(&self, t: f64) -> (f64, f64) {
        let (r, th) = self.polar_jet(t);
        (r.value(), th.value().rem_euclid(TAU))
    }

    /// Angular displacement `ζ - θ` of the closing flow at `t`.
    pub fn closing_displacement(&self, t: f64) -> f64 {
        let (n, tau) = split_param(t);
        let (_, raw) = self.p.rho_theta(n, Jet::constant(tau));
        let (_, z) = self.polar_at(n, Jet::constant(tau));
        z.value() - raw.value()
    }

    /// Cartesian point and velocity in the plane.
    fn cartesian_at(&self, n: f64, tau: Jet) -> (Jet, Jet) {
        let (rho, theta) = self.polar_at(n, tau);
        let (s, c) = theta.sin_cos();
        (rho * c, rho * s)
    }
}

/// `t ↦ (n, τ)` with `t = 2π n + τ`, `τ ∈ [0, 2π)`.
pub(crate) fn split_param(t: f64) -> (f64, f64) {
    let n = (t / TAU).floor();
    (n, t - TAU * n)
}

/// Locates the closing crossing `ρ(t) = 1 + a` (upward, as at `t = 0`) where `θ` first reaches `2π`.
/// Returns the loop count `m`; the crossing sits at `t = 2π m`.
fn closing_crossing(p: &TrochoidParams) -> Result<f64> {
    let m = (1.0 / p.a).ceil();
    if TAU * m > 3.0 * PI / p.a {
        return Err(Error::construction(Stage::Closing, "no crossing in ]2π, 3π/a]"));
    }
    // Bisection on the local offset around the candidate loop boundary.
    let f = |s: f64| p.rho_theta(m, Jet::constant(s)).0.value() - (1.0 + p.a);
    let (mut lo, mut hi) = (-0.5 * PI, 0.5 * PI);
    if f(lo) >= 0.0 || f(hi) <= 0.0 {
        return Err(Error::construction(Stage::Closing, "crossing not bracketed"));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Resolution of `ρ - (1 + a)` in the offset.
    let resolution = 1e-12 + 4.0 * f64::EPSILON * (1.0 + p.a) / p.h;
    if (0.5 * (lo + hi)).abs() > resolution {
        return Err(Error::construction(Stage::Closing, "crossing off the loop boundary"));
    }
    Ok(m)
}

/// Closes the trochoid at its first crossing past `2π` by the flow of `-α(ρ) β(θ) ∂θ`.
pub fn close_curve(c: &PlaneCurve) -> Result<PlaneCurve> {
    if c.is_closed() {
        return Ok(c.clone());
    }
    let p = c.p;
    let m = closing_crossing(&p)?;
    let excess = TAU * p.a.mul_add(m, -1.0);
    let theta_end = TAU + excess;
    if !(0.0..ClosingBump::HALF_WIDTH).contains(&excess) {
        return Err(Error::construction(
            Stage::Closing,
            format!("end angle excess {excess} outside bump"),
        ));
    }
    let tau0 = ClosingBump.big_b(theta_end);
    if !(tau0 >= 0.0 && tau0 <= 10.0 * p.crossing_gap()) {
        return Err(Error::construction(
            Stage::Closing,
            format!("flow time {tau0} outside window"),
        ));
    }
    let mut out = PlaneCurve {
        p,
        m,
        closing: Some(Closing {
            theta_end,
            tau0,
            delta_theta: 0.0,
        }),
    };
    let (xe, ye) = out.cartesian_at(m, Jet::var(0.0));
    let (xs, ys) = out.cartesian_at(0.0, Jet::var(0.0));
    let end = (xe.d(1), ye.d(1));
    let start = (xs.d(1), ys.d(1));
    let gap = (xe.value() - xs.value()).hypot(ye.value() - ys.value());
    if gap > 1e-10 {
        return Err(Error::construction(Stage::Closing, format!("seam gap {gap:e}")));
    }
    let dt = (end.0 * start.1 - end.1 * start.0).atan2(end.0 * start.0 + end.1 * start.1);
    if let Some(cl) = out.closing.as_mut() {
        cl.delta_theta = dt;
    }
    Ok(out)
}

/// Rotation applied to the tail: axis through the corner, angle `δ(t) Δθ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kuiper {
    pub axis: Vec3,
    pub angle: f64,
}

/// Closed curve on S²: stereographic image of a closed plane curve, optionally Kuiper-rotated.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereCurve {
    pub(crate) plane: PlaneCurve,
    pub(crate) kuiper: Option<Kuiper>,
}

pub fn lift_to_sphere(c: &PlaneCurve) -> Result<SphereCurve> {
    if !c.is_closed() {
        return Err(Error::construction(Stage::Sphere, "plane curve is not closed"));
    }
    Ok(SphereCurve {
        plane: c.clone(),
        kuiper: None,
    })
}

/// `δ(t)`: 0 on the first half of `[0, 2π m]`, 1 on the last quarter.
pub(crate) fn kuiper_delta(m: f64, n: f64, tau: Jet) -> Jet {
    let u = (tau + TAU * n) / m;
    smooth_step((u - PI) / (PI / 2.0))
}

/// Rodrigues rotation of `p` about the unit `axis` by the jet angle `phi`.
fn rotate(axis: &Vec3, phi: Jet, p: &Jet3) -> Jet3 {
    let (s, c) = phi.sin_cos();
    let a = [Jet::constant(axis.x), Jet::constant(axis.y), Jet::constant(axis.z)];
    let axp = cross3(&a, p);
    let ap = dot3(&a, p);
    let one_c = -c + 1.0;
    std::array::from_fn(|i| p[i] * c + axp[i] * s + a[i] * ap * one_c)
}

pub fn kuiper_smooth(c: &SphereCurve, delta_theta: f64) -> SphereCurve {
    let axis = c.corner();
    SphereCurve {
        plane: c.plane.clone(),
        kuiper: Some(Kuiper {
            axis,
            angle: delta_theta,
        }),
    }
}

impl SphereCurve {
    pub fn params(&self) -> &TrochoidParams {
        &self.plane.p
    }

    pub fn plane(&self) -> &PlaneCurve {
        &self.plane
    }

    pub fn kuiper(&self) -> Option<&Kuiper> {
        self.kuiper.as_ref()
    }

    pub fn loops(&self) -> f64 {
        self.plane.m
    }

    pub fn period(&self) -> f64 {
        TAU * self.plane.m
    }

    /// Unrotated stereographic image at `t = 2π n + τ`.
    pub fn raw_at(&self, n: f64, tau: Jet) -> Jet3 {
        let (rho, theta) = self.plane.polar_at(n, tau);
        stereo_from_plane(rho, theta)
    }

    pub fn at(&self, n: f64, tau: Jet) -> Jet3 {
        let raw = self.raw_at(n, tau);
        match &self.kuiper {
            None => raw,
            Some(k) => {
                let d = kuiper_delta(self.plane.m, n, tau);
                rotate(&k.axis, d * k.angle, &raw)
            }
        }
    }

    pub fn jet(&self, t: f64) -> Jet3 {
        let (n, tau) = split_param(t);
        self.at(n, Jet::var(tau))
    }

    pub fn point(&self, t: f64) -> Vec3 {
        deriv3(&self.jet(t), 0)
    }

    /// Corner point `γ(0)`.
    pub fn corner(&self) -> Vec3 {
        deriv3(&self.raw_at(0.0, Jet::var(0.0)), 0)
    }

    /// One-sided velocities `(γ'(2π m⁻), γ'(0⁺))`.
    pub fn seam_velocities(&self) -> (Vec3, Vec3) {
        let end = self.at(self.plane.m, Jet::var(0.0));
        let start = self.at(0.0, Jet::var(0.0));
        (deriv3(&end, 1), deriv3(&start, 1))
    }

    /// Signed angle from the end tangent to the start tangent, about the corner normal.
    pub fn corner_angle(&self) -> f64 {
        let (e, s) = self.seam_velocities();
        let c = self.corner();
        c.dot(&e.cross(&s)).atan2(e.dot(&s))
    }

    /// Angle between the one-sided unit tangents at the seam.
    pub fn seam_tangent_mismatch(&self) -> f64 {
        let (e, s) = self.seam_velocities();
        e.normalize().cross(&s.normalize()).norm().asin()
    }

    /// Jump of geodesic curvature across the seam.
    pub fn seam_curvature_jump(&self) -> f64 {
        let kg = |j: &Jet3| super::geodesic::kg_from_jet(j).unwrap_or(f64::NAN);
        let end = self.at(self.plane.m, Jet::var(0.0));
        let start = self.at(0.0, Jet::var(0.0));
        (kg(&end) - kg(&start)).abs()
    }
}
