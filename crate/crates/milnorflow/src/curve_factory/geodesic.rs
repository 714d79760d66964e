//! Stereographic maps and geodesic curvature on the unit sphere.

use crate::error::{Error, Result};
use crate::geom_core::Vec3;
use crate::jet::{deriv3, Jet, Jet3};

/// Stereographic image of `ρ e^{iθ}` from the south pole: `(2ρ cos θ, 2ρ sin θ, 1 - ρ²) / (1 + ρ²)`.
pub fn stereo_from_plane(rho: Jet, theta: Jet) -> Jet3 {
    let (s, c) = theta.sin_cos();
    let r2 = rho * rho;
    let inv = (r2 + 1.0).recip();
    let two_rho = rho * 2.0 * inv;
    [two_rho * c, two_rho * s, (-r2 + 1.0) * inv]
}

/// Chart `u = (x, y) / (1 + z)`, inverse of [`stereo_from_plane`].
pub fn stereo_to_plane(p: &Vec3) -> Result<(f64, f64)> {
    let d = 1.0 + p.z;
    if d <= 1e-300 {
        return Err(Error::Domain("south pole has no chart image".into()));
    }
    Ok((p.x / d, p.y / d))
}

/// Curve on S² given by jets in its parameter.
pub trait SphereCurveFn {
    fn jet(&self, t: f64) -> Jet3;
}

impl SphereCurveFn for super::SphereCurve {
    fn jet(&self, t: f64) -> Jet3 {
        super::SphereCurve::jet(self, t)
    }
}

/// `k_g = γ̈ · (γ × γ̇) / |γ̇|³`.
pub fn kg_from_jet(j: &Jet3) -> Result<f64> {
    let (g, g1, g2) = (deriv3(j, 0), deriv3(j, 1), deriv3(j, 2));
    let speed = g1.norm();
    if speed < 1e-14 {
        return Err(Error::Singular { t: f64::NAN, speed });
    }
    Ok(g2.dot(&g.cross(&g1)) / speed.powi(3))
}

fn with_t(e: Error, t: f64) -> Error {
    match e {
        Error::Singular { speed, .. } => Error::Singular { t, speed },
        other => other,
    }
}

pub fn geodesic_curvature<C: SphereCurveFn + ?Sized>(c: &C, t: f64) -> Result<f64> {
    kg_from_jet(&c.jet(t)).map_err(|e| with_t(e, t))
}

/// Same quantity computed in the stereographic chart with metric `e^{2φ} δ`, `φ = ln 2 - ln(1 + |u|²)`,
/// through the Christoffel symbols of the conformal metric.
pub fn geodesic_curvature_christoffel<C: SphereCurveFn + ?Sized>(c: &C, t: f64) -> Result<f64> {
    let j = c.jet(t);
    if j[2].value() <= -1.0 + 1e-8 {
        return Err(Error::Domain(format!("curve passes the chart pole at t = {t}")));
    }
    let inv = (j[2] + 1.0).recip();
    let u = [j[0] * inv, j[1] * inv];
    let (u1, u2) = (u[0].value(), u[1].value());
    let (d1, d2) = (u[0].d(1), u[1].d(1));
    let (a1, a2) = (u[0].d(2), u[1].d(2));
    let r2 = u1 * u1 + u2 * u2;
    let phi = std::f64::consts::LN_2 - (1.0 + r2).ln();
    let (px, py) = (-2.0 * u1 / (1.0 + r2), -2.0 * u2 / (1.0 + r2));
    // Γ¹₁₁ = φx, Γ¹₁₂ = φy, Γ¹₂₂ = -φx, Γ²₁₁ = -φy, Γ²₁₂ = φx, Γ²₂₂ = φy.
    let cov1 = a1 + px * d1 * d1 + 2.0 * py * d1 * d2 - px * d2 * d2;
    let cov2 = a2 - py * d1 * d1 + 2.0 * px * d1 * d2 + py * d2 * d2;
    let speed_e = d1.hypot(d2);
    if speed_e < 1e-14 {
        return Err(Error::Singular { t, speed: speed_e });
    }
    let sqrt_det = (2.0 * phi).exp();
    let speed_g = phi.exp() * speed_e;
    Ok(sqrt_det * (d1 * cov2 - d2 * cov1) / speed_g.powi(3))
}

/// Largest relative gap between the intrinsic and chart curvature formulas over `samples`
/// uniform random parameters in `[0, period)`.
pub fn curvature_cross_check<C: SphereCurveFn + ?Sized>(c: &C, period: f64, samples: usize, seed: u64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let t = rng.gen_range(0.0..period);
        let a = geodesic_curvature(c, t)?;
        let b = geodesic_curvature_christoffel(c, t)?;
        worst = worst.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Unit tangent and unit conormal `γ × T` of a jet curve.
pub fn darboux(j: &Jet3) -> (Vec3, Vec3, Vec3) {
    let g = deriv3(j, 0);
    let t = deriv3(j, 1).normalize();
    (g, t, g.cross(&t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    struct Latitude(f64);

    impl SphereCurveFn for Latitude {
        fn jet(&self, t: f64) -> Jet3 {
            let (s, c) = Jet::var(t).sin_cos();
            let (sz, cz) = self.0.sin_cos();
            [c * sz, s * sz, Jet::constant(cz)]
        }
    }

    struct Tilted;

    impl SphereCurveFn for Tilted {
        fn jet(&self, t: f64) -> Jet3 {
            let (s, c) = Jet::var(2.0 * t).sin_cos();
            let r = 0.6f64;
            [c * r, Jet::constant(0.8), s * r]
        }
    }

    #[test]
    fn latitude_circles_have_cot_colatitude() {
        for colat in [0.3, 0.9, PI / 2.0, 2.0] {
            let c = Latitude(colat);
            for t in [0.0, 1.0, 2.5] {
                let k = geodesic_curvature(&c, t).unwrap();
                assert_relative_eq!(k, 1.0 / colat.tan(), epsilon = 1e-12);
                let kc = geodesic_curvature_christoffel(&c, t).unwrap();
                assert_relative_eq!(kc, k, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn great_circle_is_geodesic() {
        let k = geodesic_curvature(&Latitude(PI / 2.0), 0.4).unwrap();
        assert!(k.abs() < 1e-15);
    }

    #[test]
    fn chart_formula_matches_for_general_circles() {
        for t in [0.1, 0.7, 1.3, 2.9] {
            let a = geodesic_curvature(&Tilted, t).unwrap();
            let b = geodesic_curvature_christoffel(&Tilted, t).unwrap();
            assert_relative_eq!(a.abs(), 0.8 / 0.6, max_relative = 1e-12);
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn cross_check_on_a_circle() {
        let c = Latitude(1.2);
        assert!(curvature_cross_check(&c, std::f64::consts::TAU, 500, 1).unwrap() < 1e-12);
    }

    #[test]
    fn stereo_round_trip() {
        for (r, th) in [(0.3, 0.2), (1.0, 2.0), (4.0, -1.0)] {
            let p = deriv3(&stereo_from_plane(Jet::constant(r), Jet::constant(th)), 0);
            assert_relative_eq!(p.norm(), 1.0, epsilon = 1e-15);
            let (x, y) = stereo_to_plane(&p).unwrap();
            assert_relative_eq!(x, r * th.cos(), epsilon = 1e-14);
            assert_relative_eq!(y, r * th.sin(), epsilon = 1e-14);
        }
        assert!(stereo_to_plane(&Vec3::new(0.0, 0.0, -1.0)).is_err());
    }

    #[test]
    fn stationary_curve_is_singular() {
        let j = [Jet::constant(1.0), Jet::constant(0.0), Jet::constant(0.0)];
        assert!(matches!(kg_from_jet(&j), Err(Error::Singular { .. })));
    }
}
