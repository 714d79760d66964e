//! Multicentre at `0 ∈ R⁸`: on the sphere of radius `r` the field is `r·Y` with `Y` the
//! fibration field of `E_{0,1} ≅ S⁷` at `λ = R/(1 − u₅²)`, `R = 1/r`.

use nalgebra::SMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{detect_period, IntegratorConfig, VectorField};
use crate::geom_core::R8;
use crate::milnor_bundle::{lambda_of_u5, BundleSpec, FibrationField};
use crate::{Error, Result};

pub type Mat8 = SMatrix<f64, 8, 8>;

/// Default neighbourhood radius.
pub const R_MAX: f64 = 1.0;

/// `λ(u₅, R) = R/(1 − u₅²)`.
pub fn lambda_of(u5: f64, big_r: f64) -> Result<f64> {
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(Error::Domain(format!("R = {big_r} must be positive and finite")));
    }
    Ok(big_r * lambda_of_u5(u5)?)
}

/// Four blocks `[[0, −1], [1, 0]]`: left multiplication by `i` on both quaternions.
pub fn linearization() -> Mat8 {
    let mut a = Mat8::zeros();
    for b in 0..4 {
        a[(2 * b + 1, 2 * b)] = 1.0;
        a[(2 * b, 2 * b + 1)] = -1.0;
    }
    a
}

/// The multicentre field on `|x| < r_max`.
#[derive(Debug, Clone)]
pub struct MulticentreField {
    r_max: f64,
    level: Option<FibrationField>,
}

impl Default for MulticentreField {
    fn default() -> Self {
        Self {
            r_max: R_MAX,
            level: None,
        }
    }
}

impl MulticentreField {
    pub fn new() -> Self {
        Self::default()
    }

    /// Neighbourhood radius in `(0, 1]`, so that `R = 1/r ≥ 1`.
    pub fn with_r_max(r_max: f64) -> Result<Self> {
        if !(r_max > 0.0 && r_max <= 1.0) {
            return Err(Error::Domain(format!("r_max = {r_max} must lie in (0, 1]")));
        }
        Ok(Self { r_max, level: None })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    fn check(&self, x: &R8) -> Result<f64> {
        let n = x.norm();
        if !(n < self.r_max) {
            return Err(Error::OutOfNeighbourhood {
                norm: n,
                r_max: self.r_max,
            });
        }
        Ok(n)
    }

    /// `ẋ = A x + Ỹ(x)`; zero at the origin.
    pub fn eval(&self, x: &R8) -> Result<R8> {
        let n = self.check(x)?;
        if n == 0.0 {
            return Ok(R8::zeros());
        }
        match &self.level {
            Some(f) => f.eval_s7(x),
            None => FibrationField::with_stretch(BundleSpec::E01, 1.0 / n)?.eval_s7(x),
        }
    }

    /// Copy with `λ` frozen on the orbit through `x0` (sphere radius and `u₅` are conserved).
    pub fn at_level(&self, x0: &R8) -> Result<Self> {
        let n = self.check(x0)?;
        if n == 0.0 {
            return Err(Error::Stationary(0.0));
        }
        let f = FibrationField::with_stretch(BundleSpec::E01, 1.0 / n)?.at_level(x0)?;
        Ok(Self {
            r_max: self.r_max,
            level: Some(f),
        })
    }

    /// Central-difference Jacobian at the origin.
    pub fn finite_difference_jacobian_at_zero(&self, step: f64) -> Result<Mat8> {
        if !(1e-6..=1e-2).contains(&step) {
            return Err(Error::Domain(format!("step {step} outside [1e-6, 1e-2]")));
        }
        let mut j = Mat8::zeros();
        for c in 0..8 {
            let mut e = R8::zeros();
            e[c] = step;
            let d = (self.eval(&e)? - self.eval(&-e)?) / (2.0 * step);
            j.set_column(c, &d);
        }
        Ok(j)
    }

    /// Periods of the orbits through `r·z` for each `z` in the sample.
    pub fn period_on_sphere(&self, r: f64, sample: &[R8], cfg: &IntegratorConfig) -> Result<Vec<SpherePeriod>> {
        if !(r > 0.0 && r < self.r_max) {
            return Err(Error::Domain(format!("radius {r} outside (0, {})", self.r_max)));
        }
        sample
            .par_iter()
            .map(|z| {
                let x0 = z.normalize() * r;
                let f = self.at_level(&x0)?;
                let o = detect_period(&f, x0.as_slice(), cfg)?;
                let (a, b) = (
                    x0.fixed_rows::<4>(0).norm_squared(),
                    x0.fixed_rows::<4>(4).norm_squared(),
                );
                Ok(SpherePeriod {
                    r,
                    u5: (a - b) / (a + b),
                    z: z.normalize().iter().copied().collect(),
                    period: o.period,
                    closed: o.closed,
                    residual: o.residual,
                    drift: o.drift.unwrap_or(0.0),
                })
            })
            .collect()
    }
}

/// One row of a period table; `period` is a lower bound when `closed` is false.
#[derive(Debug, Clone, Serialize)]
pub struct SpherePeriod {
    pub r: f64,
    pub u5: f64,
    pub z: Vec<f64>,
    pub period: f64,
    pub closed: bool,
    pub residual: f64,
    pub drift: f64,
}

impl VectorField for MulticentreField {
    fn dim(&self) -> usize {
        8
    }

    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<()> {
        let v = MulticentreField::eval(self, &R8::from_column_slice(x))?;
        dx.copy_from_slice(v.as_slice());
        Ok(())
    }

    /// `|x|²`.
    fn invariant(&self, x: &[f64]) -> Option<f64> {
        Some(x.iter().map(|v| v * v).sum())
    }

    fn slow_phase(&self, x: &[f64]) -> Option<f64> {
        let z = R8::from_column_slice(x);
        match &self.level {
            Some(f) => f.slow_phase_s7(&z),
            None => FibrationField::with_stretch(BundleSpec::E01, 1.0 / z.norm())
                .ok()?
                .slow_phase_s7(&z),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom_core::{quat, random_s7};
    use crate::milnor_bundle::s7_point;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_of(0.0, 2.0).unwrap(), 2.0);
        assert_relative_eq!(lambda_of(0.5, 1.0).unwrap(), 4.0 / 3.0, max_relative = 1e-15);
        assert!(lambda_of(0.3, 10.0).unwrap() > lambda_of(0.3, 5.0).unwrap());
        assert!(lambda_of(1.0, 1.0).is_err() && lambda_of(0.0, 0.0).is_err());
    }

    #[test]
    fn linearization_blocks() {
        let a = linearization();
        let mut e = R8::zeros();
        e[0] = 1.0;
        let mut want = R8::zeros();
        want[1] = 1.0;
        assert_eq!(a * e, want);
        assert_eq!(a + a.transpose(), Mat8::zeros());
        let z = random_s7(&mut ChaCha8Rng::seed_from_u64(1));
        assert!((a * z - crate::geom_core::hopf_field_01(&z)).amax() < 1e-15);
        assert!(((a * TAU).exp() - Mat8::identity()).amax() < 1e-12);
    }

    #[test]
    fn origin_and_neighbourhood() {
        let f = MulticentreField::new();
        assert_eq!(f.eval(&R8::zeros()).unwrap(), R8::zeros());
        let mut x = R8::zeros();
        x[3] = 1.0;
        assert!(matches!(f.eval(&x), Err(Error::OutOfNeighbourhood { .. })));
        assert!(MulticentreField::with_r_max(2.0).is_err());
    }

    #[test]
    fn jacobian_at_zero_is_a() {
        let f = MulticentreField::new();
        for step in [1e-3, 1e-4] {
            let j = f.finite_difference_jacobian_at_zero(step).unwrap();
            assert!((j - linearization()).amax() <= 1e-6);
            assert!((j + j.transpose()).amax() <= 1e-6);
        }
        assert!(f.finite_difference_jacobian_at_zero(0.1).is_err());
    }

    #[test]
    fn velocity_is_tangent_to_spheres() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = MulticentreField::new();
        for _ in 0..8 {
            let x = random_s7(&mut rng) * rng.gen_range(0.05..0.95);
            let v = f.eval(&x).unwrap();
            assert!(v.dot(&x).abs() <= 1e-10 * x.norm_squared());
        }
        let frozen = f.at_level(&(random_s7(&mut rng) * 0.5)).unwrap();
        for _ in 0..1000 {
            let x = random_s7(&mut rng) * rng.gen_range(0.01..0.99);
            assert!(frozen.eval(&x).unwrap().dot(&x).abs() <= 1e-10 * x.norm_squared());
        }
    }

    #[test]
    fn remainder_is_flat() {
        let f = MulticentreField::new();
        let z = s7_point(
            BundleSpec::E01,
            0.0,
            &quat(0.2, 0.7, 0.1, -0.3),
            &quat(0.5, -0.5, 0.5, 0.5),
        )
        .unwrap();
        let rel = |r: f64| {
            let x = z * r;
            (f.eval(&x).unwrap() - linearization() * x).norm() / r
        };
        let d: Vec<f64> = [0.3, 0.2, 0.1].iter().map(|&r| rel(r)).collect();
        assert!(
            d[1] / d[0] < (0.2f64 / 0.3).powi(3) && d[2] / d[1] < 0.5f64.powi(3),
            "{d:?}"
        );
    }

    #[test]
    fn polar_orbit_has_period_two_pi() {
        let f = MulticentreField::new();
        let z = s7_point(
            BundleSpec::E01,
            1.0,
            &quat(1.0, 0.0, 0.0, 0.0),
            &quat(0.5, 0.5, -0.5, 0.5),
        )
        .unwrap();
        let rows = f.period_on_sphere(0.5, &[z], &IntegratorConfig::default()).unwrap();
        assert!(rows[0].closed);
        assert_relative_eq!(rows[0].period, TAU, max_relative = 1e-6);
        assert!(rows[0].drift <= 1e-9);
    }
}
