//! Milnor bundles `ξ_{h,j}` over `S⁴`, their charts, and the circle-fibration field on
//! `E_{0,1} ≅ S⁷` (and its mirror on `E_{1,0}`).

use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::VectorField;
use crate::geom_core::{
    from_quat_pair, hopf_field_01, qi, qk, quat, quat_powi, random_unit_quat, to_quat_pair, Quat, R8,
};
use crate::sullivan_field::{flat_weight, quat_phase, FieldCache};
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// Integers `(h, j)` with `h + j = 1` labelling `ξ_{h,j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BundleSpec {
    pub h: i64,
    pub j: i64,
}

impl BundleSpec {
    pub const E01: Self = Self { h: 0, j: 1 };
    pub const E10: Self = Self { h: 1, j: 0 };

    pub fn new(h: i64, j: i64) -> Result<Self> {
        let s = Self { h, j };
        s.check()?;
        Ok(s)
    }

    /// `k = h − j`.
    pub fn k(&self) -> i64 {
        self.h - self.j
    }

    fn check(&self) -> Result<()> {
        if self.h.checked_add(self.j) != Some(1) {
            return Err(Error::Domain(format!(
                "bundle ({}, {}) needs h + j = 1",
                self.h, self.j
            )));
        }
        Ok(())
    }

    fn supported(&self) -> Result<()> {
        if *self == Self::E01 || *self == Self::E10 {
            Ok(())
        } else {
            Err(Error::UnsupportedBundle { h: self.h, j: self.j })
        }
    }

    /// Phase action commuting with the transition, for the two Hopf-compatible bundles.
    pub fn natural_action(&self) -> Option<PhaseAction> {
        match *self {
            Self::E01 => Some(PhaseAction::Left),
            Self::E10 => Some(PhaseAction::Right),
            _ => None,
        }
    }
}

impl std::fmt::Display for BundleSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.h, self.j)
    }
}

/// `(v, w) ↦ (v/|v|², vʰ w vʲ / |v|)`.
pub fn transition(spec: BundleSpec, v: &Quat, w: &Quat) -> Result<(Quat, Quat)> {
    spec.check()?;
    let r2 = v.norm_squared();
    if r2 == 0.0 || !r2.is_finite() {
        return Err(Error::Domain("transition undefined at the polar fibre v = 0".into()));
    }
    let w2 = quat_powi(v, spec.h)? * w * quat_powi(v, spec.j)? / r2.sqrt();
    Ok((v / r2, w2))
}

/// Inverse of [`transition`]: `(u, η) ↦ (u/|u|², v⁻ʰ η v⁻ʲ |v|)` with `v = u/|u|²`.
pub fn transition_inverse(spec: BundleSpec, u: &Quat, eta: &Quat) -> Result<(Quat, Quat)> {
    spec.check()?;
    let s2 = u.norm_squared();
    if s2 == 0.0 || !s2.is_finite() {
        return Err(Error::Domain("transition undefined at the polar fibre u = 0".into()));
    }
    let v = u / s2;
    let w = quat_powi(&v, -spec.h)? * eta * quat_powi(&v, -spec.j)? * v.norm();
    Ok((v, w))
}

/// Equatorial clutching map `vʰ w vʲ`.
pub fn clutching_map(spec: BundleSpec, v: &Quat, w: &Quat) -> Result<Quat> {
    spec.check()?;
    Ok(quat_powi(v, spec.h)? * w * quat_powi(v, spec.j)?)
}

/// `E_{h,j}` is the standard `S⁷` iff `(h − j)² − 1 ≡ 0 mod 7`.
pub fn is_diffeo_standard(spec: BundleSpec) -> Result<bool> {
    spec.check()?;
    let k = spec.k() as i128;
    Ok((k * k - 1).rem_euclid(7) == 0)
}

/// Circle action on the fibre coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseAction {
    /// `w ↦ e^{it} w`
    Left,
    /// `w ↦ w e^{it}`
    Right,
}

impl PhaseAction {
    pub fn apply(&self, w: &Quat, t: f64) -> Quat {
        let e = quat(t.cos(), t.sin(), 0.0, 0.0);
        match self {
            PhaseAction::Left => e * w,
            PhaseAction::Right => w * e,
        }
    }
}

/// `|φ(v, e·w) − e·φ(v, w)|` for the given action.
pub fn commutation_residual_with(spec: BundleSpec, v: &Quat, w: &Quat, t: f64, action: PhaseAction) -> Result<f64> {
    let (_, a) = transition(spec, v, &action.apply(w, t))?;
    let (_, b) = transition(spec, v, w)?;
    Ok((a - action.apply(&b, t)).norm())
}

/// Commutation residual under the bundle's natural action.
pub fn commutation_residual(spec: BundleSpec, v: &Quat, w: &Quat, t: f64) -> Result<f64> {
    let action = spec
        .natural_action()
        .ok_or(Error::UnsupportedBundle { h: spec.h, j: spec.j })?;
    commutation_residual_with(spec, v, w, t, action)
}

/// `λ(u₅) = 1/(1 − u₅²)`.
pub fn lambda_of_u5(u5: f64) -> Result<f64> {
    if !(u5.abs() < 1.0) {
        return Err(Error::Domain(format!("|u5| = {} must be < 1", u5.abs())));
    }
    Ok(1.0 / ((1.0 - u5) * (1.0 + u5)))
}

/// `u₅(r) = (1 − r²)/(1 + r²)`.
pub fn radius_to_u5(r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("base radius {r} must be positive and finite")));
    }
    Ok((1.0 - r * r) / (1.0 + r * r))
}

/// `λ(u₅(r))` written as `(1 + r²)²/(4r²)`, symmetric under `r ↦ 1/r`.
fn lambda_of_radius(r: f64) -> f64 {
    let s = r + 1.0 / r;
    0.25 * s * s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Chart {
    North,
    South,
}

/// Point of `E_{h,j}` in a trivializing chart: `(v, w)` north or `(u, η)` south.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub chart: Chart,
    pub base: Quat,
    pub fiber: Quat,
}

impl ChartPoint {
    pub fn new(chart: Chart, base: Quat, fiber: Quat) -> Result<Self> {
        if (fiber.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::Domain(format!("fibre norm {} is not 1", fiber.norm())));
        }
        if !base.coords.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain("base coordinate is not finite".into()));
        }
        Ok(Self { chart, base, fiber })
    }

    pub fn base_radius(&self) -> f64 {
        self.base.norm()
    }

    /// `u₅` of the base point; the south chart sees radius `1/s`.
    pub fn u5(&self) -> f64 {
        let r2 = self.base.norm_squared();
        match self.chart {
            Chart::North => (1.0 - r2) / (1.0 + r2),
            Chart::South => (r2 - 1.0) / (r2 + 1.0),
        }
    }

    /// Same point in the other chart.
    pub fn switch(&self, spec: BundleSpec) -> Result<Self> {
        let (base, fiber) = match self.chart {
            Chart::North => transition(spec, &self.base, &self.fiber)?,
            Chart::South => transition_inverse(spec, &self.base, &self.fiber)?,
        };
        let chart = match self.chart {
            Chart::North => Chart::South,
            Chart::South => Chart::North,
        };
        Ok(Self { chart, base, fiber })
    }

    /// Point of `S⁷ ⊂ H²`: `E_{0,1}` north `(w, w v)/√(1+|v|²)`, south `(η ū, η)/√(1+|u|²)`;
    /// `E_{1,0}` uses the mirrored products.
    pub fn to_s7(&self, spec: BundleSpec) -> Result<R8> {
        spec.supported()?;
        let c = 1.0 / (1.0 + self.base.norm_squared()).sqrt();
        let (x, f) = (self.base, self.fiber);
        let left = spec == BundleSpec::E01;
        let (q1, q2) = match (self.chart, left) {
            (Chart::North, true) => (f, f * x),
            (Chart::North, false) => (f, x * f),
            (Chart::South, true) => (f * x.conjugate(), f),
            (Chart::South, false) => (x.conjugate() * f, f),
        };
        Ok(from_quat_pair(&(q1 * c), &(q2 * c)))
    }

    /// Chart representation of `z ≠ 0`; north when the base radius is at most 1.
    pub fn from_s7(spec: BundleSpec, z: &R8) -> Result<Self> {
        spec.supported()?;
        let (q1, q2) = to_quat_pair(z);
        let (n1, n2) = (q1.norm(), q2.norm());
        if n1 == 0.0 && n2 == 0.0 {
            return Err(Error::Domain("zero vector is not on S7".into()));
        }
        let left = spec == BundleSpec::E01;
        let prod = if left { q1.conjugate() * q2 } else { q2 * q1.conjugate() };
        if n2 <= n1 {
            Self::new(Chart::North, prod / (n1 * n1), q1 / n1)
        } else {
            Self::new(Chart::South, prod / (n2 * n2), q2 / n2)
        }
    }
}

/// Tangent vector in a chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartVelocity {
    pub chart: Chart,
    pub base: Quat,
    pub fiber: Quat,
}

impl ChartVelocity {
    /// `|Re(η̄ η̇)|`.
    pub fn fiber_orthogonality(&self, p: &ChartPoint) -> f64 {
        (p.fiber.conjugate() * self.fiber).w.abs()
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        (self.base - o.base)
            .coords
            .amax()
            .max((self.fiber - o.fiber).coords.amax())
    }
}

/// Pushes a velocity at `p` through the chart change to the other chart.
pub fn transport_velocity(
    spec: BundleSpec,
    p: &ChartPoint,
    vel: &ChartVelocity,
) -> Result<(ChartPoint, ChartVelocity)> {
    spec.supported()?;
    let q = p.switch(spec)?;
    let (x, dx) = (p.base, vel.base);
    let r2 = x.norm_squared();
    let r = r2.sqrt();
    let dot = x.coords.dot(&dx.coords);
    let dbase = dx / r2 - x * (2.0 * dot / (r2 * r2));
    // Fibre maps: north→south `w x/|x|` or `x w/|x|`; south→north `η x̄/|x|` or `x̄ η/|x|`.
    let (y, dy) = match p.chart {
        Chart::North => (x, dx),
        Chart::South => (x.conjugate(), dx.conjugate()),
    };
    let (f, df) = (p.fiber, vel.fiber);
    let dfiber = if spec == BundleSpec::E01 {
        (df * y + f * dy) / r - f * y * (dot / (r2 * r))
    } else {
        (dy * f + y * df) / r - y * f * (dot / (r2 * r))
    };
    Ok((
        q,
        ChartVelocity {
            chart: q.chart,
            base: dbase,
            fiber: dfiber,
        },
    ))
}

fn shared_cache() -> Arc<FieldCache> {
    static CACHE: OnceLock<Arc<FieldCache>> = OnceLock::new();
    CACHE.get_or_init(|| Arc::new(FieldCache::new())).clone()
}

/// Circle-fibration field on `E_{0,1}` or `E_{1,0}`: the Sullivan lift at `λ = s·λ(u₅)` on each
/// level `u₅`, exact Hopf rotation on the polar fibres.
#[derive(Debug, Clone)]
pub struct FibrationField {
    spec: BundleSpec,
    stretch: f64,
    level: Option<f64>,
    cache: Arc<FieldCache>,
}

impl FibrationField {
    pub fn new(spec: BundleSpec) -> Result<Self> {
        Self::with_stretch(spec, 1.0)
    }

    /// Field with `λ = stretch · λ(u₅)`, `stretch ≥ 1`.
    pub fn with_stretch(spec: BundleSpec, stretch: f64) -> Result<Self> {
        spec.supported()?;
        if !(stretch >= 1.0 && stretch.is_finite()) {
            return Err(Error::Domain(format!("stretch {stretch} must be finite and >= 1")));
        }
        Ok(Self {
            spec,
            stretch,
            level: None,
            cache: shared_cache(),
        })
    }

    pub fn spec(&self) -> BundleSpec {
        self.spec
    }

    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    /// Frozen `λ`, if any.
    pub fn level(&self) -> Option<f64> {
        self.level
    }

    /// Copy with `λ` frozen at its value on the level through `z0`, for integrating one orbit.
    pub fn at_level(&self, z0: &R8) -> Result<Self> {
        let (q1, q2) = to_quat_pair(z0);
        let (a, b) = (q1.norm_squared(), q2.norm_squared());
        if a + b == 0.0 {
            return Err(Error::Domain("zero vector is not on S7".into()));
        }
        let level = if a == 0.0 || b == 0.0 {
            f64::INFINITY
        } else {
            self.stretch * (a + b) * (a + b) / (4.0 * a * b)
        };
        Ok(Self {
            level: Some(level),
            ..self.clone()
        })
    }

    /// `λ` used on the level with base radius `r`.
    pub fn lambda_at_radius(&self, r: f64) -> f64 {
        self.level.unwrap_or_else(|| self.stretch * lambda_of_radius(r))
    }

    /// `(1/k_g, 4π/(L k_g))` at phase `ψ`, zero once the flat part is cut off.
    fn rates(&self, lambda: f64, psi: f64) -> Result<(f64, f64)> {
        if !lambda.is_finite() || flat_weight(lambda) == 0.0 {
            return Ok((0.0, 0.0));
        }
        let (inv, spin) = self.cache.get(lambda)?.rates(psi)?;
        Ok((inv, 2.0 * spin))
    }

    fn hopf_fiber(&self, f: &Quat) -> Quat {
        if self.spec == BundleSpec::E01 {
            qi() * f
        } else {
            f * qi()
        }
    }

    /// Field in chart coordinates. North (`E_{0,1}`): `v̇ = Ψ i v`, `ẇ = (i + k/κ) w`;
    /// south: `u̇ = Ψ i u`, `η̇ = (i + k/κ) η + Ψ η ū i u/|u|²`.
    pub fn eval_chart(&self, p: &ChartPoint) -> Result<ChartVelocity> {
        let (x, f) = (p.base, p.fiber);
        let r = x.norm();
        if r == 0.0 {
            return Ok(ChartVelocity {
                chart: p.chart,
                base: Quat::default(),
                fiber: self.hopf_fiber(&f),
            });
        }
        let (inv, rate) = self.rates(self.lambda_at_radius(r), quat_phase(&(x / r)))?;
        let a = qi() + qk() * inv;
        let left = self.spec == BundleSpec::E01;
        let (base, fiber) = match (p.chart, left) {
            (Chart::North, true) => (qi() * x * rate, a * f),
            (Chart::North, false) => (x * qi() * rate, f * a),
            (Chart::South, true) => (qi() * x * rate, a * f + f * x.conjugate() * qi() * x * (rate / (r * r))),
            (Chart::South, false) => (x * qi() * rate, f * a + x * qi() * x.conjugate() * f * (rate / (r * r))),
        };
        Ok(ChartVelocity {
            chart: p.chart,
            base,
            fiber,
        })
    }

    /// Base direction `θ` (unnormalized): `q̄₁q₂` or `q₂q̄₁`.
    fn theta(&self, q1: &Quat, q2: &Quat) -> Quat {
        if self.spec == BundleSpec::E01 {
            q1.conjugate() * q2
        } else {
            q2 * q1.conjugate()
        }
    }

    /// `ψ = arg z₁(θ)` off the polar fibres, when the flat part is active.
    pub fn slow_phase_s7(&self, z: &R8) -> Option<f64> {
        let (q1, q2) = to_quat_pair(z);
        let (a, b) = (q1.norm_squared(), q2.norm_squared());
        if a == 0.0 || b == 0.0 {
            return None;
        }
        let lambda = self
            .level
            .unwrap_or_else(|| self.stretch * (a + b) * (a + b) / (4.0 * a * b));
        (lambda.is_finite() && flat_weight(lambda) > 0.0).then(|| quat_phase(&self.theta(&q1, &q2)))
    }

    /// Field on `S⁷ ⊂ R⁸` (`E_{0,1}`): `q̇₁ = (i + k/κ) q₁`, `q̇₂ = (i + k/κ) q₂ + Ψ (q₁ i q̄₁/|q₁|²) q₂`,
    /// with `ψ = arg z₁(q̄₁q₂)`. Homogeneous of degree one in `z`.
    pub fn eval_s7(&self, z: &R8) -> Result<R8> {
        let (q1, q2) = to_quat_pair(z);
        let (a, b) = (q1.norm_squared(), q2.norm_squared());
        if a == 0.0 || b == 0.0 {
            return Ok(if self.spec == BundleSpec::E01 {
                hopf_field_01(z)
            } else {
                from_quat_pair(&(q1 * qi()), &(q2 * qi()))
            });
        }
        let lambda = self
            .level
            .unwrap_or_else(|| self.stretch * (a + b) * (a + b) / (4.0 * a * b));
        let left = self.spec == BundleSpec::E01;
        let (inv, rate) = self.rates(lambda, quat_phase(&self.theta(&q1, &q2)))?;
        let m = qi() + qk() * inv;
        let (d1, d2) = if left {
            (m * q1, m * q2 + q1 * qi() * q1.conjugate() * q2 * (rate / a))
        } else {
            (q1 * m, q2 * m + q2 * q1.conjugate() * qi() * q1 * (rate / a))
        };
        Ok(from_quat_pair(&d1, &d2))
    }
}

/// Field velocity at a chart point, in the same chart.
pub fn eval_fibration_field(field: &FibrationField, p: &ChartPoint) -> Result<ChartVelocity> {
    field.eval_chart(p)
}

impl VectorField for FibrationField {
    fn dim(&self) -> usize {
        8
    }

    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<()> {
        let v = self.eval_s7(&R8::from_column_slice(x))?;
        dx.copy_from_slice(v.as_slice());
        Ok(())
    }

    fn project(&self, x: &mut [f64]) {
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= n);
    }

    /// `|q₁|²/|z|²`, which fixes `u₅`.
    fn invariant(&self, x: &[f64]) -> Option<f64> {
        let a: f64 = x[..4].iter().map(|v| v * v).sum();
        let b: f64 = x[4..].iter().map(|v| v * v).sum();
        Some(a / (a + b))
    }

    fn slow_phase(&self, x: &[f64]) -> Option<f64> {
        self.slow_phase_s7(&R8::from_column_slice(x))
    }
}

/// Family `X_μ` on `S⁷` with `λ_μ = λ(u₅)/(1 − μ)`; `X_1 = H_{0,1}`.
pub fn hopf_family_field(mu: f64, p: &R8) -> Result<R8> {
    if ((p.norm() - 1.0).abs()) > 1e-10 {
        return Err(Error::Domain(format!("|p| = {} is not 1", p.norm())));
    }
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Domain(format!("mu = {mu} outside [0, 1]")));
    }
    if mu == 1.0 {
        return Ok(hopf_field_01(p));
    }
    FibrationField::with_stretch(BundleSpec::E01, 1.0 / (1.0 - mu))?.eval_s7(p)
}

/// `sup_p |X_μ(p) − H_{0,1}(p)|` over the sample.
pub fn hopf_family_distance(mu: f64, sample: &[R8]) -> Result<f64> {
    let d: Result<Vec<f64>> = sample
        .par_iter()
        .map(|p| Ok((hopf_family_field(mu, p)? - hopf_field_01(p)).norm()))
        .collect();
    Ok(d?.into_iter().fold(0.0, f64::max))
}

/// `n` points of `S⁷` spread over `levels` equally spaced values of `u₅` in `(−1, 1)`, with random
/// base direction and fibre; few levels keep the number of distinct curves small.
pub fn level_sample(spec: BundleSpec, n: usize, levels: usize, seed: u64) -> Result<Vec<R8>> {
    if levels == 0 {
        return Err(Error::Domain("need at least one level".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let u5 = -1.0 + 2.0 * ((i % levels) as f64 + 0.5) / levels as f64;
            s7_point(spec, u5, &random_unit_quat(&mut rng), &random_unit_quat(&mut rng))
        })
        .collect()
}

/// Point of `S⁷` on the level `u₅` with fibre `w` and base direction `θ` (north chart).
pub fn s7_point(spec: BundleSpec, u5: f64, theta: &Quat, w: &Quat) -> Result<R8> {
    if !(u5.abs() <= 1.0) {
        return Err(Error::Domain(format!("|u5| = {} must be <= 1", u5.abs())));
    }
    let r = ((1.0 - u5) / (1.0 + u5)).sqrt();
    if r <= 1.0 {
        ChartPoint::new(Chart::North, theta.normalize() * r, w.normalize())?.to_s7(spec)
    } else {
        let x = theta.normalize() * r;
        let (u, eta) = transition(spec, &x, &w.normalize())?;
        ChartPoint::new(Chart::South, u, eta)?.to_s7(spec)
    }
}

/// Bundle verification summary.
#[derive(Debug, Clone, Serialize)]
pub struct BundleReport {
    pub spec: BundleSpec,
    pub cocycle_max_residual: f64,
    /// Under the natural action; `None` when the bundle has none.
    pub commutation_max_residual: Option<f64>,
    pub standard_sphere: bool,
}

/// Cocycle and commutation residuals over `samples` random `(v, w)` with `|v| ∈ [0.1, 10]`.
pub fn bundle_report(spec: BundleSpec, samples: usize, seed: u64) -> Result<BundleReport> {
    let standard_sphere = is_diffeo_standard(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cocycle = 0.0f64;
    let mut comm: Option<f64> = spec.natural_action().map(|_| 0.0);
    for _ in 0..samples {
        let v = random_unit_quat(&mut rng) * 10f64.powf(rng.gen_range(-1.0..=1.0));
        let w = random_unit_quat(&mut rng);
        let (u, eta) = transition(spec, &v, &w)?;
        let (v2, w2) = transition_inverse(spec, &u, &eta)?;
        cocycle = cocycle.max((v2 - v).norm() / v.norm()).max((w2 - w).norm());
        if let Some(c) = comm.as_mut() {
            *c = c.max(commutation_residual(
                spec,
                &v,
                &w,
                rng.gen_range(0.0..std::f64::consts::TAU),
            )?);
        }
    }
    Ok(BundleReport {
        spec,
        cocycle_max_residual: cocycle,
        commutation_max_residual: comm,
        standard_sphere,
    })
}
