//! Lift of `Γ_λ` to `M = {(q, v, w)}`, the SO(3)-translated circle foliation and the field `X_λ`.
//!
//! The fibre angle `ψ` from `v` to `w` about `q` labels arc length `l = ψ L / 2π` on `Γ_λ`; the leaf
//! through a point is the rotated copy of `Γ″` whose Darboux frame at `l` is the frame `(q, v, q×v)`.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex};

use crate::curve_factory::bumps::smooth_step_f;
use crate::curve_factory::{SmoothClosedSphereCurve, TrochoidParams};
use crate::error::{Error, Result};
use crate::geom_core::{
    imag, qi, qk, quat, rotation_of, FramePoint, Mat3, Quat, RotationMatrix, TangentPairPoint, Vec3,
};

/// `λ` from which the non-Hopf part is switched off smoothly.
pub const FLAT_CUT_START: f64 = 12.0;
/// `λ` beyond which the field is exactly Hopf.
pub const FLAT_CUT_END: f64 = 15.0;

/// Weight of the non-Hopf part: 1 for `λ ≤ 12`, 0 for `λ ≥ 15`.
pub fn flat_weight(lambda: f64) -> f64 {
    1.0 - smooth_step_f((lambda - FLAT_CUT_START) / (FLAT_CUT_END - FLAT_CUT_START))
}

/// Unit tangent lift `(γ, γ̇/|γ̇|)` at arc length `l`.
pub fn tangent_at(curve: &SmoothClosedSphereCurve, l: f64) -> Result<TangentPairPoint> {
    let (p, t, _) = curve.frame_at_arclength(l)?;
    Ok(TangentPairPoint { x: p, y: t })
}

/// `samples` points of the tangent lift, equally spaced in arc length from `γ(0)`.
pub fn tangent_lift(curve: &SmoothClosedSphereCurve, samples: usize) -> Result<Vec<TangentPairPoint>> {
    let len = curve.length();
    (0..samples)
        .map(|k| tangent_at(curve, len * k as f64 / samples as f64))
        .collect()
}

/// `Γ″`: the tangent lift with `w = e^{i 2π l / L} v`, starting at the arc-length offset `l0`.
#[derive(Debug, Clone)]
pub struct LiftedCurve {
    pub curve: Arc<SmoothClosedSphereCurve>,
    pub l0: f64,
    /// Arc length from `p₀` of each sample.
    pub arc: Vec<f64>,
    pub tangent: Vec<TangentPairPoint>,
    pub frames: Vec<FramePoint>,
}

impl LiftedCurve {
    pub fn length(&self) -> f64 {
        self.curve.length()
    }

    /// Point of `Γ″` at arc length `l` from `p₀`.
    pub fn frame_at(&self, l: f64) -> Result<FramePoint> {
        lifted_point(&self.curve, self.l0 + l, l / self.length())
    }

    /// Distance between the start and the end of the lift.
    pub fn closure_residual(&self) -> Result<f64> {
        let a = self.frame_at(0.0)?;
        let b = self.frame_at(self.length())?;
        Ok(frame_distance(&a, &b))
    }
}

fn lifted_point(curve: &SmoothClosedSphereCurve, l: f64, turns: f64) -> Result<FramePoint> {
    let (q, v, _) = curve.frame_at_arclength(l)?;
    Ok(FramePoint::from_angle(q, v, TAU * turns))
}

/// `Γ″` sampled at `samples` points from the base point at arc length `l0`.
pub fn fiber_lift(curve: Arc<SmoothClosedSphereCurve>, l0: f64, samples: usize) -> Result<LiftedCurve> {
    let len = curve.length();
    if !(len > 0.0) {
        return Err(Error::Domain("curve has zero length".into()));
    }
    let mut arc = Vec::with_capacity(samples);
    let mut tangent = Vec::with_capacity(samples);
    let mut frames = Vec::with_capacity(samples);
    for k in 0..samples {
        let l = len * k as f64 / samples as f64;
        let f = lifted_point(&curve, l0 + l, l / len)?;
        arc.push(l);
        tangent.push(TangentPairPoint { x: f.q, y: f.v });
        frames.push(f);
    }
    Ok(LiftedCurve {
        curve,
        l0,
        arc,
        tangent,
        frames,
    })
}

/// `g*(q, v, w) = (g q, g v, g w)`.
pub fn so3_translate(g: &RotationMatrix, p: &FramePoint) -> FramePoint {
    FramePoint {
        q: g * p.q,
        v: g * p.v,
        w: g * p.w,
    }
}

/// `Γ_{λ,g} = g*Γ″` on the samples of a lift.
pub fn translate_curve(g: &RotationMatrix, c: &LiftedCurve) -> Vec<FramePoint> {
    c.frames.iter().map(|p| so3_translate(g, p)).collect()
}

/// Largest component distance between two frame points.
pub fn frame_distance(a: &FramePoint, b: &FramePoint) -> f64 {
    (a.q - b.q).norm().max((a.v - b.v).norm()).max((a.w - b.w).norm())
}

/// Leaf of the foliation through a point: `p = g*Γ″(l)` with `Γ″` based at `γ(0)`.
#[derive(Debug, Clone, Copy)]
pub struct Leaf {
    pub g: RotationMatrix,
    /// Arc length of the matched point on `Γ_λ`.
    pub phase: f64,
    pub residual: f64,
}

/// Rigid-body velocity of a frame point, one vector per component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameVelocity {
    pub q: Vec3,
    pub v: Vec3,
    pub w: Vec3,
}

impl FrameVelocity {
    pub fn to_array(&self) -> [f64; 9] {
        [
            self.q.x, self.q.y, self.q.z, self.v.x, self.v.y, self.v.z, self.w.x, self.w.y, self.w.z,
        ]
    }

    pub fn rotated(&self, g: &RotationMatrix) -> Self {
        Self {
            q: g * self.q,
            v: g * self.v,
            w: g * self.w,
        }
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        (self.q - o.q)
            .amax()
            .max((self.v - o.v).amax())
            .max((self.w - o.w).amax())
    }

    /// Largest violation of tangency to `M` at `p`.
    pub fn tangency_residual(&self, p: &FramePoint) -> f64 {
        [
            p.q.dot(&self.q),
            p.v.dot(&self.v),
            p.w.dot(&self.w),
            self.q.dot(&p.v) + p.q.dot(&self.v),
            self.q.dot(&p.w) + p.q.dot(&self.w),
        ]
        .into_iter()
        .fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// `(H, 0)`: rotation of both vectors about the base point.
pub fn hopf_on_m(p: &FramePoint) -> FrameVelocity {
    FrameVelocity {
        q: Vec3::zeros(),
        v: p.q.cross(&p.v),
        w: p.q.cross(&p.w),
    }
}

/// The field `X_λ` with its curve.
#[derive(Debug, Clone)]
pub struct SullivanField {
    lambda: f64,
    weight: f64,
    curve: Option<Arc<SmoothClosedSphereCurve>>,
}

impl SullivanField {
    /// Field for `λ > 0` with the default curve family.
    pub fn new(lambda: f64) -> Result<Self> {
        Self::with_params(&TrochoidParams::new(lambda)?)
    }

    pub fn with_params(p: &TrochoidParams) -> Result<Self> {
        let weight = flat_weight(p.lambda);
        let curve = if weight > 0.0 {
            Some(Arc::new(SmoothClosedSphereCurve::from_params(p)?))
        } else {
            None
        };
        Ok(Self {
            lambda: p.lambda,
            weight,
            curve,
        })
    }

    pub fn from_curve(curve: Arc<SmoothClosedSphereCurve>) -> Self {
        Self {
            lambda: curve.lambda(),
            weight: flat_weight(curve.lambda()),
            curve: Some(curve),
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Weight of the non-Hopf part.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn curve(&self) -> Result<&Arc<SmoothClosedSphereCurve>> {
        self.curve
            .as_ref()
            .ok_or_else(|| Error::Domain(format!("no curve at lambda = {}: field is Hopf", self.lambda)))
    }

    /// `L = l(λ)`.
    pub fn length(&self) -> Result<f64> {
        Ok(self.curve()?.length())
    }

    /// `1/k_g` and `2π/(L k_g)` at fibre angle `ψ`, already scaled by the cut-off weight.
    pub fn rates(&self, psi: f64) -> Result<(f64, f64)> {
        match &self.curve {
            None => Ok((0.0, 0.0)),
            Some(c) => {
                let len = c.length();
                let k = c.kappa_at_arclength(psi / TAU * len)?;
                let inv = self.weight / k;
                Ok((inv, inv * TAU / len))
            }
        }
    }

    /// `X_λ(q, v, w) = (v/k, q×v - q/k, (1 + 2π/(L k)) q×w - (v·w) q/k)` with `k = k_g(ψ)`.
    pub fn eval(&self, p: &FramePoint) -> Result<FrameVelocity> {
        let (inv, spin) = self.rates(p.fibre_angle())?;
        Ok(eval_with_rates(p, inv, spin))
    }

    /// `(1/k)·√(2 + (2π/L)²)`: distance to `(H, 0)` in `(q, v, ψ)` coordinates.
    pub fn deviation(&self, p: &FramePoint) -> Result<f64> {
        let (inv, spin) = self.rates(p.fibre_angle())?;
        Ok((2.0 * inv * inv + spin * spin).sqrt())
    }

    /// Leaf through `p`.
    pub fn leaf_through(&self, p: &FramePoint) -> Result<Leaf> {
        let c = self.curve()?;
        let psi = p.fibre_angle();
        let l = psi / TAU * c.length();
        let (x, t, _) = c.frame_at_arclength(l)?;
        let f = Mat3::from_columns(&[x, t, x.cross(&t)]);
        let g = RotationMatrix::from_matrix_unchecked(p.frame() * f.transpose());
        let back = so3_translate(&g, &FramePoint::from_angle(x, t, psi));
        let residual = frame_distance(&back, p);
        if residual > 1e-6 {
            return Err(Error::LeafLookup { residual });
        }
        Ok(Leaf { g, phase: l, residual })
    }

    /// `T(λ) = ∮ k_g ds`.
    pub fn period_quadrature(&self) -> Result<f64> {
        Ok(self.curve()?.total_curvature()? / self.weight)
    }
}

pub(crate) fn eval_with_rates(p: &FramePoint, inv: f64, spin: f64) -> FrameVelocity {
    let qv = p.q.cross(&p.v);
    let qw = p.q.cross(&p.w);
    FrameVelocity {
        q: p.v * inv,
        v: qv - p.q * inv,
        w: qw * (1.0 + spin) - p.q * (p.v.dot(&p.w) * inv),
    }
}

/// `eval_X(λ, p)`.
pub fn eval_x(field: &SullivanField, p: &FramePoint) -> Result<FrameVelocity> {
    field.eval(p)
}

/// `leaf_through(p, λ)`.
pub fn leaf_through(field: &SullivanField, p: &FramePoint) -> Result<Leaf> {
    field.leaf_through(p)
}

/// `period_quadrature(λ)`.
pub fn period_quadrature(field: &SullivanField) -> Result<f64> {
    field.period_quadrature()
}

const FIELD_CACHE_CAP: usize = 256;

/// Shared cache of fields keyed by `λ`.
#[derive(Debug, Default)]
pub struct FieldCache {
    map: Mutex<HashMap<u64, Arc<SullivanField>>>,
}

impl FieldCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, lambda: f64) -> Result<Arc<SullivanField>> {
        let key = lambda.to_bits();
        if let Some(f) = self.map.lock().expect("field cache").get(&key) {
            return Ok(f.clone());
        }
        let f = Arc::new(SullivanField::new(lambda)?);
        let mut map = self.map.lock().expect("field cache");
        if map.len() >= FIELD_CACHE_CAP {
            map.clear();
        }
        map.insert(key, f.clone());
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("field cache").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sup of the distance to `(H, 0)` over `samples` random frame points.
pub fn flatness_sup(field: &SullivanField, samples: usize, seed: u64) -> Result<f64> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut sup = 0.0f64;
    for _ in 0..samples {
        let p = crate::geom_core::random_frame_point(&mut rng);
        sup = sup.max(field.deviation(&p)?);
    }
    Ok(sup)
}

/// Least-squares slope of `ln y` against `x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Field on `S³ × S³` covering `X_λ`: `(θ, w) ↦ ((2π/(L k)) i θ, ½ (i + k⁻¹ k̂) w)` where
/// the frame is `R(w̄ j)` and `ψ = arg z₁(θ)`.
#[derive(Debug, Clone)]
pub struct S3S3Lift {
    field: SullivanField,
}

pub fn lift_to_s3s3(field: &SullivanField) -> S3S3Lift {
    S3S3Lift { field: field.clone() }
}

/// Phase of a quaternion's first complex coordinate, falling back to the second where it vanishes.
pub fn quat_phase(theta: &Quat) -> f64 {
    if theta.w.hypot(theta.i) > 1e-300 {
        theta.i.atan2(theta.w)
    } else {
        theta.k.atan2(theta.j)
    }
}

impl S3S3Lift {
    pub fn field(&self) -> &SullivanField {
        &self.field
    }

    /// Frame point covered by `(θ, w)`.
    pub fn project(&self, theta: &Quat, w: &Quat) -> FramePoint {
        let g = rotation_of(&(w.conjugate() * quat(0.0, 0.0, 1.0, 0.0)));
        let q = g.column(0).into_owned();
        let v = g.column(1).into_owned();
        FramePoint::from_angle(q, v, quat_phase(theta))
    }

    /// `(θ̇, ẇ)`.
    pub fn eval(&self, theta: &Quat, w: &Quat) -> Result<(Quat, Quat)> {
        let (inv, spin) = self.field.rates(quat_phase(theta))?;
        Ok((qi() * theta * spin, (qi() + qk() * inv) * w * 0.5))
    }

    /// Pushes `(θ̇, ẇ)` forward to `M`.
    pub fn push_forward(&self, theta: &Quat, w: &Quat, dtheta: &Quat, dw: &Quat) -> FrameVelocity {
        let u = w.conjugate() * quat(0.0, 0.0, 1.0, 0.0);
        let du = dw.conjugate() * quat(0.0, 0.0, 1.0, 0.0);
        let omega = imag(&(du * u.conjugate())) * 2.0;
        let p = self.project(theta, w);
        let z1 = theta.w.hypot(theta.i);
        let dpsi = if z1 > 1e-300 {
            (theta.w * dtheta.i - theta.i * dtheta.w) / (z1 * z1)
        } else {
            0.0
        };
        let n = p.q.cross(&p.v);
        let dq = omega.cross(&p.q);
        let dv = omega.cross(&p.v);
        let dn = omega.cross(&n);
        let psi = p.fibre_angle();
        let (s, c) = psi.sin_cos();
        let dw3 = dv * c + dn * s + (n * c - p.v * s) * dpsi;
        FrameVelocity { q: dq, v: dv, w: dw3 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom_core::{random_frame_point, random_rotation, random_unit_quat};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field() -> SullivanField {
        SullivanField::new(1.0).unwrap()
    }

    #[test]
    fn tangent_lift_examples() {
        let f = field();
        let c = f.curve().unwrap();
        for p in tangent_lift(c, 64).unwrap() {
            assert!(TangentPairPoint::new(p.x, p.y).is_ok());
        }
        let a = tangent_at(c, 0.0).unwrap();
        let b = tangent_at(c, c.length()).unwrap();
        assert!((a.x - b.x).norm() <= 1e-8 && (a.y - b.y).norm() <= 1e-8);
    }

    #[test]
    fn fiber_lift_turns_once() {
        let f = field();
        let lift = fiber_lift(f.curve().unwrap().clone(), 0.3, 16).unwrap();
        let p0 = lift.frame_at(0.0).unwrap();
        assert!((p0.w - p0.v).norm() <= 1e-15);
        let half = lift.frame_at(0.5 * lift.length()).unwrap();
        assert!((half.w + half.v).norm() <= 1e-12);
        assert!(lift.closure_residual().unwrap() <= 1e-8);
    }

    #[test]
    fn translation_is_an_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_frame_point(&mut rng);
        let id = RotationMatrix::identity();
        assert_eq!(so3_translate(&id, &p), p);
        for _ in 0..50 {
            let g = random_rotation(&mut rng);
            let h = random_rotation(&mut rng);
            let a = so3_translate(&(g * h), &p);
            let b = so3_translate(&g, &so3_translate(&h, &p));
            assert!(frame_distance(&a, &b) <= 1e-12);
            let t = so3_translate(&g, &p);
            assert_relative_eq!(t.v.dot(&t.w), p.v.dot(&p.w), epsilon = 1e-12);
        }
    }

    #[test]
    fn leaf_round_trip() {
        let f = field();
        let lift = fiber_lift(f.curve().unwrap().clone(), 0.0, 8).unwrap();
        let p = lift.frames[3];
        let leaf = f.leaf_through(&p).unwrap();
        assert!((leaf.g.matrix() - Mat3::identity()).amax() <= 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g0 = random_rotation(&mut rng);
            let leaf = f.leaf_through(&so3_translate(&g0, &p)).unwrap();
            assert!((leaf.g.matrix() - g0.matrix()).amax() <= 1e-8);
            let other = so3_translate(&g0, &lift.frames[6]);
            let leaf2 = f.leaf_through(&other).unwrap();
            assert!((leaf.g.matrix() - leaf2.g.matrix()).amax() <= 1e-8);
        }
        for _ in 0..200 {
            assert!(f.leaf_through(&random_frame_point(&mut rng)).unwrap().residual <= 1e-6);
        }
    }

    #[test]
    fn field_is_tangent_equivariant_and_hopf_plus_flat() {
        let f = field();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = random_frame_point(&mut rng);
            let x = f.eval(&p).unwrap();
            assert!(x.tangency_residual(&p) <= 1e-10);
            // Component of v̇ orthogonal to q is exactly the Hopf rotation.
            let h = hopf_on_m(&p);
            let vt = x.v - p.q * x.v.dot(&p.q);
            assert!((vt - h.v).norm() <= 1e-15);
            let g = random_rotation(&mut rng);
            let y = f.eval(&so3_translate(&g, &p)).unwrap();
            assert!(y.max_abs_diff(&x.rotated(&g)) <= 1e-8);
        }
    }

    #[test]
    fn field_is_tangent_to_leaves() {
        let f = field();
        let lift = fiber_lift(f.curve().unwrap().clone(), 0.0, 4).unwrap();
        let len = lift.length();
        for k in 0..4 {
            let l = len * (k as f64 + 0.3) / 4.0;
            let p = lift.frame_at(l).unwrap();
            let x = f.eval(&p).unwrap();
            let dl = 1e-5;
            let a = lift.frame_at(l - dl).unwrap();
            let b = lift.frame_at(l + dl).unwrap();
            let d = FrameVelocity {
                q: (b.q - a.q) / (2.0 * dl),
                v: (b.v - a.v) / (2.0 * dl),
                w: (b.w - a.w) / (2.0 * dl),
            };
            let xa = x.to_array();
            let da = d.to_array();
            let dot: f64 = xa.iter().zip(&da).map(|(u, v)| u * v).sum();
            let nx = xa.iter().map(|u| u * u).sum::<f64>().sqrt();
            let nd = da.iter().map(|u| u * u).sum::<f64>().sqrt();
            let angle = (dot / (nx * nd)).clamp(-1.0, 1.0).acos();
            assert!(angle <= 1e-6, "angle {angle}");
        }
    }

    #[test]
    fn deviation_matches_formula() {
        let f = field();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_frame_point(&mut rng);
        let (inv, _) = f.rates(p.fibre_angle()).unwrap();
        let len = f.length().unwrap();
        assert_relative_eq!(
            f.deviation(&p).unwrap(),
            inv * (2.0 + (TAU / len).powi(2)).sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn s3s3_lift_covers_field() {
        let f = field();
        let lift = lift_to_s3s3(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let theta = random_unit_quat(&mut rng);
            let w = random_unit_quat(&mut rng);
            let (dt, dw) = lift.eval(&theta, &w).unwrap();
            let pushed = lift.push_forward(&theta, &w, &dt, &dw);
            let p = lift.project(&theta, &w);
            let direct = f.eval(&p).unwrap();
            assert!(pushed.max_abs_diff(&direct) <= 1e-10);
        }
    }

    #[test]
    fn cutoff_weight() {
        assert_eq!(flat_weight(3.0), 1.0);
        assert_eq!(flat_weight(15.0), 0.0);
        assert!(flat_weight(13.5) > 0.0 && flat_weight(13.5) < 1.0);
        let h = SullivanField::new(16.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_frame_point(&mut rng);
        assert_eq!(h.eval(&p).unwrap(), hopf_on_m(&p));
    }

    #[test]
    fn log_slope_of_exponential() {
        let x = [1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * (-v).exp()).collect();
        assert_relative_eq!(log_slope(&x, &y), -1.0, epsilon = 1e-12);
    }
}
