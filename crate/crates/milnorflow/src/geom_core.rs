//! Quaternions, rotations, the unit tangent bundle of S², the fibre product M
//! and the Hopf fields.

use nalgebra::{Complex, Matrix2, Matrix3, Quaternion, Rotation3, SVector, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Quat = Quaternion<f64>;
pub type UnitQuat = UnitQuaternion<f64>;
pub type RotationMatrix = Rotation3<f64>;
pub type R8 = SVector<f64, 8>;

const UNIT_TOL: f64 = 1e-12;

/// `a + bi + cj + dk`.
pub fn quat(a: f64, b: f64, c: f64, d: f64) -> Quat {
    Quat::new(a, b, c, d)
}

pub fn qi() -> Quat {
    quat(0.0, 1.0, 0.0, 0.0)
}

pub fn qj() -> Quat {
    quat(0.0, 0.0, 1.0, 0.0)
}

pub fn qk() -> Quat {
    quat(0.0, 0.0, 0.0, 1.0)
}

/// Complex-pair view `q = z1 + z2 j` with `z1 = a + bi`, `z2 = c + di`.
pub fn to_complex_pair(q: &Quat) -> (Complex<f64>, Complex<f64>) {
    (Complex::new(q.w, q.i), Complex::new(q.j, q.k))
}

pub fn from_complex_pair(z1: Complex<f64>, z2: Complex<f64>) -> Quat {
    quat(z1.re, z1.im, z2.re, z2.im)
}

/// The 2×2 complex matrix `[[z1, z2], [-conj z2, conj z1]]`; a multiplicative homomorphism.
pub fn to_su2_matrix(q: &Quat) -> Matrix2<Complex<f64>> {
    let (z1, z2) = to_complex_pair(q);
    Matrix2::new(z1, z2, -z2.conj(), z1.conj())
}

pub fn from_su2_matrix(m: &Matrix2<Complex<f64>>) -> Quat {
    from_complex_pair(m[(0, 0)], m[(0, 1)])
}

/// Integer power of a nonzero quaternion; negative powers use the inverse.
pub fn quat_powi(q: &Quat, n: i64) -> Result<Quat> {
    let base = if n < 0 {
        q.try_inverse()
            .ok_or_else(|| Error::Domain("negative power of zero quaternion".into()))?
    } else {
        *q
    };
    let mut out = Quat::identity();
    for _ in 0..n.unsigned_abs() {
        out *= base;
    }
    Ok(out)
}

/// Pure quaternion with imaginary part `v`.
pub fn pure(v: &Vec3) -> Quat {
    quat(0.0, v.x, v.y, v.z)
}

pub fn imag(q: &Quat) -> Vec3 {
    Vec3::new(q.i, q.j, q.k)
}

/// The matrix `A(x)` with `A(x) y = x × y`.
pub fn skew_matrix(x: &Vec3) -> Mat3 {
    Mat3::new(0.0, -x.z, x.y, x.z, 0.0, -x.x, -x.y, x.x, 0.0)
}

/// Point `(x, y)` of the unit tangent bundle of S².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentPairPoint {
    pub x: Vec3,
    pub y: Vec3,
}

impl TangentPairPoint {
    pub fn new(x: Vec3, y: Vec3) -> Result<Self> {
        check_unit(&x, "x")?;
        check_unit(&y, "y")?;
        check_orth(&x, &y, "x·y")?;
        Ok(Self { x, y })
    }
}

/// Point `(q, v, w)` of `M`: a base point and two unit tangent vectors over it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePoint {
    pub q: Vec3,
    pub v: Vec3,
    pub w: Vec3,
}

impl FramePoint {
    pub fn new(q: Vec3, v: Vec3, w: Vec3) -> Result<Self> {
        check_unit(&q, "q")?;
        check_unit(&v, "v")?;
        check_unit(&w, "w")?;
        check_orth(&q, &v, "q·v")?;
        check_orth(&q, &w, "q·w")?;
        Ok(Self { q, v, w })
    }

    /// Builds `(q, v, cos ψ v + sin ψ q×v)`.
    pub fn from_angle(q: Vec3, v: Vec3, psi: f64) -> Self {
        let n = q.cross(&v);
        Self {
            q,
            v,
            w: v * psi.cos() + n * psi.sin(),
        }
    }

    /// Angle in `[0, 2π)` from `v` to `w` about `q`.
    pub fn fibre_angle(&self) -> f64 {
        let n = self.q.cross(&self.v);
        self.w
            .dot(&n)
            .atan2(self.w.dot(&self.v))
            .rem_euclid(std::f64::consts::TAU)
    }

    /// Orthonormal frame `[q, v, q×v]` as the columns of a rotation.
    pub fn frame(&self) -> Mat3 {
        Mat3::from_columns(&[self.q, self.v, self.q.cross(&self.v)])
    }

    /// Largest violation of the unit-norm and orthogonality constraints.
    pub fn constraint_residual(&self) -> f64 {
        [
            (self.q.norm() - 1.0).abs(),
            (self.v.norm() - 1.0).abs(),
            (self.w.norm() - 1.0).abs(),
            self.q.dot(&self.v).abs(),
            self.q.dot(&self.w).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn to_array(&self) -> [f64; 9] {
        [
            self.q.x, self.q.y, self.q.z, self.v.x, self.v.y, self.v.z, self.w.x, self.w.y, self.w.z,
        ]
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self {
            q: Vec3::new(s[0], s[1], s[2]),
            v: Vec3::new(s[3], s[4], s[5]),
            w: Vec3::new(s[6], s[7], s[8]),
        }
    }

    /// Gram-Schmidt projection back onto `M`.
    pub fn project(&self) -> Self {
        let q = self.q.normalize();
        let v = (self.v - q * q.dot(&self.v)).normalize();
        let w = (self.w - q * q.dot(&self.w)).normalize();
        Self { q, v, w }
    }
}

fn check_unit(x: &Vec3, name: &str) -> Result<()> {
    if (x.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::Domain(format!("|{name}| = {} is not 1", x.norm())));
    }
    Ok(())
}

fn check_orth(x: &Vec3, y: &Vec3, name: &str) -> Result<()> {
    if x.dot(y).abs() > UNIT_TOL {
        return Err(Error::Domain(format!("{name} = {:e} is not 0", x.dot(y))));
    }
    Ok(())
}

/// `(ẋ, ẏ) = (0, A(x) y)`.
pub fn hopf_field_tangent(p: &TangentPairPoint) -> (Vec3, Vec3) {
    (Vec3::zeros(), p.x.cross(&p.y))
}

/// Splits `z ∈ R⁸` into the quaternion pair `(q1, q2)`.
pub fn to_quat_pair(z: &R8) -> (Quat, Quat) {
    (quat(z[0], z[1], z[2], z[3]), quat(z[4], z[5], z[6], z[7]))
}

pub fn from_quat_pair(q1: &Quat, q2: &Quat) -> R8 {
    R8::from_column_slice(&[q1.w, q1.i, q1.j, q1.k, q2.w, q2.i, q2.j, q2.k])
}

/// `ż_k = i z_k`, i.e. left multiplication by `i` on both quaternion factors.
pub fn hopf_field_01(z: &R8) -> R8 {
    let (q1, q2) = to_quat_pair(z);
    from_quat_pair(&(qi() * q1), &(qi() * q2))
}

/// `ż₁ = iz₁, ż₂ = −iz₂, ż₃ = iz₃, ż₄ = −iz₄`, i.e. right multiplication by `i`.
pub fn hopf_field_10(z: &R8) -> R8 {
    let (q1, q2) = to_quat_pair(z);
    from_quat_pair(&(q1 * qi()), &(q2 * qi()))
}

/// `(z₁, z₂, z₃, z₄) ↦ (z₁, z̄₂, z₃, z̄₄)`, an involution conjugating the two Hopf fields.
pub fn hopf_conjugacy(z: &R8) -> R8 {
    let mut out = *z;
    out[3] = -out[3];
    out[7] = -out[7];
    out
}

/// The covering homomorphism `S³ → SO(3)`, `p ↦ q p q̄`.
pub fn rotation_from_unit_quaternion(q: &Quat) -> Result<RotationMatrix> {
    if (q.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::Domain(format!("|q| = {} is not 1", q.norm())));
    }
    Ok(UnitQuat::new_unchecked(*q).to_rotation_matrix())
}

/// Rotation matrix of `q / |q|`, for internal use on already-normalized data.
pub fn rotation_of(q: &Quat) -> Mat3 {
    *UnitQuat::from_quaternion(*q).to_rotation_matrix().matrix()
}

/// Space angular velocity of `R(q(t))` given `q̇`: `ω = 2 Im(q̇ q̄)`.
pub fn cover_angular_velocity(q: &Quat, qdot: &Quat) -> Vec3 {
    imag(&(qdot * q.conjugate())) * 2.0
}

/// Lift of a space angular velocity through the cover: `q̇ = ½ ω q`.
pub fn lift_angular_velocity(q: &Quat, omega: &Vec3) -> Quat {
    pure(omega) * q * 0.5
}

/// Rotation by `angle` about the unit `axis`.
pub fn axis_angle(axis: &Vec3, angle: f64) -> Mat3 {
    *Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(*axis), angle).matrix()
}

pub fn random_unit_vec3<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let v = Vec3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    v.normalize()
}

pub fn random_unit_quat<R: Rng + ?Sized>(rng: &mut R) -> Quat {
    let q = quat(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    q / q.norm()
}

pub fn random_s7<R: Rng + ?Sized>(rng: &mut R) -> R8 {
    let z = R8::from_fn(|_, _| rng.sample(StandardNormal));
    z / z.norm()
}

pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> RotationMatrix {
    UnitQuat::new_unchecked(random_unit_quat(rng)).to_rotation_matrix()
}

/// Unit vector orthogonal to `x`.
pub fn any_orthogonal(x: &Vec3) -> Vec3 {
    let e = if x.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    (e - x * x.dot(&e)).normalize()
}

pub fn random_frame_point<R: Rng + ?Sized>(rng: &mut R) -> FramePoint {
    let q = random_unit_vec3(rng);
    let t = random_unit_vec3(rng);
    let v = (t - q * q.dot(&t)).normalize();
    let psi = rng.gen_range(0.0..std::f64::consts::TAU);
    FramePoint::from_angle(q, v, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};

    #[test]
    fn quaternion_table() {
        assert_eq!(qi() * qj(), qk());
        assert_eq!(qj() * qk(), qi());
        assert_eq!(qk() * qi(), qj());
        assert_eq!(qj() * qi(), -qk());
        assert_eq!(qi() * qi(), -Quat::identity());
    }

    #[test]
    fn complex_pair_and_matrix_views_round_trip() {
        let q = quat(0.1, -0.7, 0.3, 0.5);
        let (z1, z2) = to_complex_pair(&q);
        assert_eq!(from_complex_pair(z1, z2), q);
        let p = quat(0.4, 0.2, -0.9, 0.1);
        let m = to_su2_matrix(&q) * to_su2_matrix(&p);
        let r = from_su2_matrix(&m);
        assert_relative_eq!((r - q * p).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn skew_matrix_is_cross_product() {
        let x = Vec3::new(0.0, 0.6, 0.8);
        let a = skew_matrix(&x);
        assert_eq!(a.row(0), nalgebra::RowVector3::new(0.0, -0.8, 0.6));
        let y = Vec3::new(1.0, 2.0, -3.0);
        assert_relative_eq!(a * y, x.cross(&y), epsilon = 1e-15);
        assert_relative_eq!((a * x).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(a + a.transpose(), Mat3::zeros());
    }

    #[test]
    fn rotation_examples() {
        let q = quat(FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2);
        let r = rotation_from_unit_quaternion(&q).unwrap();
        assert_relative_eq!(r * Vec3::x(), Vec3::y(), epsilon = 1e-15);
        assert_relative_eq!(r * Vec3::y(), -Vec3::x(), epsilon = 1e-15);
        assert!(rotation_from_unit_quaternion(&quat(1.0, 1.0, 0.0, 0.0)).is_err());
        let rm = rotation_from_unit_quaternion(&-q).unwrap();
        assert_eq!(r, rm);
    }

    #[test]
    fn rotation_is_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = random_unit_quat(&mut rng);
            let q = random_unit_quat(&mut rng);
            let lhs = rotation_of(&(p * q));
            let rhs = rotation_of(&p) * rotation_of(&q);
            assert!((lhs - rhs).abs().max() <= 1e-12);
        }
    }

    #[test]
    fn cover_differential_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = random_unit_quat(&mut rng);
        let omega = Vec3::new(0.3, -1.2, 0.7);
        let qdot = lift_angular_velocity(&q, &omega);
        assert_relative_eq!(cover_angular_velocity(&q, &qdot), omega, epsilon = 1e-14);
        let eps = 1e-6;
        let r1 = rotation_of(&(q + qdot * eps));
        let r0 = rotation_of(&(q - qdot * eps));
        let rdot = (r1 - r0) / (2.0 * eps);
        let expected = skew_matrix(&omega) * rotation_of(&q);
        assert!((rdot - expected).abs().max() < 1e-8);
    }

    #[test]
    fn hopf_tangent_field_rotates_y_about_x() {
        let p = TangentPairPoint::new(Vec3::z(), Vec3::x()).unwrap();
        let (dx, dy) = hopf_field_tangent(&p);
        assert_eq!(dx, Vec3::zeros());
        assert_eq!(dy, Vec3::y());
        let flow = |t: f64| axis_angle(&p.x, t) * p.y;
        assert_relative_eq!(flow(TAU), p.y, epsilon = 1e-14);
        assert!((flow(FRAC_PI_2) - p.y).norm() > 1.0);
        assert!(TangentPairPoint::new(Vec3::z(), Vec3::z()).is_err());
    }

    #[test]
    fn hopf_fields_on_s7() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let z = random_s7(&mut rng);
            let h01 = hopf_field_01(&z);
            let h10 = hopf_field_10(&z);
            assert!(z.dot(&h01).abs() < 1e-15);
            assert!(z.dot(&h10).abs() < 1e-15);
            assert_relative_eq!(h01[0], -z[1]);
            assert_relative_eq!(h01[3], z[2]);
            assert_relative_eq!(h10[2], z[3]);
            assert_relative_eq!(h10[3], -z[2]);
            let pushed = hopf_conjugacy(&hopf_field_10(&hopf_conjugacy(&z)));
            assert!((pushed - h01).norm() <= 1e-12);
        }
    }

    #[test]
    fn quat_powers() {
        let v = quat(0.0, 2.0, 0.0, 0.0);
        assert_relative_eq!((quat_powi(&v, -1).unwrap() * v - Quat::identity()).norm(), 0.0);
        assert_eq!(quat_powi(&v, 2).unwrap(), quat(-4.0, 0.0, 0.0, 0.0));
        assert!(quat_powi(&Quat::default(), -1).is_err());
    }

    #[test]
    fn frame_point_angle() {
        let p = FramePoint::from_angle(Vec3::z(), Vec3::x(), 2.5);
        assert_relative_eq!(p.fibre_angle(), 2.5, epsilon = 1e-14);
        let p = FramePoint::from_angle(Vec3::z(), Vec3::x(), PI);
        assert_relative_eq!(p.w, -Vec3::x(), epsilon = 1e-15);
        assert!(FramePoint::new(Vec3::z(), Vec3::x(), Vec3::z()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn unit3() -> impl Strategy<Value = Vec3> {
            (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
                .prop_filter("nonzero", |(a, b, c)| a * a + b * b + c * c > 1e-3)
                .prop_map(|(a, b, c)| Vec3::new(a, b, c).normalize())
        }

        proptest! {
            #[test]
            fn exp_skew_preserves_norm(x in unit3(), y in unit3(), t in -10.0f64..10.0) {
                let r = axis_angle(&x, t);
                prop_assert!(((r * y).norm() - 1.0).abs() < 1e-14);
                let a = skew_matrix(&x);
                prop_assert_eq!(a + a.transpose(), Mat3::zeros());
            }

            #[test]
            fn cover_is_two_to_one(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0) {
                let q = quat(a, b, c, d);
                prop_assume!(q.norm() > 1e-3);
                let q = q / q.norm();
                prop_assert_eq!(rotation_of(&q), rotation_of(&-q));
            }
        }
    }
}
