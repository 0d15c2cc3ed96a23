use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{Real, Vec3};

/// Hamilton quaternion `w + xi + yj + zk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion<S = f64> {
    pub w: S,
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Real> Quaternion<S> {
    pub fn new(w: S, x: S, y: S, z: S) -> Self {
        Self { w, x, y, z }
    }

    pub fn identity() -> Self {
        Self::new(S::one(), S::zero(), S::zero(), S::zero())
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero(), S::zero(), S::zero())
    }

    /// Pure quaternion `(0, v)`.
    pub fn pure(v: Vec3<S>) -> Self {
        Self::new(S::zero(), v.x, v.y, v.z)
    }

    pub fn vector(self) -> Vec3<S> {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn conjugate(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn dot(self, o: Self) -> S {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm_squared(self) -> S {
        self.dot(self)
    }

    pub fn norm(self) -> S {
        self.norm_squared().sqrt()
    }

    pub fn scale(self, k: S) -> Self {
        Self::new(self.w * k, self.x * k, self.y * k, self.z * k)
    }

    pub fn normalize(self) -> Self {
        let inv = S::one() / self.norm();
        self.scale(inv)
    }

    /// Rotates `v`; assumes `self` is unit-norm.
    pub fn rotate(self, v: Vec3<S>) -> Vec3<S> {
        let u = self.vector();
        let t = u.cross(v) * 2.0;
        v + t.scale(self.w) + u.cross(t)
    }

    /// Row-major rotation matrix of a unit quaternion.
    pub fn rotation_matrix(self) -> [[S; 3]; 3] {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let one = S::one();
        [
            [one - (y * y + z * z) * 2.0, (x * y - w * z) * 2.0, (x * z + w * y) * 2.0],
            [(x * y + w * z) * 2.0, one - (x * x + z * z) * 2.0, (y * z - w * x) * 2.0],
            [(x * z - w * y) * 2.0, (y * z + w * x) * 2.0, one - (x * x + y * y) * 2.0],
        ]
    }

    /// Rotation vector (axis times angle) of a unit quaternion, taking the
    /// shorter of the two antipodal representations.
    pub fn log(self) -> Vec3<S> {
        let q = if self.w.value() < 0.0 { -self } else { self };
        let v = q.vector();
        v.scale(S::log_scale(v.norm_squared(), q.w))
    }

    pub fn value(self) -> Quaternion<f64> {
        Quaternion::new(self.w.value(), self.x.value(), self.y.value(), self.z.value())
    }

    pub fn lift(q: Quaternion<f64>) -> Self {
        Self::new(
            S::constant(q.w),
            S::constant(q.x),
            S::constant(q.y),
            S::constant(q.z),
        )
    }
}

impl Quaternion<f64> {
    /// Rotation of `angle` radians about `axis` (need not be unit length).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let a = axis * (1.0 / axis.norm());
        let (s, c) = (0.5 * angle).sin_cos();
        Self::new(c, a.x * s, a.y * s, a.z * s)
    }

    /// Geodesic angle between two rotations, in `[0, π]`.
    pub fn angle_to(self, other: Self) -> f64 {
        let d = self.normalize().dot(other.normalize()).abs().min(1.0);
        2.0 * d.acos()
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }
}

impl<S: Real> Mul for Quaternion<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl<S: Real> Add for Quaternion<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<S: Real> Sub for Quaternion<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<S: Real> Neg for Quaternion<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn normalize_yields_unit_norm() {
        let q = Quaternion::new(3.0, -1.0, 2.0, 0.5).normalize();
        assert!((q.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_matrix_matches_rotate() {
        let q = Quaternion::from_axis_angle(Vec3::new(0.3, -0.7, 0.2), 1.1);
        let v = Vec3::new(0.4, 1.5, -2.0);
        let m = q.rotation_matrix();
        let r = q.rotate(v);
        for (row, expect) in m.iter().zip([r.x, r.y, r.z]) {
            assert!((row[0] * v.x + row[1] * v.y + row[2] * v.z - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn rotate_about_z() {
        let q = Quaternion::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), FRAC_PI_2);
        let v = q.rotate(Vec3::new(1.0, 0.0, 0.0));
        assert!((v - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn log_recovers_axis_angle() {
        let axis = Vec3::new(1.0, -2.0, 0.5);
        let q = Quaternion::from_axis_angle(axis, 0.7);
        let r = q.log();
        let expected = axis * (0.7 / axis.norm());
        assert!((r - expected).norm() < 1e-12);
        // antipodal representation maps to the same rotation vector
        assert!(((-q).log() - expected).norm() < 1e-12);
        assert!(Quaternion::<f64>::identity().log().norm() == 0.0);
    }

    #[test]
    fn angle_between_rotations() {
        let z = Vec3::new(0.0, 0.0, 1.0);
        let a = Quaternion::from_axis_angle(z, 0.2);
        let b = Quaternion::from_axis_angle(z, 0.2 + PI / 3.0);
        assert!((a.angle_to(b) - PI / 3.0).abs() < 1e-9);
    }
}
