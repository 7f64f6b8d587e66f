//! Quaternion and dual-quaternion algebra.
//!
//! A [`Pose`] is a unit dual quaternion `D = r + ½ε(t ⊗ r)` stored as the pair
//! `(real, dual)`. Rotations are [`UnitQuaternion`]s kept on the `w ≥ 0`
//! hemisphere so that serialized values are deterministic; every distance in
//! this crate is hemisphere-invariant.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vector3 = nalgebra::Vector3<f64>;

/// Tolerance on `|‖r‖ − 1|` and on the Plücker condition of a pose.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Renormalization threshold applied after compositions.
const DRIFT_TOLERANCE: f64 = 1e-12;

/// Components below this magnitude count as zero for the hemisphere rule.
const HEMISPHERE_ZERO: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("rotation axis has zero length")]
    DegenerateAxis,
    #[error("quaternion has zero or non-finite norm")]
    ZeroNorm,
    #[error("invalid pose: real part norm error {norm_error:e}, plucker residual {plucker:e}")]
    InvalidPose { norm_error: f64, plucker: f64 },
    #[error("non-finite component")]
    NonFinite,
}

/// A quaternion `w + xî + yĵ + zk̂`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 4]> for Quaternion {
    fn from(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        [q.w, q.x, q.y, q.z]
    }
}

impl Quaternion {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub const fn identity() -> Self {
        Quaternion::new(1.0, 0.0, 0.0, 0.0)
    }

    pub const fn zero() -> Self {
        Quaternion::new(0.0, 0.0, 0.0, 0.0)
    }

    /// Pure quaternion `(0, v)`.
    pub fn pure(v: &Vector3) -> Self {
        Quaternion::new(0.0, v.x, v.y, v.z)
    }

    pub fn vector(&self) -> Vector3 {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn to_array(self) -> [f64; 4] {
        self.into()
    }

    /// Hamilton product `self ⊗ rhs`.
    pub fn hamilton(&self, rhs: &Quaternion) -> Quaternion {
        let (a1, b1, c1, d1) = (self.w, self.x, self.y, self.z);
        let (a2, b2, c2, d2) = (rhs.w, rhs.x, rhs.y, rhs.z);
        Quaternion::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }

    pub fn conjugate(&self) -> Quaternion {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Four-dimensional inner product.
    pub fn dot(&self, rhs: &Quaternion) -> f64 {
        self.w * rhs.w + self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn scale(&self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// `min(‖q1 − q2‖, ‖q1 + q2‖)`.
    pub fn distance(&self, rhs: &Quaternion) -> f64 {
        (*self - *rhs).norm().min((*self + *rhs).norm())
    }

    /// True when this quaternion lies on the canonical hemisphere.
    fn is_canonical(&self) -> bool {
        for c in [self.w, self.x, self.y, self.z] {
            if c.abs() > HEMISPHERE_ZERO {
                return c > 0.0;
            }
        }
        true
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.w + rhs.w, self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.w - rhs.w, self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        self.hamilton(&rhs)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.4}, {:.4}, {:.4}, {:.4})", self.w, self.x, self.y, self.z)
    }
}

/// A rotation: a quaternion of unit norm on the canonical hemisphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct UnitQuaternion(Quaternion);

impl TryFrom<[f64; 4]> for UnitQuaternion {
    type Error = GeomError;
    fn try_from(c: [f64; 4]) -> Result<Self, GeomError> {
        UnitQuaternion::try_new(Quaternion::from(c))
    }
}

impl From<UnitQuaternion> for [f64; 4] {
    fn from(q: UnitQuaternion) -> Self {
        q.0.into()
    }
}

impl Default for UnitQuaternion {
    fn default() -> Self {
        UnitQuaternion::identity()
    }
}

impl UnitQuaternion {
    pub const fn identity() -> Self {
        UnitQuaternion(Quaternion::identity())
    }

    /// Normalizes `q` and moves it to the canonical hemisphere.
    pub fn try_new(q: Quaternion) -> Result<Self, GeomError> {
        if !q.is_finite() {
            return Err(GeomError::NonFinite);
        }
        let n = q.norm();
        if n < 1e-12 {
            return Err(GeomError::ZeroNorm);
        }
        Ok(UnitQuaternion::canonical(q.scale(1.0 / n)))
    }

    /// Wraps a quaternion that is already unit up to composition drift.
    fn from_product(q: Quaternion) -> Self {
        let n = q.norm();
        let q = if (n - 1.0).abs() > DRIFT_TOLERANCE { q.scale(1.0 / n) } else { q };
        UnitQuaternion::canonical(q)
    }

    fn canonical(q: Quaternion) -> Self {
        if q.is_canonical() {
            UnitQuaternion(q)
        } else {
            UnitQuaternion(-q)
        }
    }

    /// Rotation by `angle` radians about `axis` (normalized first).
    pub fn from_axis_angle(axis: &Vector3, angle: f64) -> Result<Self, GeomError> {
        let n = axis.norm();
        if !(n > 1e-12) || !n.is_finite() {
            return Err(GeomError::DegenerateAxis);
        }
        let (s, c) = (angle / 2.0).sin_cos();
        let a = axis / n;
        Ok(UnitQuaternion::from_product(Quaternion::new(c, a.x * s, a.y * s, a.z * s)))
    }

    /// Intrinsic Z(yaw)–Y(pitch)–X(roll) rotation.
    pub fn from_euler(e: &EulerAngles) -> Self {
        let (sr, cr) = (e.roll / 2.0).sin_cos();
        let (sp, cp) = (e.pitch / 2.0).sin_cos();
        let (sy, cy) = (e.yaw / 2.0).sin_cos();
        let q = Quaternion::new(
            cr * cp * cy + sr * sp * sy,
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
        );
        UnitQuaternion::from_product(q)
    }

    pub fn quaternion(&self) -> &Quaternion {
        &self.0
    }

    pub fn w(&self) -> f64 {
        self.0.w
    }

    pub fn to_array(self) -> [f64; 4] {
        self.0.into()
    }

    pub fn conjugate(&self) -> UnitQuaternion {
        UnitQuaternion::canonical(self.0.conjugate())
    }

    /// Rotation composition `self ⊗ rhs`.
    pub fn compose(&self, rhs: &UnitQuaternion) -> UnitQuaternion {
        UnitQuaternion::from_product(self.0.hamilton(&rhs.0))
    }

    /// Sandwich product `r ⊗ (0, v) ⊗ r*`.
    pub fn rotate(&self, v: &Vector3) -> Vector3 {
        self.0.hamilton(&Quaternion::pure(v)).hamilton(&self.0.conjugate()).vector()
    }

    /// Geodesic rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        2.0 * self.0.w.abs().min(1.0).acos()
    }

    /// Unit rotation axis, or `None` for (near) identity.
    pub fn axis(&self) -> Option<Vector3> {
        let v = self.0.vector();
        let n = v.norm();
        (n > 1e-12).then(|| v / n)
    }

    /// Angle of the relative rotation taking `self` to `other`.
    pub fn angle_to(&self, other: &UnitQuaternion) -> f64 {
        let d = self.0.dot(&other.0).abs().min(1.0);
        2.0 * d.acos()
    }

    /// Shortest-arc interpolation; `t = 0` gives `self`, `t = 1` gives `other`.
    pub fn slerp(&self, other: &UnitQuaternion, t: f64) -> UnitQuaternion {
        let rel = self.conjugate().compose(other);
        match rel.axis() {
            Some(axis) => {
                let step = UnitQuaternion::from_axis_angle(&axis, rel.angle() * t)
                    .expect("axis is unit length");
                self.compose(&step)
            }
            None => *self,
        }
    }
}

/// Rotation closeness `min(‖q1 − q2‖, ‖q1 + q2‖)`, in `[0, √2]`.
pub fn quat_distance(q1: &UnitQuaternion, q2: &UnitQuaternion) -> f64 {
    q1.0.distance(&q2.0)
}

/// Roll, pitch and yaw in radians, applied yaw first (intrinsic Z–Y–X).
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub const fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        EulerAngles { roll, pitch, yaw }
    }

    pub fn to_quat(&self) -> UnitQuaternion {
        UnitQuaternion::from_euler(self)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.roll, self.pitch, self.yaw]
    }
}

/// A rigid-body configuration as a unit dual quaternion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    real: UnitQuaternion,
    dual: Quaternion,
}

impl Default for Pose {
    fn default() -> Self {
        Pose::identity()
    }
}

impl Pose {
    pub const fn identity() -> Self {
        Pose { real: UnitQuaternion::identity(), dual: Quaternion::zero() }
    }

    /// Pose with translation `p` and rotation `r`: `dual = ½ (0, p) ⊗ r`.
    pub fn new(p: &Vector3, r: &UnitQuaternion) -> Self {
        let dual = Quaternion::pure(p).hamilton(r.quaternion()).scale(0.5);
        Pose { real: *r, dual }
    }

    pub fn from_translation(p: &Vector3) -> Self {
        Pose::new(p, &UnitQuaternion::identity())
    }

    pub fn from_rotation(r: &UnitQuaternion) -> Self {
        Pose::new(&Vector3::zeros(), r)
    }

    /// Validates a raw `(real, dual)` pair as a unit dual quaternion.
    pub fn from_raw(real: Quaternion, dual: Quaternion) -> Result<Self, GeomError> {
        if !real.is_finite() || !dual.is_finite() {
            return Err(GeomError::NonFinite);
        }
        let norm_error = (real.norm() - 1.0).abs();
        let plucker = real.dot(&dual).abs();
        if norm_error > UNIT_TOLERANCE || plucker > UNIT_TOLERANCE {
            return Err(GeomError::InvalidPose { norm_error, plucker });
        }
        Ok(Pose::from_product(real, dual))
    }

    /// Cleans up a product of unit dual quaternions: renormalizes on drift,
    /// re-imposes the Plücker condition and moves to the canonical hemisphere.
    fn from_product(real: Quaternion, dual: Quaternion) -> Self {
        let n = real.norm();
        let (mut real, mut dual) = if (n - 1.0).abs() > DRIFT_TOLERANCE {
            (real.scale(1.0 / n), dual.scale(1.0 / n))
        } else {
            (real, dual)
        };
        let residual = real.dot(&dual);
        if residual.abs() > DRIFT_TOLERANCE {
            dual = dual - real.scale(residual);
        }
        if !real.is_canonical() {
            real = -real;
            dual = -dual;
        }
        Pose { real: UnitQuaternion(real), dual }
    }

    pub fn real(&self) -> &UnitQuaternion {
        &self.real
    }

    pub fn dual(&self) -> &Quaternion {
        &self.dual
    }

    pub fn rotation(&self) -> UnitQuaternion {
        self.real
    }

    /// Translation recovered as `2 · dual ⊗ real*`.
    pub fn translation(&self) -> Vector3 {
        self.dual.hamilton(&self.real.0.conjugate()).scale(2.0).vector()
    }

    pub fn to_parts(&self) -> (Vector3, UnitQuaternion) {
        (self.translation(), self.real)
    }

    /// Dual-quaternion product `self ⊗ rhs` (apply `rhs` in the frame of `self`).
    pub fn compose(&self, rhs: &Pose) -> Pose {
        let r1 = &self.real.0;
        let r2 = &rhs.real.0;
        let real = r1.hamilton(r2);
        let dual = r1.hamilton(&rhs.dual) + self.dual.hamilton(r2);
        Pose::from_product(real, dual)
    }

    /// Conjugates both parts; the inverse transform for unit dual quaternions.
    pub fn conjugate(&self) -> Pose {
        Pose::from_product(self.real.0.conjugate(), self.dual.conjugate())
    }

    /// `self* ⊗ other`: the transform from `self` to `other` expressed in `self`.
    pub fn relative_to(&self, other: &Pose) -> Pose {
        self.conjugate().compose(other)
    }

    /// `|‖real‖ − 1|` and `|real · dual|`.
    pub fn invariant_residuals(&self) -> (f64, f64) {
        ((self.real.0.norm() - 1.0).abs(), self.real.0.dot(&self.dual).abs())
    }

    pub fn is_valid(&self) -> bool {
        let (n, p) = self.invariant_residuals();
        n <= UNIT_TOLERANCE && p <= UNIT_TOLERANCE
    }

    /// Position and rotation interpolation: linear in position, shortest arc in rotation.
    pub fn interpolate(&self, other: &Pose, t: f64) -> Pose {
        let (p0, r0) = self.to_parts();
        let (p1, r1) = other.to_parts();
        Pose::new(&(p0 + (p1 - p0) * t), &r0.slerp(&r1, t))
    }
}

impl Mul for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

/// Serialized pose: `{"p": [x, y, z], "r": [w, x, y, z]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub p: [f64; 3],
    pub r: [f64; 4],
}

impl From<&Pose> for PoseRecord {
    fn from(pose: &Pose) -> Self {
        let (p, r) = pose.to_parts();
        PoseRecord { p: [p.x, p.y, p.z], r: r.to_array() }
    }
}

impl TryFrom<&PoseRecord> for Pose {
    type Error = GeomError;
    fn try_from(rec: &PoseRecord) -> Result<Self, GeomError> {
        let p = Vector3::from(rec.p);
        if !p.iter().all(|c| c.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let r = UnitQuaternion::try_new(Quaternion::from(rec.r))?;
        Ok(Pose::new(&p, &r))
    }
}

impl Serialize for Pose {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PoseRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pose {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rec = PoseRecord::deserialize(d)?;
        Pose::try_from(&rec).map_err(serde::de::Error::custom)
    }
}
