//! Rigid-body math for head-relative features.
//!
//! Coordinates are right-handed with `+y` up. A head (camera) looks along its
//! local `+z` axis with local `+x` to its right. Quaternions use the Hamilton
//! product and are stored `xyzw`; `a * b` applies `b` first, then `a`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn abs(self) -> Vec3 {
        Vec3::new(self.x.abs(), self.y.abs(), self.z.abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Component by axis index (0 = x, 1 = y, 2 = z).
    pub fn axis(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis index {i} out of range"),
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn lerp(self, other: Vec3, s: f64) -> Vec3 {
        self + (other - self) * s
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Serialize for Vec3 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vec3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        <[f64; 3]>::deserialize(d).map(Vec3::from)
    }
}

/// Unit quaternion, Hamilton convention, `xyzw` storage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

impl Default for Quat {
    fn default() -> Self {
        Quat::IDENTITY
    }
}

impl Quat {
    pub const IDENTITY: Quat = Quat::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64, w: f64) -> Self {
        Quat { x, y, z, w }
    }

    /// Rotation of `angle` radians about `axis` (right-hand rule).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Quat {
        let n = axis.norm();
        if n == 0.0 {
            return Quat::IDENTITY;
        }
        let a = axis * (1.0 / n);
        let (s, c) = (angle * 0.5).sin_cos();
        Quat::new(a.x * s, a.y * s, a.z * s, c)
    }

    /// Yaw about `+y` followed by pitch about the yawed `+x`.
    pub fn from_yaw_pitch(yaw: f64, pitch: f64) -> Quat {
        Quat::from_axis_angle(Vec3::Y, yaw) * Quat::from_axis_angle(Vec3::X, pitch)
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w).sqrt()
    }

    pub fn normalized(self) -> Quat {
        let n = self.norm();
        Quat::new(self.x / n, self.y / n, self.z / n, self.w / n)
    }

    pub fn conjugate(self) -> Quat {
        Quat::new(-self.x, -self.y, -self.z, self.w)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.w.is_finite()
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.z, self.w]
    }

    fn vector(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    /// Unchecked rotation kernel; see [`quat_rotate`] for the validated entry point.
    pub fn rotate(self, v: Vec3) -> Vec3 {
        // v' = v + 2w(u×v) + 2u×(u×v)
        let u = self.vector();
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }
}

impl From<[f64; 4]> for Quat {
    fn from(a: [f64; 4]) -> Self {
        Quat::new(a[0], a[1], a[2], a[3])
    }
}

impl Mul for Quat {
    type Output = Quat;
    fn mul(self, b: Quat) -> Quat {
        let a = self;
        Quat::new(
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        )
    }
}

impl Serialize for Quat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Quat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        <[f64; 4]>::deserialize(d).map(Quat::from)
    }
}

fn finite_q(q: Quat, op: &'static str) -> Result<()> {
    if q.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(op))
    }
}

fn finite_v(v: Vec3, op: &'static str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(op))
    }
}

pub fn quat_compose(a: Quat, b: Quat) -> Result<Quat> {
    finite_q(a, "quat_compose")?;
    finite_q(b, "quat_compose")?;
    Ok(a * b)
}

pub fn quat_inverse(q: Quat) -> Result<Quat> {
    finite_q(q, "quat_inverse")?;
    Ok(q.conjugate())
}

pub fn quat_rotate(q: Quat, v: Vec3) -> Result<Vec3> {
    finite_q(q, "quat_rotate")?;
    finite_v(v, "quat_rotate")?;
    Ok(q.rotate(v))
}

/// Object position expressed in the head frame.
pub fn rel_pos(head_pos: Vec3, head_rot: Quat, obj_pos: Vec3) -> Result<Vec3> {
    finite_v(head_pos, "rel_pos")?;
    finite_v(obj_pos, "rel_pos")?;
    finite_q(head_rot, "rel_pos")?;
    Ok(head_rot.conjugate().rotate(obj_pos - head_pos))
}

/// Object orientation expressed in the head frame.
pub fn rel_rot(head_rot: Quat, obj_rot: Quat) -> Result<Quat> {
    finite_q(head_rot, "rel_rot")?;
    finite_q(obj_rot, "rel_rot")?;
    Ok((head_rot.conjugate() * obj_rot).normalized())
}

/// Single-step backward difference between consecutive samples.
pub fn backward_difference(prev: Vec3, cur: Vec3, fps: f64) -> Vec3 {
    (cur - prev) * fps
}

/// Velocity at `index` by backward difference; zero at the first sample.
pub fn estimate_velocity(positions: &[Vec3], index: usize, fps: f64) -> Result<Vec3> {
    if positions.is_empty() {
        return Err(Error::Empty("estimate_velocity: position series"));
    }
    if index >= positions.len() {
        return Err(Error::InvalidArgument(format!(
            "estimate_velocity: index {index} outside series of length {}",
            positions.len()
        )));
    }
    if !(fps > 0.0 && fps.is_finite()) {
        return Err(Error::InvalidArgument(format!("estimate_velocity: fps {fps} must be > 0")));
    }
    if index == 0 {
        return Ok(Vec3::ZERO);
    }
    let (prev, cur) = (positions[index - 1], positions[index]);
    finite_v(prev, "estimate_velocity")?;
    finite_v(cur, "estimate_velocity")?;
    Ok(backward_difference(prev, cur, fps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrustumParams {
    /// Vertical field of view in degrees.
    pub vertical_fov: f64,
    pub aspect: f64,
    pub near: f64,
    pub far: f64,
}

impl Default for FrustumParams {
    fn default() -> Self {
        FrustumParams { vertical_fov: 60.0, aspect: 16.0 / 9.0, near: 0.1, far: 100.0 }
    }
}

impl FrustumParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.vertical_fov > 0.0
            && self.vertical_fov < 180.0
            && self.aspect > 0.0
            && self.near > 0.0
            && self.far > self.near
            && self.far.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid frustum parameters {self:?}")))
        }
    }

    /// The six planes `(normal, offset)` in head-local coordinates; a point `p`
    /// is inside a plane when `normal · p + offset >= 0`.
    fn local_planes(&self) -> [(Vec3, f64); 6] {
        let half_v = (self.vertical_fov.to_radians() * 0.5).tan();
        let half_h = half_v * self.aspect;
        let side = |a: Vec3, b: Vec3| -> Vec3 {
            // orient each side plane so the optical axis is inside
            let n = a.cross(b);
            let n = if n.z < 0.0 { -n } else { n };
            n * (1.0 / n.norm())
        };
        // edge directions of the view pyramid
        let tl = Vec3::new(-half_h, half_v, 1.0);
        let tr = Vec3::new(half_h, half_v, 1.0);
        let bl = Vec3::new(-half_h, -half_v, 1.0);
        let br = Vec3::new(half_h, -half_v, 1.0);
        [
            (Vec3::Z, -self.near),
            (-Vec3::Z, self.far),
            (side(bl, tl), 0.0),
            (side(tr, br), 0.0),
            (side(tl, tr), 0.0),
            (side(br, bl), 0.0),
        ]
    }
}

/// Object classes whose `inView` is always true.
pub fn always_in_view(class: crate::session::ObjectClass) -> bool {
    class.is_body()
}

/// Frustum test of a world-space axis-aligned box against the head camera.
///
/// The box is rejected only when it lies entirely on the outside of at least
/// one plane, so boxes straddling a corner of the frustum count as visible.
pub fn in_view(
    head_pos: Vec3,
    head_rot: Quat,
    aabb_center: Vec3,
    aabb_half_extents: Vec3,
    params: &FrustumParams,
    object_class: crate::session::ObjectClass,
) -> Result<bool> {
    params.validate()?;
    if aabb_half_extents.x < 0.0 || aabb_half_extents.y < 0.0 || aabb_half_extents.z < 0.0 {
        return Err(Error::InvalidArgument(format!("in_view: negative half extents {aabb_half_extents:?}")));
    }
    finite_v(head_pos, "in_view")?;
    finite_v(aabb_center, "in_view")?;
    finite_v(aabb_half_extents, "in_view")?;
    finite_q(head_rot, "in_view")?;
    if always_in_view(object_class) {
        return Ok(true);
    }
    for (local_n, local_d) in params.local_planes() {
        // world plane: n·x + d >= 0 with n = R n_local, d = d_local - n·head_pos
        let n = head_rot.rotate(local_n);
        let d = local_d - n.dot(head_pos);
        let radius = aabb_half_extents.dot(n.abs());
        if n.dot(aabb_center) + d + radius < 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}
