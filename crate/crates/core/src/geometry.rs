//! Planar geometry and pitch configuration.
//!
//! Coordinates are normalized so the attacked goal is always at positive x.
//! Facing the goal, "left" is positive y.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at `angle` radians from the +x axis.
    pub fn from_angle(angle: f64) -> Self {
        Vec2::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Reflection across the x axis (the pitch's long center line).
    pub fn mirror_y(self) -> Self {
        Vec2::new(self.x, -self.y)
    }

    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    /// Rescale to at most `max_norm`, keeping direction.
    pub fn clamp_norm(self, max_norm: f64) -> Vec2 {
        let n = self.norm();
        if n > max_norm && n > 0.0 {
            self * (max_norm / n)
        } else {
            self
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A half-line with unit direction; used for the shooting line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    origin: Vec2,
    direction: Vec2,
}

impl Ray {
    pub fn new(origin: Vec2, direction: Vec2) -> Result<Self> {
        if !origin.is_finite() {
            return Err(Error::domain("ray origin must be finite"));
        }
        let direction =
            direction.normalized().ok_or_else(|| Error::domain("ray direction must be non-zero and finite"))?;
        Ok(Ray { origin, direction })
    }

    /// Ray from `from` through `to`.
    pub fn through(from: Vec2, to: Vec2) -> Result<Self> {
        Ray::new(from, to - from)
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn direction(&self) -> Vec2 {
        self.direction
    }

    pub fn at(&self, s: f64) -> Vec2 {
        self.origin + self.direction * s
    }
}

/// Unsigned angle at `origin` between the rays towards `a` and `b`, in `[0, π]`.
pub fn opening_angle(origin: Vec2, a: Vec2, b: Vec2) -> Result<f64> {
    if !(origin.is_finite() && a.is_finite() && b.is_finite()) {
        return Err(Error::domain("opening_angle: non-finite input"));
    }
    let u = a - origin;
    let v = b - origin;
    if u == Vec2::ZERO || v == Vec2::ZERO {
        return Err(Error::domain("opening_angle: origin coincides with an endpoint"));
    }
    // atan2 of cross/dot is accurate near 0 and π, unlike acos of the dot product.
    Ok(u.cross(v).abs().atan2(u.dot(v)))
}

/// Perpendicular distance from `point` to the infinite line carrying `line`,
/// positive when the point lies to the left of the direction of travel.
pub fn signed_offset(line: &Ray, point: Vec2) -> f64 {
    line.direction().cross(point - line.origin())
}

/// Pitch and goal dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub field_length: f64,
    pub field_width: f64,
    pub goal_width: f64,
    pub goal_line_x: f64,
    pub penalty_area_depth: f64,
    pub penalty_area_width: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            field_length: 105.0,
            field_width: 68.0,
            goal_width: 14.02,
            goal_line_x: 52.5,
            penalty_area_depth: 16.5,
            penalty_area_width: 40.32,
        }
    }
}

impl FieldConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.field_length,
            self.field_width,
            self.goal_width,
            self.goal_line_x,
            self.penalty_area_depth,
            self.penalty_area_width,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::config("field dimensions must be positive and finite"));
        }
        if self.goal_width >= self.field_width {
            return Err(Error::config("goal_width must be smaller than field_width"));
        }
        if (self.goal_line_x - self.field_length / 2.0).abs() > 1e-9 {
            return Err(Error::config("goal_line_x must equal field_length / 2"));
        }
        if self.penalty_area_width > self.field_width || self.penalty_area_depth > self.field_length / 2.0 {
            return Err(Error::config("penalty area must fit in one half of the field"));
        }
        Ok(())
    }

    /// Post at positive y.
    pub fn left_post(&self) -> Vec2 {
        Vec2::new(self.goal_line_x, self.goal_width / 2.0)
    }

    /// Post at negative y.
    pub fn right_post(&self) -> Vec2 {
        Vec2::new(self.goal_line_x, -self.goal_width / 2.0)
    }

    pub fn goal_center(&self) -> Vec2 {
        Vec2::new(self.goal_line_x, 0.0)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.is_finite() && p.x.abs() <= self.field_length / 2.0 && p.y.abs() <= self.field_width / 2.0
    }

    pub fn in_penalty_band(&self, p: Vec2) -> bool {
        p.y.abs() <= self.penalty_area_width / 2.0
    }

    pub fn between_posts(&self, lateral: f64) -> bool {
        lateral.abs() <= self.goal_width / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn opening_angle_straight_out() {
        let f = FieldConfig::default();
        let a = opening_angle(Vec2::new(f.goal_line_x - 10.0, 0.0), f.left_post(), f.right_post()).unwrap();
        let expected = 2.0 * (7.01f64 / 10.0).atan();
        assert!((a - expected).abs() < 1e-12);
        assert!((a - 1.2227).abs() < 1e-4);
    }

    #[test]
    fn opening_angle_degenerate_cases() {
        let a = Vec2::new(1.0, 0.0);
        let b = Vec2::new(3.0, 0.0);
        assert_eq!(opening_angle(Vec2::ZERO, a, b).unwrap(), 0.0);
        assert!((opening_angle(Vec2::new(2.0, 0.0), a, b).unwrap() - PI).abs() < 1e-15);
        assert!(opening_angle(a, a, b).is_err());
        assert!(opening_angle(Vec2::new(f64::NAN, 0.0), a, b).is_err());
    }

    #[test]
    fn signed_offset_examples() {
        let line = Ray::new(Vec2::ZERO, Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(signed_offset(&line, Vec2::new(5.0, 3.0)), 3.0);
        assert_eq!(signed_offset(&line, Vec2::new(7.0, 0.0)), 0.0);
        assert_eq!(signed_offset(&line, Vec2::new(5.0, -2.0)), -2.0);
    }

    #[test]
    fn ray_rejects_zero_direction() {
        assert!(Ray::new(Vec2::ZERO, Vec2::ZERO).is_err());
        let r = Ray::new(Vec2::ZERO, Vec2::new(3.0, 4.0)).unwrap();
        assert!((r.direction().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_field_is_valid() {
        FieldConfig::default().validate().unwrap();
        let bad = FieldConfig { goal_width: 80.0, ..FieldConfig::default() };
        assert!(bad.validate().is_err());
    }

    fn pt() -> impl Strategy<Value = Vec2> {
        (-50.0..50.0f64, -50.0..50.0f64).prop_map(|(x, y)| Vec2::new(x, y))
    }

    fn rigid(p: Vec2, theta: f64, t: Vec2) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y) + t
    }

    proptest! {
        #[test]
        fn opening_angle_rigid_invariant(o in pt(), a in pt(), b in pt(), theta in -PI..PI, t in pt()) {
            prop_assume!(o.distance(a) > 1e-3 && o.distance(b) > 1e-3);
            let before = opening_angle(o, a, b).unwrap();
            let after = opening_angle(rigid(o, theta, t), rigid(a, theta, t), rigid(b, theta, t)).unwrap();
            prop_assert!((before - after).abs() < 1e-9);
            prop_assert!((0.0..=PI).contains(&before));
        }

        #[test]
        fn signed_offset_mirror_and_bound(o in pt(), d in pt(), p in pt()) {
            prop_assume!(d.norm() > 1e-3);
            let line = Ray::new(o, d).unwrap();
            let off = signed_offset(&line, p);
            // reflect p across the line
            let foot = line.at((p - o).dot(line.direction()));
            let mirrored = foot * 2.0 - p;
            prop_assert!((signed_offset(&line, mirrored) + off).abs() < 1e-9);
            prop_assert!(off.abs() <= (p - o).norm() + 1e-12);
        }
    }
}
