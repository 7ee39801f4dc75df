//! Angle conventions and direction arithmetic.
//!
//! World frame: right-handed, transmitter at the origin, `x` along the
//! reference boresight, `z` up. A [`Direction`] is an (azimuth, elevation)
//! pair where azimuth is measured counter-clockwise from `x` in the
//! horizontal plane (seen from above) and elevation is measured from the
//! horizontal plane towards `+z`.
//!
//! The link experiment fixes the user's "zenith angle" at zero while sweeping
//! azimuth over ±90°. That angle is housed here as elevation-from-horizontal,
//! so zero means the user is in the antenna's horizontal plane.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{ensure_finite, Error, Result};
use crate::Scalar;

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle<T: Scalar>(a: T) -> Result<T> {
    ensure_finite("angle", a)?;
    Ok(wrap_unchecked(a))
}

pub(crate) fn wrap_unchecked<T: Scalar>(a: T) -> T {
    let pi = T::PI();
    let two_pi = T::TAU();
    let mut r = a - two_pi * ((a + pi) / two_pi).floor();
    // floor() can leave r one ulp outside the half-open interval
    if r >= pi {
        r -= two_pi;
    }
    if r < -pi {
        r += two_pi;
    }
    r
}

/// A bearing: azimuth in `[-π, π)`, elevation in `[-π/2, π/2]`, both radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Direction<T> {
    azimuth: T,
    elevation: T,
}

impl<T: Scalar> Direction<T> {
    /// Builds a direction, wrapping azimuth. Elevation outside `[-π/2, π/2]`
    /// is rejected rather than folded over the pole.
    pub fn new(azimuth: T, elevation: T) -> Result<Self> {
        let azimuth = wrap_angle(azimuth)?;
        ensure_finite("elevation", elevation)?;
        let half_pi = T::FRAC_PI_2();
        if elevation < -half_pi || elevation > half_pi {
            return Err(Error::OutOfRange {
                name: "elevation",
                value: elevation.as_f64(),
                range: "[-pi/2, pi/2]",
            });
        }
        Ok(Self { azimuth, elevation })
    }

    /// Convenience constructor taking degrees.
    pub fn from_degrees(azimuth_deg: T, elevation_deg: T) -> Result<Self> {
        Self::new(azimuth_deg.to_radians(), elevation_deg.to_radians())
    }

    /// Reference boresight `(0, 0)`.
    pub fn boresight() -> Self {
        Self {
            azimuth: T::zero(),
            elevation: T::zero(),
        }
    }

    pub fn azimuth(&self) -> T {
        self.azimuth
    }

    pub fn elevation(&self) -> T {
        self.elevation
    }

    pub fn to_unit(&self) -> Position3<T> {
        direction_to_unit(*self)
    }
}

/// Cartesian point or vector in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Position3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    /// Like [`Position3::new`] but rejects non-finite coordinates.
    pub fn try_new(x: T, y: T, z: T) -> Result<Self> {
        ensure_finite("x", x)?;
        ensure_finite("y", y)?;
        ensure_finite("z", z)?;
        Ok(Self { x, y, z })
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(&self) -> T {
        self.x.hypot(self.y).hypot(self.z)
    }

    pub fn scale(&self, k: T) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }

    /// Straight-line interpolation, `s = 0` at `self`, `s = 1` at `other`.
    pub fn lerp(&self, other: &Self, s: T) -> Self {
        *self + (*other - *self).scale(s)
    }
}

impl<T: Scalar> Add for Position3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<T: Scalar> Sub for Position3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<T: Scalar> Neg for Position3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Scalar> Mul<T> for Position3<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        self.scale(k)
    }
}

/// Unit vector `(cos e cos a, cos e sin a, sin e)`.
pub fn direction_to_unit<T: Scalar>(d: Direction<T>) -> Position3<T> {
    let (sa, ca) = d.azimuth.sin_cos();
    let (se, ce) = d.elevation.sin_cos();
    Position3::new(ce * ca, ce * sa, se)
}

/// Bearing and range of a point seen from the origin.
///
/// At the poles azimuth is not identifiable and is reported as 0.
pub fn position_to_direction<T: Scalar>(p: Position3<T>) -> Result<(Direction<T>, T)> {
    if !p.is_finite() {
        return Err(Error::NonFinite { name: "position" });
    }
    let range = p.norm();
    if range <= T::zero() {
        return Err(Error::ZeroVector);
    }
    let horizontal = p.x.hypot(p.y);
    let azimuth = if horizontal > T::zero() {
        p.y.atan2(p.x)
    } else {
        T::zero()
    };
    let elevation = p.z.atan2(horizontal);
    Ok((Direction::new(azimuth, elevation)?, range))
}

/// Great-circle angle between two directions, in `[0, π]`.
///
/// Evaluated as `atan2(|u × v|, u · v)`, which equals the arccosine of the
/// dot product but keeps full precision near 0 and π.
pub fn angular_separation<T: Scalar>(d1: Direction<T>, d2: Direction<T>) -> T {
    let u = direction_to_unit(d1);
    let v = direction_to_unit(d2);
    let dot = u.dot(&v).max(-T::one()).min(T::one());
    u.cross(&v).norm().atan2(dot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0).unwrap(), 0.0);
        assert!((wrap_angle(3.0 * PI / 2.0).unwrap() + FRAC_PI_2).abs() < 1e-12);
        assert!((wrap_angle(-7.0 * PI / 2.0).unwrap() - FRAC_PI_2).abs() < 1e-12);
        assert_eq!(wrap_angle(PI).unwrap(), -PI);
        assert_eq!(wrap_angle(-PI).unwrap(), -PI);
        assert!(wrap_angle(f64::NAN).is_err());
        assert!(wrap_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn elevation_out_of_range_rejected() {
        assert!(Direction::new(0.0, 1.6).is_err());
        assert!(Direction::new(0.0, -1.6).is_err());
        assert!(Direction::new(0.0, FRAC_PI_2).is_ok());
        // azimuth is wrapped, not rejected
        let d = Direction::new(3.0 * PI, 0.0).unwrap();
        assert!((d.azimuth() + PI).abs() < 1e-12);
    }

    #[test]
    fn unit_vector_examples() {
        let u = direction_to_unit(Direction::new(0.0, 0.0).unwrap());
        assert_eq!((u.x, u.y, u.z), (1.0, 0.0, 0.0));
        let u = direction_to_unit(Direction::new(FRAC_PI_2, 0.0).unwrap());
        assert!(u.x.abs() < 1e-15 && (u.y - 1.0).abs() < 1e-15 && u.z == 0.0);
        let u = direction_to_unit(Direction::new(FRAC_PI_4, FRAC_PI_4).unwrap());
        assert!((u.x - 0.5).abs() < 1e-12);
        assert!((u.y - 0.5).abs() < 1e-12);
        assert!((u.z - 0.707_106_781_186_547_5).abs() < 1e-12);
    }

    #[test]
    fn inverse_examples() {
        let (d, r) = position_to_direction(Position3::new(10.0, 0.0, 0.0)).unwrap();
        assert_eq!((d.azimuth(), d.elevation(), r), (0.0, 0.0, 10.0));
        let (d, r) = position_to_direction(Position3::new(0.0, 5.0, 0.0)).unwrap();
        assert!((d.azimuth() - FRAC_PI_2).abs() < 1e-15 && r == 5.0);
        let (d, r) = position_to_direction(Position3::new(1.0, 1.0, 2f64.sqrt())).unwrap();
        assert!((d.azimuth() - FRAC_PI_4).abs() < 1e-12);
        assert!((d.elevation() - FRAC_PI_4).abs() < 1e-12);
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_vector_and_pole() {
        assert_eq!(
            position_to_direction(Position3::<f64>::origin()),
            Err(Error::ZeroVector)
        );
        let (d, _) = position_to_direction(Position3::new(0.0, 0.0, -3.0)).unwrap();
        assert_eq!(d.azimuth(), 0.0);
        assert_eq!(d.elevation(), -FRAC_PI_2);
    }

    #[test]
    fn separation_examples() {
        let a = Direction::new(0.0, 0.0).unwrap();
        assert_eq!(angular_separation(a, a), 0.0);
        let b = Direction::new(FRAC_PI_2, 0.0).unwrap();
        assert!((angular_separation(a, b) - FRAC_PI_2).abs() < 1e-15);
        let c = Direction::new(FRAC_PI_3, 0.0).unwrap();
        // dot product is cos(pi/3) = 0.5
        assert!((angular_separation(a, c) - 0.5f64.acos()).abs() < 1e-15);
        let back = Direction::new(-PI, 0.0).unwrap();
        assert!((angular_separation(a, back) - PI).abs() < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let d = Direction::<f32>::from_degrees(30.0, 10.0).unwrap();
        let (back, r) = position_to_direction(d.to_unit().scale(4.0)).unwrap();
        assert!((back.azimuth() - d.azimuth()).abs() < 1e-6);
        assert!((r - 4.0).abs() < 1e-5);
    }
}
