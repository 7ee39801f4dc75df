//! User motion models.

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::geometry::{direction_to_unit, Direction, Position3};

/// Ground-truth user motion, angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectorySpec {
    /// Constant range and elevation, azimuth swept at a constant rate and
    /// held once it reaches `az_end`.
    ArcSweep {
        radius: f64,
        elevation: f64,
        az_start: f64,
        az_end: f64,
        angular_rate: f64,
    },
    /// Uniform motion from `start` toward `end`, stopping there.
    LinearWalk {
        start: Position3<f64>,
        end: Position3<f64>,
        speed: f64,
    },
    /// Piecewise-linear through timed points, held outside their time span.
    Waypoints(Vec<(f64, Position3<f64>)>),
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            TrajectorySpec::ArcSweep {
                radius,
                elevation,
                az_start,
                az_end,
                angular_rate,
            } => {
                for (n, x) in [
                    ("radius", *radius),
                    ("elevation", *elevation),
                    ("az_start", *az_start),
                    ("az_end", *az_end),
                    ("angular_rate", *angular_rate),
                ] {
                    ensure_finite(n, x)?;
                }
                if *radius <= 0.0 {
                    return Err(invalid("radius", "must be positive"));
                }
                if *angular_rate < 0.0 {
                    return Err(invalid("angular_rate", "must be non-negative"));
                }
                Direction::new(*az_start, *elevation)?;
            }
            TrajectorySpec::LinearWalk { start, end, speed } => {
                Position3::try_new(start.x, start.y, start.z)?;
                Position3::try_new(end.x, end.y, end.z)?;
                ensure_finite("speed", *speed)?;
                if *speed < 0.0 {
                    return Err(invalid("speed", "must be non-negative"));
                }
            }
            TrajectorySpec::Waypoints(points) => {
                if points.is_empty() {
                    return Err(invalid("waypoints", "need at least one point"));
                }
                for (t, p) in points {
                    ensure_finite("waypoint time", *t)?;
                    Position3::try_new(p.x, p.y, p.z)?;
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(invalid("waypoints", "times must be strictly increasing"));
                }
            }
        }
        Ok(())
    }
}

/// User position at time `t` (seconds since the start of the scenario).
pub fn advance_trajectory(spec: &TrajectorySpec, t: f64) -> Result<Position3<f64>> {
    ensure_finite("t", t)?;
    if t < 0.0 {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            range: "[0, duration]",
        });
    }
    Ok(match spec {
        TrajectorySpec::ArcSweep {
            radius,
            elevation,
            az_start,
            az_end,
            angular_rate,
        } => {
            let span = az_end - az_start;
            let travelled = (angular_rate * t).min(span.abs());
            let az = az_start + travelled * span.signum();
            let u = direction_to_unit(Direction::new(az, *elevation)?);
            u.scale(*radius)
        }
        TrajectorySpec::LinearWalk { start, end, speed } => {
            let length = (*end - *start).norm();
            if length == 0.0 {
                *start
            } else {
                start.lerp(end, (speed * t / length).min(1.0))
            }
        }
        TrajectorySpec::Waypoints(points) => {
            let (t0, p0) = points[0];
            if t <= t0 {
                return Ok(p0);
            }
            match points.windows(2).find(|w| t <= w[1].0) {
                Some(w) => {
                    let (ta, pa) = w[0];
                    let (tb, pb) = w[1];
                    pa.lerp(&pb, (t - ta) / (tb - ta))
                }
                None => points[points.len() - 1].1,
            }
        }
    })
}
