//! Actuation chain: pulse-width servo axes, PID steering and the
//! scan/track supervisor.
//!
//! The PID law produces an angular-rate command per axis. The servo integrates
//! that command under its slew limit, so saturation shows up as a rate limit
//! rather than a position jump.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure_finite, invalid, Result};
use crate::geometry::{wrap_unchecked, Direction};
use crate::tracking::{TrackState, TrackerOutput};
use crate::vision::{CameraModel, Pixel};
use crate::Scalar;

/// A value that may have been clamped into range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped<T> {
    pub value: T,
    pub clamped: bool,
}

/// One servo axis: linear pulse-width map, slew limit and angle sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServoAxisModel<T> {
    pub pulse_min_us: T,
    pub pulse_max_us: T,
    pub angle_min: T,
    pub angle_max: T,
    /// Slew limit, rad/s.
    pub max_speed: T,
    pub sensor_noise_sigma: T,
    pub current_angle: T,
}

/// Outcome of one servo tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServoReading<T> {
    /// Target after clamping to the mechanical range.
    pub target: T,
    pub commanded_pulse_us: T,
    pub angle: T,
    /// Angle sensor output, true angle plus Gaussian noise.
    pub sensed: T,
}

impl<T: Scalar> ServoAxisModel<T> {
    /// 1000–2000 µs over ±90°, π rad/s, noiseless sensor, centred.
    pub fn azimuth_default() -> Self {
        Self {
            pulse_min_us: T::lit(1000.0),
            pulse_max_us: T::lit(2000.0),
            angle_min: -T::FRAC_PI_2(),
            angle_max: T::FRAC_PI_2(),
            max_speed: T::PI(),
            sensor_noise_sigma: T::zero(),
            current_angle: T::zero(),
        }
    }

    /// Same pulse range mapped onto ±45°.
    pub fn elevation_default() -> Self {
        Self {
            angle_min: -T::FRAC_PI_4(),
            angle_max: T::FRAC_PI_4(),
            ..Self::azimuth_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("pulse_min_us", self.pulse_min_us),
            ("pulse_max_us", self.pulse_max_us),
            ("angle_min", self.angle_min),
            ("angle_max", self.angle_max),
            ("max_speed", self.max_speed),
            ("sensor_noise_sigma", self.sensor_noise_sigma),
            ("current_angle", self.current_angle),
        ] {
            ensure_finite(name, x)?;
        }
        if self.pulse_min_us >= self.pulse_max_us {
            return Err(invalid("pulse_min_us", "must be below pulse_max_us"));
        }
        if self.angle_min >= self.angle_max {
            return Err(invalid("angle_min", "must be below angle_max"));
        }
        if self.max_speed <= T::zero() {
            return Err(invalid("max_speed", "must be positive"));
        }
        if self.sensor_noise_sigma < T::zero() {
            return Err(invalid("sensor_noise_sigma", "must be non-negative"));
        }
        if self.current_angle < self.angle_min || self.current_angle > self.angle_max {
            return Err(invalid("current_angle", "must lie within [angle_min, angle_max]"));
        }
        Ok(())
    }

    pub fn clamp_angle(&self, a: T) -> T {
        a.max(self.angle_min).min(self.angle_max)
    }

    /// Linear pulse → angle map; out-of-range pulses are clamped.
    pub fn pulse_to_angle(&self, pulse_us: T) -> Clamped<T> {
        let p = pulse_us.max(self.pulse_min_us).min(self.pulse_max_us);
        let s = (p - self.pulse_min_us) / (self.pulse_max_us - self.pulse_min_us);
        Clamped {
            value: self.angle_min + s * (self.angle_max - self.angle_min),
            clamped: p != pulse_us,
        }
    }

    /// Inverse of [`Self::pulse_to_angle`]; out-of-range angles are clamped.
    pub fn angle_to_pulse(&self, angle: T) -> Clamped<T> {
        let a = self.clamp_angle(angle);
        let s = (a - self.angle_min) / (self.angle_max - self.angle_min);
        Clamped {
            value: self.pulse_min_us + s * (self.pulse_max_us - self.pulse_min_us),
            clamped: a != angle,
        }
    }

    /// Moves toward `target_angle` by at most `max_speed · dt`.
    pub fn servo_step<R: Rng + ?Sized>(&mut self, target_angle: T, dt: T, rng: &mut R) -> Result<ServoReading<T>> {
        ensure_finite("dt", dt)?;
        if dt <= T::zero() {
            return Err(invalid("dt", "must be positive"));
        }
        ensure_finite("target_angle", target_angle)?;
        let target = self.clamp_angle(target_angle);
        let max_step = self.max_speed * dt;
        let delta = target - self.current_angle;
        self.current_angle = if delta.abs() <= max_step {
            target
        } else {
            self.current_angle + max_step * delta.signum()
        };
        let sensed = if self.sensor_noise_sigma > T::zero() {
            let n: f64 = rng.sample(StandardNormal);
            self.current_angle + self.sensor_noise_sigma * T::lit(n)
        } else {
            self.current_angle
        };
        Ok(ServoReading {
            target,
            commanded_pulse_us: self.angle_to_pulse(target).value,
            angle: self.current_angle,
            sensed,
        })
    }
}

/// Discrete PID with output clamp and conditional-integration anti-windup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidState<T> {
    pub kp: T,
    pub ki: T,
    pub kd: T,
    pub integral: T,
    pub prev_error: T,
    pub output_limit: T,
    pub integral_limit: T,
}

impl<T: Scalar> PidState<T> {
    pub fn new(kp: T, ki: T, kd: T, output_limit: T, integral_limit: T) -> Result<Self> {
        let s = Self {
            kp,
            ki,
            kd,
            integral: T::zero(),
            prev_error: T::zero(),
            output_limit,
            integral_limit,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("kp", self.kp), ("ki", self.ki), ("kd", self.kd)] {
            ensure_finite(name, x)?;
            if x < T::zero() {
                return Err(invalid(name, "must be non-negative"));
            }
        }
        for (name, x) in [("output_limit", self.output_limit), ("integral_limit", self.integral_limit)] {
            ensure_finite(name, x)?;
            if x <= T::zero() {
                return Err(invalid(name, "must be positive"));
            }
        }
        Ok(())
    }

    pub fn reset(&mut self) {
        self.integral = T::zero();
        self.prev_error = T::zero();
    }

    /// `kp·e + ki·∫e + kd·ė`, clamped to `±output_limit`. The integral is
    /// clamped to `±integral_limit` and frozen while the output saturates.
    pub fn pid_step(&mut self, error: T, dt: T) -> Result<T> {
        ensure_finite("error", error)?;
        ensure_finite("dt", dt)?;
        if dt <= T::zero() {
            return Err(invalid("dt", "must be positive"));
        }
        let derivative = (error - self.prev_error) / dt;
        let candidate = (self.integral + error * dt)
            .max(-self.integral_limit)
            .min(self.integral_limit);
        let raw = self.kp * error + self.ki * candidate + self.kd * derivative;
        let out = if raw.abs() > self.output_limit {
            // saturated: skip integration
            let held = self.kp * error + self.ki * self.integral + self.kd * derivative;
            held.max(-self.output_limit).min(self.output_limit)
        } else {
            self.integral = candidate;
            raw
        };
        self.prev_error = error;
        Ok(out)
    }
}

/// Per-axis PID pair turning pointing error into rate commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringController<T> {
    pub azimuth: PidState<T>,
    pub elevation: PidState<T>,
}

/// Rate command for both axes, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SteeringCommand<T> {
    pub azimuth_rate: T,
    pub elevation_rate: T,
    pub azimuth_error: T,
    pub elevation_error: T,
}

impl<T: Scalar> SteeringController<T> {
    pub fn reset(&mut self) {
        self.azimuth.reset();
        self.elevation.reset();
    }

    /// PID on the wrapped per-axis error, plus an optional feed-forward rate
    /// (the target's own angular velocity). The sum is clamped to each
    /// axis' output limit.
    pub fn steer(
        &mut self,
        current: Direction<T>,
        target: Direction<T>,
        feedforward: (T, T),
        dt: T,
    ) -> Result<SteeringCommand<T>> {
        let az_err = wrap_unchecked(target.azimuth() - current.azimuth());
        let el_err = target.elevation() - current.elevation();
        let az = self.azimuth.pid_step(az_err, dt)? + feedforward.0;
        let el = self.elevation.pid_step(el_err, dt)? + feedforward.1;
        let lim_az = self.azimuth.output_limit;
        let lim_el = self.elevation.output_limit;
        Ok(SteeringCommand {
            azimuth_rate: az.max(-lim_az).min(lim_az),
            elevation_rate: el.max(-lim_el).min(lim_el),
            azimuth_error: az_err,
            elevation_error: el_err,
        })
    }
}

/// Free-function form of [`SteeringController::steer`] without feed-forward.
pub fn steer<T: Scalar>(
    controller: &mut SteeringController<T>,
    current: Direction<T>,
    target: Direction<T>,
    dt: T,
) -> Result<SteeringCommand<T>> {
    controller.steer(current, target, (T::zero(), T::zero()), dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Scanning,
    Tracking,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Scanning => "scanning",
            Mode::Tracking => "tracking",
        }
    }
}

/// World-frame target bearing with its angular velocity, stamped at the
/// capture time of the frame it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetEstimate<T> {
    pub direction: Direction<T>,
    pub azimuth_rate: T,
    pub elevation_rate: T,
    pub stamp: T,
}

impl<T: Scalar> TargetEstimate<T> {
    /// Constant-rate extrapolation to time `t`.
    pub fn at(&self, t: T) -> Direction<T> {
        let dt = t - self.stamp;
        let el = (self.direction.elevation() + self.elevation_rate * dt)
            .max(-T::FRAC_PI_2())
            .min(T::FRAC_PI_2());
        Direction::new(self.direction.azimuth() + self.azimuth_rate * dt, el)
            .expect("extrapolated direction is finite and clamped")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupervisorDecision<T> {
    pub mode: Mode,
    pub target: Option<TargetEstimate<T>>,
    /// Mode changed on this frame.
    pub transitioned: bool,
}

/// Scan/track supervisor.
///
/// While scanning with no live tracks the camera is only triggered every
/// `scan_period`; as soon as any track exists, or while tracking, every
/// frame is captured. A confirmed track is locked on the frame it is
/// confirmed; losing the locked track returns to scanning on the frame it
/// is deleted.
///
/// The locked target is followed in the world frame by an α-β filter fed
/// with the bearing of each matched detection, which removes the camera's
/// own rotation from the estimate and tracks a constant-rate sweep with no
/// steady-state lag.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisorState<T> {
    mode: Mode,
    locked_track_id: Option<u64>,
    frames_since_seen: u32,
    scan_period: T,
    last_capture: Option<T>,
    last_time: Option<T>,
    alpha: T,
    beta: T,
    estimate: Option<TargetEstimate<T>>,
}

impl<T: Scalar> SupervisorState<T> {
    pub fn new(scan_period: T) -> Result<Self> {
        ensure_finite("scan_period", scan_period)?;
        if scan_period <= T::zero() {
            return Err(invalid("scan_period", "must be positive"));
        }
        Ok(Self {
            mode: Mode::Scanning,
            locked_track_id: None,
            frames_since_seen: 0,
            scan_period,
            last_capture: None,
            last_time: None,
            alpha: T::lit(0.6),
            beta: T::lit(0.26),
            estimate: None,
        })
    }

    /// Overrides the bearing filter gains (defaults 0.6 and 0.26).
    pub fn with_smoothing(mut self, alpha: T, beta: T) -> Result<Self> {
        ensure_finite("alpha", alpha)?;
        ensure_finite("beta", beta)?;
        if !(alpha > T::zero() && alpha <= T::one()) {
            return Err(invalid("alpha", "must lie in (0, 1]"));
        }
        if !(beta >= T::zero() && beta < T::lit(4.0) - T::two() * alpha) {
            return Err(invalid("beta", "must lie in [0, 4 - 2 alpha)"));
        }
        self.alpha = alpha;
        self.beta = beta;
        Ok(self)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn locked_track_id(&self) -> Option<u64> {
        self.locked_track_id
    }

    pub fn frames_since_seen(&self) -> u32 {
        self.frames_since_seen
    }

    pub fn scan_period(&self) -> T {
        self.scan_period
    }

    /// Decides whether the camera fires at `now`, and records the capture.
    pub fn camera_trigger(&mut self, now: T, has_live_tracks: bool) -> bool {
        let due = match self.last_capture {
            None => true,
            Some(last) => now - last >= self.scan_period * T::lit(1.0 - 1e-9),
        };
        let fire = self.mode == Mode::Tracking || has_live_tracks || due;
        if fire {
            self.last_capture = Some(now);
        }
        fire
    }

    /// Processes one captured frame. `cam` must carry the optical axis at
    /// capture time.
    pub fn supervisor_step(
        &mut self,
        output: &TrackerOutput<T>,
        cam: &CameraModel<T>,
        now: T,
    ) -> Result<SupervisorDecision<T>> {
        ensure_finite("now", now)?;
        if let Some(prev) = self.last_time {
            if now < prev {
                return Err(invalid("now", "time must be non-decreasing"));
            }
        }
        self.last_time = Some(now);
        let before = self.mode;

        if let Some(id) = self.locked_track_id {
            if output.deleted(id) || !output.confirmed.iter().any(|t| t.track_id == id) {
                self.mode = Mode::Scanning;
                self.locked_track_id = None;
                self.frames_since_seen = 0;
            }
        }
        if self.mode == Mode::Scanning {
            if let Some(best) = output
                .confirmed
                .iter()
                .max_by(|a, b| a.hits.cmp(&b.hits).then(b.track_id.cmp(&a.track_id)))
            {
                self.mode = Mode::Tracking;
                self.locked_track_id = Some(best.track_id);
            }
        }

        let previous_lock = if before == Mode::Tracking { self.estimate } else { None };
        let target = match self.locked_track_id {
            Some(id) => {
                let track = output
                    .confirmed
                    .iter()
                    .find(|t| t.track_id == id)
                    .expect("locked track is confirmed");
                self.frames_since_seen = track.time_since_update;
                let fresh = self.mode != before || previous_lock.is_none();
                Some(if fresh {
                    target_from_track(track, cam, now)
                } else {
                    self.filter_bearing(previous_lock.expect("checked above"), track, cam, now)
                })
            }
            None => None,
        };
        self.estimate = target;
        debug_assert_eq!(self.locked_track_id.is_some(), self.mode == Mode::Tracking);
        Ok(SupervisorDecision {
            mode: self.mode,
            target,
            transitioned: self.mode != before,
        })
    }
}

impl<T: Scalar> SupervisorState<T> {
    /// α-β step in the world frame. A coasting track (no detection this
    /// frame) only propagates the previous estimate.
    fn filter_bearing(
        &self,
        prev: TargetEstimate<T>,
        track: &TrackState<T>,
        cam: &CameraModel<T>,
        now: T,
    ) -> TargetEstimate<T> {
        let predicted = prev.at(now);
        let dt = now - prev.stamp;
        let Some(px) = track.measurement else {
            return TargetEstimate {
                direction: predicted,
                stamp: now,
                ..prev
            };
        };
        if dt <= T::zero() {
            return prev;
        }
        let measured = cam.ray_direction(px);
        let r_az = wrap_unchecked(measured.azimuth() - predicted.azimuth());
        let r_el = measured.elevation() - predicted.elevation();
        let el = (predicted.elevation() + self.alpha * r_el)
            .max(-T::FRAC_PI_2())
            .min(T::FRAC_PI_2());
        TargetEstimate {
            direction: Direction::new(predicted.azimuth() + self.alpha * r_az, el)
                .expect("filtered bearing is finite"),
            azimuth_rate: prev.azimuth_rate + self.beta * r_az / dt,
            elevation_rate: prev.elevation_rate + self.beta * r_el / dt,
            stamp: now,
        }
    }
}

/// World bearing and angular rate of a track. The tracker runs on
/// motion-compensated image coordinates, so the image velocity over one
/// frame interval is the target's own angular motion.
fn target_from_track<T: Scalar>(track: &TrackState<T>, cam: &CameraModel<T>, now: T) -> TargetEstimate<T> {
    let here = cam.ray_direction(track.position());
    let h = T::one() / cam.frame_rate_hz();
    let (du, dv) = track.velocity();
    let ahead = cam.ray_direction(Pixel {
        u: track.mean[0] + du * h,
        v: track.mean[1] + dv * h,
    });
    TargetEstimate {
        direction: here,
        azimuth_rate: wrap_unchecked(ahead.azimuth() - here.azimuth()) / h,
        elevation_rate: (ahead.elevation() - here.elevation()) / h,
        stamp: now,
    }
}
