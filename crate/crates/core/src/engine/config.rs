//! Scenario description as read from a config file.
//!
//! Angles are given in degrees (`*_deg`, `*_deg_s`) to keep files readable;
//! everything is converted to radians when the scenario is built. Every
//! field has a default, so an empty file describes the reference sweep:
//! 5.8 GHz, 10 dBm, 2 Mbps 16-QAM, a 10 dBi / 60° antenna and a user walking
//! a 10 m arc from −90° to +90° azimuth in 20 s.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tracking::CHI2_95_2DOF;

/// One violated rule, keyed by the dotted config path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub rule: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.rule)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub duration_s: f64,
    pub control_rate_hz: f64,
    pub antenna: AntennaConfig,
    pub pattern: PatternConfig,
    pub link: LinkConfig,
    pub camera: CameraConfig,
    pub detector: DetectorConfig,
    pub tracker: TrackerConfig,
    pub servo: ServoConfig,
    pub pid: PidConfig,
    pub supervisor: SupervisorConfig,
    pub trajectory: TrajectoryConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            duration_s: 20.0,
            control_rate_hz: 50.0,
            antenna: AntennaConfig::default(),
            pattern: PatternConfig::default(),
            link: LinkConfig::default(),
            camera: CameraConfig::default(),
            detector: DetectorConfig::default(),
            tracker: TrackerConfig::default(),
            servo: ServoConfig::default(),
            pid: PidConfig::default(),
            supervisor: SupervisorConfig::default(),
            trajectory: TrajectoryConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AntennaModeKind {
    #[default]
    Rotatable,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaConfig {
    pub mode: AntennaModeKind,
    /// Boresight used in `fixed` mode.
    pub fixed_azimuth_deg: f64,
    pub fixed_elevation_deg: f64,
    /// Start the rotatable antenna pointed at the user's initial position
    /// instead of at the servo's `initial_deg` angles.
    pub start_aligned: bool,
}

impl Default for AntennaConfig {
    fn default() -> Self {
        Self {
            mode: AntennaModeKind::Rotatable,
            fixed_azimuth_deg: 0.0,
            fixed_elevation_deg: 0.0,
            start_aligned: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternConfig {
    pub peak_gain_dbi: f64,
    pub hpbw_deg: f64,
    pub floor_attenuation_db: f64,
}

impl Default for PatternConfig {
    fn default() -> Self {
        Self {
            peak_gain_dbi: 10.0,
            hpbw_deg: 60.0,
            floor_attenuation_db: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub carrier_hz: f64,
    pub tx_power_dbm: f64,
    pub bit_rate_bps: f64,
    pub bits_per_symbol: u32,
    pub noise_figure_db: f64,
    /// Defaults to the symbol rate when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rx_bandwidth_hz: Option<f64>,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 5.8e9,
            tx_power_dbm: 10.0,
            bit_rate_bps: 2e6,
            bits_per_symbol: 4,
            noise_figure_db: 6.0,
            rx_bandwidth_hz: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CameraMountKind {
    /// Camera rides on the gimbal and looks along the sensed boresight.
    #[default]
    Gimbal,
    /// Camera bolted to the base, looking along `mount_*_deg`.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub width_px: u32,
    pub height_px: u32,
    pub hfov_deg: f64,
    pub frame_rate_hz: f64,
    pub mount: CameraMountKind,
    pub mount_azimuth_deg: f64,
    pub mount_elevation_deg: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            width_px: 640,
            height_px: 480,
            hfov_deg: 60.0,
            frame_rate_hz: 30.0,
            mount: CameraMountKind::Gimbal,
            mount_azimuth_deg: 0.0,
            mount_elevation_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub detection_prob: f64,
    pub pixel_noise_sigma: f64,
    pub false_alarm_rate: f64,
    pub target_height_m: f64,
    pub target_width_m: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            detection_prob: 1.0,
            pixel_noise_sigma: 0.0,
            false_alarm_rate: 0.0,
            target_height_m: 1.7,
            target_width_m: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub process_noise_accel: f64,
    pub measurement_noise: f64,
    pub gate_threshold: f64,
    pub n_init: u32,
    pub max_age: u32,
    pub initial_velocity_std: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            process_noise_accel: 50.0,
            measurement_noise: 1.0,
            gate_threshold: CHI2_95_2DOF,
            n_init: 3,
            max_age: 30,
            initial_velocity_std: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxisConfig {
    pub pulse_min_us: f64,
    pub pulse_max_us: f64,
    pub angle_min_deg: f64,
    pub angle_max_deg: f64,
    pub max_speed_deg_s: f64,
    pub sensor_noise_deg: f64,
    pub initial_deg: f64,
}

impl AxisConfig {
    fn with_range(limit_deg: f64) -> Self {
        Self {
            pulse_min_us: 1000.0,
            pulse_max_us: 2000.0,
            angle_min_deg: -limit_deg,
            angle_max_deg: limit_deg,
            max_speed_deg_s: 180.0,
            sensor_noise_deg: 0.0,
            initial_deg: 0.0,
        }
    }
}

impl Default for AxisConfig {
    fn default() -> Self {
        Self::with_range(90.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServoConfig {
    pub azimuth: AxisConfig,
    pub elevation: AxisConfig,
}

impl Default for ServoConfig {
    fn default() -> Self {
        Self {
            azimuth: AxisConfig::with_range(90.0),
            elevation: AxisConfig::with_range(45.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidAxisConfig {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub output_limit_deg_s: f64,
    /// Integral clamp, rad·s.
    pub integral_limit: f64,
}

impl Default for PidAxisConfig {
    fn default() -> Self {
        Self {
            kp: 8.0,
            ki: 0.0,
            kd: 0.05,
            output_limit_deg_s: 180.0,
            integral_limit: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidConfig {
    pub azimuth: PidAxisConfig,
    pub elevation: PidAxisConfig,
    /// Add the tracked target's angular rate to the PID rate command.
    pub feedforward: bool,
}

impl Default for PidConfig {
    fn default() -> Self {
        Self {
            azimuth: PidAxisConfig::default(),
            elevation: PidAxisConfig::default(),
            feedforward: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SupervisorConfig {
    pub scan_period_s: f64,
}

impl Default for SupervisorConfig {
    fn default() -> Self {
        Self { scan_period_s: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointConfig {
    pub t: f64,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectoryConfig {
    ArcSweep {
        radius_m: f64,
        elevation_deg: f64,
        az_start_deg: f64,
        az_end_deg: f64,
        angular_rate_deg_s: f64,
    },
    LinearWalk {
        start: [f64; 3],
        end: [f64; 3],
        speed_m_s: f64,
    },
    Waypoints {
        points: Vec<WaypointConfig>,
    },
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig::ArcSweep {
            radius_m: 10.0,
            elevation_deg: 0.0,
            az_start_deg: -90.0,
            az_end_deg: 90.0,
            angular_rate_deg_s: 9.0,
        }
    }
}

struct Checker {
    issues: Vec<ConfigIssue>,
}

impl Checker {
    fn fail(&mut self, path: &str, rule: impl Into<String>) {
        self.issues.push(ConfigIssue {
            path: path.to_string(),
            rule: rule.into(),
        });
    }

    fn finite(&mut self, path: &str, x: f64) -> bool {
        if x.is_finite() {
            true
        } else {
            self.fail(path, "must be finite");
            false
        }
    }

    fn positive(&mut self, path: &str, x: f64) {
        if self.finite(path, x) && x <= 0.0 {
            self.fail(path, format!("must be > 0 (got {x})"));
        }
    }

    fn non_negative(&mut self, path: &str, x: f64) {
        if self.finite(path, x) && x < 0.0 {
            self.fail(path, format!("must be >= 0 (got {x})"));
        }
    }

    fn within(&mut self, path: &str, x: f64, lo: f64, hi: f64) {
        if self.finite(path, x) && !(lo..=hi).contains(&x) {
            self.fail(path, format!("must lie in [{lo}, {hi}] (got {x})"));
        }
    }

    fn open(&mut self, path: &str, x: f64, lo: f64, hi: f64) {
        if self.finite(path, x) && !(x > lo && x < hi) {
            self.fail(path, format!("must lie in ({lo}, {hi}) (got {x})"));
        }
    }

    fn position(&mut self, path: &str, p: &[f64; 3]) {
        if p.iter().any(|c| !c.is_finite()) {
            self.fail(path, "coordinates must be finite");
        }
    }
}

impl ScenarioConfig {
    /// Checks every nested invariant and reports all violations at once.
    pub fn validate(&self) -> Vec<ConfigIssue> {
        let mut c = Checker { issues: Vec::new() };

        c.positive("duration_s", self.duration_s);
        c.positive("control_rate_hz", self.control_rate_hz);

        c.within("antenna.fixed_azimuth_deg", self.antenna.fixed_azimuth_deg, -360.0, 360.0);
        c.within("antenna.fixed_elevation_deg", self.antenna.fixed_elevation_deg, -90.0, 90.0);

        c.finite("pattern.peak_gain_dbi", self.pattern.peak_gain_dbi);
        c.within("pattern.hpbw_deg", self.pattern.hpbw_deg, f64::MIN_POSITIVE, 180.0);
        c.positive("pattern.floor_attenuation_db", self.pattern.floor_attenuation_db);

        let l = &self.link;
        c.positive("link.carrier_hz", l.carrier_hz);
        c.finite("link.tx_power_dbm", l.tx_power_dbm);
        c.positive("link.bit_rate_bps", l.bit_rate_bps);
        if l.bits_per_symbol < 1 {
            c.fail("link.bits_per_symbol", "must be >= 1");
        }
        c.finite("link.noise_figure_db", l.noise_figure_db);
        if let Some(bw) = l.rx_bandwidth_hz {
            c.positive("link.rx_bandwidth_hz", bw);
        }

        let cam = &self.camera;
        if cam.width_px < 1 {
            c.fail("camera.width_px", "must be >= 1");
        }
        if cam.height_px < 1 {
            c.fail("camera.height_px", "must be >= 1");
        }
        c.open("camera.hfov_deg", cam.hfov_deg, 0.0, 180.0);
        c.positive("camera.frame_rate_hz", cam.frame_rate_hz);
        c.within("camera.mount_azimuth_deg", cam.mount_azimuth_deg, -360.0, 360.0);
        c.within("camera.mount_elevation_deg", cam.mount_elevation_deg, -90.0, 90.0);
        if self.control_rate_hz.is_finite()
            && cam.frame_rate_hz.is_finite()
            && cam.frame_rate_hz > 0.0
            && self.control_rate_hz < cam.frame_rate_hz
        {
            c.fail("control_rate_hz", "must be >= camera.frame_rate_hz");
        }

        let d = &self.detector;
        c.within("detector.detection_prob", d.detection_prob, 0.0, 1.0);
        c.non_negative("detector.pixel_noise_sigma", d.pixel_noise_sigma);
        c.non_negative("detector.false_alarm_rate", d.false_alarm_rate);
        c.positive("detector.target_height_m", d.target_height_m);
        c.positive("detector.target_width_m", d.target_width_m);

        let t = &self.tracker;
        c.positive("tracker.process_noise_accel", t.process_noise_accel);
        c.positive("tracker.measurement_noise", t.measurement_noise);
        c.positive("tracker.gate_threshold", t.gate_threshold);
        c.positive("tracker.initial_velocity_std", t.initial_velocity_std);
        if t.n_init < 1 {
            c.fail("tracker.n_init", "must be >= 1");
        }
        if t.max_age < 1 {
            c.fail("tracker.max_age", "must be >= 1");
        }

        for (name, a) in [("azimuth", &self.servo.azimuth), ("elevation", &self.servo.elevation)] {
            let p = |f: &str| format!("servo.{name}.{f}");
            let ok_pulse = c.finite(&p("pulse_min_us"), a.pulse_min_us) & c.finite(&p("pulse_max_us"), a.pulse_max_us);
            if ok_pulse && a.pulse_min_us >= a.pulse_max_us {
                c.fail(
                    &format!("{} / {}", p("pulse_min_us"), p("pulse_max_us")),
                    format!("pulse_min_us ({}) must be < pulse_max_us ({})", a.pulse_min_us, a.pulse_max_us),
                );
            }
            let ok_angle = c.finite(&p("angle_min_deg"), a.angle_min_deg) & c.finite(&p("angle_max_deg"), a.angle_max_deg);
            if ok_angle && a.angle_min_deg >= a.angle_max_deg {
                c.fail(
                    &format!("{} / {}", p("angle_min_deg"), p("angle_max_deg")),
                    format!("angle_min_deg ({}) must be < angle_max_deg ({})", a.angle_min_deg, a.angle_max_deg),
                );
            }
            let limit = if name == "azimuth" { 180.0 } else { 90.0 };
            if ok_angle && (a.angle_min_deg < -limit || a.angle_max_deg > limit) {
                c.fail(&p("angle_min_deg"), format!("axis range must stay within ±{limit} deg"));
            }
            c.positive(&p("max_speed_deg_s"), a.max_speed_deg_s);
            c.non_negative(&p("sensor_noise_deg"), a.sensor_noise_deg);
            if c.finite(&p("initial_deg"), a.initial_deg)
                && ok_angle
                && !(a.angle_min_deg..=a.angle_max_deg).contains(&a.initial_deg)
            {
                c.fail(&p("initial_deg"), "must lie within [angle_min_deg, angle_max_deg]");
            }
        }

        for (name, g) in [("azimuth", &self.pid.azimuth), ("elevation", &self.pid.elevation)] {
            let p = |f: &str| format!("pid.{name}.{f}");
            c.non_negative(&p("kp"), g.kp);
            c.non_negative(&p("ki"), g.ki);
            c.non_negative(&p("kd"), g.kd);
            c.positive(&p("output_limit_deg_s"), g.output_limit_deg_s);
            c.positive(&p("integral_limit"), g.integral_limit);
        }

        c.positive("supervisor.scan_period_s", self.supervisor.scan_period_s);

        match &self.trajectory {
            TrajectoryConfig::ArcSweep {
                radius_m,
                elevation_deg,
                az_start_deg,
                az_end_deg,
                angular_rate_deg_s,
            } => {
                c.positive("trajectory.radius_m", *radius_m);
                c.within("trajectory.elevation_deg", *elevation_deg, -90.0, 90.0);
                c.finite("trajectory.az_start_deg", *az_start_deg);
                c.finite("trajectory.az_end_deg", *az_end_deg);
                c.non_negative("trajectory.angular_rate_deg_s", *angular_rate_deg_s);
            }
            TrajectoryConfig::LinearWalk { start, end, speed_m_s } => {
                c.position("trajectory.start", start);
                c.position("trajectory.end", end);
                c.non_negative("trajectory.speed_m_s", *speed_m_s);
            }
            TrajectoryConfig::Waypoints { points } => {
                if points.is_empty() {
                    c.fail("trajectory.points", "needs at least one waypoint");
                }
                for (i, w) in points.iter().enumerate() {
                    c.finite(&format!("trajectory.points[{i}].t"), w.t);
                    c.position(&format!("trajectory.points[{i}].position"), &w.position);
                }
                if points.windows(2).any(|w| !(w[1].t > w[0].t)) {
                    c.fail("trajectory.points", "waypoint times must be strictly increasing");
                }
            }
        }

        c.issues
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert_eq!(ScenarioConfig::default().validate(), vec![]);
    }

    #[test]
    fn issues_are_aggregated() {
        let mut cfg = ScenarioConfig::default();
        cfg.duration_s = -1.0;
        cfg.camera.hfov_deg = 200.0;
        cfg.servo.azimuth.pulse_min_us = 2500.0;
        let issues = cfg.validate();
        let paths: Vec<&str> = issues.iter().map(|i| i.path.as_str()).collect();
        assert!(paths.contains(&"duration_s"));
        assert!(paths.contains(&"camera.hfov_deg"));
        assert!(paths
            .iter()
            .any(|p| p.contains("servo.azimuth.pulse_min_us") && p.contains("servo.azimuth.pulse_max_us")));
    }

    #[test]
    fn control_rate_must_cover_camera() {
        let mut cfg = ScenarioConfig::default();
        cfg.control_rate_hz = 20.0;
        assert_eq!(cfg.validate()[0].path, "control_rate_hz");
    }

    #[test]
    fn waypoint_times_checked() {
        let mut cfg = ScenarioConfig::default();
        cfg.trajectory = TrajectoryConfig::Waypoints {
            points: vec![
                WaypointConfig {
                    t: 1.0,
                    position: [1.0, 0.0, 0.0],
                },
                WaypointConfig {
                    t: 1.0,
                    position: [2.0, 0.0, 0.0],
                },
            ],
        };
        assert_eq!(cfg.validate()[0].path, "trajectory.points");
    }
}
