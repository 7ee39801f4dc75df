use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{AntennaModeKind, CameraMountKind, ScenarioConfig, TrajectoryConfig};
use super::summary::{summarize, Summary};
use super::trajectory::{advance_trajectory, TrajectorySpec};
use super::EngineError;
use crate::antenna::{gain_dbi, RadiationPattern};
use crate::channel::{ber_16qam, ebn0_db, received_power_dbm, fspl_db, snr_db, LinkParams};
use crate::control::{Mode, PidState, ServoAxisModel, SteeringController, SupervisorState, TargetEstimate};
use crate::geometry::{angular_separation, position_to_direction, Direction, Position3};
use crate::tracking::{TrackStatus, Tracker, TrackerParams};
use crate::vision::{synth_detect, CameraModel, DetectorParams};

/// Stream id of the servo sensor noise; detector frames use streams
/// `0, 1, 2, ...` of the same seed.
const SENSOR_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AntennaMode {
    Rotatable,
    FixedOrientation(Direction<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CameraMount {
    Gimbal,
    Fixed(Direction<f64>),
}

/// Fully built, validated scenario in SI units.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub seed: u64,
    pub duration: f64,
    pub control_rate_hz: f64,
    pub antenna_mode: AntennaMode,
    pub start_aligned: bool,
    pub pattern: RadiationPattern<f64>,
    pub link: LinkParams<f64>,
    pub camera: CameraModel<f64>,
    pub camera_mount: CameraMount,
    pub detector: DetectorParams<f64>,
    pub tracker: TrackerParams<f64>,
    pub servo_azimuth: ServoAxisModel<f64>,
    pub servo_elevation: ServoAxisModel<f64>,
    pub steering: SteeringController<f64>,
    pub feedforward: bool,
    pub scan_period: f64,
    pub trajectory: TrajectorySpec,
}

fn pos(p: [f64; 3]) -> Position3<f64> {
    Position3::new(p[0], p[1], p[2])
}

impl Scenario {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self, EngineError> {
        let issues = cfg.validate();
        if !issues.is_empty() {
            return Err(EngineError::Config(issues));
        }
        let rad = f64::to_radians;
        let antenna_mode = match cfg.antenna.mode {
            AntennaModeKind::Rotatable => AntennaMode::Rotatable,
            AntennaModeKind::Fixed => AntennaMode::FixedOrientation(Direction::from_degrees(
                cfg.antenna.fixed_azimuth_deg,
                cfg.antenna.fixed_elevation_deg,
            )?),
        };
        let cam = &cfg.camera;
        let camera_mount = match cam.mount {
            CameraMountKind::Gimbal => CameraMount::Gimbal,
            CameraMountKind::Fixed => {
                CameraMount::Fixed(Direction::from_degrees(cam.mount_azimuth_deg, cam.mount_elevation_deg)?)
            }
        };
        let camera = CameraModel::new(
            cam.width_px,
            cam.height_px,
            rad(cam.hfov_deg),
            Direction::boresight(),
            cam.frame_rate_hz,
        )?;
        let d = &cfg.detector;
        let detector = DetectorParams {
            detection_prob: d.detection_prob,
            pixel_noise_sigma: d.pixel_noise_sigma,
            false_alarm_rate: d.false_alarm_rate,
            rng_seed: cfg.seed,
            target_height_m: d.target_height_m,
            target_width_m: d.target_width_m,
        };
        detector.validate()?;
        let t = &cfg.tracker;
        let tracker = TrackerParams {
            process_noise_accel: t.process_noise_accel,
            measurement_noise: t.measurement_noise,
            gate_threshold: t.gate_threshold,
            n_init: t.n_init,
            max_age: t.max_age,
            initial_velocity_std: t.initial_velocity_std,
        };
        tracker.validate()?;
        let axis = |a: &super::config::AxisConfig| -> crate::Result<ServoAxisModel<f64>> {
            let s = ServoAxisModel {
                pulse_min_us: a.pulse_min_us,
                pulse_max_us: a.pulse_max_us,
                angle_min: rad(a.angle_min_deg),
                angle_max: rad(a.angle_max_deg),
                max_speed: rad(a.max_speed_deg_s),
                sensor_noise_sigma: rad(a.sensor_noise_deg),
                current_angle: rad(a.initial_deg),
            };
            s.validate()?;
            Ok(s)
        };
        let pid = |g: &super::config::PidAxisConfig| {
            PidState::new(g.kp, g.ki, g.kd, rad(g.output_limit_deg_s), g.integral_limit)
        };
        let l = &cfg.link;
        let trajectory = match &cfg.trajectory {
            TrajectoryConfig::ArcSweep {
                radius_m,
                elevation_deg,
                az_start_deg,
                az_end_deg,
                angular_rate_deg_s,
            } => TrajectorySpec::ArcSweep {
                radius: *radius_m,
                elevation: rad(*elevation_deg),
                az_start: rad(*az_start_deg),
                az_end: rad(*az_end_deg),
                angular_rate: rad(*angular_rate_deg_s),
            },
            TrajectoryConfig::LinearWalk { start, end, speed_m_s } => TrajectorySpec::LinearWalk {
                start: pos(*start),
                end: pos(*end),
                speed: *speed_m_s,
            },
            TrajectoryConfig::Waypoints { points } => {
                TrajectorySpec::Waypoints(points.iter().map(|w| (w.t, pos(w.position))).collect())
            }
        };
        trajectory.validate()?;
        Ok(Self {
            seed: cfg.seed,
            duration: cfg.duration_s,
            control_rate_hz: cfg.control_rate_hz,
            antenna_mode,
            start_aligned: cfg.antenna.start_aligned,
            pattern: RadiationPattern::new(
                cfg.pattern.peak_gain_dbi,
                rad(cfg.pattern.hpbw_deg),
                cfg.pattern.floor_attenuation_db,
            )?,
            link: LinkParams::new(
                l.carrier_hz,
                l.tx_power_dbm,
                l.bit_rate_bps,
                l.bits_per_symbol,
                l.noise_figure_db,
                l.rx_bandwidth_hz,
            )?,
            camera,
            camera_mount,
            detector,
            tracker,
            servo_azimuth: axis(&cfg.servo.azimuth)?,
            servo_elevation: axis(&cfg.servo.elevation)?,
            steering: SteeringController {
                azimuth: pid(&cfg.pid.azimuth)?,
                elevation: pid(&cfg.pid.elevation)?,
            },
            feedforward: cfg.pid.feedforward,
            scan_period: cfg.supervisor.scan_period_s,
            trajectory,
        })
    }

    /// Index of the last control tick; ticks run `0..=last_tick()`.
    pub fn last_tick(&self) -> u64 {
        (self.duration * self.control_rate_hz + 1e-9).floor() as u64
    }

    /// Control tick on which camera frame `j` is captured.
    pub fn frame_tick(&self, j: u64) -> u64 {
        (j as f64 * self.control_rate_hz / self.camera.frame_rate_hz()).round() as u64
    }
}

/// One control tick. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub tick: u64,
    pub t: f64,
    pub user_position: Position3<f64>,
    pub user_direction: Direction<f64>,
    pub range_m: f64,
    pub mode: Mode,
    pub locked_track_id: Option<u64>,
    pub boresight: Direction<f64>,
    pub pointing_error: f64,
    pub tx_gain_dbi: f64,
    pub fspl_db: f64,
    pub prx_dbm: f64,
    pub snr_db: f64,
    pub ber: f64,
    /// Pulse width commanded on this tick.
    pub azimuth_pulse_us: f64,
    pub elevation_pulse_us: f64,
    /// Angle sensor readings the controller saw on this tick.
    pub azimuth_sensed: f64,
    pub elevation_sensed: f64,
    /// Steering errors on this tick; zero while no target is held.
    pub azimuth_error: f64,
    pub elevation_error: f64,
    pub frame_captured: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRow {
    pub frame: u64,
    pub t: f64,
    pub center_u: f64,
    pub center_v: f64,
    pub box_w: f64,
    pub box_h: f64,
    pub confidence: f64,
    /// `None` for clutter.
    pub truth_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackRow {
    pub frame: u64,
    pub t: f64,
    pub track_id: u64,
    pub status: TrackStatus,
    pub u: f64,
    pub v: f64,
    pub du: f64,
    pub dv: f64,
    pub hits: u32,
    pub time_since_update: u32,
    pub gate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<StepRecord>,
    pub summary: Summary,
    pub detections: Vec<DetectionRow>,
    pub tracks: Vec<TrackRow>,
    /// Camera frame slots on the control timeline.
    pub camera_frames: u64,
    /// Frames actually captured (scan gating skips some while scanning).
    pub frames_captured: u64,
}

/// Runs a scenario from its config. See [`run_built`].
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, EngineError> {
    run_built(&Scenario::from_config(cfg)?)
}

/// Fixed-step loop. On each tick: advance the user, capture a frame if one
/// is due (tracker and supervisor step on it), evaluate the link for the
/// current boresight, then issue the steering command that moves the servo
/// toward the next tick.
pub fn run_built(sc: &Scenario) -> Result<RunOutput, EngineError> {
    let dt = 1.0 / sc.control_rate_hz;
    let last = sc.last_tick();

    let mut servo_az = sc.servo_azimuth;
    let mut servo_el = sc.servo_elevation;
    let user0 = advance_trajectory(&sc.trajectory, 0.0)?;
    match sc.antenna_mode {
        AntennaMode::Rotatable if sc.start_aligned => {
            let (d0, _) = position_to_direction(user0)?;
            servo_az.current_angle = servo_az.clamp_angle(d0.azimuth());
            servo_el.current_angle = servo_el.clamp_angle(d0.elevation());
        }
        AntennaMode::Rotatable => {}
        AntennaMode::FixedOrientation(d) => {
            servo_az.current_angle = servo_az.clamp_angle(d.azimuth());
            servo_el.current_angle = servo_el.clamp_angle(d.elevation());
        }
    }
    let mut sensed = (servo_az.current_angle, servo_el.current_angle);
    let mut sensor_rng = ChaCha8Rng::seed_from_u64(sc.seed);
    sensor_rng.set_stream(SENSOR_STREAM);

    let mut tracker = Tracker::new(sc.tracker)?;
    let mut supervisor = SupervisorState::new(sc.scan_period)?;
    let mut steering = sc.steering;
    let mut target: Option<TargetEstimate<f64>> = None;

    let mut records = Vec::with_capacity(last as usize + 1);
    let mut detections_log = Vec::new();
    let mut tracks_log = Vec::new();
    let mut next_frame = 0u64;
    let mut frames_captured = 0u64;
    let mut last_capture: Option<f64> = None;
    let mut last_cam: Option<CameraModel<f64>> = None;

    for tick in 0..=last {
        let t = tick as f64 * dt;
        let user = advance_trajectory(&sc.trajectory, t)?;
        let (user_dir, range) = position_to_direction(user)?;

        let boresight = match sc.antenna_mode {
            AntennaMode::Rotatable => Direction::new(servo_az.current_angle, servo_el.current_angle)?,
            AntennaMode::FixedOrientation(d) => d,
        };

        let mut frame_captured = false;
        if sc.frame_tick(next_frame) == tick {
            let frame = next_frame;
            next_frame += 1;
            let mount = match sc.camera_mount {
                CameraMount::Gimbal => match sc.antenna_mode {
                    AntennaMode::Rotatable => Direction::new(sensed.0, sensed.1)?,
                    AntennaMode::FixedOrientation(d) => d,
                },
                CameraMount::Fixed(d) => d,
            };
            if supervisor.camera_trigger(t, tracker.has_live_tracks()) {
                frame_captured = true;
                frames_captured += 1;
                let cam = sc.camera.with_mount(mount);
                if let Some(prev) = last_cam.replace(cam) {
                    if prev.mount() != mount {
                        tracker.warp_tracks(|px| cam.reproject_from(&prev, px));
                    }
                }
                let dets = synth_detect(&cam, &sc.detector, &[user], frame)?;
                let frame_dt = last_capture.map_or(1.0 / sc.camera.frame_rate_hz(), |l| t - l);
                last_capture = Some(t);
                let out = tracker.step(&dets, frame_dt)?;
                let decision = supervisor.supervisor_step(&out, &cam, t)?;
                if decision.transitioned {
                    steering.reset();
                }
                target = decision.target;

                detections_log.extend(dets.iter().map(|d| DetectionRow {
                    frame,
                    t,
                    center_u: d.center_u,
                    center_v: d.center_v,
                    box_w: d.box_w,
                    box_h: d.box_h,
                    confidence: d.confidence,
                    truth_index: d.truth_index,
                }));
                let mut rows: Vec<TrackRow> = tracker
                    .tracks()
                    .iter()
                    .chain(out.removed.iter())
                    .map(|s| TrackRow {
                        frame,
                        t,
                        track_id: s.track_id,
                        status: s.status,
                        u: s.mean[0],
                        v: s.mean[1],
                        du: s.mean[2],
                        dv: s.mean[3],
                        hits: s.hits,
                        time_since_update: s.time_since_update,
                        gate: s.last_gate,
                    })
                    .collect();
                rows.sort_by_key(|r| r.track_id);
                tracks_log.extend(rows);
            }
        }
        let mode = supervisor.mode();

        let psi = angular_separation(boresight, user_dir);
        let tx_gain = gain_dbi(&sc.pattern, psi)?;
        let fspl = fspl_db(sc.link.carrier_hz, range)?;
        let prx = received_power_dbm(&sc.link, tx_gain, 0.0, range)?;
        let snr = snr_db(&sc.link, prx);
        let ber = ber_16qam(ebn0_db(&sc.link, snr))?;

        let (az_cmd, el_cmd, az_err, el_err) = match (sc.antenna_mode, mode, target) {
            (AntennaMode::Rotatable, Mode::Tracking, Some(est)) => {
                let ff = if sc.feedforward {
                    (est.azimuth_rate, est.elevation_rate)
                } else {
                    (0.0, 0.0)
                };
                let current = Direction::new(sensed.0, sensed.1)?;
                let cmd = steering.steer(current, est.at(t), ff, dt)?;
                (
                    sensed.0 + cmd.azimuth_rate * dt,
                    sensed.1 + cmd.elevation_rate * dt,
                    cmd.azimuth_error,
                    cmd.elevation_error,
                )
            }
            _ => (servo_az.current_angle, servo_el.current_angle, 0.0, 0.0),
        };
        let sensed_now = sensed;
        let (az_pulse, el_pulse) = match sc.antenna_mode {
            AntennaMode::Rotatable => {
                let ra = servo_az.servo_step(az_cmd, dt, &mut sensor_rng)?;
                let re = servo_el.servo_step(el_cmd, dt, &mut sensor_rng)?;
                sensed = (ra.sensed, re.sensed);
                (ra.commanded_pulse_us, re.commanded_pulse_us)
            }
            AntennaMode::FixedOrientation(_) => (
                servo_az.angle_to_pulse(az_cmd).value,
                servo_el.angle_to_pulse(el_cmd).value,
            ),
        };

        records.push(StepRecord {
            tick,
            t,
            user_position: user,
            user_direction: user_dir,
            range_m: range,
            mode,
            locked_track_id: supervisor.locked_track_id(),
            boresight,
            pointing_error: psi,
            tx_gain_dbi: tx_gain,
            fspl_db: fspl,
            prx_dbm: prx,
            snr_db: snr,
            ber,
            azimuth_pulse_us: az_pulse,
            elevation_pulse_us: el_pulse,
            azimuth_sensed: sensed_now.0,
            elevation_sensed: sensed_now.1,
            azimuth_error: az_err,
            elevation_error: el_err,
            frame_captured,
        });
    }

    let summary = summarize(&records)?;
    Ok(RunOutput {
        records,
        summary,
        detections: detections_log,
        tracks: tracks_log,
        camera_frames: next_frame,
        frames_captured,
    })
}

/// RA and fixed-orientation results for the same tick.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub tick: u64,
    pub t: f64,
    pub user_azimuth: f64,
    pub user_elevation: f64,
    pub prx_rotatable_dbm: f64,
    pub prx_fixed_dbm: f64,
    /// `prx_rotatable_dbm − prx_fixed_dbm`.
    pub gain_db: f64,
    pub pointing_error_rotatable: f64,
    pub pointing_error_fixed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub rotatable: RunOutput,
    pub fixed: RunOutput,
    /// Mean RA power minus mean fixed power, dB-domain means.
    pub power_gain_db: f64,
}

/// Runs the same trajectory and seed with a rotatable antenna and with one
/// held at `antenna.fixed_*`, and joins the records by tick.
pub fn compare_modes(cfg: &ScenarioConfig) -> Result<Comparison, EngineError> {
    let mut ra_cfg = cfg.clone();
    ra_cfg.antenna.mode = AntennaModeKind::Rotatable;
    let mut fixed_cfg = cfg.clone();
    fixed_cfg.antenna.mode = AntennaModeKind::Fixed;
    let rotatable = run_scenario(&ra_cfg)?;
    let fixed = run_scenario(&fixed_cfg)?;

    let rows = rotatable
        .records
        .iter()
        .zip(&fixed.records)
        .map(|(a, b)| {
            debug_assert_eq!(a.tick, b.tick);
            ComparisonRow {
                tick: a.tick,
                t: a.t,
                user_azimuth: a.user_direction.azimuth(),
                user_elevation: a.user_direction.elevation(),
                prx_rotatable_dbm: a.prx_dbm,
                prx_fixed_dbm: b.prx_dbm,
                gain_db: a.prx_dbm - b.prx_dbm,
                pointing_error_rotatable: a.pointing_error,
                pointing_error_fixed: b.pointing_error,
            }
        })
        .collect();
    let power_gain_db = rotatable.summary.prx_mean_dbm - fixed.summary.prx_mean_dbm;
    Ok(Comparison {
        rows,
        rotatable,
        fixed,
        power_gain_db,
    })
}
