use ra_sim_core::antenna::gain_dbi;
use ra_sim_core::channel::fspl_db;
use ra_sim_core::control::Mode;
use ra_sim_core::engine::config::{AntennaModeKind, TrajectoryConfig, WaypointConfig};
use ra_sim_core::engine::*;
use ra_sim_core::geometry::angular_separation;

fn static_user(at: [f64; 3]) -> ScenarioConfig {
    ScenarioConfig {
        duration_s: 4.0,
        trajectory: TrajectoryConfig::Waypoints {
            points: vec![WaypointConfig { t: 0.0, position: at }],
        },
        ..ScenarioConfig::default()
    }
}

fn fixed(mut cfg: ScenarioConfig) -> ScenarioConfig {
    cfg.antenna.mode = AntennaModeKind::Fixed;
    cfg
}

#[test]
fn static_user_on_boresight_is_constant() {
    let out = run_scenario(&static_user([10.0, 0.0, 0.0])).unwrap();
    let p0 = out.records[0].prx_dbm;
    for r in &out.records {
        assert_eq!(r.pointing_error, 0.0);
        assert_eq!(r.prx_dbm, p0);
    }
}

#[test]
fn fixed_sweep_follows_closed_form() {
    let out = run_scenario(&fixed(ScenarioConfig::default())).unwrap();
    let hpbw = 60f64.to_radians();
    let peak = 10.0 + 10.0 - fspl_db(5.8e9, 10.0).unwrap();
    for r in &out.records {
        let az = r.user_direction.azimuth();
        let expected = peak - (12.0 * (az / hpbw).powi(2)).min(20.0);
        assert!((r.prx_dbm - expected).abs() < 1e-9, "tick {}: {} vs {}", r.tick, r.prx_dbm, expected);
    }
}

#[test]
fn fixed_mode_boresight_never_moves() {
    let out = run_scenario(&fixed(ScenarioConfig::default())).unwrap();
    let b0 = out.records[0].boresight;
    assert!(out.records.iter().all(|r| r.boresight == b0));
}

#[test]
fn same_seed_same_records() {
    let mut cfg = ScenarioConfig::default();
    cfg.detector.pixel_noise_sigma = 1.0;
    cfg.detector.false_alarm_rate = 0.3;
    cfg.detector.detection_prob = 0.9;
    cfg.servo.azimuth.sensor_noise_deg = 0.05;
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    assert_eq!(a, b);
    cfg.seed += 1;
    let c = run_scenario(&cfg).unwrap();
    assert_ne!(a.records, c.records);
}

#[test]
fn records_are_physically_consistent() {
    let mut cfg = ScenarioConfig::default();
    cfg.detector.pixel_noise_sigma = 1.0;
    cfg.servo.azimuth.sensor_noise_deg = 0.05;
    let sc = Scenario::from_config(&cfg).unwrap();
    for r in run_built(&sc).unwrap().records {
        let psi = angular_separation(r.boresight, r.user_direction);
        assert!((psi - r.pointing_error).abs() < 1e-9);
        let g = gain_dbi(&sc.pattern, psi).unwrap();
        assert!((g - r.tx_gain_dbi).abs() < 1e-9);
        let prx = sc.link.tx_power_dbm + r.tx_gain_dbi + 0.0 - r.fspl_db;
        assert!((prx - r.prx_dbm).abs() < 1e-9);
        assert!((fspl_db(sc.link.carrier_hz, r.range_m).unwrap() - r.fspl_db).abs() < 1e-9);
    }
}

#[test]
fn cadence_matches_rates() {
    let cfg = ScenarioConfig::default();
    let out = run_scenario(&cfg).unwrap();
    let ticks = (cfg.duration_s * cfg.control_rate_hz).floor() as i64;
    let frames = (cfg.duration_s * cfg.camera.frame_rate_hz).floor() as i64;
    assert!((out.records.len() as i64 - ticks).abs() <= 1);
    assert!((out.camera_frames as i64 - frames).abs() <= 1);
    assert!(out.frames_captured <= out.camera_frames);
}

#[test]
fn servo_never_exceeds_slew_limit() {
    let mut cfg = ScenarioConfig::default();
    cfg.antenna.start_aligned = false;
    cfg.servo.azimuth.max_speed_deg_s = 60.0;
    cfg.detector.pixel_noise_sigma = 1.0;
    let out = run_scenario(&cfg).unwrap();
    let step = 60f64.to_radians() / cfg.control_rate_hz + 1e-12;
    for w in out.records.windows(2) {
        assert!((w[1].boresight.azimuth() - w[0].boresight.azimuth()).abs() <= step);
    }
}

#[test]
fn user_on_fixed_boresight_gives_no_gain() {
    let c = compare_modes(&static_user([10.0, 0.0, 0.0])).unwrap();
    assert!(c.power_gain_db.abs() < 0.1);
}

#[test]
fn reference_sweep_shape() {
    let c = compare_modes(&ScenarioConfig::default()).unwrap();
    let ra = &c.rotatable.summary;
    let fx = &c.fixed.summary;
    assert!(ra.prx_max_dbm - ra.prx_min_dbm < 1.0);
    assert!((fx.prx_max_dbm - fx.prx_min_dbm - 20.0).abs() < 1e-9);
    for row in &c.rows {
        assert!(row.prx_rotatable_dbm >= row.prx_fixed_dbm - 1e-9, "tick {}", row.tick);
    }
    let first = &c.rows[0];
    let last = c.rows.last().unwrap();
    for edge in [first, last] {
        assert!(edge.gain_db > 18.0 && edge.gain_db < 21.0);
    }
    assert!(c.rotatable.summary.lock_time.unwrap() < 0.2);
}

#[test]
fn start_unaligned_acquires_the_user() {
    let mut cfg = ScenarioConfig::default();
    cfg.antenna.start_aligned = false;
    cfg.trajectory = TrajectoryConfig::ArcSweep {
        radius_m: 10.0,
        elevation_deg: 5.0,
        az_start_deg: 20.0,
        az_end_deg: -20.0,
        angular_rate_deg_s: 4.0,
    };
    cfg.duration_s = 10.0;
    let out = run_scenario(&cfg).unwrap();
    let tail = &out.records[out.records.len() - 50..];
    assert!(tail.iter().all(|r| r.mode == Mode::Tracking && r.pointing_error < 1e-3));
}

#[test]
fn invalid_config_lists_every_issue() {
    let mut cfg = ScenarioConfig::default();
    cfg.duration_s = -1.0;
    cfg.camera.hfov_deg = 200.0;
    match run_scenario(&cfg) {
        Err(EngineError::Config(issues)) => {
            assert_eq!(issues.len(), 2);
            let msg = EngineError::Config(issues).to_string();
            assert!(msg.contains("duration_s") && msg.contains("camera.hfov_deg"));
        }
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn summary_of_identical_rows() {
    let out = run_scenario(&static_user([10.0, 0.0, 0.0])).unwrap();
    let s = out.summary;
    assert_eq!(s.prx_stddev_db, 0.0);
    assert_eq!(s.prx_min_dbm, s.prx_max_dbm);
    assert_eq!(s.prx_mean_dbm, s.prx_min_dbm);
}

#[test]
fn summary_two_rows_arithmetic_in_db() {
    let out = run_scenario(&static_user([10.0, 0.0, 0.0])).unwrap();
    let mut rows = out.records[..2].to_vec();
    rows[0].prx_dbm = -40.0;
    rows[1].prx_dbm = -50.0;
    let s = summarize(&rows).unwrap();
    assert_eq!((s.prx_min_dbm, s.prx_max_dbm, s.prx_mean_dbm), (-50.0, -40.0, -45.0));
    let mw = summarize_with(&rows, PowerAveraging::Milliwatt).unwrap();
    let expected = 10.0 * ((1e-4 + 1e-5) / 2.0f64).log10();
    assert!((mw.prx_mean_dbm - expected).abs() < 1e-12);
}

#[test]
fn summary_percentile_on_ramp() {
    let out = run_scenario(&static_user([10.0, 0.0, 0.0])).unwrap();
    let n = out.records.len() - 1;
    let mut rows = out.records.clone();
    for (k, r) in rows.iter_mut().enumerate() {
        r.pointing_error = k as f64 / n as f64;
    }
    let s = summarize(&rows).unwrap();
    assert!((s.pointing_error_p95 - 0.95).abs() <= 1.0 / n as f64);
    assert!((s.pointing_error_p50 - 0.5).abs() <= 1.0 / n as f64);
    assert_eq!(s.pointing_error_max, 1.0);
}

#[test]
fn summary_rejects_empty() {
    assert!(summarize(&[]).is_err());
}

#[test]
fn config_roundtrips_through_toml_shape() {
    // serde field names are the config file keys
    let cfg = ScenarioConfig::default();
    assert_eq!(cfg.validate(), vec![]);
    let scenario = Scenario::from_config(&cfg).unwrap();
    assert_eq!(scenario.last_tick(), 1000);
    assert_eq!(scenario.frame_tick(3), 5);
}
