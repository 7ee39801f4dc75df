//! Tracking-by-detection in the image plane.
//!
//! Each track carries a constant-velocity Kalman filter over `(u, v, u̇, v̇)`.
//! Detections are associated with an exact minimum-cost matching on the
//! squared Mahalanobis distance, gated by a χ² threshold, and tracks follow
//! the usual lifecycle: a new track is tentative, becomes confirmed after
//! `n_init` consecutive hits, and is deleted once it has gone `max_age` frames
//! without an update (a tentative track is dropped on its first miss).
//! There is no appearance descriptor; association is motion-only.

use crate::assignment::{self, CostMatrix};
use crate::error::{ensure_finite, invalid, Error, Result};
use crate::vision::{Detection, Pixel};
use crate::Scalar;

pub type Vec4<T> = [T; 4];
pub type Mat4<T> = [[T; 4]; 4];
type Mat2<T> = [[T; 2]; 2];

/// χ² 0.95 quantile with two degrees of freedom.
pub const CHI2_95_2DOF: f64 = 5.991;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Deleted,
}

impl TrackStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrackStatus::Tentative => "tentative",
            TrackStatus::Confirmed => "confirmed",
            TrackStatus::Deleted => "deleted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackState<T> {
    /// `(u, v, u̇, v̇)` in px and px/s.
    pub mean: Vec4<T>,
    pub covariance: Mat4<T>,
    pub track_id: u64,
    pub hits: u32,
    /// Frames since the last successful update.
    pub time_since_update: u32,
    pub status: TrackStatus,
    /// Box size of the last associated detection, carried through unfiltered.
    pub box_w: T,
    pub box_h: T,
    /// Gate distance of the detection matched in the latest step, if any.
    pub last_gate: Option<T>,
    /// Centre of the detection matched in the latest step, if any.
    pub measurement: Option<Pixel<T>>,
}

impl<T: Scalar> TrackState<T> {
    /// Starts a tentative track at a detection with zero velocity.
    pub fn from_detection(track_id: u64, det: &Detection<T>, params: &TrackerParams<T>) -> Self {
        let r = params.measurement_noise * params.measurement_noise;
        let vv = params.initial_velocity_std * params.initial_velocity_std;
        let mut covariance = [[T::zero(); 4]; 4];
        covariance[0][0] = r;
        covariance[1][1] = r;
        covariance[2][2] = vv;
        covariance[3][3] = vv;
        Self {
            mean: [det.center_u, det.center_v, T::zero(), T::zero()],
            covariance,
            track_id,
            hits: 1,
            time_since_update: 0,
            status: TrackStatus::Tentative,
            box_w: det.box_w,
            box_h: det.box_h,
            last_gate: None,
            measurement: Some(det.center()),
        }
    }

    pub fn position(&self) -> Pixel<T> {
        Pixel {
            u: self.mean[0],
            v: self.mean[1],
        }
    }

    pub fn velocity(&self) -> (T, T) {
        (self.mean[2], self.mean[3])
    }

    pub fn is_confirmed(&self) -> bool {
        self.status == TrackStatus::Confirmed
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerParams<T> {
    /// White-acceleration process noise, px/s² standard deviation.
    pub process_noise_accel: T,
    /// Detection centre noise, px standard deviation.
    pub measurement_noise: T,
    /// Squared Mahalanobis distance cutoff.
    pub gate_threshold: T,
    pub n_init: u32,
    pub max_age: u32,
    /// Initial velocity uncertainty of a new track, px/s.
    pub initial_velocity_std: T,
}

impl<T: Scalar> Default for TrackerParams<T> {
    fn default() -> Self {
        Self {
            process_noise_accel: T::lit(50.0),
            measurement_noise: T::lit(1.0),
            gate_threshold: T::lit(CHI2_95_2DOF),
            n_init: 3,
            max_age: 30,
            initial_velocity_std: T::lit(100.0),
        }
    }
}

impl<T: Scalar> TrackerParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("process_noise_accel", self.process_noise_accel),
            ("measurement_noise", self.measurement_noise),
            ("gate_threshold", self.gate_threshold),
            ("initial_velocity_std", self.initial_velocity_std),
        ] {
            ensure_finite(name, x)?;
            if x <= T::zero() {
                return Err(invalid(name, "must be positive"));
            }
        }
        if self.n_init < 1 {
            return Err(invalid("n_init", "must be at least 1"));
        }
        if self.max_age < 1 {
            return Err(invalid("max_age", "must be at least 1"));
        }
        Ok(())
    }
}

fn mat_mul<T: Scalar>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    let mut out = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).fold(T::zero(), |acc, k| acc + a[i][k] * b[k][j]);
        }
    }
    out
}

fn transpose<T: Scalar>(a: &Mat4<T>) -> Mat4<T> {
    let mut out = *a;
    for (i, row) in a.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            out[j][i] = x;
        }
    }
    out
}

fn symmetrize<T: Scalar>(a: &mut Mat4<T>) {
    for i in 0..4 {
        for j in (i + 1)..4 {
            let m = (a[i][j] + a[j][i]) * T::half();
            a[i][j] = m;
            a[j][i] = m;
        }
    }
}

fn inverse2<T: Scalar>(s: &Mat2<T>) -> Result<Mat2<T>> {
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    if !(det > T::zero()) || !det.is_finite() {
        return Err(Error::Singular("innovation covariance"));
    }
    Ok([[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]])
}

/// Constant-velocity transition for a step of `dt`.
pub fn transition<T: Scalar>(dt: T) -> Mat4<T> {
    let (o, z) = (T::one(), T::zero());
    [[o, z, dt, z], [z, o, z, dt], [z, z, o, z], [z, z, z, o]]
}

/// Discrete white-acceleration process noise.
pub fn process_noise<T: Scalar>(dt: T, accel_std: T) -> Mat4<T> {
    let q = accel_std * accel_std;
    let dt2 = dt * dt;
    let pp = q * dt2 * dt2 / T::lit(4.0);
    let pv = q * dt2 * dt / T::two();
    let vv = q * dt2;
    let z = T::zero();
    [[pp, z, pv, z], [z, pp, z, pv], [pv, z, vv, z], [z, pv, z, vv]]
}

/// Kalman time update.
pub fn kf_predict<T: Scalar>(t: &TrackState<T>, dt: T, params: &TrackerParams<T>) -> Result<TrackState<T>> {
    ensure_finite("dt", dt)?;
    if dt <= T::zero() {
        return Err(invalid("dt", "must be positive"));
    }
    let f = transition(dt);
    let q = process_noise(dt, params.process_noise_accel);
    let m = t.mean;
    let mut out = t.clone();
    out.mean = [m[0] + m[2] * dt, m[1] + m[3] * dt, m[2], m[3]];
    let mut p = mat_mul(&mat_mul(&f, &t.covariance), &transpose(&f));
    for i in 0..4 {
        for j in 0..4 {
            p[i][j] += q[i][j];
        }
    }
    symmetrize(&mut p);
    out.covariance = p;
    out.time_since_update += 1;
    out.last_gate = None;
    out.measurement = None;
    Ok(out)
}

fn innovation<T: Scalar>(t: &TrackState<T>, det: &Detection<T>, params: &TrackerParams<T>) -> ([T; 2], Mat2<T>) {
    let r = params.measurement_noise * params.measurement_noise;
    let p = &t.covariance;
    let y = [det.center_u - t.mean[0], det.center_v - t.mean[1]];
    let s = [[p[0][0] + r, p[0][1]], [p[1][0], p[1][1] + r]];
    (y, s)
}

/// Squared Mahalanobis distance `yᵀ S⁻¹ y` of a detection from the track.
pub fn gating_distance<T: Scalar>(t: &TrackState<T>, det: &Detection<T>, params: &TrackerParams<T>) -> Result<T> {
    let (y, s) = innovation(t, det, params);
    mahalanobis2(y, &s)
}

pub(crate) fn mahalanobis2<T: Scalar>(y: [T; 2], s: &Mat2<T>) -> Result<T> {
    let si = inverse2(s)?;
    let d = y[0] * (si[0][0] * y[0] + si[0][1] * y[1]) + y[1] * (si[1][0] * y[0] + si[1][1] * y[1]);
    Ok(d.max(T::zero()))
}

/// Kalman measurement update with `H` selecting `(u, v)`; Joseph form keeps
/// the posterior covariance symmetric positive semi-definite.
pub fn kf_update<T: Scalar>(t: &TrackState<T>, det: &Detection<T>, params: &TrackerParams<T>) -> Result<TrackState<T>> {
    ensure_finite("center_u", det.center_u)?;
    ensure_finite("center_v", det.center_v)?;
    let r = params.measurement_noise * params.measurement_noise;
    let (y, s) = innovation(t, det, params);
    let si = inverse2(&s)?;
    let p = &t.covariance;

    // K = P Hᵀ S⁻¹, 4×2
    let mut k = [[T::zero(); 2]; 4];
    for i in 0..4 {
        for j in 0..2 {
            k[i][j] = p[i][0] * si[0][j] + p[i][1] * si[1][j];
        }
    }

    let mut out = t.clone();
    for i in 0..4 {
        out.mean[i] = t.mean[i] + k[i][0] * y[0] + k[i][1] * y[1];
    }

    // (I - K H)
    let mut a = [[T::zero(); 4]; 4];
    for i in 0..4 {
        a[i][i] = T::one();
        a[i][0] -= k[i][0];
        a[i][1] -= k[i][1];
    }
    let mut post = mat_mul(&mat_mul(&a, p), &transpose(&a));
    for i in 0..4 {
        for j in 0..4 {
            post[i][j] += r * (k[i][0] * k[j][0] + k[i][1] * k[j][1]);
        }
    }
    symmetrize(&mut post);
    out.covariance = post;
    out.hits += 1;
    out.time_since_update = 0;
    out.box_w = det.box_w;
    out.box_h = det.box_h;
    out.measurement = Some(det.center());
    Ok(out)
}

/// Result of one association round, in input index space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Association<T> {
    /// `(track index, detection index, gate distance)`.
    pub matches: Vec<(usize, usize, T)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_detections: Vec<usize>,
}

/// Gated minimum-cost matching of detections to tracks.
///
/// Pairs at or above `gate_threshold` are never matched. The matching has
/// maximum size and, among those, minimum total distance; ties go to the
/// lowest `(track_id, detection index)`.
pub fn associate<T: Scalar>(
    tracks: &[TrackState<T>],
    detections: &[Detection<T>],
    params: &TrackerParams<T>,
) -> Result<Association<T>> {
    // rows in track_id order so the solver's row preference is id order
    let mut order: Vec<usize> = (0..tracks.len()).collect();
    order.sort_by_key(|&i| tracks[i].track_id);

    let mut costs = CostMatrix::new(tracks.len(), detections.len());
    for (row, &ti) in order.iter().enumerate() {
        for (j, det) in detections.iter().enumerate() {
            let d = gating_distance(&tracks[ti], det, params)?;
            if d < params.gate_threshold {
                costs.set(row, j, Some(d));
            }
        }
    }
    let solution = assignment::solve(&costs);

    let mut out = Association::default();
    let mut det_used = vec![false; detections.len()];
    let mut track_matched = vec![false; tracks.len()];
    for (row, col) in solution.iter().enumerate() {
        if let Some(j) = *col {
            let ti = order[row];
            let d = costs.get(row, j).expect("solver only returns allowed pairs");
            out.matches.push((ti, j, d));
            det_used[j] = true;
            track_matched[ti] = true;
        }
    }
    out.matches.sort_by_key(|m| m.0);
    out.unmatched_tracks = (0..tracks.len()).filter(|&i| !track_matched[i]).collect();
    out.unmatched_detections = (0..detections.len()).filter(|&j| !det_used[j]).collect();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackEvent {
    Confirmed { track_id: u64, frame: u64 },
    Deleted { track_id: u64, frame: u64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrackerOutput<T> {
    pub confirmed: Vec<TrackState<T>>,
    pub events: Vec<TrackEvent>,
    /// Final state of the tracks deleted in this step.
    pub removed: Vec<TrackState<T>>,
}

impl<T> TrackerOutput<T> {
    pub fn deleted(&self, track_id: u64) -> bool {
        self.events
            .iter()
            .any(|e| matches!(e, TrackEvent::Deleted { track_id: id, .. } if *id == track_id))
    }
}

/// Multi-target tracker state machine. Single owner, stepped once per frame.
#[derive(Debug, Clone)]
pub struct Tracker<T> {
    params: TrackerParams<T>,
    tracks: Vec<TrackState<T>>,
    next_id: u64,
    frame: u64,
}

impl<T: Scalar> Tracker<T> {
    pub fn new(params: TrackerParams<T>) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            tracks: Vec::new(),
            next_id: 1,
            frame: 0,
        })
    }

    pub fn params(&self) -> &TrackerParams<T> {
        &self.params
    }

    /// Live (tentative and confirmed) tracks in id order.
    pub fn tracks(&self) -> &[TrackState<T>] {
        &self.tracks
    }

    pub fn track(&self, track_id: u64) -> Option<&TrackState<T>> {
        self.tracks.iter().find(|t| t.track_id == track_id)
    }

    pub fn has_live_tracks(&self) -> bool {
        !self.tracks.is_empty()
    }

    /// Number of frames processed so far.
    pub fn frames(&self) -> u64 {
        self.frame
    }

    /// Moves every track's image position through `map`, for example to
    /// follow a camera rotation between frames. Tracks mapped to `None` keep
    /// their position.
    pub fn warp_tracks(&mut self, map: impl Fn(Pixel<T>) -> Option<Pixel<T>>) {
        for t in &mut self.tracks {
            if let Some(p) = map(t.position()) {
                t.mean[0] = p.u;
                t.mean[1] = p.v;
            }
        }
    }

    /// predict → associate → update → age → spawn → prune.
    pub fn step(&mut self, detections: &[Detection<T>], dt: T) -> Result<TrackerOutput<T>> {
        let frame = self.frame;
        self.frame += 1;
        let params = self.params;

        let predicted = self
            .tracks
            .iter()
            .map(|t| kf_predict(t, dt, &params))
            .collect::<Result<Vec<_>>>()?;
        let assoc = associate(&predicted, detections, &params)?;

        let mut events = Vec::new();
        let mut next = predicted.clone();
        for &(ti, dj, gate) in &assoc.matches {
            let mut t = kf_update(&predicted[ti], &detections[dj], &params)?;
            t.last_gate = Some(gate);
            if t.status == TrackStatus::Tentative && t.hits >= params.n_init {
                t.status = TrackStatus::Confirmed;
                events.push(TrackEvent::Confirmed {
                    track_id: t.track_id,
                    frame,
                });
            }
            next[ti] = t;
        }
        for &ti in &assoc.unmatched_tracks {
            let t = &mut next[ti];
            let expired = match t.status {
                TrackStatus::Tentative => true,
                TrackStatus::Confirmed => t.time_since_update >= params.max_age,
                TrackStatus::Deleted => false,
            };
            if expired {
                t.status = TrackStatus::Deleted;
                events.push(TrackEvent::Deleted {
                    track_id: t.track_id,
                    frame,
                });
            }
        }
        for &dj in &assoc.unmatched_detections {
            let mut t = TrackState::from_detection(self.next_id, &detections[dj], &params);
            self.next_id += 1;
            if params.n_init <= 1 {
                t.status = TrackStatus::Confirmed;
                events.push(TrackEvent::Confirmed {
                    track_id: t.track_id,
                    frame,
                });
            }
            next.push(t);
        }
        let (removed, live): (Vec<_>, Vec<_>) = next.into_iter().partition(|t| t.status == TrackStatus::Deleted);
        self.tracks = live;

        Ok(TrackerOutput {
            confirmed: self.tracks.iter().filter(|t| t.is_confirmed()).cloned().collect(),
            events,
            removed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> TrackerParams<f64> {
        TrackerParams::default()
    }

    fn track_at(mean: Vec4<f64>) -> TrackState<f64> {
        let mut t = TrackState::from_detection(1, &Detection::at(mean[0], mean[1], 0), &params());
        t.mean = mean;
        t
    }

    #[test]
    fn predict_zero_velocity_keeps_position() {
        for dt in [0.01, 0.5, 3.0] {
            let t = kf_predict(&track_at([100.0, 50.0, 0.0, 0.0]), dt, &params()).unwrap();
            assert_eq!((t.mean[0], t.mean[1]), (100.0, 50.0));
            assert_eq!(t.time_since_update, 1);
        }
    }

    #[test]
    fn predict_linear_motion() {
        let t = kf_predict(&track_at([100.0, 50.0, 10.0, -20.0]), 0.1, &params()).unwrap();
        assert!((t.mean[0] - 101.0).abs() < 1e-12);
        assert!((t.mean[1] - 48.0).abs() < 1e-12);
        assert_eq!((t.mean[2], t.mean[3]), (10.0, -20.0));
    }

    #[test]
    fn predict_rejects_bad_dt() {
        let t = track_at([0.0; 4]);
        assert!(kf_predict(&t, 0.0, &params()).is_err());
        assert!(kf_predict(&t, -1.0, &params()).is_err());
        assert!(kf_predict(&t, f64::NAN, &params()).is_err());
    }

    #[test]
    fn predict_covariance_against_hand_rolled_oracle() {
        // P = diag(1, 2, 3, 4), dt = 0.5, q = 2:
        // FPFᵀ: [0][0] = 1 + dt²·3 = 1.75, [0][2] = dt·3 = 1.5, [1][1] = 2 + dt²·4 = 3,
        // Q: pp = 4·dt⁴/4 = 0.0625, pv = 4·dt³/2 = 0.25, vv = 4·dt² = 1.
        let mut t = track_at([0.0; 4]);
        t.covariance = [[1.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0], [0.0, 0.0, 3.0, 0.0], [0.0, 0.0, 0.0, 4.0]];
        let p = TrackerParams {
            process_noise_accel: 2.0,
            ..params()
        };
        let out = kf_predict(&t, 0.5, &p).unwrap().covariance;
        let expect = [
            [1.8125, 0.0, 1.75, 0.0],
            [0.0, 3.0625, 0.0, 2.25],
            [1.75, 0.0, 4.0, 0.0],
            [0.0, 2.25, 0.0, 5.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((out[i][j] - expect[i][j]).abs() < 1e-12, "({i},{j})");
            }
        }
        let trace = |m: &Mat4<f64>| (0..4).map(|i| m[i][i]).sum::<f64>();
        assert!(trace(&out) > trace(&t.covariance));
    }

    #[test]
    fn scalar_kalman_case() {
        let mut t = track_at([0.0, 0.0, 0.0, 0.0]);
        t.covariance = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        let p = TrackerParams {
            measurement_noise: 1.0,
            ..params()
        };
        let out = kf_update(&t, &Detection::at(1.0, 0.0, 0), &p).unwrap();
        assert!((out.mean[0] - 0.5).abs() < 1e-12);
        assert!((out.covariance[0][0] - 0.5).abs() < 1e-12);
        assert_eq!(out.hits, 2);
        assert_eq!(out.time_since_update, 0);
    }

    #[test]
    fn near_perfect_measurement_snaps_position() {
        let t = track_at([10.0, 20.0, 1.0, 1.0]);
        let p = TrackerParams {
            measurement_noise: 1e-9,
            ..params()
        };
        let out = kf_update(&t, &Detection::at(13.0, 17.0, 0), &p).unwrap();
        assert!((out.mean[0] - 13.0).abs() < 1e-9);
        assert!((out.mean[1] - 17.0).abs() < 1e-9);
        assert!(out.covariance[0][0] <= t.covariance[0][0]);
    }

    #[test]
    fn gating_examples() {
        let t = track_at([10.0, 10.0, 0.0, 0.0]);
        assert_eq!(gating_distance(&t, &Detection::at(10.0, 10.0, 0), &params()).unwrap(), 0.0);
        let y = [3.0, 4.0];
        let s = [[1.0, 0.0], [0.0, 1.0]];
        assert_eq!(mahalanobis2(y, &s).unwrap(), 25.0);
        assert!(mahalanobis2(y, &[[1.0, 1.0], [1.0, 1.0]]).is_err());
    }

    #[test]
    fn lifecycle_confirm_on_third_frame() {
        let mut tr = Tracker::new(params()).unwrap();
        for frame in 0..3u64 {
            let out = tr.step(&[Detection::at(100.0, 100.0, frame)], 1.0 / 30.0).unwrap();
            if frame < 2 {
                assert!(out.confirmed.is_empty());
            } else {
                assert_eq!(out.confirmed.len(), 1);
                assert_eq!(out.events, vec![TrackEvent::Confirmed { track_id: 1, frame: 2 }]);
            }
        }
    }

    #[test]
    fn lifecycle_delete_after_max_age() {
        let mut tr = Tracker::new(params()).unwrap();
        for frame in 0..5u64 {
            tr.step(&[Detection::at(100.0, 100.0, frame)], 1.0 / 30.0).unwrap();
        }
        // last update at frame 4; deleted on frame 34
        for frame in 5..40u64 {
            let out = tr.step(&[], 1.0 / 30.0).unwrap();
            if frame < 34 {
                assert!(out.events.is_empty(), "frame {frame}");
                assert_eq!(tr.tracks().len(), 1);
            } else if frame == 34 {
                assert_eq!(out.events, vec![TrackEvent::Deleted { track_id: 1, frame: 34 }]);
                assert!(tr.tracks().is_empty());
            }
        }
    }

    #[test]
    fn tentative_track_dropped_on_miss() {
        let mut tr = Tracker::new(params()).unwrap();
        tr.step(&[Detection::at(50.0, 50.0, 0)], 0.1).unwrap();
        let out = tr.step(&[], 0.1).unwrap();
        assert_eq!(out.events, vec![TrackEvent::Deleted { track_id: 1, frame: 1 }]);
    }

    #[test]
    fn far_detection_spawns_new_track() {
        let mut tr = Tracker::new(params()).unwrap();
        tr.step(&[Detection::at(50.0, 50.0, 0)], 0.1).unwrap();
        tr.step(&[Detection::at(50.0, 50.0, 1), Detection::at(400.0, 300.0, 1)], 0.1)
            .unwrap();
        let ids: Vec<u64> = tr.tracks().iter().map(|t| t.track_id).collect();
        assert_eq!(ids, vec![1, 2]);
    }

    #[test]
    fn association_empty_tracks() {
        let dets = vec![Detection::at(1.0, 1.0, 0); 4];
        let a = associate::<f64>(&[], &dets, &params()).unwrap();
        assert!(a.matches.is_empty());
        assert_eq!(a.unmatched_detections, vec![0, 1, 2, 3]);
    }

    #[test]
    fn association_single_in_gate() {
        let t = track_at([10.0, 10.0, 0.0, 0.0]);
        let a = associate(&[t], &[Detection::at(10.5, 10.0, 0)], &params()).unwrap();
        assert_eq!(a.matches.len(), 1);
        assert_eq!((a.matches[0].0, a.matches[0].1), (0, 0));
    }
}
