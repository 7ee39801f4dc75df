//! Pinhole camera and a synthetic person detector.
//!
//! The detector stands in for the neural network: the ground-truth user is
//! projected through the camera, then perturbed with pixel noise, random
//! misses and uniformly scattered false alarms.
//!
//! Camera frame: `x` along the optical axis, `y` to the left, `z` up, i.e. the
//! world frame rotated by the mount azimuth then the mount elevation. Image
//! coordinates follow the bearing convention: `u` grows with relative azimuth
//! (counter-clockwise), `v` grows downwards. Square pixels, no distortion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::geometry::{position_to_direction, Direction, Position3};
use crate::Scalar;

/// Pixels of slack allowed on the image border before a point is out of view.
const EDGE_SLACK_PX: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pixel<T> {
    pub u: T,
    pub v: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel<T> {
    width_px: T,
    height_px: T,
    hfov: T,
    mount: Direction<T>,
    frame_rate_hz: T,
}

impl<T: Scalar> CameraModel<T> {
    pub fn new(width_px: u32, height_px: u32, hfov: T, mount: Direction<T>, frame_rate_hz: T) -> Result<Self> {
        if width_px < 1 || height_px < 1 {
            return Err(invalid("width_px/height_px", "must be at least 1"));
        }
        ensure_finite("hfov", hfov)?;
        if hfov <= T::zero() || hfov >= T::PI() {
            return Err(invalid("hfov", "must lie in (0, pi)"));
        }
        ensure_finite("frame_rate_hz", frame_rate_hz)?;
        if frame_rate_hz <= T::zero() {
            return Err(invalid("frame_rate_hz", "must be positive"));
        }
        Ok(Self {
            width_px: T::lit(width_px as f64),
            height_px: T::lit(height_px as f64),
            hfov,
            mount,
            frame_rate_hz,
        })
    }

    /// 640×480, 60° horizontal field of view, 30 Hz, looking along boresight.
    pub fn standard() -> Self {
        Self::new(640, 480, T::lit(60f64.to_radians()), Direction::boresight(), T::lit(30.0))
            .expect("standard camera is valid")
    }

    pub fn width_px(&self) -> T {
        self.width_px
    }

    pub fn height_px(&self) -> T {
        self.height_px
    }

    pub fn hfov(&self) -> T {
        self.hfov
    }

    pub fn frame_rate_hz(&self) -> T {
        self.frame_rate_hz
    }

    pub fn mount(&self) -> Direction<T> {
        self.mount
    }

    /// Same intrinsics, different optical axis.
    pub fn with_mount(mut self, mount: Direction<T>) -> Self {
        self.mount = mount;
        self
    }

    pub fn focal_px(&self) -> T {
        (self.width_px / T::two()) / (self.hfov / T::two()).tan()
    }

    pub fn principal_point(&self) -> Pixel<T> {
        Pixel {
            u: self.width_px / T::two(),
            v: self.height_px / T::two(),
        }
    }

    /// Vertical field of view implied by the aspect ratio.
    pub fn vfov(&self) -> T {
        T::two() * ((self.height_px / T::two()) / self.focal_px()).atan()
    }

    fn world_to_camera(&self, p: Position3<T>) -> Position3<T> {
        let (sa, ca) = self.mount.azimuth().sin_cos();
        let (se, ce) = self.mount.elevation().sin_cos();
        let x1 = ca * p.x + sa * p.y;
        let y1 = -sa * p.x + ca * p.y;
        Position3::new(ce * x1 + se * p.z, y1, -se * x1 + ce * p.z)
    }

    fn camera_to_world(&self, c: Position3<T>) -> Position3<T> {
        let (sa, ca) = self.mount.azimuth().sin_cos();
        let (se, ce) = self.mount.elevation().sin_cos();
        let x1 = ce * c.x - se * c.z;
        let z = se * c.x + ce * c.z;
        Position3::new(ca * x1 - sa * c.y, sa * x1 + ca * c.y, z)
    }

    fn in_bounds(&self, px: Pixel<T>) -> bool {
        let slack = T::lit(EDGE_SLACK_PX);
        px.u >= -slack && px.u <= self.width_px + slack && px.v >= -slack && px.v <= self.height_px + slack
    }

    fn clamp_to_image(&self, px: Pixel<T>) -> Pixel<T> {
        Pixel {
            u: px.u.max(T::zero()).min(self.width_px),
            v: px.v.max(T::zero()).min(self.height_px),
        }
    }

    /// Projects a world point. `Ok(None)` means behind the camera or outside
    /// the image rectangle.
    pub fn project(&self, p: Position3<T>) -> Result<Option<Pixel<T>>> {
        if !p.is_finite() {
            return Err(Error::NonFinite { name: "position" });
        }
        if p.norm() <= T::zero() {
            return Err(Error::ZeroVector);
        }
        let c = self.world_to_camera(p);
        if c.x <= T::zero() {
            return Ok(None);
        }
        let f = self.focal_px();
        let pp = self.principal_point();
        // u = cx + f tan(az_rel), v = cy - f tan(el_rel) / cos(az_rel)
        let px = Pixel {
            u: pp.u + f * c.y / c.x,
            v: pp.v - f * c.z / c.x,
        };
        Ok(self.in_bounds(px).then(|| self.clamp_to_image(px)))
    }

    /// Camera-frame bearing `(az_rel, el_rel)` of a pixel; no bounds check.
    pub fn pixel_to_relative(&self, px: Pixel<T>) -> (T, T) {
        let f = self.focal_px();
        let pp = self.principal_point();
        let az = ((px.u - pp.u) / f).atan();
        let el = ((pp.v - px.v) * az.cos() / f).atan();
        (az, el)
    }

    /// World bearing of a pixel ray, without bounds checking. Used to
    /// extrapolate predicted track positions that may leave the image.
    pub fn ray_direction(&self, px: Pixel<T>) -> Direction<T> {
        let f = self.focal_px();
        let pp = self.principal_point();
        let ray = Position3::new(T::one(), (px.u - pp.u) / f, (pp.v - px.v) / f);
        let (d, _) = position_to_direction(self.camera_to_world(ray)).expect("ray has unit forward component");
        d
    }

    /// Pixel in this camera seeing the same ray as `px` does in `other`.
    /// Used to carry image-plane state across a camera rotation. No bounds
    /// check; `None` when the ray falls behind this camera.
    pub fn reproject_from(&self, other: &CameraModel<T>, px: Pixel<T>) -> Option<Pixel<T>> {
        let f = other.focal_px();
        let pp = other.principal_point();
        let ray = Position3::new(T::one(), (px.u - pp.u) / f, (pp.v - px.v) / f);
        let c = self.world_to_camera(other.camera_to_world(ray));
        if c.x <= T::zero() {
            return None;
        }
        let f = self.focal_px();
        let pp = self.principal_point();
        Some(Pixel {
            u: pp.u + f * c.y / c.x,
            v: pp.v - f * c.z / c.x,
        })
    }

    /// World bearing of an in-image pixel.
    pub fn pixel_to_direction(&self, px: Pixel<T>) -> Result<Direction<T>> {
        ensure_finite("u", px.u)?;
        ensure_finite("v", px.v)?;
        if !self.in_bounds(px) {
            return Err(Error::OutOfRange {
                name: "pixel",
                value: px.u.as_f64(),
                range: "image rectangle",
            });
        }
        Ok(self.ray_direction(px))
    }
}

/// Free-function form of [`CameraModel::project`].
pub fn project<T: Scalar>(cam: &CameraModel<T>, p: Position3<T>) -> Result<Option<Pixel<T>>> {
    cam.project(p)
}

/// Free-function form of [`CameraModel::pixel_to_direction`].
pub fn pixel_to_direction<T: Scalar>(cam: &CameraModel<T>, u: T, v: T) -> Result<Direction<T>> {
    cam.pixel_to_direction(Pixel { u, v })
}

/// One bounding box from the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection<T> {
    pub center_u: T,
    pub center_v: T,
    pub box_w: T,
    pub box_h: T,
    pub confidence: T,
    pub frame_index: u64,
    /// Index of the truth target that produced this box; `None` for clutter.
    pub truth_index: Option<usize>,
}

impl<T: Scalar> Detection<T> {
    /// Noise-free detection at a pixel, used for scripted detection streams.
    pub fn at(u: T, v: T, frame_index: u64) -> Self {
        Self {
            center_u: u,
            center_v: v,
            box_w: T::lit(20.0),
            box_h: T::lit(60.0),
            confidence: T::one(),
            frame_index,
            truth_index: Some(0),
        }
    }

    pub fn center(&self) -> Pixel<T> {
        Pixel {
            u: self.center_u,
            v: self.center_v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams<T> {
    pub detection_prob: T,
    pub pixel_noise_sigma: T,
    /// Expected number of false detections per frame.
    pub false_alarm_rate: T,
    pub rng_seed: u64,
    pub target_height_m: T,
    pub target_width_m: T,
}

impl<T: Scalar> DetectorParams<T> {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("detection_prob", self.detection_prob)?;
        ensure_finite("pixel_noise_sigma", self.pixel_noise_sigma)?;
        ensure_finite("false_alarm_rate", self.false_alarm_rate)?;
        if self.detection_prob < T::zero() || self.detection_prob > T::one() {
            return Err(invalid("detection_prob", "must lie in [0, 1]"));
        }
        if self.pixel_noise_sigma < T::zero() {
            return Err(invalid("pixel_noise_sigma", "must be non-negative"));
        }
        if self.false_alarm_rate < T::zero() {
            return Err(invalid("false_alarm_rate", "must be non-negative"));
        }
        if !(self.target_height_m > T::zero()) || !(self.target_width_m > T::zero()) {
            return Err(invalid("target size", "must be positive"));
        }
        Ok(())
    }

    /// Perfect detector: always fires, no noise, no clutter.
    pub fn noiseless(rng_seed: u64) -> Self {
        Self {
            detection_prob: T::one(),
            pixel_noise_sigma: T::zero(),
            false_alarm_rate: T::zero(),
            rng_seed,
            target_height_m: T::lit(1.7),
            target_width_m: T::lit(0.5),
        }
    }
}

/// Runs the synthetic detector on one frame.
///
/// The random stream depends only on `(params.rng_seed, frame_index)`, so the
/// same frame always yields the same boxes regardless of call order.
pub fn synth_detect<T: Scalar>(
    cam: &CameraModel<T>,
    params: &DetectorParams<T>,
    truth: &[Position3<T>],
    frame_index: u64,
) -> Result<Vec<Detection<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    rng.set_stream(frame_index);
    let f = cam.focal_px();
    let sigma = params.pixel_noise_sigma.as_f64();
    let mut out = Vec::new();

    for (i, p) in truth.iter().enumerate() {
        let Some(px) = cam.project(*p)? else {
            continue;
        };
        let hit: f64 = rng.random();
        if hit >= params.detection_prob.as_f64() {
            continue;
        }
        let nu: f64 = rng.sample(StandardNormal);
        let nv: f64 = rng.sample(StandardNormal);
        let conf: f64 = rng.random_range(0.6..1.0);
        let noisy = cam.clamp_to_image(Pixel {
            u: px.u + T::lit(sigma * nu),
            v: px.v + T::lit(sigma * nv),
        });
        let range = p.norm();
        out.push(Detection {
            center_u: noisy.u,
            center_v: noisy.v,
            box_w: f * params.target_width_m / range,
            box_h: f * params.target_height_m / range,
            confidence: T::lit(conf),
            frame_index,
            truth_index: Some(i),
        });
    }

    let lambda = params.false_alarm_rate.as_f64();
    if lambda > 0.0 {
        let n = Poisson::new(lambda)
            .map_err(|e| invalid("false_alarm_rate", e.to_string()))?
            .sample(&mut rng) as u64;
        for _ in 0..n {
            let u: f64 = rng.random_range(0.0..=cam.width_px().as_f64());
            let v: f64 = rng.random_range(0.0..=cam.height_px().as_f64());
            let h: f64 = rng.random_range(10.0..120.0);
            let conf: f64 = rng.random_range(0.3..0.6);
            out.push(Detection {
                center_u: T::lit(u),
                center_v: T::lit(v),
                box_w: T::lit(h / 3.4),
                box_h: T::lit(h),
                confidence: T::lit(conf),
                frame_index,
                truth_index: None,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::direction_to_unit;

    fn cam() -> CameraModel<f64> {
        CameraModel::standard()
    }

    fn at_bearing(az_deg: f64, el_deg: f64) -> Position3<f64> {
        direction_to_unit(Direction::from_degrees(az_deg, el_deg).unwrap()).scale(10.0)
    }

    #[test]
    fn principal_point_on_axis() {
        let px = cam().project(Position3::new(5.0, 0.0, 0.0)).unwrap().unwrap();
        assert_eq!((px.u, px.v), (320.0, 240.0));
        let d = cam().pixel_to_direction(px).unwrap();
        assert!(d.azimuth().abs() < 1e-15 && d.elevation().abs() < 1e-15);
    }

    #[test]
    fn fov_edge_maps_to_image_edge() {
        let px = cam().project(at_bearing(30.0, 0.0)).unwrap().unwrap();
        assert!((px.u - 640.0).abs() < 1e-9);
        let d = pixel_to_direction(&cam(), 640.0, 240.0).unwrap();
        assert!((d.azimuth().to_degrees() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn fifteen_degree_example() {
        // focal = 320 / tan(30 deg) = 554.2563, u = 320 + focal tan(15 deg)
        assert!((cam().focal_px() - 554.256_258_422_040_7).abs() < 1e-9);
        let px = cam().project(at_bearing(15.0, 0.0)).unwrap().unwrap();
        assert!((px.u - 468.512_516_844_081_5).abs() < 1e-9);
        assert!((px.u - 468.52).abs() < 0.01);
        let d = pixel_to_direction(&cam(), 468.52, 240.0).unwrap();
        assert!((d.azimuth().to_degrees() - 15.0).abs() < 1e-3);
    }

    #[test]
    fn out_of_view_cases() {
        assert_eq!(cam().project(at_bearing(35.0, 0.0)).unwrap(), None);
        assert_eq!(cam().project(Position3::new(-5.0, 0.0, 0.0)).unwrap(), None);
        assert_eq!(cam().project(Position3::new(0.0, 5.0, 0.0)).unwrap(), None);
        assert!(cam().project(Position3::origin()).is_err());
        assert!(pixel_to_direction(&cam(), 641.0, 10.0).is_err());
        assert!(pixel_to_direction(&cam(), 10.0, -1.0).is_err());
    }

    #[test]
    fn vertical_fov_from_aspect() {
        // tan(vfov/2) = 240 / focal = 0.75 tan(30 deg)
        let expect = 2.0 * (0.75 * 30f64.to_radians().tan()).atan();
        assert!((cam().vfov() - expect).abs() < 1e-12);
    }

    #[test]
    fn mounted_camera_round_trip() {
        let c = cam().with_mount(Direction::from_degrees(-70.0, 10.0).unwrap());
        let p = at_bearing(-80.0, 14.0);
        let px = c.project(p).unwrap().unwrap();
        let d = c.pixel_to_direction(px).unwrap();
        assert!((d.azimuth().to_degrees() + 80.0).abs() < 1e-9);
        assert!((d.elevation().to_degrees() - 14.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_camera() {
        let b = Direction::boresight();
        assert!(CameraModel::new(640, 480, 200f64.to_radians(), b, 30.0).is_err());
        assert!(CameraModel::new(0, 480, 1.0, b, 30.0).is_err());
        assert!(CameraModel::new(640, 480, 1.0, b, 0.0).is_err());
    }

    #[test]
    fn noiseless_detector_hits_projection() {
        let params = DetectorParams::noiseless(1);
        let p = at_bearing(10.0, 2.0);
        let dets = synth_detect(&cam(), &params, &[p], 0).unwrap();
        assert_eq!(dets.len(), 1);
        let px = cam().project(p).unwrap().unwrap();
        assert_eq!(dets[0].center(), px);
        // 1.7 m at 10 m range
        assert!((dets[0].box_h - cam().focal_px() * 0.17).abs() < 1e-9);
    }

    #[test]
    fn out_of_view_target_yields_nothing() {
        let params = DetectorParams::noiseless(1);
        let dets = synth_detect(&cam(), &params, &[at_bearing(60.0, 0.0)], 5).unwrap();
        assert!(dets.is_empty());
    }

    #[test]
    fn detector_is_deterministic_per_frame() {
        let params = DetectorParams {
            detection_prob: 0.7,
            pixel_noise_sigma: 3.0,
            false_alarm_rate: 2.0,
            ..DetectorParams::noiseless(99)
        };
        let truth = [at_bearing(5.0, 0.0)];
        for frame in 0..50 {
            let a = synth_detect(&cam(), &params, &truth, frame).unwrap();
            let b = synth_detect(&cam(), &params, &truth, frame).unwrap();
            assert_eq!(a, b);
        }
        let a = synth_detect(&cam(), &params, &truth, 3).unwrap();
        let other = DetectorParams { rng_seed: 100, ..params };
        assert_ne!(a, synth_detect(&cam(), &other, &truth, 3).unwrap());
    }

    #[test]
    fn bad_detector_params() {
        let mut p = DetectorParams::<f64>::noiseless(0);
        p.detection_prob = 1.5;
        assert!(p.validate().is_err());
        p.detection_prob = 0.5;
        p.pixel_noise_sigma = -1.0;
        assert!(p.validate().is_err());
        p.pixel_noise_sigma = 0.0;
        p.false_alarm_rate = -0.1;
        assert!(p.validate().is_err());
    }
}
