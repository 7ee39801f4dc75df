//! Simulation core for a vision-steered rotatable antenna link.
//!
//! A two-axis servo points a directional antenna at a moving user. The user
//! is seen by a camera, detected, tracked in the image plane and handed to a
//! PID steering loop; the link budget then reports what the user receives
//! compared with an antenna that cannot rotate.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`). The
//! aliases below pin them to `f64`, which is what the scenario engine uses.

pub mod antenna;
pub mod assignment;
pub mod channel;
pub mod control;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod scalar;
pub mod tracking;
pub mod vision;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Direction = geometry::Direction<f64>;
pub type Position3 = geometry::Position3<f64>;
pub type RadiationPattern = antenna::RadiationPattern<f64>;
pub type LinkParams = channel::LinkParams<f64>;
pub type CameraModel = vision::CameraModel<f64>;
pub type Detection = vision::Detection<f64>;
pub type DetectorParams = vision::DetectorParams<f64>;
pub type Pixel = vision::Pixel<f64>;
pub type TrackState = tracking::TrackState<f64>;
pub type TrackerParams = tracking::TrackerParams<f64>;
pub type Tracker = tracking::Tracker<f64>;
pub type ServoAxisModel = control::ServoAxisModel<f64>;
pub type PidState = control::PidState<f64>;
pub type SupervisorState = control::SupervisorState<f64>;
pub type SteeringController = control::SteeringController<f64>;

pub type DirectionF32 = geometry::Direction<f32>;
pub type RadiationPatternF32 = antenna::RadiationPattern<f32>;
