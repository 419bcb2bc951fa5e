//! Rigorous camera-to-ground geometry.

pub mod attitude;
pub mod ellipsoid;
pub mod lcc;
pub mod model;
pub mod orbit;
pub mod sensor;
pub mod virtual_linear;

pub use attitude::{AttitudeProfile, AttitudeState};
pub use ellipsoid::GroundPoint;
pub use lcc::{LccGrid, LccProjection};
pub use model::{ground_to_pixel, pixel_to_ground, Platform, Pose};
pub use orbit::{propagate_orbit, OrbitElements, OrbitState};
pub use sensor::{Camera, Distortion, LookCorrection, Mode, SensorGeometry};
pub use virtual_linear::{build_virtual_linear_model, VirtualLinearModel};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Active rotation about the x axis.
pub fn rot_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

/// Active rotation about the y axis.
pub fn rot_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Active rotation about the z axis.
pub fn rot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}
