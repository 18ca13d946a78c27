//! Frames, pinhole projection, rigid transforms and oriented boxes.
//!
//! Frame conventions used throughout the crate:
//!
//! * sensor frame: x forward, y left, z up. An object's *distance* is its
//!   sensor-frame x coordinate.
//! * camera frame: z forward (optical axis), x right, y down.
//!
//! Pixel coordinates address pixel centers: pixel `(col, row)` is centered at
//! `u = col`, `v = row`. Depth maps store camera-frame z, not ray length.

mod boxes;
mod camera;
mod cloud;
mod transform;

pub use boxes::{normalize_angle, points_in_box, Box2D, Box3D};
pub use camera::{backproject_pixel, project_point, CameraIntrinsics, Projection};
pub use cloud::PointCloud;
pub use transform::{frustum_frame_for, transform_points, RigidTransform};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("point has non-positive depth {0}")]
    NonPositiveDepth(f64),
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("invalid rigid transform: {0}")]
    InvalidTransform(String),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
}
