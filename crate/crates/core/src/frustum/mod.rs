//! Frustums from depth maps and 2.5D detections, distance fusion, short/long
//! routing and BEV rasterization.

mod bev;
mod config;
mod detection;
mod distance;
mod extract;

pub use bev::{rasterize_bev, write_bev, BevConfig, BevGrid, BevWindow};
pub use config::{CentroidStatistic, FusionConfig, Route, RoutingDecision};
pub use detection::{parse_detections, read_detections, write_detections, Detection25D, MAX_DISTANCE_M};
pub use distance::{denormalize_distance, huber, normalize_distance};
pub use extract::{
    backproject_depth_map, distance_only_frustum, median_of, extract_frustum, route, to_frustum_frame, Frustum, FrameTag,
};

use crate::geometry::GeometryError;

#[derive(Debug, thiserror::Error)]
pub enum FrustumError {
    #[error("no valid depth pixels inside the detection box")]
    EmptyFrustum,
    #[error("frustum is already in the {0} frame")]
    State(&'static str),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("value {value} outside [{min}, {max}]")]
    Range { value: f64, min: f64, max: f64 },
    #[error("invalid detection: {0}")]
    Detection(String),
    #[error("detections line {line}: {message}")]
    DetectionLine { line: usize, message: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Format(#[from] crate::io::FormatError),
}
