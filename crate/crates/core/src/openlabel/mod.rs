//! Ingest of the OpenLABEL subset used by OSDaR23-style datasets: objects
//! with 2D boxes and cuboids, frame intervals, camera streams and their
//! calibration. Everything else in a document is ignored.

mod manifest;
mod parse;
mod write;

pub use manifest::{build_manifests, DatasetManifest, Split, SplitManifests, SplitSpec, MANIFEST_VERSION};
pub use parse::{parse_openlabel, parse_openlabel_with, ParseOptions};
pub use write::write_openlabel;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::class::LabelClass;
use crate::geometry::{Box2D, Box3D, CameraIntrinsics, RigidTransform};

#[derive(Debug, thiserror::Error)]
pub enum OpenLabelError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("schema error for object `{object_id}`: {message}")]
    Object { object_id: String, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("calibration error for stream `{stream}`: {message}")]
    Calibration { stream: String, message: String },
    #[error("manifest validation failed: {0}")]
    Manifest(String),
    #[error(transparent)]
    Format(#[from] crate::io::FormatError),
}

/// One annotated object of a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectLabel {
    pub object_id: String,
    pub class: LabelClass,
    pub box2d: Option<Box2D>,
    pub box3d: Option<Box3D>,
    pub source_sensor: String,
}

impl ObjectLabel {
    pub fn is_paired(&self) -> bool {
        self.box2d.is_some() && self.box3d.is_some()
    }
}

/// Intrinsics of a camera stream and the sensor-to-camera extrinsics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraCalibration {
    pub intrinsics: CameraIntrinsics,
    pub sensor_to_camera: RigidTransform,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameWarnings {
    /// Cuboids whose roll/pitch were discarded.
    pub non_yaw_rotations: u32,
    /// The selected camera had no usable calibration; geometry ops are skipped.
    pub missing_calibration: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameAnnotation {
    pub frame_id: String,
    pub labels: Vec<ObjectLabel>,
    pub calibration: BTreeMap<String, CameraCalibration>,
    pub cloud_path: Option<String>,
    pub image_path: Option<String>,
    #[serde(default)]
    pub warnings: FrameWarnings,
}

impl FrameAnnotation {
    /// Calibration for `camera`, or the only/first calibrated camera when `None`.
    pub fn camera(&self, camera: Option<&str>) -> Option<(&str, &CameraCalibration)> {
        match camera {
            Some(name) => self.calibration.get_key_value(name).map(|(k, v)| (k.as_str(), v)),
            None => self.calibration.iter().next().map(|(k, v)| (k.as_str(), v)),
        }
    }
}

/// Labels carrying both a 2D box and a cuboid, in input order.
pub fn filter_paired(labels: &[ObjectLabel]) -> Vec<ObjectLabel> {
    labels.iter().filter(|l| l.is_paired()).cloned().collect()
}
