//! 3D boxes from routed frustums: the geometric baseline head, class priors,
//! file adapters for external heads and cross-route NMS.

mod adapter;
mod baseline;
mod nms;
mod priors;

pub use adapter::{
    index_record, read_adapter_predictions, read_bundle_index, read_predictions, write_frustum_bundle, write_predictions,
    BundleIndexRecord, BundleItem,
};
pub use baseline::{baseline_head, BaselineOptions};
pub use nms::{merge_and_nms, DEFAULT_NMS_IOU};
pub use priors::{compute_class_priors, ClassPrior, ClassPriorTable};

use serde::{Deserialize, Serialize};

use crate::class::ClassId;
use crate::frustum::Route;
use crate::geometry::Box3D;

#[derive(Debug, thiserror::Error)]
pub enum HeadError {
    #[error("frustum has no points")]
    EmptyFrustum,
    #[error("baseline head expects a frustum-frame frustum")]
    WrongFrame,
    #[error("line {line}: field `{field}`: {message}")]
    Record { line: usize, field: String, message: String },
    #[error(transparent)]
    Format(#[from] crate::io::FormatError),
}

/// A sensor-frame 3D box produced for one detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadPrediction {
    pub frame_id: String,
    pub class: ClassId,
    pub box3d: Box3D,
    pub score: f64,
    pub route: Route,
    /// Index of the source detection within its frame.
    pub frustum_ref: usize,
}
