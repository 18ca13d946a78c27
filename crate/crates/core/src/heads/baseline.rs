use serde::{Deserialize, Serialize};

use super::{ClassPriorTable, HeadError, HeadPrediction};
use crate::frustum::{FrameTag, Frustum, Route};
use crate::geometry::{frustum_frame_for, Box3D, Vec3};

/// Score multiplier for frustums built from the detector distance alone.
const SYNTHETIC_SCORE_FACTOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineOptions {
    /// Half the prior length times this factor is added along the center ray.
    ///
    /// Depth maps only see the near surface, so the centroid of an opaque
    /// object sits about `l/2` short of its center and the fused distance
    /// about `w * l/2` short. Setting this to the fusion weight `w` removes
    /// that bias; 0 keeps the fused distance as is.
    pub surface_offset: f64,
}

/// Deterministic box from a frustum-frame frustum: center at the fused range
/// with the median lateral and vertical offsets, prior dims, yaw along the
/// frustum ray.
pub fn baseline_head(
    f: &Frustum,
    route: Route,
    frustum_ref: usize,
    priors: &ClassPriorTable,
    opts: &BaselineOptions,
) -> Result<HeadPrediction, HeadError> {
    if f.frame_tag != FrameTag::Frustum {
        return Err(HeadError::WrongFrame);
    }
    if f.points.is_empty() {
        return Err(HeadError::EmptyFrustum);
    }
    let class = f.detection.class;
    let prior = priors.get(class);
    let to_sensor = frustum_frame_for(f.azimuth).inverse();
    let lateral = to_sensor.apply(&f.centroid).y;
    let mut range = f.fused_distance.hypot(lateral);
    if !f.synthetic {
        range += opts.surface_offset * prior.dims[0] / 2.0;
    }
    let median = |axis: usize| {
        let mut v: Vec<f64> = f.points.points().iter().map(|p| p[axis]).collect();
        crate::frustum::median_of(&mut v)
    };
    let center = to_sensor.apply(&Vec3::new(range, median(1), median(2)));
    let box3d = Box3D::new(center, prior.dims, f.azimuth).expect("prior dims are positive");
    let mut score = f.detection.confidence;
    if f.synthetic {
        score *= SYNTHETIC_SCORE_FACTOR;
    }
    Ok(HeadPrediction { frame_id: f.detection.frame_id.clone(), class, box3d, score, route, frustum_ref })
}
