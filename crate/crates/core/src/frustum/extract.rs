use serde::{Deserialize, Serialize};

use super::{CentroidStatistic, Detection25D, FrustumError, FusionConfig, Route, RoutingDecision};
use crate::depth::DepthMap;
use crate::geometry::{backproject_pixel, frustum_frame_for, CameraIntrinsics, PointCloud, RigidTransform, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameTag {
    Sensor,
    Frustum,
}

impl FrameTag {
    fn name(self) -> &'static str {
        match self {
            FrameTag::Sensor => "sensor",
            FrameTag::Frustum => "frustum",
        }
    }
}

/// Pseudo-cloud of one detection with its fused center estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Frustum {
    pub detection: Detection25D,
    pub points: PointCloud,
    /// Per-axis centroid statistic, in the frame named by `frame_tag`.
    pub centroid: Vec3,
    /// Centroid statistic of the sensor-frame x coordinates.
    pub centroid_distance: f64,
    pub fused_distance: f64,
    /// Azimuth of the fused center ray in the sensor frame.
    pub azimuth: f64,
    pub frame_tag: FrameTag,
    /// Built from the detector distance alone (no depth inside the box).
    pub synthetic: bool,
}

impl Frustum {
    /// Fused center in the sensor frame: fused forward distance with the
    /// centroid's lateral and vertical offsets.
    pub fn fused_center_sensor(&self) -> Vec3 {
        let c = match self.frame_tag {
            FrameTag::Sensor => self.centroid,
            FrameTag::Frustum => frustum_frame_for(self.azimuth).inverse().apply(&self.centroid),
        };
        Vec3::new(self.fused_distance, c.y, c.z)
    }
}

/// Back-project every `stride`-th valid pixel (rows and columns from 0) into
/// the sensor frame, in row-major order.
pub fn backproject_depth_map(
    depth: &DepthMap,
    k: &CameraIntrinsics,
    camera_to_sensor: &RigidTransform,
    stride: u32,
) -> PointCloud {
    let stride = stride.max(1) as usize;
    let mut points = Vec::new();
    for row in (0..depth.height()).step_by(stride) {
        for col in (0..depth.width()).step_by(stride) {
            if let Some(d) = depth.depth(col, row) {
                let p = backproject_pixel(col as f64, row as f64, d as f64, k).expect("depth maps hold positive depths");
                points.push(camera_to_sensor.apply(&p));
            }
        }
    }
    PointCloud::from_points(points).expect("back-projected points are finite")
}

/// Median, with the mean of the two middle values for even counts. Sorts in place.
pub fn median_of(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn centroid(points: &[Vec3], statistic: CentroidStatistic) -> Vec3 {
    match statistic {
        CentroidStatistic::Mean => points.iter().sum::<Vec3>() / points.len() as f64,
        CentroidStatistic::Median => {
            let axis = |i: usize| median_of(&mut points.iter().map(|p| p[i]).collect::<Vec<_>>());
            Vec3::new(axis(0), axis(1), axis(2))
        }
    }
}

/// Pseudo-cloud from the valid pixels whose centers lie inside the detection
/// box, with the centroid statistic and fused distance.
pub fn extract_frustum(
    det: &Detection25D,
    depth: &DepthMap,
    k: &CameraIntrinsics,
    camera_to_sensor: &RigidTransform,
    cfg: &FusionConfig,
) -> Result<Frustum, FrustumError> {
    let b = &det.box2d;
    let col0 = b.x1.ceil().max(0.0) as i64;
    let col1 = (b.x2.floor() as i64).min(depth.width() as i64 - 1);
    let row0 = b.y1.ceil().max(0.0) as i64;
    let row1 = (b.y2.floor() as i64).min(depth.height() as i64 - 1);
    let mut points = Vec::new();
    for row in row0..=row1 {
        for col in col0..=col1 {
            if let Some(d) = depth.depth(col as u32, row as u32) {
                let p = backproject_pixel(col as f64, row as f64, d as f64, k)?;
                points.push(camera_to_sensor.apply(&p));
            }
        }
    }
    if points.is_empty() {
        return Err(FrustumError::EmptyFrustum);
    }
    let trim = (points.len() as f64 * cfg.trim_fraction).floor() as usize;
    if trim > 0 {
        points.sort_by(|a, b| a.x.total_cmp(&b.x));
        points.truncate(points.len() - trim);
        points.drain(..trim);
    }
    let c = centroid(&points, cfg.centroid_statistic);
    let fused = cfg.fuse(c.x, det.distance_m);
    Ok(Frustum {
        detection: det.clone(),
        points: PointCloud::from_points(points)?,
        centroid: c,
        centroid_distance: c.x,
        fused_distance: fused,
        azimuth: c.y.atan2(fused),
        frame_tag: FrameTag::Sensor,
        synthetic: false,
    })
}

/// Single-point frustum on the box-center ray at the detector distance, for
/// boxes without valid depth.
pub fn distance_only_frustum(
    det: &Detection25D,
    k: &CameraIntrinsics,
    camera_to_sensor: &RigidTransform,
) -> Frustum {
    let (u, v) = det.box2d.center();
    let dir = camera_to_sensor.apply_vector(&Vec3::new((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0));
    let origin = *camera_to_sensor.translation();
    let scale = if dir.x > 1e-12 { (det.distance_m - origin.x) / dir.x } else { f64::NAN };
    let p = if scale.is_finite() && scale > 0.0 {
        origin + dir * scale
    } else {
        Vec3::new(det.distance_m, 0.0, 0.0)
    };
    Frustum {
        detection: det.clone(),
        points: PointCloud::from_points(vec![p]).expect("finite point"),
        centroid: p,
        centroid_distance: p.x,
        fused_distance: det.distance_m,
        azimuth: p.y.atan2(det.distance_m),
        frame_tag: FrameTag::Sensor,
        synthetic: true,
    }
}

/// Long iff the fused distance exceeds the class threshold; ties go short.
pub fn route(f: &Frustum, cfg: &FusionConfig) -> Result<RoutingDecision, FrustumError> {
    let threshold = cfg.threshold(f.detection.class)?;
    let route = if f.fused_distance > threshold { Route::Long } else { Route::Short };
    Ok(RoutingDecision { route, fused_distance: f.fused_distance, threshold_used: threshold })
}

/// Rotate a sensor-frame frustum so its fused center ray lies on +x.
pub fn to_frustum_frame(f: &Frustum) -> Result<Frustum, FrustumError> {
    if f.frame_tag == FrameTag::Frustum {
        return Err(FrustumError::State(FrameTag::Frustum.name()));
    }
    let t = frustum_frame_for(f.azimuth);
    Ok(Frustum {
        points: crate::geometry::transform_points(&t, &f.points),
        centroid: t.apply(&f.centroid),
        frame_tag: FrameTag::Frustum,
        ..f.clone()
    })
}
