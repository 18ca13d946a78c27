use super::{DepthMap, SparseDepth};
use crate::geometry::{project_point, CameraIntrinsics, PointCloud, RigidTransform};
use crate::raster::Raster;

/// Projects a sensor-frame cloud into the camera and keeps the nearest depth
/// per pixel. Points behind the camera or off the image are discarded.
///
/// A point lands in the pixel whose center is nearest to its projection.
pub fn render_sparse_depth(cloud: &PointCloud, sensor_to_camera: &RigidTransform, k: &CameraIntrinsics) -> SparseDepth {
    let mut r = Raster::filled(k.width, k.height, f32::NAN);
    for p in cloud.points() {
        let Ok(proj) = project_point(&sensor_to_camera.apply(p), k) else {
            continue;
        };
        let (col, row) = ((proj.u + 0.5).floor(), (proj.v + 0.5).floor());
        if col < 0.0 || row < 0.0 || col >= f64::from(k.width) || row >= f64::from(k.height) {
            continue;
        }
        let z = proj.depth as f32;
        if !(z > 0.0) {
            continue;
        }
        let (col, row) = (col as u32, row as u32);
        let cur = r.get(col, row);
        if cur.is_nan() || z < cur {
            r.set(col, row, z);
        }
    }
    SparseDepth::new(DepthMap::new(r).expect("rendered depths are positive"))
}
