//! Cut frustums out of a rendered depth map, fuse distances, route them and
//! rasterize a BEV grid.

use mff_core::frustum::{extract_frustum, rasterize_bev, route, to_frustum_frame, BevConfig, Detection25D, FusionConfig};
use mff_core::synth::SceneSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SceneSpec::default();
    let frame = &spec.render()?[1];
    let k = spec.camera.intrinsics()?;
    let cam_to_sensor = spec.camera.camera_to_sensor();
    let fusion = FusionConfig::default();
    let kitti = FusionConfig::kitti_profile();
    for ((class, b), b2) in frame.boxes.iter().zip(&frame.boxes2d) {
        // the detector is 5% short on purpose
        let det = Detection25D::new(SceneSpec::frame_id(frame.key), *class, *b2, 0.9, 0.95 * b.center[0])?;
        let f = extract_frustum(&det, &frame.depth, &k, &cam_to_sensor, &fusion)?;
        let default_route = route(&f, &fusion)?;
        let kitti_route = route(&f, &kitti)?;
        let grid = rasterize_bev(&to_frustum_frame(&f)?, &BevConfig::default())?;
        let occupied = grid.occupancy.iter().filter(|v| **v > 0.0).count();
        println!(
            "{class:?}: gt {:.1} m, detector {:.1} m, centroid {:.1} m, fused {:.1} m, {} points -> {:?} ({:?} with kitti thresholds), {occupied} BEV cells",
            b.center[0],
            det.distance_m,
            f.centroid_distance,
            default_route.fused_distance,
            f.points.len(),
            default_route.route,
            kitti_route.route
        );
    }
    Ok(())
}
