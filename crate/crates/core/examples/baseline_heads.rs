//! Turn routed frustums into 3D boxes with the baseline head, merge both
//! routes by NMS and compare with the ground truth.

use mff_core::eval::iou_3d;
use mff_core::frustum::{extract_frustum, route, to_frustum_frame, Detection25D, FusionConfig, Route};
use mff_core::heads::{baseline_head, merge_and_nms, BaselineOptions, ClassPriorTable, DEFAULT_NMS_IOU};
use mff_core::synth::SceneSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SceneSpec::default();
    let frame = &spec.render()?[2];
    let k = spec.camera.intrinsics()?;
    let cam_to_sensor = spec.camera.camera_to_sensor();
    let fusion = FusionConfig::default();
    let opts = BaselineOptions { surface_offset: fusion.w };
    let priors = ClassPriorTable::default();

    let (mut short, mut long) = (Vec::new(), Vec::new());
    for (i, ((class, b), b2)) in frame.boxes.iter().zip(&frame.boxes2d).enumerate() {
        let det = Detection25D::new(SceneSpec::frame_id(frame.key), *class, *b2, 0.9, b.center[0])?;
        let f = extract_frustum(&det, &frame.depth, &k, &cam_to_sensor, &fusion)?;
        let r = route(&f, &fusion)?.route;
        let p = baseline_head(&to_frustum_frame(&f)?, r, i, &priors, &opts)?;
        match r {
            Route::Short => short.push(p),
            Route::Long => long.push(p),
        }
    }
    for p in merge_and_nms(short, long, DEFAULT_NMS_IOU) {
        let gt = &frame.boxes[p.frustum_ref].1;
        let center_err = (p.box3d.center() - gt.center()).norm();
        println!(
            "{:?} via {:?}: center {:?}, error {center_err:.2} m, IoU {:.2} (fallback dims)",
            p.class,
            p.route,
            p.box3d.center.map(|v| (v * 100.0).round() / 100.0),
            iou_3d(&p.box3d, gt)
        );
    }
    Ok(())
}
