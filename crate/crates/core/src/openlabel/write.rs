use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use super::{CameraCalibration, FrameAnnotation, OpenLabelError};
use crate::class::ClassMap;

const DEFAULT_CAMERA: &str = "camera";
const DEFAULT_LIDAR: &str = "lidar";

/// Serialize frames back into the OpenLABEL subset read by
/// [`parse_openlabel`](super::parse_openlabel).
///
/// Cuboids are written as 9-value Euler boxes with zero roll and pitch, so
/// `warnings.non_yaw_rotations` reads back as zero.
pub fn write_openlabel(frames: &[FrameAnnotation], class_map: &ClassMap) -> Result<String, OpenLabelError> {
    let mut calibration: BTreeMap<&str, &CameraCalibration> = BTreeMap::new();
    let mut types: BTreeMap<&str, String> = BTreeMap::new();
    let mut lidar: Option<&str> = None;
    for frame in frames {
        for (name, cal) in &frame.calibration {
            match calibration.get(name.as_str()) {
                Some(prev) if *prev != cal => {
                    return Err(OpenLabelError::Schema(format!(
                        "camera `{name}` has different calibrations across frames"
                    )))
                }
                _ => {
                    calibration.insert(name, cal);
                }
            }
        }
        for label in &frame.labels {
            let ty = class_map.dataset_name(&label.class);
            match types.get(label.object_id.as_str()) {
                Some(prev) if *prev != ty => {
                    return Err(OpenLabelError::Object {
                        object_id: label.object_id.clone(),
                        message: format!("class changes between frames ({prev} vs {ty})"),
                    })
                }
                _ => {
                    types.insert(&label.object_id, ty);
                }
            }
            if label.box2d.is_none() && !label.source_sensor.is_empty() && lidar.is_none() {
                lidar = Some(&label.source_sensor);
            }
        }
    }
    let lidar = lidar.unwrap_or(DEFAULT_LIDAR);
    let camera = calibration.keys().next().copied().unwrap_or(DEFAULT_CAMERA);

    let mut streams = Map::new();
    let mut coordinate_systems = Map::new();
    for (name, cal) in &calibration {
        let k = &cal.intrinsics;
        streams.insert(
            name.to_string(),
            json!({
                "type": "camera",
                "stream_properties": {
                    "intrinsics_pinhole": {
                        "camera_matrix_3x4": [k.fx, 0.0, k.cx, 0.0, 0.0, k.fy, k.cy, 0.0, 0.0, 0.0, 1.0, 0.0],
                        "distortion_coeffs_1xN": [],
                        "width_px": k.width,
                        "height_px": k.height,
                    }
                }
            }),
        );
        coordinate_systems.insert(
            name.to_string(),
            json!({
                "type": "sensor_cs",
                "parent": lidar,
                "pose_wrt_parent": {
                    "matrix4x4": cal.sensor_to_camera.inverse().to_matrix4_row_major().to_vec()
                }
            }),
        );
    }
    let has_image = frames.iter().any(|f| f.image_path.is_some());
    let has_bbox = frames.iter().flat_map(|f| &f.labels).any(|l| l.box2d.is_some());
    if !streams.contains_key(camera) && (has_image || has_bbox) {
        streams.insert(camera.to_string(), json!({ "type": "camera" }));
    }
    streams.insert(lidar.to_string(), json!({ "type": "lidar" }));

    let objects: Map<String, Value> = types
        .iter()
        .map(|(uid, ty)| (uid.to_string(), json!({ "name": uid, "type": ty })))
        .collect();

    let mut out_frames = Map::new();
    for frame in frames {
        let mut frame_objects = Map::new();
        for label in &frame.labels {
            let mut data = Map::new();
            if let Some(b) = &label.box2d {
                let mut entry = Map::new();
                entry.insert("name".into(), json!("bbox"));
                entry.insert(
                    "val".into(),
                    json!([(b.x1 + b.x2) / 2.0, (b.y1 + b.y2) / 2.0, b.x2 - b.x1, b.y2 - b.y1]),
                );
                if !label.source_sensor.is_empty() {
                    entry.insert("stream".into(), json!(label.source_sensor));
                }
                data.insert("bbox".into(), json!([entry]));
            }
            if let Some(b) = &label.box3d {
                let c = b.center();
                let [l, w, h] = b.dims;
                let mut entry = Map::new();
                entry.insert("name".into(), json!("cuboid"));
                entry.insert("val".into(), json!([c.x, c.y, c.z, 0.0, 0.0, b.yaw, l, w, h]));
                if label.box2d.is_none() && !label.source_sensor.is_empty() {
                    entry.insert("coordinate_system".into(), json!(label.source_sensor));
                }
                data.insert("cuboid".into(), json!([entry]));
            }
            frame_objects.insert(label.object_id.clone(), json!({ "object_data": data }));
        }
        let mut frame_streams = Map::new();
        if let Some(p) = &frame.image_path {
            frame_streams.insert(camera.to_string(), json!({ "uri": p }));
        }
        if let Some(p) = &frame.cloud_path {
            frame_streams.insert(lidar.to_string(), json!({ "uri": p }));
        }
        out_frames.insert(
            frame.frame_id.clone(),
            json!({ "objects": frame_objects, "frame_properties": { "streams": frame_streams } }),
        );
    }

    let doc = json!({
        "openlabel": {
            "metadata": { "schema_version": "1.0.0" },
            "streams": streams,
            "coordinate_systems": coordinate_systems,
            "objects": objects,
            "frames": out_frames,
        }
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    text.push('\n');
    Ok(text)
}
