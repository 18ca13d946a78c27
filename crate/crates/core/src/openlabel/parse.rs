use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::{CameraCalibration, FrameAnnotation, FrameWarnings, ObjectLabel, OpenLabelError};
use crate::class::ClassMap;
use crate::geometry::{Box2D, Box3D, CameraIntrinsics, RigidTransform, Vec3};

/// Stream selection and class mapping used while parsing.
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Camera stream whose 2D boxes are taken; first camera stream when unset.
    pub camera: Option<String>,
    /// LiDAR stream whose cuboids and clouds are taken; first lidar stream when unset.
    pub lidar: Option<String>,
    /// Accept cameras with nonzero distortion coefficients (treated as pinhole).
    pub ignore_distortion: bool,
    pub class_map: ClassMap,
}

/// Parse with default options.
pub fn parse_openlabel(text: &str) -> Result<Vec<FrameAnnotation>, OpenLabelError> {
    parse_openlabel_with(text, &ParseOptions::default())
}

pub fn parse_openlabel_with(
    text: &str,
    opts: &ParseOptions,
) -> Result<Vec<FrameAnnotation>, OpenLabelError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| OpenLabelError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let root = doc
        .get("openlabel")
        .and_then(Value::as_object)
        .ok_or_else(|| OpenLabelError::Schema("missing top-level `openlabel` object".into()))?;

    let streams = object_field(root, "streams")?;
    let coordinate_systems = object_field(root, "coordinate_systems")?;
    let objects = object_field(root, "objects")?;
    let frames = object_field(root, "frames")?;

    let camera = select_stream(&streams, "camera", opts.camera.as_deref())?;
    let lidar = select_stream(&streams, "lidar", opts.lidar.as_deref())?;

    let mut calibration = BTreeMap::new();
    for (name, stream) in &streams {
        if stream_type(stream) != Some("camera") {
            continue;
        }
        if let Some(cal) = parse_calibration(name, stream, &coordinate_systems, opts)? {
            calibration.insert(name.clone(), cal);
        }
    }
    let missing_calibration = match &camera {
        Some(c) => !calibration.contains_key(c),
        None => true,
    };

    let mut keys: Vec<&String> = frames.keys().collect();
    keys.sort_by(|a, b| match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    });

    let mut out = Vec::with_capacity(keys.len());
    for key in keys {
        let frame = &frames[key];
        let frame_objects = frame.get("objects").and_then(Value::as_object);
        let mut warnings = FrameWarnings { non_yaw_rotations: 0, missing_calibration };
        let mut labels = Vec::new();
        for (uid, object) in &objects {
            let mut data: Vec<&Map<String, Value>> = Vec::new();
            if let Some(static_data) = object.get("object_data").and_then(Value::as_object) {
                if in_intervals(object.get("frame_intervals"), key) {
                    data.push(static_data);
                }
            }
            let dynamic = frame_objects
                .and_then(|m| m.get(uid))
                .and_then(|o| o.get("object_data"))
                .and_then(Value::as_object);
            if let Some(d) = dynamic {
                data.push(d);
            }
            if data.is_empty() {
                continue;
            }
            let name = object
                .get("type")
                .and_then(Value::as_str)
                .ok_or_else(|| object_error(uid, "missing `type`"))?;
            let class = opts.class_map.classify(name);
            // Frame-level data wins over static data.
            let bbox = data.iter().rev().find_map(|d| pick(d, "bbox", "stream", camera.as_deref()));
            let cuboid = data
                .iter()
                .rev()
                .find_map(|d| pick(d, "cuboid", "coordinate_system", lidar.as_deref()));
            let box2d = match bbox {
                Some(b) => Some(parse_bbox(uid, b, camera.as_deref().and_then(|c| calibration.get(c)))?),
                None => None,
            };
            let box3d = match cuboid {
                Some(c) => {
                    let (b, non_yaw) = parse_cuboid(uid, c)?;
                    if non_yaw {
                        warnings.non_yaw_rotations += 1;
                    }
                    Some(b)
                }
                None => None,
            };
            if box2d.is_none() && box3d.is_none() {
                continue;
            }
            let source_sensor = bbox
                .and_then(|b| b.get("stream"))
                .or_else(|| cuboid.and_then(|c| c.get("coordinate_system")))
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            labels.push(ObjectLabel { object_id: uid.clone(), class, box2d, box3d, source_sensor });
        }
        let uri = |stream: &Option<String>| {
            stream.as_ref().and_then(|s| {
                frame
                    .pointer(&format!("/frame_properties/streams/{s}/uri"))
                    .and_then(Value::as_str)
                    .map(str::to_string)
            })
        };
        out.push(FrameAnnotation {
            frame_id: key.clone(),
            labels,
            calibration: calibration.clone(),
            cloud_path: uri(&lidar),
            image_path: uri(&camera),
            warnings,
        });
    }
    Ok(out)
}

fn object_field(root: &Map<String, Value>, key: &str) -> Result<Map<String, Value>, OpenLabelError> {
    match root.get(key) {
        None | Some(Value::Null) => Ok(Map::new()),
        Some(Value::Object(m)) => Ok(m.clone()),
        Some(_) => Err(OpenLabelError::Schema(format!("`{key}` must be an object"))),
    }
}

fn object_error(uid: &str, message: impl Into<String>) -> OpenLabelError {
    OpenLabelError::Object { object_id: uid.to_string(), message: message.into() }
}

fn stream_type(stream: &Value) -> Option<&str> {
    stream.get("type").and_then(Value::as_str)
}

fn select_stream(
    streams: &Map<String, Value>,
    kind: &str,
    wanted: Option<&str>,
) -> Result<Option<String>, OpenLabelError> {
    match wanted {
        Some(name) => match streams.get(name) {
            Some(s) if stream_type(s) == Some(kind) => Ok(Some(name.to_string())),
            Some(_) => Err(OpenLabelError::Schema(format!("stream `{name}` is not a {kind}"))),
            // Documents without stream metadata still carry per-label stream tags.
            None if streams.is_empty() => Ok(Some(name.to_string())),
            None => Err(OpenLabelError::Schema(format!("no {kind} stream named `{name}`"))),
        },
        None => Ok(streams
            .iter()
            .find(|(_, s)| stream_type(s) == Some(kind))
            .map(|(k, _)| k.clone())),
    }
}

fn in_intervals(intervals: Option<&Value>, frame_key: &str) -> bool {
    let Some(list) = intervals.and_then(Value::as_array) else {
        return true;
    };
    let Ok(f) = frame_key.parse::<i64>() else {
        return true;
    };
    list.iter().any(|iv| {
        let start = iv.get("frame_start").and_then(Value::as_i64).unwrap_or(i64::MIN);
        let end = iv.get("frame_end").and_then(Value::as_i64).unwrap_or(i64::MAX);
        (start..=end).contains(&f)
    })
}

/// First entry of `object_data[kind]` whose `tag_key` matches `wanted`;
/// untagged entries match any selection.
fn pick<'a>(
    data: &'a Map<String, Value>,
    kind: &str,
    tag_key: &str,
    wanted: Option<&str>,
) -> Option<&'a Map<String, Value>> {
    let entries = data.get(kind)?.as_array()?;
    entries.iter().filter_map(Value::as_object).find(|e| {
        match (wanted, e.get(tag_key).and_then(Value::as_str)) {
            (Some(w), Some(tag)) => w == tag,
            _ => true,
        }
    })
}

fn numbers(uid: &str, entry: &Map<String, Value>, what: &str) -> Result<Vec<f64>, OpenLabelError> {
    let val = entry
        .get("val")
        .and_then(Value::as_array)
        .ok_or_else(|| object_error(uid, format!("{what} without `val` array")))?;
    val.iter()
        .map(|v| v.as_f64().ok_or_else(|| object_error(uid, format!("{what} has a non-numeric value"))))
        .collect()
}

fn parse_bbox(
    uid: &str,
    entry: &Map<String, Value>,
    calibration: Option<&CameraCalibration>,
) -> Result<Box2D, OpenLabelError> {
    let v = numbers(uid, entry, "bbox")?;
    if v.len() != 4 {
        return Err(object_error(uid, format!("bbox needs 4 values, got {}", v.len())));
    }
    let (cx, cy, w, h) = (v[0], v[1], v[2], v[3]);
    let (x1, y1, x2, y2) = (cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0);
    let b = match calibration {
        Some(c) => Box2D::new_clipped(x1, y1, x2, y2, c.intrinsics.width, c.intrinsics.height),
        None => Box2D::new(x1, y1, x2, y2),
    };
    b.map_err(|e| object_error(uid, e.to_string()))
}

/// Yaw-only box from a 9-value Euler or 10-value quaternion cuboid; the flag
/// reports discarded roll/pitch.
fn parse_cuboid(uid: &str, entry: &Map<String, Value>) -> Result<(Box3D, bool), OpenLabelError> {
    const ROT_EPS: f64 = 1e-9;
    let v = numbers(uid, entry, "cuboid")?;
    let center = Vec3::new(v.first().copied().unwrap_or(0.0), v.get(1).copied().unwrap_or(0.0), v.get(2).copied().unwrap_or(0.0));
    let (yaw, non_yaw, dims) = match v.len() {
        9 => (v[5], v[3].abs() > ROT_EPS || v[4].abs() > ROT_EPS, [v[6], v[7], v[8]]),
        10 => {
            let (qx, qy, qz, qw) = (v[3], v[4], v[5], v[6]);
            let n = (qx * qx + qy * qy + qz * qz + qw * qw).sqrt();
            if !(n > 0.0 && n.is_finite()) {
                return Err(object_error(uid, "cuboid quaternion has zero norm"));
            }
            let (qx, qy, qz, qw) = (qx / n, qy / n, qz / n, qw / n);
            let yaw = (2.0 * (qw * qz + qx * qy)).atan2(1.0 - 2.0 * (qy * qy + qz * qz));
            (yaw, qx.abs() > ROT_EPS || qy.abs() > ROT_EPS, [v[7], v[8], v[9]])
        }
        n => {
            return Err(object_error(uid, format!("cuboid needs 9 or 10 values, got {n}")));
        }
    };
    let b = Box3D::new(center, dims, yaw).map_err(|e| object_error(uid, e.to_string()))?;
    Ok((b, non_yaw))
}

fn parse_calibration(
    name: &str,
    stream: &Value,
    coordinate_systems: &Map<String, Value>,
    opts: &ParseOptions,
) -> Result<Option<CameraCalibration>, OpenLabelError> {
    let cal_err = |message: String| OpenLabelError::Calibration { stream: name.to_string(), message };
    let Some(pinhole) = stream.pointer("/stream_properties/intrinsics_pinhole") else {
        return Ok(None);
    };
    let Some(pose) = coordinate_systems
        .get(name)
        .and_then(|cs| cs.pointer("/pose_wrt_parent/matrix4x4"))
        .and_then(Value::as_array)
    else {
        return Ok(None);
    };
    let nums = |v: &Value, what: &str| -> Result<Vec<f64>, OpenLabelError> {
        v.as_array()
            .ok_or_else(|| cal_err(format!("`{what}` must be an array")))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| cal_err(format!("`{what}` has a non-numeric entry"))))
            .collect()
    };
    let k = nums(pinhole.get("camera_matrix_3x4").unwrap_or(&Value::Null), "camera_matrix_3x4")?;
    if k.len() != 12 {
        return Err(cal_err(format!("camera_matrix_3x4 needs 12 values, got {}", k.len())));
    }
    let dim = |key: &str| {
        pinhole
            .get(key)
            .and_then(Value::as_u64)
            .and_then(|x| u32::try_from(x).ok())
            .ok_or_else(|| cal_err(format!("missing `{key}`")))
    };
    let (width, height) = (dim("width_px")?, dim("height_px")?);
    if let Some(d) = pinhole.get("distortion_coeffs_1xN") {
        let d = nums(d, "distortion_coeffs_1xN")?;
        if d.iter().any(|c| *c != 0.0) && !opts.ignore_distortion {
            return Err(cal_err(
                "nonzero distortion coefficients; pass --ignore-distortion to treat as pinhole".into(),
            ));
        }
    }
    let intrinsics = CameraIntrinsics::new(k[0], k[5], k[2], k[6], width, height)
        .map_err(|e| cal_err(e.to_string()))?;
    let m = nums(&Value::Array(pose.clone()), "matrix4x4")?;
    let m: [f64; 16] = m
        .try_into()
        .map_err(|m: Vec<f64>| cal_err(format!("matrix4x4 needs 16 values, got {}", m.len())))?;
    // The pose places the camera (optical axes) in the sensor frame.
    let camera_to_sensor = RigidTransform::from_matrix4_row_major(&m).map_err(|e| cal_err(e.to_string()))?;
    Ok(Some(CameraCalibration { intrinsics, sensor_to_camera: camera_to_sensor.inverse() }))
}
