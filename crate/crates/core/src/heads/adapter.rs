use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HeadError, HeadPrediction};
use crate::class::ClassId;
use crate::frustum::{FrameTag, Frustum, Route};
use crate::geometry::{frustum_frame_for, Box3D, Vec3};
use crate::io::{read_bytes, write_bytes, write_point_cloud, FormatError};

/// One line of a predictions JSONL file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictionRecord {
    frame_id: String,
    class: ClassId,
    score: f64,
    cx: f64,
    cy: f64,
    cz: f64,
    l: f64,
    w: f64,
    h: f64,
    yaw: f64,
    frame: FrameTag,
    route: Route,
    frustum_ref: usize,
}

impl From<&HeadPrediction> for PredictionRecord {
    fn from(p: &HeadPrediction) -> Self {
        let [cx, cy, cz] = p.box3d.center;
        let [l, w, h] = p.box3d.dims;
        PredictionRecord {
            frame_id: p.frame_id.clone(),
            class: p.class,
            score: p.score,
            cx,
            cy,
            cz,
            l,
            w,
            h,
            yaw: p.box3d.yaw,
            frame: FrameTag::Sensor,
            route: p.route,
            frustum_ref: p.frustum_ref,
        }
    }
}

/// Metadata line of a frustum bundle's `index.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleIndexRecord {
    pub frame_id: String,
    pub frustum_ref: usize,
    /// PCLB payload, relative to the bundle directory.
    pub file: String,
    pub class: ClassId,
    pub confidence: f64,
    pub distance_m: f64,
    pub azimuth: f64,
    pub centroid_distance: f64,
    pub fused_distance: f64,
    pub route: Route,
    /// Frame of the payload points.
    pub frame: FrameTag,
    pub synthetic: bool,
    pub points: usize,
}

pub struct BundleItem<'a> {
    pub frustum: &'a Frustum,
    pub frustum_ref: usize,
    pub route: Route,
}

fn line_error(line: usize, field: &str, message: impl Into<String>) -> HeadError {
    HeadError::Record { line, field: field.to_string(), message: message.into() }
}

fn utf8(path: &Path) -> Result<String, HeadError> {
    let bytes = read_bytes(path)?;
    Ok(String::from_utf8(bytes).map_err(|_| FormatError::Invalid(format!("{} is not UTF-8", path.display())))?)
}

/// Index line describing `item`, as written by [`write_frustum_bundle`].
pub fn index_record(item: &BundleItem<'_>) -> BundleIndexRecord {
    let f = item.frustum;
    BundleIndexRecord {
        frame_id: f.detection.frame_id.clone(),
        frustum_ref: item.frustum_ref,
        file: format!("{}_{:04}.pclb", f.detection.frame_id, item.frustum_ref),
        class: f.detection.class,
        confidence: f.detection.confidence,
        distance_m: f.detection.distance_m,
        azimuth: f.azimuth,
        centroid_distance: f.centroid_distance,
        fused_distance: f.fused_distance,
        route: item.route,
        frame: f.frame_tag,
        synthetic: f.synthetic,
        points: f.points.len(),
    }
}

/// Write each frustum as `<frame_id>_<ref>.pclb` plus an `index.jsonl`.
pub fn write_frustum_bundle(dir: &Path, items: &[BundleItem<'_>]) -> Result<(), HeadError> {
    let mut index = String::new();
    for item in items {
        let rec = index_record(item);
        write_point_cloud(&dir.join(&rec.file), &item.frustum.points)?;
        writeln!(index, "{}", serde_json::to_string(&rec).expect("index record serializes")).unwrap();
    }
    write_bytes(&dir.join("index.jsonl"), index.as_bytes())?;
    Ok(())
}

pub fn read_bundle_index(dir: &Path) -> Result<Vec<BundleIndexRecord>, HeadError> {
    let text = utf8(&dir.join("index.jsonl"))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| line_error(i + 1, "index", e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_predictions(path: &Path, predictions: &[HeadPrediction]) -> Result<(), HeadError> {
    let mut text = String::new();
    for p in predictions {
        let rec = PredictionRecord::from(p);
        writeln!(text, "{}", serde_json::to_string(&rec).expect("prediction serializes")).unwrap();
    }
    write_bytes(path, text.as_bytes())?;
    Ok(())
}

/// Sensor-frame predictions only; see [`read_adapter_predictions`] for
/// frustum-frame records.
pub fn read_predictions(path: &Path) -> Result<Vec<HeadPrediction>, HeadError> {
    read_adapter_predictions(path, &[])
}

/// Read and validate a predictions JSONL file. Frustum-frame records are
/// rotated into the sensor frame with the azimuth of the matching entry in
/// `index`.
pub fn read_adapter_predictions(path: &Path, index: &[BundleIndexRecord]) -> Result<Vec<HeadPrediction>, HeadError> {
    let azimuths: BTreeMap<(&str, usize), f64> =
        index.iter().map(|r| ((r.frame_id.as_str(), r.frustum_ref), r.azimuth)).collect();
    let text = utf8(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PredictionRecord = serde_json::from_str(line).map_err(|e| {
            let msg = e.to_string();
            let field = msg.split('`').nth(1).unwrap_or("record").to_string();
            line_error(n, &field, msg)
        })?;
        if !(0.0..=1.0).contains(&rec.score) {
            return Err(line_error(n, "score", format!("{} outside [0, 1]", rec.score)));
        }
        for (field, v) in [("cx", rec.cx), ("cy", rec.cy), ("cz", rec.cz), ("yaw", rec.yaw)] {
            if !v.is_finite() {
                return Err(line_error(n, field, "must be finite"));
            }
        }
        for (field, v) in [("l", rec.l), ("w", rec.w), ("h", rec.h)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(line_error(n, field, format!("dimension must be positive, got {v}")));
            }
        }
        let mut center = Vec3::new(rec.cx, rec.cy, rec.cz);
        let mut yaw = rec.yaw;
        if rec.frame == FrameTag::Frustum {
            let az = azimuths
                .get(&(rec.frame_id.as_str(), rec.frustum_ref))
                .copied()
                .ok_or_else(|| line_error(n, "frustum_ref", "no bundle entry for this frustum-frame record"))?;
            center = frustum_frame_for(az).inverse().apply(&center);
            yaw += az;
        }
        let box3d = Box3D::new(center, [rec.l, rec.w, rec.h], yaw).map_err(|e| line_error(n, "box", e.to_string()))?;
        out.push(HeadPrediction {
            frame_id: rec.frame_id,
            class: rec.class,
            box3d,
            score: rec.score,
            route: rec.route,
            frustum_ref: rec.frustum_ref,
        });
    }
    Ok(out)
}
