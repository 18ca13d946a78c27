use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FrustumError;
use crate::class::ClassId;
use crate::geometry::Box2D;
use crate::io::{read_bytes, write_bytes, FormatError};

/// Upper end of the detector's distance output, metres.
pub const MAX_DISTANCE_M: f64 = 250.0;

/// A 2D box with class, confidence and predicted metric distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DetectionRecord", into = "DetectionRecord")]
pub struct Detection25D {
    pub frame_id: String,
    pub class: ClassId,
    pub box2d: Box2D,
    pub confidence: f64,
    pub distance_m: f64,
}

impl Detection25D {
    pub fn new(
        frame_id: impl Into<String>,
        class: ClassId,
        box2d: Box2D,
        confidence: f64,
        distance_m: f64,
    ) -> Result<Self, FrustumError> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(FrustumError::Detection(format!("confidence {confidence} outside [0, 1]")));
        }
        if !(0.0..=MAX_DISTANCE_M).contains(&distance_m) {
            return Err(FrustumError::Detection(format!("distance {distance_m} m outside [0, {MAX_DISTANCE_M}]")));
        }
        Ok(Detection25D { frame_id: frame_id.into(), class, box2d, confidence, distance_m })
    }
}

/// One line of the detections JSONL interchange.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionRecord {
    frame_id: String,
    class: ClassId,
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
    confidence: f64,
    distance_m: f64,
}

impl TryFrom<DetectionRecord> for Detection25D {
    type Error = FrustumError;

    fn try_from(r: DetectionRecord) -> Result<Self, Self::Error> {
        let b = Box2D::new(r.x1, r.y1, r.x2, r.y2)?;
        Detection25D::new(r.frame_id, r.class, b, r.confidence, r.distance_m)
    }
}

impl From<Detection25D> for DetectionRecord {
    fn from(d: Detection25D) -> Self {
        DetectionRecord {
            frame_id: d.frame_id,
            class: d.class,
            x1: d.box2d.x1,
            y1: d.box2d.y1,
            x2: d.box2d.x2,
            y2: d.box2d.y2,
            confidence: d.confidence,
            distance_m: d.distance_m,
        }
    }
}

/// Parse JSON Lines; blank lines are skipped, errors carry 1-based line numbers.
pub fn parse_detections(text: &str) -> Result<Vec<Detection25D>, FrustumError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let d: Detection25D = serde_json::from_str(line)
            .map_err(|e| FrustumError::DetectionLine { line: i + 1, message: e.to_string() })?;
        out.push(d);
    }
    Ok(out)
}

pub fn read_detections(path: &Path) -> Result<Vec<Detection25D>, FrustumError> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| FormatError::Invalid(format!("{} is not UTF-8", path.display())))?;
    parse_detections(&text)
}

pub fn write_detections(path: &Path, detections: &[Detection25D]) -> Result<(), FrustumError> {
    let mut text = String::new();
    for d in detections {
        let line = serde_json::to_string(d).expect("detections serialize");
        writeln!(text, "{line}").expect("writing to a String");
    }
    write_bytes(path, text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let dets = vec![
            Detection25D::new("f0", ClassId::Person, Box2D::new(1.0, 2.0, 3.0, 4.0).unwrap(), 0.9, 120.5).unwrap(),
            Detection25D::new("f1", ClassId::SignalPole, Box2D::new(0.5, 0.25, 9.0, 40.0).unwrap(), 0.1, 0.0).unwrap(),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        write_detections(&path, &dets).unwrap();
        assert_eq!(read_detections(&path).unwrap(), dets);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(r#"{"frame_id":"f0","class":"person","x1":1.0"#), "{text}");
    }

    #[test]
    fn bad_lines_report_position() {
        let text = "\n{\"frame_id\":\"a\",\"class\":\"person\",\"x1\":0,\"y1\":0,\"x2\":1,\"y2\":1,\"confidence\":0.5,\"distance_m\":300}\n";
        match parse_detections(text) {
            Err(FrustumError::DetectionLine { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("300"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_detections("{\"frame_id\":\"a\",\"class\":\"tree\"}").is_err());
        assert!(parse_detections("").unwrap().is_empty());
    }
}
