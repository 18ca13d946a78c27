use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::class::ClassId;
use crate::geometry::points_in_box;
use crate::io::{read_point_cloud, write_bytes, FormatError};
use crate::openlabel::{filter_paired, DatasetManifest};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointStatsRow {
    pub class: ClassId,
    /// Sensor-frame x of the box center, metres.
    pub gt_x: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointStats {
    pub rows: Vec<PointStatsRow>,
    /// Frames skipped because their cloud was missing or unreadable.
    pub skipped_frames: Vec<String>,
}

/// LiDAR points inside every paired five-class label, against its distance.
pub fn distance_points_stats(manifest: &DatasetManifest) -> PointStats {
    let mut out = PointStats::default();
    for frame in &manifest.frames {
        let paired = filter_paired(&frame.labels);
        if paired.is_empty() {
            continue;
        }
        let cloud = match frame.cloud_path.as_deref().map(|p| read_point_cloud(Path::new(p))) {
            Some(Ok(loaded)) => loaded.cloud,
            Some(Err(e)) => {
                log::warn!("frame {}: skipping, cloud unreadable: {e}", frame.frame_id);
                out.skipped_frames.push(frame.frame_id.clone());
                continue;
            }
            None => {
                log::warn!("frame {}: skipping, no cloud", frame.frame_id);
                out.skipped_frames.push(frame.frame_id.clone());
                continue;
            }
        };
        for label in paired {
            let (Some(class), Some(b)) = (label.class.known(), label.box3d) else {
                continue;
            };
            out.rows.push(PointStatsRow { class, gt_x: b.center[0], points: points_in_box(&b, &cloud) });
        }
    }
    out
}

pub fn stats_csv(rows: &[PointStatsRow]) -> String {
    let mut s = String::from("class,gt_x,points\n");
    for r in rows {
        writeln!(s, "{},{},{}", r.class, r.gt_x, r.points).unwrap();
    }
    s
}

pub fn write_stats_csv(path: &Path, rows: &[PointStatsRow]) -> Result<(), FormatError> {
    write_bytes(path, stats_csv(rows).as_bytes())
}
