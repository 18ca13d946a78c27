//! Rotated IoU, greedy matching, average precision, range-binned MAE and
//! dataset statistics.

mod ap;
mod iou;
mod mae;
mod matching;
mod metric;
mod report;
mod stats;

pub use ap::{average_precision, ScoredOutcome};
pub use iou::{bev_intersection, iou_2d, iou_3d, iou_bev};
pub use mae::{mae_by_range, MaeBin, MaeTable, RangeBins};
pub use matching::{match_detections, score_order, MatchPair, MatchResult};
pub use metric::Metric;
pub use report::{
    build_eval_report, ClassReport2D, ClassReport3D, EvalConfig, EvalInputs, EvalReport, MeanAp, Section2D,
    Section3D, ThresholdAp, REPORT_SCHEMA_VERSION,
};
pub use stats::{distance_points_stats, stats_csv, write_stats_csv, PointStats, PointStatsRow};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("predictions reference frames missing from the manifest: {}", .0.join(", "))]
    UnknownFrames(Vec<String>),
}
