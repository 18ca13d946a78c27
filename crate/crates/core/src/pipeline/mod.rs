//! Batch commands over manifests.

mod commands;
mod config;
mod run;

pub use commands::{
    cmd_depth_gt, cmd_eval, cmd_frustumize, cmd_ingest, cmd_run, cmd_stats, cmd_synth, frame_sparse_depth,
    parse_options, DepthGtFrame, HeatmapInputs, RunInputs, RunOutput,
};
pub use config::{BaselineConfig, DepthConfig, PathsConfig, PipelineConfig, CONFIG_VERSION};
pub use run::{
    detections_by_frame, frustumize, load_depth, predict, process_frame, thread_pool, AdapterPredictions,
    FrameOutput, FrustumizeOutput, RouteOutcome, RoutedFrustum, RoutingLogEntry,
};
