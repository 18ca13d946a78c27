use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PipelineConfig;
use crate::class::ClassId;
use crate::depth::DepthMap;
use crate::frustum::{
    distance_only_frustum, extract_frustum, route, to_frustum_frame, Detection25D, Frustum, FrustumError, Route,
};
use crate::heads::{baseline_head, merge_and_nms, ClassPriorTable, HeadPrediction};
use crate::io::{read_depth_png16, read_dmap, write_bytes, FormatError};
use crate::openlabel::{DatasetManifest, FrameAnnotation};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteOutcome {
    Short,
    Long,
    Error,
}

impl From<Route> for RouteOutcome {
    fn from(r: Route) -> Self {
        match r {
            Route::Short => RouteOutcome::Short,
            Route::Long => RouteOutcome::Long,
        }
    }
}

/// One line of the routing log. Every input detection of a manifest frame
/// gets exactly one entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingLogEntry {
    pub frame_id: String,
    /// Position of the detection among its frame's detections, in file order.
    pub frustum_ref: usize,
    pub class: ClassId,
    pub confidence: f64,
    pub distance_m: f64,
    pub outcome: RouteOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centroid_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fused_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub synthetic: bool,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A routed frustum, already rotated into its frustum frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutedFrustum {
    pub frustum: Frustum,
    pub frustum_ref: usize,
    pub route: Route,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameOutput {
    pub frustums: Vec<RoutedFrustum>,
    pub log: Vec<RoutingLogEntry>,
}

/// Frustums and routing log of a whole manifest, in manifest frame order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrustumizeOutput {
    pub frustums: Vec<RoutedFrustum>,
    pub log: Vec<RoutingLogEntry>,
}

impl FrustumizeOutput {
    pub fn routing_log_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.log {
            writeln!(s, "{}", serde_json::to_string(e).expect("log entry serializes")).unwrap();
        }
        s
    }

    pub fn write_routing_log(&self, path: &Path) -> Result<(), FormatError> {
        write_bytes(path, self.routing_log_jsonl().as_bytes())
    }

    pub fn count(&self, outcome: RouteOutcome) -> usize {
        self.log.iter().filter(|e| e.outcome == outcome).count()
    }
}

/// Load `<dir>/<frame_id>.dmap`, falling back to a 16-bit `.png` at `png_scale`.
pub fn load_depth(dir: &Path, frame_id: &str, png_scale: f64) -> Result<DepthMap, Error> {
    let dmap = dir.join(format!("{frame_id}.dmap"));
    let raster = if dmap.exists() {
        read_dmap(&dmap)?
    } else {
        let png = dir.join(format!("{frame_id}.png"));
        if !png.exists() {
            return Err(FormatError::Invalid(format!(
                "no depth map for frame {frame_id}: neither {} nor {} exists",
                dmap.display(),
                png.display()
            ))
            .into());
        }
        read_depth_png16(&png, png_scale)?
    };
    Ok(DepthMap::new(raster)?)
}

/// Group detections by frame, keeping file order inside each frame. Frames
/// absent from the manifest are dropped with a warning.
pub fn detections_by_frame<'a>(
    manifest: &DatasetManifest,
    detections: &'a [Detection25D],
) -> BTreeMap<String, Vec<&'a Detection25D>> {
    let mut out: BTreeMap<String, Vec<&Detection25D>> = BTreeMap::new();
    let mut foreign = 0usize;
    for d in detections {
        if manifest.frame(&d.frame_id).is_some() {
            out.entry(d.frame_id.clone()).or_default().push(d);
        } else {
            foreign += 1;
        }
    }
    if foreign > 0 {
        log::warn!("ignoring {foreign} detections of frames outside the {} manifest", manifest.split.name());
    }
    out
}

fn error_entry(d: &Detection25D, frustum_ref: usize, message: String) -> RoutingLogEntry {
    RoutingLogEntry {
        frame_id: d.frame_id.clone(),
        frustum_ref,
        class: d.class,
        confidence: d.confidence,
        distance_m: d.distance_m,
        outcome: RouteOutcome::Error,
        centroid_distance: None,
        fused_distance: None,
        threshold: None,
        synthetic: false,
        points: 0,
        error: Some(message),
    }
}

/// Frustumize and route the detections of one frame.
pub fn process_frame(
    frame: &FrameAnnotation,
    detections: &[&Detection25D],
    depth: &DepthMap,
    cfg: &PipelineConfig,
) -> Result<FrameOutput, Error> {
    let mut out = FrameOutput::default();
    let Some((name, calib)) = frame.camera(cfg.camera.as_deref()) else {
        for (i, d) in detections.iter().enumerate() {
            out.log.push(error_entry(d, i, "frame has no calibrated camera".into()));
        }
        return Ok(out);
    };
    let k = &calib.intrinsics;
    if (depth.width(), depth.height()) != (k.width, k.height) {
        return Err(Error::Config(format!(
            "frame {}: depth map is {}x{} but camera {name} is {}x{}",
            frame.frame_id,
            depth.width(),
            depth.height(),
            k.width,
            k.height
        )));
    }
    let cam_to_sensor = calib.sensor_to_camera.inverse();
    for (i, d) in detections.iter().enumerate() {
        let f = match extract_frustum(d, depth, k, &cam_to_sensor, &cfg.fusion) {
            Ok(f) => f,
            Err(FrustumError::EmptyFrustum) if cfg.empty_frustum_fallback => distance_only_frustum(d, k, &cam_to_sensor),
            Err(e) => {
                out.log.push(error_entry(d, i, e.to_string()));
                continue;
            }
        };
        let decision = match route(&f, &cfg.fusion) {
            Ok(r) => r,
            Err(e) => {
                out.log.push(error_entry(d, i, e.to_string()));
                continue;
            }
        };
        out.log.push(RoutingLogEntry {
            frame_id: d.frame_id.clone(),
            frustum_ref: i,
            class: d.class,
            confidence: d.confidence,
            distance_m: d.distance_m,
            outcome: decision.route.into(),
            centroid_distance: Some(f.centroid_distance),
            fused_distance: Some(decision.fused_distance),
            threshold: Some(decision.threshold_used),
            synthetic: f.synthetic,
            points: f.points.len(),
            error: None,
        });
        out.frustums.push(RoutedFrustum { frustum: to_frustum_frame(&f)?, frustum_ref: i, route: decision.route });
    }
    Ok(out)
}

/// Thread pool for frame-level work. `jobs == 0` uses all cores.
pub fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, Error> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Frustumize every manifest frame that has detections. Output order follows
/// the manifest regardless of the pool size.
pub fn frustumize(
    manifest: &DatasetManifest,
    detections: &[Detection25D],
    depth_dir: &Path,
    cfg: &PipelineConfig,
    pool: &rayon::ThreadPool,
) -> Result<FrustumizeOutput, Error> {
    let by_frame = detections_by_frame(manifest, detections);
    let work: Vec<(&FrameAnnotation, &Vec<&Detection25D>)> =
        manifest.frames.iter().filter_map(|f| by_frame.get(&f.frame_id).map(|d| (f, d))).collect();
    let results: Vec<Result<FrameOutput, Error>> = pool.install(|| {
        work.par_iter()
            .map(|(frame, dets)| {
                let depth = load_depth(depth_dir, &frame.frame_id, cfg.depth.png_scale)?;
                process_frame(frame, dets, &depth, cfg)
            })
            .collect()
    });
    let mut out = FrustumizeOutput::default();
    for r in results {
        let r = r?;
        out.frustums.extend(r.frustums);
        out.log.extend(r.log);
    }
    Ok(out)
}

/// Externally produced predictions for one or both routes.
#[derive(Debug, Clone, Default)]
pub struct AdapterPredictions {
    pub short: Option<Vec<HeadPrediction>>,
    pub long: Option<Vec<HeadPrediction>>,
}

/// Predict a box per routed frustum. Routes without adapter predictions use
/// the baseline head; both routes are then merged by NMS.
pub fn predict(
    frustums: &[RoutedFrustum],
    priors: &ClassPriorTable,
    adapters: &AdapterPredictions,
    cfg: &PipelineConfig,
) -> Result<Vec<HeadPrediction>, Error> {
    let opts = cfg.baseline_options();
    let by_route = |r: Route, given: &Option<Vec<HeadPrediction>>| -> Result<Vec<HeadPrediction>, Error> {
        if let Some(p) = given {
            let off = p.iter().filter(|p| p.route != r).count();
            if off > 0 {
                log::warn!("{off} predictions in the {r:?} adapter file are tagged with the other route");
            }
            return Ok(p.clone());
        }
        frustums
            .iter()
            .filter(|f| f.route == r)
            .map(|f| baseline_head(&f.frustum, f.route, f.frustum_ref, priors, &opts).map_err(Error::from))
            .collect()
    };
    let short = by_route(Route::Short, &adapters.short)?;
    let long = by_route(Route::Long, &adapters.long)?;
    Ok(merge_and_nms(short, long, cfg.nms_iou))
}
