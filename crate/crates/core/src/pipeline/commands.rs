use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::run::{frustumize, load_depth, predict, AdapterPredictions, FrustumizeOutput, RoutedFrustum};
use super::PipelineConfig;
use crate::class::ClassMap;
use crate::depth::{aggregate_error_heatmap, depth_errors, inpaint_depth_detailed, render_sparse_depth, SparseDepth};
use crate::eval::{build_eval_report, distance_points_stats, write_stats_csv, EvalInputs, EvalReport, PointStats};
use crate::frustum::{rasterize_bev, read_detections, write_bev};
use crate::heads::{
    compute_class_priors, index_record, read_adapter_predictions, read_predictions, write_frustum_bundle,
    write_predictions, BundleItem, ClassPriorTable, HeadPrediction,
};
use crate::io::{read_bytes, read_gray_png, read_point_cloud, write_bytes, write_dmap, write_heatmap_png};
use crate::openlabel::{build_manifests, DatasetManifest, FrameAnnotation, ParseOptions, Split, SplitManifests, SplitSpec};
use crate::raster::Raster;
use crate::synth::{write_scene, DistanceNoise, SceneFiles, SceneSpec};
use crate::Error;

pub fn parse_options(cfg: &PipelineConfig) -> Result<ParseOptions, Error> {
    let class_map = match &cfg.class_map {
        Some(path) => {
            let bytes = read_bytes(Path::new(path))?;
            let text = String::from_utf8(bytes).map_err(|_| Error::Config(format!("{path} is not UTF-8")))?;
            ClassMap::from_json(&text).map_err(|e| Error::Config(format!("{path}: {e}")))?
        }
        None => ClassMap::default(),
    };
    Ok(ParseOptions {
        camera: cfg.camera.clone(),
        lidar: cfg.lidar.clone(),
        ignore_distortion: cfg.ignore_distortion,
        class_map,
    })
}

/// Parse the dataset under `root`, split it and write
/// `<out_dir>/{train,val,test}.json`.
pub fn cmd_ingest(root: &Path, splits: &Path, out_dir: &Path, cfg: &PipelineConfig) -> Result<SplitManifests, Error> {
    let spec = SplitSpec::read(splits)?;
    let manifests = build_manifests(root, &spec, &parse_options(cfg)?)?;
    for split in Split::ALL {
        let m = manifests.get(split);
        for f in &m.frames {
            if f.warnings.non_yaw_rotations > 0 {
                log::warn!("{}: {} cuboids with roll or pitch, kept as yaw-only", f.frame_id, f.warnings.non_yaw_rotations);
            }
            if f.warnings.missing_calibration {
                log::warn!("{}: no camera calibration", f.frame_id);
            }
        }
        write_bytes(&out_dir.join(format!("{}.json", split.name())), m.to_json().as_bytes())?;
    }
    Ok(manifests)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthGtFrame {
    pub frame_id: String,
    pub known_fraction: f64,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Project each frame's LiDAR cloud into the camera and densify it. Writes
/// `<out_dir>/sparse/<frame>.dmap` and the inpainted `<out_dir>/<frame>.dmap`.
pub fn cmd_depth_gt(
    manifest: &DatasetManifest,
    out_dir: &Path,
    cfg: &PipelineConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<DepthGtFrame>, Error> {
    let results: Vec<Result<DepthGtFrame, Error>> = pool.install(|| {
        manifest
            .frames
            .par_iter()
            .map(|frame| {
                let sparse = frame_sparse_depth(frame, cfg)?;
                let guide = frame.image_path.as_ref().map(|p| read_gray_png(Path::new(p))).transpose()?;
                let dense = inpaint_depth_detailed(&sparse, guide.as_ref(), &cfg.depth.inpaint)?;
                write_dmap(&out_dir.join("sparse").join(format!("{}.dmap", frame.frame_id)), sparse.map().raster())?;
                write_dmap(&out_dir.join(format!("{}.dmap", frame.frame_id)), dense.depth.raster())?;
                Ok(DepthGtFrame {
                    frame_id: frame.frame_id.clone(),
                    known_fraction: sparse.known_fraction(),
                    iterations: dense.iterations,
                    relative_residual: dense.relative_residual,
                })
            })
            .collect()
    });
    results.into_iter().collect()
}

fn bundle_items(frustums: &[RoutedFrustum]) -> Vec<BundleItem<'_>> {
    frustums.iter().map(|f| BundleItem { frustum: &f.frustum, frustum_ref: f.frustum_ref, route: f.route }).collect()
}

/// Frustumize and route, then write the frustum bundle (`index.jsonl` plus
/// one PCLB per frustum) and `routing.jsonl` into `out_dir`. With
/// `with_bev`, BEV grids go to `<out_dir>/bev/`.
pub fn cmd_frustumize(
    manifest: &DatasetManifest,
    detections: &Path,
    depth_dir: &Path,
    out_dir: &Path,
    with_bev: bool,
    cfg: &PipelineConfig,
    pool: &rayon::ThreadPool,
) -> Result<FrustumizeOutput, Error> {
    let dets = read_detections(detections)?;
    let out = frustumize(manifest, &dets, depth_dir, cfg, pool)?;
    write_frustum_bundle(out_dir, &bundle_items(&out.frustums))?;
    out.write_routing_log(&out_dir.join("routing.jsonl"))?;
    if with_bev {
        let bev_dir = out_dir.join("bev");
        let written: Vec<Result<(), Error>> = pool.install(|| {
            out.frustums
                .par_iter()
                .map(|f| {
                    let grid = rasterize_bev(&f.frustum, &cfg.bev)?;
                    let stem = format!("{}_{:04}", f.frustum.detection.frame_id, f.frustum_ref);
                    Ok(write_bev(&bev_dir, &stem, &grid)?)
                })
                .collect()
        });
        written.into_iter().collect::<Result<Vec<()>, Error>>()?;
    }
    Ok(out)
}

/// Inputs of [`cmd_run`] besides the config.
#[derive(Debug, Clone, Default)]
pub struct RunInputs {
    pub detections: PathBuf,
    pub depth_dir: PathBuf,
    /// Class priors come from this manifest; the fallback table otherwise.
    pub train_manifest: Option<PathBuf>,
    pub short_predictions: Option<PathBuf>,
    pub long_predictions: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub predictions: Vec<HeadPrediction>,
    pub routing: FrustumizeOutput,
}

/// Full test-time pipeline: frustumize, route, predict with the baseline or
/// adapter heads, merge by NMS. Writes predictions JSONL to `out`, and the
/// routing log when `routing_log` is given.
pub fn cmd_run(
    manifest: &DatasetManifest,
    inputs: &RunInputs,
    out: &Path,
    routing_log: Option<&Path>,
    cfg: &PipelineConfig,
    pool: &rayon::ThreadPool,
) -> Result<RunOutput, Error> {
    let dets = read_detections(&inputs.detections)?;
    let routing = frustumize(manifest, &dets, &inputs.depth_dir, cfg, pool)?;
    let priors = match &inputs.train_manifest {
        Some(p) => compute_class_priors(&DatasetManifest::read(p)?),
        None => ClassPriorTable::default(),
    };
    let index: Vec<_> = bundle_items(&routing.frustums).iter().map(index_record).collect();
    let load = |p: &Option<PathBuf>| -> Result<Option<Vec<HeadPrediction>>, Error> {
        p.as_ref().map(|p| read_adapter_predictions(p, &index).map_err(Error::from)).transpose()
    };
    let adapters =
        AdapterPredictions { short: load(&inputs.short_predictions)?, long: load(&inputs.long_predictions)? };
    let predictions = predict(&routing.frustums, &priors, &adapters, cfg)?;
    write_predictions(out, &predictions)?;
    if let Some(p) = routing_log {
        routing.write_routing_log(p)?;
    }
    Ok(RunOutput { predictions, routing })
}

/// Score 3D predictions and/or 2.5D detections against the manifest. The
/// JSON report goes to `out_json` when given.
pub fn cmd_eval(
    manifest: &DatasetManifest,
    predictions: Option<&Path>,
    detections: Option<&Path>,
    out_json: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<EvalReport, Error> {
    if predictions.is_none() && detections.is_none() {
        return Err(Error::Config("nothing to evaluate: give predictions, detections or both".into()));
    }
    let preds = predictions.map(read_predictions).transpose()?;
    let dets = detections.map(read_detections).transpose()?;
    let inputs = EvalInputs { detections: dets.as_deref(), predictions: preds.as_deref() };
    let report = build_eval_report(inputs, manifest, &cfg.eval)?;
    if let Some(p) = out_json {
        write_bytes(p, report.to_json().as_bytes())?;
    }
    Ok(report)
}

/// Depth maps to compare for the error heatmap.
#[derive(Debug, Clone)]
pub struct HeatmapInputs {
    pub predicted_dir: PathBuf,
    pub reference_dir: PathBuf,
    /// PNG rendering; the raw mean-error raster is written next to it as `.dmap`.
    pub out_png: PathBuf,
}

/// Points-per-object CSV and, optionally, the per-pixel mean depth error
/// over all manifest frames.
pub fn cmd_stats(
    manifest: &DatasetManifest,
    out_csv: &Path,
    heatmap: Option<&HeatmapInputs>,
    cfg: &PipelineConfig,
) -> Result<(PointStats, Option<Raster>), Error> {
    let stats = distance_points_stats(manifest);
    write_stats_csv(out_csv, &stats.rows)?;
    let Some(h) = heatmap else {
        return Ok((stats, None));
    };
    let mut reports = Vec::with_capacity(manifest.frames.len());
    for f in &manifest.frames {
        let pred = load_depth(&h.predicted_dir, &f.frame_id, cfg.depth.png_scale)?;
        let gt = load_depth(&h.reference_dir, &f.frame_id, cfg.depth.png_scale)?;
        reports.push(depth_errors(&pred, &gt)?);
    }
    let raster = aggregate_error_heatmap(&reports)?;
    write_heatmap_png(&h.out_png, &raster, None)?;
    write_dmap(&h.out_png.with_extension("dmap"), &raster)?;
    Ok((stats, Some(raster)))
}

/// Render a synthetic dataset with perfect depth and detections.
pub fn cmd_synth(spec: &SceneSpec, out_root: &Path, noise: DistanceNoise) -> Result<SceneFiles, Error> {
    write_scene(spec, out_root, noise)
}

/// Sparse depth of a frame's LiDAR cloud seen from its camera.
pub fn frame_sparse_depth(frame: &FrameAnnotation, cfg: &PipelineConfig) -> Result<SparseDepth, Error> {
    let id = &frame.frame_id;
    let (_, calib) = frame
        .camera(cfg.camera.as_deref())
        .ok_or_else(|| Error::Config(format!("frame {id} has no calibrated camera")))?;
    let path = frame.cloud_path.as_ref().ok_or_else(|| Error::Config(format!("frame {id} has no point cloud")))?;
    let cloud = read_point_cloud(Path::new(path))?.cloud;
    Ok(render_sparse_depth(&cloud, &calib.sensor_to_camera, &calib.intrinsics))
}
