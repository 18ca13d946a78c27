use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mff_core::openlabel::DatasetManifest;
use mff_core::pipeline::{
    cmd_depth_gt, cmd_eval, cmd_frustumize, cmd_ingest, cmd_run, cmd_stats, cmd_synth, thread_pool, HeatmapInputs,
    PipelineConfig, RouteOutcome, RunInputs,
};
use mff_core::synth::{DistanceNoise, SceneSpec};
use mff_core::{Error, EXIT_VALIDATION};

#[derive(Parser)]
#[command(name = "mff", version, about = "Monocular frustum pipeline: ingest, depth, frustums, 3D heads, evaluation")]
struct Cli {
    /// Pipeline config JSON; built-in defaults otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for frame-level work; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Camera stream name.
    #[arg(long, global = true)]
    camera: Option<String>,
    /// LiDAR stream name.
    #[arg(long, global = true)]
    lidar: Option<String>,
    /// Metres per unit of 16-bit PNG depth.
    #[arg(long, global = true)]
    png_scale: Option<f64>,
    /// Accept calibrations with nonzero distortion coefficients, ignoring them.
    #[arg(long, global = true)]
    ignore_distortion: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse OpenLABEL annotations into train/val/test manifests.
    Ingest {
        #[arg(long)]
        root: Option<PathBuf>,
        /// JSON with `train`, `val` and `test` frame-id lists.
        #[arg(long)]
        splits: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Project LiDAR into each camera and inpaint dense depth.
    DepthGt {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build, route and bundle frustums; writes a routing log.
    Frustumize {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long)]
        depth_dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write BEV grids.
        #[arg(long)]
        bev: bool,
    },
    /// Frustumize, predict 3D boxes and merge both routes.
    Run {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long)]
        depth_dir: Option<PathBuf>,
        /// Manifest for class priors; fallback dims otherwise.
        #[arg(long)]
        train_manifest: Option<PathBuf>,
        /// Predictions replacing the baseline head on the short route.
        #[arg(long)]
        short_predictions: Option<PathBuf>,
        /// Predictions replacing the baseline head on the long route.
        #[arg(long)]
        long_predictions: Option<PathBuf>,
        #[arg(long)]
        routing_log: Option<PathBuf>,
        /// Predictions JSONL.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions and/or 2.5D detections.
    Eval {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        detections: Option<PathBuf>,
        /// Report JSON; the text table always goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Points-per-object CSV and an optional depth error heatmap.
    Stats {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, requires_all = ["reference_depth", "heatmap"])]
        predicted_depth: Option<PathBuf>,
        #[arg(long, requires = "predicted_depth")]
        reference_depth: Option<PathBuf>,
        #[arg(long, requires = "predicted_depth")]
        heatmap: Option<PathBuf>,
    },
    /// Render a synthetic dataset with perfect depth and detections.
    Synth {
        /// Scene JSON; the built-in five-frame scene otherwise.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Gaussian noise on detector distances, metres.
        #[arg(long, default_value_t = 0.0)]
        noise_sigma: f64,
        /// Noise seed; the config seed otherwise.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::read(p)?,
        None => PipelineConfig::default(),
    };
    if cli.camera.is_some() {
        cfg.camera = cli.camera.clone();
    }
    if cli.lidar.is_some() {
        cfg.lidar = cli.lidar.clone();
    }
    if let Some(s) = cli.png_scale {
        cfg.depth.png_scale = s;
    }
    cfg.ignore_distortion |= cli.ignore_distortion;
    cfg.validate()?;
    Ok(cfg)
}

fn pick(arg: &Option<PathBuf>, fallback: &Option<String>, flag: &str) -> Result<PathBuf, Error> {
    arg.clone()
        .or_else(|| fallback.as_ref().map(PathBuf::from))
        .ok_or_else(|| Error::Config(format!("missing --{flag} (not set in the config either)")))
}

fn read_manifest(path: &Path) -> Result<DatasetManifest, Error> {
    Ok(DatasetManifest::read(path)?)
}

fn execute(cli: &Cli) -> Result<(), Error> {
    let cfg = load_config(cli)?;
    let paths = &cfg.paths;
    let pool = thread_pool(cli.jobs)?;
    match &cli.command {
        Command::Ingest { root, splits, out } => {
            let root = pick(root, &paths.dataset_root, "root")?;
            let out = pick(out, &paths.out_dir, "out")?;
            let m = cmd_ingest(&root, splits, &out, &cfg)?;
            println!(
                "train {} / val {} / test {} frames -> {}",
                m.train.frames.len(),
                m.val.frames.len(),
                m.test.frames.len(),
                out.display()
            );
        }
        Command::DepthGt { manifest, out } => {
            let manifest = read_manifest(&pick(manifest, &paths.manifest, "manifest")?)?;
            let out = pick(out, &paths.depth_dir, "out")?;
            for f in cmd_depth_gt(&manifest, &out, &cfg, &pool)? {
                println!(
                    "{}: {:.2}% known, {} CG iterations, residual {:.2e}",
                    f.frame_id,
                    100.0 * f.known_fraction,
                    f.iterations,
                    f.relative_residual
                );
            }
        }
        Command::Frustumize { manifest, detections, depth_dir, out, bev } => {
            let manifest = read_manifest(&pick(manifest, &paths.manifest, "manifest")?)?;
            let detections = pick(detections, &paths.detections, "detections")?;
            let depth_dir = pick(depth_dir, &paths.depth_dir, "depth-dir")?;
            let out = pick(out, &paths.out_dir, "out")?;
            let r = cmd_frustumize(&manifest, &detections, &depth_dir, &out, *bev, &cfg, &pool)?;
            println!(
                "{} short, {} long, {} errors -> {}",
                r.count(RouteOutcome::Short),
                r.count(RouteOutcome::Long),
                r.count(RouteOutcome::Error),
                out.display()
            );
        }
        Command::Run {
            manifest,
            detections,
            depth_dir,
            train_manifest,
            short_predictions,
            long_predictions,
            routing_log,
            out,
        } => {
            let manifest = read_manifest(&pick(manifest, &paths.manifest, "manifest")?)?;
            let inputs = RunInputs {
                detections: pick(detections, &paths.detections, "detections")?,
                depth_dir: pick(depth_dir, &paths.depth_dir, "depth-dir")?,
                train_manifest: train_manifest.clone().or_else(|| paths.train_manifest.as_ref().map(PathBuf::from)),
                short_predictions: short_predictions.clone(),
                long_predictions: long_predictions.clone(),
            };
            let r = cmd_run(&manifest, &inputs, out, routing_log.as_deref(), &cfg, &pool)?;
            println!(
                "{} predictions ({} short, {} long, {} routing errors) -> {}",
                r.predictions.len(),
                r.routing.count(RouteOutcome::Short),
                r.routing.count(RouteOutcome::Long),
                r.routing.count(RouteOutcome::Error),
                out.display()
            );
        }
        Command::Eval { manifest, predictions, detections, out } => {
            let manifest = read_manifest(&pick(manifest, &paths.manifest, "manifest")?)?;
            let report = cmd_eval(&manifest, predictions.as_deref(), detections.as_deref(), out.as_deref(), &cfg)?;
            print!("{}", report.to_text());
        }
        Command::Stats { manifest, out, predicted_depth, reference_depth, heatmap } => {
            let manifest = read_manifest(&pick(manifest, &paths.manifest, "manifest")?)?;
            let heat = match (predicted_depth, reference_depth, heatmap) {
                (Some(p), Some(r), Some(h)) => {
                    Some(HeatmapInputs { predicted_dir: p.clone(), reference_dir: r.clone(), out_png: h.clone() })
                }
                _ => None,
            };
            let (stats, _) = cmd_stats(&manifest, out, heat.as_ref(), &cfg)?;
            println!("{} objects, {} frames skipped -> {}", stats.rows.len(), stats.skipped_frames.len(), out.display());
        }
        Command::Synth { scene, out, noise_sigma, seed } => {
            let spec = match scene {
                Some(p) => SceneSpec::read(p)?,
                None => SceneSpec::default(),
            };
            let noise = DistanceNoise { sigma: *noise_sigma, seed: seed.unwrap_or(cfg.seed) };
            let files = cmd_synth(&spec, out, noise)?;
            println!(
                "{} frames -> {} (manifests in {})",
                files.truth.len(),
                files.root.display(),
                files.manifest_dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION as u8) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
