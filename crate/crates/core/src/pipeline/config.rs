use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::depth::InpaintConfig;
use crate::eval::EvalConfig;
use crate::frustum::{BevConfig, FusionConfig, MAX_DISTANCE_M};
use crate::heads::{BaselineOptions, DEFAULT_NMS_IOU};
use crate::io::{read_bytes, DEFAULT_PNG_SCALE};
use crate::Error;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    /// Push the fused center back by `w * l/2` to undo the near-surface bias
    /// of depth-map centroids.
    pub surface_compensation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthConfig {
    pub inpaint: InpaintConfig,
    /// Metres per unit of 16-bit PNG depth.
    pub png_scale: f64,
}

/// Default file locations; command-line arguments take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub dataset_root: Option<String>,
    pub manifest: Option<String>,
    pub train_manifest: Option<String>,
    pub detections: Option<String>,
    pub depth_dir: Option<String>,
    pub out_dir: Option<String>,
}

/// Every tunable of the batch pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub config_version: u32,
    /// Camera stream; the first calibrated camera of each frame when unset.
    pub camera: Option<String>,
    pub lidar: Option<String>,
    pub ignore_distortion: bool,
    /// Class-name map file; the shipped identity map when unset.
    pub class_map: Option<String>,
    /// Span of the detector's normalized distance output, metres. Fixed.
    pub distance_span_m: f64,
    pub fusion: FusionConfig,
    pub bev: BevConfig,
    pub baseline: BaselineConfig,
    /// Build a single-point frustum at the detector distance when a box has no depth.
    pub empty_frustum_fallback: bool,
    pub nms_iou: f64,
    pub eval: EvalConfig,
    pub depth: DepthConfig,
    pub paths: PathsConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            config_version: CONFIG_VERSION,
            camera: None,
            lidar: None,
            ignore_distortion: false,
            class_map: None,
            distance_span_m: MAX_DISTANCE_M,
            fusion: FusionConfig::default(),
            bev: BevConfig::default(),
            baseline: BaselineConfig { surface_compensation: true },
            empty_frustum_fallback: true,
            nms_iou: DEFAULT_NMS_IOU,
            eval: EvalConfig::default(),
            depth: DepthConfig { inpaint: InpaintConfig::default(), png_scale: DEFAULT_PNG_SCALE },
            paths: PathsConfig::default(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    /// Default config with the per-class KITTI route thresholds.
    pub fn kitti_profile() -> Self {
        PipelineConfig { fusion: FusionConfig::kitti_profile(), ..Default::default() }
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self, Error> {
        let bytes = read_bytes(path)?;
        let text = String::from_utf8(bytes).map_err(|_| Error::Config(format!("{} is not UTF-8", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.config_version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config_version {} (expected {CONFIG_VERSION})",
                self.config_version
            )));
        }
        if self.distance_span_m != MAX_DISTANCE_M {
            return Err(Error::Config(format!("distance_span_m is fixed at {MAX_DISTANCE_M}")));
        }
        if !(0.0..=1.0).contains(&self.nms_iou) {
            return Err(Error::Config(format!("nms_iou must lie in [0, 1], got {}", self.nms_iou)));
        }
        if !(self.depth.png_scale > 0.0 && self.depth.png_scale.is_finite()) {
            return Err(Error::Config(format!("png_scale must be positive, got {}", self.depth.png_scale)));
        }
        self.fusion.validate()?;
        self.bev.validate()?;
        self.eval.validate()?;
        self.depth.inpaint.validate()?;
        Ok(())
    }

    pub fn baseline_options(&self) -> BaselineOptions {
        BaselineOptions { surface_offset: if self.baseline.surface_compensation { self.fusion.w } else { 0.0 } }
    }
}
