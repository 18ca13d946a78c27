//! Depth maps: sparse rendering from point clouds, inpainting, affine
//! relative-to-metric fitting and error metrics.

mod affine;
mod inpaint;
mod metrics;
mod render;
mod solver;

pub use affine::{fit_affine_depth, AffineFit};
pub use inpaint::{inpaint_depth, inpaint_depth_detailed, InpaintConfig, Inpainting};
pub use metrics::{aggregate_error_heatmap, depth_errors, DepthErrorReport};
pub use render::render_sparse_depth;

use std::ops::Deref;

use crate::raster::Raster;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DepthError {
    #[error("invalid depth value {value} at pixel ({col}, {row}); depths must be positive or NaN")]
    InvalidValue { col: u32, row: u32, value: f32 },
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("sparse depth has no known pixels")]
    NoKnownPixels,
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("affine fit is rank deficient: {0}")]
    Rank(String),
    #[error("prediction and ground truth share no valid pixels")]
    NoOverlap,
    #[error("no error reports to aggregate")]
    Empty,
    #[error("invalid inpainting config: {0}")]
    Config(String),
}

/// Dense metric z-depth (meters); NaN marks invalid pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap(Raster);

impl DepthMap {
    pub fn new(raster: Raster) -> Result<Self, DepthError> {
        let w = raster.width().max(1);
        if let Some(i) = raster.values().iter().position(|v| !v.is_nan() && !(v.is_finite() && *v > 0.0)) {
            return Err(DepthError::InvalidValue {
                col: i as u32 % w,
                row: i as u32 / w,
                value: raster.values()[i],
            });
        }
        Ok(DepthMap(raster))
    }

    pub fn from_values(width: u32, height: u32, values: Vec<f32>) -> Result<Self, DepthError> {
        let r = Raster::new(width, height, values).map_err(|e| DepthError::Shape(e.to_string()))?;
        Self::new(r)
    }

    pub fn invalid(width: u32, height: u32) -> Self {
        DepthMap(Raster::filled(width, height, f32::NAN))
    }

    pub fn raster(&self) -> &Raster {
        &self.0
    }

    pub fn into_raster(self) -> Raster {
        self.0
    }

    /// Depth at a pixel, `None` when invalid.
    pub fn depth(&self, col: u32, row: u32) -> Option<f32> {
        Some(self.0.get(col, row)).filter(|v| v.is_finite())
    }
}

impl Deref for DepthMap {
    type Target = Raster;

    fn deref(&self) -> &Raster {
        &self.0
    }
}

/// A depth map where most pixels are unknown, e.g. projected LiDAR.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDepth(DepthMap);

impl SparseDepth {
    pub fn new(map: DepthMap) -> Self {
        SparseDepth(map)
    }

    pub fn map(&self) -> &DepthMap {
        &self.0
    }

    pub fn into_map(self) -> DepthMap {
        self.0
    }

    /// Fraction of pixels with a known depth.
    pub fn known_fraction(&self) -> f64 {
        let n = self.0.values().len();
        if n == 0 {
            0.0
        } else {
            self.0.valid_count() as f64 / n as f64
        }
    }
}

impl Deref for SparseDepth {
    type Target = DepthMap;

    fn deref(&self) -> &DepthMap {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_map_validation() {
        assert!(DepthMap::from_values(2, 1, vec![1.0, f32::NAN]).is_ok());
        assert!(matches!(
            DepthMap::from_values(2, 1, vec![1.0, 0.0]),
            Err(DepthError::InvalidValue { col: 1, row: 0, .. })
        ));
        assert!(DepthMap::from_values(2, 1, vec![f32::INFINITY, 1.0]).is_err());
        assert!(DepthMap::from_values(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn known_fraction_is_measured() {
        let s = SparseDepth::new(DepthMap::from_values(2, 2, vec![1.0, f32::NAN, f32::NAN, f32::NAN]).unwrap());
        assert_eq!(s.known_fraction(), 0.25);
    }
}
