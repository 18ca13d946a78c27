use super::{DepthError, SparseDepth};
use crate::raster::Raster;

/// Least-squares fit `gt ≈ scale · relative + shift`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AffineFit {
    pub scale: f64,
    pub shift: f64,
    /// Mean absolute residual over the fitted pixels (meters).
    pub residual_mae: f64,
    pub samples: usize,
}

impl AffineFit {
    pub fn apply(&self, relative: f64) -> f64 {
        self.scale * relative + self.shift
    }
}

/// Fits a relative depth map to sparse metric ground truth over pixels
/// finite in both.
pub fn fit_affine_depth(relative: &Raster, sparse_gt: &SparseDepth) -> Result<AffineFit, DepthError> {
    if !relative.same_shape(sparse_gt.raster()) {
        return Err(DepthError::Shape(format!(
            "relative map is {}x{}, ground truth is {}x{}",
            relative.width(),
            relative.height(),
            sparse_gt.width(),
            sparse_gt.height()
        )));
    }
    let pairs: Vec<(f64, f64)> = relative
        .values()
        .iter()
        .zip(sparse_gt.values())
        .filter(|(r, g)| r.is_finite() && g.is_finite())
        .map(|(r, g)| (f64::from(*r), f64::from(*g)))
        .collect();
    if pairs.len() < 2 {
        return Err(DepthError::Rank(format!("need at least 2 known pixels, got {}", pairs.len())));
    }
    let n = pairs.len() as f64;
    let mr = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mg = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxx, sxy) = pairs.iter().fold((0.0, 0.0), |(sxx, sxy), (r, g)| {
        (sxx + (r - mr) * (r - mr), sxy + (r - mr) * (g - mg))
    });
    if pairs.iter().all(|p| p.0 == pairs[0].0) || sxx == 0.0 {
        return Err(DepthError::Rank("relative depth is constant over the known pixels".into()));
    }
    let scale = sxy / sxx;
    let shift = mg - scale * mr;
    let residual_mae = pairs.iter().map(|(r, g)| (g - (scale * r + shift)).abs()).sum::<f64>() / n;
    Ok(AffineFit { scale, shift, residual_mae, samples: pairs.len() })
}
