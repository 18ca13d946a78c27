use serde::Serialize;

use super::{DepthError, DepthMap};
use crate::raster::Raster;

/// Depth errors over the pixels valid in both maps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthErrorReport {
    /// Mean absolute error (meters).
    pub mae: f64,
    /// Mean of `|pred - gt| / gt`.
    pub abs_rel: f64,
    /// MAE after min-max normalizing both maps to `[0, 1]` over the shared
    /// valid pixels; a scale-free score for relative depth.
    pub minmax_mae: f64,
    pub valid_pixel_count: usize,
    /// Per-pixel `|pred - gt|`, NaN outside the shared valid pixels.
    #[serde(skip)]
    pub error_map: Raster,
}

pub fn depth_errors(pred: &DepthMap, gt: &DepthMap) -> Result<DepthErrorReport, DepthError> {
    if !pred.same_shape(gt) {
        return Err(DepthError::Shape(format!(
            "prediction is {}x{}, ground truth is {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    let mut error_map = Raster::filled(pred.width(), pred.height(), f32::NAN);
    let mut pairs = Vec::new();
    for (i, (p, g)) in pred.values().iter().zip(gt.values()).enumerate() {
        if p.is_finite() && g.is_finite() {
            let (p, g) = (f64::from(*p), f64::from(*g));
            error_map.values_mut()[i] = (p - g).abs() as f32;
            pairs.push((p, g));
        }
    }
    if pairs.is_empty() {
        return Err(DepthError::NoOverlap);
    }
    let n = pairs.len() as f64;
    let mae = pairs.iter().map(|(p, g)| (p - g).abs()).sum::<f64>() / n;
    let abs_rel = pairs.iter().map(|(p, g)| (p - g).abs() / g).sum::<f64>() / n;

    let range = |sel: fn(&(f64, f64)) -> f64| {
        let lo = pairs.iter().map(sel).fold(f64::INFINITY, f64::min);
        let hi = pairs.iter().map(sel).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi - lo)
    };
    let ((plo, pspan), (glo, gspan)) = (range(|x| x.0), range(|x| x.1));
    let norm = |v: f64, lo: f64, span: f64| if span > 0.0 { (v - lo) / span } else { 0.0 };
    let minmax_mae = pairs
        .iter()
        .map(|(p, g)| (norm(*p, plo, pspan) - norm(*g, glo, gspan)).abs())
        .sum::<f64>()
        / n;

    Ok(DepthErrorReport { mae, abs_rel, minmax_mae, valid_pixel_count: pairs.len(), error_map })
}

/// Per-pixel mean error over the frames where that pixel is valid.
pub fn aggregate_error_heatmap(reports: &[DepthErrorReport]) -> Result<Raster, DepthError> {
    let first = reports.first().ok_or(DepthError::Empty)?;
    let (w, h) = (first.error_map.width(), first.error_map.height());
    let mut sum = vec![0.0f64; w as usize * h as usize];
    let mut count = vec![0u32; sum.len()];
    for r in reports {
        if !r.error_map.same_shape(&first.error_map) {
            return Err(DepthError::Shape(format!(
                "error map {}x{} differs from {w}x{h}",
                r.error_map.width(),
                r.error_map.height()
            )));
        }
        for (i, v) in r.error_map.values().iter().enumerate() {
            if v.is_finite() {
                sum[i] += f64::from(*v);
                count[i] += 1;
            }
        }
    }
    let values = sum
        .iter()
        .zip(&count)
        .map(|(s, c)| if *c > 0 { (s / f64::from(*c)) as f32 } else { f32::NAN })
        .collect();
    Ok(Raster::new(w, h, values).expect("same shape"))
}
