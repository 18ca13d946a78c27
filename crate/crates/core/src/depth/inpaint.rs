//! Sparse depth densification with guide-image affinities.
//!
//! Every unknown pixel is constrained to equal the affinity-weighted average
//! of its 3×3 neighbors; known pixels are held fixed. The resulting square
//! system `R x = b` over the unknowns is solved in the least-squares sense
//! (`RᵀR x = Rᵀb`) with multigrid-preconditioned conjugate gradients.

use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::solver::{solve_normal_equations, Multigrid};
use super::{DepthError, DepthMap, SparseDepth};
use crate::raster::Raster;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InpaintConfig {
    /// Lower bound on the local guide variance.
    pub sigma_floor: f64,
    /// Relative residual at which CG stops.
    pub solver_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for InpaintConfig {
    fn default() -> Self {
        InpaintConfig { sigma_floor: 1e-4, solver_tolerance: 1e-6, max_iterations: 10_000 }
    }
}

impl InpaintConfig {
    pub fn validate(&self) -> Result<(), DepthError> {
        if !(self.sigma_floor > 0.0) {
            return Err(DepthError::Config(format!("sigma_floor must be > 0, got {}", self.sigma_floor)));
        }
        if !(self.solver_tolerance > 0.0 && self.solver_tolerance <= 1e-2) {
            return Err(DepthError::Config(format!(
                "solver_tolerance must lie in (0, 1e-2], got {}",
                self.solver_tolerance
            )));
        }
        if self.max_iterations < 1 {
            return Err(DepthError::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Inpainted map plus solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Inpainting {
    pub depth: DepthMap,
    /// The same solution before rounding to f32, row-major.
    pub values_f64: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Densifies `sparse`. Without a guide, a uniform guide is used.
pub fn inpaint_depth(sparse: &SparseDepth, guide: Option<&Raster>, cfg: &InpaintConfig) -> Result<DepthMap, DepthError> {
    inpaint_depth_detailed(sparse, guide, cfg).map(|r| r.depth)
}

pub fn inpaint_depth_detailed(
    sparse: &SparseDepth,
    guide: Option<&Raster>,
    cfg: &InpaintConfig,
) -> Result<Inpainting, DepthError> {
    cfg.validate()?;
    let (w, h) = (sparse.width() as usize, sparse.height() as usize);
    if let Some(g) = guide {
        if !g.same_shape(sparse.raster()) {
            return Err(DepthError::Shape(format!(
                "guide is {}x{}, depth is {w}x{h}",
                g.width(),
                g.height()
            )));
        }
    }
    if !sparse.values().iter().any(|v| v.is_finite()) {
        return Err(DepthError::NoKnownPixels);
    }
    let values: Vec<f64> = sparse.values().iter().map(|v| f64::from(*v)).collect();
    let guide: Option<Vec<f64>> = guide.map(|g| g.values().iter().map(|v| f64::from(*v)).collect());
    let level = solve_level(&values, w, h, guide.as_deref(), cfg);
    if !level.converged {
        return Err(DepthError::NotConverged { iterations: level.iterations, residual: level.relative_residual });
    }
    let out = level.values.iter().map(|v| *v as f32).collect();
    let raster = Raster::new(sparse.width(), sparse.height(), out).expect("same shape");
    let depth = DepthMap::new(raster).map_err(|_| DepthError::NotConverged {
        iterations: level.iterations,
        residual: level.relative_residual,
    })?;
    Ok(Inpainting {
        depth,
        values_f64: level.values,
        iterations: level.iterations,
        relative_residual: level.relative_residual,
    })
}

struct Level {
    values: Vec<f64>,
    iterations: usize,
    relative_residual: f64,
    converged: bool,
}

/// `values` holds NaN at unknown pixels and has at least one known pixel.
fn solve_level(values: &[f64], w: usize, h: usize, guide: Option<&[f64]>, cfg: &InpaintConfig) -> Level {
    let known: Vec<bool> = values.iter().map(|v| v.is_finite()).collect();
    let n_known = known.iter().filter(|k| **k).count();
    // Unknowns are solved as offsets from the mean known depth, which makes
    // the system independent of a global depth shift.
    let mean_known = values.iter().filter(|v| v.is_finite()).sum::<f64>() / n_known as f64;

    let mut unknown_index = vec![usize::MAX; w * h];
    let mut unknowns = Vec::new();
    for (i, k) in known.iter().enumerate() {
        if !k {
            unknown_index[i] = unknowns.len();
            unknowns.push(i);
        }
    }
    if unknowns.is_empty() {
        return Level { values: values.to_vec(), iterations: 0, relative_residual: 0.0, converged: true };
    }

    let mut system = CooMatrix::new(unknowns.len(), unknowns.len());
    let mut rhs = vec![0.0; unknowns.len()];
    let mut weights = Vec::with_capacity(8);
    for (row, &p) in unknowns.iter().enumerate() {
        neighbor_weights(p, w, h, guide, cfg.sigma_floor, &mut weights);
        system.push(row, row, 1.0);
        for &(q, wq) in &weights {
            if known[q] {
                rhs[row] += wq * (values[q] - mean_known);
            } else {
                system.push(row, unknown_index[q], -wq);
            }
        }
    }
    let nodes = unknowns.iter().map(|&p| (p % w, p / w)).collect();
    let mg = Multigrid::new(CsrMatrix::from(&system), nodes);
    let solve = solve_normal_equations(&mg, &rhs, cfg.solver_tolerance, cfg.max_iterations);
    let mut out = values.to_vec();
    for (row, &p) in unknowns.iter().enumerate() {
        out[p] = mean_known + solve.x[row];
    }
    Level { values: out, iterations: solve.iterations, relative_residual: solve.relative_residual, converged: solve.converged }
}

/// Normalized affinities from pixel `p` to its 3×3 neighbors (excluding `p`).
fn neighbor_weights(p: usize, w: usize, h: usize, guide: Option<&[f64]>, sigma_floor: f64, out: &mut Vec<(usize, f64)>) {
    out.clear();
    let (col, row) = (p % w, p / w);
    let (c0, c1) = (col.saturating_sub(1), (col + 1).min(w - 1));
    let (r0, r1) = (row.saturating_sub(1), (row + 1).min(h - 1));
    let window = || (r0..=r1).flat_map(move |r| (c0..=c1).map(move |c| r * w + c));

    let Some(g) = guide else {
        out.extend(window().filter(|&q| q != p).map(|q| (q, 1.0)));
        let n = out.len() as f64;
        out.iter_mut().for_each(|e| e.1 /= n);
        return;
    };
    let y = |q: usize| g[q];
    let count = window().count() as f64;
    let mean = window().map(y).sum::<f64>() / count;
    let var = window().map(|q| (y(q) - mean).powi(2)).sum::<f64>() / count;
    let two_sigma2 = 2.0 * var.max(sigma_floor);
    let yp = y(p);
    out.extend(window().filter(|&q| q != p).map(|q| (q, -(yp - y(q)).powi(2) / two_sigma2)));
    // shift by the largest exponent so the strongest neighbor never underflows
    let top = out.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    out.iter_mut().for_each(|e| e.1 = (e.1 - top).exp());
    let total: f64 = out.iter().map(|e| e.1).sum();
    out.iter_mut().for_each(|e| e.1 /= total);
}
