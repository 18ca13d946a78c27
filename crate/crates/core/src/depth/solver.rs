//! Conjugate gradients on the normal equations `AᵀA x = Aᵀb` of a square
//! sparse system, preconditioned by a geometric multigrid V-cycle.
//!
//! The unknowns live on a pixel grid. Coarse levels halve the grid with
//! bilinear prolongation `P` restricted to the unknowns present, and carry
//! Galerkin operators `Pᵀ N P` (the first one as `(AP)ᵀ(AP)`, so `AᵀA` is
//! never assembled at full resolution). Smoothing is damped Jacobi with the
//! same sweeps before and after the coarse correction, which keeps the
//! preconditioner symmetric.

use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, Dyn};
use nalgebra_sparse::convert::serial::convert_csr_dense;
use nalgebra_sparse::{CooMatrix, CsrMatrix};

/// Levels at or below this many unknowns are solved densely.
const COARSEST_SIZE: usize = 600;
const MAX_LEVELS: usize = 16;
const SWEEPS: usize = 2;

pub(crate) struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `|Aᵀ(b - A x)| / |Aᵀb|`.
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// y = A x
fn mul(a: &CsrMatrix<f64>, x: &[f64], y: &mut [f64]) {
    let (off, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = (off[i]..off[i + 1]).map(|k| vals[k] * x[cols[k]]).sum();
    }
}

/// y = Aᵀ x
fn mul_t(a: &CsrMatrix<f64>, x: &[f64], y: &mut [f64]) {
    let (off, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    y.iter_mut().for_each(|v| *v = 0.0);
    for (i, xi) in x.iter().enumerate() {
        for k in off[i]..off[i + 1] {
            y[cols[k]] += vals[k] * xi;
        }
    }
}

enum Operator {
    /// `AᵀA`, applied as two products.
    Normal(CsrMatrix<f64>),
    Assembled(CsrMatrix<f64>),
}

impl Operator {
    fn size(&self) -> usize {
        match self {
            Operator::Normal(a) => a.ncols(),
            Operator::Assembled(m) => m.nrows(),
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Operator::Normal(a) => {
                let mut t = vec![0.0; a.nrows()];
                mul(a, x, &mut t);
                mul_t(a, &t, y);
            }
            Operator::Assembled(m) => mul(m, x, y),
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        match self {
            Operator::Normal(a) => {
                let mut d = vec![0.0; a.ncols()];
                for (c, v) in a.col_indices().iter().zip(a.values()) {
                    d[*c] += v * v;
                }
                d
            }
            Operator::Assembled(m) => {
                let mut d = vec![0.0; m.nrows()];
                for (i, row) in m.row_iter().enumerate() {
                    d[i] = row.get_entry(i).map_or(0.0, |e| e.into_value());
                }
                d
            }
        }
    }

    fn galerkin(&self, p: &CsrMatrix<f64>) -> CsrMatrix<f64> {
        match self {
            Operator::Normal(a) => {
                let ap = a * p;
                &ap.transpose() * &ap
            }
            Operator::Assembled(m) => &p.transpose() * &(m * p),
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Operator::Normal(a) => convert_csr_dense(&(&a.transpose() * a)),
            Operator::Assembled(m) => convert_csr_dense(m),
        }
    }
}

struct Level {
    op: Operator,
    inv_diag: Vec<f64>,
    omega: f64,
    /// Prolongation from the next coarser level.
    p: Option<CsrMatrix<f64>>,
}

impl Level {
    fn new(op: Operator, p: Option<CsrMatrix<f64>>) -> Self {
        let inv_diag: Vec<f64> = op.diagonal().into_iter().map(|d| if d > 0.0 { 1.0 / d } else { 0.0 }).collect();
        let lambda = spectral_radius_estimate(&op, &inv_diag);
        // 4/(3λ) is the usual Jacobi smoothing weight; the 1.1 covers the
        // power-iteration estimate falling short of the true radius.
        let omega = 4.0 / (3.0 * 1.1 * lambda.max(1e-12));
        Level { op, inv_diag, omega, p }
    }

    fn smooth(&self, b: &[f64], x: &mut [f64]) {
        let mut ax = vec![0.0; x.len()];
        for _ in 0..SWEEPS {
            self.op.apply(x, &mut ax);
            for i in 0..x.len() {
                x[i] += self.omega * self.inv_diag[i] * (b[i] - ax[i]);
            }
        }
    }
}

/// Largest eigenvalue of `D⁻¹N` by power iteration from a fixed start.
fn spectral_radius_estimate(op: &Operator, inv_diag: &[f64]) -> f64 {
    let n = op.size();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 / 7.0).collect();
    let mut w = vec![0.0; n];
    let mut lambda = 1.0;
    for _ in 0..15 {
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        op.apply(&v, &mut w);
        w.iter_mut().zip(inv_diag).for_each(|(x, d)| *x *= d);
        lambda = dot(&w, &w).sqrt();
        std::mem::swap(&mut v, &mut w);
    }
    lambda
}

/// Bilinear prolongation from the half-resolution grid to `nodes`; returns
/// it with the coarse nodes it references, in first-reference order.
fn prolongation(nodes: &[(usize, usize)]) -> (CsrMatrix<f64>, Vec<(usize, usize)>) {
    let split = |i: usize| -> Vec<(usize, f64)> {
        if i % 2 == 0 {
            vec![(i / 2, 1.0)]
        } else {
            vec![(i / 2, 0.5), (i / 2 + 1, 0.5)]
        }
    };
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut coarse = Vec::new();
    let mut entries = Vec::new();
    for (row, &(c, r)) in nodes.iter().enumerate() {
        for (cc, wc) in split(c) {
            for (cr, wr) in split(r) {
                let j = *index.entry((cc, cr)).or_insert_with(|| {
                    coarse.push((cc, cr));
                    coarse.len() - 1
                });
                entries.push((row, j, wc * wr));
            }
        }
    }
    let mut coo = CooMatrix::new(nodes.len(), coarse.len());
    for (i, j, v) in entries {
        coo.push(i, j, v);
    }
    (CsrMatrix::from(&coo), coarse)
}

pub(crate) struct Multigrid {
    levels: Vec<Level>,
    coarsest: Cholesky<f64, Dyn>,
}

impl Multigrid {
    /// Hierarchy for `AᵀA`, where column `j` of `a` is the unknown at grid
    /// position `nodes[j]`.
    pub fn new(a: CsrMatrix<f64>, nodes: Vec<(usize, usize)>) -> Self {
        let mut levels = Vec::new();
        let mut op = Operator::Normal(a);
        let mut nodes = nodes;
        loop {
            let n = nodes.len();
            let coarsen = n > COARSEST_SIZE && levels.len() + 1 < MAX_LEVELS;
            let next = coarsen.then(|| prolongation(&nodes)).filter(|(_, coarse)| coarse.len() * 10 < n * 9);
            let Some((p, coarse_nodes)) = next else {
                let coarsest = dense_cholesky(op.to_dense());
                levels.push(Level::new(op, None));
                return Multigrid { levels, coarsest };
            };
            let coarse_op = Operator::Assembled(op.galerkin(&p));
            levels.push(Level::new(op, Some(p)));
            op = coarse_op;
            nodes = coarse_nodes;
        }
    }

    fn vcycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        let level = &self.levels[l];
        let Some(p) = &level.p else {
            let sol = self.coarsest.solve(&nalgebra::DVector::from_column_slice(b));
            x.copy_from_slice(sol.as_slice());
            return;
        };
        level.smooth(b, x);
        let mut ax = vec![0.0; x.len()];
        level.op.apply(x, &mut ax);
        let residual: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let mut coarse_b = vec![0.0; p.ncols()];
        mul_t(p, &residual, &mut coarse_b);
        let mut coarse_x = vec![0.0; p.ncols()];
        self.vcycle(l + 1, &coarse_b, &mut coarse_x);
        let mut correction = vec![0.0; x.len()];
        mul(p, &coarse_x, &mut correction);
        x.iter_mut().zip(&correction).for_each(|(x, c)| *x += c);
        level.smooth(b, x);
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; r.len()];
        self.vcycle(0, r, &mut z);
        z
    }

    fn operator(&self) -> &Operator {
        &self.levels[0].op
    }

    #[cfg(test)]
    fn levels(&self) -> usize {
        self.levels.len()
    }
}

/// Galerkin products of dependent prolongation columns can be singular; a
/// relative diagonal shift keeps the factorization defined.
fn dense_cholesky(m: DMatrix<f64>) -> Cholesky<f64, Dyn> {
    let mut shift = 1e-12;
    loop {
        let mut shifted = m.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] *= 1.0 + shift;
            if shifted[(i, i)] == 0.0 {
                shifted[(i, i)] = shift;
            }
        }
        if let Some(c) = Cholesky::new(shifted) {
            return c;
        }
        shift *= 100.0;
    }
}

/// Preconditioned CG on `AᵀA x = Aᵀb`, starting at 0, where `mg` was built
/// from `a`.
pub(crate) fn solve_normal_equations(mg: &Multigrid, b: &[f64], tol: f64, max_iterations: usize) -> Solution {
    let Operator::Normal(a) = mg.operator() else {
        unreachable!("the finest level holds the normal operator");
    };
    let n = a.ncols();
    let mut x = vec![0.0; n];
    let mut r = vec![0.0; n];
    mul_t(a, b, &mut r);
    let rhs_norm = dot(&r, &r).sqrt();
    if rhs_norm == 0.0 {
        return Solution { x, iterations: 0, relative_residual: 0.0, converged: true };
    }
    let mut z = mg.precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = 1.0;
    for it in 1..=max_iterations {
        mg.operator().apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0 && rz > 0.0) {
            return Solution { x, iterations: it, relative_residual: rel, converged: false };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / rhs_norm;
        if rel <= tol {
            return Solution { x, iterations: it, relative_residual: rel, converged: true };
        }
        z = mg.precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Solution { x, iterations: max_iterations, relative_residual: rel, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_laplacian_like(w: usize, h: usize) -> (CsrMatrix<f64>, Vec<(usize, usize)>) {
        // Unknowns are all pixels except the left column; rows are
        // x_p - mean of 4-neighbors, known neighbors folded into b.
        let nodes: Vec<(usize, usize)> = (0..h).flat_map(|r| (1..w).map(move |c| (c, r))).collect();
        let index: HashMap<(usize, usize), usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut coo = CooMatrix::new(nodes.len(), nodes.len());
        for (i, &(c, r)) in nodes.iter().enumerate() {
            coo.push(i, i, 1.0);
            let nbrs: Vec<(usize, usize)> = [(c.wrapping_sub(1), r), (c + 1, r), (c, r.wrapping_sub(1)), (c, r + 1)]
                .into_iter()
                .filter(|&(cc, rr)| cc < w && rr < h)
                .collect();
            for q in &nbrs {
                if let Some(&j) = index.get(q) {
                    coo.push(i, j, -1.0 / nbrs.len() as f64);
                }
            }
        }
        (CsrMatrix::from(&coo), nodes)
    }

    #[test]
    fn multigrid_pcg_beats_plain_iteration_counts() {
        let (a, nodes) = grid_laplacian_like(96, 64);
        let n = a.nrows();
        let b: Vec<f64> = (0..n).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let mg = Multigrid::new(a.clone(), nodes);
        assert!(mg.levels() > 2);
        let s = solve_normal_equations(&mg, &b, 1e-10, 500);
        assert!(s.converged, "{} iterations, residual {:e}", s.iterations, s.relative_residual);
        assert!(s.iterations < 100, "{} iterations", s.iterations);
        let mut ax = vec![0.0; n];
        mul(&a, &s.x, &mut ax);
        let err = ax.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn small_systems_are_solved_in_one_step() {
        let (a, nodes) = grid_laplacian_like(6, 5);
        let b = vec![1.0; a.nrows()];
        let mg = Multigrid::new(a, nodes);
        assert_eq!(mg.levels(), 1);
        let s = solve_normal_equations(&mg, &b, 1e-12, 10);
        assert!(s.converged && s.iterations <= 2, "{}", s.iterations);
    }
}
