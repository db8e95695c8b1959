//! Discrete area functional and its Euler-Lagrange residual.
//!
//! Each grid cell is split into triangles along both diagonals. A triangle's
//! piecewise-linear gradient pairs one horizontal cell edge difference with
//! one vertical edge difference, so the four triangles of a cell are the four
//! (bottom|top) x (left|right) combinations, each weighted by a quarter of the
//! cell area. The residual is the exact negative gradient of this energy
//! divided by the cell area, which makes it a conservative flux difference:
//! the flux across an edge is the average of `grad phi / sqrt(1 + |grad phi|^2)`
//! over the triangles that use it. Newton, Picard and energy descent all see
//! the same discrete problem.

use nalgebra::DVector;
use nalgebra_sparse::{factorization::CscCholesky, CooMatrix, CscMatrix};

use super::grid::{Grid2D, GridFunction};
use crate::{Error, Result};

/// One triangle's gradient stencil: `gx = (phi[x1] - phi[x0]) / hx`,
/// `gy = (phi[y1] - phi[y0]) / hy`, node indices into the full grid.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Triangle {
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
}

pub(crate) fn triangles(grid: &Grid2D) -> impl Iterator<Item = Triangle> + '_ {
    let m = grid.m;
    (0..m - 1).flat_map(move |j| {
        (0..m - 1).flat_map(move |i| {
            let a = grid.index(i, j);
            let b = grid.index(i + 1, j);
            let c = grid.index(i, j + 1);
            let d = grid.index(i + 1, j + 1);
            [(a, b), (c, d)].into_iter().flat_map(move |(x0, x1)| {
                [(a, c), (b, d)].into_iter().map(move |(y0, y1)| Triangle { x0, x1, y0, y1 })
            })
        })
    })
}

#[inline]
pub(crate) fn tri_gradient(t: &Triangle, v: &[f64], hx: f64, hy: f64) -> (f64, f64) {
    ((v[t.x1] - v[t.x0]) / hx, (v[t.y1] - v[t.y0]) / hy)
}

/// Area of the graph, triangle quadrature of `sqrt(1 + |grad phi|^2)`.
pub fn area_energy(phi: &GridFunction) -> f64 {
    let g = &phi.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let w = 0.25 * hx * hy;
    triangles(g)
        .map(|t| {
            let (gx, gy) = tri_gradient(&t, &phi.values, hx, hy);
            w * (1.0 + gx * gx + gy * gy).sqrt()
        })
        .sum()
}

/// Largest triangle gradient norm.
pub fn gradient_bound(phi: &GridFunction) -> f64 {
    let g = &phi.grid;
    let (hx, hy) = (g.hx(), g.hy());
    triangles(g)
        .map(|t| {
            let (gx, gy) = tri_gradient(&t, &phi.values, hx, hy);
            gx.hypot(gy)
        })
        .fold(0.0, f64::max)
}

/// Discrete `div(grad phi / sqrt(1 + |grad phi|^2))` at every node; boundary
/// entries are zero. Positive for convex bowls.
pub fn mse_residual_full(phi: &GridFunction) -> Vec<f64> {
    let g = &phi.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let mut acc = vec![0.0; g.len()];
    // -dE/dphi / (hx hy): the quarter-cell weight leaves 1/(4h) per difference.
    let (sx, sy) = (0.25 / hx, 0.25 / hy);
    for t in triangles(g) {
        let (gx, gy) = tri_gradient(&t, &phi.values, hx, hy);
        let wgt = (1.0 + gx * gx + gy * gy).sqrt();
        let (qx, qy) = (sx * gx / wgt, sy * gy / wgt);
        acc[t.x0] += qx;
        acc[t.x1] -= qx;
        acc[t.y0] += qy;
        acc[t.y1] -= qy;
    }
    for j in 0..g.m {
        for i in 0..g.m {
            if g.is_boundary(i, j) {
                acc[g.index(i, j)] = 0.0;
            }
        }
    }
    acc
}

/// Interior residual in row-major order of the `(m-2) x (m-2)` interior block.
pub fn mse_residual(phi: &GridFunction) -> Vec<f64> {
    let full = mse_residual_full(phi);
    interior(&phi.grid, &full)
}

pub(crate) fn interior(grid: &Grid2D, full: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.interior_count());
    for j in 1..grid.m - 1 {
        for i in 1..grid.m - 1 {
            out.push(full[grid.index(i, j)]);
        }
    }
    out
}

pub(crate) fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Which quadratic model of the energy to linearize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Linearization {
    /// Exact Hessian of the area functional.
    Newton,
    /// Coefficients `1/sqrt(1+|grad phi|^2)` frozen at the current iterate.
    Picard,
    /// Dirichlet energy (discrete Laplacian).
    Harmonic,
}

/// Solves `K delta = rhs` on the interior, where `K` is the chosen model's
/// Hessian divided by the cell area and `rhs` its negative gradient (the MSE
/// residual for Newton and Picard). Returns the interior update.
pub(crate) fn linear_step(phi: &GridFunction, kind: Linearization) -> Result<Vec<f64>> {
    let g = &phi.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let n = g.interior_count();
    let node_row = |k: usize| g.interior_index(k % g.m, k / g.m);
    let mut coo = CooMatrix::new(n, n);
    let mut rhs = vec![0.0; g.len()];
    let w = 0.25;
    for t in triangles(g) {
        let (gx, gy) = tri_gradient(&t, &phi.values, hx, hy);
        let s2 = 1.0 + gx * gx + gy * gy;
        let wgt = s2.sqrt();
        // 2x2 model Hessian in gradient space.
        let (axx, axy, ayy, qx, qy) = match kind {
            Linearization::Newton => {
                let c = 1.0 / (wgt * s2);
                ((1.0 + gy * gy) * c, -gx * gy * c, (1.0 + gx * gx) * c, gx / wgt, gy / wgt)
            }
            Linearization::Picard => (1.0 / wgt, 0.0, 1.0 / wgt, gx / wgt, gy / wgt),
            Linearization::Harmonic => (1.0, 0.0, 1.0, gx, gy),
        };
        // gradient = sum over nodes of coefficient * phi[node]
        let terms = [(t.x0, -1.0 / hx, 0.0), (t.x1, 1.0 / hx, 0.0), (t.y0, 0.0, -1.0 / hy), (t.y1, 0.0, 1.0 / hy)];
        for &(p, bxp, byp) in &terms {
            rhs[p] -= w * (qx * bxp + qy * byp);
            let Some(rp) = node_row(p) else { continue };
            for &(q, bxq, byq) in &terms {
                let Some(rq) = node_row(q) else { continue };
                let v = w * (bxp * (axx * bxq + axy * byq) + byp * (axy * bxq + ayy * byq));
                if v != 0.0 {
                    coo.push(rp, rq, v);
                }
            }
        }
    }
    let k = CscMatrix::from(&coo);
    let chol = CscCholesky::factor(&k).map_err(|_| Error::SingularLinearSystem)?;
    let b = DVector::from_vec(interior(g, &rhs));
    let x = chol.solve(&b);
    Ok(x.column(0).iter().copied().collect())
}

/// Adds an interior update to a grid function.
pub(crate) fn apply_interior(phi: &mut GridFunction, delta: &[f64], t: f64) {
    let g = phi.grid;
    let mut k = 0;
    for j in 1..g.m - 1 {
        for i in 1..g.m - 1 {
            phi.values[g.index(i, j)] += t * delta[k];
            k += 1;
        }
    }
}
