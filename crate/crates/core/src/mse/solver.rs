//! Newton and energy-descent solvers for the discrete Dirichlet problem.

use super::discrete::{
    apply_interior, area_energy, gradient_bound, linear_step, max_norm, mse_residual, tri_gradient,
    triangles, Linearization,
};
use super::grid::GridFunction;
use crate::{Error, Result};

/// Starting iterate.
#[derive(Debug, Clone, Default)]
pub enum Init {
    /// Discrete harmonic extension of the boundary data.
    #[default]
    Harmonic,
    /// Interior values of the given function (its boundary is replaced by
    /// the Dirichlet data).
    Given(GridFunction),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Max-norm tolerance on the discrete residual (Newton) or on the
    /// area-scaled energy gradient (descent), which is the same quantity.
    pub tol: f64,
    pub max_iter: usize,
}

impl SolverOptions {
    pub const NEWTON_DEFAULT: SolverOptions = SolverOptions { tol: 1e-10, max_iter: 50 };
    pub const DESCENT_DEFAULT: SolverOptions = SolverOptions { tol: 1e-10, max_iter: 200_000 };
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self::NEWTON_DEFAULT
    }
}

pub const MAX_HALVINGS: usize = 30;
pub const PICARD_SWEEPS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub method: &'static str,
    /// Newton steps or descent steps taken.
    pub iterations: usize,
    pub picard_sweeps: usize,
    /// Max-norm residual before each step and after the last one.
    pub residual_history: Vec<f64>,
    /// Area energy after each accepted step (descent) or each Newton step.
    pub energy_history: Vec<f64>,
    pub converged: bool,
    pub tol: f64,
    /// Largest discrete gradient norm of the final iterate.
    pub gradient_bound: f64,
    /// Smallest eigenvalue bound `(1 + G^2)^{-3/2}` of the linearized operator.
    pub lambda: f64,
    /// Largest increment per unit of the top eigenvalue of a non-negative
    /// Hessian perturbation: the trace bound, `n - 1 = 2` for graphs over
    /// the plane.
    pub big_lambda: f64,
}

impl SolverReport {
    fn new(method: &'static str, tol: f64) -> Self {
        SolverReport {
            method,
            iterations: 0,
            picard_sweeps: 0,
            residual_history: Vec::new(),
            energy_history: Vec::new(),
            converged: false,
            tol,
            gradient_bound: 0.0,
            lambda: 1.0,
            big_lambda: 2.0,
        }
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }

    fn finish(mut self, phi: &GridFunction) -> Self {
        self.gradient_bound = gradient_bound(phi);
        self.lambda = (1.0 + self.gradient_bound.powi(2)).powf(-1.5);
        self
    }
}

/// Discrete harmonic extension of the boundary values of `boundary`.
pub fn harmonic_extension(boundary: &GridFunction) -> Result<GridFunction> {
    let mut phi = GridFunction::zeros(boundary.grid).with_boundary_of(boundary)?;
    let delta = linear_step(&phi, Linearization::Harmonic)?;
    apply_interior(&mut phi, &delta, 1.0);
    Ok(phi)
}

fn initial(boundary: &GridFunction, init: &Init) -> Result<GridFunction> {
    match init {
        Init::Harmonic => harmonic_extension(boundary),
        Init::Given(f) => f.clone().with_boundary_of(boundary),
    }
}

/// Damped Newton on the discrete minimal surface equation. Each step halves
/// until the residual max-norm drops; after [`MAX_HALVINGS`] failures it
/// runs [`PICARD_SWEEPS`] frozen-coefficient sweeps and resumes Newton.
pub fn solve_mse(boundary: &GridFunction, init: &Init, opts: &SolverOptions) -> Result<(GridFunction, SolverReport)> {
    let mut phi = initial(boundary, init)?;
    let mut report = SolverReport::new("newton", opts.tol);
    let mut res = max_norm(&mse_residual(&phi));
    report.residual_history.push(res);
    report.energy_history.push(area_energy(&phi));
    while res >= opts.tol {
        if report.iterations >= opts.max_iter {
            return Err(Error::NoConvergence(Box::new(report.finish(&phi))));
        }
        report.iterations += 1;
        let delta = linear_step(&phi, Linearization::Newton)?;
        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = phi.clone();
            apply_interior(&mut trial, &delta, t);
            let r = max_norm(&mse_residual(&trial));
            if r < res {
                accepted = Some((trial, r));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, r)) => {
                phi = trial;
                res = r;
            }
            None => {
                for _ in 0..PICARD_SWEEPS {
                    let delta = linear_step(&phi, Linearization::Picard)?;
                    apply_interior(&mut phi, &delta, 1.0);
                    report.picard_sweeps += 1;
                }
                res = max_norm(&mse_residual(&phi));
            }
        }
        report.residual_history.push(res);
        report.energy_history.push(area_energy(&phi));
    }
    report.converged = true;
    let report = report.finish(&phi);
    Ok((phi, report))
}

/// Change of the area-scaled energy when `phi` moves by `t * dir`, split
/// into the exact first-order term and a cancellation-free second-order sum.
fn energy_change(phi: &GridFunction, grad: &[f64], dir: &[f64], t: f64) -> f64 {
    let g = &phi.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let first: f64 = t * grad.iter().zip(dir).map(|(a, b)| a * b).sum::<f64>();
    let mut step = vec![0.0; g.len()];
    let mut k = 0;
    for j in 1..g.m - 1 {
        for i in 1..g.m - 1 {
            step[g.index(i, j)] = t * dir[k];
            k += 1;
        }
    }
    let mut second = 0.0;
    for tri in triangles(g) {
        let (gx, gy) = tri_gradient(&tri, &phi.values, hx, hy);
        let (dx, dy) = tri_gradient(&tri, &step, hx, hy);
        let w0 = (1.0 + gx * gx + gy * gy).sqrt();
        let (nx, ny) = (gx + dx, gy + dy);
        let w1 = (1.0 + nx * nx + ny * ny).sqrt();
        let gd = gx * dx + gy * dy;
        let dd = dx * dx + dy * dy;
        let s = w0 + w1;
        second += dd / s - gd * (2.0 * gd + dd) / (w0 * s * s);
    }
    first + 0.25 * second
}

/// Gradient descent on the area functional with Barzilai-Borwein trial steps
/// and Armijo backtracking. Stops when the area-scaled energy gradient, which
/// is minus the discrete residual, drops below `tol` in max-norm.
pub fn energy_minimize(
    boundary: &GridFunction,
    init: &Init,
    opts: &SolverOptions,
) -> Result<(GridFunction, SolverReport)> {
    const ARMIJO: f64 = 1e-4;
    let mut phi = initial(boundary, init)?;
    let grid = phi.grid;
    let mut report = SolverReport::new("energy_descent", opts.tol);
    let mut energy = area_energy(&phi);
    let mut grad: Vec<f64> = mse_residual(&phi).iter().map(|r| -r).collect();
    let mut gnorm = max_norm(&grad);
    report.residual_history.push(gnorm);
    report.energy_history.push(energy);
    let h2 = grid.hx().min(grid.hy()).powi(2);
    let mut step = 0.25 * h2;
    while gnorm >= opts.tol {
        if report.iterations >= opts.max_iter {
            return Err(Error::NoConvergence(Box::new(report.finish(&phi))));
        }
        report.iterations += 1;
        let dir: Vec<f64> = grad.iter().map(|g| -g).collect();
        let slope: f64 = grad.iter().map(|g| g * g).sum();
        let mut t = step;
        let mut change = energy_change(&phi, &grad, &dir, t);
        let mut halvings = 0;
        while change > -ARMIJO * t * slope {
            t *= 0.5;
            halvings += 1;
            if halvings > 60 {
                return Err(Error::NoConvergence(Box::new(report.finish(&phi))));
            }
            change = energy_change(&phi, &grad, &dir, t);
        }
        apply_interior(&mut phi, &dir, t);
        energy += change * grid.hx() * grid.hy();
        let new_grad: Vec<f64> = mse_residual(&phi).iter().map(|r| -r).collect();
        let (mut ss, mut sy) = (0.0, 0.0);
        for ((d, g1), g0) in dir.iter().zip(&new_grad).zip(&grad) {
            let s = t * d;
            ss += s * s;
            sy += s * (g1 - g0);
        }
        step = if sy > 0.0 { ss / sy } else { 0.25 * h2 };
        grad = new_grad;
        gnorm = max_norm(&grad);
        report.residual_history.push(gnorm);
        report.energy_history.push(energy);
    }
    report.converged = true;
    let report = report.finish(&phi);
    Ok((phi, report))
}

/// Interior residual of `phi` as a full-grid function (zero on the boundary).
pub fn residual_function(phi: &GridFunction) -> GridFunction {
    let full = super::discrete::mse_residual_full(phi);
    GridFunction {
        grid: phi.grid,
        values: full,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog::scherk_height;
    use crate::mse::Grid2D;

    fn scherk_boundary(m: usize) -> GridFunction {
        let g = Grid2D::square(-1.0, 1.0, m).unwrap();
        GridFunction::boundary_from_fn(g, |x, y| scherk_height(&[x, y]))
    }

    #[test]
    fn affine_data_is_solved_without_iterating() {
        let g = Grid2D::square(0.0, 1.0, 9).unwrap();
        let b = GridFunction::boundary_from_fn(g, |x, y| 2.0 * x - y + 1.0);
        let (phi, rep) = solve_mse(&b, &Init::Harmonic, &SolverOptions::default()).unwrap();
        assert!(rep.iterations <= 1);
        assert!(rep.converged);
        let exact = GridFunction::from_fn(g, |x, y| 2.0 * x - y + 1.0);
        assert!(phi.max_abs_diff(&exact) < 1e-13);
    }

    #[test]
    fn newton_converges_on_scherk() {
        let (phi, rep) = solve_mse(&scherk_boundary(17), &Init::Harmonic, &SolverOptions::default()).unwrap();
        assert!(rep.converged && rep.final_residual() < 1e-10);
        assert!(rep.iterations < 10);
        let exact = GridFunction::from_fn(phi.grid, |x, y| scherk_height(&[x, y]));
        assert!(phi.max_abs_diff(&exact) < 1e-2);
        assert!(rep.lambda < 1.0 && rep.lambda > 0.0);
    }

    #[test]
    fn descent_energy_is_monotone() {
        let b = scherk_boundary(9);
        let (_, rep) = energy_minimize(&b, &Init::Harmonic, &SolverOptions { tol: 1e-9, max_iter: 100_000 }).unwrap();
        assert!(rep.converged);
        assert!(rep.energy_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(rep.energy_history.last() < rep.energy_history.first());
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let b = scherk_boundary(9);
        let err = solve_mse(&b, &Init::Harmonic, &SolverOptions { tol: 1e-10, max_iter: 1 }).unwrap_err();
        assert!(matches!(err, Error::NoConvergence(r) if r.iterations == 1));
    }
}
