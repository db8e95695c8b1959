//! Touching paraboloids and discrete viscosity checks.
//!
//! A continuous `u` is a viscosity supersolution of `F = 0` when every
//! quadratic `Psi` touching it from below at `x0` (so `x0` is a local minimum
//! of `u - Psi`) has `F(x0, u, D Psi, D^2 Psi) <= 0`, and a subsolution when
//! every quadratic touching from above has `F >= 0`. The audit replaces "every
//! quadratic" with a finite Hessian dictionary and "local" with a node
//! neighbourhood on the grid.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::exec::{map_ordered, try_map_ordered, Execution};
use crate::geometry::{BoxDomain, GraphSurface, Side};
use crate::genlap::RadiusSchedule;
use crate::mse::GridFunction;
use crate::quadrature::{check_on_surface, run_chunks, Draw, SamplerConfig, SideTally};
use crate::rng::{aux_rng, mix};
use crate::{Error, Result};

/// `Psi(x') = value + gradient . (x' - base) + (x' - base)^T hessian (x' - base) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Paraboloid {
    pub base: DVector<f64>,
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl Paraboloid {
    pub fn new(base: DVector<f64>, value: f64, gradient: DVector<f64>, hessian: DMatrix<f64>) -> Result<Self> {
        let d = base.len();
        if gradient.len() != d || hessian.nrows() != d || hessian.ncols() != d {
            return Err(Error::invalid("paraboloid parts have mismatched dimensions"));
        }
        let asym = (&hessian - hessian.transpose()).amax();
        if asym > 1e-12 * (1.0 + hessian.amax()) {
            return Err(Error::invalid("paraboloid Hessian is not symmetric"));
        }
        Ok(Paraboloid {
            base,
            value,
            gradient,
            hessian,
        })
    }

    /// Second-order Taylor polynomial of `surface` at `x'`, lowered by
    /// `shift * |x' - base|^2` (a non-negative shift makes it touch from below
    /// when the surface is `C^2` and the shift dominates the cubic terms).
    pub fn taylor(surface: &GraphSurface, x: &[f64], shift: f64) -> Result<Self> {
        let jet = surface.jet(x)?;
        let d = x.len();
        Self::new(
            DVector::from_column_slice(x),
            jet.value,
            jet.gradient,
            jet.hessian - DMatrix::identity(d, d) * (2.0 * shift),
        )
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let dx = DVector::from_column_slice(x) - &self.base;
        self.value + self.gradient.dot(&dx) + 0.5 * dx.dot(&(&self.hessian * &dx))
    }

    /// Eigenvalues of the Hessian, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.hessian.clone()).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// The graph of `Psi` over `domain` with analytic derivatives.
    pub fn to_surface(&self, domain: BoxDomain) -> GraphSurface {
        let (p1, p2, p3) = (self.clone(), self.clone(), self.hessian.clone());
        GraphSurface::new(domain, move |x| p1.eval(x))
            .with_gradient(move |x| &p2.gradient + &p2.hessian * (DVector::from_column_slice(x) - &p2.base))
            .with_hessian(move |_| p3.clone())
    }
}

type OperatorFn = dyn Fn(&[f64], f64, &DVector<f64>, &DMatrix<f64>) -> f64 + Send + Sync;

/// Degenerate-elliptic operator `F(x, u, eta, delta)`, non-decreasing in
/// `delta` for the Loewner order, with
/// `lambda |sigma| <= F(.., delta + sigma) - F(.., delta) <= big_lambda |sigma|`
/// for `sigma >= 0`, `|sigma|` its largest eigenvalue.
#[derive(Clone)]
pub struct EllipticOperator {
    pub name: &'static str,
    pub dim: usize,
    pub lambda: f64,
    pub big_lambda: f64,
    /// `|eta|` bound under which `lambda` holds (infinite when uniform).
    pub gradient_bound: f64,
    f: Arc<OperatorFn>,
}

impl std::fmt::Debug for EllipticOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EllipticOperator")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lambda", &self.lambda)
            .field("big_lambda", &self.big_lambda)
            .field("gradient_bound", &self.gradient_bound)
            .finish()
    }
}

/// `A(eta) = (I - eta eta^T / (1 + |eta|^2)) / sqrt(1 + |eta|^2)`.
pub fn mse_coefficients(eta: &DVector<f64>) -> DMatrix<f64> {
    let d = eta.len();
    let s2 = 1.0 + eta.norm_squared();
    let a = 1.0 / s2.sqrt();
    DMatrix::identity(d, d) * a - eta * eta.transpose() * (a / s2)
}

impl EllipticOperator {
    /// Minimal surface operator `F(eta, delta) = tr(A(eta) delta)` on
    /// `{|eta| <= G}` in `d` chart dimensions: `lambda = (1 + G^2)^{-3/2}`
    /// (smallest eigenvalue of `A`), `big_lambda = d` (trace of `A` at 0).
    pub fn mse(d: usize, gradient_bound: f64) -> Self {
        EllipticOperator {
            name: "mse",
            dim: d,
            lambda: (1.0 + gradient_bound * gradient_bound).powf(-1.5),
            big_lambda: d as f64,
            gradient_bound,
            f: Arc::new(|_, _, eta, delta| (mse_coefficients(eta) * delta).trace()),
        }
    }

    pub fn laplacian(d: usize) -> Self {
        EllipticOperator {
            name: "laplacian",
            dim: d,
            lambda: 1.0,
            big_lambda: d as f64,
            gradient_bound: f64::INFINITY,
            f: Arc::new(|_, _, _, delta| delta.trace()),
        }
    }

    pub fn eval(&self, x: &[f64], u: f64, eta: &DVector<f64>, delta: &DMatrix<f64>) -> f64 {
        (self.f)(x, u, eta, delta)
    }
}

/// Minimal surface operator for graphs over the plane.
pub fn mse_operator(gradient_bound: f64) -> EllipticOperator {
    EllipticOperator::mse(2, gradient_bound)
}

/// Worst observed slack of the ellipticity pinching over random samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticityCheck {
    pub samples: usize,
    /// `min (increment - lambda |sigma|)`; non-negative when the lower bound holds.
    pub lower_slack: f64,
    /// `min (big_lambda |sigma| - increment)`; non-negative when the upper bound holds.
    pub upper_slack: f64,
}

impl EllipticityCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower_slack >= -tol && self.upper_slack >= -tol
    }
}

/// Samples `eta` in the gradient ball, symmetric `delta` with entries in
/// `[-scale, scale]` and `sigma = B B^T` with `B` entries in `[-1, 1]`.
pub fn check_ellipticity(op: &EllipticOperator, samples: usize, scale: f64, seed: u64) -> EllipticityCheck {
    let mut rng = aux_rng(mix(seed, 0xE111));
    let d = op.dim;
    let g_max = if op.gradient_bound.is_finite() { op.gradient_bound } else { 10.0 };
    let x = vec![0.0; d];
    let mut out = EllipticityCheck {
        samples,
        lower_slack: f64::INFINITY,
        upper_slack: f64::INFINITY,
    };
    for _ in 0..samples {
        let mut eta = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let norm = eta.norm();
        if norm > 0.0 {
            eta *= g_max * rng.random::<f64>().powf(1.0 / d as f64) / norm;
        }
        let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-scale..scale));
        let delta = (&a + a.transpose()) * 0.5;
        let b = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let sigma = &b * b.transpose();
        let top = SymmetricEigen::new(sigma.clone()).eigenvalues.max();
        let inc = op.eval(&x, 0.0, &eta, &(&delta + &sigma)) - op.eval(&x, 0.0, &eta, &delta);
        out.lower_slack = out.lower_slack.min(inc - op.lambda * top);
        out.upper_slack = out.upper_slack.min(op.big_lambda * top - inc);
    }
    out
}

/// How a quadratic touches a grid function at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Touch {
    /// `u - Psi >= 0` on the neighbourhood: `Psi` touches from below.
    Below,
    /// `u - Psi <= 0` on the neighbourhood.
    Above,
    None,
}

impl Touch {
    pub const fn as_str(self) -> &'static str {
        match self {
            Touch::Below => "below",
            Touch::Above => "above",
            Touch::None => "none",
        }
    }
}

/// Grid offsets `(di, dj)` within `radius` (physical units), centre excluded.
fn neighbourhood(u: &GridFunction, radius: f64) -> Vec<(isize, isize)> {
    let (hx, hy) = (u.grid.hx(), u.grid.hy());
    let ri = (radius / hx).floor() as isize;
    let rj = (radius / hy).floor() as isize;
    let mut out = Vec::new();
    for dj in -rj..=rj {
        for di in -ri..=ri {
            let d2 = (di as f64 * hx).powi(2) + (dj as f64 * hy).powi(2);
            if (di, dj) != (0, 0) && d2 <= radius * radius * (1.0 + 1e-12) {
                out.push((di, dj));
            }
        }
    }
    out
}

fn touch_on(
    u: &GridFunction,
    node: (usize, usize),
    offsets: &[(isize, isize)],
    gradient: &DVector<f64>,
    hessian: &DMatrix<f64>,
) -> Touch {
    let g = &u.grid;
    let (i, j) = node;
    let u0 = u.at(i, j);
    let mut scale = u0.abs();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(di, dj) in offsets {
        let (ii, jj) = ((i as isize + di) as usize, (j as isize + dj) as usize);
        let (dx, dy) = (g.x(ii) - g.x(i), g.y(jj) - g.y(j));
        let psi = u0
            + gradient[0] * dx
            + gradient[1] * dy
            + 0.5 * (hessian[(0, 0)] * dx * dx + 2.0 * hessian[(0, 1)] * dx * dy + hessian[(1, 1)] * dy * dy);
        let uv = u.at(ii, jj);
        scale = scale.max(uv.abs());
        let diff = uv - psi;
        lo = lo.min(diff);
        hi = hi.max(diff);
    }
    let tol = 1e-12 * (1.0 + scale);
    if lo >= -tol {
        Touch::Below
    } else if hi <= tol {
        Touch::Above
    } else {
        Touch::None
    }
}

/// Whether `psi`, vertex-matched to `u` at `node`, stays below or above `u`
/// on the grid nodes within `radius`. Ties report `Below`.
pub fn touching_detect(u: &GridFunction, psi: &Paraboloid, node: (usize, usize), radius: f64) -> Result<Touch> {
    let g = &u.grid;
    if psi.dim() != 2 {
        return Err(Error::invalid("grid touching needs a paraboloid over the plane"));
    }
    let h = g.hx().max(g.hy());
    if radius < 2.0 * h {
        return Err(Error::invalid(format!("touching radius {radius} covers fewer than 2 cells (h = {h})")));
    }
    let (i, j) = node;
    let (x, y) = (g.x(i.min(g.m - 1)), g.y(j.min(g.m - 1)));
    let ri = (radius / g.hx()).floor() as usize;
    let rj = (radius / g.hy()).floor() as usize;
    if i >= g.m || j >= g.m || i < ri || j < rj || i + ri > g.m - 1 || j + rj > g.m - 1 {
        return Err(Error::OutOfDomain { point: vec![x, y] });
    }
    let u0 = u.at(i, j);
    let vertex = psi.eval(&[x, y]);
    if (vertex - u0).abs() > 1e-10 * (1.0 + u0.abs()) {
        return Err(Error::invalid(format!("paraboloid value {vertex} does not match u = {u0} at the node")));
    }
    // Re-express Psi around the node so the comparison uses offsets only.
    let shift = DVector::from_vec(vec![x, y]) - &psi.base;
    let grad_at = &psi.gradient + &psi.hessian * shift;
    Ok(touch_on(u, node, &neighbourhood(u, radius), &grad_at, &psi.hessian))
}

/// Hessians `R(theta_k) diag(e1, e2) R(theta_k)^T` with eigenvalues from
/// `{0} U {+-K 2^{-j}, j < levels}` and `theta_k = k pi / rotations`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianDictionary {
    pub k_max: f64,
    pub levels: usize,
    pub rotations: usize,
}

impl Default for HessianDictionary {
    fn default() -> Self {
        HessianDictionary {
            k_max: 10.0,
            levels: 7,
            rotations: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryEntry {
    pub eigenvalues: [f64; 2],
    pub rotation: usize,
    pub angle: f64,
    pub hessian: DMatrix<f64>,
}

impl HessianDictionary {
    pub fn eigenvalue_grid(&self) -> Vec<f64> {
        let mut v = vec![0.0];
        for j in 0..self.levels {
            let e = self.k_max * 0.5f64.powi(j as i32);
            v.push(e);
            v.push(-e);
        }
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn entries(&self) -> Vec<DictionaryEntry> {
        let grid = self.eigenvalue_grid();
        let mut out = Vec::with_capacity(grid.len() * grid.len() * self.rotations);
        for k in 0..self.rotations {
            let angle = k as f64 * PI / self.rotations as f64;
            let (s, c) = angle.sin_cos();
            for &e1 in &grid {
                for &e2 in &grid {
                    let hessian = DMatrix::from_row_slice(
                        2,
                        2,
                        &[
                            c * c * e1 + s * s * e2,
                            c * s * (e1 - e2),
                            c * s * (e1 - e2),
                            s * s * e1 + c * c * e2,
                        ],
                    );
                    out.push(DictionaryEntry {
                        eigenvalues: [e1, e2],
                        rotation: k,
                        angle,
                        hessian,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOptions {
    pub dictionary: HessianDictionary,
    /// Neighbourhood radius in units of the larger grid spacing.
    pub radius_cells: f64,
    /// Allowed violation of the operator inequalities; `None` uses
    /// `10 h (1 + K)`.
    pub tol_f: Option<f64>,
    pub execution: Execution,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            dictionary: HessianDictionary::default(),
            radius_cells: 2.5,
            tol_f: None,
            execution: Execution::default(),
        }
    }
}

impl AuditOptions {
    pub fn tol_for(&self, h: f64) -> f64 {
        self.tol_f.unwrap_or(10.0 * h * (1.0 + self.dictionary.k_max))
    }
}

/// A touching dictionary member whose operator value breaks the inequality
/// of its side.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub node: (usize, usize),
    pub point: [f64; 2],
    /// `Below` tests the supersolution inequality `F <= tol`, `Above` the
    /// subsolution inequality `F >= -tol`.
    pub side: Touch,
    pub eigenvalues: [f64; 2],
    pub rotation: usize,
    pub f_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub tol_f: f64,
    pub nodes_checked: usize,
    pub hessians_per_node: usize,
    pub touches_below: u64,
    pub touches_above: u64,
    /// Violations in node-major order (rows, then columns, then dictionary order).
    pub violations: Vec<AuditRow>,
}

impl AuditReport {
    pub fn supersolution_violations(&self) -> usize {
        self.violations.iter().filter(|r| r.side == Touch::Below).count()
    }

    pub fn subsolution_violations(&self) -> usize {
        self.violations.iter().filter(|r| r.side == Touch::Above).count()
    }

    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Central-difference gradient at an interior node.
fn discrete_gradient(u: &GridFunction, i: usize, j: usize) -> DVector<f64> {
    let g = &u.grid;
    DVector::from_vec(vec![
        (u.at(i + 1, j) - u.at(i - 1, j)) / (g.x(i + 1) - g.x(i - 1)),
        (u.at(i, j + 1) - u.at(i, j - 1)) / (g.y(j + 1) - g.y(j - 1)),
    ])
}

/// Tests every dictionary quadratic at every node whose neighbourhood fits in
/// the grid, with the gradient pinned to the discrete gradient of `u`.
pub fn viscosity_audit(u: &GridFunction, op: &EllipticOperator, opts: &AuditOptions) -> Result<AuditReport> {
    if op.dim != 2 {
        return Err(Error::invalid("grid audit needs an operator over the plane"));
    }
    let g = u.grid;
    let h = g.hx().max(g.hy());
    let radius = opts.radius_cells * h;
    if opts.radius_cells < 2.0 {
        return Err(Error::invalid("audit neighbourhood must cover at least 2 cells"));
    }
    let offsets = neighbourhood(u, radius);
    let reach_i = offsets.iter().map(|o| o.0.unsigned_abs()).max().unwrap_or(1).max(1);
    let reach_j = offsets.iter().map(|o| o.1.unsigned_abs()).max().unwrap_or(1).max(1);
    if 2 * reach_i.max(reach_j) + 1 > g.m {
        return Err(Error::invalid("grid too small for the audit neighbourhood"));
    }
    let dict = opts.dictionary.entries();
    let tol_f = opts.tol_for(h);
    let nodes: Vec<(usize, usize)> = (reach_j..g.m - reach_j)
        .flat_map(|j| (reach_i..g.m - reach_i).map(move |i| (i, j)))
        .collect();

    let per_node = map_ordered(opts.execution, nodes.len(), |k| {
        let (i, j) = nodes[k];
        let eta = discrete_gradient(u, i, j);
        let x = [g.x(i), g.y(j)];
        let u0 = u.at(i, j);
        let (mut below, mut above) = (0u64, 0u64);
        let mut rows = Vec::new();
        for e in &dict {
            let side = touch_on(u, (i, j), &offsets, &eta, &e.hessian);
            let f = match side {
                Touch::None => continue,
                _ => op.eval(&x, u0, &eta, &e.hessian),
            };
            let bad = match side {
                Touch::Below => {
                    below += 1;
                    f > tol_f
                }
                Touch::Above => {
                    above += 1;
                    f < -tol_f
                }
                Touch::None => false,
            };
            if bad {
                rows.push(AuditRow {
                    node: (i, j),
                    point: x,
                    side,
                    eigenvalues: e.eigenvalues,
                    rotation: e.rotation,
                    f_value: f,
                });
            }
        }
        (below, above, rows)
    });

    let mut report = AuditReport {
        tol_f,
        nodes_checked: nodes.len(),
        hessians_per_node: dict.len(),
        touches_below: 0,
        touches_above: 0,
        violations: Vec::new(),
    };
    for (b, a, rows) in per_node {
        report.touches_below += b;
        report.touches_above += a;
        report.violations.extend(rows);
    }
    Ok(report)
}

/// Per-radius outcome of the comparison between `f_P` and `f_S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRadius {
    pub r: f64,
    /// Ball means of `f_P - f_P(x)` and `f_S - f_S(x)` (both jump functions
    /// take the value 0 at the common point for `alpha = +-1`).
    pub mean_p: f64,
    pub mean_s: f64,
    pub stderr: f64,
    /// Samples where `f_P < f_S`; zero whenever `P <= phi` holds.
    pub pointwise_violations: u64,
    pub samples: u64,
    pub holds: bool,
}

/// Checks `mean f_P >= mean f_S` on shared samples for a quadratic `P`
/// touching `S` from below at `(x', phi(x'))`, with `alpha = +-1`.
///
/// Each sample is classified against both graphs; `P <= phi` at every sampled
/// chart point is verified first (`NotTangentBelow` otherwise), which makes
/// `f_P >= f_S` hold sample by sample and the integer-count means exact.
pub fn comparison_inequality_check(
    surface: &GraphSurface,
    p: &Paraboloid,
    x_chart: &[f64],
    schedule: &RadiusSchedule,
    cfg: &SamplerConfig,
) -> Result<Vec<ComparisonRadius>> {
    schedule.validate()?;
    let n = surface.ambient_dim();
    if p.dim() != n - 1 {
        return Err(Error::invalid("paraboloid dimension does not match the surface chart"));
    }
    let x = surface.point_on(x_chart)?;
    let psurf = p.to_surface(surface.domain().clone()).with_orientation(surface.orientation());
    let gap = p.eval(x_chart) - x[n - 1];
    if gap.abs() > 1e-12 * (1.0 + x[n - 1].abs()) {
        return Err(Error::NotTangentBelow {
            point: x.clone(),
            excess: gap,
        });
    }
    check_on_surface(surface, &x)?;
    let radii = schedule.radii();
    let tol = 1e-12;

    #[derive(Default)]
    struct Acc {
        s: SideTally,
        p: SideTally,
        violations: u64,
        excess: Option<(Vec<f64>, f64)>,
    }

    let per_radius = try_map_ordered(cfg.execution, radii.len(), |jr| {
        let r = radii[jr];
        if !surface.domain().contains_with_margin(x_chart, r) {
            return Err(Error::ChartTooSmall {
                center: x.clone(),
                radius: r,
            });
        }
        let sub = cfg.with_seed(mix(cfg.seed, jr as u64));
        let classify = |acc: &mut Acc, y: &[f64]| -> (Side, Side) {
            let yp = &y[..n - 1];
            let excess = psurf.height_unchecked(yp) - surface.height_unchecked(yp);
            if excess > tol * (1.0 + y[n - 1].abs()) && acc.excess.is_none() {
                acc.excess = Some((yp.to_vec(), excess));
            }
            let (ss, sp) = (surface.side_of_unchecked(y), psurf.side_of_unchecked(y));
            let (fs, fp) = (side_value(ss), side_value(sp));
            if fp < fs {
                acc.violations += 1;
            }
            (ss, sp)
        };
        let chunks = run_chunks(n, &x, r, &sub, Acc::default, |acc, d| {
            match d {
                Draw::Single(y) | Draw::Node { y, .. } => {
                    let (ss, sp) = classify(acc, y);
                    acc.s.record_single(ss);
                    acc.p.record_single(sp);
                }
                Draw::Pair(y, z) => {
                    let (s1, p1) = classify(acc, y);
                    let (s2, p2) = classify(acc, z);
                    acc.s.record_pair(s1, s2);
                    acc.p.record_pair(p1, p2);
                }
            }
            Ok(())
        })?;
        let mut total = Acc::default();
        for c in chunks {
            total.s.merge(&c.s);
            total.p.merge(&c.p);
            total.violations += c.violations;
            if total.excess.is_none() {
                total.excess = c.excess;
            }
        }
        if let Some((point, excess)) = total.excess {
            return Err(Error::NotTangentBelow { point, excess });
        }
        let samples = total.s.samples();
        let mean = |t: &SideTally| (t.above as i64 - t.below as i64) as f64 / samples as f64;
        let (mean_p, mean_s) = (mean(&total.p), mean(&total.s));
        let stderr = total.s.stderr(1.0).hypot(total.p.stderr(1.0));
        Ok(ComparisonRadius {
            r,
            mean_p,
            mean_s,
            stderr,
            pointwise_violations: total.violations,
            samples,
            holds: mean_p >= mean_s - 3.0 * stderr,
        })
    })?;
    Ok(per_radius)
}

fn side_value(s: Side) -> i8 {
    match s {
        Side::Above => 1,
        Side::Below => -1,
        Side::On => 0,
    }
}
