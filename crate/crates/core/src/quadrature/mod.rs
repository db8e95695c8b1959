//! Ball sampling, two-sided volume splits and ball averages.
//!
//! Three point sets are available: independent Monte Carlo draws, a randomly
//! shifted Halton sequence pushed through a cube-to-ball map, and a tensor
//! lattice of cell centres clipped to the ball. Monte Carlo and Halton draws
//! can be antithetic (each point paired with its reflection through the
//! centre), which integrates odd functions to exactly zero.
//!
//! Jump-function integrands never touch floating-point sums: samples are
//! tallied by side and the mean is assembled from integer counts, so
//! reflection symmetries and sign swaps hold bit-for-bit.

mod engine;
pub(crate) mod halton;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub(crate) use engine::{run_chunks, Draw};

use crate::exec::Execution;
use crate::geometry::{GraphSurface, JumpFunction, ScalarField, Side};
use crate::stats::Moments;
use crate::{Error, Result};

/// Point-set family used for ball integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    MonteCarlo,
    LowDiscrepancy,
    TensorGrid,
}

impl Method {
    pub const fn as_str(self) -> &'static str {
        match self {
            Method::MonteCarlo => "monte_carlo",
            Method::LowDiscrepancy => "low_discrepancy",
            Method::TensorGrid => "tensor_grid",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monte_carlo" => Ok(Method::MonteCarlo),
            "low_discrepancy" => Ok(Method::LowDiscrepancy),
            "tensor_grid" => Ok(Method::TensorGrid),
            other => Err(Error::invalid(format!("unknown sampling method `{other}`"))),
        }
    }
}

pub const MIN_SAMPLES: usize = 1000;

/// Sampling budget and stream identity. Identical configs give
/// bit-identical results regardless of `execution`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub method: Method,
    /// Number of evaluation points (lattice nodes for the tensor grid,
    /// before clipping to the ball).
    pub samples: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub execution: Execution,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            method: Method::MonteCarlo,
            samples: 1_000_000,
            seed: 0,
            antithetic: true,
            execution: Execution::default(),
        }
    }
}

impl SamplerConfig {
    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        SamplerConfig {
            samples,
            seed,
            ..Default::default()
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SamplerConfig { seed, ..self }
    }

    pub fn with_method(self, method: Method) -> Self {
        SamplerConfig { method, ..self }
    }

    pub fn with_antithetic(self, antithetic: bool) -> Self {
        SamplerConfig { antithetic, ..self }
    }

    pub fn with_execution(self, execution: Execution) -> Self {
        SamplerConfig { execution, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::invalid(format!(
                "sampler needs at least {MIN_SAMPLES} samples, got {}",
                self.samples
            )));
        }
        Ok(())
    }
}

/// Volume of the unit ball in `R^n`, `pi^{n/2} / Gamma(n/2 + 1)`, via the
/// recursion `omega_n = 2 pi / n * omega_{n-2}`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

pub fn ball_volume(n: usize, r: f64) -> f64 {
    unit_ball_volume(n) * r.powi(n as i32)
}

/// Materialised sample points, `dim` coordinates each.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSamples {
    pub dim: usize,
    pub coords: Vec<f64>,
}

impl BallSamples {
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }
}

/// The point set a config produces in `B_r(center)`. Antithetic pairs appear
/// consecutively.
pub fn sample_ball(n: usize, center: &[f64], r: f64, cfg: &SamplerConfig) -> Result<BallSamples> {
    let chunks = run_chunks(n, center, r, cfg, Vec::new, |acc: &mut Vec<f64>, d| {
        match d {
            Draw::Single(y) | Draw::Node { y, .. } => acc.extend_from_slice(y),
            Draw::Pair(y, z) => {
                acc.extend_from_slice(y);
                acc.extend_from_slice(z);
            }
        }
        Ok(())
    })?;
    Ok(BallSamples {
        dim: n,
        coords: chunks.concat(),
    })
}

/// Mean of an integrand over a ball, possibly relative to a reference value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMean {
    pub mean: f64,
    pub stderr: f64,
    /// Evaluation points used.
    pub samples: u64,
}

/// Something that can be averaged over a ball.
#[derive(Clone)]
pub enum Integrand {
    Smooth {
        dim: usize,
        f: ScalarField,
    },
    Jump(JumpFunction),
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Integrand::Smooth { dim, .. } => write!(f, "Smooth {{ dim: {dim} }}"),
            Integrand::Jump(j) => f.debug_tuple("Jump").field(j).finish(),
        }
    }
}

impl Integrand {
    pub fn smooth<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Integrand::Smooth { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        match self {
            Integrand::Smooth { dim, .. } => *dim,
            Integrand::Jump(j) => j.ambient_dim(),
        }
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        match self {
            Integrand::Smooth { f, .. } => Ok(f(y)),
            Integrand::Jump(j) => j.eval(y),
        }
    }
}

/// Side tallies for a jump integrand.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct SideTally {
    pub above: u64,
    pub below: u64,
    pub on: u64,
    /// Histogram of per-draw sign sums `e(y) + e(y')` (pairs, index k+2) or
    /// `e(y)` (singles, index e+2), with `e` = +1 above, -1 below, 0 on.
    pub hist: [u64; 5],
    pub draws: u64,
    pub paired: bool,
    pub grid: bool,
    /// Lattice cells cut by the sphere or the surface.
    pub boundary: u64,
}

#[inline]
fn sign_of(side: Side) -> i64 {
    match side {
        Side::Above => 1,
        Side::Below => -1,
        Side::On => 0,
    }
}

impl SideTally {
    #[inline]
    fn count(&mut self, side: Side) {
        match side {
            Side::Above => self.above += 1,
            Side::Below => self.below += 1,
            Side::On => self.on += 1,
        }
    }

    #[inline]
    pub fn record_single(&mut self, side: Side) {
        self.count(side);
        self.hist[(sign_of(side) + 2) as usize] += 1;
        self.draws += 1;
    }

    #[inline]
    pub fn record_pair(&mut self, a: Side, b: Side) {
        self.count(a);
        self.count(b);
        self.hist[(sign_of(a) + sign_of(b) + 2) as usize] += 1;
        self.draws += 1;
        self.paired = true;
    }

    #[inline]
    pub fn record_node(&mut self, side: Side, boundary: bool) {
        self.record_single(side);
        self.grid = true;
        self.boundary += boundary as u64;
    }

    pub fn merge(&mut self, o: &SideTally) {
        self.above += o.above;
        self.below += o.below;
        self.on += o.on;
        for (a, b) in self.hist.iter_mut().zip(&o.hist) {
            *a += b;
        }
        self.draws += o.draws;
        self.paired |= o.paired;
        self.grid |= o.grid;
        self.boundary += o.boundary;
    }

    pub fn samples(&self) -> u64 {
        self.above + self.below + self.on
    }

    /// Mean of the jump function minus `reference`. When `reference` is the
    /// on-surface value the result is `delta * (above - below) / N` exactly.
    pub fn mean_relative(&self, jump: &JumpFunction, reference: f64) -> f64 {
        let mid = jump.on_surface_value();
        let delta = 0.5 * (jump.alpha_plus - jump.alpha_minus);
        let net = self.above as i64 - self.below as i64;
        (mid - reference) + delta * net as f64 / self.samples() as f64
    }

    /// Standard error of the mean for a jump of half-height `|delta|`.
    pub fn stderr(&self, delta: f64) -> f64 {
        let delta = delta.abs();
        if self.grid {
            return delta * self.boundary as f64 / self.samples().max(1) as f64;
        }
        let n = self.draws;
        if n < 2 {
            return 0.0;
        }
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for (i, c) in self.hist.iter().enumerate() {
            let k = i as f64 - 2.0;
            s1 += *c as f64 * k;
            s2 += *c as f64 * k * k;
        }
        let nf = n as f64;
        let var = ((s2 - s1 * s1 / nf) / (nf - 1.0)).max(0.0);
        let scale = if self.paired { 0.5 * delta } else { delta };
        scale * (var / nf).sqrt()
    }
}

/// Tally of a smooth integrand relative to a reference value.
#[derive(Debug, Clone, Copy, Default)]
struct ValueTally {
    moments: Moments,
    nodes: u64,
    boundary: u64,
    max_abs: f64,
    grid: bool,
}

fn check_chart(surface: &GraphSurface, center: &[f64], r: f64) -> Result<()> {
    let n = surface.ambient_dim();
    if center.len() != n {
        return Err(Error::invalid(format!("centre has dimension {}, expected {n}", center.len())));
    }
    if !surface.domain().contains_with_margin(&center[..n - 1], r) {
        return Err(Error::ChartTooSmall {
            center: center.to_vec(),
            radius: r,
        });
    }
    Ok(())
}

/// Whether a lattice cell centred at `y` may be cut by the surface: the
/// vertical offset is compared with the half diagonal inflated by the local
/// slope across the cell.
fn cell_cut_by_surface(surface: &GraphSurface, y: &[f64], half_diag: f64) -> bool {
    let n = y.len();
    let mut yp = y[..n - 1].to_vec();
    let h0 = surface.height_unchecked(&yp);
    let half_cell = half_diag / (n as f64).sqrt();
    let mut slope2 = 0.0;
    for i in 0..n - 1 {
        let c = yp[i];
        yp[i] = c + half_cell;
        let hp = surface.height_unchecked(&yp);
        yp[i] = c - half_cell;
        let hm = surface.height_unchecked(&yp);
        yp[i] = c;
        let s = (hp - hm) / (2.0 * half_cell);
        slope2 += s * s;
    }
    (y[n - 1] - h0).abs() <= half_diag * (1.0 + slope2).sqrt()
}

pub(crate) fn tally_sides(
    surface: &GraphSurface,
    center: &[f64],
    r: f64,
    cfg: &SamplerConfig,
) -> Result<SideTally> {
    check_chart(surface, center, r)?;
    let n = surface.ambient_dim();
    let chunks = run_chunks(n, center, r, cfg, SideTally::default, |t, d| {
        match d {
            Draw::Single(y) => t.record_single(surface.side_of_unchecked(y)),
            Draw::Pair(y, z) => {
                t.record_pair(surface.side_of_unchecked(y), surface.side_of_unchecked(z))
            }
            Draw::Node {
                y,
                cut_by_sphere,
                half_diag,
            } => {
                let boundary = cut_by_sphere || cell_cut_by_surface(surface, y, half_diag);
                t.record_node(surface.side_of_unchecked(y), boundary)
            }
        }
        Ok(())
    })?;
    let mut total = SideTally::default();
    chunks.iter().for_each(|c| total.merge(c));
    Ok(total)
}

/// `vol(S+_r)`, `vol(S-_r)` inside `B_r(center)` for a centre on the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeSplit {
    pub vol_plus: f64,
    pub vol_minus: f64,
    /// `vol_plus - vol_minus`.
    pub diff: f64,
    /// Standard error of `diff` (a deterministic bound for the lattice).
    pub stderr: f64,
    pub r: f64,
    pub center: Vec<f64>,
    /// Samples that landed exactly on the surface (counted half to each side).
    pub on_count: u64,
    pub samples: u64,
}

/// Largest tolerated `|x_n - phi(x')|` for a point declared on the surface.
const ON_SURFACE_TOL: f64 = 1e-12;

pub(crate) fn check_on_surface(surface: &GraphSurface, x: &[f64]) -> Result<()> {
    let n = surface.ambient_dim();
    if x.len() != n {
        return Err(Error::invalid(format!("point has dimension {}, expected {n}", x.len())));
    }
    let h = surface.height(&x[..n - 1])?;
    let offset = x[n - 1] - h;
    if offset.abs() > ON_SURFACE_TOL * (1.0 + h.abs()) {
        return Err(Error::NotOnSurface {
            point: x.to_vec(),
            offset,
        });
    }
    Ok(())
}

pub fn volume_split(
    surface: &GraphSurface,
    x: &[f64],
    r: f64,
    cfg: &SamplerConfig,
) -> Result<VolumeSplit> {
    check_on_surface(surface, x)?;
    let tally = tally_sides(surface, x, r, cfg)?;
    let vol = ball_volume(surface.ambient_dim(), r);
    let n = tally.samples() as f64;
    let half_on = 0.5 * tally.on as f64;
    let net = tally.above as i64 - tally.below as i64;
    Ok(VolumeSplit {
        vol_plus: vol * ((tally.above as f64 + half_on) / n),
        vol_minus: vol * ((tally.below as f64 + half_on) / n),
        diff: vol * (net as f64 / n),
        stderr: vol * tally.stderr(1.0),
        r,
        center: x.to_vec(),
        on_count: tally.on,
        samples: tally.samples(),
    })
}

/// Mean of `f` over `B_r(x)`.
pub fn ball_average(f: &Integrand, x: &[f64], r: f64, cfg: &SamplerConfig) -> Result<BallMean> {
    ball_average_relative(f, x, r, cfg, 0.0)
}

/// Mean of `f - reference` over `B_r(x)`. Subtracting before summation keeps
/// the plug-in Laplacian estimator accurate at small radii.
pub fn ball_average_relative(
    f: &Integrand,
    x: &[f64],
    r: f64,
    cfg: &SamplerConfig,
    reference: f64,
) -> Result<BallMean> {
    if x.len() != f.dim() {
        return Err(Error::invalid(format!("point has dimension {}, expected {}", x.len(), f.dim())));
    }
    match f {
        Integrand::Jump(jump) => {
            let t = tally_sides(&jump.surface, x, r, cfg)?;
            let delta = 0.5 * (jump.alpha_plus - jump.alpha_minus);
            Ok(BallMean {
                mean: t.mean_relative(jump, reference),
                stderr: t.stderr(delta),
                samples: t.samples(),
            })
        }
        Integrand::Smooth { dim, f } => {
            let chunks = run_chunks(*dim, x, r, cfg, ValueTally::default, |t, d| {
                match d {
                    Draw::Single(y) => {
                        let v = f(y) - reference;
                        t.moments.push(v);
                        t.max_abs = t.max_abs.max(v.abs());
                        t.nodes += 1;
                    }
                    Draw::Pair(y, z) => {
                        let (a, b) = (f(y) - reference, f(z) - reference);
                        t.moments.push(0.5 * (a + b));
                        t.max_abs = t.max_abs.max(a.abs()).max(b.abs());
                        t.nodes += 2;
                    }
                    Draw::Node { y, cut_by_sphere, .. } => {
                        let v = f(y) - reference;
                        t.moments.push(v);
                        t.max_abs = t.max_abs.max(v.abs());
                        t.nodes += 1;
                        t.grid = true;
                        t.boundary += cut_by_sphere as u64;
                    }
                }
                Ok(())
            })?;
            let mut total = ValueTally::default();
            for c in &chunks {
                total.moments.merge(&c.moments);
                total.nodes += c.nodes;
                total.boundary += c.boundary;
                total.max_abs = total.max_abs.max(c.max_abs);
                total.grid |= c.grid;
            }
            let stderr = if total.grid {
                total.max_abs * total.boundary as f64 / total.nodes.max(1) as f64
            } else {
                total.moments.stderr()
            };
            Ok(BallMean {
                mean: total.moments.mean,
                stderr,
                samples: total.nodes,
            })
        }
    }
}
