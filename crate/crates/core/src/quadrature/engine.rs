//! Chunked ball-sampling engine.
//!
//! Work is cut into chunks of [`CHUNK`] draws. Chunk `k` of a Monte Carlo
//! run draws from its own ChaCha stream `k`; Halton and lattice chunks cover
//! fixed index ranges. Each chunk folds into its own accumulator and the
//! accumulators come back in chunk order, so the reduction is independent of
//! how chunks were scheduled.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{halton, Method, SamplerConfig};
use crate::exec::try_map_ordered;
use crate::rng::{aux_rng, chunk_rng};
use crate::{Error, Result};

pub(crate) const CHUNK: u64 = 8192;

/// One unit of sampling work handed to a visitor.
pub(crate) enum Draw<'a> {
    Single(&'a [f64]),
    /// A point and its reflection through the ball centre.
    Pair(&'a [f64], &'a [f64]),
    /// A lattice cell centre. `cut_by_sphere` marks cells that straddle the
    /// ball boundary; `half_diag` is half the cell diagonal.
    Node {
        y: &'a [f64],
        cut_by_sphere: bool,
        half_diag: f64,
    },
}

/// Number of draws for a config: pairs when antithetic.
pub(crate) fn draw_count(n: usize, cfg: &SamplerConfig) -> Result<u64> {
    match cfg.method {
        Method::MonteCarlo | Method::LowDiscrepancy => Ok(if cfg.antithetic {
            (cfg.samples as u64).div_ceil(2)
        } else {
            cfg.samples as u64
        }),
        Method::TensorGrid => {
            let per_axis = lattice_per_axis(n, cfg.samples);
            (per_axis as u64)
                .checked_pow(n as u32)
                .ok_or_else(|| Error::invalid("tensor lattice too large"))
        }
    }
}

pub(crate) fn lattice_per_axis(n: usize, samples: usize) -> usize {
    ((samples as f64).powf(1.0 / n as f64).round() as usize).max(2)
}

pub(crate) fn run_chunks<A, I, V>(
    n: usize,
    center: &[f64],
    r: f64,
    cfg: &SamplerConfig,
    init: I,
    visit: V,
) -> Result<Vec<A>>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    V: Fn(&mut A, Draw<'_>) -> Result<()> + Sync + Send,
{
    cfg.validate()?;
    if center.len() != n {
        return Err(Error::invalid(format!("centre has dimension {}, expected {n}", center.len())));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("radius must be positive, got {r}")));
    }
    let total = draw_count(n, cfg)?;
    let chunks = total.div_ceil(CHUNK) as usize;

    match cfg.method {
        Method::MonteCarlo => try_map_ordered(cfg.execution, chunks, |k| {
            let mut rng = chunk_rng(cfg.seed, k as u64);
            let mut acc = init();
            let mut o = vec![0.0; n];
            let mut y = vec![0.0; n];
            let mut z = vec![0.0; n];
            for _ in chunk_range(k, total) {
                unit_ball_mc(&mut rng, &mut o);
                emit(center, r, &o, cfg.antithetic, &mut y, &mut z, &mut acc, &visit)?;
            }
            Ok(acc)
        }),
        Method::LowDiscrepancy => {
            if n + 1 > halton::MAX_DIM {
                return Err(Error::invalid(format!("low-discrepancy sampling supports n <= {}", halton::MAX_DIM - 1)));
            }
            let mut aux = aux_rng(cfg.seed);
            let shift: Vec<f64> = (0..=n).map(|_| aux.random::<f64>()).collect();
            let normal = Normal::new(0.0, 1.0).expect("standard normal");
            try_map_ordered(cfg.execution, chunks, |k| {
                let mut acc = init();
                let mut h = vec![0.0; n + 1];
                let mut o = vec![0.0; n];
                let mut y = vec![0.0; n];
                let mut z = vec![0.0; n];
                for i in chunk_range(k, total) {
                    halton::point(i, &shift, &mut h);
                    unit_ball_from_cube(&h, &normal, &mut o);
                    emit(center, r, &o, cfg.antithetic, &mut y, &mut z, &mut acc, &visit)?;
                }
                Ok(acc)
            })
        }
        Method::TensorGrid => {
            let per_axis = lattice_per_axis(n, cfg.samples);
            let cell = 2.0 * r / per_axis as f64;
            let half_diag = 0.5 * cell * (n as f64).sqrt();
            try_map_ordered(cfg.execution, chunks, |k| {
                let mut acc = init();
                let mut y = vec![0.0; n];
                for idx in chunk_range(k, total) {
                    let mut rest = idx;
                    let mut norm2 = 0.0;
                    for (c, yi) in center.iter().zip(y.iter_mut()) {
                        let j = (rest % per_axis as u64) as f64;
                        rest /= per_axis as u64;
                        let o = -r + (j + 0.5) * cell;
                        norm2 += o * o;
                        *yi = c + o;
                    }
                    if norm2 <= r * r {
                        let dist = norm2.sqrt();
                        let cut = (dist - r).abs() <= half_diag;
                        visit(
                            &mut acc,
                            Draw::Node {
                                y: &y,
                                cut_by_sphere: cut,
                                half_diag,
                            },
                        )?;
                    }
                }
                Ok(acc)
            })
        }
    }
}

fn chunk_range(k: usize, total: u64) -> std::ops::Range<u64> {
    let start = k as u64 * CHUNK;
    start..(start + CHUNK).min(total)
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn emit<A, V>(
    center: &[f64],
    r: f64,
    o: &[f64],
    antithetic: bool,
    y: &mut [f64],
    z: &mut [f64],
    acc: &mut A,
    visit: &V,
) -> Result<()>
where
    V: Fn(&mut A, Draw<'_>) -> Result<()>,
{
    for i in 0..o.len() {
        let d = r * o[i];
        y[i] = center[i] + d;
        z[i] = center[i] - d;
    }
    if antithetic {
        visit(acc, Draw::Pair(y, z))
    } else {
        visit(acc, Draw::Single(y))
    }
}

/// Uniform point in the unit ball: Gaussian direction, radius `U^{1/n}`.
#[inline]
fn unit_ball_mc<R: Rng>(rng: &mut R, out: &mut [f64]) {
    let n = out.len();
    loop {
        let mut norm2 = 0.0;
        for o in out.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *o = g;
            norm2 += g * g;
        }
        if norm2 > 0.0 {
            let u: f64 = rng.random();
            let scale = u.powf(1.0 / n as f64) / norm2.sqrt();
            out.iter_mut().for_each(|o| *o *= scale);
            return;
        }
    }
}

/// Maps a point of `[0,1)^{n+1}` into the unit ball: the first coordinate
/// sets the radius, the rest go through the inverse normal CDF to a direction.
fn unit_ball_from_cube(h: &[f64], normal: &Normal, out: &mut [f64]) {
    let n = out.len();
    let mut norm2 = 0.0;
    for (o, u) in out.iter_mut().zip(&h[1..]) {
        let p = u.clamp(1e-300, 1.0 - 1e-16);
        let g = normal.inverse_cdf(p);
        *o = g;
        norm2 += g * g;
    }
    if norm2 == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        out[0] = 1.0;
        norm2 = 1.0;
    }
    let scale = h[0].powf(1.0 / n as f64) / norm2.sqrt();
    out.iter_mut().for_each(|o| *o *= scale);
}
