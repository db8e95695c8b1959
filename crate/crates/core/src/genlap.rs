//! Finite-radius generalized Laplacian and the harmonicity verdict.
//!
//! At radius `r` the estimator is
//!
//! ```text
//! v(r) = 2(n+2)/r^2 * (mean of f over B_r(x) - f(x)),
//! ```
//!
//! which equals `Delta f(x)` exactly for quadratics and tends to it for `C^2`
//! functions. For a jump function across a surface with mean curvature `H`
//! the volume asymmetry makes `v(r)` blow up like `-(2(n+2) c_n / omega_n) H / r`,
//! so the verdict rests on the radius dependence over a schedule.

use crate::asymptotics::c_n_constant;
use crate::exec::try_map_ordered;
use crate::geometry::{GraphSurface, JumpFunction};
use crate::quadrature::{ball_average_relative, unit_ball_volume, Integrand, SamplerConfig};
use crate::rng::mix;
use crate::stats::{weighted_line_fit, weighted_mean};
use crate::{Error, Result};

/// Geometric radius schedule `r_j = r0 * ratio^j`, `j = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusSchedule {
    pub r0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl RadiusSchedule {
    pub const DEFAULT_RATIO: f64 = 0.6;
    pub const DEFAULT_COUNT: usize = 6;
    /// Largest radius as a fraction of the distance to the chart boundary.
    pub const DEFAULT_CHART_FRACTION: f64 = 0.2;

    pub fn new(r0: f64, ratio: f64, count: usize) -> Result<Self> {
        let s = RadiusSchedule { r0, ratio, count };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(Error::invalid(format!("schedule r0 must be positive, got {}", self.r0)));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::invalid(format!("schedule ratio must lie in (0,1), got {}", self.ratio)));
        }
        if self.count < 4 {
            return Err(Error::invalid(format!("schedule needs at least 4 radii, got {}", self.count)));
        }
        Ok(())
    }

    /// Default schedule at `x'`: `r0` is a fixed fraction of the distance to
    /// the chart boundary.
    pub fn default_for(surface: &GraphSurface, x: &[f64]) -> Result<Self> {
        let chart = surface.domain().distance_to_boundary(x);
        if !(chart > 0.0) {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        Self::new(
            Self::DEFAULT_CHART_FRACTION * chart,
            Self::DEFAULT_RATIO,
            Self::DEFAULT_COUNT,
        )
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.r0 * self.ratio.powi(j as i32)).collect()
    }

    pub fn r_min(&self) -> f64 {
        self.r0 * self.ratio.powi(self.count as i32 - 1)
    }
}

/// One radius worth of estimator output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenLapValue {
    pub value: f64,
    pub stderr: f64,
}

/// `2(n+2)/r^2 * (ball mean of f - f(x))`.
pub fn gen_laplacian_at(f: &Integrand, x: &[f64], r: f64, cfg: &SamplerConfig) -> Result<GenLapValue> {
    let n = f.dim();
    let fx = f.eval(x)?;
    let m = ball_average_relative(f, x, r, cfg, fx)?;
    let scale = 2.0 * (n as f64 + 2.0) / (r * r);
    Ok(GenLapValue {
        value: scale * m.mean,
        stderr: scale * m.stderr,
    })
}

/// Thresholds of the converge/diverge decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictThresholds {
    /// A successive difference counts as signal beyond this many standard errors.
    pub difference_sigma: f64,
    /// Divergence needs a fitted exponent below this.
    pub diverge_exponent: f64,
    /// Divergence needs `|a r_min^p|` above this many standard errors at `r_min`.
    pub diverge_sigma: f64,
    /// Convergence needs `|v_j - b|` within this many standard errors at the
    /// two smallest radii; harmonicity needs `|b|` within this many errors of 0.
    pub converge_sigma: f64,
}

impl Default for VerdictThresholds {
    fn default() -> Self {
        VerdictThresholds {
            difference_sigma: 3.0,
            diverge_exponent: -0.3,
            diverge_sigma: 5.0,
            converge_sigma: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

impl Verdict {
    pub const fn as_str(self) -> &'static str {
        match self {
            Verdict::Converges => "converges",
            Verdict::Diverges => "diverges",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Per-radius estimates with the fitted model `v(r) = a r^p + b`.
///
/// When no power law stands out of the noise the model is the constant `b`,
/// recorded as `a = 0`, `p = +inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenLapEstimate {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub a: f64,
    pub p: f64,
    /// Standard error of `p` from the log-difference regression (0 when
    /// `p` is not fitted).
    pub p_stderr: f64,
    pub b: f64,
    pub b_stderr: f64,
    pub verdict: Verdict,
    pub thresholds: VerdictThresholds,
}

impl GenLapEstimate {
    pub fn has_power_law(&self) -> bool {
        self.p.is_finite()
    }
}

/// Evaluates every radius of the schedule (sub-seed `mix(seed, j)` for
/// radius `j`) and fits the model.
pub fn gen_laplacian_limit(
    f: &Integrand,
    x: &[f64],
    schedule: &RadiusSchedule,
    cfg: &SamplerConfig,
) -> Result<GenLapEstimate> {
    gen_laplacian_limit_with(f, x, schedule, cfg, VerdictThresholds::default())
}

pub fn gen_laplacian_limit_with(
    f: &Integrand,
    x: &[f64],
    schedule: &RadiusSchedule,
    cfg: &SamplerConfig,
    thresholds: VerdictThresholds,
) -> Result<GenLapEstimate> {
    schedule.validate()?;
    let radii = schedule.radii();
    let per_radius = try_map_ordered(cfg.execution, radii.len(), |j| {
        let sub = cfg.with_seed(mix(cfg.seed, j as u64));
        gen_laplacian_at(f, x, radii[j], &sub)
    })?;
    let values: Vec<f64> = per_radius.iter().map(|v| v.value).collect();
    let stderrs: Vec<f64> = per_radius.iter().map(|v| v.stderr).collect();
    Ok(fit_schedule(radii, values, stderrs, schedule.ratio, thresholds))
}

/// Exact zeros (antithetic symmetric cases) still need a floor when
/// comparing against zero standard errors.
fn floor(values: &[f64]) -> f64 {
    1e-12 * values.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Power-law fit from successive differences and the verdict.
pub fn fit_schedule(
    radii: Vec<f64>,
    values: Vec<f64>,
    stderrs: Vec<f64>,
    ratio: f64,
    thresholds: VerdictThresholds,
) -> GenLapEstimate {
    let k = radii.len();
    let eps = floor(&values);

    let mut lx = Vec::new();
    let mut ly = Vec::new();
    let mut w = Vec::new();
    let mut signs = 0i32;
    for j in 0..k - 1 {
        let d = values[j] - values[j + 1];
        let sd = stderrs[j].hypot(stderrs[j + 1]);
        if d.abs() > thresholds.difference_sigma * sd + eps {
            lx.push(radii[j].ln());
            ly.push(d.abs().ln());
            w.push(if sd > 0.0 { (d / sd).powi(2).min(1e12) } else { 1e12 });
            signs += d.signum() as i32;
        }
    }
    // A power law needs at least two significant differences of one sign.
    let coherent = lx.len() >= 2 && signs.unsigned_abs() as usize == lx.len();
    let (a, p, p_stderr) = match coherent.then(|| weighted_line_fit(&lx, &ly, &w)).flatten() {
        Some(fit) if (1.0 - ratio.powf(fit.slope)).abs() > 1e-9 => {
            let p = fit.slope;
            let a = signs.signum() as f64 * fit.intercept.exp() / (1.0 - ratio.powf(p));
            (a, p, fit.slope_stderr)
        }
        _ => (0.0, f64::INFINITY, 0.0),
    };

    let model = |r: f64| if a == 0.0 { 0.0 } else { a * r.powf(p) };
    let offsets: Vec<f64> = radii.iter().zip(&values).map(|(r, v)| v - model(*r)).collect();
    let (b, b_stderr) = weighted_mean(&offsets, &stderrs);

    let last = k - 1;
    let diverges = p < thresholds.diverge_exponent
        && model(radii[last]).abs() > thresholds.diverge_sigma * stderrs[last] + eps;
    let converges = p > 0.0
        && (last - 1..=last)
            .all(|j| (values[j] - b).abs() <= thresholds.converge_sigma * stderrs[j] + eps);
    let verdict = if diverges {
        Verdict::Diverges
    } else if converges {
        Verdict::Converges
    } else {
        Verdict::Inconclusive
    };

    GenLapEstimate {
        radii,
        values,
        stderrs,
        a,
        p,
        p_stderr,
        b,
        b_stderr,
        verdict,
        thresholds,
    }
}

/// Point-level harmonicity of a jump function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Harmonicity {
    GeneralizedHarmonic,
    /// `sign` is that of the divergent (or non-zero limiting) estimator.
    NotHarmonic { sign: f64 },
    Inconclusive,
}

impl Harmonicity {
    pub const fn as_str(&self) -> &'static str {
        match self {
            Harmonicity::GeneralizedHarmonic => "generalized_harmonic",
            Harmonicity::NotHarmonic { .. } => "not_harmonic",
            Harmonicity::Inconclusive => "inconclusive",
        }
    }

    pub fn is_harmonic(&self) -> bool {
        matches!(self, Harmonicity::GeneralizedHarmonic)
    }
}

/// Verdict of an estimate interpreted as harmonicity.
pub fn harmonicity(est: &GenLapEstimate) -> Harmonicity {
    match est.verdict {
        Verdict::Diverges => Harmonicity::NotHarmonic { sign: est.a.signum() },
        Verdict::Converges => {
            let eps = floor(&est.values);
            if est.b.abs() <= est.thresholds.converge_sigma * est.b_stderr + eps {
                Harmonicity::GeneralizedHarmonic
            } else {
                Harmonicity::NotHarmonic { sign: est.b.signum() }
            }
        }
        Verdict::Inconclusive => Harmonicity::Inconclusive,
    }
}

/// Classifies the point `(x', phi(x'))` for the jump function with values
/// `alpha_plus`/`alpha_minus`.
pub fn classify_point(
    surface: &GraphSurface,
    x_chart: &[f64],
    schedule: &RadiusSchedule,
    cfg: &SamplerConfig,
    alpha_plus: f64,
    alpha_minus: f64,
) -> Result<(Harmonicity, GenLapEstimate)> {
    let x = surface.point_on(x_chart)?;
    let f = Integrand::Jump(JumpFunction::new(surface.clone(), alpha_plus, alpha_minus));
    let est = gen_laplacian_limit(&f, &x, schedule, cfg)?;
    Ok((harmonicity(&est), est))
}

/// Coefficient of `H / r` in the divergent estimator for a unit jump
/// (`alpha = +-1`): `-(2(n+2) c_n / omega_n)`.
pub fn divergence_rate_coefficient(n: usize) -> Result<f64> {
    Ok(-2.0 * (n as f64 + 2.0) * c_n_constant(n)? / unit_ball_volume(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog;

    fn cfg(samples: usize, seed: u64) -> SamplerConfig {
        SamplerConfig::monte_carlo(samples, seed)
    }

    #[test]
    fn schedule_validation() {
        assert!(RadiusSchedule::new(0.1, 0.6, 3).is_err());
        assert!(RadiusSchedule::new(0.1, 1.0, 6).is_err());
        assert!(RadiusSchedule::new(-0.1, 0.5, 6).is_err());
        let s = RadiusSchedule::new(0.2, 0.5, 4).unwrap();
        assert_eq!(s.radii(), vec![0.2, 0.1, 0.05, 0.025]);
        assert_eq!(s.r_min(), 0.025);
    }

    #[test]
    fn rate_coefficient_in_three_dimensions() {
        assert!((divergence_rate_coefficient(3).unwrap() + 3.75).abs() < 1e-14);
    }

    #[test]
    fn affine_function_vanishes_to_rounding() {
        let f = Integrand::smooth(3, |y| 2.0 * y[0] - y[1] + 0.5 * y[2] + 1.0);
        let v = gen_laplacian_at(&f, &[0.1, 0.2, -0.3], 0.3, &cfg(4000, 1)).unwrap();
        assert!(v.value.abs() < 1e-11, "{}", v.value);
    }

    #[test]
    fn halfspace_jump_is_exactly_zero() {
        let e = catalog::build("halfspace", &Default::default()).unwrap();
        let f = Integrand::Jump(JumpFunction::unit(e.surface));
        let v = gen_laplacian_at(&f, &[0.2, -0.1, 0.0], 0.3, &cfg(10_000, 2)).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.stderr, 0.0);
    }

    #[test]
    fn synthetic_divergent_series_is_fitted() {
        let s = RadiusSchedule::new(0.2, 0.6, 6).unwrap();
        let radii = s.radii();
        let values: Vec<f64> = radii.iter().map(|r| -3.75 / r + 0.5).collect();
        let stderrs = vec![1e-3; radii.len()];
        let est = fit_schedule(radii, values, stderrs, s.ratio, VerdictThresholds::default());
        assert_eq!(est.verdict, Verdict::Diverges);
        assert!((est.p + 1.0).abs() < 1e-9);
        assert!((est.a + 3.75).abs() < 1e-8);
        assert!((est.b - 0.5).abs() < 1e-8);
        assert_eq!(harmonicity(&est), Harmonicity::NotHarmonic { sign: -1.0 });
    }

    #[test]
    fn constant_series_converges() {
        let radii = RadiusSchedule::new(0.2, 0.6, 6).unwrap().radii();
        let values = vec![6.0, 6.01, 5.99, 6.02, 5.97, 6.03];
        let stderrs = vec![0.02, 0.02, 0.03, 0.03, 0.05, 0.05];
        let est = fit_schedule(radii, values, stderrs, 0.6, VerdictThresholds::default());
        assert_eq!(est.verdict, Verdict::Converges);
        assert!(!est.has_power_law());
        assert!((est.b - 6.0).abs() < 0.03);
    }
}
