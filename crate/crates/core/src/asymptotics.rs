//! Small-ball asymptotics of the volume split.
//!
//! For a surface through `x` with mean curvature `H`,
//!
//! ```text
//! vol(S+_r) - vol(S-_r) = -c_n H r^{n+1} + O(r^{n+3}),
//! c_n = (n-1) omega_{n-1} / (n+1).
//! ```
//!
//! The constant follows from writing the difference as twice the integral of
//! `-phi` over the `(n-1)`-ball and averaging the second-order Taylor term.
//! This module recovers `H` from sampled splits, measures the order of the
//! remainder, and checks the Taylor ball-average identity on its own.

use std::sync::Arc;

use crate::exec::try_map_ordered;
use crate::geometry::{catalog, GraphSurface};
use crate::genlap::RadiusSchedule;
use crate::quadrature::{ball_average_relative, unit_ball_volume, volume_split, Integrand, SamplerConfig};
use crate::rng::mix;
use crate::stats::{weighted_line_fit, weighted_mean};
use crate::{Error, Result};

/// `c_n = (n-1) omega_{n-1} / (n+1)`: 2/3, pi/2, 4 pi/5 for n = 2, 3, 4.
pub fn c_n_constant(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("c_n needs n >= 2, got {n}")));
    }
    Ok((n as f64 - 1.0) * unit_ball_volume(n - 1) / (n as f64 + 1.0))
}

/// Residuals must exceed this many standard errors to enter an order fit.
pub const SIGNAL_SIGMA: f64 = 5.0;

/// Power law `|residual| ~ coefficient * r^exponent` through the radii whose
/// residual is clear of the noise.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub coefficient: f64,
    /// Indices into the schedule that entered the fit.
    pub used: Vec<usize>,
}

/// Weighted log-log fit over entries with `|residual| > SIGNAL_SIGMA * stderr`.
/// `None` when fewer than two radii qualify.
pub fn fit_order(radii: &[f64], residuals: &[f64], stderrs: &[f64]) -> Option<OrderFit> {
    let used: Vec<usize> = (0..radii.len())
        .filter(|&j| residuals[j].abs() > SIGNAL_SIGMA * stderrs[j] && residuals[j] != 0.0)
        .collect();
    if used.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = used.iter().map(|&j| radii[j].ln()).collect();
    let ly: Vec<f64> = used.iter().map(|&j| residuals[j].abs().ln()).collect();
    // Relative error of |res| is stderr/|res|; the log has variance (se/res)^2.
    let w: Vec<f64> = used
        .iter()
        .map(|&j| {
            let rel = stderrs[j] / residuals[j].abs();
            if rel > 0.0 { (1.0 / (rel * rel)).min(1e16) } else { 1e16 }
        })
        .collect();
    let fit = weighted_line_fit(&lx, &ly, &w)?;
    Some(OrderFit {
        exponent: fit.slope,
        exponent_stderr: fit.slope_stderr,
        coefficient: fit.intercept.exp(),
        used,
    })
}

/// Curvature recovered from volume splits over a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2Fit {
    pub radii: Vec<f64>,
    pub diffs: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// Whether each radius entered the curvature estimate.
    pub used: Vec<bool>,
    pub h_hat: f64,
    pub h_stderr: f64,
    pub c_used: f64,
    /// Weighted mean of `diff_j / r_j^{n+1}` over the used radii.
    pub leading_coeff: f64,
    pub leading_stderr: f64,
    /// `diff_j + c_n H r_j^{n+1}` with the exact `H` when supplied, else `H_hat`.
    pub residuals: Vec<f64>,
    pub exact_h: Option<f64>,
    /// Remainder order; only fitted with an exact `H` and enough signal.
    pub remainder: Option<OrderFit>,
    /// True when the remainder could not be separated from sampling noise,
    /// or every radius had to be kept for `H_hat` despite failing the cut.
    pub noise_limited: bool,
}

impl Lemma2Fit {
    pub fn remainder_exponent(&self) -> Option<f64> {
        self.remainder.as_ref().map(|r| r.exponent)
    }
}

/// Volume splits at the point `(x', phi(x'))` over the schedule (radius `j`
/// uses sub-seed `mix(seed, j)`), then the curvature fit.
pub fn lemma2_fit(
    surface: &GraphSurface,
    x_chart: &[f64],
    schedule: &RadiusSchedule,
    cfg: &SamplerConfig,
    exact_h: Option<f64>,
) -> Result<Lemma2Fit> {
    schedule.validate()?;
    let n = surface.ambient_dim();
    let c = c_n_constant(n)?;
    let x = surface.point_on(x_chart)?;
    let radii = schedule.radii();
    let splits = try_map_ordered(cfg.execution, radii.len(), |j| {
        volume_split(surface, &x, radii[j], &cfg.with_seed(mix(cfg.seed, j as u64)))
    })?;
    let diffs: Vec<f64> = splits.iter().map(|s| s.diff).collect();
    let stderrs: Vec<f64> = splits.iter().map(|s| s.stderr).collect();

    let mut used: Vec<bool> = diffs.iter().zip(&stderrs).map(|(d, s)| *s <= d.abs()).collect();
    let mut noise_limited = false;
    if !used.iter().any(|u| *u) {
        used = vec![true; radii.len()];
        noise_limited = true;
    }
    let pick = |v: &[f64]| -> Vec<f64> { v.iter().zip(&used).filter(|(_, u)| **u).map(|(x, _)| *x).collect() };
    let scale: Vec<f64> = radii.iter().map(|r| r.powi(n as i32 + 1)).collect();
    let coeffs: Vec<f64> = diffs.iter().zip(&scale).map(|(d, s)| d / s).collect();
    let coeff_se: Vec<f64> = stderrs.iter().zip(&scale).map(|(e, s)| e / s).collect();
    let (leading_coeff, leading_stderr) = weighted_mean(&pick(&coeffs), &pick(&coeff_se));
    let h_hat = -leading_coeff / c;
    let h_stderr = leading_stderr / c;

    let h_ref = exact_h.unwrap_or(h_hat);
    let residuals: Vec<f64> = diffs.iter().zip(&scale).map(|(d, s)| d + c * h_ref * s).collect();
    let remainder = exact_h.and_then(|_| fit_order(&radii, &residuals, &stderrs));
    if exact_h.is_some() && remainder.is_none() {
        noise_limited = true;
    }

    Ok(Lemma2Fit {
        radii,
        diffs,
        stderrs,
        used,
        h_hat,
        h_stderr,
        c_used: c,
        leading_coeff,
        leading_stderr,
        residuals,
        exact_h,
        remainder,
        noise_limited,
    })
}

/// Monte Carlo estimate of `c_n` from the unit symmetric paraboloid
/// (`H = 1`) at radius `r`: `-diff / r^{n+1}`.
pub fn estimate_c_n(n: usize, r: f64, cfg: &SamplerConfig) -> Result<(f64, f64)> {
    let e = catalog::paraboloid(&vec![1.0; n.saturating_sub(1)], 1.0)?;
    let x = vec![0.0; n];
    let s = volume_split(&e.surface, &x, r, cfg)?;
    let scale = r.powi(n as i32 + 1);
    Ok((-s.diff / scale, s.stderr / scale))
}

/// Ball averages of `phi - phi(x')` over the `d`-ball against the
/// second-order Taylor prediction `Delta phi(x') r^2 / (2(d+2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorCheck {
    pub radii: Vec<f64>,
    pub averages: Vec<f64>,
    pub predicted: Vec<f64>,
    /// `|average_j - predicted_j|`.
    pub residuals: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub laplacian: f64,
    /// Free log-log fit of the residuals, when they rise above the noise.
    pub order: Option<OrderFit>,
    /// Weighted mean of `residual_j / r_j^k` with `k` the fitted order
    /// rounded to an integer.
    pub leading_coefficient: Option<f64>,
}

pub fn taylor_average_check(
    surface: &GraphSurface,
    x_chart: &[f64],
    schedule: &RadiusSchedule,
    cfg: &SamplerConfig,
) -> Result<TaylorCheck> {
    schedule.validate()?;
    let d = surface.chart_dim();
    let jet = surface.jet(x_chart)?;
    let laplacian = jet.hessian.trace();
    let radii = schedule.radii();
    for &r in &radii {
        if !surface.domain().contains_with_margin(x_chart, r) {
            return Err(Error::ChartTooSmall {
                center: x_chart.to_vec(),
                radius: r,
            });
        }
    }
    let s = surface.clone();
    let f = Integrand::Smooth {
        dim: d,
        f: Arc::new(move |y: &[f64]| s.height_unchecked(y)),
    };
    let means = try_map_ordered(cfg.execution, radii.len(), |j| {
        ball_average_relative(&f, x_chart, radii[j], &cfg.with_seed(mix(cfg.seed, j as u64)), jet.value)
    })?;
    let averages: Vec<f64> = means.iter().map(|m| m.mean).collect();
    let stderrs: Vec<f64> = means.iter().map(|m| m.stderr).collect();
    let predicted: Vec<f64> = radii
        .iter()
        .map(|r| laplacian * r * r / (2.0 * (d as f64 + 2.0)))
        .collect();
    let residuals: Vec<f64> = averages.iter().zip(&predicted).map(|(a, p)| (a - p).abs()).collect();
    let order = fit_order(&radii, &residuals, &stderrs);
    let leading_coefficient = order.as_ref().map(|o| {
        let k = o.exponent.round() as i32;
        let c: Vec<f64> = o.used.iter().map(|&j| residuals[j] / radii[j].powi(k)).collect();
        let se: Vec<f64> = o.used.iter().map(|&j| stderrs[j] / radii[j].powi(k)).collect();
        weighted_mean(&c, &se).0
    });
    Ok(TaylorCheck {
        radii,
        averages,
        predicted,
        residuals,
        stderrs,
        laplacian,
        order,
        leading_coefficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constants_in_low_dimensions() {
        assert!((c_n_constant(2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((c_n_constant(3).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((c_n_constant(4).unwrap() - 4.0 * PI / 5.0).abs() < 1e-14);
        assert!(c_n_constant(1).is_err());
    }

    #[test]
    fn order_fit_of_exact_power() {
        let radii = [0.4, 0.2, 0.1, 0.05];
        let res: Vec<f64> = radii.iter().map(|r: &f64| 0.3 * r.powi(6)).collect();
        let se = [1e-12; 4];
        let o = fit_order(&radii, &res, &se).unwrap();
        assert!((o.exponent - 6.0).abs() < 1e-9);
        assert!((o.coefficient - 0.3).abs() < 1e-8);
        assert_eq!(o.used.len(), 4);
    }

    #[test]
    fn plane_has_exactly_zero_curvature() {
        let e = catalog::plane(&[0.3, -0.2], 0.1, 1.0).unwrap();
        let s = RadiusSchedule::new(0.2, 0.6, 4).unwrap();
        let fit = lemma2_fit(&e.surface, &[0.1, 0.1], &s, &SamplerConfig::monte_carlo(20_000, 4), Some(0.0)).unwrap();
        assert_eq!(fit.h_hat, 0.0);
        assert!(fit.diffs.iter().all(|d| *d == 0.0));
        assert!(fit.remainder.is_none() && fit.noise_limited);
    }

    #[test]
    fn quadratic_taylor_residual_vanishes_on_lattice_free_sampling() {
        let e = catalog::paraboloid(&[1.0, 3.0], 1.0).unwrap();
        let s = RadiusSchedule::new(0.4, 0.5, 4).unwrap();
        let t = taylor_average_check(&e.surface, &[0.0, 0.0], &s, &SamplerConfig::monte_carlo(200_000, 8)).unwrap();
        assert_eq!(t.laplacian, 4.0);
        for j in 0..4 {
            assert!(t.residuals[j] <= 4.0 * t.stderrs[j] + 1e-15, "{j}: {} vs {}", t.residuals[j], t.stderrs[j]);
        }
    }
}
