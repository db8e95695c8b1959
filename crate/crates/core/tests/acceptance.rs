//! Acceptance runner: one pass/fail line per criterion, non-zero exit on any
//! failure. Oracles are closed forms written out here, independent of the
//! library's own constants.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use minsurf::asymptotics::{estimate_c_n, lemma2_fit, taylor_average_check};
use minsurf::genlap::{classify_point, gen_laplacian_at, Harmonicity, RadiusSchedule};
use minsurf::geometry::catalog::{self, scherk_height};
use minsurf::geometry::{BoxDomain, GraphSurface};
use minsurf::mse::{energy_minimize, solve_mse, Grid2D, GridFunction, Init, SolverOptions};
use minsurf::quadrature::{Integrand, SamplerConfig};
use minsurf::viscosity::{comparison_inequality_check, mse_operator, viscosity_audit, AuditOptions, Paraboloid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn default_schedule() -> RadiusSchedule {
    RadiusSchedule::new(0.2, RadiusSchedule::DEFAULT_RATIO, RadiusSchedule::DEFAULT_COUNT).unwrap()
}

fn prefactor() -> Outcome {
    let cfg = SamplerConfig::monte_carlo(1_000_000, 101);
    let mut worst: f64 = 0.0;
    for n in [2usize, 3, 4] {
        let x: Vec<f64> = (0..n).map(|i| 0.1 * (i as f64 + 1.0)).collect();
        let xc = x.clone();
        let f = Integrand::smooth(n, move |y: &[f64]| y.iter().zip(&xc).map(|(a, b)| (a - b).powi(2)).sum());
        for (j, r) in default_schedule().radii().into_iter().enumerate() {
            let v = gen_laplacian_at(&f, &x, r, &cfg.with_seed(1000 + j as u64)).map_err(err)?;
            let z = (v.value - 2.0 * n as f64).abs() / v.stderr.max(f64::MIN_POSITIVE);
            worst = worst.max(z);
            if z > 3.0 {
                return Err(format!("n={n} r={r:.4}: {} vs {} (se {})", v.value, 2 * n, v.stderr));
            }
        }
    }
    Ok(format!("worst deviation {worst:.2} se"))
}

fn halfspace() -> Outcome {
    let e = catalog::halfspace(3, 1.0).map_err(err)?;
    let x = [0.1, -0.2];
    let s = RadiusSchedule::default_for(&e.surface, &x).map_err(err)?;
    let (h, est) = classify_point(&e.surface, &x, &s, &SamplerConfig::monte_carlo(1_000_000, 7), 1.0, -1.0)
        .map_err(err)?;
    check(
        h.is_harmonic() && est.values.iter().all(|v| *v == 0.0),
        format!("{} values {:?}", h.as_str(), est.values),
    )
}

fn lemma2_constant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let schedule = RadiusSchedule::new(0.2, 0.6, 6).map_err(err)?;
    let mut worst_rel: f64 = 0.0;
    for k in 0..20 {
        let kappa = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let e = catalog::paraboloid(&kappa, 1.0).map_err(err)?;
        let h = 0.5 * (kappa[0] + kappa[1]);
        let fit = lemma2_fit(&e.surface, &[0.0, 0.0], &schedule, &SamplerConfig::monte_carlo(2_000_000, 500 + k), None)
            .map_err(err)?;
        let dev = (fit.h_hat - h).abs();
        let tol = (0.03 * h.abs()).max(3.0 * fit.h_stderr);
        worst_rel = worst_rel.max(dev / tol);
        if dev > tol {
            return Err(format!("kappa {kappa:?}: H_hat {} vs {h} (se {})", fit.h_hat, fit.h_stderr));
        }
    }
    let (c, se) = estimate_c_n(3, 0.05, &SamplerConfig::monte_carlo(10_000_000, 77)).map_err(err)?;
    let rel = (c - PI / 2.0).abs() / (PI / 2.0);
    check(
        rel < 0.02,
        format!("worst H deviation {worst_rel:.2} of tolerance; c3 = {c:.5} +- {se:.5} ({:.2}% off)", 100.0 * rel),
    )
}

fn remainder_order() -> Outcome {
    let e = catalog::paraboloid(&[1.0, 1.0], 1.0).map_err(err)?;
    let schedule = RadiusSchedule::new(0.5, 0.75, 6).map_err(err)?;
    let fit = lemma2_fit(&e.surface, &[0.0, 0.0], &schedule, &SamplerConfig::monte_carlo(40_000_000, 4), Some(1.0))
        .map_err(err)?;
    match &fit.remainder {
        Some(o) => check(
            o.exponent >= 5.5,
            format!("remainder exponent {:.3} +- {:.3} over {} radii", o.exponent, o.exponent_stderr, o.used.len()),
        ),
        None => Err("remainder indistinguishable from noise".into()),
    }
}

fn taylor_identity() -> Outcome {
    let e = catalog::monomial(3, 4, 1.0, 1.0).map_err(err)?;
    let schedule = RadiusSchedule::new(0.5, 0.6, 6).map_err(err)?;
    let t = taylor_average_check(&e.surface, &[0.0, 0.0], &schedule, &SamplerConfig::monte_carlo(1_000_000, 5))
        .map_err(err)?;
    // Mean of x1^4 over the unit d-ball is 3 / ((d+2)(d+4)).
    let oracle = 3.0 / (4.0 * 6.0);
    let (Some(o), Some(c)) = (&t.order, t.leading_coefficient) else {
        return Err("no order fit".into());
    };
    check(
        (o.exponent - 4.0).abs() <= 0.3 && (c - oracle).abs() <= 0.02 * oracle,
        format!("order {:.3}, coefficient {c:.5} (oracle {oracle})", o.exponent),
    )
}

fn divergence_rate() -> Outcome {
    let e = catalog::sphere(3, 1.0, 0.7).map_err(err)?;
    let x = [0.0, 0.0];
    let s = RadiusSchedule::default_for(&e.surface, &x).map_err(err)?;
    let (h, est) = classify_point(&e.surface, &x, &s, &SamplerConfig::monte_carlo(8_000_000, 6), 1.0, -1.0)
        .map_err(err)?;
    let target = -15.0 / 4.0;
    check(
        matches!(h, Harmonicity::NotHarmonic { .. })
            && (est.p + 1.0).abs() <= 0.15
            && (est.a - target).abs() <= 0.1 * target.abs(),
        format!("{} p = {:.3}, a = {:.3}", h.as_str(), est.p, est.a),
    )
}

fn minimal_harmonicity() -> Outcome {
    let cfg = SamplerConfig::monte_carlo(1_000_000, 7);
    let cases: [(&str, [[f64; 2]; 5]); 2] = [
        ("scherk", [[0.0, 0.0], [0.3, 0.1], [-0.5, 0.4], [0.6, -0.6], [-0.2, -0.7]]),
        ("catenoid", [[1.8, 0.0], [1.5, 0.2], [2.0, -0.3], [1.6, -0.2], [2.1, 0.35]]),
    ];
    let mut lines = Vec::new();
    for (name, pts) in cases {
        let e = catalog::build(name, &Default::default()).map_err(err)?;
        for p in pts {
            let s = RadiusSchedule::default_for(&e.surface, &p).map_err(err)?;
            let (h, est) = classify_point(&e.surface, &p, &s, &cfg, 1.0, -1.0).map_err(err)?;
            if !h.is_harmonic() {
                return Err(format!("{name} {p:?}: {} (b = {} +- {})", h.as_str(), est.b, est.b_stderr));
            }
            lines.push(format!("{:.1}", est.b.abs() / est.b_stderr));
        }
    }
    Ok(format!("10/10 harmonic, |b|/se = [{}]", lines.join(", ")))
}

fn scherk_dirichlet(m: usize) -> Result<(GridFunction, f64, f64), String> {
    let g = Grid2D::square(-1.0, 1.0, m).map_err(err)?;
    let b = GridFunction::boundary_from_fn(g, |x, y| scherk_height(&[x, y]));
    let (phi, rep) = solve_mse(&b, &Init::Harmonic, &SolverOptions::default()).map_err(err)?;
    let exact = GridFunction::from_fn(g, |x, y| scherk_height(&[x, y]));
    Ok((phi.clone(), phi.max_abs_diff(&exact), rep.final_residual()))
}

fn solver_order() -> Outcome {
    let (_, e33, r33) = scherk_dirichlet(33)?;
    let (_, e65, r65) = scherk_dirichlet(65)?;
    let ratio = e33 / e65;
    check(
        ratio >= 3.5 && r33 < 1e-10 && r65 < 1e-10,
        format!("errors {e33:.3e} / {e65:.3e} = {ratio:.3}, residuals {r33:.1e} {r65:.1e}"),
    )
}

fn solver_agreement() -> Outcome {
    let g = Grid2D::square(-1.0, 1.0, 33).map_err(err)?;
    let b = GridFunction::boundary_from_fn(g, |x, y| scherk_height(&[x, y]));
    let (newton, _) = solve_mse(&b, &Init::Harmonic, &SolverOptions::default()).map_err(err)?;
    let (descent, rep) = energy_minimize(&b, &Init::Harmonic, &SolverOptions::DESCENT_DEFAULT).map_err(err)?;
    let d = newton.max_abs_diff(&descent);
    check(d < 1e-8, format!("max difference {d:.2e} after {} descent steps", rep.iterations))
}

fn round_trip() -> Outcome {
    let (phi, _, _) = scherk_dirichlet(65)?;
    let cfg = SamplerConfig::monte_carlo(1_000_000, 3);
    let surf = phi.to_surface();
    for p in [[0.0, 0.0], [0.4, 0.4], [-0.4, 0.4], [0.4, -0.4], [-0.4, -0.4]] {
        let s = RadiusSchedule::default_for(&surf, &p).map_err(err)?;
        let (h, _) = classify_point(&surf, &p, &s, &cfg, 1.0, -1.0).map_err(err)?;
        if !h.is_harmonic() {
            return Err(format!("solver output at {p:?}: {}", h.as_str()));
        }
    }
    let bumped = phi.with_bump([0.0, 0.0], 0.1, 0.5).to_surface();
    let s = RadiusSchedule::default_for(&bumped, &[0.0, 0.0]).map_err(err)?;
    let (h, est) = classify_point(&bumped, &[0.0, 0.0], &s, &cfg, 1.0, -1.0).map_err(err)?;
    check(
        matches!(h, Harmonicity::NotHarmonic { .. }),
        format!("5/5 harmonic; bumped centre {} (p = {:.2})", h.as_str(), est.p),
    )
}

fn viscosity() -> Outcome {
    let (phi, _, _) = scherk_dirichlet(65)?;
    let h = phi.grid.hx();
    let opts = AuditOptions {
        tol_f: Some(10.0 * h),
        ..Default::default()
    };
    let op = mse_operator(minsurf::mse::gradient_bound(&phi));
    let scherk = viscosity_audit(&phi, &op, &opts).map_err(err)?;
    let convex = GridFunction::from_fn(phi.grid, |x, y| 0.5 * (x * x + y * y));
    let cv = viscosity_audit(&convex, &mse_operator(2f64.sqrt()), &opts).map_err(err)?;
    let max_f = cv.violations.iter().map(|r| r.f_value).fold(f64::NEG_INFINITY, f64::max);
    check(
        scherk.passes() && cv.supersolution_violations() > 0 && cv.subsolution_violations() == 0 && max_f > 0.1,
        format!(
            "scherk {} violations; convex {} super / {} sub, max F {max_f:.3}",
            scherk.violations.len(),
            cv.supersolution_violations(),
            cv.subsolution_violations()
        ),
    )
}

fn comparison() -> Outcome {
    let scherk = catalog::scherk(1.2).map_err(err)?.surface;
    let sphere = catalog::sphere(3, 1.0, 0.7).map_err(err)?.surface;
    let para = catalog::paraboloid(&[1.5, -0.5], 1.0).map_err(err)?.surface;
    let plane = catalog::plane(&[0.3, -0.2], 0.1, 1.0).map_err(err)?.surface;
    let cat = catalog::catenoid(BoxDomain::new(vec![1.2, -0.6], vec![2.4, 0.6]).map_err(err)?).map_err(err)?.surface;
    let fixtures: Vec<(&str, &GraphSurface, [f64; 2], f64)> = vec![
        ("scherk", &scherk, [0.3, 0.1], 0.2),
        ("scherk", &scherk, [-0.4, 0.5], 0.2),
        ("sphere", &sphere, [0.0, 0.0], 0.5),
        ("paraboloid", &para, [0.2, -0.1], 0.05),
        ("plane", &plane, [0.0, 0.3], 0.1),
        ("catenoid", &cat, [1.8, 0.0], 0.3),
    ];
    let mut pairs = 0;
    for (name, s, x, shift) in fixtures {
        let p = Paraboloid::taylor(s, &x, shift).map_err(err)?;
        let sched = RadiusSchedule::default_for(s, &x).map_err(err)?;
        for seed in 0..3 {
            let rows = comparison_inequality_check(s, &p, &x, &sched, &SamplerConfig::monte_carlo(200_000, 900 + seed))
                .map_err(err)?;
            for r in rows {
                pairs += 1;
                if r.pointwise_violations != 0 || r.mean_p < r.mean_s {
                    return Err(format!("{name} {x:?} r={}: {} < {}", r.r, r.mean_p, r.mean_s));
                }
            }
        }
    }
    Ok(format!("{pairs} (fixture, radius, seed) cases, 0 violations"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("prefactor exactness", prefactor, Some(Duration::from_secs(30))),
        ("half-space harmonicity", halfspace, Some(Duration::from_secs(10))),
        ("volume asymmetry constant", lemma2_constant, Some(Duration::from_secs(300))),
        ("remainder order", remainder_order, None),
        ("Taylor ball average", taylor_identity, None),
        ("divergence rate off minimal surfaces", divergence_rate, None),
        ("minimal surface harmonicity", minimal_harmonicity, None),
        ("MSE solver order", solver_order, Some(Duration::from_secs(60))),
        ("Newton and descent agreement", solver_agreement, None),
        ("round trip through solver output", round_trip, None),
        ("viscosity audit", viscosity, None),
        ("comparison inequality", comparison, None),
    ];
    let mut failed = 0;
    for (k, (name, f, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut out = f();
        let el = t.elapsed();
        if let (Ok(msg), Some(b)) = (&out, budget) {
            if el > *b {
                out = Err(format!("{msg}; took {:.1}s, budget {}s", el.as_secs_f64(), b.as_secs()));
            }
        }
        let (tag, msg) = match &out {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("{tag} {:>2} {name}: {msg} [{:.1}s]", k + 1, el.as_secs_f64());
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
