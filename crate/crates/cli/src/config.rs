//! Flat `key = value` experiment configuration with dotted keys.
//!
//! ```text
//! # comment
//! experiment = lemma2
//! surface = paraboloid
//! surface.kappa = 1, 1
//! points = 0, 0; 0.1, -0.2
//! sampler.seed = 42
//! ```
//!
//! Unknown keys, duplicate keys and malformed values are errors. Optional
//! settings take the literal value `auto`. [`ExperimentConfig::to_manifest`]
//! writes every setting back out, defaults included, in a form that parses
//! to the same config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use minsurf::geometry::catalog::{self, CatalogEntry, Params};
use minsurf::quadrature::SamplerConfig;
use minsurf::{Execution, Result as CoreResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::experiments::Experiment;
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Where evaluation points come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Points {
    /// Centre of the surface chart.
    Auto,
    List(Vec<Vec<f64>>),
    /// Uniform in the middle half of the chart box.
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Auto,
    Harmonic,
    NotHarmonic,
    None,
}

impl Expectation {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "auto" => Self::Auto,
            "harmonic" | "generalized_harmonic" => Self::Harmonic,
            "not_harmonic" => Self::NotHarmonic,
            "none" => Self::None,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Auto => "auto",
            Self::Harmonic => "generalized_harmonic",
            Self::NotHarmonic => "not_harmonic",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditExpectation {
    Auto,
    Pass,
    SupersolutionFails,
    SubsolutionFails,
    None,
}

impl AuditExpectation {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "auto" => Self::Auto,
            "pass" => Self::Pass,
            "supersolution_fails" => Self::SupersolutionFails,
            "subsolution_fails" => Self::SubsolutionFails,
            "none" => Self::None,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Auto => "auto",
            Self::Pass => "pass",
            Self::SupersolutionFails => "supersolution_fails",
            Self::SubsolutionFails => "subsolution_fails",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// The analytic surface itself.
    Analytic,
    /// The Dirichlet solution with the surface's boundary values.
    Solver,
}

impl Source {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "analytic" => Some(Self::Analytic),
            "solver" => Some(Self::Solver),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Solver => "solver",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Newton,
    Descent,
}

impl SolverMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Newton => "newton",
            Self::Descent => "descent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSpec {
    /// `None` scales `r0` to the chart around each point.
    pub r0: Option<f64>,
    pub ratio: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub method: SolverMethod,
    /// `None` uses the method's default.
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub m: usize,
    /// `[x0, x1, y0, y1]`; `None` uses the surface chart box.
    pub rect: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BumpSpec {
    pub amplitude: f64,
    pub center: [f64; 2],
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditSpec {
    pub k_max: f64,
    pub levels: usize,
    pub rotations: usize,
    pub radius_cells: f64,
    pub tol_f: Option<f64>,
    pub expect: AuditExpectation,
    pub witness_f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssertSpec {
    pub h_rel_tol: f64,
    pub h_sigma: f64,
    pub rate_rel_tol: f64,
    pub exponent_tol: f64,
    pub max_error: Option<f64>,
    pub order: Option<f64>,
    pub order_tol: f64,
    pub coefficient: Option<f64>,
    pub coefficient_rel_tol: f64,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub surface: String,
    pub surface_params: Params,
    pub points: Points,
    pub sampler: SamplerConfig,
    pub schedule: ScheduleSpec,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub expect: Expectation,
    pub source: Source,
    pub solver: SolverSpec,
    pub bump: BumpSpec,
    pub audit: AuditSpec,
    pub asserts: AssertSpec,
    pub output_dir: PathBuf,
}

struct Raw {
    entries: BTreeMap<String, (String, usize)>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, line) in text.lines().enumerate() {
            let lineno = k + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| bad(format!("line {lineno}: expected `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(bad(format!("line {lineno}: malformed key `{key}`")));
            }
            if value.is_empty() {
                return Err(bad(format!("line {lineno}: `{key}` has no value")));
            }
            if entries.insert(key.to_string(), (value.to_string(), lineno)).is_some() {
                return Err(bad(format!("line {lineno}: duplicate key `{key}`")));
            }
        }
        Ok(Raw { entries })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn get<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> Option<T>) -> Result<T> {
        match self.take(key) {
            None => Ok(default),
            Some((v, line)) => parse(&v).ok_or_else(|| bad(format!("line {line}: invalid value `{v}` for `{key}`"))),
        }
    }

    fn num(&mut self, key: &str, default: f64) -> Result<f64> {
        self.get(key, default, parse_f64)
    }

    fn auto_num(&mut self, key: &str, default: Option<f64>) -> Result<Option<f64>> {
        self.get(key, default, |s| if s == "auto" { Some(None) } else { parse_f64(s).map(Some) })
    }

    fn count(&mut self, key: &str, default: usize) -> Result<usize> {
        self.get(key, default, |s| s.parse().ok())
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|t| parse_f64(t.trim())).collect()
}

fn parse_points(s: &str) -> Option<Vec<Vec<f64>>> {
    s.split(';').map(|p| parse_list(p.trim())).collect()
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn auto<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), T::to_string)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = Raw::parse(text)?;
        let experiment = match raw.take("experiment") {
            None => return Err(bad("missing `experiment`")),
            Some((v, line)) => {
                Experiment::from_name(&v).ok_or_else(|| bad(format!("line {line}: unknown experiment `{v}`")))?
            }
        };
        let surface = raw
            .take("surface")
            .map(|(v, _)| v)
            .ok_or_else(|| bad("missing `surface`"))?;
        if !catalog::NAMES.contains(&surface.as_str()) {
            return Err(bad(format!("unknown surface `{surface}` (known: {})", catalog::NAMES.join(", "))));
        }
        let prefix = "surface.";
        let keys: Vec<String> = raw.entries.keys().filter(|k| k.starts_with(prefix)).cloned().collect();
        let mut surface_params = Params::new();
        for k in keys {
            let (v, line) = raw.take(&k).unwrap_or_default();
            let list = parse_list(&v).ok_or_else(|| bad(format!("line {line}: invalid number list `{v}` for `{k}`")))?;
            surface_params.insert(k[prefix.len()..].to_string(), list);
        }

        let d = SamplerConfig::default();
        let seed = raw.get("sampler.seed", d.seed, |s| s.parse().ok())?;
        let sampler = SamplerConfig {
            method: raw.get("sampler.method", d.method, |s| s.parse().ok())?,
            samples: raw.count("sampler.samples", d.samples)?,
            seed,
            antithetic: raw.get("sampler.antithetic", d.antithetic, parse_bool)?,
            execution: raw.get("sampler.execution", d.execution, |s| match s {
                "parallel" => Some(Execution::Parallel),
                "sequential" => Some(Execution::Sequential),
                _ => None,
            })?,
        };

        let points = match (raw.take("points"), raw.take("points.random")) {
            (Some(_), Some((_, line))) => return Err(bad(format!("line {line}: give either `points` or `points.random`"))),
            (Some((v, _)), None) if v == "auto" => Points::Auto,
            (Some((v, line)), None) => {
                Points::List(parse_points(&v).ok_or_else(|| bad(format!("line {line}: invalid point list `{v}`")))?)
            }
            (None, Some((v, line))) => Points::Random {
                count: v.parse().map_err(|_| bad(format!("line {line}: invalid point count `{v}`")))?,
                seed: 0,
            },
            (None, None) => Points::Auto,
        };
        let points = match points {
            Points::Random { count, .. } => Points::Random {
                count,
                seed: raw.get("points.seed", seed, |s| s.parse().ok())?,
            },
            p => p,
        };

        let schedule = ScheduleSpec {
            r0: raw.auto_num("schedule.r0", None)?,
            ratio: raw.num("schedule.ratio", minsurf::genlap::RadiusSchedule::DEFAULT_RATIO)?,
            count: raw.count("schedule.count", minsurf::genlap::RadiusSchedule::DEFAULT_COUNT)?,
        };
        let alpha_plus = raw.num("alpha.plus", 1.0)?;
        let alpha_minus = raw.num("alpha.minus", -1.0)?;
        let expect = raw.get("expect", Expectation::Auto, Expectation::parse)?;
        let source = raw.get("source", Source::Analytic, Source::parse)?;

        let solver = SolverSpec {
            method: raw.get("solver.method", SolverMethod::Newton, |s| match s {
                "newton" => Some(SolverMethod::Newton),
                "descent" => Some(SolverMethod::Descent),
                _ => None,
            })?,
            tol: raw.auto_num("solver.tol", None)?,
            max_iter: raw.get("solver.max_iter", None, |s| {
                if s == "auto" { Some(None) } else { s.parse().ok().map(Some) }
            })?,
            m: raw.count("grid.m", 33)?,
            rect: raw.get("grid.rect", None, |s| {
                if s == "auto" {
                    return Some(None);
                }
                let v = parse_list(s)?;
                <[f64; 4]>::try_from(v).ok().map(Some)
            })?,
        };
        let two = |s: &str| parse_list(s).and_then(|v| <[f64; 2]>::try_from(v).ok());
        let bump = BumpSpec {
            amplitude: raw.num("bump.amplitude", 0.0)?,
            center: raw.get("bump.center", [0.0, 0.0], two)?,
            width: raw.num("bump.width", 0.5)?,
        };
        let audit = AuditSpec {
            k_max: raw.num("audit.k_max", 10.0)?,
            levels: raw.count("audit.levels", 7)?,
            rotations: raw.count("audit.rotations", 8)?,
            radius_cells: raw.num("audit.radius_cells", 2.5)?,
            tol_f: raw.auto_num("audit.tol_f", None)?,
            expect: raw.get("audit.expect", AuditExpectation::Auto, AuditExpectation::parse)?,
            witness_f: raw.num("audit.witness_f", 0.1)?,
        };
        let asserts = AssertSpec {
            h_rel_tol: raw.num("assert.h_rel_tol", 0.03)?,
            h_sigma: raw.num("assert.h_sigma", 3.0)?,
            rate_rel_tol: raw.num("assert.rate_rel_tol", 0.1)?,
            exponent_tol: raw.num("assert.exponent_tol", 0.15)?,
            max_error: raw.auto_num("assert.max_error", None)?,
            order: raw.auto_num("assert.order", None)?,
            order_tol: raw.num("assert.order_tol", 0.3)?,
            coefficient: raw.auto_num("assert.coefficient", None)?,
            coefficient_rel_tol: raw.num("assert.coefficient_rel_tol", 0.02)?,
        };
        let output_dir = PathBuf::from(raw.take("output.dir").map_or_else(|| "results".to_string(), |(v, _)| v));

        if let Some((key, (_, line))) = raw.entries.iter().next() {
            return Err(bad(format!("line {line}: unknown key `{key}`")));
        }
        let cfg = ExperimentConfig {
            experiment,
            surface,
            surface_params,
            points,
            sampler,
            schedule,
            alpha_plus,
            alpha_minus,
            expect,
            source,
            solver,
            bump,
            audit,
            asserts,
            output_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        let entry = self.entry()?;
        if let Some(r0) = self.schedule.r0 {
            minsurf::genlap::RadiusSchedule::new(r0, self.schedule.ratio, self.schedule.count)?;
        } else {
            minsurf::genlap::RadiusSchedule::new(1.0, self.schedule.ratio, self.schedule.count)?;
        }
        let d = entry.surface.chart_dim();
        if let Points::List(ps) = &self.points {
            if ps.is_empty() {
                return Err(bad("`points` is empty"));
            }
            if let Some(p) = ps.iter().find(|p| p.len() != d) {
                return Err(bad(format!("point {p:?} has {} coordinates, the chart has {d}", p.len())));
            }
        }
        if let Points::Random { count: 0, .. } = self.points {
            return Err(bad("`points.random` must be positive"));
        }
        let needs_plane = matches!(
            self.experiment,
            Experiment::MseSolve | Experiment::ViscosityAudit
        ) || self.source == Source::Solver;
        if needs_plane && d != 2 {
            return Err(bad(format!("{} needs a surface over the plane", self.experiment.name())));
        }
        if self.solver.m < 5 {
            return Err(bad("`grid.m` must be at least 5"));
        }
        if self.bump.amplitude != 0.0 && self.source != Source::Solver {
            return Err(bad("`bump.amplitude` needs `source = solver`"));
        }
        if self.alpha_plus == self.alpha_minus {
            return Err(bad("`alpha.plus` and `alpha.minus` must differ"));
        }
        Ok(())
    }

    pub fn entry(&self) -> CoreResult<CatalogEntry> {
        catalog::build(&self.surface, &self.surface_params)
    }

    /// Evaluation points in chart coordinates.
    pub fn resolve_points(&self, entry: &CatalogEntry) -> Vec<Vec<f64>> {
        let dom = entry.surface.domain();
        let (lo, hi) = (dom.lo(), dom.hi());
        match &self.points {
            Points::Auto => vec![lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect()],
            Points::List(ps) => ps.clone(),
            Points::Random { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| {
                        lo.iter()
                            .zip(hi)
                            .map(|(a, b)| {
                                let w = b - a;
                                rng.random_range(a + 0.25 * w..b - 0.25 * w)
                            })
                            .collect()
                    })
                    .collect()
            }
        }
    }

    /// Every setting, defaults included, in parseable form.
    pub fn to_manifest(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("experiment", self.experiment.name().into());
        put("surface", self.surface.clone());
        for (k, v) in &self.surface_params {
            put(&format!("surface.{k}"), join(v));
        }
        match &self.points {
            Points::Auto => put("points", "auto".into()),
            Points::List(ps) => put("points", ps.iter().map(|p| join(p)).collect::<Vec<_>>().join("; ")),
            Points::Random { count, seed } => {
                put("points.random", count.to_string());
                put("points.seed", seed.to_string());
            }
        }
        put("sampler.method", self.sampler.method.as_str().into());
        put("sampler.samples", self.sampler.samples.to_string());
        put("sampler.seed", self.sampler.seed.to_string());
        put("sampler.antithetic", self.sampler.antithetic.to_string());
        put(
            "sampler.execution",
            match self.sampler.execution {
                Execution::Parallel => "parallel",
                Execution::Sequential => "sequential",
            }
            .into(),
        );
        put("schedule.r0", auto(&self.schedule.r0));
        put("schedule.ratio", self.schedule.ratio.to_string());
        put("schedule.count", self.schedule.count.to_string());
        put("alpha.plus", self.alpha_plus.to_string());
        put("alpha.minus", self.alpha_minus.to_string());
        put("expect", self.expect.as_str().into());
        put("source", self.source.as_str().into());
        put("solver.method", self.solver.method.as_str().into());
        put("solver.tol", auto(&self.solver.tol));
        put("solver.max_iter", auto(&self.solver.max_iter));
        put("grid.m", self.solver.m.to_string());
        put("grid.rect", self.solver.rect.map_or_else(|| "auto".into(), |r| join(&r)));
        put("bump.amplitude", self.bump.amplitude.to_string());
        put("bump.center", join(&self.bump.center));
        put("bump.width", self.bump.width.to_string());
        put("audit.k_max", self.audit.k_max.to_string());
        put("audit.levels", self.audit.levels.to_string());
        put("audit.rotations", self.audit.rotations.to_string());
        put("audit.radius_cells", self.audit.radius_cells.to_string());
        put("audit.tol_f", auto(&self.audit.tol_f));
        put("audit.expect", self.audit.expect.as_str().into());
        put("audit.witness_f", self.audit.witness_f.to_string());
        let a = &self.asserts;
        put("assert.h_rel_tol", a.h_rel_tol.to_string());
        put("assert.h_sigma", a.h_sigma.to_string());
        put("assert.rate_rel_tol", a.rate_rel_tol.to_string());
        put("assert.exponent_tol", a.exponent_tol.to_string());
        put("assert.max_error", auto(&a.max_error));
        put("assert.order", auto(&a.order));
        put("assert.order_tol", a.order_tol.to_string());
        put("assert.coefficient", auto(&a.coefficient));
        put("assert.coefficient_rel_tol", a.coefficient_rel_tol.to_string());
        put("output.dir", self.output_dir.display().to_string());
        s
    }
}
