//! Analytic reference surfaces addressable by name and parameter map.
//!
//! | name        | graph                                   | parameters (defaults)                          | minimal |
//! |-------------|-----------------------------------------|------------------------------------------------|---------|
//! | `halfspace` | `0`                                     | `n` (3), `half_width` (1)                      | yes     |
//! | `plane`     | `offset + slope . x'`                   | `n` (3), `slope` (0..), `tilt_deg`, `offset`, `half_width` | yes |
//! | `sphere`    | `R - sqrt(R^2 - |x'|^2)` (lower cap)    | `n` (3), `R` (1), `half_width` (0.99 R/sqrt(n-1)) | no   |
//! | `paraboloid`| `sum kappa_i x_i^2 / 2`                 | `kappa` (1,1), `half_width` (1)                | no      |
//! | `scherk`    | `log cos x - log cos y`                 | `half_width` (1.4)                             | yes     |
//! | `catenoid`  | `arccosh(sqrt(x^2 + y^2))`              | `xmin` `xmax` `ymin` `ymax` (1.2 2.4 -0.6 0.6)  | yes     |
//! | `quartic`   | `c x_1^4`                               | `n` (3), `c` (1), `half_width` (1)             | no      |
//! | `cubic`     | `c x_1^3`                               | `n` (3), `c` (1), `half_width` (1)             | no      |
//!
//! Every entry also accepts `orientation` (+1 or -1).

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{BoxDomain, GraphSurface, Orientation, ScalarField};
use crate::{Error, Result};

/// Parameter map: every value is a list so vectors (`kappa`, `slope`) and
/// scalars share one representation.
pub type Params = BTreeMap<String, Vec<f64>>;

pub const NAMES: [&str; 8] = [
    "catenoid",
    "cubic",
    "halfspace",
    "paraboloid",
    "plane",
    "quartic",
    "scherk",
    "sphere",
];

#[derive(Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub surface: GraphSurface,
    /// Closed-form mean curvature (already signed by the orientation).
    pub exact_curvature: Option<ScalarField>,
    pub minimal: bool,
}

impl std::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("name", &self.name)
            .field("surface", &self.surface)
            .field("minimal", &self.minimal)
            .finish()
    }
}

impl CatalogEntry {
    pub fn exact_curvature_at(&self, x: &[f64]) -> Option<f64> {
        self.exact_curvature.as_ref().map(|h| h(x))
    }
}

struct Reader<'a> {
    name: &'a str,
    params: &'a Params,
    allowed: &'static [&'static str],
}

impl<'a> Reader<'a> {
    fn new(name: &'a str, params: &'a Params, allowed: &'static [&'static str]) -> Result<Self> {
        for key in params.keys() {
            if key != "orientation" && !allowed.contains(&key.as_str()) {
                return Err(Error::invalid(format!(
                    "surface `{name}` has no parameter `{key}` (expected one of {allowed:?})"
                )));
            }
        }
        Ok(Reader {
            name,
            params,
            allowed,
        })
    }

    fn scalar(&self, key: &str, default: f64) -> Result<f64> {
        debug_assert!(key == "orientation" || self.allowed.contains(&key));
        match self.params.get(key) {
            None => Ok(default),
            Some(v) if v.len() == 1 && v[0].is_finite() => Ok(v[0]),
            Some(v) => Err(Error::invalid(format!(
                "`{}.{key}` must be a single finite number, got {v:?}",
                self.name
            ))),
        }
    }

    fn dim(&self, default: usize) -> Result<usize> {
        let n = self.scalar("n", default as f64)?;
        if n.fract() != 0.0 || !(2.0..=16.0).contains(&n) {
            return Err(Error::invalid(format!("`{}.n` must be an integer in 2..=16", self.name)));
        }
        Ok(n as usize)
    }

    fn list(&self, key: &str) -> Option<&'a Vec<f64>> {
        self.params.get(key)
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.scalar(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::invalid(format!("`{}.{key}` must be positive", self.name)))
        }
    }

    fn orientation(&self) -> Result<Orientation> {
        Orientation::from_sign(self.scalar("orientation", 1.0)?)
    }
}

/// Builds a catalog entry from its name and parameters. Unknown names and
/// unknown parameter keys are rejected.
pub fn build(name: &str, params: &Params) -> Result<CatalogEntry> {
    let entry = match name {
        "halfspace" => {
            let r = Reader::new(name, params, &["n", "half_width"])?;
            let n = r.dim(3)?;
            finish(halfspace(n, r.positive("half_width", 1.0)?)?, r.orientation()?)
        }
        "plane" => {
            let r = Reader::new(name, params, &["n", "slope", "tilt_deg", "offset", "half_width"])?;
            let n = r.dim(3)?;
            let mut slope = vec![0.0; n - 1];
            if let Some(s) = r.list("slope") {
                if s.len() != n - 1 {
                    return Err(Error::invalid(format!("`plane.slope` needs {} entries", n - 1)));
                }
                slope.copy_from_slice(s);
            }
            if params.contains_key("tilt_deg") {
                if params.contains_key("slope") {
                    return Err(Error::invalid("give either `plane.slope` or `plane.tilt_deg`"));
                }
                slope[0] = r.scalar("tilt_deg", 0.0)?.to_radians().tan();
            }
            finish(
                plane(&slope, r.scalar("offset", 0.0)?, r.positive("half_width", 1.0)?)?,
                r.orientation()?,
            )
        }
        "sphere" => {
            let r = Reader::new(name, params, &["n", "R", "half_width"])?;
            let n = r.dim(3)?;
            let radius = r.positive("R", 1.0)?;
            let hw = r.positive("half_width", 0.99 * radius / ((n - 1) as f64).sqrt())?;
            finish(sphere(n, radius, hw)?, r.orientation()?)
        }
        "paraboloid" => {
            let r = Reader::new(name, params, &["kappa", "half_width"])?;
            let kappa = r.list("kappa").cloned().unwrap_or_else(|| vec![1.0, 1.0]);
            finish(paraboloid(&kappa, r.positive("half_width", 1.0)?)?, r.orientation()?)
        }
        "scherk" => {
            let r = Reader::new(name, params, &["half_width"])?;
            finish(scherk(r.positive("half_width", 1.4)?)?, r.orientation()?)
        }
        "catenoid" => {
            let r = Reader::new(name, params, &["xmin", "xmax", "ymin", "ymax"])?;
            let domain = BoxDomain::new(
                vec![r.scalar("xmin", 1.2)?, r.scalar("ymin", -0.6)?],
                vec![r.scalar("xmax", 2.4)?, r.scalar("ymax", 0.6)?],
            )?;
            finish(catenoid(domain)?, r.orientation()?)
        }
        "quartic" | "cubic" => {
            let r = Reader::new(name, params, &["n", "c", "half_width"])?;
            let n = r.dim(3)?;
            let power = if name == "quartic" { 4 } else { 3 };
            finish(
                monomial(n, power, r.scalar("c", 1.0)?, r.positive("half_width", 1.0)?)?,
                r.orientation()?,
            )
        }
        other => return Err(Error::UnknownSurface(other.to_string())),
    };
    Ok(entry)
}

fn finish(mut entry: CatalogEntry, orientation: Orientation) -> CatalogEntry {
    if orientation == Orientation::Down {
        entry.surface = entry.surface.with_orientation(orientation);
        entry.exact_curvature = entry
            .exact_curvature
            .map(|h| Arc::new(move |x: &[f64]| -h(x)) as ScalarField);
    }
    entry
}

fn zero_curvature() -> Option<ScalarField> {
    Some(Arc::new(|_: &[f64]| 0.0))
}

pub fn halfspace(n: usize, half_width: f64) -> Result<CatalogEntry> {
    let mut e = plane(&vec![0.0; n - 1], 0.0, half_width)?;
    e.name = "halfspace".into();
    Ok(e)
}

pub fn plane(slope: &[f64], offset: f64, half_width: f64) -> Result<CatalogEntry> {
    let d = slope.len();
    let a = slope.to_vec();
    let g = DVector::from_vec(slope.to_vec());
    let surface = GraphSurface::new(BoxDomain::cube(d, half_width)?, move |x| {
        offset + a.iter().zip(x).map(|(s, v)| s * v).sum::<f64>()
    })
    .with_gradient(move |_| g.clone())
    .with_hessian(move |_| DMatrix::zeros(d, d));
    Ok(CatalogEntry {
        name: "plane".into(),
        surface,
        exact_curvature: zero_curvature(),
        minimal: true,
    })
}

/// Lower spherical cap of radius `radius` touching the origin: a convex bowl
/// with `H = 1/R` everywhere.
pub fn sphere(n: usize, radius: f64, half_width: f64) -> Result<CatalogEntry> {
    let d = n - 1;
    if half_width * (d as f64).sqrt() >= radius {
        return Err(Error::invalid(format!(
            "sphere chart [-{half_width}, {half_width}]^{d} is not inside the disc of radius {radius}"
        )));
    }
    let r2 = radius * radius;
    let w = move |x: &[f64]| (r2 - x.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let surface = GraphSurface::new(BoxDomain::cube(d, half_width)?, move |x| radius - w(x))
        .with_gradient(move |x| DVector::from_iterator(d, x.iter().map(|v| v / w(x))))
        .with_hessian(move |x| {
            let wx = w(x);
            let v = DVector::from_column_slice(x);
            DMatrix::identity(d, d) / wx + &v * v.transpose() / (wx * wx * wx)
        });
    Ok(CatalogEntry {
        name: "sphere".into(),
        surface,
        exact_curvature: Some(Arc::new(move |_: &[f64]| 1.0 / radius)),
        minimal: false,
    })
}

/// `phi = sum kappa_i x_i^2 / 2` in `R^{len(kappa)+1}`.
pub fn paraboloid(kappa: &[f64], half_width: f64) -> Result<CatalogEntry> {
    let d = kappa.len();
    if d == 0 || kappa.iter().any(|k| !k.is_finite()) {
        return Err(Error::invalid("paraboloid needs at least one finite kappa"));
    }
    let k1 = kappa.to_vec();
    let k2 = kappa.to_vec();
    let k3 = kappa.to_vec();
    let surface = GraphSurface::new(BoxDomain::cube(d, half_width)?, move |x| {
        0.5 * k1.iter().zip(x).map(|(k, v)| k * v * v).sum::<f64>()
    })
    .with_gradient(move |x| DVector::from_iterator(d, k2.iter().zip(x).map(|(k, v)| k * v)))
    .with_hessian(move |_| DMatrix::from_diagonal(&DVector::from_vec(k3.clone())));
    let k4 = kappa.to_vec();
    let exact: ScalarField = Arc::new(move |x: &[f64]| {
        let q = 1.0 + k4.iter().zip(x).map(|(k, v)| (k * v).powi(2)).sum::<f64>();
        let tr: f64 = k4.iter().sum();
        let ghg: f64 = k4.iter().zip(x).map(|(k, v)| k * (k * v).powi(2)).sum();
        (q * tr - ghg) / (d as f64 * q * q.sqrt())
    });
    Ok(CatalogEntry {
        name: "paraboloid".into(),
        surface,
        exact_curvature: Some(exact),
        minimal: false,
    })
}

/// Scherk's doubly periodic minimal graph over `(-pi/2, pi/2)^2`.
pub fn scherk(half_width: f64) -> Result<CatalogEntry> {
    if half_width >= FRAC_PI_2 {
        return Err(Error::invalid("scherk half_width must be below pi/2"));
    }
    let surface = GraphSurface::new(BoxDomain::cube(2, half_width)?, scherk_height)
        .with_gradient(|x| DVector::from_vec(vec![-x[0].tan(), x[1].tan()]))
        .with_hessian(|x| {
            let sx = 1.0 / x[0].cos();
            let sy = 1.0 / x[1].cos();
            DMatrix::from_row_slice(2, 2, &[-sx * sx, 0.0, 0.0, sy * sy])
        });
    Ok(CatalogEntry {
        name: "scherk".into(),
        surface,
        exact_curvature: zero_curvature(),
        minimal: true,
    })
}

pub fn scherk_height(x: &[f64]) -> f64 {
    x[0].cos().ln() - x[1].cos().ln()
}

/// Upper half of the catenoid `rho = cosh z` as a graph over a box that
/// avoids the neck disc `rho <= 1`.
pub fn catenoid(domain: BoxDomain) -> Result<CatalogEntry> {
    if domain.dim() != 2 {
        return Err(Error::invalid("catenoid chart must be two-dimensional"));
    }
    // nearest point of the box to the origin
    let near: f64 = (0..2)
        .map(|i| {
            let (a, b) = (domain.lo()[i], domain.hi()[i]);
            if a > 0.0 {
                a * a
            } else if b < 0.0 {
                b * b
            } else {
                0.0
            }
        })
        .sum::<f64>()
        .sqrt();
    if near <= 1.0 {
        return Err(Error::invalid("catenoid chart must stay outside the unit disc"));
    }
    let rho = |x: &[f64]| (x[0] * x[0] + x[1] * x[1]).sqrt();
    let surface = GraphSurface::new(domain, move |x| rho(x).acosh())
        .with_gradient(move |x| {
            let r = rho(x);
            let g = 1.0 / (r * (r * r - 1.0).sqrt());
            DVector::from_vec(vec![g * x[0], g * x[1]])
        })
        .with_hessian(move |x| {
            let r = rho(x);
            let s = (r * r - 1.0).sqrt();
            let g = 1.0 / (r * s);
            let dg = -1.0 / (r * r * s) - 1.0 / (s * s * s);
            let v = DVector::from_column_slice(x);
            DMatrix::identity(2, 2) * g + &v * v.transpose() * (dg / r)
        });
    Ok(CatalogEntry {
        name: "catenoid".into(),
        surface,
        exact_curvature: zero_curvature(),
        minimal: true,
    })
}

/// `phi = c x_1^power` for `power` 3 or 4.
pub fn monomial(n: usize, power: i32, c: f64, half_width: f64) -> Result<CatalogEntry> {
    let d = n - 1;
    let p = power as f64;
    let surface = GraphSurface::new(BoxDomain::cube(d, half_width)?, move |x| c * x[0].powi(power))
        .with_gradient(move |x| {
            let mut g = DVector::zeros(d);
            g[0] = c * p * x[0].powi(power - 1);
            g
        })
        .with_hessian(move |x| {
            let mut h = DMatrix::zeros(d, d);
            h[(0, 0)] = c * p * (p - 1.0) * x[0].powi(power - 2);
            h
        });
    let exact: ScalarField = Arc::new(move |x: &[f64]| {
        let g = c * p * x[0].powi(power - 1);
        let h = c * p * (p - 1.0) * x[0].powi(power - 2);
        h / (d as f64 * (1.0 + g * g).powf(1.5))
    });
    Ok(CatalogEntry {
        name: if power == 4 { "quartic" } else { "cubic" }.into(),
        surface,
        exact_curvature: Some(exact),
        minimal: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(pairs: &[(&str, &[f64])]) -> Params {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_vec())).collect()
    }

    #[test]
    fn unknown_names_and_keys_are_rejected() {
        assert!(matches!(build("helicoid", &Params::new()), Err(Error::UnknownSurface(_))));
        assert!(matches!(
            build("sphere", &params(&[("radius", &[1.0])])),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn sphere_chart_must_fit() {
        assert!(build("sphere", &params(&[("half_width", &[0.8])])).is_err());
        assert!(build("sphere", &params(&[("half_width", &[0.7])])).is_ok());
    }

    #[test]
    fn plane_jet_is_trivial() {
        let e = build("plane", &params(&[("n", &[4.0])])).unwrap();
        let j = e.surface.jet(&[0.1, 0.2, -0.3]).unwrap();
        assert_eq!(j.value, 0.0);
        assert!(j.gradient.iter().all(|v| *v == 0.0));
        assert!(j.hessian.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn paraboloid_jet_at_origin() {
        let e = build("paraboloid", &params(&[("kappa", &[1.5, -0.5])])).unwrap();
        let j = e.surface.jet(&[0.0, 0.0]).unwrap();
        assert_eq!(j.value, 0.0);
        assert_eq!(j.gradient.as_slice(), &[0.0, 0.0]);
        assert_eq!(j.hessian, DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, -0.5]));
    }

    #[test]
    fn scherk_fd_gradient_matches_closed_form() {
        // d/dx log cos x = -tan x
        let e = build("scherk", &Params::new()).unwrap();
        let j = e.surface.without_derivatives().jet(&[0.3, 0.1]).unwrap();
        assert!((j.gradient[0] + 0.3f64.tan()).abs() < 1e-6);
        assert!((j.gradient[1] - 0.1f64.tan()).abs() < 1e-6);
    }

    #[test]
    fn sphere_apex_curvature() {
        let e = build("sphere", &Params::new()).unwrap();
        assert_relative_eq!(e.surface.mean_curvature(&[0.0, 0.0]).unwrap(), 1.0, epsilon = 1e-14);
        // finite differences off the apex
        let fd = e.surface.without_derivatives().mean_curvature(&[0.3, -0.2]).unwrap();
        assert_relative_eq!(fd, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn orientation_param_flips_exact_curvature() {
        let e = build("sphere", &params(&[("orientation", &[-1.0])])).unwrap();
        assert_eq!(e.exact_curvature_at(&[0.0, 0.0]), Some(-1.0));
        assert_eq!(e.surface.mean_curvature(&[0.0, 0.0]).unwrap(), -1.0);
    }

    #[test]
    fn tilt_sets_slope() {
        let e = build("plane", &params(&[("tilt_deg", &[30.0])])).unwrap();
        let j = e.surface.jet(&[0.0, 0.0]).unwrap();
        assert_relative_eq!(j.gradient[0], 30f64.to_radians().tan(), epsilon = 1e-15);
    }

    #[test]
    fn catenoid_rejects_neck() {
        assert!(build("catenoid", &params(&[("xmin", &[0.5])])).is_err());
    }
}
