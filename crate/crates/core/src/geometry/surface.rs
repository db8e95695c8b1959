use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{BoxDomain, Orientation, Side};
use crate::{Error, Result};

pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>;
pub type MatrixField = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Step for first derivatives by central differences.
const FD_STEP: f64 = 1e-5;
/// Step for second derivatives taken directly from `phi`. A 1e-5 step would
/// leave ~1e-6 of round-off in the Hessian.
const FD_STEP_SECOND: f64 = 1e-4;

/// Value, gradient and Hessian of `phi` at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// A hypersurface in `R^n` given as the graph `x_n = phi(x')` over a box.
#[derive(Clone)]
pub struct GraphSurface {
    ambient_dim: usize,
    phi: ScalarField,
    grad: Option<VectorField>,
    hess: Option<MatrixField>,
    domain: BoxDomain,
    orientation: Orientation,
}

impl fmt::Debug for GraphSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GraphSurface")
            .field("ambient_dim", &self.ambient_dim)
            .field("domain", &self.domain)
            .field("orientation", &self.orientation)
            .field("analytic_gradient", &self.grad.is_some())
            .field("analytic_hessian", &self.hess.is_some())
            .finish()
    }
}

impl GraphSurface {
    pub fn new<F>(domain: BoxDomain, phi: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        GraphSurface {
            ambient_dim: domain.dim() + 1,
            phi: Arc::new(phi),
            grad: None,
            hess: None,
            domain,
            orientation: Orientation::Up,
        }
    }

    pub fn with_gradient<F>(mut self, grad: F) -> Self
    where
        F: Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_hessian<F>(mut self, hess: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.hess = Some(Arc::new(hess));
        self
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    /// Same graph with the opposite normal.
    pub fn flipped(&self) -> Self {
        self.clone().with_orientation(self.orientation.flipped())
    }

    /// Drops the analytic derivative oracles, forcing finite differences.
    pub fn without_derivatives(&self) -> Self {
        GraphSurface {
            grad: None,
            hess: None,
            ..self.clone()
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn chart_dim(&self) -> usize {
        self.ambient_dim - 1
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    /// `phi(x')` without the domain check. Callers must have validated `x'`.
    #[inline]
    pub(crate) fn height_unchecked(&self, x: &[f64]) -> f64 {
        (self.phi)(x)
    }

    pub fn height(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok((self.phi)(x))
    }

    /// The point `(x', phi(x'))` on the surface.
    pub fn point_on(&self, x: &[f64]) -> Result<Vec<f64>> {
        let h = self.height(x)?;
        let mut p = x.to_vec();
        p.push(h);
        Ok(p)
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { point: x.to_vec() })
        }
    }

    fn fd_step(x: &[f64], base: f64) -> f64 {
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        base.max(base * scale)
    }

    /// The 2-jet of `phi` at `x'`. Supplied oracles are used when present,
    /// central differences otherwise.
    pub fn jet(&self, x: &[f64]) -> Result<Jet> {
        self.check(x)?;
        let d = self.chart_dim();
        let value = (self.phi)(x);

        let h1 = Self::fd_step(x, FD_STEP);
        let gradient = match &self.grad {
            Some(g) => g(x),
            None => {
                self.check_stencil(x, h1)?;
                self.central_gradient(x, h1)
            }
        };

        let hessian = match (&self.hess, &self.grad) {
            (Some(h), _) => h(x),
            (None, Some(g)) => {
                self.check_stencil(x, h1)?;
                let mut m = DMatrix::zeros(d, d);
                let mut xp = x.to_vec();
                for j in 0..d {
                    xp[j] = x[j] + h1;
                    let gp = g(&xp);
                    xp[j] = x[j] - h1;
                    let gm = g(&xp);
                    xp[j] = x[j];
                    for i in 0..d {
                        m[(i, j)] = (gp[i] - gm[i]) / (2.0 * h1);
                    }
                }
                (&m + m.transpose()) * 0.5
            }
            (None, None) => {
                let h2 = Self::fd_step(x, FD_STEP_SECOND);
                self.check_stencil(x, h2)?;
                self.nested_hessian(x, value, h2)
            }
        };

        Ok(Jet {
            value,
            gradient,
            hessian,
        })
    }

    fn check_stencil(&self, x: &[f64], h: f64) -> Result<()> {
        if self.domain.contains_with_margin(x, h) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { point: x.to_vec() })
        }
    }

    fn central_gradient(&self, x: &[f64], h: f64) -> DVector<f64> {
        let mut xp = x.to_vec();
        DVector::from_iterator(
            x.len(),
            (0..x.len()).map(|i| {
                xp[i] = x[i] + h;
                let fp = (self.phi)(&xp);
                xp[i] = x[i] - h;
                let fm = (self.phi)(&xp);
                xp[i] = x[i];
                (fp - fm) / (2.0 * h)
            }),
        )
    }

    fn nested_hessian(&self, x: &[f64], f0: f64, h: f64) -> DMatrix<f64> {
        let d = x.len();
        let mut m = DMatrix::zeros(d, d);
        let mut xp = x.to_vec();
        let eval = |xp: &mut Vec<f64>, di: usize, si: f64, dj: usize, sj: f64| {
            xp[di] += si;
            xp[dj] += sj;
            let v = (self.phi)(xp);
            xp[di] = x[di];
            xp[dj] = x[dj];
            v
        };
        for i in 0..d {
            let fp = eval(&mut xp, i, h, i, 0.0);
            let fm = eval(&mut xp, i, -h, i, 0.0);
            m[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in 0..i {
                let fpp = eval(&mut xp, i, h, j, h);
                let fpm = eval(&mut xp, i, h, j, -h);
                let fmp = eval(&mut xp, i, -h, j, h);
                let fmm = eval(&mut xp, i, -h, j, -h);
                let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// Mean curvature `H = div(grad phi / sqrt(1 + |grad phi|^2)) / (n - 1)`,
    /// signed by the orientation.
    pub fn mean_curvature(&self, x: &[f64]) -> Result<f64> {
        let jet = self.jet(x)?;
        Ok(self.orientation.sign() * mean_curvature_from_derivatives(&jet.gradient, &jet.hessian))
    }

    /// Classifies `y in R^n` by the exact sign of `y_n - phi(y')`.
    pub fn side_of(&self, y: &[f64]) -> Result<Side> {
        if y.len() != self.ambient_dim {
            return Err(Error::invalid(format!(
                "point has dimension {}, surface lives in R^{}",
                y.len(),
                self.ambient_dim
            )));
        }
        self.check(&y[..self.ambient_dim - 1])?;
        Ok(self.side_of_unchecked(y))
    }

    #[inline]
    pub(crate) fn side_of_unchecked(&self, y: &[f64]) -> Side {
        let n = self.ambient_dim;
        let d = y[n - 1] - (self.phi)(&y[..n - 1]);
        let d = match self.orientation {
            Orientation::Up => d,
            Orientation::Down => -d,
        };
        if d > 0.0 {
            Side::Above
        } else if d < 0.0 {
            Side::Below
        } else {
            Side::On
        }
    }

    /// The dilation `phi_s(x') = s * phi(x' / s)` over the scaled domain.
    pub fn dilated(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!("dilation factor must be positive, got {s}")));
        }
        let phi = self.phi.clone();
        let unscale = move |x: &[f64]| -> Vec<f64> { x.iter().map(|v| v / s).collect() };
        let grad = self.grad.clone().map(|g| {
            Arc::new(move |x: &[f64]| g(&unscale(x))) as VectorField
        });
        let hess = self.hess.clone().map(|h| {
            Arc::new(move |x: &[f64]| h(&unscale(x)) / s) as MatrixField
        });
        Ok(GraphSurface {
            ambient_dim: self.ambient_dim,
            phi: Arc::new(move |x: &[f64]| {
                let y: Vec<f64> = x.iter().map(|v| v / s).collect();
                s * phi(&y)
            }),
            grad,
            hess,
            domain: self.domain.scaled(s),
            orientation: self.orientation,
        })
    }
}

/// Unsigned mean curvature of a graph from its gradient and Hessian:
/// `[(1+|g|^2) tr(D2) - g^T D2 g] / ((n-1) (1+|g|^2)^{3/2})`.
pub fn mean_curvature_from_derivatives(gradient: &DVector<f64>, hessian: &DMatrix<f64>) -> f64 {
    let d = gradient.len() as f64;
    let q = 1.0 + gradient.norm_squared();
    let num = q * hessian.trace() - (gradient.transpose() * hessian * gradient)[(0, 0)];
    num / (d * q * q.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bowl() -> GraphSurface {
        GraphSurface::new(BoxDomain::cube(2, 1.0).unwrap(), |x| {
            0.5 * (x[0] * x[0] + 3.0 * x[1] * x[1])
        })
    }

    #[test]
    fn fd_jet_of_quadratic() {
        let j = bowl().jet(&[0.2, -0.1]).unwrap();
        assert_relative_eq!(j.gradient[0], 0.2, epsilon = 1e-9);
        assert_relative_eq!(j.gradient[1], -0.3, epsilon = 1e-9);
        assert_relative_eq!(j.hessian[(0, 0)], 1.0, epsilon = 1e-6);
        assert_relative_eq!(j.hessian[(1, 1)], 3.0, epsilon = 1e-6);
        assert!(j.hessian[(0, 1)].abs() < 1e-6);
    }

    #[test]
    fn stencil_leaving_box_is_out_of_domain() {
        let err = bowl().jet(&[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { .. }));
        assert!(matches!(bowl().height(&[1.5, 0.0]), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn bowl_has_positive_curvature_and_flip_negates() {
        let s = bowl();
        let h = s.mean_curvature(&[0.0, 0.0]).unwrap();
        assert_relative_eq!(h, 2.0, epsilon = 1e-6);
        let hf = s.flipped().mean_curvature(&[0.0, 0.0]).unwrap();
        assert_eq!(hf, -h);
    }

    #[test]
    fn side_respects_orientation() {
        let s = bowl();
        assert_eq!(s.side_of(&[0.0, 0.0, 0.5]).unwrap(), Side::Above);
        assert_eq!(s.side_of(&[0.0, 0.0, 0.0]).unwrap(), Side::On);
        assert_eq!(s.flipped().side_of(&[0.0, 0.0, 0.5]).unwrap(), Side::Below);
        assert!(s.side_of(&[0.0, 0.5]).is_err());
    }
}
