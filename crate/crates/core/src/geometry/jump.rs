use super::{GraphSurface, Side};
use crate::Result;

/// `f_S`: `alpha_plus` above the surface, `alpha_minus` below, the midpoint on it.
#[derive(Debug, Clone)]
pub struct JumpFunction {
    pub surface: GraphSurface,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

impl JumpFunction {
    pub fn new(surface: GraphSurface, alpha_plus: f64, alpha_minus: f64) -> Self {
        JumpFunction {
            surface,
            alpha_plus,
            alpha_minus,
        }
    }

    /// The +1/-1 jump across `surface`.
    pub fn unit(surface: GraphSurface) -> Self {
        JumpFunction::new(surface, 1.0, -1.0)
    }

    pub fn on_surface_value(&self) -> f64 {
        0.5 * (self.alpha_plus + self.alpha_minus)
    }

    pub fn value_on(&self, side: Side) -> f64 {
        match side {
            Side::Above => self.alpha_plus,
            Side::Below => self.alpha_minus,
            Side::On => self.on_surface_value(),
        }
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        Ok(self.value_on(self.surface.side_of(y)?))
    }

    pub fn ambient_dim(&self) -> usize {
        self.surface.ambient_dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxDomain;

    fn halfspace() -> GraphSurface {
        GraphSurface::new(BoxDomain::cube(2, 1.0).unwrap(), |_| 0.0)
    }

    #[test]
    fn unit_jump_values() {
        let f = JumpFunction::unit(halfspace());
        assert_eq!(f.eval(&[0.1, 0.2, 0.5]).unwrap(), 1.0);
        assert_eq!(f.eval(&[0.1, 0.2, 0.0]).unwrap(), 0.0);
        assert_eq!(f.eval(&[0.1, 0.2, -1e-300]).unwrap(), -1.0);
    }

    #[test]
    fn asymmetric_levels() {
        let f = JumpFunction::new(halfspace(), 3.0, 1.0);
        assert_eq!(f.eval(&[0.0, 0.0, -0.2]).unwrap(), 1.0);
        assert_eq!(f.eval(&[0.0, 0.0, 0.0]).unwrap(), 2.0);
    }
}
