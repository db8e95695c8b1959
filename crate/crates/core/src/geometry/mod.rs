//! Graph hypersurfaces `x_n = phi(x')`, their differential data and the
//! two-valued jump function across them.
//!
//! Sign convention: the unit normal has positive `x_n` component when the
//! orientation is [`Orientation::Up`], `Omega+` is the side the normal points
//! into, and a convex bowl opening towards `+x_n` has positive mean
//! curvature. Flipping the orientation swaps the sides and negates `H`.

pub mod catalog;
mod jump;
mod surface;

pub use catalog::{CatalogEntry, Params};
pub use jump::JumpFunction;
pub use surface::{
    mean_curvature_from_derivatives, GraphSurface, Jet, MatrixField, ScalarField, VectorField,
};

use crate::{Error, Result};

/// Sign of the `x_n` component of the chosen normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Up,
    Down,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Up => 1.0,
            Orientation::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Up => Orientation::Down,
            Orientation::Down => Orientation::Up,
        }
    }

    pub fn from_sign(s: f64) -> Result<Self> {
        if s == 1.0 {
            Ok(Orientation::Up)
        } else if s == -1.0 {
            Ok(Orientation::Down)
        } else {
            Err(Error::invalid(format!("orientation must be +1 or -1, got {s}")))
        }
    }
}

/// Position of a point relative to the surface, measured along the normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Above,
    Below,
    On,
}

impl Side {
    /// Dense index used by the sampling counters.
    pub const fn index(self) -> usize {
        match self {
            Side::Above => 0,
            Side::Below => 1,
            Side::On => 2,
        }
    }

    pub const ALL: [Side; 3] = [Side::Above, Side::Below, Side::On];
}

/// Axis-aligned box in the chart space `R^{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::invalid("box bounds must be non-empty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::invalid(format!("degenerate box {lo:?} .. {hi:?}")));
        }
        Ok(BoxDomain { lo, hi })
    }

    /// The cube `[-h, h]^dim`.
    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        BoxDomain::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Closed-box membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Whether the closed `margin`-neighbourhood of `x` (in every axis) fits.
    pub fn contains_with_margin(&self, x: &[f64], margin: f64) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *a <= *v - margin && *v + margin <= *b)
    }

    /// Distance from `x` to the box boundary (negative outside).
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (a, b))| (v - a).min(b - v))
            .fold(f64::INFINITY, f64::min)
    }

    /// The box dilated by `s` about the origin.
    pub fn scaled(&self, s: f64) -> Self {
        let (lo, hi): (Vec<f64>, Vec<f64>) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| if s > 0.0 { (a * s, b * s) } else { (b * s, a * s) })
            .unzip();
        BoxDomain { lo, hi }
    }
}
