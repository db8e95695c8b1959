//! Uniform rectangular grids, nodal functions and their text format.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::geometry::{BoxDomain, GraphSurface};
use crate::{Error, Result};

/// `m x m` nodes on `[x0, x1] x [y0, y1]`, boundary included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub m: usize,
}

impl Grid2D {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64, m: usize) -> Result<Self> {
        if m < 5 {
            return Err(Error::invalid(format!("grid needs m >= 5, got {m}")));
        }
        if !(x1 > x0 && y1 > y0) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid(format!("degenerate rectangle [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Grid2D { x0, x1, y0, y1, m })
    }

    pub fn square(lo: f64, hi: f64, m: usize) -> Result<Self> {
        Self::new(lo, hi, lo, hi, m)
    }

    pub fn hx(&self) -> f64 {
        (self.x1 - self.x0) / (self.m - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y1 - self.y0) / (self.m - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.m - 1 { self.x1 } else { self.x0 + i as f64 * self.hx() }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j == self.m - 1 { self.y1 } else { self.y0 + j as f64 * self.hy() }
    }

    /// Row-major index: `j` selects the row (y), `i` the column (x).
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.m + i
    }

    pub fn len(&self) -> usize {
        self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.m - 1 || j == self.m - 1
    }

    pub fn interior_count(&self) -> usize {
        (self.m - 2) * (self.m - 2)
    }

    /// Position of an interior node in the unknown vector, `None` on the boundary.
    pub fn interior_index(&self, i: usize, j: usize) -> Option<usize> {
        (!self.is_boundary(i, j)).then(|| (j - 1) * (self.m - 2) + (i - 1))
    }

    pub fn domain(&self) -> BoxDomain {
        BoxDomain::new(vec![self.x0, self.y0], vec![self.x1, self.y1]).expect("validated rectangle")
    }
}

/// Nodal values on a grid; boundary nodes carry the Dirichlet data.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid2D) -> Self {
        GridFunction {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.m {
            for i in 0..grid.m {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        GridFunction { grid, values }
    }

    /// Boundary nodes from `g`, interior zero.
    pub fn boundary_from_fn(grid: Grid2D, g: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.m {
            for i in 0..grid.m {
                if grid.is_boundary(i, j) {
                    out.values[grid.index(i, j)] = g(grid.x(i), grid.y(j));
                }
            }
        }
        out
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.index(i, j);
        self.values[k] = v;
    }

    pub fn boundary_values(&self) -> impl Iterator<Item = f64> + '_ {
        let g = self.grid;
        (0..g.len())
            .filter(move |k| g.is_boundary(k % g.m, k / g.m))
            .map(move |k| self.values[k])
    }

    /// Copies the boundary of `other` (same grid) into `self`.
    pub fn with_boundary_of(mut self, other: &GridFunction) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::invalid("grids differ"));
        }
        let g = self.grid;
        for k in 0..g.len() {
            if g.is_boundary(k % g.m, k / g.m) {
                self.values[k] = other.values[k];
            }
        }
        Ok(self)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Adds `amplitude * (1 - rho^2/width^2)^4` (zero for `rho >= width`) at
    /// interior nodes, `rho` the distance to `center`.
    pub fn with_bump(mut self, center: [f64; 2], amplitude: f64, width: f64) -> Self {
        let g = self.grid;
        for j in 1..g.m - 1 {
            for i in 1..g.m - 1 {
                let rho2 = (g.x(i) - center[0]).powi(2) + (g.y(j) - center[1]).powi(2);
                let s = 1.0 - rho2 / (width * width);
                if s > 0.0 {
                    self.values[g.index(i, j)] += amplitude * s.powi(4);
                }
            }
        }
        self
    }

    /// Piecewise bicubic Lagrange interpolant on 4x4 node stencils.
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        let (i0, tx) = stencil(x, g.x0, g.hx(), g.m);
        let (j0, ty) = stencil(y, g.y0, g.hy(), g.m);
        let wx = lagrange4(tx);
        let wy = lagrange4(ty);
        let mut out = 0.0;
        for (b, wyb) in wy.iter().enumerate() {
            let mut row = 0.0;
            for (a, wxa) in wx.iter().enumerate() {
                row += wxa * self.at(i0 + a, j0 + b);
            }
            out += wyb * row;
        }
        out
    }

    /// The interpolant as a surface graph in `R^3`, derivatives by finite
    /// differences.
    pub fn to_surface(&self) -> GraphSurface {
        let me = Arc::new(self.clone());
        GraphSurface::new(self.grid.domain(), move |x: &[f64]| me.interpolate(x[0], x[1]))
    }

    /// Plain-text matrix format: `m <m>`, `rect <x0> <x1> <y0> <y1>`, then `m`
    /// rows (increasing y) of `m` values at shortest round-trip precision.
    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let mut s = String::new();
        writeln!(s, "m {}", g.m).unwrap();
        writeln!(s, "rect {} {} {} {}", g.x0, g.x1, g.y0, g.y1).unwrap();
        for j in 0..g.m {
            let row: Vec<String> = (0..g.m).map(|i| format!("{}", self.at(i, j))).collect();
            writeln!(s, "{}", row.join(" ")).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let parse = |t: &str| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad number `{t}`: {e}")));
        let m_line = lines.next().ok_or_else(|| Error::Parse("empty grid file".into()))?;
        let m = match m_line.split_whitespace().collect::<Vec<_>>()[..] {
            ["m", v] => v.parse::<usize>().map_err(|e| Error::Parse(format!("bad m `{v}`: {e}")))?,
            _ => return Err(Error::Parse(format!("expected `m <size>`, got `{m_line}`"))),
        };
        let rect_line = lines.next().ok_or_else(|| Error::Parse("missing rect line".into()))?;
        let rect = match rect_line.split_whitespace().collect::<Vec<_>>()[..] {
            ["rect", a, b, c, d] => [parse(a)?, parse(b)?, parse(c)?, parse(d)?],
            _ => return Err(Error::Parse(format!("expected `rect a b c d`, got `{rect_line}`"))),
        };
        let grid = Grid2D::new(rect[0], rect[1], rect[2], rect[3], m)?;
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..m {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing row {j}")))?;
            let row: Vec<f64> = line.split_whitespace().map(parse).collect::<Result<_>>()?;
            if row.len() != m {
                return Err(Error::Parse(format!("row {j} has {} values, expected {m}", row.len())));
            }
            values.extend(row);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("trailing content `{extra}`")));
        }
        Ok(GridFunction { grid, values })
    }
}

/// First node of the 4-node stencil around `x` and the local coordinate
/// relative to the stencil's second node.
fn stencil(x: f64, x0: f64, h: f64, m: usize) -> (usize, f64) {
    let s = (x - x0) / h;
    let cell = (s.floor().max(0.0) as usize).min(m - 2);
    let first = cell.clamp(1, m - 3) - 1;
    (first, s - (first + 1) as f64)
}

/// Cubic Lagrange weights for nodes at -1, 0, 1, 2.
fn lagrange4(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation_and_indexing() {
        assert!(Grid2D::square(0.0, 1.0, 4).is_err());
        assert!(Grid2D::new(1.0, 0.0, 0.0, 1.0, 5).is_err());
        let g = Grid2D::square(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.hx(), 0.5);
        assert_eq!(g.x(4), 1.0);
        assert_eq!(g.interior_index(1, 1), Some(0));
        assert_eq!(g.interior_index(3, 2), Some(5));
        assert_eq!(g.interior_index(0, 2), None);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let g = Grid2D::new(-1.0, 1.0, 0.0, 0.3, 6).unwrap();
        let f = GridFunction::from_fn(g, |x, y| (x * 3.1).sin() + y / 7.0);
        let back = GridFunction::from_text(&f.to_text()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn malformed_text_rejected() {
        assert!(GridFunction::from_text("m 5\nrect 0 1 0 1\n1 2 3 4 5\n").is_err());
        assert!(GridFunction::from_text("n 5\n").is_err());
        assert!(GridFunction::from_text("m 5\nrect 0 1 0\n").is_err());
    }

    #[test]
    fn bicubic_reproduces_cubics() {
        let g = Grid2D::square(0.0, 1.0, 9).unwrap();
        let p = |x: f64, y: f64| x * x * x - 2.0 * x * y * y + y - 0.5;
        let f = GridFunction::from_fn(g, p);
        for &(x, y) in &[(0.01, 0.99), (0.37, 0.52), (0.5, 0.5), (0.93, 0.04), (1.0, 1.0)] {
            assert!((f.interpolate(x, y) - p(x, y)).abs() < 1e-13);
        }
    }

    #[test]
    fn bump_leaves_boundary_alone() {
        let g = Grid2D::square(-1.0, 1.0, 9).unwrap();
        let f = GridFunction::zeros(g).with_bump([0.0, 0.0], 0.1, 0.5);
        assert_eq!(f.at(4, 4), 0.1);
        assert!(f.boundary_values().all(|v| v == 0.0));
    }
}
