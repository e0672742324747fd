//! Uniform periodic grids and nodal fields on them.
//!
//! Nodes sit at `-L + i h` for `i = 0..n` in both directions, so `x2 = 0` is
//! the grid row `n / 2` and the reflection `x2 -> -x2` maps row `j` to row
//! `(n - j) mod n` exactly.

use crate::dipole::Point;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub half_extent: f64,
    pub h: f64,
}

impl Grid {
    pub fn new(n: usize, half_extent: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return domain(format!("grid size n = {n} must be a power of two >= 16"));
        }
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return domain(format!("half extent L = {half_extent} must be positive"));
        }
        Ok(Grid {
            n,
            half_extent,
            h: 2.0 * half_extent / n as f64,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_extent + i as f64 * self.h
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Point {
        [self.coord(i), self.coord(j)]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Row holding `x2 = 0`.
    #[inline]
    pub fn axis_row(&self) -> usize {
        self.n / 2
    }

    #[inline]
    pub fn mirror_row(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }

    /// Rows with `x2 > 0`.
    pub fn upper_rows(&self) -> std::ops::Range<usize> {
        self.n / 2 + 1..self.n
    }

    /// Node index nearest to a coordinate, wrapped periodically.
    pub fn nearest(&self, x: f64) -> usize {
        let k = ((x + self.half_extent) / self.h).round() as i64;
        k.rem_euclid(self.n as i64) as usize
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_extent * self.half_extent
    }

    /// Whether the closed disc of radius `r` around `c` lies inside `[-L, L)^2`
    /// without touching the periodic seam.
    pub fn contains_disc(&self, c: Point, r: f64) -> bool {
        let l = self.half_extent;
        c[0] - r > -l && c[0] + r < l - self.h && c[1] - r > -l && c[1] + r < l - self.h
    }
}

/// Real nodal values, row-major with `x1` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return domain(format!("field has {} values, grid needs {}", values.len(), grid.len()));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return domain(format!("non-finite value at node {k}"));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.n {
            for i in 0..grid.n {
                values.push(f(grid.point(i, j)));
            }
        }
        ScalarField { grid, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Discrete `L^2` norm over the whole box.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    /// `sum |f| h^2` over nodes with `x2 > 0`.
    pub fn l1_upper(&self) -> f64 {
        self.upper_sum(|_, v| v.abs())
    }

    /// `sum w(x2, f) h^2` over nodes with `x2 > 0`.
    pub fn upper_sum(&self, w: impl Fn(f64, f64) -> f64) -> f64 {
        let g = self.grid;
        let mut s = 0.0;
        for j in g.upper_rows() {
            let x2 = g.coord(j);
            let row = &self.values[j * g.n..(j + 1) * g.n];
            s += row.iter().map(|&v| w(x2, v)).sum::<f64>();
        }
        s * g.cell_area()
    }

    /// Largest `|f(x1, x2) + f(x1, -x2)|` over the grid.
    pub fn odd_symmetry_residual(&self) -> f64 {
        let g = self.grid;
        let mut r: f64 = 0.0;
        for j in 0..g.n {
            let jm = g.mirror_row(j);
            for i in 0..g.n {
                r = r.max((self.at(i, j) + self.at(i, jm)).abs());
            }
        }
        r
    }

    /// Projects onto odd functions of `x2`: `f <- (f(x1, x2) - f(x1, -x2)) / 2`.
    /// Rows `x2 = 0` and `x2 = -L` become exactly zero.
    pub fn symmetrize_odd(&mut self) {
        let g = self.grid;
        let n = g.n;
        for j in 0..=n / 2 {
            let jm = g.mirror_row(j);
            for i in 0..n {
                let a = self.values[j * n + i];
                let b = self.values[jm * n + i];
                let v = 0.5 * (a - b);
                self.values[j * n + i] = v;
                self.values[jm * n + i] = -v;
            }
        }
        for i in 0..n {
            self.values[g.axis_row() * n + i] = 0.0;
            self.values[i] = 0.0;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            grid,
            u1: vec![0.0; grid.len()],
            u2: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> Point) -> Self {
        let mut v = VectorField::zeros(grid);
        for j in 0..grid.n {
            for i in 0..grid.n {
                let u = f(grid.point(i, j));
                let k = grid.index(i, j);
                v.u1[k] = u[0];
                v.u2[k] = u[1];
            }
        }
        v
    }

    pub fn max_magnitude(&self) -> f64 {
        self.u1
            .iter()
            .zip(&self.u2)
            .fold(0.0, |m: f64, (a, b)| m.max(a.hypot(*b)))
    }

    /// `max |u - (shift, 0)|`.
    pub fn max_relative_speed(&self, shift: f64) -> f64 {
        self.u1
            .iter()
            .zip(&self.u2)
            .fold(0.0, |m: f64, (a, b)| m.max((a - shift).hypot(*b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(8, 1.0).is_err());
        assert!(Grid::new(48, 1.0).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        let g = Grid::new(64, 8.0).unwrap();
        assert_eq!(g.h * g.n as f64, 16.0);
        assert_eq!(g.coord(g.axis_row()), 0.0);
        assert_eq!(g.coord(g.mirror_row(40)), -g.coord(40));
    }

    #[test]
    fn symmetrize_makes_field_odd() {
        let g = Grid::new(32, 2.0).unwrap();
        let mut f = ScalarField::from_fn(g, |x| (x[0] + 0.3 * x[1]).sin() + x[1]);
        assert!(f.odd_symmetry_residual() > 0.1);
        f.symmetrize_odd();
        assert_eq!(f.odd_symmetry_residual(), 0.0);
        assert!((0..g.n).all(|i| f.at(i, g.axis_row()) == 0.0));
    }

    #[test]
    fn nearest_wraps() {
        let g = Grid::new(16, 1.0).unwrap();
        assert_eq!(g.nearest(0.0), 8);
        assert_eq!(g.nearest(1.0), 0);
        assert_eq!(g.nearest(-1.0), 0);
    }
}
