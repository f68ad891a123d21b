//! Uniform time grids and functions sampled on them.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{param, Error, Result};

/// Uniform grid `x_k = x_min + k dx`, `k = 0..=n_cells`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
}

impl SampleGrid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(param(format!("grid needs finite x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_cells == 0 {
            return Err(param("grid needs at least one cell"));
        }
        Ok(SampleGrid { x_min, x_max, n_cells })
    }

    /// Grid from a start point, a step and a cell count.
    pub fn with_step(x_min: f64, dx: f64, n_cells: usize) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(param(format!("grid step must be positive, got {dx}")));
        }
        Self::new(x_min, x_min + dx * n_cells as f64, n_cells)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_points(&self) -> usize {
        self.n_cells + 1
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        if k == self.n_cells {
            self.x_max
        } else {
            self.x_min + k as f64 * self.dx()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points()).map(|k| self.point(k)).collect()
    }

    /// Index of the node equal to `x` up to a relative slack of `1e-9 dx`.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let dx = self.dx();
        let r = (x - self.x_min) / dx;
        let k = r.round();
        if k < 0.0 || k > self.n_cells as f64 || (r - k).abs() > 1e-9 {
            return None;
        }
        Some(k as usize)
    }

    /// Same as [`index_of`](Self::index_of) but failing with an off-grid error.
    pub fn require_index(&self, x: f64) -> Result<usize> {
        self.index_of(x).ok_or(Error::OffGrid(x))
    }
}

/// Real function sampled on every node of a [`SampleGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: SampleGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: SampleGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::Length(format!(
                "grid has {} points but {} values were given",
                grid.n_points(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(param(format!("grid function value {v} is not finite")));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(grid: SampleGrid, mut f: F) -> Self {
        let values = grid.points().into_iter().map(&mut f).collect();
        GridFunction { grid, values }
    }

    pub fn zeros(grid: SampleGrid) -> Self {
        GridFunction { grid, values: alloc::vec![0.0; grid.n_points()] }
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn from_parts(grid: SampleGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        GridFunction { grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoidal L2 norm.
    pub fn l2_norm(&self) -> f64 {
        self.dot(self).max(0.0).sqrt()
    }

    /// Trapezoidal L2 inner product with a function on the same grid.
    pub fn dot(&self, other: &GridFunction) -> f64 {
        let n = self.values.len();
        let mut s = 0.0;
        for (k, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
            s += w * a * b;
        }
        s * self.grid.dx()
    }

    /// Pointwise `self - other`; the grids must match.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &GridFunction, f: F) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(param("grid functions live on different grids"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(GridFunction { grid: self.grid, values })
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Time reversal `y -> f(-y)` on the mirrored grid.
    pub fn reflect(&self) -> GridFunction {
        let grid = SampleGrid { x_min: -self.grid.x_max, x_max: -self.grid.x_min, n_cells: self.grid.n_cells };
        let mut values = self.values.clone();
        values.reverse();
        GridFunction { grid, values }
    }
}
