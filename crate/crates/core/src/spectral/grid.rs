use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on the cube `[-L, L)^3` with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    #[serde(rename = "L")]
    half_length: f64,
}

impl Grid {
    pub fn new(n: usize, half_length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Range(format!("n = {n} must be a power of two >= 8")));
        }
        if !half_length.is_finite() || half_length <= 0.0 {
            return Err(Error::Range(format!("L = {half_length} must be positive")));
        }
        Ok(Grid { n, half_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    /// Axis coordinates `x_i = -L + i h`.
    pub fn axis(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coordinate(i)).collect()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// Angular wavenumbers in FFT order; the Nyquist entry is `-pi/h`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as isize;
        let dk = std::f64::consts::PI / self.half_length;
        (0..n)
            .map(|j| {
                let s = if j < n / 2 { j } else { j - n };
                s as f64 * dk
            })
            .collect()
    }

    /// Same grid with twice as many points on the same box.
    pub fn refined(&self) -> Grid {
        Grid { n: 2 * self.n, half_length: self.half_length }
    }

    /// Evaluates `f(x, y, z)` at every grid point.
    pub fn sample(&self, f: impl Fn(f64, f64, f64) -> f64) -> Field {
        let axis = self.axis();
        let mut values = Vec::with_capacity(self.len());
        for &x in &axis {
            for &y in &axis {
                for &z in &axis {
                    values.push(f(x, y, z));
                }
            }
        }
        Field { grid: *self, values }
    }
}

/// Real scalar field on a [`Grid`], row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub(crate) grid: Grid,
    pub(crate) values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Size(format!(
                "expected {} values for an n = {} grid, got {}",
                grid.len(),
                grid.n(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Range("field values must be finite".into()));
        }
        Ok(Field { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|&x| f(x)).collect() }
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|x| c * x)
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Ok(Field { grid: self.grid, values })
    }

    pub fn axpy(&mut self, c: f64, other: &Field) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn abs(&self) -> Field {
        self.map(f64::abs)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest magnitude on the outer faces of the box, over the peak magnitude.
    pub fn boundary_ratio(&self) -> f64 {
        let n = self.grid.n;
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let mut edge: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i == 0 || j == 0 || k == 0 || i == n - 1 || j == n - 1 || k == n - 1 {
                        edge = edge.max(self.values[self.grid.index(i, j, k)].abs());
                    }
                }
            }
        }
        edge / peak
    }
}

/// The unknown `(u, v)` of the coupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: Field,
    pub v: Field,
}

impl FieldPair {
    pub fn new(u: Field, v: Field) -> Result<Self> {
        u.check_same_grid(&v)?;
        Ok(FieldPair { u, v })
    }

    pub fn zeros(grid: Grid) -> Self {
        FieldPair { u: Field::zeros(grid), v: Field::zeros(grid) }
    }

    pub fn grid(&self) -> &Grid {
        &self.u.grid
    }

    pub fn add_scaled(&self, c: f64, other: &FieldPair) -> Result<FieldPair> {
        Ok(FieldPair { u: self.u.add_scaled(c, &other.u)?, v: self.v.add_scaled(c, &other.v)? })
    }

    pub fn scaled(&self, c: f64) -> FieldPair {
        FieldPair { u: self.u.scaled(c), v: self.v.scaled(c) }
    }

    pub fn abs(&self) -> FieldPair {
        FieldPair { u: self.u.abs(), v: self.v.abs() }
    }

    pub fn is_zero(&self) -> bool {
        self.u.values.iter().chain(&self.v.values).all(|&x| x == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(8, 1.0).is_ok());
        assert!(Grid::new(12, 1.0).is_err());
        assert!(Grid::new(4, 1.0).is_err());
        assert!(Grid::new(16, 0.0).is_err());
        let g = Grid::new(16, 2.0).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.coordinate(0), -2.0);
        assert_eq!(g.coordinate(8), 0.0);
    }

    #[test]
    fn wavenumbers_in_fft_order() {
        let g = Grid::new(8, std::f64::consts::PI).unwrap();
        assert_eq!(g.wavenumbers(), vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = Field::zeros(Grid::new(8, 1.0).unwrap());
        let b = Field::zeros(Grid::new(8, 2.0).unwrap());
        assert!(matches!(a.add_scaled(1.0, &b), Err(Error::GridMismatch)));
        assert!(FieldPair::new(a, b).is_err());
    }

    #[test]
    fn nonfinite_values_are_rejected() {
        let g = Grid::new(8, 1.0).unwrap();
        let mut v = vec![0.0; g.len()];
        v[3] = f64::NAN;
        assert!(Field::from_values(g, v).is_err());
    }
}
