//! Fourier-multiplier derivatives and midpoint quadrature.

use rustfft::num_complex::Complex64;

use super::fft::{Direction, Fft3};
use super::grid::{Field, Grid};
use crate::error::Result;

const PAIRWISE_BLOCK: usize = 64;

/// Fixed-shape pairwise summation; the result depends only on the input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn pairwise_sum_map(xs: &[f64], ys: &[f64], f: impl Fn(f64, f64) -> f64 + Copy) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().zip(ys).map(|(&a, &b)| f(a, b)).sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_map(&xs[..mid], &ys[..mid], f) + pairwise_sum_map(&xs[mid..], &ys[mid..], f)
}

/// `h^3 sum f`.
pub fn integrate(f: &Field) -> f64 {
    f.grid.cell_volume() * pairwise_sum(&f.values)
}

/// `h^3 sum f g`.
pub fn inner(f: &Field, g: &Field) -> Result<f64> {
    f.check_same_grid(g)?;
    Ok(f.grid.cell_volume() * pairwise_sum_map(&f.values, &g.values, |a, b| a * b))
}

pub fn l2_norm_sq(f: &Field) -> f64 {
    f.grid.cell_volume() * pairwise_sum_map(&f.values, &f.values, |a, _| a * a)
}

pub fn laplacian(f: &Field) -> Field {
    SpectralOps::new(f.grid).laplacian(f)
}

/// `|grad f|_2^2` evaluated in Parseval form with the multiplier `|k|^2`.
pub fn grad_norm_sq(f: &Field) -> f64 {
    SpectralOps::new(f.grid).grad_norm_sq(f)
}

/// Plans and multiplier tables for one grid.
pub struct SpectralOps {
    grid: Grid,
    fft: Fft3,
    k2: Vec<f64>,
}

impl SpectralOps {
    pub fn new(grid: Grid) -> Self {
        let n = grid.n();
        let k = grid.wavenumbers();
        let mut k2 = Vec::with_capacity(grid.len());
        for kx in &k {
            for ky in &k {
                for kz in &k {
                    k2.push(kx * kx + ky * ky + kz * kz);
                }
            }
        }
        SpectralOps { grid, fft: Fft3::new(n), k2 }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `|k|^2` in FFT order.
    pub fn k_squared(&self) -> &[f64] {
        &self.k2
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.fft.process(data, Direction::Forward);
    }

    /// Normalized inverse.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.fft.process(data, Direction::Inverse);
        let s = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= s);
    }

    /// Applies a real, even Fourier multiplier to two real fields at once.
    pub fn apply_multiplier_pair(&self, f: &Field, g: &Field, mult: &[f64]) -> (Field, Field) {
        let mut data: Vec<Complex64> =
            f.values.iter().zip(&g.values).map(|(&a, &b)| Complex64::new(a, b)).collect();
        self.forward(&mut data);
        for (c, &m) in data.iter_mut().zip(mult) {
            *c *= m;
        }
        self.inverse(&mut data);
        let re = data.iter().map(|c| c.re).collect();
        let im = data.iter().map(|c| c.im).collect();
        (Field { grid: self.grid, values: re }, Field { grid: self.grid, values: im })
    }

    pub fn apply_multiplier(&self, f: &Field, mult: &[f64]) -> Field {
        let mut data: Vec<Complex64> = f.values.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        self.forward(&mut data);
        for (c, &m) in data.iter_mut().zip(mult) {
            *c *= m;
        }
        self.inverse(&mut data);
        Field { grid: self.grid, values: data.iter().map(|c| c.re).collect() }
    }

    pub fn laplacian(&self, f: &Field) -> Field {
        let mult: Vec<f64> = self.k2.iter().map(|k| -k).collect();
        self.apply_multiplier(f, &mult)
    }

    pub fn laplacian_pair(&self, f: &Field, g: &Field) -> (Field, Field) {
        let mult: Vec<f64> = self.k2.iter().map(|k| -k).collect();
        self.apply_multiplier_pair(f, g, &mult)
    }

    pub fn grad_norm_sq(&self, f: &Field) -> f64 {
        let mut data: Vec<Complex64> = f.values.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        self.forward(&mut data);
        let weighted: Vec<f64> = data.iter().zip(&self.k2).map(|(c, k)| k * c.norm_sqr()).collect();
        self.grid.cell_volume() * pairwise_sum(&weighted) / self.grid.len() as f64
    }

    /// Spectral partial derivative along `axis` (0 = x, 1 = y, 2 = z); the
    /// Nyquist mode is dropped so that the result stays real.
    pub fn partial(&self, f: &Field, axis: usize) -> Field {
        let n = self.grid.n();
        let k = self.grid.wavenumbers();
        let mut data: Vec<Complex64> = f.values.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        self.forward(&mut data);
        for (i, c) in data.iter_mut().enumerate() {
            let j = [i / (n * n), (i / n) % n, i % n][axis];
            let kj = if j == n / 2 { 0.0 } else { k[j] };
            *c *= Complex64::new(0.0, kj);
        }
        self.inverse(&mut data);
        Field { grid: self.grid, values: data.iter().map(|c| c.re).collect() }
    }

    /// Solves `(c_u - d_u Lap) x = f` and `(c_v - d_v Lap) y = g`.
    pub fn solve_helmholtz_pair(
        &self,
        f: &Field,
        g: &Field,
        (d_u, c_u): (f64, f64),
        (d_v, c_v): (f64, f64),
    ) -> (Field, Field) {
        let mut data: Vec<Complex64> =
            f.values.iter().zip(&g.values).map(|(&a, &b)| Complex64::new(a, b)).collect();
        self.forward(&mut data);
        // (x + i y)^ = X + iY with X, Y hermitian; split, scale, recombine
        let n = self.grid.n();
        let neg = |i: usize| (n - i) % n;
        let mut out = vec![Complex64::default(); data.len()];
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let i = (x * n + y) * n + z;
                    let j = (neg(x) * n + neg(y)) * n + neg(z);
                    let a = data[i];
                    let b = data[j].conj();
                    let fu = (a + b) * 0.5;
                    let fv = (a - b) * Complex64::new(0.0, -0.5);
                    let k2 = self.k2[i];
                    out[i] = fu / (c_u + d_u * k2) + Complex64::new(0.0, 1.0) * fv / (c_v + d_v * k2);
                }
            }
        }
        self.inverse(&mut out);
        let re = out.iter().map(|c| c.re).collect();
        let im = out.iter().map(|c| c.im).collect();
        (Field { grid: self.grid, values: re }, Field { grid: self.grid, values: im })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_field(grid: Grid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Field::from_values(grid, values).unwrap()
    }

    #[test]
    fn constant_field() {
        let grid = Grid::new(16, 1.5).unwrap();
        let f = grid.sample(|_, _, _| 2.5);
        assert!(laplacian(&f).max_abs() < 1e-13);
        assert!(grad_norm_sq(&f).abs() < 1e-20);
        assert!((integrate(&f) - 2.5 * 27.0).abs() < 1e-12);
    }

    #[test]
    fn single_sine_mode() {
        let l = 2.0;
        let grid = Grid::new(16, l).unwrap();
        let f = grid.sample(|x, _, _| (PI * x / l).sin());
        let want = (PI / l).powi(2) * (2.0 * l).powi(3) / 2.0;
        assert!((grad_norm_sq(&f) - want).abs() < 1e-12 * want);
        let lap = laplacian(&f);
        let expect = f.scaled(-(PI / l).powi(2));
        for (a, b) in lap.values().iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn integration_by_parts_on_random_fields() {
        let grid = Grid::new(16, 3.0).unwrap();
        let ops = SpectralOps::new(grid);
        for seed in 0..5 {
            let f = random_field(grid, seed);
            let g = random_field(grid, seed + 100);
            let lhs = -inner(&ops.laplacian(&f), &f).unwrap();
            let rhs = ops.grad_norm_sq(&f);
            assert!((lhs - rhs).abs() < 1e-12 * rhs);
            // symmetry of the Laplacian
            let a = inner(&ops.laplacian(&f), &g).unwrap();
            let b = inner(&f, &ops.laplacian(&g)).unwrap();
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn packed_pair_matches_single_transforms() {
        let grid = Grid::new(8, 1.0).unwrap();
        let ops = SpectralOps::new(grid);
        let f = random_field(grid, 7);
        let g = random_field(grid, 8);
        let (lf, lg) = ops.laplacian_pair(&f, &g);
        let lf1 = ops.laplacian(&f);
        let lg1 = ops.laplacian(&g);
        for (a, b) in lf.values().iter().zip(lf1.values()).chain(lg.values().iter().zip(lg1.values())) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn helmholtz_solve_inverts_operator() {
        let grid = Grid::new(16, 2.0).unwrap();
        let ops = SpectralOps::new(grid);
        let f = random_field(grid, 3);
        let g = random_field(grid, 4);
        let (x, y) = ops.solve_helmholtz_pair(&f, &g, (2.0, 1.0), (0.5, 3.0));
        let (lx, ly) = ops.laplacian_pair(&x, &y);
        let rf = x.scaled(1.0).add_scaled(-2.0, &lx).unwrap();
        let rg = y.scaled(3.0).add_scaled(-0.5, &ly).unwrap();
        for (a, b) in rf.values().iter().zip(f.values()).chain(rg.values().iter().zip(g.values())) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn partial_derivative_of_mode() {
        let l = 2.0;
        let grid = Grid::new(16, l).unwrap();
        let ops = SpectralOps::new(grid);
        let f = grid.sample(|_, y, _| (PI * y / l).sin());
        let d = ops.partial(&f, 1);
        let want = grid.sample(|_, y, _| PI / l * (PI * y / l).cos());
        for (a, b) in d.values().iter().zip(want.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(ops.partial(&f, 0).max_abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_is_accurate() {
        let xs: Vec<f64> = (0..100_000).map(|i| 0.1 + (i % 7) as f64 * 1e-3).collect();
        let exact: f64 = (0..100_000).map(|i| 0.1 + (i % 7) as f64 * 1e-3).sum::<f64>();
        assert!((pairwise_sum(&xs) - exact).abs() < 1e-8);
    }
}
