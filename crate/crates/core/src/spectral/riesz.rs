use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};

use super::fft::{Direction, Fft3};
use super::grid::{Field, Grid};
use super::ops::inner;
use crate::error::{Error, Result};
use crate::model::riesz_normalization;

/// Default cap on the memory the padded convolution may use.
pub const DEFAULT_MEMORY_CAP: usize = 4 << 30;

/// Riesz kernel `A_alpha |x|^{alpha-3}` sampled at the grid displacement
/// `(i, j, k) h`. The origin receives the average of the kernel over a ball
/// of one cell volume.
pub fn kernel_sample(grid: &Grid, alpha: f64, a_alpha: f64, i: i64, j: i64, k: i64) -> f64 {
    let h = grid.spacing();
    if i == 0 && j == 0 && k == 0 {
        return origin_cell_value(h, alpha, a_alpha);
    }
    let r = h * ((i * i + j * j + k * k) as f64).sqrt();
    a_alpha * r.powf(alpha - 3.0)
}

/// `A_alpha 4 pi rho^alpha / (alpha h^3)` with `rho = (3/(4 pi))^{1/3} h`.
pub fn origin_cell_value(h: f64, alpha: f64, a_alpha: f64) -> f64 {
    let rho = (3.0 / (4.0 * PI)).cbrt() * h;
    a_alpha * 4.0 * PI * rho.powf(alpha) / (alpha * h.powi(3))
}

/// `Z(s) = sum_{k != 0} |k|^{-s}` over the integer lattice, continued
/// analytically to `0 < s < 3` through the Ewald split
/// `pi^{-s/2} Gamma(s/2) Z(s) = sum' [G(s/2, pi k^2) + G((3-s)/2, pi k^2)] - 2/s - 2/(3-s)`
/// with `G(a, x) = Gamma(a, x) x^{-a}`.
pub fn lattice_zeta(s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 3.0) {
        return Err(Error::Range(format!("lattice zeta needs 0 < s < 3, got {s}")));
    }
    let (a, b) = (0.5 * s, 0.5 * (3.0 - s));
    let (ga, gb) = (gamma(a), gamma(b));
    let mut sum = 0.0;
    // terms decay like exp(-pi k^2); |k| <= 5 leaves less than 1e-30
    for i in -5i64..=5 {
        for j in -5i64..=5 {
            for k in -5i64..=5 {
                let k2 = (i * i + j * j + k * k) as f64;
                if k2 == 0.0 || k2 > 25.0 {
                    continue;
                }
                let x = PI * k2;
                sum += gamma_ur(a, x) * ga * x.powf(-a) + gamma_ur(b, x) * gb * x.powf(-b);
            }
        }
    }
    Ok((sum - 1.0 / a - 1.0 / b) * PI.powf(a) / ga)
}

/// How the singular origin sample of the kernel is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OriginRule {
    /// Average of the kernel over a ball of one cell volume.
    #[default]
    CellAverage,
    /// `-A_alpha h^{alpha-3} Z(3-alpha)`, which cancels the `O(h^alpha)` term
    /// of the punctured lattice sum for smooth densities.
    LatticeZeta,
}

impl OriginRule {
    pub fn value(self, h: f64, alpha: f64, a_alpha: f64) -> Result<f64> {
        match self {
            OriginRule::CellAverage => Ok(origin_cell_value(h, alpha, a_alpha)),
            OriginRule::LatticeZeta => Ok(-a_alpha * h.powf(alpha - 3.0) * lattice_zeta(3.0 - alpha)?),
        }
    }
}

/// Free-space convolution with the Riesz kernel, evaluated by zero-padding to
/// `(2n)^3` and multiplying in Fourier space.
pub struct RieszOperator {
    alpha: f64,
    grid: Grid,
    a_alpha: f64,
    origin: OriginRule,
    origin_value: f64,
    fft: Fft3,
    /// Transform of the padded kernel samples, times `h^3 / (2n)^3`. Real
    /// because the sample array is real and even.
    kernel_hat: Vec<f64>,
    max_imag_residue: f64,
}

impl RieszOperator {
    pub fn new(grid: Grid, alpha: f64) -> Result<Self> {
        Self::with_memory_cap(grid, alpha, DEFAULT_MEMORY_CAP)
    }

    pub fn with_memory_cap(grid: Grid, alpha: f64, cap: usize) -> Result<Self> {
        Self::build(grid, alpha, OriginRule::CellAverage, cap)
    }

    pub fn with_origin(grid: Grid, alpha: f64, origin: OriginRule) -> Result<Self> {
        Self::build(grid, alpha, origin, DEFAULT_MEMORY_CAP)
    }

    fn build(grid: Grid, alpha: f64, origin: OriginRule, cap: usize) -> Result<Self> {
        let a_alpha = riesz_normalization(alpha)?;
        let origin_value = origin.value(grid.spacing(), alpha, a_alpha)?;
        let m = 2 * grid.n();
        let cells = m * m * m;
        // kernel table, work buffer and the transpose buffer of the x pass
        let needed = cells * (8 + 16 + 16);
        if needed > cap {
            return Err(Error::Allocation { needed, cap });
        }
        let fft = Fft3::new(m);
        let n = grid.n() as i64;
        let disp = |j: usize| -> i64 {
            let j = j as i64;
            if j < n {
                j
            } else {
                j - 2 * n
            }
        };
        let mut data = Vec::with_capacity(cells);
        for x in 0..m {
            for y in 0..m {
                for z in 0..m {
                    let (i, j, k) = (disp(x), disp(y), disp(z));
                    let value = if i == 0 && j == 0 && k == 0 {
                        origin_value
                    } else {
                        kernel_sample(&grid, alpha, a_alpha, i, j, k)
                    };
                    data.push(Complex64::new(value, 0.0));
                }
            }
        }
        fft.process(&mut data, Direction::Forward);
        let weight = grid.cell_volume() / cells as f64;
        let max_abs = data.iter().fold(0.0f64, |a, c| a.max(c.re.abs()));
        let max_imag = data.iter().fold(0.0f64, |a, c| a.max(c.im.abs()));
        let kernel_hat = data.iter().map(|c| c.re * weight).collect();
        Ok(RieszOperator {
            alpha,
            grid,
            a_alpha,
            origin,
            origin_value,
            fft,
            kernel_hat,
            max_imag_residue: max_imag / max_abs,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn normalization(&self) -> f64 {
        self.a_alpha
    }

    pub fn origin_rule(&self) -> OriginRule {
        self.origin
    }

    /// Largest imaginary part of the kernel transform relative to its largest
    /// real part; zero up to roundoff for an even kernel.
    pub fn kernel_imag_residue(&self) -> f64 {
        self.max_imag_residue
    }

    /// Kernel sample for a displacement given in grid steps.
    pub fn kernel_at(&self, i: i64, j: i64, k: i64) -> f64 {
        if i == 0 && j == 0 && k == 0 {
            return self.origin_value;
        }
        kernel_sample(&self.grid, self.alpha, self.a_alpha, i, j, k)
    }

    /// Transforms of the padded kernel in FFT order, including the `h^3/(2n)^3` weight.
    pub fn kernel_hat(&self) -> &[f64] {
        &self.kernel_hat
    }

    /// `h^3 sum_y K(x - y) f(y)` for every grid point `x`.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        if f.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        let zero = Field::zeros(self.grid);
        Ok(self.convolve(f, &zero, false).0)
    }

    /// Convolves two fields with one padded transform pair.
    pub fn apply_pair(&self, f: &Field, g: &Field) -> Result<(Field, Field)> {
        if f.grid != self.grid || g.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.convolve(f, g, false))
    }

    /// `-Lap (I_alpha * f)` with the spectral Laplacian taken on the padded box,
    /// where the free-space potential is defined, and restricted to the grid.
    /// Taking it on the unpadded box instead would see the kink of the
    /// truncated potential at the box faces.
    pub fn apply_neg_laplacian(&self, f: &Field) -> Result<Field> {
        if f.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        let zero = Field::zeros(self.grid);
        Ok(self.convolve(f, &zero, true).0)
    }

    fn convolve(&self, f: &Field, g: &Field, neg_laplacian: bool) -> (Field, Field) {
        let n = self.grid.n();
        let m = 2 * n;
        let mut data = vec![Complex64::default(); m * m * m];
        for x in 0..n {
            for y in 0..n {
                let src = (x * n + y) * n;
                let dst = (x * m + y) * m;
                for z in 0..n {
                    data[dst + z] = Complex64::new(f.values[src + z], g.values[src + z]);
                }
            }
        }
        self.fft.forward_from_octant(&mut data, n);
        if neg_laplacian {
            let dk = PI / (n as f64 * self.grid.spacing());
            let wave = |j: usize| if j < n { j as f64 * dk } else { (j as f64 - m as f64) * dk };
            for (i, (c, &k)) in data.iter_mut().zip(&self.kernel_hat).enumerate() {
                let (x, y, z) = (i / (m * m), (i / m) % m, i % m);
                let k2 = wave(x).powi(2) + wave(y).powi(2) + wave(z).powi(2);
                *c *= k * k2;
            }
        } else {
            for (c, &k) in data.iter_mut().zip(&self.kernel_hat) {
                *c *= k;
            }
        }
        self.fft.inverse_to_octant(&mut data, n);
        let mut re = Vec::with_capacity(n * n * n);
        let mut im = Vec::with_capacity(n * n * n);
        for x in 0..n {
            for y in 0..n {
                let dst = (x * m + y) * m;
                for c in &data[dst..dst + n] {
                    re.push(c.re);
                    im.push(c.im);
                }
            }
        }
        (Field { grid: self.grid, values: re }, Field { grid: self.grid, values: im })
    }
}

/// `|f|^s` with `0^s = 0`.
pub fn abs_pow(f: &Field, s: f64) -> Field {
    f.map(|x| if x == 0.0 { 0.0 } else { x.abs().powf(s) })
}

/// `D_s(f) = integral (I_alpha * |f|^s) |f|^s`.
pub fn nonlocal_term(op: &RieszOperator, f: &Field, s: f64) -> Result<f64> {
    if s < 1.0 {
        return Err(Error::Range(format!("nonlocal exponent s = {s} must be >= 1")));
    }
    let g = abs_pow(f, s);
    let conv = op.apply(&g)?;
    inner(&conv, &g)
}

/// Builds the operator; same as [`RieszOperator::new`].
pub fn build_riesz(grid: Grid, alpha: f64) -> Result<RieszOperator> {
    RieszOperator::new(grid, alpha)
}

pub fn riesz_apply(op: &RieszOperator, f: &Field) -> Result<Field> {
    op.apply(f)
}
