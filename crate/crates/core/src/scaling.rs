//! Field-level dilation `w^t(x) = t w(x / t^2)`, for cross-checking the
//! breakdown scaling law. The solver never resamples fields.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::Field;

/// Mass fraction allowed outside the region that the dilation keeps.
pub const SUPPORT_TOLERANCE: f64 = 1e-8;

/// Four-point Lagrange weights at fractional offset `s` in `[0, 1)` for the
/// nodes `-1, 0, 1, 2`.
fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

/// For each output node on one axis: the base source index and its weights.
fn axis_stencil(n: usize, half_length: f64, h: f64, t: f64) -> Vec<(i64, [f64; 4])> {
    (0..n)
        .map(|i| {
            let x = -half_length + i as f64 * h;
            let s = (x / (t * t) + half_length) / h;
            let base = s.floor();
            (base as i64, cubic_weights(s - base))
        })
        .collect()
}

/// Resamples along one axis (0 = x, 1 = y, 2 = z) with zero extension.
fn resample_axis(values: &[f64], n: usize, axis: usize, stencil: &[(i64, [f64; 4])]) -> Vec<f64> {
    let stride = match axis {
        0 => n * n,
        1 => n,
        _ => 1,
    };
    let mut out = vec![0.0; values.len()];
    out.par_chunks_mut(n * n).enumerate().for_each(|(x, slab)| {
        for (r, o) in slab.iter_mut().enumerate() {
            let idx = [x, r / n, r % n];
            let own = idx[axis];
            let origin = x * n * n + r - own * stride;
            let (base, w) = stencil[own];
            let mut acc = 0.0;
            for (k, wk) in w.iter().enumerate() {
                let j = base - 1 + k as i64;
                if j >= 0 && (j as usize) < n {
                    acc += wk * values[origin + j as usize * stride];
                }
            }
            *o = acc;
        }
    });
    out
}

/// Fraction of `sum f^2` lying outside the centered cube of half-width `r`.
fn mass_outside(f: &Field, r: f64) -> f64 {
    let grid = f.grid();
    let n = grid.n();
    let axis = grid.axis();
    let mut total = 0.0;
    let mut outside = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let w = f.values()[grid.index(i, j, k)].powi(2);
                total += w;
                if axis[i].abs() > r || axis[j].abs() > r || axis[k].abs() > r {
                    outside += w;
                }
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outside / total
    }
}

/// `g(x_i) = t f~(x_i / t^2)` with `f~` the tricubic interpolant of `f`, zero
/// outside the box.
///
/// For `t > 1` the dilation pushes mass outward and the part of `f` beyond
/// `|x|_inf = L / t^2` leaves the box; that part must be negligible.
pub fn scale_field(f: &Field, t: f64) -> Result<Field> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Range(format!("dilation parameter must be positive and finite, got {t}")));
    }
    if t == 1.0 {
        return Ok(f.clone());
    }
    let grid = *f.grid();
    let keep = grid.half_length() * (1.0 / (t * t)).min(1.0);
    let lost = mass_outside(f, keep);
    if lost > SUPPORT_TOLERANCE {
        return Err(Error::Support(format!(
            "fraction {lost:.3e} of the mass lies outside |x| <= {keep:.4} and would leave the box"
        )));
    }
    let n = grid.n();
    let stencil = axis_stencil(n, grid.half_length(), grid.spacing(), t);
    let mut values = f.values().to_vec();
    for axis in 0..3 {
        values = resample_axis(&values, n, axis, &stencil);
    }
    values.iter_mut().for_each(|x| *x *= t);
    Field::from_values(grid, values)
}
