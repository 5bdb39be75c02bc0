//! Slow reference implementations used to certify the fast paths: direct-sum
//! convolution, a DFT-matrix gradient norm, the breakdown by plain loops, a
//! second arithmetic path for the energy, dense fiber scans and central
//! differences.
//!
//! Everything here is single-threaded and deliberately naive.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::fiber::{scale_breakdown, solve_fiber_max, FiberPolynomial};
use crate::functionals::{breakdown, energy, first_variation, pairing, Breakdown};
use crate::minimizer::reduced_value_and_gradient;
use crate::model::{riesz_normalization, ModelParams};
use crate::spectral::{kernel_sample, Field, FieldPair, Grid, RieszOperator};

/// Largest grid the `O(n^6)` sums accept.
pub const DIRECT_MAX_N: usize = 16;

fn check_size(grid: &Grid) -> Result<()> {
    if grid.n() > DIRECT_MAX_N {
        return Err(Error::Size(format!("direct sums need n <= {DIRECT_MAX_N}, got {}", grid.n())));
    }
    Ok(())
}

/// `h^3 sum_y K(x - y) f(y)` by an explicit double loop over the same kernel
/// samples the FFT path uses, origin cell included.
pub fn riesz_direct(grid: &Grid, alpha: f64, f: &Field) -> Result<Field> {
    check_size(grid)?;
    if f.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let a_alpha = riesz_normalization(alpha)?;
    let n = grid.n();
    let h3 = grid.cell_volume();
    let vals = f.values();
    let mut out = vec![0.0; grid.len()];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let fv = vals[grid.index(i, j, k)];
                            if fv != 0.0 {
                                let d = |a: usize, b: usize| a as i64 - b as i64;
                                acc += kernel_sample(grid, alpha, a_alpha, d(x, i), d(y, j), d(z, k)) * fv;
                            }
                        }
                    }
                }
                out[grid.index(x, y, z)] = h3 * acc;
            }
        }
    }
    Field::from_values(*grid, out)
}

/// One-dimensional DFT along `axis` by the explicit matrix.
fn dft_axis(re: &[f64], im: &[f64], n: usize, axis: usize) -> (Vec<f64>, Vec<f64>) {
    let stride = [n * n, n, 1][axis];
    let (cos, sin): (Vec<f64>, Vec<f64>) =
        (0..n).map(|m| 2.0 * PI * m as f64 / n as f64).map(|a| (a.cos(), a.sin())).unzip();
    let mut out_re = vec![0.0; re.len()];
    let mut out_im = vec![0.0; re.len()];
    for base in 0..re.len() {
        if (base / stride) % n != 0 {
            continue;
        }
        for kk in 0..n {
            let (mut sr, mut si) = (0.0, 0.0);
            for j in 0..n {
                let m = (kk * j) % n;
                let (c, s) = (cos[m], -sin[m]);
                let (a, b) = (re[base + j * stride], im[base + j * stride]);
                sr += a * c - b * s;
                si += a * s + b * c;
            }
            out_re[base + kk * stride] = sr;
            out_im[base + kk * stride] = si;
        }
    }
    (out_re, out_im)
}

/// `|grad f|^2` from explicit DFT matrices, Nyquist wavenumber `-pi/h`.
pub fn grad_norm_sq_direct(f: &Field) -> f64 {
    let grid = f.grid();
    let n = grid.n();
    let mut re = f.values().to_vec();
    let mut im = vec![0.0; re.len()];
    for axis in 0..3 {
        (re, im) = dft_axis(&re, &im, n, axis);
    }
    let dk = PI / grid.half_length();
    let wave = |j: usize| if j < n / 2 { j as f64 * dk } else { (j as f64 - n as f64) * dk };
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let idx = grid.index(i, j, k);
                let k2 = wave(i).powi(2) + wave(j).powi(2) + wave(k).powi(2);
                acc += k2 * (re[idx] * re[idx] + im[idx] * im[idx]);
            }
        }
    }
    grid.cell_volume() * acc / grid.len() as f64
}

fn sum_product(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// All nine scalars by plain loops, the direct convolution and the DFT
/// gradient norm.
pub fn breakdown_direct(params: &ModelParams, pair: &FieldPair) -> Result<Breakdown> {
    let grid = *pair.grid();
    check_size(&grid)?;
    let h3 = grid.cell_volume();
    let (p, q) = (params.p(), params.q());
    let gu = grad_norm_sq_direct(&pair.u);
    let gv = grad_norm_sq_direct(&pair.v);
    let fu = pair.u.map(|x| x.abs().powf(p));
    let fv = pair.v.map(|x| x.abs().powf(q));
    let cu = riesz_direct(&grid, params.alpha, &fu)?;
    let cv = riesz_direct(&grid, params.alpha, &fv)?;
    let (u, v) = (pair.u.values(), pair.v.values());
    Ok(Breakdown {
        a1: params.a1 * gu,
        a2: params.a2 * gv,
        b1: params.v1 * h3 * sum_product(u, u),
        b2: params.v2 * h3 * sum_product(v, v),
        k1: params.b1 * gu * gu,
        k2: params.b2 * gv * gv,
        d: h3 * sum_product(cu.values(), fu.values()),
        e: h3 * sum_product(cv.values(), fv.values()),
        f: h3 * sum_product(u, v),
    })
}

/// `Phi = I - J/8`, which carries no mass, Kirchhoff or coupling terms.
pub fn phi_functional(params: &ModelParams, bd: &Breakdown) -> f64 {
    let (p, q, a) = (params.p(), params.q(), params.alpha);
    0.25 * (bd.a1 + bd.a2)
        + (p + a - 1.0) / (8.0 * p) * params.mu * bd.d
        + (q + a - 1.0) / (8.0 * q) * params.nu * bd.e
}

/// `J` term by term, independently of the fast path.
pub fn np_functional_direct(params: &ModelParams, bd: &Breakdown) -> f64 {
    let (p, q, a) = (params.p(), params.q(), params.alpha);
    let terms = [
        2.0 * bd.a1,
        2.0 * bd.a2,
        4.0 * bd.b1,
        4.0 * bd.b2,
        2.0 * bd.k1,
        2.0 * bd.k2,
        -params.mu * bd.d * (p + a + 3.0) / p,
        -params.nu * bd.e * (q + a + 3.0) / q,
        -8.0 * params.lambda * bd.f,
    ];
    terms.iter().sum()
}

/// The energy as `Phi + J/8`.
pub fn energy_direct(params: &ModelParams, bd: &Breakdown) -> f64 {
    phi_functional(params, bd) + np_functional_direct(params, bd) / 8.0
}

/// Closed form of the Sobolev constant in dimension `d >= 3`:
/// `pi d (d - 2) (Gamma(d/2) / Gamma(d))^{2/d}`.
pub fn talenti_constant(d: u32) -> f64 {
    let d = d as f64;
    PI * d * (d - 2.0) * (gamma(d / 2.0) / gamma(d)).powf(2.0 / d)
}

/// Sharp constant `C` of `int (I_alpha * f) f <= C |f|_r^2` in three dimensions
/// with `r = 6 / (3 + alpha)`: the kernel factor times the sharp constant for
/// `|x|^{-(3 - alpha)}`.
pub fn hls_sharp_constant(alpha: f64) -> Result<f64> {
    let a_alpha = riesz_normalization(alpha)?;
    let lam = 3.0 - alpha;
    let c = PI.powf(lam / 2.0) * gamma(1.5 - lam / 2.0) / gamma(3.0 - lam / 2.0)
        * (gamma(1.5) / gamma(3.0)).powf(lam / 3.0 - 1.0);
    Ok(a_alpha * c)
}

/// `S*` in closed form: the Talenti bubble is extremal both for the Sobolev
/// inequality and for the HLS bound on `|w|^{3+alpha}`.
pub fn s_star_closed_form(alpha: f64) -> Result<f64> {
    Ok(talenti_constant(3) / hls_sharp_constant(alpha)?.powf(1.0 / (3.0 + alpha)))
}

/// `S_*` in closed form: `|w|^{(3+alpha)/3}` lies in `L^r` exactly when `w` is
/// in `L^2`.
pub fn s_lower_closed_form(alpha: f64) -> Result<f64> {
    Ok(hls_sharp_constant(alpha)?.powf(-3.0 / (3.0 + alpha)))
}

/// `c t^k` through `exp(k ln t)`, a different path from the solver's powers.
fn mono(c: f64, k: f64, t_ln: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * (k * t_ln).exp()
    }
}

fn zeta(poly: &FiberPolynomial, t: f64) -> (f64, f64) {
    let l = t.ln();
    let value = mono(poly.c4, 4.0, l) + mono(poly.c8, 8.0, l) - mono(poly.cp, poly.ep, l) - mono(poly.cq, poly.eq, l);
    let slope = mono(4.0 * poly.c4, 3.0, l) + mono(8.0 * poly.c8, 7.0, l)
        - mono(poly.ep * poly.cp, poly.ep - 1.0, l)
        - mono(poly.eq * poly.cq, poly.eq - 1.0, l);
    (value, slope)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberScan {
    pub argmax: f64,
    pub max: f64,
    /// Ratio between neighbouring scan points.
    pub resolution: f64,
    /// Sign changes of `zeta'` along the scan, zeros skipped.
    pub sign_changes: usize,
    /// `(t, zeta, zeta')` at every scan point; empty from [`fiber_scan_summary`].
    pub table: Vec<(f64, f64, f64)>,
}

fn scan(poly: &FiberPolynomial, t_min: f64, t_max: f64, count: usize, keep: bool) -> Result<FiberScan> {
    if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) || count < 2 {
        return Err(Error::Range(format!(
            "scan needs 0 < t_min < t_max and at least two points, got [{t_min}, {t_max}] with {count}"
        )));
    }
    let (l0, l1) = (t_min.ln(), t_max.ln());
    let step = (l1 - l0) / (count - 1) as f64;
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    let mut last_sign = 0.0;
    let mut sign_changes = 0;
    let mut table = Vec::with_capacity(if keep { count } else { 0 });
    for i in 0..count {
        let t = (l0 + step * i as f64).exp();
        let (z, dz) = zeta(poly, t);
        if z > best.1 {
            best = (t, z);
        }
        if dz != 0.0 {
            let s = dz.signum();
            if last_sign != 0.0 && s != last_sign {
                sign_changes += 1;
            }
            last_sign = s;
        }
        if keep {
            table.push((t, z, dz));
        }
    }
    Ok(FiberScan { argmax: best.0, max: best.1, resolution: step.exp(), sign_changes, table })
}

/// Dense log-spaced scan of `zeta` on `[t_min, t_max]`.
pub fn fiber_scan(poly: &FiberPolynomial, t_min: f64, t_max: f64, count: usize) -> Result<FiberScan> {
    scan(poly, t_min, t_max, count, true)
}

/// Same scan without the table.
pub fn fiber_scan_summary(poly: &FiberPolynomial, t_min: f64, t_max: f64, count: usize) -> Result<FiberScan> {
    scan(poly, t_min, t_max, count, false)
}

/// What a central difference differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FdTarget {
    Energy,
    /// `M = max_t I(u^t, v^t)`
    Reduced,
}

fn target_value(params: &ModelParams, op: &RieszOperator, pair: &FieldPair, target: FdTarget) -> Result<f64> {
    let bd = breakdown(params, op, pair)?;
    match target {
        FdTarget::Energy => Ok(energy(params, &bd)),
        FdTarget::Reduced => {
            let t = solve_fiber_max(&FiberPolynomial::from_breakdown(&bd, params))?;
            Ok(energy(params, &scale_breakdown(&bd, t, params)?))
        }
    }
}

/// `(F(pair + eps w) - F(pair - eps w)) / (2 eps)`.
pub fn fd_directional(
    params: &ModelParams,
    op: &RieszOperator,
    pair: &FieldPair,
    direction: &FieldPair,
    eps: f64,
    target: FdTarget,
) -> Result<f64> {
    let plus = target_value(params, op, &pair.add_scaled(eps, direction)?, target)?;
    let minus = target_value(params, op, &pair.add_scaled(-eps, direction)?, target)?;
    Ok((plus - minus) / (2.0 * eps))
}

/// One line of the certification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub error: f64,
    pub bound: f64,
}

impl OracleCheck {
    fn new(name: impl Into<String>, error: f64, bound: f64) -> Self {
        OracleCheck { name: name.into(), passed: error <= bound, error, bound }
    }
}

fn random_field(grid: Grid, rng: &mut impl Rng, width: f64) -> Field {
    let c: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-0.2..0.2) * grid.half_length());
    let mut f = grid.sample(|x, y, z| {
        let r2 = (x - c[0]).powi(2) + (y - c[1]).powi(2) + (z - c[2]).powi(2);
        (-r2 / (width * width)).exp()
    });
    f.values_mut().iter_mut().for_each(|v| *v *= 1.0 + 0.3 * rng.gen_range(-1.0..1.0));
    f
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn max_rel(a: &Field, b: &Field) -> f64 {
    let scale = b.max_abs().max(f64::MIN_POSITIVE);
    a.values().iter().zip(b.values()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Runs every oracle once against its fast path with seeded random data.
pub fn certify(seed: u64) -> Result<Vec<OracleCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let small = Grid::new(8, 3.0)?;
    for alpha in [0.5, 1.0, 2.0] {
        let op = RieszOperator::new(small, alpha)?;
        let f = random_field(small, &mut rng, 1.2);
        let err = max_rel(&op.apply(&f)?, &riesz_direct(&small, alpha, &f)?);
        checks.push(OracleCheck::new(format!("riesz_direct alpha={alpha}"), err, 1e-10));
    }

    let params = ModelParams::baseline();
    let op = RieszOperator::new(small, params.alpha)?;
    let pair = FieldPair::new(random_field(small, &mut rng, 1.0), random_field(small, &mut rng, 1.3))?;
    let fast = breakdown(&params, &op, &pair)?;
    let slow = breakdown_direct(&params, &pair)?;
    let err = fast.as_array().iter().zip(slow.as_array()).map(|(a, b)| rel(*a, b)).fold(0.0, f64::max);
    checks.push(OracleCheck::new("breakdown_direct", err, 1e-10));
    checks.push(OracleCheck::new("energy_direct", rel(energy(&params, &fast), energy_direct(&params, &fast)), 1e-12));

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let poly = FiberPolynomial {
            c4: rng.gen_range(0.1..10.0),
            c8: rng.gen_range(0.1..10.0),
            cp: rng.gen_range(0.1..10.0),
            cq: rng.gen_range(0.0..10.0),
            ep: rng.gen_range(8.5..12.0),
            eq: 12.0,
        };
        let t = solve_fiber_max(&poly)?;
        let sc = fiber_scan_summary(&poly, 1e-3, 1e3, 100_000)?;
        worst = worst.max((t.ln() - sc.argmax.ln()).abs() / sc.resolution.ln());
    }
    checks.push(OracleCheck::new("fiber_scan argmax (in scan steps)", worst, 1.0));

    let grid = Grid::new(16, 6.0)?;
    let op = RieszOperator::new(grid, params.alpha)?;
    let pair = FieldPair::new(random_field(grid, &mut rng, 1.5), random_field(grid, &mut rng, 1.8))?;
    let dir = FieldPair::new(random_field(grid, &mut rng, 2.0), random_field(grid, &mut rng, 1.0))?;
    let g = first_variation(&params, &op, &pair)?;
    let fd = fd_directional(&params, &op, &pair, &dir, 1e-5, FdTarget::Energy)?;
    checks.push(OracleCheck::new("fd_directional energy", rel(fd, pairing(&g, &dir)?), 1e-6));
    let (_, grad, _) = reduced_value_and_gradient(&params, &op, &pair)?;
    let fd = fd_directional(&params, &op, &pair, &dir, 1e-5, FdTarget::Reduced)?;
    checks.push(OracleCheck::new("fd_directional reduced", rel(fd, pairing(&grad, &dir)?), 1e-5));
    Ok(checks)
}
