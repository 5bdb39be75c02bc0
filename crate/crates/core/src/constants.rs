//! Best constants of the Sobolev embedding and of the two critical
//! Hardy–Littlewood–Sobolev quotients, estimated by minimizing Rayleigh
//! quotients over fields supported in a ball inside the box, and the
//! half-critical thresholds built from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{lower_critical, upper_critical, ExponentRegime, ModelParams};
use crate::optim::{dot, lbfgs_direction, push_pair};
use crate::spectral::{inner, integrate, l2_norm_sq, Field, Grid, RieszOperator, SpectralOps};

/// Fields are confined to the ball of radius `SUPPORT_FRACTION * L`.
pub const SUPPORT_FRACTION: f64 = 0.9;
/// Trial profiles are untouched inside `TAPER_START * L` and tapered to zero
/// at the support radius.
pub const TAPER_START: f64 = 0.5;

const MEMORY: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quotient {
    /// `|grad w|^2 / |w|_6^2`
    Sobolev,
    /// `|grad w|^2 / D_{3+alpha}(w)^{1/(3+alpha)}`
    UpperCritical { alpha: f64 },
    /// `|w|^2 / D_{(3+alpha)/3}(w)^{3/(3+alpha)}`
    LowerCritical { alpha: f64 },
}

impl Quotient {
    /// Exponent `s` of the denominator integrand and the power `e` the
    /// denominator is raised to.
    fn exponents(self) -> (f64, f64) {
        match self {
            Quotient::Sobolev => (6.0, 1.0 / 3.0),
            Quotient::UpperCritical { alpha } => (upper_critical(alpha), 1.0 / upper_critical(alpha)),
            Quotient::LowerCritical { alpha } => (lower_critical(alpha), 1.0 / lower_critical(alpha)),
        }
    }

    fn alpha(self) -> Option<f64> {
        match self {
            Quotient::Sobolev => None,
            Quotient::UpperCritical { alpha } | Quotient::LowerCritical { alpha } => Some(alpha),
        }
    }

    fn gradient_numerator(self) -> bool {
        !matches!(self, Quotient::LowerCritical { .. })
    }
}

/// Evaluates one Rayleigh quotient and its L2 gradient on a fixed grid.
pub struct QuotientEvaluator {
    kind: Quotient,
    ops: SpectralOps,
    riesz: Option<RieszOperator>,
}

impl QuotientEvaluator {
    pub fn new(kind: Quotient, grid: Grid) -> Result<Self> {
        let riesz = match kind.alpha() {
            Some(alpha) => Some(RieszOperator::new(grid, alpha)?),
            None => None,
        };
        Ok(Self { kind, ops: SpectralOps::new(grid), riesz })
    }

    pub fn kind(&self) -> Quotient {
        self.kind
    }

    pub fn grid(&self) -> &Grid {
        self.ops.grid()
    }

    fn numerator(&self, w: &Field) -> f64 {
        if self.kind.gradient_numerator() {
            self.ops.grad_norm_sq(w)
        } else {
            l2_norm_sq(w)
        }
    }

    /// Denominator integral before the outer power, with its convolution
    /// when there is one.
    fn denominator(&self, w: &Field) -> Result<(f64, Option<Field>)> {
        let (s, _) = self.kind.exponents();
        let ws = w.map(|x| x.abs().powf(s));
        match &self.riesz {
            None => Ok((integrate(&ws), None)),
            Some(op) => {
                let conv = op.apply(&ws)?;
                Ok((inner(&conv, &ws)?, Some(conv)))
            }
        }
    }

    pub fn value(&self, w: &Field) -> Result<f64> {
        self.check(w)?;
        let (den, _) = self.denominator(w)?;
        self.quotient(self.numerator(w), den)
    }

    fn quotient(&self, num: f64, den: f64) -> Result<f64> {
        if !(den > 0.0) {
            return Err(Error::DegenerateInput("quotient denominator vanishes".into()));
        }
        Ok(num / den.powf(self.kind.exponents().1))
    }

    fn check(&self, w: &Field) -> Result<()> {
        if w.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn value_and_gradient(&self, w: &Field) -> Result<(f64, Field)> {
        self.check(w)?;
        let (s, e) = self.kind.exponents();
        let num = self.numerator(w);
        let (den, conv) = self.denominator(w)?;
        let q = self.quotient(num, den)?;
        let dnum = if self.kind.gradient_numerator() {
            self.ops.laplacian(w).scaled(-2.0)
        } else {
            w.scaled(2.0)
        };
        // derivative of the denominator integral
        let dden: Vec<f64> = match &conv {
            None => w.values().iter().map(|&x| s * x.abs().powf(s - 1.0) * x.signum()).collect(),
            Some(c) => w
                .values()
                .iter()
                .zip(c.values())
                .map(|(&x, &cv)| if x == 0.0 { 0.0 } else { 2.0 * s * cv * x.abs().powf(s - 1.0) * x.signum() })
                .collect(),
        };
        let scale = den.powf(-e);
        let ratio = e * num / den;
        let g: Vec<f64> = dnum.values().iter().zip(&dden).map(|(a, b)| scale * (a - ratio * b)).collect();
        Ok((q, Field::from_values(*self.grid(), g)?))
    }
}

/// Indicator of the admissible support.
fn support_mask(grid: &Grid) -> Vec<f64> {
    let r_max = SUPPORT_FRACTION * grid.half_length();
    grid.sample(|x, y, z| if (x * x + y * y + z * z).sqrt() < r_max { 1.0 } else { 0.0 }).into_values()
}

/// Smooth cutoff: one inside `TAPER_START * L`, cosine taper to zero at the
/// support radius.
fn taper(r: f64, half_length: f64) -> f64 {
    let r0 = TAPER_START * half_length;
    let r1 = SUPPORT_FRACTION * half_length;
    if r <= r0 {
        1.0
    } else if r >= r1 {
        0.0
    } else {
        let s = (r - r0) / (r1 - r0);
        (0.5 * PI * s).cos().powi(2)
    }
}

/// Trial field of width `eps`.
///
/// Gradient quotients get the Talenti bubble `(eps^2 + r^2)^{-1/2}` minus its
/// value at the support radius, which vanishes there without extra gradient
/// energy; its quotient exceeds `S_3` by about `1.7 eps / R`. The lower quotient
/// gets `(eps^2 + r^2)^{-3/2}` with a smooth taper.
pub fn trial_profile(grid: &Grid, kind: Quotient, eps: f64) -> Field {
    let l = grid.half_length();
    let r1 = SUPPORT_FRACTION * l;
    if kind.gradient_numerator() {
        let edge = (eps * eps + r1 * r1).powf(-0.5);
        grid.sample(|x, y, z| {
            let r2 = x * x + y * y + z * z;
            ((eps * eps + r2).powf(-0.5) - edge).max(0.0)
        })
    } else {
        grid.sample(|x, y, z| {
            let r2 = x * x + y * y + z * z;
            (eps * eps + r2).powf(-1.5) * taper(r2.sqrt(), l)
        })
    }
}

/// Bubble widths, in grid spacings, used for the gradient quotients.
const WIDTHS: [f64; 4] = [2.0, 3.0, 4.0, 6.0];
/// The refinement keeps the field fixed inside `CORE_FACTOR * eps`.
const CORE_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestConstantEstimate {
    /// Refined estimate on the finest grid.
    pub value: f64,
    /// Quotient of the trial profile on the finest grid.
    pub trial_value: f64,
    pub trial_profile: String,
    /// `(n, refined value)` from coarse to fine at fixed box size.
    pub refinement_trend: Vec<(usize, f64)>,
    /// `(eps, refined quotient)` behind the extrapolation on the finest grid;
    /// empty for the lower quotient.
    pub width_series: Vec<(f64, f64)>,
    pub iterations: usize,
}

/// Knobs of the quotient refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub max_iters: usize,
    /// Stop once an iteration lowers the quotient by less than this, relative.
    pub rel_tol: f64,
    /// Number of grids in the refinement trend (halving `n` each time).
    pub levels: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self { max_iters: 400, rel_tol: 1e-10, levels: 3 }
    }
}

/// Projected L-BFGS on the quotient over fields supported in the ball.
/// Returns the final field, its quotient and the iteration count.
///
/// With `frozen_core = Some(rho)` the field is held fixed on `|x| < rho` and
/// only its tail moves. Left free, a bubble slides down to the grid scale,
/// where the discrete quotient undershoots the continuum one.
pub fn refine(ev: &QuotientEvaluator, start: &Field, cfg: &RefineConfig, frozen_core: Option<f64>) -> Result<(Field, f64, usize)> {
    let grid = *ev.grid();
    let r_max = SUPPORT_FRACTION * grid.half_length();
    let rho = frozen_core.unwrap_or(0.0);
    let mask = grid
        .sample(|x, y, z| {
            let r = (x * x + y * y + z * z).sqrt();
            if r < r_max && r >= rho {
                1.0
            } else {
                0.0
            }
        })
        .into_values();
    let project = |v: &mut [f64]| v.iter_mut().zip(&mask).for_each(|(a, m)| *a *= m);
    let project_gradient = |g: &mut Vec<f64>, _x: &[f64]| -> Result<()> {
        project(g);
        Ok(())
    };
    // Sobolev-type metric `sigma - Lap` for gradient numerators
    let sigma = (4.0 / grid.half_length()).powi(2);
    let mult: Vec<f64> = ev.ops.k_squared().iter().map(|k2| 1.0 / (sigma + k2)).collect();
    let precondition = |v: &[f64]| -> Result<Vec<f64>> {
        if !ev.kind().gradient_numerator() {
            return Ok(v.to_vec());
        }
        let f = Field::from_values(grid, v.to_vec())?;
        let mut out = ev.ops.apply_multiplier(&f, &mult).into_values();
        project(&mut out);
        Ok(out)
    };

    let mut x = start.values().to_vec();
    x.iter_mut().zip(&support_mask(&grid)).for_each(|(a, m)| *a *= m);
    let (mut q, g) = ev.value_and_gradient(&Field::from_values(grid, x.clone())?)?;
    let mut g = g.into_values();
    project_gradient(&mut g, &x)?;
    let mut memory = Vec::new();
    let mut iters = 0;
    while iters < cfg.max_iters {
        iters += 1;
        let pg = precondition(&g)?;
        let mut dir = lbfgs_direction(&g, &pg, &memory, &precondition)?;
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            memory.clear();
            dir = pg.iter().map(|v| -v).collect();
            slope = -dot(&g, &pg);
        }
        let mut tau = if memory.is_empty() { 0.1 * q / (-slope).max(f64::MIN_POSITIVE) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + tau * b).collect();
            let field = Field::from_values(grid, trial.clone())?;
            if let Ok((qt, gt)) = ev.value_and_gradient(&field) {
                if qt <= q + 1e-4 * tau * slope {
                    accepted = Some((trial, qt, gt));
                    break;
                }
            }
            tau *= 0.5;
        }
        let Some((x_new, q_new, g_new)) = accepted else {
            if memory.is_empty() {
                break;
            }
            memory.clear();
            continue;
        };
        let mut g_new = g_new.into_values();
        project_gradient(&mut g_new, &x_new)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        push_pair(&mut memory, MEMORY, s, y);
        let gain = (q - q_new) / q;
        x = x_new;
        g = g_new;
        q = q_new;
        if gain < cfg.rel_tol {
            break;
        }
    }
    Ok((Field::from_values(grid, x)?, q, iters))
}

/// Intercept of the least-squares quadratic through `(x, y)`.
fn quadratic_intercept(points: &[(f64, f64)]) -> f64 {
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for &(x, y) in points {
        let row = [1.0, x, x * x];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            r[i] += row[i] * y;
        }
    }
    // Gaussian elimination; the moment matrix is positive definite
    for c in 0..3 {
        for i in c + 1..3 {
            let f = m[i][c] / m[c][c];
            for j in c..3 {
                m[i][j] -= f * m[c][j];
            }
            r[i] -= f * r[c];
        }
    }
    let mut sol = [0.0; 3];
    for i in (0..3).rev() {
        let tail: f64 = (i + 1..3).map(|j| m[i][j] * sol[j]).sum();
        sol[i] = (r[i] - tail) / m[i][i];
    }
    sol[0]
}

/// One grid: the refined value, the trial value, the trial description, the
/// width series and the iteration count.
fn estimate_on(kind: Quotient, grid: Grid, cfg: &RefineConfig) -> Result<BestConstantEstimate> {
    let ev = QuotientEvaluator::new(kind, grid)?;
    let h = grid.spacing();
    let r1 = SUPPORT_FRACTION * grid.half_length();
    if kind.gradient_numerator() {
        // Truncating the bubble to the ball costs O(eps / R): refine each
        // width with its core frozen, then extrapolate to eps = 0
        let mut series = Vec::new();
        let mut iterations = 0;
        let mut trial_value = f64::NAN;
        for c in WIDTHS {
            let eps = c * h;
            let w = trial_profile(&grid, kind, eps);
            if series.is_empty() {
                trial_value = ev.value(&w)?;
            }
            let (_, q, it) = refine(&ev, &w, cfg, Some(CORE_FACTOR * eps))?;
            iterations += it;
            series.push((eps, q));
        }
        let scaled: Vec<(f64, f64)> = series.iter().map(|&(e, q)| (e / r1, q)).collect();
        Ok(BestConstantEstimate {
            value: quadratic_intercept(&scaled),
            trial_value,
            trial_profile: format!(
                "(eps^2 + |x|^2)^(-1/2) - (eps^2 + R^2)^(-1/2), R = {r1:.4}, eps = {:.6}; refined at eps/h in {:?}, extrapolated to eps = 0",
                WIDTHS[0] * h,
                WIDTHS
            ),
            refinement_trend: Vec::new(),
            width_series: series,
            iterations,
        })
    } else {
        let mut best: Option<(f64, f64, Field)> = None;
        for c in WIDTHS {
            let eps = c * h;
            let w = trial_profile(&grid, kind, eps);
            let q = ev.value(&w)?;
            if best.as_ref().map_or(true, |b| q < b.1) {
                best = Some((eps, q, w));
            }
        }
        let (eps, trial_value, w) = best.unwrap();
        let (_, value, iterations) = refine(&ev, &w, cfg, None)?;
        Ok(BestConstantEstimate {
            value,
            trial_value,
            trial_profile: format!(
                "(eps^2 + |x|^2)^(-3/2), eps = {eps:.6}, tapered from r = {:.4} to {r1:.4}",
                TAPER_START * grid.half_length()
            ),
            refinement_trend: Vec::new(),
            width_series: Vec::new(),
            iterations,
        })
    }
}

fn estimate(kind: Quotient, grid: Grid, cfg: &RefineConfig) -> Result<BestConstantEstimate> {
    let mut grids = vec![grid];
    while grids.len() < cfg.levels.max(1) {
        let last = grids.last().unwrap();
        if last.n() < 32 || last.n() % 2 != 0 {
            break;
        }
        grids.push(Grid::new(last.n() / 2, last.half_length())?);
    }
    grids.reverse();
    let mut trend = Vec::new();
    let mut last = None;
    for g in grids {
        let est = estimate_on(kind, g, cfg)?;
        trend.push((g.n(), est.value));
        last = Some(est);
    }
    let mut out = last.unwrap();
    out.refinement_trend = trend;
    Ok(out)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 3.0 {
        return Err(Error::Range(format!("alpha = {alpha} must lie in (0, 3)")));
    }
    Ok(())
}

/// `S_3`, from the Talenti profile `(1 + |x|^2)^{-1/2}` and refinement.
pub fn estimate_sobolev(grid: Grid) -> Result<BestConstantEstimate> {
    estimate_sobolev_with(grid, &RefineConfig::default())
}

pub fn estimate_sobolev_with(grid: Grid, cfg: &RefineConfig) -> Result<BestConstantEstimate> {
    estimate(Quotient::Sobolev, grid, cfg)
}

/// `S*`: infimum of `|grad w|^2 / D_{3+alpha}(w)^{1/(3+alpha)}`.
pub fn estimate_s_star(grid: Grid, alpha: f64) -> Result<BestConstantEstimate> {
    estimate_s_star_with(grid, alpha, &RefineConfig::default())
}

pub fn estimate_s_star_with(grid: Grid, alpha: f64, cfg: &RefineConfig) -> Result<BestConstantEstimate> {
    check_alpha(alpha)?;
    estimate(Quotient::UpperCritical { alpha }, grid, cfg)
}

/// `S_*`: infimum of `|w|^2 / D_{(3+alpha)/3}(w)^{3/(3+alpha)}`.
pub fn estimate_s_lower(grid: Grid, alpha: f64) -> Result<BestConstantEstimate> {
    estimate_s_lower_with(grid, alpha, &RefineConfig::default())
}

pub fn estimate_s_lower_with(grid: Grid, alpha: f64, cfg: &RefineConfig) -> Result<BestConstantEstimate> {
    check_alpha(alpha)?;
    estimate(Quotient::LowerCritical { alpha }, grid, cfg)
}

/// Level below which the upper half-critical problem (`q = 3 + alpha`) has a
/// ground state: `(alpha+1)/(4(3+alpha)) nu (a2 S*/nu)^{(3+alpha)/(2+alpha)}`.
pub fn threshold_upper(params: &ModelParams, s_star: f64) -> Result<f64> {
    let regime = params.validate()?;
    if regime != ExponentRegime::UpperHalfCritical {
        return Err(Error::Regime(format!("threshold_upper needs the upper half-critical regime, got {regime}")));
    }
    let a = params.alpha;
    let nu = params.nu;
    Ok((a + 1.0) / (4.0 * (3.0 + a)) * nu * (params.a2 * s_star / nu).powf((3.0 + a) / (2.0 + a)))
}

/// The lower half-critical threshold
/// `alpha/(2(3+alpha)) mu (4(3+alpha) V1 (1-delta) S_* / (mu (12+alpha)))^e`
/// with both exponents in circulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerThreshold {
    /// `e = (3+alpha)/3`
    pub hypothesis_exponent: f64,
    /// `e = (3+alpha)/alpha`
    pub proof_exponent: f64,
}

pub fn threshold_lower(params: &ModelParams, s_lower: f64) -> Result<LowerThreshold> {
    let regime = params.validate()?;
    if regime != ExponentRegime::LowerHalfCritical {
        return Err(Error::Regime(format!("threshold_lower needs the lower half-critical regime, got {regime}")));
    }
    let a = params.alpha;
    let mu = params.mu;
    let base = 4.0 * (3.0 + a) * params.v1 * (1.0 - params.delta()) * s_lower / (mu * (12.0 + a));
    let front = a / (2.0 * (3.0 + a)) * mu;
    Ok(LowerThreshold {
        hypothesis_exponent: front * base.powf((3.0 + a) / 3.0),
        proof_exponent: front * base.powf((3.0 + a) / a),
    })
}
