//! Ground states as minimizers of the reduced functional
//! `M(u, v) = max_t I(u^t, v^t)`.
//!
//! Descent runs on `M + kappa/2 (ln t*)^2`. The gradient of `M` is the
//! envelope gradient (`t*` frozen); the penalty pins the iterate to `t* = 1`,
//! where the envelope gradient coincides with the first variation, and uses
//! `d t*/d(u, v)` from implicit differentiation of the fiber equation. Near the
//! minimizer a Newton–Krylov polish on the first variation drives the strong
//! residual to the requested tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{project_to_manifold, solve_fiber_max, FiberPolynomial};
use crate::functionals::{
    energy, energy_weights, nehari, np_functional, pairing, pohozaev, Breakdown, Evaluation, Evaluator,
};
use crate::model::{ExponentRegime, ModelParams};
use crate::optim::{dot, lbfgs_direction, norm, push_pair};
use crate::spectral::{l2_norm_sq, Field, FieldPair, Grid, RieszOperator, SpectralOps};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Strong residual bound, relative to `sqrt(A1 + A2 + B1 + B2)`.
    pub grad_tol: f64,
    /// `|J| / (A1 + A2 + B1 + B2)` bound at the projected breakdown.
    pub nehari_tol: f64,
    pub step0: f64,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    /// Replace `(u, v)` by `(|u|, |v|)` every `symmetrize_every` descent steps.
    pub positivity: bool,
    pub seed: u64,
    pub symmetrize_every: usize,
    /// Descent hands over to the Newton polish once the preconditioned reduced
    /// gradient, relative to `sqrt(M)`, falls below this.
    pub descent_tol: f64,
    /// Weight of the `(ln t*)^2` penalty, in units of the initial level.
    pub fiber_penalty: f64,
    pub newton_max: usize,
    pub krylov_dim: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 2000,
            grad_tol: 1e-6,
            nehari_tol: 1e-8,
            step0: 1.0,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            positivity: true,
            seed: 0,
            symmetrize_every: 10,
            descent_tol: 1e-4,
            fiber_penalty: 10.0,
            newton_max: 25,
            krylov_dim: 40,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grad_tol", self.grad_tol),
            ("nehari_tol", self.nehari_tol),
            ("step0", self.step0),
            ("descent_tol", self.descent_tol),
            ("fiber_penalty", self.fiber_penalty),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {x}")));
            }
        }
        for (name, x) in [("armijo_c", self.armijo_c), ("armijo_shrink", self.armijo_shrink)] {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {x}")));
            }
        }
        if self.symmetrize_every == 0 || self.krylov_dim == 0 {
            return Err(Error::Config("symmetrize_every and krylov_dim must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `|<I'(u,v), (u,v)>|`
    pub nehari: f64,
    /// `|P(u,v)|`
    pub pohozaev: f64,
    /// `|J|` at the projected breakdown, the one the level is read from.
    pub np: f64,
    /// `|J|` at the iterate itself; equals `2|P|` up to the Nehari term.
    pub np_pair: f64,
    /// `L^2` norm of the first variation.
    pub strong: f64,
    /// `m - (1-delta)(p+alpha-1)/(2(p+alpha+3)) (A1+A2+B1+B2)` on the manifold.
    pub lower_bound_slack: f64,
    /// `A1 + A2 + B1 + B2` of the iterate.
    pub scale: f64,
}

impl Residuals {
    pub fn strong_scale(&self) -> f64 {
        self.scale.sqrt()
    }

    pub fn np_rel(&self) -> f64 {
        self.np / self.scale
    }

    pub fn strong_rel(&self) -> f64 {
        self.strong / self.strong_scale()
    }

    pub fn pohozaev_rel(&self) -> f64 {
        self.pohozaev / self.scale
    }

    pub fn nehari_rel(&self) -> f64 {
        self.nehari / self.scale
    }
}

/// One line of `iterations.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    #[serde(rename = "M")]
    pub m: f64,
    pub j_res: f64,
    pub strong_res: f64,
    pub t_star: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub pair: FieldPair,
    pub t_star: f64,
    /// Energy at the manifold projection of the final iterate.
    pub m: f64,
    pub breakdown: Breakdown,
    pub residuals: Residuals,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub config: SolverConfig,
    pub history: Vec<IterationRecord>,
}

/// `(1-delta)(p+alpha-1) / (2(p+alpha+3))`, the coercivity constant of the
/// energy on the manifold.
pub fn lower_bound_constant(params: &ModelParams) -> f64 {
    let (p, a) = (params.p(), params.alpha);
    (1.0 - params.delta()) * (p + a - 1.0) / (2.0 * (p + a + 3.0))
}

/// Weights `d zeta(t) / d bd`.
fn fiber_weights(params: &ModelParams, t: f64) -> Breakdown {
    let t4 = t.powi(4);
    let t8 = t.powi(8);
    let w = energy_weights(params);
    Breakdown {
        a1: w.a1 * t4,
        a2: w.a2 * t4,
        b1: w.b1 * t8,
        b2: w.b2 * t8,
        k1: w.k1 * t8,
        k2: w.k2 * t8,
        d: w.d * t.powf(params.fiber_exponent_p()),
        e: w.e * t.powf(params.fiber_exponent_q()),
        f: w.f * t8,
    }
}

/// Weights `d t* / d bd`, from differentiating `phi(t*; bd) = 0`.
fn t_star_weights(params: &ModelParams, bd: &Breakdown, t: f64) -> Breakdown {
    let poly = FiberPolynomial::from_breakdown(bd, params);
    let t4 = t.powi(4);
    let (ep, eq) = (poly.ep, poly.eq);
    let dphi = Breakdown {
        a1: 2.0,
        a2: 2.0,
        b1: 4.0 * t4,
        b2: 4.0 * t4,
        k1: 2.0 * t4,
        k2: 2.0 * t4,
        d: -ep * t.powf(ep - 4.0) * params.mu / (2.0 * params.p()),
        e: -eq * t.powf(eq - 4.0) * params.nu / (2.0 * params.q()),
        f: -8.0 * params.lambda * t4,
    };
    let s = -1.0 / poly.phi_prime(t);
    Breakdown::from_array(dphi.as_array().map(|x| x * s))
}

fn combine(a: &Breakdown, b: &Breakdown, c: f64) -> Breakdown {
    let (x, y) = (a.as_array(), b.as_array());
    Breakdown::from_array(std::array::from_fn(|i| x[i] + c * y[i]))
}

/// `M`, its envelope gradient, and `t*`.
pub fn reduced_value_and_gradient(
    params: &ModelParams,
    op: &RieszOperator,
    pair: &FieldPair,
) -> Result<(f64, FieldPair, f64)> {
    let ev = Evaluator::new(*params, op);
    let e = ev.evaluate(pair)?;
    let poly = FiberPolynomial::from_breakdown(&e.breakdown, params);
    let t = solve_fiber_max(&poly)?;
    let grad = ev.weighted_gradient(&e, &fiber_weights(params, t));
    Ok((poly.value(t)?, grad, t))
}

/// Field-level generator of the dilation at `t = 1`:
/// `d/dt [t w(x/t^2)] = w - 2 x . grad w`.
pub fn fiber_tangent(ops: &SpectralOps, pair: &FieldPair) -> FieldPair {
    let tangent = |w: &Field| {
        let grid = *w.grid();
        let n = grid.n();
        let axis = grid.axis();
        let mut out = w.clone();
        for dim in 0..3 {
            let d = ops.partial(w, dim);
            for (i, o) in out.values_mut().iter_mut().enumerate() {
                let idx = [i / (n * n), (i / n) % n, i % n];
                *o -= 2.0 * axis[idx[dim]] * d.values()[i];
            }
        }
        out
    };
    FieldPair { u: tangent(&pair.u), v: tangent(&pair.v) }
}

struct ReducedState {
    eval: Evaluation,
    t: f64,
    /// Penalized reduced value.
    value: f64,
}

struct Solver<'a> {
    ev: Evaluator<'a>,
    config: SolverConfig,
    kappa: f64,
    evaluations: usize,
}

impl<'a> Solver<'a> {
    fn params(&self) -> &ModelParams {
        self.ev.params()
    }

    fn reduced(&mut self, pair: &FieldPair) -> Result<ReducedState> {
        self.evaluations += 1;
        let eval = self.ev.evaluate(pair)?;
        let poly = FiberPolynomial::from_breakdown(&eval.breakdown, self.params());
        let t = solve_fiber_max(&poly)?;
        let value = poly.value(t)? + 0.5 * self.kappa * t.ln().powi(2);
        Ok(ReducedState { eval, t, value })
    }

    fn reduced_gradient(&self, s: &ReducedState) -> FieldPair {
        let prm = self.params();
        let w = fiber_weights(prm, s.t);
        let w = combine(&w, &t_star_weights(prm, &s.eval.breakdown, s.t), self.kappa * s.t.ln() / s.t);
        self.ev.weighted_gradient(&s.eval, &w)
    }

    /// Approximate inverse of the Hessian of `zeta(t)` in the fields.
    fn precondition(&self, g: &FieldPair, eval: &Evaluation, t: f64) -> FieldPair {
        let prm = self.params();
        let (gu, gv) = eval.grad_sq;
        let (t4, t8) = (t.powi(4), t.powi(8));
        let (u, v) = self.ev.ops().solve_helmholtz_pair(
            &g.u,
            &g.v,
            (t4 * prm.a1 + t8 * prm.b1 * gu, t8 * prm.v1),
            (t4 * prm.a2 + t8 * prm.b2 * gv, t8 * prm.v2),
        );
        FieldPair { u, v }
    }

    fn record(&self, iter: usize, s: &ReducedState, step: f64) -> Result<IterationRecord> {
        let prm = self.params();
        let bd = &s.eval.breakdown;
        let g = self.ev.first_variation(&s.eval);
        let strong = (l2_norm_sq(&g.u) + l2_norm_sq(&g.v)).sqrt();
        Ok(IterationRecord {
            iter,
            m: s.value,
            j_res: np_functional(prm, bd).abs() / bd.norm_sq(),
            strong_res: strong / bd.norm_sq().sqrt(),
            t_star: s.t,
            step,
        })
    }

    /// Preconditioned L-BFGS with Armijo backtracking. Returns the final pair,
    /// the iteration count and whether the descent tolerance was reached.
    fn descend(
        &mut self,
        mut pair: FieldPair,
        history: &mut Vec<IterationRecord>,
    ) -> Result<(FieldPair, usize, bool)> {
        let cfg = self.config;
        let grid = *pair.grid();
        let mut state = self.reduced(&pair)?;
        let mut x = flatten(&pair);
        let mut g = flatten(&self.reduced_gradient(&state));
        let mut memory: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
        let mut step = 0.0;
        let mut iter = 0;
        loop {
            let pg = flatten(&self.precondition(&unflatten(grid, &g)?, &state.eval, state.t));
            let measure = (dot(&g, &pg).max(0.0) / state.value.abs()).sqrt();
            history.push(self.record(iter, &state, step)?);
            if measure <= cfg.descent_tol {
                return Ok((pair, iter, true));
            }
            if iter >= cfg.max_iters {
                return Ok((pair, iter, false));
            }
            iter += 1;

            let precondition = |v: &[f64]| -> Result<Vec<f64>> {
                Ok(flatten(&self.precondition(&unflatten(grid, v)?, &state.eval, state.t)))
            };
            let mut dir = lbfgs_direction(&g, &pg, &memory, &precondition)?;
            let mut slope = dot(&g, &dir);
            if !(slope < 0.0) {
                memory.clear();
                dir = pg.iter().map(|v| -v).collect();
                slope = -dot(&g, &pg);
            }
            let mut tau = if memory.is_empty() { cfg.step0 } else { 1.0 };
            let mut accepted = None;
            for _ in 0..40 {
                let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + tau * b).collect();
                let trial_pair = unflatten(grid, &trial)?;
                match self.reduced(&trial_pair) {
                    Ok(s) if s.value <= state.value + cfg.armijo_c * tau * slope => {
                        accepted = Some((trial, trial_pair, s));
                        break;
                    }
                    _ => tau *= cfg.armijo_shrink,
                }
            }
            let Some((x_new, pair_new, state_new)) = accepted else {
                if memory.is_empty() {
                    return Ok((pair, iter, false));
                }
                memory.clear();
                continue;
            };
            let g_new = flatten(&self.reduced_gradient(&state_new));
            let s_vec: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y_vec: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            push_pair(&mut memory, LBFGS_MEMORY, s_vec, y_vec);
            x = x_new;
            pair = pair_new;
            state = state_new;
            g = g_new;
            step = tau;

            if cfg.positivity && iter % cfg.symmetrize_every == 0 && x.iter().any(|&v| v < 0.0) {
                let abs = pair.abs();
                let s = self.reduced(&abs)?;
                if s.value <= state.value {
                    pair = abs;
                    state = s;
                    x = flatten(&pair);
                    g = flatten(&self.reduced_gradient(&state));
                    memory.clear();
                }
            }
        }
    }

    /// `P^{-1} I'(u, v)` with the Helmholtz preconditioner at `t = 1`.
    fn newton_map(&mut self, pair: &FieldPair) -> Result<(Vec<f64>, Evaluation)> {
        self.evaluations += 1;
        let eval = self.ev.evaluate(pair)?;
        let g = self.ev.first_variation(&eval);
        let pg = self.precondition(&g, &eval, 1.0);
        Ok((flatten(&pg), eval))
    }

    /// Inexact Newton with GMRES on the preconditioned first variation.
    fn polish(
        &mut self,
        mut pair: FieldPair,
        iter0: usize,
        history: &mut Vec<IterationRecord>,
    ) -> Result<(FieldPair, usize)> {
        let cfg = self.config;
        let grid = *pair.grid();
        let (mut f, mut eval) = self.newton_map(&pair)?;
        let params = *self.params();
        let level = move |eval: &Evaluation| -> Option<(f64, f64)> {
            let (t, star) = project_to_manifold(&eval.breakdown, &params).ok()?;
            Some((t, energy(&params, &star)))
        };
        let Some((_, m_ref)) = level(&eval) else {
            return Ok((pair, iter0));
        };
        // Newton may head for another critical point (the trivial one, or a
        // saddle far away); steps must stay near the manifold and the level
        let admissible = |eval: &Evaluation| match level(eval) {
            Some((t, m)) => t.ln().abs() <= POLISH_FIBER_DRIFT && (m - m_ref).abs() <= POLISH_LEVEL_DRIFT * m_ref.abs(),
            None => false,
        };
        let mut iter = iter0;
        for _ in 0..cfg.newton_max {
            let res = residuals_of(self.params(), &self.ev, &eval)?;
            let (t, m) = level(&eval).unwrap_or((f64::NAN, f64::NAN));
            history.push(self.record(iter, &ReducedState { eval: eval.clone(), t, value: m }, 1.0)?);
            if res.strong_rel() <= 0.2 * cfg.grad_tol || iter >= cfg.max_iters {
                break;
            }
            iter += 1;
            let x = flatten(&pair);
            let xnorm = norm(&x);
            let fnorm = norm(&f);
            let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
            let base = f.clone();
            let mut jvp = |d: &[f64]| -> Result<Vec<f64>> {
                let dn = norm(d);
                if dn == 0.0 {
                    return Ok(vec![0.0; d.len()]);
                }
                let eps = 1e-7 * xnorm.max(1e-300) / dn;
                let shifted: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + eps * b).collect();
                let (fs, _) = self.newton_map(&unflatten(grid, &shifted)?)?;
                Ok(fs.iter().zip(&base).map(|(a, b)| (a - b) / eps).collect())
            };
            let eta = (fnorm / xnorm).sqrt().clamp(1e-4, 1e-2);
            let step = gmres(&mut jvp, &rhs, cfg.krylov_dim, eta)?;
            let mut lambda = 1.0;
            let mut improved = false;
            for _ in 0..12 {
                let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + lambda * b).collect();
                let trial_pair = unflatten(grid, &trial)?;
                if let Ok((ft, et)) = self.newton_map(&trial_pair) {
                    if norm(&ft) <= (1.0 - 1e-4 * lambda) * fnorm && admissible(&et) {
                        pair = trial_pair;
                        f = ft;
                        eval = et;
                        improved = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !improved {
                break;
            }
        }
        Ok((pair, iter))
    }
}

const LBFGS_MEMORY: usize = 8;
/// Largest `|ln t*|` at which the descent result is handed to Newton, and
/// which Newton iterates may reach.
const POLISH_FIBER_DRIFT: f64 = 0.15;
/// Largest relative change of the level allowed during the polish.
const POLISH_LEVEL_DRIFT: f64 = 0.05;

/// Two-loop recursion; the initial inverse Hessian is `gamma P^{-1}` with
/// `gamma` fitted to the newest curvature pair.
fn flatten(p: &FieldPair) -> Vec<f64> {
    let mut out = p.u.values().to_vec();
    out.extend_from_slice(p.v.values());
    out
}

fn unflatten(grid: Grid, x: &[f64]) -> Result<FieldPair> {
    let n = grid.len();
    FieldPair::new(Field::from_values(grid, x[..n].to_vec())?, Field::from_values(grid, x[n..].to_vec())?)
}

/// Single-cycle GMRES from a zero initial guess.
fn gmres(
    matvec: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    b: &[f64],
    max_dim: usize,
    rel_tol: f64,
) -> Result<Vec<f64>> {
    let beta = norm(b);
    if beta == 0.0 {
        return Ok(vec![0.0; b.len()]);
    }
    let mut basis: Vec<Vec<f64>> = vec![b.iter().map(|x| x / beta).collect()];
    // Hessenberg columns after Givens rotations
    let mut r: Vec<Vec<f64>> = Vec::new();
    let mut rot: Vec<(f64, f64)> = Vec::new();
    let mut g = vec![beta];
    for j in 0..max_dim {
        let mut w = matvec(&basis[j])?;
        let mut h = Vec::with_capacity(j + 2);
        for v in &basis {
            let c = dot(&w, v);
            w.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
            h.push(c);
        }
        let hn = norm(&w);
        h.push(hn);
        for (i, &(c, s)) in rot.iter().enumerate() {
            let (a, b) = (h[i], h[i + 1]);
            h[i] = c * a + s * b;
            h[i + 1] = -s * a + c * b;
        }
        let d = h[j].hypot(h[j + 1]);
        let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (h[j] / d, h[j + 1] / d) };
        h[j] = d;
        h[j + 1] = 0.0;
        rot.push((c, s));
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s * gj);
        r.push(h);
        let done = g[j + 1].abs() <= rel_tol * beta || hn <= 1e-14 * beta;
        if !done {
            basis.push(w.iter().map(|x| x / hn).collect());
        }
        if done || j + 1 == max_dim {
            break;
        }
    }
    let k = r.len();
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for (jj, yj) in y.iter().enumerate().skip(i + 1) {
            acc -= r[jj][i] * yj;
        }
        y[i] = acc / r[i][i];
    }
    let mut x = vec![0.0; b.len()];
    for (yi, v) in y.iter().zip(&basis) {
        x.iter_mut().zip(v).for_each(|(a, b)| *a += yi * b);
    }
    Ok(x)
}

fn residuals_of(params: &ModelParams, ev: &Evaluator, eval: &Evaluation) -> Result<Residuals> {
    let bd = &eval.breakdown;
    let g = ev.first_variation(eval);
    let strong = (l2_norm_sq(&g.u) + l2_norm_sq(&g.v)).sqrt();
    let (np, slack) = match project_to_manifold(bd, params) {
        Ok((_, star)) => {
            let m = energy(params, &star);
            (np_functional(params, &star).abs(), m - lower_bound_constant(params) * star.norm_sq())
        }
        Err(_) => (f64::NAN, f64::NAN),
    };
    Ok(Residuals {
        nehari: pairing(&g, &eval.pair)?.abs(),
        pohozaev: pohozaev(params, bd).abs(),
        np,
        np_pair: np_functional(params, bd).abs(),
        strong,
        lower_bound_slack: slack,
        scale: bd.norm_sq(),
    })
}

/// Gaussians of width `L/8` at `+-L/16` offsets along a seeded direction.
pub fn initial_pair(grid: Grid, seed: u64, width: f64, amplitude: f64) -> FieldPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    let off = grid.half_length() / 16.0;
    let c: [f64; 3] = std::array::from_fn(|i| off * dir[i] / len);
    let s2 = 2.0 * width * width;
    let u = grid.sample(|x, y, z| {
        amplitude * (-((x - c[0]).powi(2) + (y - c[1]).powi(2) + (z - c[2]).powi(2)) / s2).exp()
    });
    let v = grid.sample(|x, y, z| {
        amplitude * (-((x + c[0]).powi(2) + (y + c[1]).powi(2) + (z + c[2]).powi(2)) / s2).exp()
    });
    FieldPair { u, v }
}

fn check_regime(params: &ModelParams) -> Result<ExponentRegime> {
    let regime = params.validate()?;
    if !regime.admits_ground_state() {
        return Err(Error::Regime(format!("the ground-state solver does not run in the {regime} regime")));
    }
    Ok(regime)
}

/// Seeded Gaussian start, dilated analytically so that `t* = 1`.
fn seeded_start(params: &ModelParams, op: &RieszOperator, seed: u64) -> Result<FieldPair> {
    let grid = *op.grid();
    let ev = Evaluator::new(*params, op);
    let (mut width, mut amp) = (grid.half_length() / 8.0, 1.0);
    let mut pair = initial_pair(grid, seed, width, amp);
    for _ in 0..3 {
        let (t, _) = project_to_manifold(&ev.breakdown(&pair)?, params)?;
        // w^t is again a Gaussian with amplitude times t and width times t^2;
        // the offsets stay tied to L
        let grown = width * t * t;
        if grown > grid.half_length() / 3.0 {
            break;
        }
        width = grown;
        amp *= t;
        pair = initial_pair(grid, seed, width, amp);
    }
    Ok(pair)
}

/// Minimizes from a seeded start.
pub fn minimize_ground_state(params: &ModelParams, grid: Grid, config: &SolverConfig) -> Result<GroundStateResult> {
    check_regime(params)?;
    config.validate()?;
    let op = RieszOperator::new(grid, params.alpha)?;
    minimize_with(params, &op, config, None)
}

/// Minimizes with a prebuilt operator, optionally from a given start.
pub fn minimize_with(
    params: &ModelParams,
    op: &RieszOperator,
    config: &SolverConfig,
    start: Option<FieldPair>,
) -> Result<GroundStateResult> {
    check_regime(params)?;
    config.validate()?;
    let pair = match start {
        Some(p) => p,
        None => seeded_start(params, op, config.seed)?,
    };
    let ev = Evaluator::new(*params, op);
    let m0 = {
        let bd = ev.breakdown(&pair)?;
        let (_, star) = project_to_manifold(&bd, params)?;
        energy(params, &star).abs()
    };
    let mut solver = Solver { ev, config: *config, kappa: config.fiber_penalty * m0, evaluations: 0 };
    let mut history = Vec::new();
    let (pair, iters, descended) = solver.descend(pair, &mut history)?;
    let near_manifold = history.last().is_some_and(|r| r.t_star.ln().abs() <= POLISH_FIBER_DRIFT);
    let (pair, iters) = if descended && near_manifold {
        solver.polish(pair, iters, &mut history)?
    } else {
        (pair, iters)
    };
    let eval = solver.ev.evaluate(&pair)?;
    let residuals = residuals_of(params, &solver.ev, &eval)?;
    // the iterate may have lost its nonlocal mass; report that as a failed run
    let (t_star, m) = match project_to_manifold(&eval.breakdown, params) {
        Ok((t, star)) => (t, energy(params, &star)),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let converged = residuals.np <= config.nehari_tol * residuals.scale
        && residuals.strong <= config.grad_tol * residuals.strong_scale();
    Ok(GroundStateResult {
        pair,
        t_star,
        m,
        breakdown: eval.breakdown,
        residuals,
        iterations: iters,
        evaluations: solver.evaluations + 1,
        converged,
        config: *config,
        history,
    })
}

/// Residual checks recomputed from scratch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub residuals: Residuals,
    pub m: f64,
    pub lower_bound: f64,
    pub boundary_ratio: f64,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Pohozaev residual allowed by [`verify_solution`], relative to the scale.
pub const POHOZAEV_TOL: f64 = 1e-3;
/// Boundary-to-peak ratio allowed by [`verify_solution`].
pub const BOUNDARY_TOL: f64 = 1e-8;

pub fn verify_solution(params: &ModelParams, op: &RieszOperator, result: &GroundStateResult) -> Result<VerificationReport> {
    let ev = Evaluator::new(*params, op);
    let eval = ev.evaluate(&result.pair)?;
    let res = residuals_of(params, &ev, &eval)?;
    let cfg = &result.config;
    let le = |name: &str, value: f64, bound: f64| Check { name: name.into(), passed: value <= bound, value, bound };
    let mut checks = Vec::new();
    checks.push(Check { name: "nontrivial".into(), passed: res.scale > 0.0, value: res.scale, bound: 0.0 });
    if res.scale == 0.0 {
        return Ok(VerificationReport {
            residuals: res,
            m: 0.0,
            lower_bound: 0.0,
            boundary_ratio: 0.0,
            checks,
        });
    }
    let (_, star) = project_to_manifold(&eval.breakdown, params)?;
    let m = energy(params, &star);
    let lower = lower_bound_constant(params) * star.norm_sq();
    checks.push(le("nehari", res.nehari, cfg.grad_tol * res.scale));
    checks.push(le("np", res.np, cfg.nehari_tol * res.scale));
    checks.push(le("strong", res.strong, cfg.grad_tol * res.strong_scale()));
    checks.push(le("pohozaev", res.pohozaev, POHOZAEV_TOL * res.scale));
    checks.push(Check { name: "lower_bound".into(), passed: m >= lower, value: m, bound: lower });
    checks.push(Check { name: "positive_level".into(), passed: m > 0.0, value: m, bound: 0.0 });
    let nu = l2_norm_sq(&result.pair.u).sqrt();
    let nv = l2_norm_sq(&result.pair.v).sqrt();
    let balance = nu.min(nv) / nu.max(nv);
    checks.push(Check { name: "both_components".into(), passed: balance > 0.01, value: balance, bound: 0.01 });
    if cfg.positivity {
        let min = result.pair.u.values().iter().chain(result.pair.v.values()).fold(f64::INFINITY, |a, &b| a.min(b));
        checks.push(Check { name: "positive_fields".into(), passed: min > 0.0, value: min, bound: 0.0 });
    }
    let boundary = result.pair.u.boundary_ratio().max(result.pair.v.boundary_ratio());
    checks.push(le("boundary_decay", boundary, BOUNDARY_TOL));
    Ok(VerificationReport { residuals: res, m, lower_bound: lower, boundary_ratio: boundary, checks })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepPoint {
    pub mu: f64,
    pub nu: f64,
    pub m: f64,
    pub converged: bool,
    pub iters: usize,
}

/// Which coefficient a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Mu,
    Nu,
}

/// Levels `m` along a list of `mu` (or `nu`) values, each run warm-started from
/// the previous solution.
pub fn sweep(
    params: &ModelParams,
    grid: Grid,
    config: &SolverConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<(SweepPoint, GroundStateResult)>> {
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("sweep values must be strictly ascending".into()));
    }
    let op = RieszOperator::new(grid, params.alpha)?;
    let mut out: Vec<(SweepPoint, GroundStateResult)> = Vec::new();
    let mut warm: Option<FieldPair> = None;
    for &x in values {
        let prm = match axis {
            SweepAxis::Mu => params.with_mu(x),
            SweepAxis::Nu => params.with_nu(x),
        };
        let start = match warm.take() {
            Some(p) => Some(rescale_warm_start(&prm, &op, p)?),
            None => None,
        };
        let res = minimize_with(&prm, &op, config, start)?;
        warm = Some(res.pair.clone());
        let point = SweepPoint { mu: prm.mu, nu: prm.nu, m: res.m, converged: res.converged, iters: res.iterations };
        out.push((point, res));
    }
    Ok(out)
}

/// Moves a warm start onto the new manifold by dilation when the field fits.
fn rescale_warm_start(params: &ModelParams, op: &RieszOperator, pair: FieldPair) -> Result<FieldPair> {
    let bd = Evaluator::new(*params, op).breakdown(&pair)?;
    let (t, _) = project_to_manifold(&bd, params)?;
    let scaled = crate::scaling::scale_field(&pair.u, t)
        .and_then(|u| Ok(FieldPair { u, v: crate::scaling::scale_field(&pair.v, t)? }));
    Ok(scaled.unwrap_or(pair))
}

pub fn sweep_mu(params: &ModelParams, grid: Grid, config: &SolverConfig, mu_values: &[f64]) -> Result<Vec<SweepPoint>> {
    Ok(sweep(params, grid, config, SweepAxis::Mu, mu_values)?.into_iter().map(|x| x.0).collect())
}

pub fn sweep_nu(params: &ModelParams, grid: Grid, config: &SolverConfig, nu_values: &[f64]) -> Result<Vec<SweepPoint>> {
    Ok(sweep(params, grid, config, SweepAxis::Nu, nu_values)?.into_iter().map(|x| x.0).collect())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NonexistenceProbe {
    #[serde(rename = "Q1")]
    pub q1: f64,
    #[serde(rename = "Q2")]
    pub q2: f64,
    pub bound1: f64,
    pub bound2: f64,
}

/// `Q1 = P - N/2` and `Q2 = 3N/2 - P` with `N = <I'(u,v), (u,v)>`. In the upper
/// doubly critical case `Q1 = B1 + B2 - 2 lambda F >= (1-delta)(B1+B2)`; in the
/// lower one `Q2 = A1 + A2 + K1 + K2 >= 0`. A nontrivial solution has
/// `P = N = 0`, so either bound rules it out.
pub fn nonexistence_probe(params: &ModelParams, op: &RieszOperator, pair: &FieldPair) -> Result<NonexistenceProbe> {
    let regime = params.validate()?;
    if !matches!(regime, ExponentRegime::DoublyCriticalUpper | ExponentRegime::DoublyCriticalLower) {
        return Err(Error::Regime(format!("nonexistence probe needs a doubly critical regime, got {regime}")));
    }
    let bd = Evaluator::new(*params, op).breakdown(pair)?;
    Ok(probe_breakdown(params, &bd))
}

pub fn probe_breakdown(params: &ModelParams, bd: &Breakdown) -> NonexistenceProbe {
    let n = nehari(params, bd);
    let p = pohozaev(params, bd);
    NonexistenceProbe {
        q1: p - 0.5 * n,
        q2: 1.5 * n - p,
        bound1: (1.0 - params.delta()) * bd.mass_sum(),
        bound2: 0.0,
    }
}
