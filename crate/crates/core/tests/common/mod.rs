#![allow(dead_code)]

use kirchhoff_choquard::model::{CriticalToken, Exponent, ModelParams};
use kirchhoff_choquard::{Breakdown, Field, FieldPair, Grid};
use rand::Rng;

/// Off-center Gaussian bump with multiplicative noise.
pub fn bump(grid: Grid, rng: &mut impl Rng) -> Field {
    let l = grid.half_length();
    let c: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-0.15..0.15) * l);
    let w = rng.gen_range(0.12..0.25) * l;
    let amp = rng.gen_range(0.2..2.0);
    let mut f = grid.sample(|x, y, z| {
        let r2 = (x - c[0]).powi(2) + (y - c[1]).powi(2) + (z - c[2]).powi(2);
        amp * (-r2 / (w * w)).exp()
    });
    let noise = rng.gen_range(0.0..0.3);
    f.values_mut().iter_mut().for_each(|v| *v *= 1.0 + noise * rng.gen_range(-1.0..1.0));
    f
}

/// Random pair; occasionally sign-changing or with one component a multiple of
/// the other.
pub fn random_pair(grid: Grid, rng: &mut impl Rng) -> FieldPair {
    let u = bump(grid, rng);
    let v = match rng.gen_range(0..4) {
        0 => u.scaled(rng.gen_range(-2.0..2.0)),
        1 => bump(grid, rng).add_scaled(-0.5, &bump(grid, rng)).unwrap(),
        _ => bump(grid, rng),
    };
    FieldPair::new(u, v).unwrap()
}

pub fn gaussian(grid: Grid, width: f64, amp: f64) -> Field {
    grid.sample(|x, y, z| amp * (-(x * x + y * y + z * z) / (width * width)).exp())
}

/// Random coefficients satisfying assumption (V) with exponents in `[p, q]`
/// chosen by `kind`: 0 noncritical, 1 upper half-critical, 2 lower
/// half-critical, 3 upper doubly critical, 4 lower doubly critical.
pub fn random_params(rng: &mut impl Rng, kind: u8) -> ModelParams {
    let alpha = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
    let (lo, hi) = ((3.0 + alpha) / 3.0, 3.0 + alpha);
    let mut mid = || lo + (hi - lo) * rng.gen_range(0.1..0.9);
    let (p, q): (Exponent, Exponent) = match kind {
        0 => {
            let (a, b): (f64, f64) = (mid(), mid());
            (a.min(b).into(), a.max(b).into())
        }
        1 => (mid().into(), UPPER),
        2 => (LOWER, mid().into()),
        3 => (UPPER, UPPER),
        _ => (LOWER, LOWER),
    };
    const UPPER: Exponent = Exponent::Token(CriticalToken::UpperCritical);
    const LOWER: Exponent = Exponent::Token(CriticalToken::LowerCritical);
    let v1: f64 = rng.gen_range(0.3..3.0);
    let v2: f64 = rng.gen_range(0.3..3.0);
    ModelParams {
        a1: rng.gen_range(0.3..3.0),
        a2: rng.gen_range(0.3..3.0),
        b1: rng.gen_range(0.3..3.0),
        b2: rng.gen_range(0.3..3.0),
        v1,
        v2,
        lambda: rng.gen_range(0.01..0.99) * (v1 * v2).sqrt(),
        mu: rng.gen_range(0.3..3.0),
        nu: rng.gen_range(0.3..3.0),
        p,
        q,
        alpha,
    }
}

/// Breakdown scalars consistent with Cauchy-Schwarz for `F`.
pub fn random_breakdown(rng: &mut impl Rng, params: &ModelParams) -> Breakdown {
    let gu: f64 = rng.gen_range(0.05..5.0);
    let gv: f64 = rng.gen_range(0.05..5.0);
    let nu2: f64 = rng.gen_range(0.05..5.0);
    let nv2: f64 = rng.gen_range(0.05..5.0);
    Breakdown {
        a1: params.a1 * gu,
        a2: params.a2 * gv,
        b1: params.v1 * nu2,
        b2: params.v2 * nv2,
        k1: params.b1 * gu * gu,
        k2: params.b2 * gv * gv,
        d: rng.gen_range(0.01..5.0),
        e: rng.gen_range(0.0..5.0),
        f: rng.gen_range(-1.0..1.0) * (nu2 * nv2).sqrt(),
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn rel_l2(a: &Field, b: &Field) -> f64 {
    let num: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.values().iter().map(|y| y * y).sum();
    (num / den).sqrt()
}
