//! The fiber map `zeta(t) = I(u^t, v^t)` with `w^t(x) = t w(x / t^2)`.
//!
//! In breakdown terms the dilation only rescales the nine scalars, so `zeta` is
//! a generalized polynomial
//! `c4 t^4 + c8 t^8 - cp t^ep - cq t^eq` with real exponents `ep, eq > 8`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{energy, np_functional, Breakdown};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberPolynomial {
    pub c4: f64,
    pub c8: f64,
    pub cp: f64,
    pub cq: f64,
    pub ep: f64,
    pub eq: f64,
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Range(format!("dilation parameter must be positive and finite, got {t}")));
    }
    Ok(())
}

impl FiberPolynomial {
    pub fn from_breakdown(bd: &Breakdown, params: &ModelParams) -> Self {
        FiberPolynomial {
            c4: 0.5 * bd.gradient_sum(),
            c8: 0.5 * bd.mass_sum() + 0.25 * bd.kirchhoff_sum() - params.lambda * bd.f,
            cp: params.mu * bd.d / (2.0 * params.p()),
            cq: params.nu * bd.e / (2.0 * params.q()),
            ep: params.fiber_exponent_p(),
            eq: params.fiber_exponent_q(),
        }
    }

    pub(crate) fn value_unchecked(&self, t: f64) -> f64 {
        self.c4 * t.powi(4) + self.c8 * t.powi(8) - self.cp * t.powf(self.ep) - self.cq * t.powf(self.eq)
    }

    pub(crate) fn derivative_unchecked(&self, t: f64) -> f64 {
        4.0 * self.c4 * t.powi(3) + 8.0 * self.c8 * t.powi(7)
            - self.ep * self.cp * t.powf(self.ep - 1.0)
            - self.eq * self.cq * t.powf(self.eq - 1.0)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.value_unchecked(t))
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.derivative_unchecked(t))
    }

    /// The four terms of `phi(t) = zeta'(t) / t^3`, signed.
    fn phi_terms(&self, t: f64) -> [f64; 4] {
        [
            4.0 * self.c4,
            8.0 * self.c8 * t.powi(4),
            -self.ep * self.cp * t.powf(self.ep - 4.0),
            -self.eq * self.cq * t.powf(self.eq - 4.0),
        ]
    }

    pub(crate) fn phi(&self, t: f64) -> f64 {
        self.phi_terms(t).iter().sum()
    }

    pub(crate) fn phi_prime(&self, t: f64) -> f64 {
        32.0 * self.c8 * t.powi(3)
            - self.ep * (self.ep - 4.0) * self.cp * t.powf(self.ep - 5.0)
            - self.eq * (self.eq - 4.0) * self.cq * t.powf(self.eq - 5.0)
    }
}

pub fn fiber_value(poly: &FiberPolynomial, t: f64) -> Result<f64> {
    poly.value(t)
}

pub fn fiber_derivative(poly: &FiberPolynomial, t: f64) -> Result<f64> {
    poly.derivative(t)
}

/// Breakdown of `(u^t, v^t)` from the breakdown of `(u, v)`.
pub fn scale_breakdown(bd: &Breakdown, t: f64, params: &ModelParams) -> Result<Breakdown> {
    check_t(t)?;
    let t4 = t.powi(4);
    let t8 = t.powi(8);
    Ok(Breakdown {
        a1: t4 * bd.a1,
        a2: t4 * bd.a2,
        b1: t8 * bd.b1,
        b2: t8 * bd.b2,
        k1: t8 * bd.k1,
        k2: t8 * bd.k2,
        d: t.powf(params.fiber_exponent_p()) * bd.d,
        e: t.powf(params.fiber_exponent_q()) * bd.e,
        f: t8 * bd.f,
    })
}

const BRACKET_LIMIT: f64 = 18446744073709551616.0; // 2^64

/// The unique maximizer of `zeta` on `(0, inf)`.
///
/// Works on `phi = zeta'/t^3`, which is positive below the root and negative
/// above it: bracket, then Newton steps that fall back to bisection whenever
/// they leave the bracket.
pub fn solve_fiber_max(poly: &FiberPolynomial) -> Result<f64> {
    let nonlocal = poly.cp + poly.cq;
    if !(nonlocal > 0.0) {
        return Err(Error::NoNonlocalMass);
    }
    if poly.cp < 0.0 || poly.cq < 0.0 || poly.c4 < 0.0 {
        return Err(Error::DegenerateInput(format!("negative fiber coefficient in {poly:?}")));
    }
    if !(poly.c4 + poly.c8 > 0.0) {
        return Err(Error::DegenerateInput("c4 + c8 must be positive".into()));
    }

    let guess = poly.c4 / (poly.ep * poly.cp + poly.eq * poly.cq + poly.c8);
    let mut lo = if guess.is_finite() && guess > 0.0 { guess.min(1.0) } else { 1.0 };
    while poly.phi(lo) <= 0.0 {
        lo *= 0.5;
        if lo < 1.0 / BRACKET_LIMIT {
            return Err(Error::DegenerateInput("fiber derivative is not positive near zero".into()));
        }
    }
    let mut hi = lo.max(1.0);
    while poly.phi(hi) >= 0.0 {
        hi *= 2.0;
        if hi > BRACKET_LIMIT {
            return Err(Error::Overflow);
        }
    }

    let mut t = (lo * hi).sqrt();
    for _ in 0..400 {
        let terms = poly.phi_terms(t);
        let f: f64 = terms.iter().sum();
        let scale = terms.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if f.abs() <= 1e-13 * scale {
            return Ok(t);
        }
        if f > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            return Ok(t);
        }
        let d = poly.phi_prime(t);
        let newton = t - f / d;
        t = if d < 0.0 && newton > lo && newton < hi {
            newton
        } else if hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(t)
}

/// `(t*, bd*)` with `bd*` the breakdown of the projected pair, which lies on
/// the manifold `J = 0`.
pub fn project_to_manifold(bd: &Breakdown, params: &ModelParams) -> Result<(f64, Breakdown)> {
    let t = solve_fiber_max(&FiberPolynomial::from_breakdown(bd, params))?;
    Ok((t, scale_breakdown(bd, t, params)?))
}

/// Correction weight `g(r, t)` of the nonlocal terms in the energy
/// decomposition; nonnegative with a double zero at `t = 1`.
pub fn g_correction(r: f64, alpha: f64, t: f64) -> f64 {
    let e = 2.0 * (r + alpha + 3.0);
    (r + alpha + 3.0) / (8.0 * r) * (1.0 - t.powi(8)) - (1.0 - t.powf(e)) / (2.0 * r)
}

/// Both sides of
/// `I(u,v) = I(u^t,v^t) + (1-t^8)/8 J(u,v) + (1-t^4)^2/4 (A1+A2) + g(p,t) mu D + g(q,t) nu E`.
pub fn decomposition_check(bd: &Breakdown, t: f64, params: &ModelParams) -> Result<(f64, f64)> {
    let scaled = scale_breakdown(bd, t, params)?;
    let a = params.alpha;
    let rhs = energy(params, &scaled)
        + (1.0 - t.powi(8)) / 8.0 * np_functional(params, bd)
        + (1.0 - t.powi(4)).powi(2) / 4.0 * bd.gradient_sum()
        + g_correction(params.p(), a, t) * params.mu * bd.d
        + g_correction(params.q(), a, t) * params.nu * bd.e;
    Ok((energy(params, bd), rhs))
}
