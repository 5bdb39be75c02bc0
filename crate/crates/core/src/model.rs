//! Model coefficients, exponent regimes and the Riesz normalization.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// A Choquard exponent as declared by the user.
///
/// Critical exponents are declared with the tokens `"lower-critical"` and
/// `"upper-critical"`; they resolve to `(3+alpha)/3` and `3+alpha` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Value(f64),
    Token(CriticalToken),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalToken {
    #[serde(rename = "lower-critical")]
    LowerCritical,
    #[serde(rename = "upper-critical")]
    UpperCritical,
}

impl Exponent {
    pub fn resolve(self, alpha: f64) -> f64 {
        match self {
            Exponent::Value(x) => x,
            Exponent::Token(CriticalToken::LowerCritical) => lower_critical(alpha),
            Exponent::Token(CriticalToken::UpperCritical) => upper_critical(alpha),
        }
    }

    fn is_lower_critical(self, alpha: f64) -> bool {
        match self {
            Exponent::Token(t) => t == CriticalToken::LowerCritical,
            // an exact literal match counts as a declaration; nearness never does
            Exponent::Value(x) => x == lower_critical(alpha),
        }
    }

    fn is_upper_critical(self, alpha: f64) -> bool {
        match self {
            Exponent::Token(t) => t == CriticalToken::UpperCritical,
            Exponent::Value(x) => x == upper_critical(alpha),
        }
    }
}

impl From<f64> for Exponent {
    fn from(x: f64) -> Self {
        Exponent::Value(x)
    }
}

pub fn lower_critical(alpha: f64) -> f64 {
    (3.0 + alpha) / 3.0
}

pub fn upper_critical(alpha: f64) -> f64 {
    3.0 + alpha
}

/// Which of the exponent windows `(p, q)` falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExponentRegime {
    Noncritical,
    UpperHalfCritical,
    LowerHalfCritical,
    DoublyCriticalUpper,
    DoublyCriticalLower,
}

impl ExponentRegime {
    /// Regimes in which a ground state exists (possibly only for large weights).
    pub fn admits_ground_state(self) -> bool {
        matches!(
            self,
            ExponentRegime::Noncritical
                | ExponentRegime::UpperHalfCritical
                | ExponentRegime::LowerHalfCritical
        )
    }
}

impl fmt::Display for ExponentRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExponentRegime::Noncritical => "noncritical",
            ExponentRegime::UpperHalfCritical => "upper-half-critical",
            ExponentRegime::LowerHalfCritical => "lower-half-critical",
            ExponentRegime::DoublyCriticalUpper => "doubly-critical-upper",
            ExponentRegime::DoublyCriticalLower => "doubly-critical-lower",
        };
        f.write_str(s)
    }
}

/// All coefficients of the coupled system.
///
/// ```text
/// -(a1 + b1 |grad u|^2) Lap u + V1 u = mu (I_alpha * |u|^p)|u|^{p-2} u + lambda v
/// -(a2 + b2 |grad v|^2) Lap v + V2 v = nu (I_alpha * |v|^q)|v|^{q-2} v + lambda u
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    #[serde(rename = "V1")]
    pub v1: f64,
    #[serde(rename = "V2")]
    pub v2: f64,
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub alpha: f64,
}

impl ModelParams {
    /// Unit coefficients with `lambda = 0.5`, `alpha = 1`, `p = q = 2`.
    pub fn baseline() -> Self {
        ModelParams {
            a1: 1.0,
            a2: 1.0,
            b1: 1.0,
            b2: 1.0,
            v1: 1.0,
            v2: 1.0,
            lambda: 0.5,
            mu: 1.0,
            nu: 1.0,
            p: Exponent::Value(2.0),
            q: Exponent::Value(2.0),
            alpha: 1.0,
        }
    }

    pub fn p(&self) -> f64 {
        self.p.resolve(self.alpha)
    }

    pub fn q(&self) -> f64 {
        self.q.resolve(self.alpha)
    }

    /// `lambda / sqrt(V1 V2)`.
    pub fn delta(&self) -> f64 {
        self.lambda / (self.v1 * self.v2).sqrt()
    }

    /// Fiber exponent `2(p + alpha + 3)` of the first nonlocal term.
    pub fn fiber_exponent_p(&self) -> f64 {
        2.0 * (self.p() + self.alpha + 3.0)
    }

    pub fn fiber_exponent_q(&self) -> f64 {
        2.0 * (self.q() + self.alpha + 3.0)
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_exponents(mut self, p: impl Into<Exponent>, q: impl Into<Exponent>) -> Self {
        self.p = p.into();
        self.q = q.into();
        self
    }

    pub fn validate(&self) -> Result<ExponentRegime> {
        validate_params(self)
    }
}

/// Checks coefficient signs, assumption (V) and the exponent window, and
/// classifies the exponents.
pub fn validate_params(params: &ModelParams) -> Result<ExponentRegime> {
    let alpha = params.alpha;
    let coeffs = [
        ("a1", params.a1),
        ("a2", params.a2),
        ("b1", params.b1),
        ("b2", params.b2),
        ("V1", params.v1),
        ("V2", params.v2),
        ("lambda", params.lambda),
        ("mu", params.mu),
        ("nu", params.nu),
    ];
    for (name, value) in coeffs {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Range(format!("{name} = {value} must be finite and positive")));
        }
    }
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 3.0 {
        return Err(Error::Range(format!("alpha = {alpha} must lie in (0, 3)")));
    }
    let (p, q) = (params.p(), params.q());
    let lo = lower_critical(alpha);
    let hi = upper_critical(alpha);
    if !p.is_finite() || !q.is_finite() {
        return Err(Error::Range("exponents must be finite".into()));
    }
    if !(lo <= p && p <= q && q <= hi) {
        return Err(Error::Range(format!(
            "exponents must satisfy (3+alpha)/3 = {lo} <= p = {p} <= q = {q} <= 3+alpha = {hi}"
        )));
    }
    let bound = (params.v1 * params.v2).sqrt();
    if params.lambda >= bound {
        return Err(Error::Coupling { lambda: params.lambda, bound });
    }

    let p_lo = params.p.is_lower_critical(alpha);
    let p_hi = params.p.is_upper_critical(alpha);
    let q_lo = params.q.is_lower_critical(alpha);
    let q_hi = params.q.is_upper_critical(alpha);
    let regime = match (p_lo, p_hi, q_lo, q_hi) {
        (false, false, false, false) => ExponentRegime::Noncritical,
        (false, false, false, true) => ExponentRegime::UpperHalfCritical,
        (true, false, false, false) => ExponentRegime::LowerHalfCritical,
        (false, true, false, true) => ExponentRegime::DoublyCriticalUpper,
        (true, false, true, false) => ExponentRegime::DoublyCriticalLower,
        _ => {
            // the ordering check leaves only p lower-critical with q upper-critical,
            // which none of the existence or nonexistence results cover
            return Err(Error::Range(format!(
                "unsupported exponent combination p = {p}, q = {q}"
            )));
        }
    };
    Ok(regime)
}

/// `A_alpha = Gamma((3-alpha)/2) / (Gamma(alpha/2) pi^{3/2} 2^alpha)`, the
/// constant in front of `|x|^{alpha-3}` in the Riesz potential on R^3.
pub fn riesz_normalization(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 3.0 {
        return Err(Error::Range(format!("alpha = {alpha} must lie in (0, 3)")));
    }
    Ok(gamma((3.0 - alpha) / 2.0) / (gamma(alpha / 2.0) * PI.powf(1.5) * 2f64.powf(alpha)))
}
