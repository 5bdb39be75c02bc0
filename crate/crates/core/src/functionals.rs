//! Energy `I`, Nehari–Pohozaev functional `J`, Pohozaev functional `P` and the
//! first variation, all expressed through the nine [`Breakdown`] scalars.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectral::{inner, l2_norm_sq, Field, FieldPair, RieszOperator, SpectralOps};

/// The nine integrals through which every functional factors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    /// `a1 |grad u|^2`
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    /// `V1 |u|^2`
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    /// `b1 |grad u|^4`
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    /// `int (I_alpha * |u|^p) |u|^p`
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "E")]
    pub e: f64,
    /// `int u v`
    #[serde(rename = "F")]
    pub f: f64,
}

impl Breakdown {
    /// `A1 + A2 + B1 + B2`, the squared norm of the pair.
    pub fn norm_sq(&self) -> f64 {
        self.a1 + self.a2 + self.b1 + self.b2
    }

    pub fn gradient_sum(&self) -> f64 {
        self.a1 + self.a2
    }

    pub fn mass_sum(&self) -> f64 {
        self.b1 + self.b2
    }

    pub fn kirchhoff_sum(&self) -> f64 {
        self.k1 + self.k2
    }

    /// Largest absolute entry; a natural scale for relative comparisons.
    pub fn scale(&self) -> f64 {
        self.as_array().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn as_array(&self) -> [f64; 9] {
        [self.a1, self.a2, self.b1, self.b2, self.k1, self.k2, self.d, self.e, self.f]
    }

    pub fn from_array(x: [f64; 9]) -> Self {
        Breakdown { a1: x[0], a2: x[1], b1: x[2], b2: x[3], k1: x[4], k2: x[5], d: x[6], e: x[7], f: x[8] }
    }

    /// Linear combination `sum w_i x_i`, with `self` holding the weights.
    pub fn dot(&self, other: &Breakdown) -> f64 {
        self.as_array().iter().zip(other.as_array()).map(|(a, b)| a * b).sum()
    }
}

/// `I = (A1+A2)/2 + (B1+B2)/2 + (K1+K2)/4 - mu D/(2p) - nu E/(2q) - lambda F`.
pub fn energy(params: &ModelParams, bd: &Breakdown) -> f64 {
    energy_weights(params).dot(bd)
}

/// Partial derivatives of the energy with respect to the breakdown scalars.
pub fn energy_weights(params: &ModelParams) -> Breakdown {
    let (p, q) = (params.p(), params.q());
    Breakdown {
        a1: 0.5,
        a2: 0.5,
        b1: 0.5,
        b2: 0.5,
        k1: 0.25,
        k2: 0.25,
        d: -params.mu / (2.0 * p),
        e: -params.nu / (2.0 * q),
        f: -params.lambda,
    }
}

/// The Nehari–Pohozaev functional `J`.
pub fn np_functional(params: &ModelParams, bd: &Breakdown) -> f64 {
    let (p, q, a) = (params.p(), params.q(), params.alpha);
    2.0 * bd.gradient_sum() + 4.0 * bd.mass_sum() + 2.0 * bd.kirchhoff_sum()
        - (p + a + 3.0) / p * params.mu * bd.d
        - (q + a + 3.0) / q * params.nu * bd.e
        - 8.0 * params.lambda * bd.f
}

/// The Pohozaev functional `P`.
pub fn pohozaev(params: &ModelParams, bd: &Breakdown) -> f64 {
    let (p, q, a) = (params.p(), params.q(), params.alpha);
    0.5 * bd.gradient_sum() + 1.5 * bd.mass_sum() + 0.5 * bd.kirchhoff_sum()
        - (3.0 + a) / (2.0 * p) * params.mu * bd.d
        - (3.0 + a) / (2.0 * q) * params.nu * bd.e
        - 3.0 * params.lambda * bd.f
}

/// `<I'(u,v), (u,v)>` written in breakdown form.
pub fn nehari(params: &ModelParams, bd: &Breakdown) -> f64 {
    bd.gradient_sum() + bd.mass_sum() + bd.kirchhoff_sum()
        - params.mu * bd.d
        - params.nu * bd.e
        - 2.0 * params.lambda * bd.f
}

/// `inner(g.u, w.u) + inner(g.v, w.v)`.
pub fn pairing(g: &FieldPair, w: &FieldPair) -> Result<f64> {
    Ok(inner(&g.u, &w.u)? + inner(&g.v, &w.v)?)
}

/// `sign(x)|x|^(s-1)`, with `0 -> 0`.
fn signed_pow(f: &Field, s: f64) -> Field {
    f.map(|x| if x == 0.0 { 0.0 } else { x.signum() * x.abs().powf(s - 1.0) })
}

/// Intermediate fields of one evaluation, kept so that gradients of any linear
/// combination of breakdown scalars cost no further transforms.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub pair: FieldPair,
    pub breakdown: Breakdown,
    /// `|grad u|^2`, `|grad v|^2`
    pub grad_sq: (f64, f64),
    lap: (Field, Field),
    /// `(I_alpha * |u|^p) sign(u)|u|^(p-1)` and the `v` analogue.
    nonlocal_force: (Field, Field),
}

/// Bundles parameters, the Riesz operator and spectral tables for repeated
/// evaluation on one grid.
pub struct Evaluator<'a> {
    params: ModelParams,
    riesz: &'a RieszOperator,
    ops: SpectralOps,
}

impl<'a> Evaluator<'a> {
    pub fn new(params: ModelParams, riesz: &'a RieszOperator) -> Self {
        Evaluator { params, riesz, ops: SpectralOps::new(*riesz.grid()) }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn riesz(&self) -> &RieszOperator {
        self.riesz
    }

    pub fn ops(&self) -> &SpectralOps {
        &self.ops
    }

    pub fn evaluate(&self, pair: &FieldPair) -> Result<Evaluation> {
        let grid = self.riesz.grid();
        if pair.u.grid() != grid || pair.v.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let prm = &self.params;
        let (p, q) = (prm.p(), prm.q());
        let (lu, lv) = self.ops.laplacian_pair(&pair.u, &pair.v);
        let gu = -inner(&lu, &pair.u)?;
        let gv = -inner(&lv, &pair.v)?;
        let fu = pair.u.map(|x| x.abs().powf(p));
        let fv = pair.v.map(|x| x.abs().powf(q));
        let (cu, cv) = self.riesz.apply_pair(&fu, &fv)?;
        let d = inner(&cu, &fu)?;
        let e = inner(&cv, &fv)?;
        let breakdown = Breakdown {
            a1: prm.a1 * gu,
            a2: prm.a2 * gv,
            b1: prm.v1 * l2_norm_sq(&pair.u),
            b2: prm.v2 * l2_norm_sq(&pair.v),
            k1: prm.b1 * gu * gu,
            k2: prm.b2 * gv * gv,
            d,
            e,
            f: inner(&pair.u, &pair.v)?,
        };
        let mut force_u = signed_pow(&pair.u, p);
        force_u.values_mut().iter_mut().zip(cu.values()).for_each(|(a, c)| *a *= c);
        let mut force_v = signed_pow(&pair.v, q);
        force_v.values_mut().iter_mut().zip(cv.values()).for_each(|(a, c)| *a *= c);
        Ok(Evaluation {
            pair: pair.clone(),
            breakdown,
            grad_sq: (gu, gv),
            lap: (lu, lv),
            nonlocal_force: (force_u, force_v),
        })
    }

    pub fn breakdown(&self, pair: &FieldPair) -> Result<Breakdown> {
        Ok(self.evaluate(pair)?.breakdown)
    }

    /// Gradient (in `L^2`) of `sum w_i X_i(u, v)` where `X` are the breakdown
    /// scalars and `w` the given weights.
    pub fn weighted_gradient(&self, ev: &Evaluation, w: &Breakdown) -> FieldPair {
        let prm = &self.params;
        let (p, q) = (prm.p(), prm.q());
        let (gu, gv) = ev.grad_sq;
        // d/du of A1, K1 -> -2 a1 Lap u, -4 b1 |grad u|^2 Lap u
        let lap_u = -(2.0 * w.a1 * prm.a1 + 4.0 * w.k1 * prm.b1 * gu);
        let lap_v = -(2.0 * w.a2 * prm.a2 + 4.0 * w.k2 * prm.b2 * gv);
        let mass_u = 2.0 * w.b1 * prm.v1;
        let mass_v = 2.0 * w.b2 * prm.v2;
        let force_u = 2.0 * p * w.d;
        let force_v = 2.0 * q * w.e;
        let combine = |lap: &Field, own: &Field, force: &Field, other: &Field, c: [f64; 4]| {
            let values = lap
                .values()
                .iter()
                .zip(own.values())
                .zip(force.values())
                .zip(other.values())
                .map(|(((l, o), f), x)| c[0] * l + c[1] * o + c[2] * f + c[3] * x)
                .collect();
            Field { grid: *lap.grid(), values }
        };
        let u = combine(&ev.lap.0, &ev.pair.u, &ev.nonlocal_force.0, &ev.pair.v, [lap_u, mass_u, force_u, w.f]);
        let v = combine(&ev.lap.1, &ev.pair.v, &ev.nonlocal_force.1, &ev.pair.u, [lap_v, mass_v, force_v, w.f]);
        FieldPair { u, v }
    }

    /// `(g_u, g_v)`, the `L^2` gradient of the energy.
    pub fn first_variation(&self, ev: &Evaluation) -> FieldPair {
        self.weighted_gradient(ev, &energy_weights(&self.params))
    }

    pub fn energy(&self, pair: &FieldPair) -> Result<f64> {
        Ok(energy(&self.params, &self.breakdown(pair)?))
    }

    pub fn diagnostics(&self, pair: &FieldPair) -> Result<Diagnostics> {
        let ev = self.evaluate(pair)?;
        let g = self.first_variation(&ev);
        Ok(Diagnostics::new(&self.params, ev.breakdown, pairing(&g, pair)?))
    }
}

/// Flat diagnostics record for JSON output.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(flatten)]
    pub breakdown: Breakdown,
    #[serde(rename = "I")]
    pub energy: f64,
    #[serde(rename = "J")]
    pub np: f64,
    #[serde(rename = "P")]
    pub pohozaev: f64,
    pub pairing_self: f64,
}

impl Diagnostics {
    pub fn new(params: &ModelParams, bd: Breakdown, pairing_self: f64) -> Self {
        Diagnostics {
            breakdown: bd,
            energy: energy(params, &bd),
            np: np_functional(params, &bd),
            pohozaev: pohozaev(params, &bd),
            pairing_self,
        }
    }
}

/// One-shot breakdown; builds spectral tables on every call.
pub fn breakdown(params: &ModelParams, op: &RieszOperator, pair: &FieldPair) -> Result<Breakdown> {
    Evaluator::new(*params, op).breakdown(pair)
}

/// One-shot first variation.
pub fn first_variation(params: &ModelParams, op: &RieszOperator, pair: &FieldPair) -> Result<FieldPair> {
    let ev = Evaluator::new(*params, op);
    let e = ev.evaluate(pair)?;
    Ok(ev.first_variation(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bd(rng: &mut impl Rng) -> Breakdown {
        let mut x = [0.0; 9];
        for v in x.iter_mut().take(8) {
            *v = rng.gen_range(0.0..3.0);
        }
        x[8] = rng.gen_range(-1.0..1.0);
        Breakdown::from_array(x)
    }

    fn gaussian_pair(grid: Grid) -> FieldPair {
        let u = grid.sample(|x, y, z| (-(x * x + y * y + z * z) / 2.0).exp());
        let v = grid.sample(|x, y, z| 0.7 * (-((x - 0.3).powi(2) + y * y + z * z) / 1.5).exp());
        FieldPair::new(u, v).unwrap()
    }

    #[test]
    fn zero_breakdown_gives_zero_functionals() {
        let prm = ModelParams::baseline();
        let bd = Breakdown::default();
        assert_eq!(energy(&prm, &bd), 0.0);
        assert_eq!(np_functional(&prm, &bd), 0.0);
        assert_eq!(pohozaev(&prm, &bd), 0.0);
    }

    #[test]
    fn j_is_nehari_plus_twice_pohozaev() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let prm = ModelParams::baseline().with_exponents(1.7, 3.1).with_mu(1.3);
        for _ in 0..100 {
            let bd = random_bd(&mut rng);
            let j = np_functional(&prm, &bd);
            let r = nehari(&prm, &bd) + 2.0 * pohozaev(&prm, &bd);
            assert!((j - r).abs() <= 1e-13 * bd.scale() * 10.0);
        }
    }

    #[test]
    fn large_nonlocal_mass_makes_energy_negative() {
        let prm = ModelParams::baseline();
        let mut bd = Breakdown::from_array([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.1]);
        bd.d *= 1e3;
        bd.e *= 1e3;
        assert!(energy(&prm, &bd) < 0.0);
    }

    #[test]
    fn zero_pair() {
        let grid = Grid::new(8, 2.0).unwrap();
        let op = RieszOperator::new(grid, 1.0).unwrap();
        let prm = ModelParams::baseline();
        let pair = FieldPair::zeros(grid);
        assert_eq!(breakdown(&prm, &op, &pair).unwrap(), Breakdown::default());
        let g = first_variation(&prm, &op, &pair).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn equal_components_saturate_coercivity() {
        let grid = Grid::new(16, 4.0).unwrap();
        let op = RieszOperator::new(grid, 1.0).unwrap();
        let prm = ModelParams::baseline();
        let u = gaussian_pair(grid).u;
        let pair = FieldPair::new(u.clone(), u).unwrap();
        let bd = breakdown(&prm, &op, &pair).unwrap();
        assert_eq!(bd.b1, bd.b2);
        let lhs = bd.mass_sum() - 2.0 * prm.lambda * bd.f;
        let rhs = (1.0 - prm.delta()) * bd.mass_sum();
        assert!((lhs - rhs).abs() < 1e-13 * rhs);
    }

    #[test]
    fn pairing_matches_nehari_combination() {
        let grid = Grid::new(16, 4.0).unwrap();
        let op = RieszOperator::new(grid, 1.0).unwrap();
        let prm = ModelParams::baseline().with_exponents(2.5, 3.0);
        let ev = Evaluator::new(prm, &op);
        let pair = gaussian_pair(grid);
        let e = ev.evaluate(&pair).unwrap();
        let g = ev.first_variation(&e);
        let lhs = pairing(&g, &pair).unwrap();
        let rhs = nehari(&prm, &e.breakdown);
        assert!((lhs - rhs).abs() < 1e-12 * e.breakdown.scale());
    }

    #[test]
    fn kirchhoff_consistent_with_gradient_terms() {
        let grid = Grid::new(16, 4.0).unwrap();
        let op = RieszOperator::new(grid, 1.0).unwrap();
        let mut prm = ModelParams::baseline();
        prm.a1 = 2.0;
        prm.b1 = 0.3;
        let bd = breakdown(&prm, &op, &gaussian_pair(grid)).unwrap();
        let lhs = bd.k1 * prm.a1 * prm.a1;
        let rhs = prm.b1 * bd.a1 * bd.a1;
        assert!((lhs - rhs).abs() < 1e-13 * rhs);
    }

    #[test]
    fn diagnostics_serialize_flat() {
        let prm = ModelParams::baseline();
        let d = Diagnostics::new(&prm, Breakdown::default(), 0.0);
        let s = serde_json::to_string(&d).unwrap();
        for key in ["\"A1\"", "\"F\"", "\"I\"", "\"J\"", "\"P\"", "pairing_self"] {
            assert!(s.contains(key), "{s}");
        }
    }
}
