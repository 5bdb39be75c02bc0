//! Property tests for the standing invariants of every module.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::{Quotient, QuotientEvaluator};
use crate::fiber::{decomposition_check, g_correction, project_to_manifold, solve_fiber_max, FiberPolynomial};
use crate::functionals::{energy, np_functional, pairing, pohozaev, Breakdown, Evaluator};
use crate::minimizer::{lower_bound_constant, probe_breakdown};
use crate::model::{riesz_normalization, validate_params, CriticalToken, Exponent, ExponentRegime, ModelParams};
use crate::scaling::scale_field;
use crate::spectral::{inner, nonlocal_term, Field, FieldPair, Grid, RieszOperator, SpectralOps};

fn grid8() -> Grid {
    Grid::new(8, 3.0).unwrap()
}

fn noisy_bump(grid: Grid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = grid.half_length();
    let c: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-0.2..0.2) * l);
    let w = rng.gen_range(0.2..0.4) * l;
    let mut f = grid.sample(|x, y, z| (-((x - c[0]).powi(2) + (y - c[1]).powi(2) + (z - c[2]).powi(2)) / (w * w)).exp());
    f.values_mut().iter_mut().for_each(|v| *v *= 1.0 + 0.5 * rng.gen_range(-1.0..1.0));
    f
}

fn white(grid: Grid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Field::from_values(grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

prop_compose! {
    fn params()(
        a1 in 0.2..3.0f64, a2 in 0.2..3.0f64, b1 in 0.2..3.0f64, b2 in 0.2..3.0f64,
        v1 in 0.2..3.0f64, v2 in 0.2..3.0f64, frac in 0.01..0.99f64,
        mu in 0.2..3.0f64, nu in 0.2..3.0f64,
        alpha in prop::sample::select(vec![0.5, 1.0, 2.0]),
        s in 0.0..1.0f64, r in 0.0..1.0f64,
    ) -> ModelParams {
        let (lo, hi) = ((3.0 + alpha) / 3.0, 3.0 + alpha);
        let p = lo + (hi - lo) * s.min(r);
        let q = lo + (hi - lo) * s.max(r);
        ModelParams { a1, a2, b1, b2, v1, v2, lambda: frac * (v1 * v2).sqrt(), mu, nu, p: p.into(), q: q.into(), alpha }
    }
}

prop_compose! {
    fn breakdown_for(params: ModelParams)(
        gu in 1e-2..10.0f64, gv in 1e-2..10.0f64, nu2 in 1e-2..10.0f64, nv2 in 1e-2..10.0f64,
        d in 1e-3..10.0f64, e in 0.0..10.0f64, c in -1.0..1.0f64,
    ) -> Breakdown {
        Breakdown {
            a1: params.a1 * gu,
            a2: params.a2 * gv,
            b1: params.v1 * nu2,
            b2: params.v2 * nv2,
            k1: params.b1 * gu * gu,
            k2: params.b2 * gv * gv,
            d,
            e,
            f: c * (nu2 * nv2).sqrt(),
        }
    }
}

fn params_and_breakdown() -> impl Strategy<Value = (ModelParams, Breakdown)> {
    params().prop_flat_map(|p| (Just(p), breakdown_for(p)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn validation_is_total(
        a in -1.0..3.0f64, v1 in -1.0..3.0f64, lambda in -1.0..3.0f64,
        alpha in -1.0..4.0f64, p in -1.0..9.0f64, q in -1.0..9.0f64,
    ) {
        let prm = ModelParams { a1: a, v1, lambda, alpha, p: p.into(), q: q.into(), ..ModelParams::baseline() };
        match validate_params(&prm) {
            Ok(regime) => {
                prop_assert_eq!(regime, ExponentRegime::Noncritical);
                prop_assert!(prm.delta() > 0.0 && prm.delta() < 1.0);
            }
            Err(_) => {}
        }
    }

    #[test]
    fn declared_tokens_fix_the_regime(alpha in 0.05..2.95f64, t in 0.01..0.99f64) {
        let (lo, hi) = ((3.0 + alpha) / 3.0, 3.0 + alpha);
        let mid = Exponent::Value(lo + (hi - lo) * t);
        let up = Exponent::Token(CriticalToken::UpperCritical);
        let down = Exponent::Token(CriticalToken::LowerCritical);
        let base = ModelParams { alpha, ..ModelParams::baseline() };
        let regime = |p, q| validate_params(&base.with_exponents(p, q));
        prop_assert_eq!(regime(mid, mid).unwrap(), ExponentRegime::Noncritical);
        prop_assert_eq!(regime(mid, up).unwrap(), ExponentRegime::UpperHalfCritical);
        prop_assert_eq!(regime(down, mid).unwrap(), ExponentRegime::LowerHalfCritical);
        prop_assert_eq!(regime(up, up).unwrap(), ExponentRegime::DoublyCriticalUpper);
        prop_assert_eq!(regime(down, down).unwrap(), ExponentRegime::DoublyCriticalLower);
        // nearness never promotes a regime
        let near = Exponent::Value(hi * (1.0 - 1e-12));
        prop_assert_eq!(regime(mid, near).unwrap(), ExponentRegime::Noncritical);
    }

    #[test]
    fn riesz_normalization_positive(alpha in 1e-6..(3.0 - 1e-6)) {
        let a = riesz_normalization(alpha).unwrap();
        prop_assert!(a > 0.0 && a.is_finite());
    }

    #[test]
    fn breakdown_invariants((prm, bd) in params_and_breakdown()) {
        prop_assert!((bd.k1 * prm.a1 * prm.a1 - prm.b1 * bd.a1 * bd.a1).abs() <= 1e-12 * bd.k1 * prm.a1 * prm.a1);
        let lhs = bd.mass_sum() - 2.0 * prm.lambda * bd.f;
        prop_assert!(lhs >= (1.0 - prm.delta()) * bd.mass_sum() - 1e-12 * bd.scale());
        let poly = FiberPolynomial::from_breakdown(&bd, &prm);
        prop_assert!(poly.c4 >= 0.0 && poly.cp >= 0.0 && poly.cq >= 0.0);
        prop_assert!(poly.ep > 8.0 && poly.eq > 8.0);
        prop_assert!(poly.c8 >= 0.25 * bd.kirchhoff_sum() - 1e-12 * bd.scale());
    }

    #[test]
    fn projection_is_the_fiber_maximum((prm, bd) in params_and_breakdown(), s in -2.0..2.0f64) {
        let (_, star) = project_to_manifold(&bd, &prm).unwrap();
        prop_assert!(np_functional(&prm, &star).abs() <= 1e-9 * star.scale());
        let poly = FiberPolynomial::from_breakdown(&star, &prm);
        let top = poly.value(1.0).unwrap();
        prop_assert!(poly.value(s.exp()).unwrap() <= top + 1e-12 * top.abs());
        // level bound on the manifold
        prop_assert!(energy(&prm, &star) >= lower_bound_constant(&prm) * star.norm_sq() - 1e-9 * star.scale());
    }

    #[test]
    fn larger_mu_lowers_the_fiber_maximum((prm, bd) in params_and_breakdown(), k in 1.01..4.0f64) {
        let peak = |p: &ModelParams| {
            let poly = FiberPolynomial::from_breakdown(&bd, p);
            poly.value(solve_fiber_max(&poly).unwrap()).unwrap()
        };
        prop_assert!(peak(&prm.with_mu(k * prm.mu)) < peak(&prm));
    }

    #[test]
    fn energy_decomposition((prm, bd) in params_and_breakdown(), t in 0.2..4.0f64) {
        let (a, b) = decomposition_check(&bd, t, &prm).unwrap();
        let scale = crate::fiber::scale_breakdown(&bd, t, &prm).unwrap().scale() + bd.scale();
        prop_assert!((a - b).abs() <= 1e-11 * scale * (1.0 + prm.mu + prm.nu));
        if (t - 1.0).abs() > 1e-3 {
            prop_assert!(g_correction(prm.p(), prm.alpha, t) > 0.0);
            prop_assert!(g_correction(prm.q(), prm.alpha, t) > 0.0);
        }
    }

    #[test]
    fn probes_are_combinations_of_p_and_n((prm, bd) in params_and_breakdown()) {
        let probe = probe_breakdown(&prm, &bd);
        let n = crate::functionals::nehari(&prm, &bd);
        let p = pohozaev(&prm, &bd);
        prop_assert!((probe.q1 - (p - 0.5 * n)).abs() <= 1e-12 * bd.scale() * (1.0 + prm.mu + prm.nu));
        prop_assert!((probe.q2 - (1.5 * n - p)).abs() <= 1e-12 * bd.scale() * (1.0 + prm.mu + prm.nu));
        prop_assert_eq!(probe_breakdown(&prm, &Breakdown::default()).q1, 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn riesz_is_symmetric_and_positive(seed in any::<u64>(), alpha in prop::sample::select(vec![0.5, 1.0, 2.0])) {
        let grid = grid8();
        let op = RieszOperator::new(grid, alpha).unwrap();
        let f = white(grid, seed);
        let g = white(grid, seed ^ 0x5a5a);
        let a = inner(&op.apply(&f).unwrap(), &g).unwrap();
        let b = inner(&f, &op.apply(&g).unwrap()).unwrap();
        let scale = inner(&op.apply(&f.abs()).unwrap(), &g.abs()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * scale);
        let d = nonlocal_term(&op, &f, 1.5).unwrap();
        prop_assert!(d >= -1e-12 * nonlocal_term(&op, &f.abs(), 1.5).unwrap().abs().max(1.0));
    }

    #[test]
    fn spectral_integration_by_parts(seed in any::<u64>()) {
        let grid = grid8();
        let ops = SpectralOps::new(grid);
        // the first derivative drops the Nyquist planes, so the identity is
        // stated for fields without them
        let k = grid.wavenumbers();
        let nyq = -k[grid.n() / 2];
        let n = grid.n();
        let mask: Vec<f64> = (0..grid.len())
            .map(|i| {
                let idx = [i / (n * n), (i / n) % n, i % n];
                if idx.iter().any(|&j| k[j].abs() == nyq) { 0.0 } else { 1.0 }
            })
            .collect();
        let f = ops.apply_multiplier(&white(grid, seed), &mask);
        let g = ops.apply_multiplier(&white(grid, seed.wrapping_add(1)), &mask);
        let lhs = -inner(&ops.laplacian(&f), &g).unwrap();
        let rhs: f64 = (0..3).map(|ax| inner(&ops.partial(&f, ax), &ops.partial(&g, ax)).unwrap()).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs().max(rhs.abs()).max(1.0));
    }

    #[test]
    fn np_identity_on_fields(seed in any::<u64>(), prm in params()) {
        let grid = grid8();
        let op = RieszOperator::new(grid, prm.alpha).unwrap();
        let ev = Evaluator::new(prm, &op);
        let pair = FieldPair::new(noisy_bump(grid, seed), noisy_bump(grid, !seed)).unwrap();
        let e = ev.evaluate(&pair).unwrap();
        let n = pairing(&ev.first_variation(&e), &pair).unwrap();
        let bd = e.breakdown;
        let j = np_functional(&prm, &bd);
        prop_assert!((j - n - 2.0 * pohozaev(&prm, &bd)).abs() <= 1e-11 * bd.scale() * (1.0 + prm.mu + prm.nu));
        for x in [bd.a1, bd.a2, bd.b1, bd.b2, bd.k1, bd.k2, bd.d, bd.e] {
            prop_assert!(x >= 0.0);
        }
    }

    #[test]
    fn quotients_are_amplitude_invariant(seed in any::<u64>(), c in 1e-3..1e3f64) {
        let grid = Grid::new(16, 4.0).unwrap();
        let w = noisy_bump(grid, seed).abs();
        for kind in [Quotient::Sobolev, Quotient::UpperCritical { alpha: 1.0 }, Quotient::LowerCritical { alpha: 1.5 }] {
            let ev = QuotientEvaluator::new(kind, grid).unwrap();
            let (a, b) = (ev.value(&w).unwrap(), ev.value(&w.scaled(c)).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn dilations_compose(s in 0.85..1.15f64, t in 0.85..1.15f64) {
        let grid = Grid::new(64, 8.0).unwrap();
        let f = grid.sample(|x, y, z| (-(x * x + y * y + z * z) / 3.0).exp());
        let twice = scale_field(&scale_field(&f, s).unwrap(), t).unwrap();
        let once = scale_field(&f, s * t).unwrap();
        let err = once.add_scaled(-1.0, &twice).unwrap().max_abs() / once.max_abs();
        prop_assert!(err <= 1e-3, "{}", err);
    }
}
