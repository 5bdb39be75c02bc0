//! The two nonexistence certificates on random pairs, and the solver refusing
//! the doubly critical regimes.

use kirchhoff_choquard::minimizer::nonexistence_probe;
use kirchhoff_choquard::model::{CriticalToken, Exponent};
use kirchhoff_choquard::{minimize_ground_state, Evaluator, FieldPair, Grid, ModelParams, RieszOperator, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> kirchhoff_choquard::Result<()> {
    let grid = Grid::new(16, 5.0)?;
    let op = RieszOperator::new(grid, 1.0)?;
    let both = |e| ModelParams { p: e, q: e, ..ModelParams::baseline() };
    let upper = both(Exponent::Token(CriticalToken::UpperCritical));
    let lower = both(Exponent::Token(CriticalToken::LowerCritical));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let c: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let w = rng.gen_range(0.8..2.0);
        let bump = |s: f64| grid.sample(|x, y, z| s * (-((x - c[0]).powi(2) + (y - c[1]).powi(2) + (z * c[2]).powi(2)) / (w * w)).exp());
        let pair = FieldPair::new(bump(1.0), bump(rng.gen_range(-1.0..1.0)))?;
        let a = nonexistence_probe(&upper, &op, &pair)?;
        let b = nonexistence_probe(&lower, &op, &pair)?;
        let grad = Evaluator::new(lower, &op).breakdown(&pair)?.gradient_sum();
        println!("Q1 {:10.5} >= {:10.5}   Q2 {:10.5} >= {:10.5}", a.q1, a.bound1, b.q2, 0.5 * grad);
    }
    for p in [upper, lower] {
        match minimize_ground_state(&p, grid, &SolverConfig::default()) {
            Err(e) => println!("{e}"),
            Ok(_) => println!("unexpected: solver ran"),
        }
    }
    Ok(())
}
