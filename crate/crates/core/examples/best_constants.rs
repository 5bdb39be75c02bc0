//! Estimates of S_3, S* and S_* next to their closed forms, and the two
//! half-critical thresholds built from them.

use kirchhoff_choquard::constants::{estimate_s_lower, estimate_s_star, estimate_sobolev, threshold_lower, threshold_upper};
use kirchhoff_choquard::model::{CriticalToken, Exponent};
use kirchhoff_choquard::oracle::{s_lower_closed_form, s_star_closed_form, talenti_constant};
use kirchhoff_choquard::{Grid, ModelParams};

fn main() -> kirchhoff_choquard::Result<()> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(32);
    let grid = Grid::new(n, 12.0)?;
    let alpha = 1.0;
    let rows = [
        ("S_3", estimate_sobolev(grid)?, talenti_constant(3)),
        ("S*", estimate_s_star(grid, alpha)?, s_star_closed_form(alpha)?),
        ("S_*", estimate_s_lower(grid, alpha)?, s_lower_closed_form(alpha)?),
    ];
    for (name, est, exact) in &rows {
        println!(
            "{name:>4}: estimate {:.5} (trial {:.5}), closed form {:.5}, deviation {:+.2}%",
            est.value,
            est.trial_value,
            exact,
            100.0 * (est.value / exact - 1.0)
        );
        println!("      trend {:?}", est.refinement_trend);
    }

    let upper = ModelParams { q: Exponent::Token(CriticalToken::UpperCritical), ..ModelParams::baseline() };
    for mu in [1.0, 8.0, 32.0] {
        println!("upper threshold, mu = {mu}: {:.6}", threshold_upper(&upper.with_mu(mu), rows[1].1.value)?);
    }
    let lower = ModelParams { p: Exponent::Token(CriticalToken::LowerCritical), ..ModelParams::baseline() };
    let t = threshold_lower(&lower, rows[2].1.value)?;
    println!("lower threshold: {:.6} (hypothesis exponent), {:.6} (proof exponent)", t.hypothesis_exponent, t.proof_exponent);
    Ok(())
}
