//! Breakdown scalars of a Gaussian pair and the identities tying I, J, P and
//! the Nehari pairing together.

use kirchhoff_choquard::functionals::{nehari, pairing, pohozaev};
use kirchhoff_choquard::oracle::phi_functional;
use kirchhoff_choquard::{energy, np_functional, Evaluator, FieldPair, Grid, ModelParams, RieszOperator};

fn main() -> kirchhoff_choquard::Result<()> {
    let params = ModelParams::baseline();
    let grid = Grid::new(32, 8.0)?;
    let op = RieszOperator::new(grid, params.alpha)?;
    let ev = Evaluator::new(params, &op);
    let gauss = |w: f64, a: f64| grid.sample(|x, y, z| a * (-(x * x + y * y + z * z) / (w * w)).exp());
    let pair = FieldPair::new(gauss(1.5, 1.0), gauss(2.0, 0.6))?;

    let e = ev.evaluate(&pair)?;
    let bd = e.breakdown;
    println!("{}", serde_json::to_string_pretty(&bd).unwrap());
    let n_field = pairing(&ev.first_variation(&e), &pair)?;
    let (i, j, p, n) = (energy(&params, &bd), np_functional(&params, &bd), pohozaev(&params, &bd), nehari(&params, &bd));
    println!("I = {i:.10}  J = {j:.10}  P = {p:.10}");
    println!("<I'(u,v),(u,v)> field pairing {n_field:.12}, breakdown {n:.12}");
    println!("J - (N + 2P) = {:.2e}", j - (n_field + 2.0 * p));
    println!("I - J/8 - Phi = {:.2e}", i - j / 8.0 - phi_functional(&params, &bd));
    Ok(())
}
