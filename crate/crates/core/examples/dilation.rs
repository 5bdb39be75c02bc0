//! Field-level dilation w^t(x) = t w(x/t^2) against the breakdown scaling law.

use kirchhoff_choquard::scaling::scale_field;
use kirchhoff_choquard::spectral::OriginRule;
use kirchhoff_choquard::{scale_breakdown, Evaluator, FieldPair, Grid, ModelParams, RieszOperator};

const NAMES: [&str; 9] = ["A1", "A2", "B1", "B2", "K1", "K2", "D", "E", "F"];

fn main() -> kirchhoff_choquard::Result<()> {
    let params = ModelParams::baseline();
    for rule in [OriginRule::CellAverage, OriginRule::LatticeZeta] {
        for n in [32, 64, 128] {
            let grid = Grid::new(n, 8.0)?;
            let op = RieszOperator::with_origin(grid, params.alpha, rule)?;
            let ev = Evaluator::new(params, &op);
            let gauss = |w: f64, a: f64| grid.sample(|x, y, z| a * (-(x * x + y * y + z * z) / (w * w)).exp());
            let pair = FieldPair::new(gauss(1.3, 1.0), gauss(1.5, 0.7))?;
            let bd = ev.breakdown(&pair)?;
            for t in [0.8, 1.25] {
                let moved = FieldPair::new(scale_field(&pair.u, t)?, scale_field(&pair.v, t)?)?;
                let field = ev.breakdown(&moved)?.as_array();
                let law = scale_breakdown(&bd, t, &params)?.as_array();
                let devs: Vec<String> =
                    NAMES.iter().zip(field.iter().zip(law)).map(|(k, (a, b))| format!("{k} {:.1e}", (a - b) / b)).collect();
                println!("{rule:?} n={n:3} t={t}: {}", devs.join(" "));
            }
        }
    }
    Ok(())
}
