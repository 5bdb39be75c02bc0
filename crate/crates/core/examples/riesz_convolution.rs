//! Padded-FFT Riesz convolution against the direct double sum, and the
//! Newtonian identity -Lap(I_2 * f) = f under refinement.

use kirchhoff_choquard::oracle::riesz_direct;
use kirchhoff_choquard::spectral::{l2_norm_sq, OriginRule};
use kirchhoff_choquard::{Grid, RieszOperator};

fn main() -> kirchhoff_choquard::Result<()> {
    let grid = Grid::new(16, 4.0)?;
    let f = grid.sample(|x, y, z| (-(x * x + 2.0 * y * y + 0.5 * z * z) / 2.0).exp() * (1.0 + 0.3 * x));
    for alpha in [0.5, 1.0, 2.0] {
        let op = RieszOperator::new(grid, alpha)?;
        let fast = op.apply(&f)?;
        let slow = riesz_direct(&grid, alpha, &f)?;
        let diff = fast.add_scaled(-1.0, &slow)?;
        println!("alpha {alpha}: |fft - direct| / |direct| = {:.2e}", (l2_norm_sq(&diff) / l2_norm_sq(&slow)).sqrt());
    }

    println!("\nNewtonian identity, Gaussian of unit width on L = 8:");
    for n in [16, 32, 64] {
        let grid = Grid::new(n, 8.0)?;
        let f = grid.sample(|x, y, z| (-(x * x + y * y + z * z) / 2.0).exp());
        for rule in [OriginRule::CellAverage, OriginRule::LatticeZeta] {
            let op = RieszOperator::with_origin(grid, 2.0, rule)?;
            let r = op.apply_neg_laplacian(&f)?.add_scaled(-1.0, &f)?;
            println!("  n = {n:3} {rule:?}: {:.3e}", (l2_norm_sq(&r) / l2_norm_sq(&f)).sqrt());
        }
    }
    Ok(())
}
