//! The fiber polynomial of a breakdown: its unique maximizer, the projection
//! onto the Nehari-Pohozaev manifold, and a dense scan for comparison.

use kirchhoff_choquard::fiber::{decomposition_check, g_correction};
use kirchhoff_choquard::oracle::fiber_scan_summary;
use kirchhoff_choquard::{np_functional, project_to_manifold, solve_fiber_max, Breakdown, FiberPolynomial, ModelParams};

fn main() -> kirchhoff_choquard::Result<()> {
    let params = ModelParams::baseline();
    let bd = Breakdown { a1: 2.0, a2: 1.5, b1: 3.0, b2: 2.5, k1: 4.0, k2: 2.25, d: 1.2, e: 0.8, f: 1.0 };
    let poly = FiberPolynomial::from_breakdown(&bd, &params);
    let t = solve_fiber_max(&poly)?;
    let scan = fiber_scan_summary(&poly, 1e-2, 1e2, 100_000)?;
    println!("t* = {t:.12}, scan argmax {:.12} (step factor {:.2e}), sign changes {}", scan.argmax, scan.resolution - 1.0, scan.sign_changes);

    let (t2, star) = project_to_manifold(&bd, &params)?;
    println!("projection t = {t2:.12}, J at the projection {:.2e}", np_functional(&params, &star));

    for t in [0.5, 0.9, 1.1, 2.0] {
        let (lhs, rhs) = decomposition_check(&bd, t, &params)?;
        println!("t = {t}: I = {lhs:.12}, decomposition = {rhs:.12}, g(p, t) = {:.4e}", g_correction(params.p(), params.alpha, t));
    }
    Ok(())
}
