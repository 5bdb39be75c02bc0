//! Ground-state levels along increasing mu, warm-started from one another.

use kirchhoff_choquard::minimizer::sweep_mu;
use kirchhoff_choquard::{Grid, ModelParams, SolverConfig};

fn main() -> kirchhoff_choquard::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(32);
    let l: f64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(96.0);
    let points = sweep_mu(&ModelParams::baseline(), Grid::new(n, l)?, &SolverConfig::default(), &[1.0, 1.5, 2.0, 3.0])?;
    for p in &points {
        println!("mu {:4} m {:12.6} converged {} ({} iterations)", p.mu, p.m, p.converged, p.iters);
    }
    Ok(())
}
