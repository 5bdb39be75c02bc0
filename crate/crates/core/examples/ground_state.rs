//! Ground state of the baseline system; prints the residual certificate.

use std::time::Instant;

use kirchhoff_choquard::minimizer::{minimize_ground_state, SolverConfig};
use kirchhoff_choquard::{Grid, ModelParams};

fn main() -> kirchhoff_choquard::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(32);
    let l: f64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(8.0);
    let params = ModelParams::baseline();
    let grid = Grid::new(n, l)?;
    let start = Instant::now();
    let res = minimize_ground_state(&params, grid, &SolverConfig::default())?;
    for r in &res.history {
        println!(
            "{:5} M={:.12} J={:.3e} strong={:.3e} t*={:.8} step={:.3e}",
            r.iter, r.m, r.j_res, r.strong_res, r.t_star, r.step
        );
    }
    let r = &res.residuals;
    println!("converged {} after {} iterations, {} evaluations, {:.1?}", res.converged, res.iterations, res.evaluations, start.elapsed());
    println!("m = {:.12}  t* = {:.12}", res.m, res.t_star);
    println!(
        "np {:.3e}  np_pair {:.3e}  strong {:.3e}  pohozaev {:.3e}  nehari {:.3e}  slack {:.4e}  scale {:.6}",
        r.np_rel(), r.np_pair / r.scale, r.strong_rel(), r.pohozaev_rel(), r.nehari_rel(), r.lower_bound_slack, r.scale
    );
    println!("breakdown {:?}", res.breakdown);
    println!("boundary ratio u {:.3e} v {:.3e}", res.pair.u.boundary_ratio(), res.pair.v.boundary_ratio());
    Ok(())
}
