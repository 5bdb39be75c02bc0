//! Small vector helpers shared by the field optimizers.

use crate::error::Result;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two-loop recursion. `pg` is the preconditioned gradient, used as the
/// direction when the memory is empty.
pub(crate) fn lbfgs_direction(
    g: &[f64],
    pg: &[f64],
    memory: &[(Vec<f64>, Vec<f64>, f64)],
    precondition: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    if memory.is_empty() {
        return Ok(pg.iter().map(|v| -v).collect());
    }
    let mut q = g.to_vec();
    let mut alphas = vec![0.0; memory.len()];
    for (i, (s, y, rho)) in memory.iter().enumerate().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas[i] = a;
    }
    let (s_last, y_last, _) = memory.last().unwrap();
    let py = precondition(y_last)?;
    let gamma = dot(s_last, y_last) / dot(y_last, &py);
    let mut r: Vec<f64> = precondition(&q)?.iter().map(|v| gamma * v).collect();
    for ((s, y, rho), a) in memory.iter().zip(&alphas) {
        let b = rho * dot(y, &r);
        r.iter_mut().zip(s).for_each(|(ri, si)| *ri += (a - b) * si);
    }
    Ok(r.iter().map(|v| -v).collect())
}

/// Pushes a curvature pair when it is safely positive.
pub(crate) fn push_pair(memory: &mut Vec<(Vec<f64>, Vec<f64>, f64)>, cap: usize, s: Vec<f64>, y: Vec<f64>) {
    let sy = dot(&s, &y);
    if sy > 1e-12 * norm(&s) * norm(&y) {
        if memory.len() == cap {
            memory.remove(0);
        }
        memory.push((s, y, 1.0 / sy));
    }
}
