//! Discrete exterior derivative of the continuity one-form
//! `lambda = i n u dx - (n u_x - u n') dt` on the space-time lattice of an
//! evolution series. Closedness of `lambda` encodes the evolution equation
//! against a background solving the vacuum equation.

use num_complex::Complex64;

use super::{Field, NumericsError};

/// Maximum cell-averaged circulation of `lambda` over interior lattice
/// cells: `d lambda` evaluated by Stokes on each `dt x dx` cell, second
/// order in both spacings. The series must be uniformly sampled in time;
/// the background `n` shares the spatial grid.
pub fn continuity_residual(
    series: &[Field<Complex64>],
    vacuum: &Field<f64>,
    dt: f64,
) -> Result<f64, NumericsError> {
    if series.len() < 2 {
        return Err(NumericsError::ShapeMismatch(
            "need at least two time slices".into(),
        ));
    }
    let grid = vacuum.grid;
    for s in series {
        if s.grid != grid {
            return Err(NumericsError::ShapeMismatch("series grid differs".into()));
        }
    }
    let n_full = grid.n + 2;
    let dx = grid.dx();

    // background and its centred derivative on the full node range
    let nv: Vec<f64> = (0..n_full).map(|i| vacuum.at_with_boundary(i)).collect();
    let mut npr = vec![0.0; n_full];
    for i in 1..n_full - 1 {
        npr[i] = (nv[i + 1] - nv[i - 1]) / (2.0 * dx);
    }
    npr[0] = (nv[1] - nv[0]) / dx;
    npr[n_full - 1] = (nv[n_full - 1] - nv[n_full - 2]) / dx;

    // lambda components P dx + Q dt at every node of every slice
    let mut p = vec![vec![Complex64::default(); n_full]; series.len()];
    let mut q = vec![vec![Complex64::default(); n_full]; series.len()];
    let i_unit = Complex64::new(0.0, 1.0);
    for (k, slice) in series.iter().enumerate() {
        let u: Vec<Complex64> = (0..n_full).map(|i| slice.at_with_boundary(i)).collect();
        for i in 0..n_full {
            let ux = if i == 0 {
                (u[1] - u[0]) / dx
            } else if i == n_full - 1 {
                (u[n_full - 1] - u[n_full - 2]) / dx
            } else {
                (u[i + 1] - u[i - 1]) / (2.0 * dx)
            };
            p[k][i] = i_unit * nv[i] * u[i];
            q[k][i] = -(nv[i] * ux - u[i] * npr[i]);
        }
    }

    // circulation of lambda around each interior cell, divided by dt dx;
    // cells touching the walls use one-sided u_x and are skipped
    let mut max_res = 0.0_f64;
    for k in 0..series.len() - 1 {
        for i in 1..n_full - 2 {
            let bottom = (p[k][i] + p[k][i + 1]) * 0.5 * dx;
            let top = (p[k + 1][i] + p[k + 1][i + 1]) * 0.5 * dx;
            let right = (q[k][i + 1] + q[k + 1][i + 1]) * 0.5 * dt;
            let left = (q[k][i] + q[k + 1][i]) * 0.5 * dt;
            let circ = (bottom - top + right - left) / (dt * dx);
            max_res = max_res.max(circ.norm());
        }
    }
    Ok(max_res)
}
