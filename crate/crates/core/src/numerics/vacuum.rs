//! Vacuum boundary value problem: `n'' = V n` with Dirichlet data, second
//! order central differences, one tridiagonal solve.

use super::{solve_tridiagonal, Field, Grid1D, NumericsError};

/// Solve `n'' = V(x) n` on the grid with positive Dirichlet boundary data.
/// For `V > 0` the discrete maximum principle keeps the output strictly
/// positive. A sign-changing `V` is accepted but warned about: the operator
/// can sit arbitrarily close to an eigenvalue and the solve loses accuracy.
pub fn solve_vacuum_bvp(
    potential: &dyn Fn(f64) -> f64,
    grid: &Grid1D,
    boundary: (f64, f64),
) -> Result<Field<f64>, NumericsError> {
    if boundary.0 <= 0.0 || boundary.1 <= 0.0 {
        return Err(NumericsError::BoundaryNotPositive);
    }
    let n = grid.n;
    let dx2 = grid.dx() * grid.dx();
    let v: Vec<f64> = (0..n).map(|i| potential(grid.x(i))).collect();
    if v.iter().any(|&vi| vi < 0.0) && v.iter().any(|&vi| vi > 0.0) {
        eprintln!(
            "warning: potential changes sign on the grid; the vacuum solve may be ill-conditioned"
        );
    }

    // (n_{i-1} - 2 n_i + n_{i+1})/dx^2 - V_i n_i = 0 with boundary terms
    // moved to the right-hand side.
    let diag: Vec<f64> = v.iter().map(|vi| -2.0 / dx2 - vi).collect();
    let off = vec![1.0 / dx2; n - 1];
    let mut rhs = vec![0.0; n];
    rhs[0] -= boundary.0 / dx2;
    rhs[n - 1] -= boundary.1 / dx2;

    let values = solve_tridiagonal(&off, &diag, &off, &rhs)?;
    Field::new(*grid, values, boundary)
}
