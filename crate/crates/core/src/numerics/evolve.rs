//! Crank–Nicolson time stepping with homogeneous Dirichlet boundaries, in
//! the direct form `i u_t = -u_xx + V u` and in the split form
//! `i w_t = -w_xx - (2 n'/n) w_x` on a fixed vacuum background. The Cayley
//! form `(I + i dt/2 H) u' = (I - i dt/2 H) u` conserves the discrete L2
//! norm exactly for Hermitian `H`.

use num_complex::Complex64;

use super::{solve_tridiagonal, Field, NumericsError, AMPLITUDE_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    CrankNicolson,
}

/// Time-stepping parameters; total time is `dt * steps`. The potential is
/// sampled at the half step `t + dt/2`.
pub struct EvolutionConfig {
    pub dt: f64,
    pub steps: usize,
    pub scheme: Scheme,
    pub potential: Box<dyn Fn(f64, f64) -> f64>,
}

impl EvolutionConfig {
    pub fn new(dt: f64, steps: usize, potential: impl Fn(f64, f64) -> f64 + 'static) -> Self {
        EvolutionConfig {
            dt,
            steps,
            scheme: Scheme::CrankNicolson,
            potential: Box::new(potential),
        }
    }
}

// One Cayley step for a tridiagonal Hamiltonian given by band arrays.
fn cayley_step(
    u: &[Complex64],
    h_sub: &[Complex64],
    h_diag: &[Complex64],
    h_sup: &[Complex64],
    dt: f64,
) -> Result<Vec<Complex64>, NumericsError> {
    let n = u.len();
    let mu = Complex64::new(0.0, dt / 2.0);
    let one = Complex64::new(1.0, 0.0);

    // rhs = (I - mu H) u
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut acc = h_diag[i] * u[i];
        if i > 0 {
            acc += h_sub[i - 1] * u[i - 1];
        }
        if i < n - 1 {
            acc += h_sup[i] * u[i + 1];
        }
        rhs[i] = u[i] - mu * acc;
    }

    let a_sub: Vec<Complex64> = h_sub.iter().map(|h| mu * h).collect();
    let a_sup: Vec<Complex64> = h_sup.iter().map(|h| mu * h).collect();
    let a_diag: Vec<Complex64> = h_diag.iter().map(|h| one + mu * h).collect();
    solve_tridiagonal(&a_sub, &a_diag, &a_sup, &rhs)
}

fn direct_bands(
    u: &Field<Complex64>,
    cfg: &EvolutionConfig,
    t_mid: f64,
) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    let n = u.grid.n;
    let dx2 = u.grid.dx() * u.grid.dx();
    let off = Complex64::new(-1.0 / dx2, 0.0);
    let diag: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(2.0 / dx2 + (cfg.potential)(u.grid.x(i), t_mid), 0.0))
        .collect();
    (vec![off; n - 1], diag, vec![off; n - 1])
}

/// Evolve `i u_t = -u_xx + V u` and return the full time series
/// (`steps + 1` fields including the initial one).
pub fn evolve_direct_series(
    u0: &Field<Complex64>,
    cfg: &EvolutionConfig,
) -> Result<Vec<Field<Complex64>>, NumericsError> {
    let zero = Complex64::new(0.0, 0.0);
    let mut series = Vec::with_capacity(cfg.steps + 1);
    let mut u = Field::new(u0.grid, u0.values.clone(), (zero, zero))?;
    series.push(u.clone());
    for k in 0..cfg.steps {
        let t_mid = (k as f64 + 0.5) * cfg.dt;
        let (sub, diag, sup) = direct_bands(&u, cfg, t_mid);
        let next = cayley_step(&u.values, &sub, &diag, &sup, cfg.dt)?;
        u = Field::new(u0.grid, next, (zero, zero))?;
        series.push(u.clone());
    }
    Ok(series)
}

/// Evolve `i u_t = -u_xx + V u` and return the final field.
pub fn evolve_direct(
    u0: &Field<Complex64>,
    cfg: &EvolutionConfig,
) -> Result<Field<Complex64>, NumericsError> {
    let zero = Complex64::new(0.0, 0.0);
    let mut u = Field::new(u0.grid, u0.values.clone(), (zero, zero))?;
    for k in 0..cfg.steps {
        let t_mid = (k as f64 + 0.5) * cfg.dt;
        let (sub, diag, sup) = direct_bands(&u, cfg, t_mid);
        let next = cayley_step(&u.values, &sub, &diag, &sup, cfg.dt)?;
        u = Field::new(u0.grid, next, (zero, zero))?;
    }
    Ok(u)
}

/// Evolve the reduced field on a vacuum background:
/// `i w_t + w_xx + (2/n) n' w_x = 0` with centred stencils for both the
/// gradient of `w` and the background derivative `n'`. The potential is
/// absorbed by the background and does not appear.
pub fn evolve_split(
    w0: &Field<Complex64>,
    vacuum: &Field<f64>,
    cfg: &EvolutionConfig,
) -> Result<Field<Complex64>, NumericsError> {
    if w0.grid != vacuum.grid {
        return Err(NumericsError::ShapeMismatch("w and n grids differ".into()));
    }
    let n = w0.grid.n;
    for (i, v) in vacuum.values.iter().enumerate() {
        if v.abs() < AMPLITUDE_FLOOR {
            return Err(NumericsError::VacuumVanishes(i));
        }
    }
    let dx = w0.grid.dx();
    let dx2 = dx * dx;

    // c_i = 2 n'_i / n_i with a centred derivative using the boundary data
    let c: Vec<f64> = (0..n)
        .map(|i| {
            let left = vacuum.at_with_boundary(i);
            let right = vacuum.at_with_boundary(i + 2);
            2.0 * (right - left) / (2.0 * dx) / vacuum.values[i]
        })
        .collect();

    // H w = -w_xx - c w_x as complex bands
    let diag = vec![Complex64::new(2.0 / dx2, 0.0); n];
    let sub: Vec<Complex64> = (1..n)
        .map(|i| Complex64::new(-1.0 / dx2 + c[i] / (2.0 * dx), 0.0))
        .collect();
    let sup: Vec<Complex64> = (0..n - 1)
        .map(|i| Complex64::new(-1.0 / dx2 - c[i] / (2.0 * dx), 0.0))
        .collect();

    let zero = Complex64::new(0.0, 0.0);
    let mut w = Field::new(w0.grid, w0.values.clone(), (zero, zero))?;
    for _ in 0..cfg.steps {
        let next = cayley_step(&w.values, &sub, &diag, &sup, cfg.dt)?;
        w = Field::new(w0.grid, next, (zero, zero))?;
    }
    Ok(w)
}
