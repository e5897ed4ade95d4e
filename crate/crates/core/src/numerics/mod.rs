//! Finite-difference verification on uniform 1-D grids: the vacuum boundary
//! value problem, Crank–Nicolson evolution in direct and split form, the
//! discrete continuity form, the Madelung decomposition, and convergence
//! order measurement.

mod continuity;
mod convergence;
mod evolve;
mod madelung;
mod tridiag;
mod vacuum;

pub use continuity::continuity_residual;
pub use convergence::{convergence_order, ConvergenceEstimate};
pub use evolve::{evolve_direct, evolve_direct_series, evolve_split, EvolutionConfig, Scheme};
pub use madelung::{madelung_residuals, madelung_split, MadelungFields};
pub use tridiag::solve_tridiagonal;
pub use vacuum::solve_vacuum_bvp;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("grid needs at least 8 interior points, got {0}")]
    GridTooSmall(usize),
    #[error("field contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("tridiagonal solve hit a singular pivot at row {0}")]
    SingularMatrix(usize),
    #[error("boundary values must be positive")]
    BoundaryNotPositive,
    #[error("vacuum amplitude below threshold at index {0}")]
    VacuumVanishes(usize),
    #[error("field amplitude below threshold at index {0}")]
    ZeroAmplitude(usize),
    #[error("phase jump exceeds pi/2 between grid points {0} and {1}")]
    PhaseUndersampled(usize, usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("convergence fit needs at least 3 positive samples")]
    BadConvergenceSamples,
}

/// Amplitude floor below which divisions by `n` or `sqrt(rho)` are refused.
pub const AMPLITUDE_FLOOR: f64 = 1e-10;

/// Uniform grid of `n` interior points on `(x_min, x_max)`; spacing
/// `dx = (x_max - x_min)/(n + 1)`. Endpoints carry Dirichlet data and are
/// not stored in fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Grid1D, NumericsError> {
        if n < 8 {
            return Err(NumericsError::GridTooSmall(n));
        }
        Ok(Grid1D { x_min, x_max, n })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n + 1) as f64
    }

    /// Position of interior point `i` (0-based).
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i + 1) as f64 * self.dx()
    }
}

/// Sample values on the interior points of a grid plus the two Dirichlet
/// boundary values. All values must be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    pub grid: Grid1D,
    pub values: Vec<T>,
    pub boundary: (T, T),
}

pub trait FieldValue: Copy {
    fn finite(&self) -> bool;
    fn abs2(&self) -> f64;
}

impl FieldValue for f64 {
    fn finite(&self) -> bool {
        self.is_finite()
    }
    fn abs2(&self) -> f64 {
        self * self
    }
}

impl FieldValue for Complex64 {
    fn finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn abs2(&self) -> f64 {
        self.norm_sqr()
    }
}

impl<T: FieldValue> Field<T> {
    pub fn new(grid: Grid1D, values: Vec<T>, boundary: (T, T)) -> Result<Field<T>, NumericsError> {
        if values.len() != grid.n {
            return Err(NumericsError::ShapeMismatch(format!(
                "{} values on a grid of {} points",
                values.len(),
                grid.n
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.finite() {
                return Err(NumericsError::NonFinite(i));
            }
        }
        if !boundary.0.finite() || !boundary.1.finite() {
            return Err(NumericsError::NonFinite(usize::MAX));
        }
        Ok(Field {
            grid,
            values,
            boundary,
        })
    }

    pub fn from_fn(
        grid: Grid1D,
        f: impl Fn(f64) -> T,
        boundary: (T, T),
    ) -> Result<Field<T>, NumericsError> {
        let values = (0..grid.n).map(|i| f(grid.x(i))).collect();
        Field::new(grid, values, boundary)
    }

    /// Discrete L2 norm `sqrt(dx * sum |u_i|^2)` over the interior.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v.abs2()).sum::<f64>()).sqrt()
    }

    /// Value at full-array position `i` in `0..n+2` where 0 and n+1 are the
    /// boundary points.
    pub fn at_with_boundary(&self, i: usize) -> T {
        if i == 0 {
            self.boundary.0
        } else if i == self.grid.n + 1 {
            self.boundary.1
        } else {
            self.values[i - 1]
        }
    }
}

impl Field<Complex64> {
    /// Relative L2 distance `|u - v| / |v|`.
    pub fn rel_l2_distance(&self, other: &Field<Complex64>) -> Result<f64, NumericsError> {
        if self.grid != other.grid {
            return Err(NumericsError::ShapeMismatch("grids differ".into()));
        }
        let dx = self.grid.dx();
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            num += (a - b).norm_sqr() * dx;
            den += b.norm_sqr() * dx;
        }
        Ok((num / den).sqrt())
    }
}
