//! Thomas algorithm for tridiagonal systems, shared by the real boundary
//! value solve and the complex time-stepping.

use std::ops::{Add, Div, Mul, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use super::NumericsError;

pub trait Pivot: Copy {
    fn magnitude(&self) -> f64;
}

impl Pivot for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Pivot for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

const PIVOT_FLOOR: f64 = 1e-300;

/// Solve `A x = rhs` for tridiagonal `A` with `sub[i] = A[i+1][i]`,
/// `diag[i] = A[i][i]`, `sup[i] = A[i][i+1]`. No pivoting; rows with a
/// vanishing pivot report a singular matrix.
pub fn solve_tridiagonal<T>(
    sub: &[T],
    diag: &[T],
    sup: &[T],
    rhs: &[T],
) -> Result<Vec<T>, NumericsError>
where
    T: Copy
        + Pivot
        + Zero
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>,
{
    let n = diag.len();
    if n == 0 || rhs.len() != n || (n > 1 && (sub.len() + 1 != n || sup.len() + 1 != n)) {
        return Err(NumericsError::ShapeMismatch(
            "tridiagonal band lengths".into(),
        ));
    }
    let mut c_prime = vec![T::zero(); n.saturating_sub(1)];
    let mut d_prime = vec![T::zero(); n];

    let mut denom = diag[0];
    if !denom.magnitude().is_finite() || denom.magnitude() < PIVOT_FLOOR {
        return Err(NumericsError::SingularMatrix(0));
    }
    if n > 1 {
        c_prime[0] = sup[0] / denom;
    }
    d_prime[0] = rhs[0] / denom;

    for i in 1..n {
        denom = diag[i] - sub[i - 1] * c_prime[i - 1];
        if !denom.magnitude().is_finite() || denom.magnitude() < PIVOT_FLOOR {
            return Err(NumericsError::SingularMatrix(i));
        }
        if i < n - 1 {
            c_prime[i] = sup[i] / denom;
        }
        d_prime[i] = (rhs[i] - sub[i - 1] * d_prime[i - 1]) / denom;
    }

    let mut x = vec![T::zero(); n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    Ok(x)
}
