//! The scaling group on jet coordinates: lower-triangular matrices with a
//! common diagonal scale and a first column of shifts, its Maurer–Cartan
//! form, and adjoint conjugation through the scale-tracking embedding.

use std::sync::Arc;

use super::{CoordSystem, FormsError, KForm, MatrixForm};
use crate::expr::{simplify, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupFlavor {
    /// General element with independent diagonal and column entries.
    General,
    /// Candidate gauge-subgroup element (written (e, f_i)).
    GaugeCandidate,
    /// Prolongation of the multiplication group: column entries are the
    /// coordinate derivatives of the scale.
    Prolongation,
}

/// Element of the commutative scaling group: an (n+1)x(n+1) matrix with
/// constant diagonal `a` and first-column entries `b_1..b_n`, zeros
/// elsewhere. The diagonal must not be the zero expression.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub a: Expr,
    pub b: Vec<Expr>,
    pub flavor: GroupFlavor,
}

impl GroupElement {
    pub fn new(a: Expr, b: Vec<Expr>, flavor: GroupFlavor) -> Result<GroupElement, FormsError> {
        if simplify(&a)?.is_zero() {
            return Err(FormsError::ZeroDiagonal);
        }
        Ok(GroupElement { a, b, flavor })
    }

    pub fn identity(n: usize) -> GroupElement {
        GroupElement {
            a: Expr::one(),
            b: vec![Expr::zero(); n],
            flavor: GroupFlavor::General,
        }
    }

    /// Block size of the matrix realisation (n + 1).
    pub fn dim(&self) -> usize {
        self.b.len() + 1
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.b.iter().all(|e| e.is_zero())
    }

    /// Group product: diagonal scales multiply, columns compose as
    /// `b -> b*a' + a*b'`.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement, FormsError> {
        if self.dim() != other.dim() {
            return Err(FormsError::DimensionMismatch("group product".into()));
        }
        let a = simplify(&self.a.clone().mul(other.a.clone()))?;
        let b = self
            .b
            .iter()
            .zip(&other.b)
            .map(|(bi, ci)| {
                simplify(
                    &bi.clone()
                        .mul(other.a.clone())
                        .add(self.a.clone().mul(ci.clone())),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        GroupElement::new(a, b, GroupFlavor::General)
    }

    /// Inverse element: `a -> 1/a`, `b_i -> -b_i / a^2`.
    pub fn inverse(&self) -> Result<GroupElement, FormsError> {
        let a_inv = simplify(&Expr::one().div(self.a.clone()))?;
        let b = self
            .b
            .iter()
            .map(|bi| simplify(&bi.clone().neg().div(self.a.clone().pow(2))))
            .collect::<Result<Vec<_>, _>>()?;
        GroupElement::new(a_inv, b, self.flavor)
    }

    /// Degree-0 matrix realisation on the given coordinate system.
    pub fn matrix(&self, coords: &Arc<CoordSystem>) -> Result<MatrixForm, FormsError> {
        let n = self.dim();
        let mut m = MatrixForm::zero(n, n, 0, coords.clone());
        for i in 0..n {
            m.set_entry(i, i, KForm::scalar(coords.clone(), self.a.clone())?)?;
        }
        for (i, bi) in self.b.iter().enumerate() {
            m.set_entry(i + 1, 0, KForm::scalar(coords.clone(), bi.clone())?)?;
        }
        Ok(m)
    }

    /// Weyl embedding `diag(a, g)` of size n + 2.
    pub fn embedded_matrix(&self, coords: &Arc<CoordSystem>) -> Result<MatrixForm, FormsError> {
        let n = self.dim() + 1;
        let mut m = MatrixForm::zero(n, n, 0, coords.clone());
        m.set_entry(0, 0, KForm::scalar(coords.clone(), self.a.clone())?)?;
        let inner = self.matrix(coords)?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                m.set_entry(i + 1, j + 1, inner.entry(i, j).clone())?;
            }
        }
        Ok(m)
    }

    /// Maurer–Cartan form `h^{-1} dh`: lower-triangular with diagonal
    /// `d ln a` and first column `d(b_i / a)`.
    pub fn maurer_cartan(&self, coords: &Arc<CoordSystem>) -> Result<MatrixForm, FormsError> {
        if simplify(&self.a)?.is_zero() {
            return Err(FormsError::ZeroDiagonal);
        }
        let n = self.dim();
        let mut m = MatrixForm::zero(n, n, 1, coords.clone());
        let dln = d_of_scalar(&self.a.clone().ln(), coords)?;
        for i in 0..n {
            m.set_entry(i, i, dln.clone())?;
        }
        for (i, bi) in self.b.iter().enumerate() {
            let ratio = bi.clone().div(self.a.clone());
            m.set_entry(i + 1, 0, d_of_scalar(&ratio, coords)?)?;
        }
        Ok(m)
    }

    /// Maurer–Cartan form of the Weyl embedding: `diag(d ln a, h^{-1} dh)`.
    pub fn embedded_maurer_cartan(
        &self,
        coords: &Arc<CoordSystem>,
    ) -> Result<MatrixForm, FormsError> {
        let n = self.dim() + 1;
        let mut m = MatrixForm::zero(n, n, 1, coords.clone());
        m.set_entry(0, 0, d_of_scalar(&self.a.clone().ln(), coords)?)?;
        let inner = self.maurer_cartan(coords)?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                m.set_entry(i + 1, j + 1, inner.entry(i, j).clone())?;
            }
        }
        Ok(m)
    }
}

/// Differential of a scalar expression over the base coordinates of the
/// system: `d f = sum_c (df/dc) dc`.
pub fn d_of_scalar(f: &Expr, coords: &Arc<CoordSystem>) -> Result<KForm, FormsError> {
    KForm::scalar(coords.clone(), f.clone())?.exterior_derivative()
}

/// Adjoint conjugation `h^{-1} W h` through the Weyl embedding of `h`.
/// `W` must be square with the embedded dimension `h.dim() + 1`.
pub fn ad_conjugate(h: &GroupElement, w: &MatrixForm) -> Result<MatrixForm, FormsError> {
    if w.rows() != w.cols() || w.rows() != h.dim() + 1 {
        return Err(FormsError::DimensionMismatch(format!(
            "adjoint of {}x{} by group element of embedded dimension {}",
            w.rows(),
            w.cols(),
            h.dim() + 1
        )));
    }
    let hinv = h.inverse()?.embedded_matrix(w.coords())?;
    let hmat = h.embedded_matrix(w.coords())?;
    hinv.wedge(w)?.wedge(&hmat)
}
