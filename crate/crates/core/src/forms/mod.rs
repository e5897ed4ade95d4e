//! Exterior calculus over the symbolic kernel: scalar and matrix-valued
//! differential forms on an ordered coordinate set, which may mix base
//! coordinates with jet variables (the solder column `theta` lives on the
//! extended set so that `d theta = 0` holds literally).

mod group;

pub use group::{ad_conjugate, GroupElement, GroupFlavor};

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{
    differentiate, simplify, total_derivative, ContactMap, Expr, ExprError, Symbol, SymbolKind,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormsError {
    #[error("coordinate systems differ")]
    CoordinateMismatch,
    #[error("matrix dimensions are incompatible: {0}")]
    DimensionMismatch(String),
    #[error("form coefficient depends on a jet variable")]
    JetCoefficient,
    #[error("group diagonal is syntactically zero")]
    ZeroDiagonal,
    #[error("coordinate `{0}` is missing from the target system")]
    MissingCoordinate(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Ordered coordinate list shared by the forms of one computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordSystem {
    coords: Vec<Arc<Symbol>>,
}

impl CoordSystem {
    pub fn new(coords: Vec<Arc<Symbol>>) -> Arc<Self> {
        Arc::new(CoordSystem { coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[Arc<Symbol>] {
        &self.coords
    }

    pub fn index_of(&self, sym: &Symbol) -> Option<usize> {
        self.coords.iter().position(|c| c.as_ref() == sym)
    }
}

/// Differential form of a fixed degree: a map from strictly increasing
/// coordinate multi-indices to expression coefficients. Zero coefficients
/// are pruned, so the zero form has an empty term map.
#[derive(Debug, Clone, PartialEq)]
pub struct KForm {
    coords: Arc<CoordSystem>,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

impl KForm {
    pub fn zero(coords: Arc<CoordSystem>, degree: usize) -> KForm {
        KForm {
            coords,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// A 0-form from a scalar expression.
    pub fn scalar(coords: Arc<CoordSystem>, value: Expr) -> Result<KForm, FormsError> {
        let mut f = KForm::zero(coords, 0);
        f.insert(Vec::new(), value)?;
        Ok(f)
    }

    /// The basis one-form `d c` for a coordinate of the system.
    pub fn basis(coords: Arc<CoordSystem>, coord: &Symbol) -> Result<KForm, FormsError> {
        let idx = coords
            .index_of(coord)
            .ok_or_else(|| FormsError::MissingCoordinate(coord.name.clone()))?;
        let mut f = KForm::zero(coords, 1);
        f.insert(vec![idx], Expr::one())?;
        Ok(f)
    }

    /// A one-form from (coordinate, coefficient) pairs.
    pub fn one_form(
        coords: Arc<CoordSystem>,
        entries: &[(&Arc<Symbol>, Expr)],
    ) -> Result<KForm, FormsError> {
        let mut f = KForm::zero(coords.clone(), 1);
        for (c, e) in entries {
            let idx = coords
                .index_of(c)
                .ok_or_else(|| FormsError::MissingCoordinate(c.name.clone()))?;
            f.insert(vec![idx], e.clone())?;
        }
        Ok(f)
    }

    fn insert(&mut self, index: Vec<usize>, coeff: Expr) -> Result<(), FormsError> {
        debug_assert_eq!(index.len(), self.degree);
        let coeff = simplify(&coeff)?;
        if coeff.is_zero() {
            return Ok(());
        }
        match self.terms.entry(index) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = simplify(&o.get().clone().add(coeff))?;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
        Ok(())
    }

    pub fn coords(&self) -> &Arc<CoordSystem> {
        &self.coords
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.terms.iter()
    }

    /// Coefficient of a degree-1 basis form; zero if absent.
    pub fn coefficient_for(&self, coord: &Symbol) -> Expr {
        debug_assert_eq!(self.degree, 1);
        match self.coords.index_of(coord) {
            Some(idx) => self
                .terms
                .get(&vec![idx])
                .cloned()
                .unwrap_or_else(Expr::zero),
            None => Expr::zero(),
        }
    }

    /// Coefficient for an arbitrary multi-index given by coordinate symbols
    /// in the order stored (strictly increasing after mapping).
    pub fn coefficient(&self, index: &[&Symbol]) -> Result<Expr, FormsError> {
        let mut mapped = Vec::with_capacity(index.len());
        for c in index {
            mapped.push(
                self.coords
                    .index_of(c)
                    .ok_or_else(|| FormsError::MissingCoordinate(c.name.clone()))?,
            );
        }
        Ok(self.terms.get(&mapped).cloned().unwrap_or_else(Expr::zero))
    }

    pub fn add(&self, other: &KForm) -> Result<KForm, FormsError> {
        if self.coords != other.coords || self.degree != other.degree {
            return Err(FormsError::CoordinateMismatch);
        }
        let mut out = self.clone();
        for (idx, coeff) in &other.terms {
            out.insert(idx.clone(), coeff.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Result<KForm, FormsError> {
        self.scale(&Expr::int(-1))
    }

    pub fn scale(&self, factor: &Expr) -> Result<KForm, FormsError> {
        let mut out = KForm::zero(self.coords.clone(), self.degree);
        for (idx, coeff) in &self.terms {
            out.insert(idx.clone(), coeff.clone().mul(factor.clone()))?;
        }
        Ok(out)
    }

    /// Wedge product with sign-tracked index merging. Bilinear; degrees add.
    /// Index collisions vanish, so degrees past the coordinate count give
    /// the zero form rather than an error.
    pub fn wedge(&self, other: &KForm) -> Result<KForm, FormsError> {
        if self.coords != other.coords {
            return Err(FormsError::CoordinateMismatch);
        }
        let mut out = KForm::zero(self.coords.clone(), self.degree + other.degree);
        for (ia, ca) in &self.terms {
            for (ib, cb) in &other.terms {
                if let Some((merged, sign)) = merge_indices(ia, ib) {
                    let mut coeff = ca.clone().mul(cb.clone());
                    if sign < 0 {
                        coeff = coeff.neg();
                    }
                    out.insert(merged, coeff)?;
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative. Coefficients must be free of jet variables; the
    /// derivative runs over the base coordinates of the system (jet
    /// directions contribute nothing since coefficients cannot depend on
    /// them).
    pub fn exterior_derivative(&self) -> Result<KForm, FormsError> {
        let mut out = KForm::zero(self.coords.clone(), self.degree + 1);
        for (idx, coeff) in &self.terms {
            if coeff.contains_jet() {
                return Err(FormsError::JetCoefficient);
            }
            for (ci, coord) in self.coords.coords().iter().enumerate() {
                if coord.kind != SymbolKind::Coordinate {
                    continue;
                }
                let d = differentiate(coeff, coord)?;
                if d.is_zero() {
                    continue;
                }
                if let Some((merged, sign)) = merge_indices(&[ci], idx) {
                    let c = if sign < 0 { d.neg() } else { d };
                    out.insert(merged, c)?;
                }
            }
        }
        Ok(out)
    }

    /// Re-express the form on a larger coordinate system containing every
    /// coordinate of the current one.
    pub fn extend_to(&self, target: &Arc<CoordSystem>) -> Result<KForm, FormsError> {
        let mut mapping = Vec::with_capacity(self.coords.len());
        for c in self.coords.coords() {
            mapping.push(
                target
                    .index_of(c)
                    .ok_or_else(|| FormsError::MissingCoordinate(c.name.clone()))?,
            );
        }
        let mut out = KForm::zero(target.clone(), self.degree);
        for (idx, coeff) in &self.terms {
            let mut new_idx: Vec<usize> = idx.iter().map(|i| mapping[*i]).collect();
            let sign = sort_with_sign(&mut new_idx);
            debug_assert!(sign != 0, "injective mapping cannot collide");
            let c = if sign < 0 {
                coeff.clone().neg()
            } else {
                coeff.clone()
            };
            out.insert(new_idx, c)?;
        }
        Ok(out)
    }
}

/// Merge two strictly increasing index lists; `None` on a shared index,
/// otherwise the merged list and the permutation sign.
fn merge_indices(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut combined: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    let sign = sort_with_sign(&mut combined);
    if sign == 0 {
        None
    } else {
        Some((combined, sign))
    }
}

/// Insertion sort counting swaps; returns 0 if duplicates exist.
fn sort_with_sign(v: &mut [usize]) -> i32 {
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && v[j - 1] == v[j] {
            return 0;
        }
    }
    sign
}

/// Rectangular matrix of forms with a uniform degree.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixForm {
    rows: usize,
    cols: usize,
    degree: usize,
    coords: Arc<CoordSystem>,
    entries: Vec<Vec<KForm>>,
}

impl MatrixForm {
    pub fn new(entries: Vec<Vec<KForm>>) -> Result<MatrixForm, FormsError> {
        let rows = entries.len();
        if rows == 0 {
            return Err(FormsError::DimensionMismatch("empty matrix".into()));
        }
        let cols = entries[0].len();
        let degree = entries[0][0].degree;
        let coords = entries[0][0].coords.clone();
        for row in &entries {
            if row.len() != cols {
                return Err(FormsError::DimensionMismatch("ragged rows".into()));
            }
            for f in row {
                if f.degree != degree {
                    return Err(FormsError::DimensionMismatch("mixed degrees".into()));
                }
                if f.coords != coords {
                    return Err(FormsError::CoordinateMismatch);
                }
            }
        }
        Ok(MatrixForm {
            rows,
            cols,
            degree,
            coords,
            entries,
        })
    }

    pub fn zero(
        rows: usize,
        cols: usize,
        degree: usize,
        coords: Arc<CoordSystem>,
    ) -> MatrixForm {
        let entries = (0..rows)
            .map(|_| (0..cols).map(|_| KForm::zero(coords.clone(), degree)).collect())
            .collect();
        MatrixForm {
            rows,
            cols,
            degree,
            coords,
            entries,
        }
    }

    /// Degree-0 identity matrix.
    pub fn identity(n: usize, coords: Arc<CoordSystem>) -> Result<MatrixForm, FormsError> {
        let mut m = MatrixForm::zero(n, n, 0, coords.clone());
        for i in 0..n {
            m.entries[i][i] = KForm::scalar(coords.clone(), Expr::one())?;
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coords(&self) -> &Arc<CoordSystem> {
        &self.coords
    }

    pub fn entry(&self, i: usize, j: usize) -> &KForm {
        &self.entries[i][j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, f: KForm) -> Result<(), FormsError> {
        if f.degree != self.degree || f.coords != self.coords {
            return Err(FormsError::DimensionMismatch("entry shape".into()));
        }
        self.entries[i][j] = f;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|f| f.is_zero())
    }

    pub fn add(&self, other: &MatrixForm) -> Result<MatrixForm, FormsError> {
        if self.rows != other.rows || self.cols != other.cols || self.degree != other.degree {
            return Err(FormsError::DimensionMismatch("addition".into()));
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[i][j] = self.entries[i][j].add(&other.entries[i][j])?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &Expr) -> Result<MatrixForm, FormsError> {
        let mut out = self.clone();
        for row in &mut out.entries {
            for f in row.iter_mut() {
                *f = f.scale(factor)?;
            }
        }
        Ok(out)
    }

    /// Matrix product where scalar multiplication is the wedge product.
    /// Entry degrees add; degree-0 matrices act as plain scalar matrices.
    pub fn wedge(&self, other: &MatrixForm) -> Result<MatrixForm, FormsError> {
        if self.cols != other.rows {
            return Err(FormsError::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.coords != other.coords {
            return Err(FormsError::CoordinateMismatch);
        }
        let mut out = MatrixForm::zero(
            self.rows,
            other.cols,
            self.degree + other.degree,
            self.coords.clone(),
        );
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = KForm::zero(self.coords.clone(), self.degree + other.degree);
                for k in 0..self.cols {
                    acc = acc.add(&self.entries[i][k].wedge(&other.entries[k][j])?)?;
                }
                out.entries[i][j] = acc;
            }
        }
        Ok(out)
    }

    pub fn exterior_derivative(&self) -> Result<MatrixForm, FormsError> {
        let mut out = MatrixForm::zero(self.rows, self.cols, self.degree + 1, self.coords.clone());
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[i][j] = self.entries[i][j].exterior_derivative()?;
            }
        }
        Ok(out)
    }

    pub fn extend_to(&self, target: &Arc<CoordSystem>) -> Result<MatrixForm, FormsError> {
        let mut out = MatrixForm::zero(self.rows, self.cols, self.degree, target.clone());
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[i][j] = self.entries[i][j].extend_to(target)?;
            }
        }
        Ok(out)
    }
}

/// Equivalence of two forms under random evaluation: every coefficient of
/// one must match the corresponding coefficient of the other.
pub fn kform_equiv(
    a: &KForm,
    b: &KForm,
    opts: &crate::expr::EquivOptions,
) -> Result<bool, FormsError> {
    if a.degree != b.degree {
        return Ok(false);
    }
    let (a, b) = if a.coords == b.coords {
        (a.clone(), b.clone())
    } else if a.coords.len() >= b.coords.len() {
        (a.clone(), b.extend_to(&a.coords)?)
    } else {
        (a.extend_to(&b.coords)?, b.clone())
    };
    let mut indices: std::collections::BTreeSet<Vec<usize>> = a.terms.keys().cloned().collect();
    indices.extend(b.terms.keys().cloned());
    for idx in indices {
        let ca = a.terms.get(&idx).cloned().unwrap_or_else(Expr::zero);
        let cb = b.terms.get(&idx).cloned().unwrap_or_else(Expr::zero);
        if !crate::expr::equiv(&ca, &cb, opts)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Entrywise [`kform_equiv`] for matrices of forms.
pub fn matrix_equiv(
    a: &MatrixForm,
    b: &MatrixForm,
    opts: &crate::expr::EquivOptions,
) -> Result<bool, FormsError> {
    if a.rows != b.rows || a.cols != b.cols {
        return Ok(false);
    }
    for i in 0..a.rows {
        for j in 0..a.cols {
            if !kform_equiv(a.entry(i, j), b.entry(i, j), opts)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Curvature of a square one-form matrix: `dW + W /\ W`.
pub fn curvature(w: &MatrixForm) -> Result<MatrixForm, FormsError> {
    if w.rows != w.cols {
        return Err(FormsError::DimensionMismatch("curvature of non-square".into()));
    }
    if w.degree != 1 {
        return Err(FormsError::DimensionMismatch("curvature needs degree 1".into()));
    }
    w.exterior_derivative()?.add(&w.wedge(w)?)
}

/// Covariant divergence of a jet vector against a connection matrix: the
/// weighted formal leading part plus the connection contraction, where the
/// i-th base coordinate pairs with the i-th jet row,
/// `sum_i w_i D_i(u_i) + sum_{i,j} W[i][j](d_i) u_j`.
pub fn covariant_divergence(
    w: &MatrixForm,
    u: &[Expr],
    weights: &[Expr],
    base_coords: &[Arc<Symbol>],
    contact: &ContactMap,
) -> Result<Expr, FormsError> {
    if w.rows != w.cols {
        return Err(FormsError::DimensionMismatch("divergence of non-square".into()));
    }
    if u.len() != w.rows || weights.len() != w.rows || base_coords.len() != w.rows {
        return Err(FormsError::DimensionMismatch(
            "jet vector / weights / coordinates length".into(),
        ));
    }
    let mut acc = Expr::zero();
    for i in 0..w.rows {
        let du = total_derivative(&u[i], &base_coords[i], contact)?;
        acc = acc.add(weights[i].clone().mul(du));
        for j in 0..w.cols {
            let coeff = w.entry(i, j).coefficient_for(&base_coords[i]);
            if !coeff.is_zero() {
                acc = acc.add(coeff.mul(u[j].clone()));
            }
        }
    }
    Ok(simplify(&acc)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equiv, parse, EquivOptions, Workspace};

    fn setup() -> (Workspace, Arc<CoordSystem>) {
        let mut ws = Workspace::new();
        let t = ws.declare_coordinate("t").unwrap();
        let x = ws.declare_coordinate("x").unwrap();
        ws.declare_function("a", &[t.clone(), x.clone()]).unwrap();
        ws.declare_function("b", &[t.clone(), x.clone()]).unwrap();
        ws.declare_function("g", &[t.clone(), x.clone()]).unwrap();
        let cs = CoordSystem::new(vec![t, x]);
        (ws, cs)
    }

    #[test]
    fn wedge_of_basis_with_itself_vanishes() {
        let (ws, cs) = setup();
        let dx = KForm::basis(cs, &ws.lookup("x").unwrap()).unwrap();
        assert!(dx.wedge(&dx).unwrap().is_zero());
    }

    #[test]
    fn wedge_antisymmetry_on_basis() {
        let (ws, cs) = setup();
        let dt = KForm::basis(cs.clone(), &ws.lookup("t").unwrap()).unwrap();
        let dx = KForm::basis(cs, &ws.lookup("x").unwrap()).unwrap();
        let tx = dt.wedge(&dx).unwrap();
        let xt = dx.wedge(&dt).unwrap();
        assert_eq!(tx, xt.neg().unwrap());
    }

    #[test]
    fn wedge_is_bilinear_over_coefficients() {
        let (ws, cs) = setup();
        let t = ws.lookup("t").unwrap();
        let x = ws.lookup("x").unwrap();
        let f = parse(&ws, "a").unwrap();
        let g = parse(&ws, "g").unwrap();
        let ft = KForm::one_form(cs.clone(), &[(&t, f.clone())]).unwrap();
        let gx = KForm::one_form(cs.clone(), &[(&x, g.clone())]).unwrap();
        let w = ft.wedge(&gx).unwrap();
        let coeff = w.coefficient(&[&t, &x]).unwrap();
        let expected = parse(&ws, "a*g").unwrap();
        assert_eq!(coeff, expected);
    }

    #[test]
    fn d_of_x_dt_is_dx_wedge_dt() {
        let (ws, cs) = setup();
        let t = ws.lookup("t").unwrap();
        let x = ws.lookup("x").unwrap();
        let form = KForm::one_form(cs, &[(&t, Expr::sym(&x))]).unwrap();
        let d = form.exterior_derivative().unwrap();
        // dx ^ dt = -(dt ^ dx): stored on the (t, x) basis with coefficient -1
        assert_eq!(d.coefficient(&[&t, &x]).unwrap(), Expr::int(-1));
    }

    #[test]
    fn d_squared_vanishes_on_random_one_forms() {
        let (ws, cs) = setup();
        let t = ws.lookup("t").unwrap();
        let x = ws.lookup("x").unwrap();
        let alpha = KForm::one_form(
            cs,
            &[
                (&t, parse(&ws, "a*b + x^2").unwrap()),
                (&x, parse(&ws, "ln(a)*g").unwrap()),
            ],
        )
        .unwrap();
        // scalar first: d(d f) = 0
        let f = KForm::scalar(alpha.coords().clone(), parse(&ws, "a^2*g + t*x").unwrap()).unwrap();
        let ddf = f
            .exterior_derivative()
            .unwrap()
            .exterior_derivative()
            .unwrap();
        assert!(ddf.is_zero(), "d^2 f = {:?}", ddf);
        // degree 1: only the single 2-form coefficient must cancel
        let dda = alpha
            .exterior_derivative()
            .unwrap()
            .exterior_derivative()
            .unwrap();
        assert!(dda.is_zero());
    }

    #[test]
    fn leibniz_rule_for_d_over_wedge() {
        let (ws, cs) = setup();
        let t = ws.lookup("t").unwrap();
        let x = ws.lookup("x").unwrap();
        let opts = EquivOptions::default();
        let p = KForm::one_form(
            cs.clone(),
            &[(&t, parse(&ws, "a*x").unwrap()), (&x, parse(&ws, "b").unwrap())],
        )
        .unwrap();
        let q = KForm::scalar(cs, parse(&ws, "g*t").unwrap()).unwrap();
        // d(q ^ p) = dq ^ p + q d p   (q is a 0-form)
        let lhs = q.wedge(&p).unwrap().exterior_derivative().unwrap();
        let rhs = q
            .exterior_derivative()
            .unwrap()
            .wedge(&p)
            .unwrap()
            .add(&q.wedge(&p.exterior_derivative().unwrap()).unwrap())
            .unwrap();
        let c_lhs = lhs.coefficient(&[&t, &x]).unwrap();
        let c_rhs = rhs.coefficient(&[&t, &x]).unwrap();
        assert!(equiv(&c_lhs, &c_rhs, &opts).unwrap());
    }

    #[test]
    fn exterior_derivative_rejects_jet_coefficients() {
        let mut ws = Workspace::new();
        let t = ws.declare_coordinate("t").unwrap();
        let v = ws.declare_jet_variable("v").unwrap();
        let cs = CoordSystem::new(vec![t.clone()]);
        let f = KForm {
            coords: cs.clone(),
            degree: 1,
            terms: [(vec![0], Expr::sym(&v))].into_iter().collect(),
        };
        assert!(matches!(
            f.exterior_derivative(),
            Err(FormsError::JetCoefficient)
        ));
    }

    #[test]
    fn d_of_jet_basis_form_is_zero() {
        // dv is a basis one-form on the extended system; d(dv) = 0
        let mut ws = Workspace::new();
        let t = ws.declare_coordinate("t").unwrap();
        let x = ws.declare_coordinate("x").unwrap();
        let v = ws.declare_jet_variable("v").unwrap();
        let cs = CoordSystem::new(vec![t, x, v.clone()]);
        let dv = KForm::basis(cs, &v).unwrap();
        assert!(dv.exterior_derivative().unwrap().is_zero());
    }

    #[test]
    fn matrix_identity_acts_trivially() {
        let (ws, cs) = setup();
        let t = ws.lookup("t").unwrap();
        let x = ws.lookup("x").unwrap();
        let alpha = KForm::one_form(
            cs.clone(),
            &[(&t, parse(&ws, "a").unwrap()), (&x, parse(&ws, "b").unwrap())],
        )
        .unwrap();
        let theta = MatrixForm::new(vec![vec![alpha.clone()], vec![alpha]]).unwrap();
        let id = MatrixForm::identity(2, cs).unwrap();
        assert_eq!(id.wedge(&theta).unwrap(), theta);
    }

    #[test]
    fn degree_overflow_wedges_to_zero() {
        let (ws, cs) = setup();
        let t = ws.lookup("t").unwrap();
        let x = ws.lookup("x").unwrap();
        let dt = KForm::basis(cs.clone(), &t).unwrap();
        let dx = KForm::basis(cs, &x).unwrap();
        let two = dt.wedge(&dx).unwrap();
        let three = two.wedge(&dt).unwrap();
        assert_eq!(three.degree(), 3);
        assert!(three.is_zero());
    }
}
