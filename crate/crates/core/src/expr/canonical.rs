//! Canonical form: expressions normalise to a sum of terms, each a complex
//! coefficient times a monomial in "atoms" (symbols, derivatives, ln/exp
//! factors, and sums kept opaque under negative powers) with integer
//! exponents. Products distribute over sums, constants fold, and common
//! single-term denominators cancel through exponent arithmetic. The map back
//! to an expression tree is deterministic, so simplification is idempotent.

use std::collections::BTreeMap;

use super::scalar::Scalar;
use super::{Expr, ExprError};

type Mono = BTreeMap<Expr, i32>;

#[derive(Debug, Clone, Default)]
pub(crate) struct Poly {
    terms: BTreeMap<Mono, Scalar>,
}

impl Poly {
    fn zero() -> Poly {
        Poly::default()
    }

    fn constant(c: Scalar) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Mono::new(), c);
        }
        p
    }

    fn one() -> Poly {
        Poly::constant(Scalar::one())
    }

    fn atom(e: Expr) -> Poly {
        let mut m = Mono::new();
        m.insert(e, 1);
        let mut p = Poly::zero();
        p.terms.insert(m, Scalar::one());
        p
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, mono: Mono, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add(&coeff);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn add(mut self, other: Poly) -> Poly {
        for (m, c) in other.terms {
            self.add_term(m, c);
        }
        self
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut m = ma.clone();
                for (atom, k) in mb {
                    let e = m.entry(atom.clone()).or_insert(0);
                    *e += k;
                    if *e == 0 {
                        m.remove(atom);
                    }
                }
                out.add_term(m, ca.mul(cb));
            }
        }
        out
    }

    fn powi(&self, n: i32) -> Result<Poly, ExprError> {
        if n == 0 {
            return Ok(Poly::one());
        }
        if n > 0 {
            let mut acc = Poly::one();
            for _ in 0..n {
                acc = acc.mul(self);
            }
            return Ok(acc);
        }
        // negative exponent
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if self.terms.len() == 1 {
            let (mono, coeff) = self.terms.iter().next().unwrap();
            let inv_coeff = coeff.powi(n).ok_or(ExprError::DivisionByZero)?;
            let mut m = Mono::new();
            for (atom, k) in mono {
                m.insert(atom.clone(), k * n);
            }
            let mut p = Poly::zero();
            p.add_term(m, inv_coeff);
            return Ok(p);
        }
        // multi-term denominators stay opaque
        let atom = poly_to_expr(self);
        let mut m = Mono::new();
        m.insert(atom, n);
        let mut p = Poly::zero();
        p.add_term(m, Scalar::one());
        Ok(p)
    }
}

pub(crate) fn to_poly(e: &Expr) -> Result<Poly, ExprError> {
    match e {
        Expr::Const(c) => Ok(Poly::constant(*c)),
        Expr::Sym(_) => Ok(Poly::atom(e.clone())),
        Expr::Deriv(s, ords) => {
            if ords.is_empty() {
                Ok(Poly::atom(Expr::Sym(s.clone())))
            } else {
                Ok(Poly::atom(e.clone()))
            }
        }
        Expr::Sum(es) => {
            let mut acc = Poly::zero();
            for x in es {
                acc = acc.add(to_poly(x)?);
            }
            Ok(acc)
        }
        Expr::Product(es) => {
            let mut acc = Poly::one();
            for x in es {
                acc = acc.mul(&to_poly(x)?);
            }
            Ok(acc)
        }
        Expr::Pow(b, n) => to_poly(b)?.powi(*n),
        Expr::Quot(a, b) => {
            let num = to_poly(a)?;
            let den = to_poly(b)?.powi(-1)?;
            Ok(num.mul(&den))
        }
        Expr::Ln(u) => {
            let cu = simplify(u)?;
            if cu.is_one() {
                Ok(Poly::zero())
            } else {
                Ok(Poly::atom(Expr::Ln(Box::new(cu))))
            }
        }
        Expr::Exp(u) => {
            let cu = simplify(u)?;
            if cu.is_zero() {
                Ok(Poly::one())
            } else {
                Ok(Poly::atom(Expr::Exp(Box::new(cu))))
            }
        }
    }
}

fn term_to_expr(mono: &Mono, coeff: &Scalar) -> Expr {
    let mut factors: Vec<Expr> = Vec::with_capacity(mono.len() + 1);
    for (atom, k) in mono {
        if *k == 1 {
            factors.push(atom.clone());
        } else {
            factors.push(Expr::Pow(Box::new(atom.clone()), *k));
        }
    }
    if factors.is_empty() {
        return Expr::Const(*coeff);
    }
    if coeff.is_one() {
        if factors.len() == 1 {
            return factors.into_iter().next().unwrap();
        }
        return Expr::Product(factors);
    }
    let mut all = Vec::with_capacity(factors.len() + 1);
    all.push(Expr::Const(*coeff));
    all.extend(factors);
    Expr::Product(all)
}

pub(crate) fn poly_to_expr(p: &Poly) -> Expr {
    match p.terms.len() {
        0 => Expr::zero(),
        1 => {
            let (m, c) = p.terms.iter().next().unwrap();
            term_to_expr(m, c)
        }
        _ => Expr::Sum(p.terms.iter().map(|(m, c)| term_to_expr(m, c)).collect()),
    }
}

/// Canonical form. Idempotent: `simplify(simplify(x)) == simplify(x)`.
pub fn simplify(e: &Expr) -> Result<Expr, ExprError> {
    Ok(poly_to_expr(&to_poly(e)?))
}

/// Iterate the canonical terms of an expression as (monomial, coefficient)
/// pairs, for coefficient-extraction passes.
pub(crate) fn canonical_terms(e: &Expr) -> Result<Vec<(Vec<(Expr, i32)>, Scalar)>, ExprError> {
    let p = to_poly(e)?;
    Ok(p
        .terms
        .iter()
        .map(|(m, c)| (m.iter().map(|(a, k)| (a.clone(), *k)).collect(), *c))
        .collect())
}

/// Rebuild an expression from canonical (monomial, coefficient) pairs.
pub(crate) fn terms_to_expr(terms: &[(Vec<(Expr, i32)>, Scalar)]) -> Expr {
    let mut p = Poly::zero();
    for (m, c) in terms {
        let mono: Mono = m.iter().cloned().collect();
        p.add_term(mono, *c);
    }
    poly_to_expr(&p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Workspace;

    #[test]
    fn product_cancels_single_term_quotient() {
        let mut ws = Workspace::new();
        let x = ws.declare_coordinate("x").unwrap();
        let t = ws.declare_coordinate("t").unwrap();
        let a = ws.declare_function("a", &[x.clone(), t.clone()]).unwrap();
        // (a*x)/a -> x
        let e = Expr::sym(&a).mul(Expr::sym(&x)).div(Expr::sym(&a));
        assert_eq!(simplify(&e).unwrap(), Expr::sym(&x));
    }

    #[test]
    fn i_times_i_is_minus_one() {
        let e = Expr::i().mul(Expr::i());
        assert_eq!(simplify(&e).unwrap(), Expr::int(-1));
    }

    #[test]
    fn simplify_is_idempotent() {
        let mut ws = Workspace::new();
        let x = ws.declare_coordinate("x").unwrap();
        let y = ws.declare_coordinate("y").unwrap();
        let e = Expr::sym(&x)
            .add(Expr::one())
            .pow(-1)
            .mul(Expr::sym(&y).add(Expr::sym(&x).pow(2)))
            .sub(Expr::sym(&y).div(Expr::sym(&x).add(Expr::one())));
        let s1 = simplify(&e).unwrap();
        let s2 = simplify(&s1).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn division_by_syntactic_zero_is_an_error() {
        let e = Expr::one().div(Expr::int(2).sub(Expr::int(2)));
        assert!(matches!(simplify(&e), Err(ExprError::DivisionByZero)));
    }

    #[test]
    fn zero_power_is_one() {
        let mut ws = Workspace::new();
        let x = ws.declare_coordinate("x").unwrap();
        assert_eq!(simplify(&Expr::sym(&x).pow(0)).unwrap(), Expr::one());
    }
}
