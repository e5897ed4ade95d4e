//! Differentiation, substitution and linear coefficient extraction.

use std::collections::HashMap;
use std::sync::Arc;

use super::canonical::{canonical_terms, simplify, terms_to_expr};
use super::scalar::Scalar;
use super::{DerivOrders, Expr, ExprError, Symbol, SymbolKind};

/// Contact structure of a first jet space: maps (jet variable, base
/// coordinate) pairs to the jet variable carrying that derivative, so the
/// total derivative can reduce `d v / d x^i` to `v_i`. Pairs without an
/// entry stay formal derivative symbols.
#[derive(Debug, Clone, Default)]
pub struct ContactMap {
    map: HashMap<(Arc<Symbol>, Arc<Symbol>), Arc<Symbol>>,
}

impl ContactMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, jet: Arc<Symbol>, coord: Arc<Symbol>, target: Arc<Symbol>) {
        self.map.insert((jet, coord), target);
    }

    fn lookup(&self, jet: &Arc<Symbol>, coord: &Arc<Symbol>) -> Option<Arc<Symbol>> {
        self.map.get(&(jet.clone(), coord.clone())).cloned()
    }
}

#[derive(Clone, Copy)]
enum JetRule<'a> {
    /// Jet variables are independent coordinates: their derivative is zero.
    Constant,
    /// Total derivative on the jet space: bare jet variables reduce through
    /// the contact map (or become formal derivative symbols), formal
    /// derivatives gain an index.
    Total(&'a ContactMap),
}

fn deriv_raw(e: &Expr, coord: &Arc<Symbol>, rule: JetRule) -> Expr {
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Sym(s) => match s.kind {
            SymbolKind::Coordinate => {
                if s == coord {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            SymbolKind::JetVariable => match rule {
                JetRule::Constant => Expr::zero(),
                JetRule::Total(contact) => match contact.lookup(s, coord) {
                    Some(target) => Expr::Sym(target),
                    None => Expr::Deriv(s.clone(), DerivOrders::single(coord.clone())),
                },
            },
            SymbolKind::Function => {
                if s.depends_on(coord) {
                    Expr::Deriv(s.clone(), DerivOrders::single(coord.clone()))
                } else {
                    Expr::zero()
                }
            }
        },
        Expr::Deriv(s, ords) => match s.kind {
            SymbolKind::Function => {
                if s.depends_on(coord) {
                    Expr::Deriv(s.clone(), ords.bump(coord))
                } else {
                    Expr::zero()
                }
            }
            SymbolKind::JetVariable => match rule {
                JetRule::Constant => Expr::zero(),
                JetRule::Total(_) => Expr::Deriv(s.clone(), ords.bump(coord)),
            },
            SymbolKind::Coordinate => Expr::zero(),
        },
        Expr::Sum(es) => Expr::Sum(es.iter().map(|x| deriv_raw(x, coord, rule)).collect()),
        Expr::Product(es) => {
            let mut terms = Vec::with_capacity(es.len());
            for i in 0..es.len() {
                let mut factors = es.clone();
                factors[i] = deriv_raw(&es[i], coord, rule);
                terms.push(Expr::Product(factors));
            }
            Expr::Sum(terms)
        }
        Expr::Pow(b, n) => {
            let db = deriv_raw(b, coord, rule);
            Expr::int(*n as i64)
                .mul(Expr::Pow(b.clone(), n - 1))
                .mul(db)
        }
        Expr::Quot(a, b) => {
            let da = deriv_raw(a, coord, rule);
            let db = deriv_raw(b, coord, rule);
            let num = da.mul((**b).clone()).sub((**a).clone().mul(db));
            num.div((**b).clone().pow(2))
        }
        Expr::Ln(u) => deriv_raw(u, coord, rule).div((**u).clone()),
        Expr::Exp(u) => deriv_raw(u, coord, rule).mul(e.clone()),
    }
}

fn check_coord(coord: &Arc<Symbol>) -> Result<(), ExprError> {
    if coord.kind != SymbolKind::Coordinate {
        return Err(ExprError::KindMismatch {
            name: coord.name.clone(),
            detail: "differentiation requires a base coordinate".into(),
        });
    }
    Ok(())
}

/// Partial derivative on the jet space: jet variables are independent
/// coordinates and differentiate to zero.
pub fn differentiate(e: &Expr, coord: &Arc<Symbol>) -> Result<Expr, ExprError> {
    check_coord(coord)?;
    simplify(&deriv_raw(e, coord, JetRule::Constant))
}

/// Prolonged total derivative: bare jet variables reduce through the contact
/// map, formal jet derivatives gain an index. Coincides with
/// [`differentiate`] on expressions free of jet variables.
pub fn total_derivative(
    e: &Expr,
    coord: &Arc<Symbol>,
    contact: &ContactMap,
) -> Result<Expr, ExprError> {
    check_coord(coord)?;
    simplify(&deriv_raw(e, coord, JetRule::Total(contact)))
}

fn validate_bindings(bindings: &HashMap<Arc<Symbol>, Expr>) -> Result<(), ExprError> {
    for (sym, replacement) in bindings {
        match sym.kind {
            SymbolKind::Coordinate => {
                return Err(ExprError::KindMismatch {
                    name: sym.name.clone(),
                    detail: "base coordinates cannot be substituted".into(),
                });
            }
            SymbolKind::Function => {
                if replacement.contains_jet() {
                    return Err(ExprError::KindMismatch {
                        name: sym.name.clone(),
                        detail: "function replaced by a jet-variable expression".into(),
                    });
                }
            }
            SymbolKind::JetVariable => {}
        }
    }
    Ok(())
}

fn subst_raw(
    e: &Expr,
    bindings: &HashMap<Arc<Symbol>, Expr>,
    rule: JetRule,
) -> Result<Expr, ExprError> {
    Ok(match e {
        Expr::Const(_) => e.clone(),
        Expr::Sym(s) => bindings.get(s).cloned().unwrap_or_else(|| e.clone()),
        Expr::Deriv(s, ords) => match bindings.get(s) {
            None => e.clone(),
            Some(replacement) => {
                let mut acc = replacement.clone();
                for (c, k) in ords.pairs() {
                    for _ in 0..*k {
                        acc = deriv_raw(&acc, c, rule);
                    }
                }
                acc
            }
        },
        Expr::Sum(es) => Expr::Sum(
            es.iter()
                .map(|x| subst_raw(x, bindings, rule))
                .collect::<Result<_, _>>()?,
        ),
        Expr::Product(es) => Expr::Product(
            es.iter()
                .map(|x| subst_raw(x, bindings, rule))
                .collect::<Result<_, _>>()?,
        ),
        Expr::Pow(b, n) => Expr::Pow(Box::new(subst_raw(b, bindings, rule)?), *n),
        Expr::Quot(a, b) => Expr::Quot(
            Box::new(subst_raw(a, bindings, rule)?),
            Box::new(subst_raw(b, bindings, rule)?),
        ),
        Expr::Ln(u) => Expr::Ln(Box::new(subst_raw(u, bindings, rule)?)),
        Expr::Exp(u) => Expr::Exp(Box::new(subst_raw(u, bindings, rule)?)),
    })
}

/// Simultaneous capture-free substitution followed by simplification.
/// Derivative nodes of a bound symbol differentiate the replacement.
pub fn substitute(e: &Expr, bindings: &HashMap<Arc<Symbol>, Expr>) -> Result<Expr, ExprError> {
    validate_bindings(bindings)?;
    simplify(&subst_raw(e, bindings, JetRule::Constant)?)
}

/// Substitution for jet-variable actions: derivative nodes of bound jet
/// variables differentiate the replacement with the prolonged total
/// derivative, so contact reductions apply.
pub fn jet_substitute(
    e: &Expr,
    bindings: &HashMap<Arc<Symbol>, Expr>,
    contact: &ContactMap,
) -> Result<Expr, ExprError> {
    validate_bindings(bindings)?;
    simplify(&subst_raw(e, bindings, JetRule::Total(contact))?)
}

/// Split an expression linear in the jet variables into the formal leading
/// part (terms carrying jet derivative symbols), the coefficient of each jet
/// variable, and a jet-free remainder.
#[derive(Debug, Clone)]
pub struct JetLinearParts {
    pub leading: Expr,
    pub coeffs: Vec<Expr>,
    pub rest: Expr,
}

pub fn extract_jet_linear(e: &Expr, jets: &[Arc<Symbol>]) -> Result<JetLinearParts, ExprError> {
    let terms = canonical_terms(e)?;
    let mut leading = Vec::new();
    let mut coeffs: Vec<Vec<(Vec<(Expr, i32)>, Scalar)>> = vec![Vec::new(); jets.len()];
    let mut rest = Vec::new();

    for (mono, coeff) in terms {
        let mut bare: Option<usize> = None;
        let mut has_formal = false;
        let mut remainder: Vec<(Expr, i32)> = Vec::new();
        let mut bad = false;
        for (atom, k) in &mono {
            match atom {
                Expr::Sym(s) if s.kind == SymbolKind::JetVariable => {
                    let idx = jets.iter().position(|j| j == s);
                    match idx {
                        Some(idx) if *k == 1 && bare.is_none() => bare = Some(idx),
                        _ => bad = true,
                    }
                }
                Expr::Deriv(s, _) if s.kind == SymbolKind::JetVariable => {
                    if *k == 1 && !has_formal {
                        has_formal = true;
                        remainder.push((atom.clone(), *k));
                    } else {
                        bad = true;
                    }
                }
                other => {
                    if other.contains_jet() {
                        bad = true;
                    } else {
                        remainder.push((other.clone(), *k));
                    }
                }
            }
        }
        if bad || (bare.is_some() && has_formal) {
            return Err(ExprError::NonlinearJet);
        }
        if has_formal {
            leading.push((mono.clone(), coeff));
        } else if let Some(idx) = bare {
            coeffs[idx].push((remainder, coeff));
        } else {
            rest.push((mono.clone(), coeff));
        }
    }

    Ok(JetLinearParts {
        leading: terms_to_expr(&leading),
        coeffs: coeffs.iter().map(|ts| terms_to_expr(ts)).collect(),
        rest: terms_to_expr(&rest),
    })
}

/// Solve `e == 0` for a symbol occurring linearly and only as a bare factor.
pub fn solve_linear(e: &Expr, sym: &Arc<Symbol>) -> Result<Expr, ExprError> {
    let terms = canonical_terms(e)?;
    let mut coef = Vec::new();
    let mut rest = Vec::new();
    for (mono, coeff) in terms {
        let mut hit = false;
        let mut remainder = Vec::new();
        for (atom, k) in &mono {
            match atom {
                Expr::Sym(s) if s == sym => {
                    if *k == 1 && !hit {
                        hit = true;
                    } else {
                        return Err(ExprError::NotLinear {
                            name: sym.name.clone(),
                        });
                    }
                }
                other => {
                    if other.contains_symbol(sym) {
                        return Err(ExprError::NotLinear {
                            name: sym.name.clone(),
                        });
                    }
                    remainder.push((other.clone(), *k));
                }
            }
        }
        if hit {
            coef.push((remainder, coeff));
        } else {
            rest.push((mono, coeff));
        }
    }
    let coef_expr = terms_to_expr(&coef);
    if coef_expr.is_zero() {
        return Err(ExprError::NotLinear {
            name: sym.name.clone(),
        });
    }
    let rest_expr = terms_to_expr(&rest);
    simplify(&rest_expr.neg().div(coef_expr))
}
