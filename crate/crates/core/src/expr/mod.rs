//! Symbolic kernel: immutable expression trees over coordinates, jet
//! variables and named functions, with differentiation, substitution,
//! canonical simplification and seeded probabilistic equivalence.

mod calculus;
mod canonical;
mod equiv;
mod parse;
mod scalar;
mod symbol;

pub use calculus::{
    differentiate, extract_jet_linear, jet_substitute, solve_linear, substitute, total_derivative,
    ContactMap, JetLinearParts,
};
pub use canonical::simplify;
pub use equiv::{equiv, eval_at, EquivOptions};
pub use parse::parse;
pub use scalar::Scalar;
pub use symbol::{Symbol, SymbolKind, Workspace};

use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown symbol `{name}`")]
    UnknownSymbol { name: String },
    #[error("symbol `{name}` already declared with a different kind")]
    DuplicateSymbol { name: String },
    #[error("kind mismatch for `{name}`: {detail}")]
    KindMismatch { name: String, detail: String },
    #[error("division by syntactic zero")]
    DivisionByZero,
    #[error("expression is not linear in `{name}`")]
    NotLinear { name: String },
    #[error("expression is not linear in the jet variables")]
    NonlinearJet,
    #[error("unbound symbol `{name}` in numeric evaluation")]
    UnboundSymbol { name: String },
    #[error("evaluation kept hitting singular sample points")]
    SingularSampling,
}

/// Sorted multi-index of partial derivative orders. The invariant (sorted by
/// coordinate, orders >= 1) is maintained by [`DerivOrders::new`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DerivOrders(Vec<(Arc<Symbol>, u32)>);

impl DerivOrders {
    pub fn new(mut pairs: Vec<(Arc<Symbol>, u32)>) -> Self {
        pairs.retain(|(_, k)| *k > 0);
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Arc<Symbol>, u32)> = Vec::with_capacity(pairs.len());
        for (s, k) in pairs {
            if let Some(last) = merged.last_mut() {
                if last.0 == s {
                    last.1 += k;
                    continue;
                }
            }
            merged.push((s, k));
        }
        DerivOrders(merged)
    }

    pub fn single(coord: Arc<Symbol>) -> Self {
        DerivOrders(vec![(coord, 1)])
    }

    pub fn bump(&self, coord: &Arc<Symbol>) -> Self {
        let mut pairs = self.0.clone();
        pairs.push((coord.clone(), 1));
        DerivOrders::new(pairs)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(Arc<Symbol>, u32)] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|(_, k)| k).sum()
    }
}

/// Immutable expression tree. Construct through the helper methods (or the
/// parser), then normalise with [`simplify`]; all kernel operations return
/// simplified trees. Structural equality and hashing agree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Const(Scalar),
    Sym(Arc<Symbol>),
    /// Partial derivative of a named function (or a formal base-derivative of
    /// a jet variable) with a sorted multi-index.
    Deriv(Arc<Symbol>, DerivOrders),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, i32),
    Quot(Box<Expr>, Box<Expr>),
    Ln(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Scalar::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Scalar::one())
    }

    pub fn i() -> Expr {
        Expr::Const(Scalar::i())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Scalar::from_int(n))
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::Const(Scalar::from_ratio(num, den))
    }

    pub fn sym(s: &Arc<Symbol>) -> Expr {
        Expr::Sym(s.clone())
    }

    pub fn add(self, other: Expr) -> Expr {
        Expr::Sum(vec![self, other])
    }

    pub fn sub(self, other: Expr) -> Expr {
        Expr::Sum(vec![self, other.neg()])
    }

    pub fn neg(self) -> Expr {
        Expr::Product(vec![Expr::int(-1), self])
    }

    pub fn mul(self, other: Expr) -> Expr {
        Expr::Product(vec![self, other])
    }

    pub fn div(self, other: Expr) -> Expr {
        Expr::Quot(Box::new(self), Box::new(other))
    }

    pub fn pow(self, n: i32) -> Expr {
        Expr::Pow(Box::new(self), n)
    }

    pub fn ln(self) -> Expr {
        Expr::Ln(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn deriv(f: &Arc<Symbol>, coord: &Arc<Symbol>, order: u32) -> Expr {
        if order == 0 {
            Expr::Sym(f.clone())
        } else {
            Expr::Deriv(f.clone(), DerivOrders::new(vec![(coord.clone(), order)]))
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    /// Walk the tree, calling `f` on every node.
    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Sym(_) | Expr::Deriv(..) => {}
            Expr::Sum(es) | Expr::Product(es) => es.iter().for_each(|e| e.walk(f)),
            Expr::Pow(b, _) => b.walk(f),
            Expr::Quot(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Ln(e) | Expr::Exp(e) => e.walk(f),
        }
    }

    /// True if any jet variable (bare or under a formal derivative) occurs.
    pub fn contains_jet(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| match e {
            Expr::Sym(s) if s.kind == SymbolKind::JetVariable => found = true,
            Expr::Deriv(s, _) if s.kind == SymbolKind::JetVariable => found = true,
            _ => {}
        });
        found
    }

    pub fn contains_symbol(&self, sym: &Symbol) -> bool {
        let mut found = false;
        self.walk(&mut |e| match e {
            Expr::Sym(s) if s.as_ref() == sym => found = true,
            Expr::Deriv(s, _) if s.as_ref() == sym => found = true,
            _ => {}
        });
        found
    }

    /// Canonical prefix text form, used in golden files and JSON reports.
    pub fn prefix(&self) -> String {
        let mut out = String::new();
        self.write_prefix(&mut out);
        out
    }

    fn write_prefix(&self, out: &mut String) {
        match self {
            Expr::Const(c) => match c {
                Scalar::Exact { .. } => out.push_str(&format!("(num {})", c)),
                Scalar::Approx(_) => out.push_str(&format!("(num~ {})", c)),
            },
            Expr::Sym(s) => out.push_str(&s.name),
            Expr::Deriv(s, ords) => {
                out.push_str("(D ");
                out.push_str(&s.name);
                for (c, k) in ords.pairs() {
                    out.push_str(&format!(" {} {}", c.name, k));
                }
                out.push(')');
            }
            Expr::Sum(es) => {
                out.push_str("(+");
                for e in es {
                    out.push(' ');
                    e.write_prefix(out);
                }
                out.push(')');
            }
            Expr::Product(es) => {
                out.push_str("(*");
                for e in es {
                    out.push(' ');
                    e.write_prefix(out);
                }
                out.push(')');
            }
            Expr::Pow(b, n) => {
                out.push_str("(^ ");
                b.write_prefix(out);
                out.push_str(&format!(" {})", n));
            }
            Expr::Quot(a, b) => {
                out.push_str("(/ ");
                a.write_prefix(out);
                out.push(' ');
                b.write_prefix(out);
                out.push(')');
            }
            Expr::Ln(e) => {
                out.push_str("(ln ");
                e.write_prefix(out);
                out.push(')');
            }
            Expr::Exp(e) => {
                out.push_str("(exp ");
                e.write_prefix(out);
                out.push(')');
            }
        }
    }
}

// Precedence levels for the infix renderer.
const PREC_SUM: u8 = 0;
const PREC_PRODUCT: u8 = 1;
const PREC_POW: u8 = 2;
const PREC_ATOM: u8 = 3;

fn write_infix(e: &Expr, out: &mut String, parent: u8) {
    let prec = match e {
        Expr::Sum(_) => PREC_SUM,
        Expr::Product(_) | Expr::Quot(..) => PREC_PRODUCT,
        Expr::Pow(..) => PREC_POW,
        Expr::Const(c) => {
            // negative or composite constants need parens inside products
            let simple = !c.is_negative_real()
                && matches!(c, Scalar::Exact { re: _, im } if im == &num_rational::Ratio::from_integer(0))
                || c.is_one();
            if simple {
                PREC_ATOM
            } else {
                PREC_SUM
            }
        }
        _ => PREC_ATOM,
    };
    let need_parens = prec < parent;
    if need_parens {
        out.push('(');
    }
    match e {
        Expr::Const(c) => out.push_str(&c.to_string()),
        Expr::Sym(s) => out.push_str(&s.name),
        Expr::Deriv(s, ords) => {
            // mixed partials render as nested D[..] so the text reparses
            let pairs = ords.pairs();
            let mut inner = s.name.clone();
            for (c, k) in pairs {
                inner = format!("D[{},{},{}]", inner, c.name, k);
            }
            out.push_str(&inner);
        }
        Expr::Sum(es) => {
            for (idx, term) in es.iter().enumerate() {
                // pull a leading -1 coefficient out as a minus sign
                let (negated, inner) = strip_negation(term);
                if idx == 0 {
                    if negated {
                        out.push('-');
                    }
                } else if negated {
                    out.push_str(" - ");
                } else {
                    out.push_str(" + ");
                }
                write_infix(&inner, out, PREC_SUM + 1);
            }
        }
        Expr::Product(es) => {
            for (idx, f) in es.iter().enumerate() {
                if idx > 0 {
                    out.push('*');
                }
                write_infix(f, out, PREC_PRODUCT + 1);
            }
        }
        Expr::Quot(a, b) => {
            write_infix(a, out, PREC_PRODUCT + 1);
            out.push('/');
            write_infix(b, out, PREC_PRODUCT + 1);
        }
        Expr::Pow(b, n) => {
            write_infix(b, out, PREC_POW + 1);
            out.push_str(&format!("^{}", n));
        }
        Expr::Ln(x) => {
            out.push_str("ln(");
            write_infix(x, out, 0);
            out.push(')');
        }
        Expr::Exp(x) => {
            out.push_str("exp(");
            write_infix(x, out, 0);
            out.push(')');
        }
    }
    if need_parens {
        out.push(')');
    }
}

/// If the term is `-1 * rest` or a negative real constant, return the
/// positive remainder for nicer sum rendering.
fn strip_negation(e: &Expr) -> (bool, Expr) {
    match e {
        Expr::Const(c) if c.is_negative_real() => (true, Expr::Const(c.neg())),
        Expr::Product(fs) => {
            if let Some(Expr::Const(c)) = fs.first() {
                if c.is_negative_real() {
                    let mut rest: Vec<Expr> = fs[1..].to_vec();
                    let pos = c.neg();
                    if !pos.is_one() {
                        rest.insert(0, Expr::Const(pos));
                    }
                    let inner = if rest.len() == 1 {
                        rest.into_iter().next().unwrap()
                    } else {
                        Expr::Product(rest)
                    };
                    return (true, inner);
                }
            }
            (false, e.clone())
        }
        _ => (false, e.clone()),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_infix(self, &mut out, 0);
        write!(f, "{}", out)
    }
}
