//! Symbols and the per-construction symbol table.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::ExprError;

/// What a name refers to.
///
/// Jet variables are independent coordinates of the first jet space: they are
/// constants under [`differentiate`](crate::expr::differentiate), but formal
/// base-derivative symbols of them may be constructed for first-order
/// residuals. Named functions carry the ordered list of base coordinates they
/// depend on; a zero-arity function acts as a named constant (the
/// proportionality scale `lambda` is one).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Coordinate,
    JetVariable,
    Function,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
    /// For functions: the base coordinates it depends on, in order.
    pub args: Vec<Arc<Symbol>>,
}

impl Symbol {
    pub fn depends_on(&self, coord: &Symbol) -> bool {
        self.args.iter().any(|a| a.as_ref() == coord)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Symbol table for one construction. Names are unique; a kind is fixed at
/// declaration. Workspaces are not shared across tasks.
#[derive(Default, Debug, Clone)]
pub struct Workspace {
    table: HashMap<String, Arc<Symbol>>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn declare(&mut self, sym: Symbol) -> Result<Arc<Symbol>, ExprError> {
        if let Some(existing) = self.table.get(&sym.name) {
            if existing.as_ref() == &sym {
                return Ok(existing.clone());
            }
            return Err(ExprError::DuplicateSymbol {
                name: sym.name.clone(),
            });
        }
        let arc = Arc::new(sym);
        self.table.insert(arc.name.clone(), arc.clone());
        Ok(arc)
    }

    pub fn declare_coordinate(&mut self, name: &str) -> Result<Arc<Symbol>, ExprError> {
        self.declare(Symbol {
            name: name.to_string(),
            kind: SymbolKind::Coordinate,
            args: Vec::new(),
        })
    }

    pub fn declare_jet_variable(&mut self, name: &str) -> Result<Arc<Symbol>, ExprError> {
        self.declare(Symbol {
            name: name.to_string(),
            kind: SymbolKind::JetVariable,
            args: Vec::new(),
        })
    }

    pub fn declare_function(
        &mut self,
        name: &str,
        args: &[Arc<Symbol>],
    ) -> Result<Arc<Symbol>, ExprError> {
        for a in args {
            if a.kind != SymbolKind::Coordinate {
                return Err(ExprError::KindMismatch {
                    name: a.name.clone(),
                    detail: "function arguments must be base coordinates".into(),
                });
            }
        }
        self.declare(Symbol {
            name: name.to_string(),
            kind: SymbolKind::Function,
            args: args.to_vec(),
        })
    }

    /// A named constant: a function of no coordinates.
    pub fn declare_constant(&mut self, name: &str) -> Result<Arc<Symbol>, ExprError> {
        self.declare_function(name, &[])
    }

    pub fn lookup(&self, name: &str) -> Option<Arc<Symbol>> {
        self.table.get(name).cloned()
    }
}
