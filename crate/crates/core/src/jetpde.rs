//! Linear second-order PDE specifications and their first-order flattening
//! on jet coordinates `(t, x^1..x^n, v, v_1..v_n)`. The time-derivative jet
//! coordinate is projected out at construction; the factor multiplying the
//! time derivative stays with the derivative.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{
    differentiate, equiv, jet_substitute, simplify, ContactMap, EquivOptions, Expr, ExprError,
    Symbol, Workspace,
};
use crate::forms::CoordSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetPdeError {
    #[error("lower-order part is not linear in the jet variables")]
    Nonlinear,
    #[error("sign list must have length {expected}, got {got}")]
    BadSigns { expected: usize, got: usize },
    #[error("expression depends on jet variables where none are allowed")]
    UnexpectedJet,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Jet-space coordinates for one construction: base coordinates
/// `(t, x^1..x^n)` and jet variables `(v, v_1..v_n)`.
#[derive(Debug, Clone)]
pub struct JetCoords {
    pub t: Arc<Symbol>,
    pub x: Vec<Arc<Symbol>>,
    pub v0: Arc<Symbol>,
    pub v: Vec<Arc<Symbol>>,
}

impl JetCoords {
    /// Declare the standard names in a workspace: `t`, `x` (or `x1..xn`),
    /// `v`, `v1..vn`.
    pub fn declare(ws: &mut Workspace, n: usize) -> Result<JetCoords, ExprError> {
        let t = ws.declare_coordinate("t")?;
        let mut x = Vec::with_capacity(n);
        if n == 1 {
            x.push(ws.declare_coordinate("x")?);
        } else {
            for i in 1..=n {
                x.push(ws.declare_coordinate(&format!("x{}", i))?);
            }
        }
        let v0 = ws.declare_jet_variable("v")?;
        let mut v = Vec::with_capacity(n);
        for i in 1..=n {
            v.push(ws.declare_jet_variable(&format!("v{}", i))?);
        }
        Ok(JetCoords { t, x, v0, v })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Base coordinates in the order rows pair with them: `(t, x^1..x^n)`.
    pub fn base_coords(&self) -> Vec<Arc<Symbol>> {
        let mut out = vec![self.t.clone()];
        out.extend(self.x.iter().cloned());
        out
    }

    /// Jet vector `(v, v_1..v_n)` as expressions.
    pub fn jet_vector(&self) -> Vec<Expr> {
        let mut out = vec![Expr::sym(&self.v0)];
        out.extend(self.v.iter().map(Expr::sym));
        out
    }

    pub fn jet_symbols(&self) -> Vec<Arc<Symbol>> {
        let mut out = vec![self.v0.clone()];
        out.extend(self.v.iter().cloned());
        out
    }

    /// Contact structure: the spatial total derivative of `v` is `v_i`.
    pub fn contact_map(&self) -> ContactMap {
        let mut map = ContactMap::new();
        for (xi, vi) in self.x.iter().zip(&self.v) {
            map.insert(self.v0.clone(), xi.clone(), vi.clone());
        }
        map
    }

    /// Coordinate system of the base manifold.
    pub fn base_system(&self) -> Arc<CoordSystem> {
        CoordSystem::new(self.base_coords())
    }

    /// Extended coordinate system (base plus jet variables) on which the
    /// solder forms `dv, dv_i` are literal basis one-forms.
    pub fn extended_system(&self) -> Arc<CoordSystem> {
        let mut coords = self.base_coords();
        coords.push(self.v0.clone());
        coords.extend(self.v.iter().cloned());
        CoordSystem::new(coords)
    }
}

/// Coefficient of the time derivative in the evolution equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeCoefficient {
    /// `i` — the dispersive evolution equation.
    Schrodinger,
    /// `1` — the diffusion variant.
    Diffusion,
}

impl TimeCoefficient {
    pub fn expr(&self) -> Expr {
        match self {
            TimeCoefficient::Schrodinger => Expr::i(),
            TimeCoefficient::Diffusion => Expr::one(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TimeCoefficient::Schrodinger => "i",
            TimeCoefficient::Diffusion => "1",
        }
    }
}

/// A linear second-order PDE: time derivative with its coefficient, a
/// diagonalised second-order spatial part with signs, and a lower-order
/// part linear in the dependent variable and its gradient.
#[derive(Debug, Clone)]
pub struct PDESpec {
    pub coords: JetCoords,
    pub signs: Vec<i64>,
    pub time: TimeCoefficient,
    pub potential: Expr,
    /// Lower-order part expressed in the jet variables `(v, v_i)`.
    pub lower_order: Expr,
}

impl PDESpec {
    /// The evolution equation with potential term `-V v`.
    pub fn schrodinger_like(
        coords: JetCoords,
        time: TimeCoefficient,
        potential: Expr,
    ) -> PDESpec {
        let lower = potential.clone().neg().mul(Expr::sym(&coords.v0));
        let n = coords.n();
        PDESpec {
            coords,
            signs: vec![1; n],
            time,
            potential,
            lower_order: lower,
        }
    }

    pub fn with_signs(mut self, signs: Vec<i64>) -> Result<PDESpec, JetPdeError> {
        if signs.len() != self.coords.n() {
            return Err(JetPdeError::BadSigns {
                expected: self.coords.n(),
                got: signs.len(),
            });
        }
        self.signs = signs;
        Ok(self)
    }

    /// Verify the lower-order part is linear in the jet variables: additive
    /// over a fresh shadow copy and homogeneous under a fresh constant
    /// scale, both under `equiv`.
    pub fn verify_linear(&self, opts: &EquivOptions) -> Result<bool, JetPdeError> {
        let jets = self.coords.jet_symbols();
        let mut shadow_ws = Workspace::new();
        let mut shadows = Vec::new();
        for j in &jets {
            shadows.push(shadow_ws.declare_jet_variable(&format!("{}_shadow", j.name))?);
        }
        let scale = shadow_ws.declare_constant("scale_probe")?;

        // homogeneity: A(c v) = c A(v)
        let mut scale_bind = HashMap::new();
        for j in &jets {
            scale_bind.insert(j.clone(), Expr::sym(&scale).mul(Expr::sym(j)));
        }
        let contact = ContactMap::new();
        let scaled = jet_substitute(&self.lower_order, &scale_bind, &contact)?;
        let homog = equiv(
            &scaled,
            &Expr::sym(&scale).mul(self.lower_order.clone()),
            opts,
        )?;

        // additivity: A(v + w) = A(v) + A(w)
        let mut sum_bind = HashMap::new();
        let mut shadow_bind = HashMap::new();
        for (j, s) in jets.iter().zip(&shadows) {
            sum_bind.insert(j.clone(), Expr::sym(j).add(Expr::sym(s)));
            shadow_bind.insert(j.clone(), Expr::sym(s));
        }
        let summed = jet_substitute(&self.lower_order, &sum_bind, &contact)?;
        let shadowed = jet_substitute(&self.lower_order, &shadow_bind, &contact)?;
        let additive = equiv(&summed, &self.lower_order.clone().add(shadowed), opts)?;

        Ok(homog && additive)
    }
}

/// First-order equation on the jet space: residual linear in the jet
/// variables and their formal first base-derivatives, plus the diagonal
/// signature carried over from the second-order part.
#[derive(Debug, Clone)]
pub struct JetPDE {
    pub coords: JetCoords,
    pub residual: Expr,
    pub time: TimeCoefficient,
    pub signs: Vec<i64>,
}

impl JetPDE {
    /// Divergence weights `(c_t, a_1..a_n)` pairing with the base
    /// coordinates row by row.
    pub fn weights(&self) -> Vec<Expr> {
        let mut out = vec![self.time.expr()];
        out.extend(self.signs.iter().map(|s| Expr::int(*s)));
        out
    }

    /// The formal leading part `c_t d_t v + sum_i a_i d_i v_i`.
    pub fn leading_part(&self) -> Expr {
        let mut acc = self
            .time
            .expr()
            .mul(Expr::deriv(&self.coords.v0, &self.coords.t, 1));
        for ((xi, vi), sign) in self.coords.x.iter().zip(&self.coords.v).zip(&self.signs) {
            acc = acc.add(Expr::int(*sign).mul(Expr::deriv(vi, xi, 1)));
        }
        simplify(&acc).expect("leading part simplifies")
    }
}

/// Flatten the second-order specification to the first-order jet equation
/// `c_t d_t v + sum_i a_i d_i v_i + A(v, v_i) = 0`.
pub fn flatten(spec: &PDESpec, opts: &EquivOptions) -> Result<JetPDE, JetPdeError> {
    if !spec.verify_linear(opts)? {
        return Err(JetPdeError::Nonlinear);
    }
    let pde = JetPDE {
        coords: spec.coords.clone(),
        residual: Expr::zero(),
        time: spec.time,
        signs: spec.signs.clone(),
    };
    let residual = simplify(&pde.leading_part().add(spec.lower_order.clone()))?;
    Ok(JetPDE { residual, ..pde })
}

/// Prolongation of a base-coordinate function to the first jet:
/// `{v -> u, v_i -> d_i u}`.
pub fn prolong(coords: &JetCoords, u: &Expr) -> Result<HashMap<Arc<Symbol>, Expr>, JetPdeError> {
    if u.contains_jet() {
        return Err(JetPdeError::UnexpectedJet);
    }
    let mut map = HashMap::new();
    map.insert(coords.v0.clone(), simplify(u)?);
    for (xi, vi) in coords.x.iter().zip(&coords.v) {
        map.insert(vi.clone(), differentiate(u, xi)?);
    }
    Ok(map)
}

/// Evaluate the jet residual on the prolonged section of `u`: jet variables
/// substitute to `u` and its gradient, formal derivatives apply to them.
pub fn residual_on_section(pde: &JetPDE, u: &Expr) -> Result<Expr, JetPdeError> {
    let section = prolong(&pde.coords, u)?;
    let contact = pde.coords.contact_map();
    Ok(jet_substitute(&pde.residual, &section, &contact)?)
}
