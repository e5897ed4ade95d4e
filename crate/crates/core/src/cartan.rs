//! The connection construction pipeline: transform the jet equation by a
//! scaling-group element, match the lower-order coefficients against a
//! covariant divergence to fix connection entries (with an explicit gauge
//! policy for the undetermined part), embed into the scale-tracking block
//! matrix, derive the gauge-subgroup constraints from scratch, impose the
//! torsion-free condition, and specialise to the prolonged multiplication
//! group to recover the vacuum equation.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{
    differentiate, equiv, extract_jet_linear, jet_substitute, parse, simplify, solve_linear,
    substitute, EquivOptions, Expr, ExprError, Symbol, Workspace,
};
use crate::forms::{
    ad_conjugate, covariant_divergence, curvature, kform_equiv, matrix_equiv, FormsError,
    GroupElement, GroupFlavor, KForm, MatrixForm,
};
use crate::jetpde::{flatten, JetCoords, JetPDE, JetPdeError, PDESpec, TimeCoefficient};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CartanError {
    #[error("group element dimension {got} does not match jet dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("transformed residual has terms outside the linear jet pattern")]
    UnexpectedResidualShape,
    #[error("solder form is degenerate; the scale one-form is not determined: {0}")]
    UnsolvableEpsilon(String),
    #[error("gauge candidate must carry the gauge flavor")]
    NotGaugeCandidate,
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    JetPde(#[from] JetPdeError),
}

/// Symbols of one construction: jet coordinates, the scaling-group functions
/// `(a, b_i)`, the gauge-candidate functions `(e, f_i)`, the potential `V`
/// and the proportionality constant `lambda`.
#[derive(Debug, Clone)]
pub struct Construction {
    pub ws: Workspace,
    pub coords: JetCoords,
    pub a: Arc<Symbol>,
    pub b: Vec<Arc<Symbol>>,
    pub e: Arc<Symbol>,
    pub f: Vec<Arc<Symbol>>,
    pub potential: Arc<Symbol>,
    pub lambda: Arc<Symbol>,
}

impl Construction {
    pub fn new(n: usize) -> Result<Construction, CartanError> {
        let mut ws = Workspace::new();
        let coords = JetCoords::declare(&mut ws, n)?;
        let base = coords.base_coords();
        let a = ws.declare_function("a", &base)?;
        let e = ws.declare_function("e", &base)?;
        let mut b = Vec::with_capacity(n);
        let mut f = Vec::with_capacity(n);
        if n == 1 {
            b.push(ws.declare_function("b", &base)?);
            f.push(ws.declare_function("f", &base)?);
        } else {
            for i in 1..=n {
                b.push(ws.declare_function(&format!("b{}", i), &base)?);
                f.push(ws.declare_function(&format!("f{}", i), &base)?);
            }
        }
        let potential = ws.declare_function("V", &base)?;
        let lambda = ws.declare_constant("lambda")?;
        Ok(Construction {
            ws,
            coords,
            a,
            b,
            e,
            f,
            potential,
            lambda,
        })
    }

    pub fn n(&self) -> usize {
        self.coords.n()
    }

    pub fn parse(&self, text: &str) -> Result<Expr, ExprError> {
        parse(&self.ws, text)
    }

    /// The generic scaling-group element `(a, b_i)`.
    pub fn scale_group(&self) -> GroupElement {
        GroupElement {
            a: Expr::sym(&self.a),
            b: self.b.iter().map(Expr::sym).collect(),
            flavor: GroupFlavor::General,
        }
    }

    /// The generic gauge-candidate element `(e, f_i)`.
    pub fn gauge_candidate(&self) -> GroupElement {
        GroupElement {
            a: Expr::sym(&self.e),
            b: self.f.iter().map(Expr::sym).collect(),
            flavor: GroupFlavor::GaugeCandidate,
        }
    }

    /// Spec of the evolution equation with symbolic potential.
    pub fn pde_spec(&self, time: TimeCoefficient) -> PDESpec {
        PDESpec::schrodinger_like(self.coords.clone(), time, Expr::sym(&self.potential))
    }
}

/// The jet equation after the scaling-group substitution
/// `(v, v_i) -> (a v, b_i v + a v_i)`, divided by the scale.
#[derive(Debug, Clone)]
pub struct TransformedPDE {
    pub base: JetPDE,
    pub g: GroupElement,
    pub leading: Expr,
    pub coeff_v: Expr,
    pub coeff_vi: Vec<Expr>,
}

impl TransformedPDE {
    /// `leading + coeff_v * v + sum_i coeff_vi * v_i`.
    pub fn reconstruction(&self) -> Result<Expr, ExprError> {
        let coords = &self.base.coords;
        let mut acc = self
            .leading
            .clone()
            .add(self.coeff_v.clone().mul(Expr::sym(&coords.v0)));
        for (c, vi) in self.coeff_vi.iter().zip(&coords.v) {
            acc = acc.add(c.clone().mul(Expr::sym(vi)));
        }
        simplify(&acc)
    }
}

/// Apply a scaling-group element to the jet equation and split the result
/// into leading part and jet-variable coefficients.
pub fn apply_group(pde: &JetPDE, g: &GroupElement) -> Result<TransformedPDE, CartanError> {
    let coords = &pde.coords;
    if g.dim() != coords.n() + 1 {
        return Err(CartanError::DimensionMismatch {
            expected: coords.n() + 1,
            got: g.dim(),
        });
    }
    let mut bindings = HashMap::new();
    bindings.insert(coords.v0.clone(), g.a.clone().mul(Expr::sym(&coords.v0)));
    for (vi, bi) in coords.v.iter().zip(&g.b) {
        bindings.insert(
            vi.clone(),
            bi.clone()
                .mul(Expr::sym(&coords.v0))
                .add(g.a.clone().mul(Expr::sym(vi))),
        );
    }
    let contact = coords.contact_map();
    let transformed = jet_substitute(&pde.residual, &bindings, &contact)?;
    let divided = simplify(&transformed.div(g.a.clone()))?;

    let parts = extract_jet_linear(&divided, &coords.jet_symbols())?;
    if !parts.rest.is_zero() {
        return Err(CartanError::UnexpectedResidualShape);
    }
    let coeff_v = parts.coeffs[0].clone();
    let coeff_vi = parts.coeffs[1..].to_vec();
    Ok(TransformedPDE {
        base: pde.clone(),
        g: g.clone(),
        leading: parts.leading,
        coeff_v,
        coeff_vi,
    })
}

/// How the undetermined connection coefficients are fixed. The matching
/// system pins the gradient row and the sum `alpha_t + sum_i beta_ii`; the
/// split of that sum is a choice.
#[derive(Debug, Clone)]
pub enum GaugePolicy {
    /// `alpha_t = c_t (d_t a)/a dt`, `beta_t = 0`, the remaining potential
    /// term shared evenly across the diagonal beta coefficients.
    PaperCanonical,
    /// Absorb everything into the beta coefficients: `alpha_t = 0`.
    ZeroAlphaT,
    /// The exhibited symmetry family: shift `alpha_t` by `f_shift` (each
    /// beta gives back `f_shift / n`) and set `beta_t = g_shift dt`.
    Custom { f_shift: Expr, g_shift: Expr },
}

impl GaugePolicy {
    pub fn name(&self) -> &'static str {
        match self {
            GaugePolicy::PaperCanonical => "paper-canonical",
            GaugePolicy::ZeroAlphaT => "zero-alpha-t",
            GaugePolicy::Custom { .. } => "custom",
        }
    }
}

/// Record of the gauge choice made while matching.
#[derive(Debug, Clone)]
pub struct GaugeChoice {
    pub policy: String,
    pub alpha_t: Expr,
    pub beta_t: Expr,
}

/// Connection matrix solving the matching system, with the choice record
/// and the residuals of the matching equations (zero by construction).
#[derive(Debug, Clone)]
pub struct ConnectionSolution {
    pub omega: MatrixForm,
    pub gauge: GaugeChoice,
    pub residual_constraints: Vec<Expr>,
}

/// Solve the under-determined matching system
/// `alpha_t + sum_i beta_ii = coeff_v`, `alpha_i = coeff_vi`.
pub fn match_connection(
    tp: &TransformedPDE,
    policy: &GaugePolicy,
) -> Result<ConnectionSolution, CartanError> {
    let coords = &tp.base.coords;
    let n = coords.n();
    let base_sys = coords.base_system();
    let c_t = tp.base.time.expr();
    let a = &tp.g.a;

    let canonical_alpha_t = simplify(
        &c_t.clone()
            .mul(differentiate(&tp.g.a, &coords.t)?)
            .div(a.clone()),
    )?;
    let (alpha_t, beta_t) = match policy {
        GaugePolicy::PaperCanonical => (canonical_alpha_t, Expr::zero()),
        GaugePolicy::ZeroAlphaT => (Expr::zero(), Expr::zero()),
        GaugePolicy::Custom { f_shift, g_shift } => (
            simplify(&canonical_alpha_t.add(f_shift.clone()))?,
            g_shift.clone(),
        ),
    };

    // Structural diagonal shares: a_i (d_i b_i)/a plus an even split of
    // whatever alpha_t leaves of coeff_v (for the canonical policy that
    // remainder is the potential term).
    let mut structural = Expr::zero();
    let mut di_bi = Vec::with_capacity(n);
    for ((xi, bi), sign) in coords.x.iter().zip(&tp.g.b).zip(&tp.base.signs) {
        let term = simplify(&Expr::int(*sign).mul(differentiate(bi, xi)?).div(a.clone()))?;
        structural = structural.add(term.clone());
        di_bi.push(term);
    }
    let shared = simplify(
        &tp.coeff_v
            .clone()
            .sub(alpha_t.clone())
            .sub(structural)
            .div(Expr::int(n as i64)),
    )?;

    let mut alpha_entries: Vec<(&Arc<Symbol>, Expr)> = vec![(&coords.t, alpha_t.clone())];
    for (xi, c) in coords.x.iter().zip(&tp.coeff_vi) {
        alpha_entries.push((xi, c.clone()));
    }
    let alpha = KForm::one_form(base_sys.clone(), &alpha_entries)?;

    let mut omega = MatrixForm::zero(n + 1, n + 1, 1, base_sys.clone());
    for i in 0..=n {
        omega.set_entry(i, i, alpha.clone())?;
    }
    let mut beta_sum = Expr::zero();
    for (i, xi) in coords.x.iter().enumerate() {
        let beta_ii = simplify(&di_bi[i].clone().add(shared.clone()))?;
        beta_sum = beta_sum.add(beta_ii.clone());
        let beta = KForm::one_form(
            base_sys.clone(),
            &[(xi, beta_ii), (&coords.t, beta_t.clone())],
        )?;
        omega.set_entry(i + 1, 0, beta)?;
    }

    // Matching residuals; zero by construction, re-checked under equiv by
    // the pipeline.
    let mut residuals = vec![simplify(&alpha_t.clone().add(beta_sum).sub(tp.coeff_v.clone()))?];
    for (xi, c) in coords.x.iter().zip(&tp.coeff_vi) {
        residuals.push(simplify(&alpha.coefficient_for(xi).sub(c.clone()))?);
    }

    Ok(ConnectionSolution {
        omega,
        gauge: GaugeChoice {
            policy: policy.name().to_string(),
            alpha_t,
            beta_t,
        },
        residual_constraints: residuals,
    })
}

/// The block structure of the scale-tracking connection: scale one-form
/// `epsilon` (symbolic until the torsion fixing), solder column `theta` on
/// the extended coordinates, and the matched `omega`.
#[derive(Debug, Clone)]
pub struct WeylConnection {
    pub epsilon: Option<KForm>,
    pub theta: MatrixForm,
    pub omega: MatrixForm,
    pub coords: JetCoords,
}

/// Assemble the block structure around a connection solution. The scale
/// one-form stays undetermined until [`torsion_constraints`] fixes it.
pub fn embed_weyl(
    cs: &ConnectionSolution,
    coords: &JetCoords,
) -> Result<WeylConnection, CartanError> {
    let ext = coords.extended_system();
    let n = coords.n();
    let mut theta = MatrixForm::zero(n + 1, 1, 1, ext.clone());
    theta.set_entry(0, 0, KForm::basis(ext.clone(), &coords.v0)?)?;
    for (i, vi) in coords.v.iter().enumerate() {
        theta.set_entry(i + 1, 0, KForm::basis(ext.clone(), vi)?)?;
    }
    Ok(WeylConnection {
        epsilon: None,
        theta,
        omega: cs.omega.clone(),
        coords: coords.clone(),
    })
}

impl WeylConnection {
    /// Full (n+2)-square one-form matrix `[[eps, 0], [theta, omega]]` on the
    /// extended coordinates. Requires the scale one-form to be fixed.
    pub fn assemble(&self) -> Result<MatrixForm, CartanError> {
        let eps = self
            .epsilon
            .as_ref()
            .ok_or_else(|| CartanError::UnsolvableEpsilon("scale one-form not fixed".into()))?;
        let ext = self.coords.extended_system();
        let n = self.coords.n();
        let mut w = MatrixForm::zero(n + 2, n + 2, 1, ext.clone());
        w.set_entry(0, 0, eps.extend_to(&ext)?)?;
        for i in 0..=n {
            w.set_entry(i + 1, 0, self.theta.entry(i, 0).clone())?;
        }
        let omega_ext = self.omega.extend_to(&ext)?;
        for i in 0..=n {
            for j in 0..=n {
                w.set_entry(i + 1, j + 1, omega_ext.entry(i, j).clone())?;
            }
        }
        Ok(w)
    }

    /// The torsion block `d theta + eps ^ theta + omega ^ theta` for a given
    /// scale one-form (the scale factor wedges from the left, which is the
    /// convention under which the fixing below solves it).
    pub fn torsion_block(&self, eps: &KForm) -> Result<MatrixForm, CartanError> {
        let ext = self.coords.extended_system();
        let eps_ext = eps.extend_to(&ext)?;
        let omega_ext = self.omega.extend_to(&ext)?;
        let d_theta = self.theta.exterior_derivative()?;
        let mut eps_theta = MatrixForm::zero(self.theta.rows(), 1, 2, ext.clone());
        for i in 0..self.theta.rows() {
            eps_theta.set_entry(i, 0, eps_ext.wedge(self.theta.entry(i, 0))?)?;
        }
        let omega_theta = omega_ext.wedge(&self.theta)?;
        Ok(d_theta.add(&eps_theta)?.add(&omega_theta)?)
    }
}

/// Result of the torsion-free fixing: the scale one-form and the remaining
/// coefficient constraints (the off-diagonal connection entries must die).
#[derive(Debug, Clone)]
pub struct TorsionSolution {
    pub epsilon: KForm,
    pub constraints: Vec<Expr>,
}

/// Solve `d theta + eps ^ theta + omega ^ theta = 0`. With holonomic solder
/// forms this forces `eps = -alpha` and every off-diagonal entry of `omega`
/// to vanish coefficient by coefficient.
pub fn torsion_constraints(w: &WeylConnection) -> Result<TorsionSolution, CartanError> {
    let coords = &w.coords;
    let n = coords.n();
    let jets = coords.jet_symbols();

    // Precondition: theta is holonomic and each row is exactly the basis
    // one-form of its jet coordinate (otherwise the linear system for the
    // scale one-form is rank-deficient).
    for i in 0..=n {
        let entry = w.theta.entry(i, 0);
        if !entry.exterior_derivative()?.is_zero() {
            return Err(CartanError::UnsolvableEpsilon("theta is not closed".into()));
        }
        let expected = KForm::basis(coords.extended_system(), &jets[i])?;
        if entry != &expected {
            return Err(CartanError::UnsolvableEpsilon(format!(
                "theta row {} is not the basis form of {}",
                i, jets[i].name
            )));
        }
    }

    // Row i, coefficient of dc ^ dv_j: delta_ij eps_c + omega[i][j](c) = 0.
    let base_sys = coords.base_system();
    let base = coords.base_coords();
    let mut eps_entries: Vec<(&Arc<Symbol>, Expr)> = Vec::with_capacity(base.len());
    let mut derived: Vec<Vec<Expr>> = Vec::new();
    for i in 0..=n {
        let row: Vec<Expr> = base
            .iter()
            .map(|c| {
                simplify(&w.omega.entry(i, i).coefficient_for(c).neg()).map_err(CartanError::from)
            })
            .collect::<Result<_, _>>()?;
        derived.push(row);
    }
    for (ci, c) in base.iter().enumerate() {
        for row in derived.iter().skip(1) {
            if row[ci] != derived[0][ci] {
                return Err(CartanError::UnsolvableEpsilon(format!(
                    "rows disagree on the {} coefficient",
                    c.name
                )));
            }
        }
        eps_entries.push((c, derived[0][ci].clone()));
    }
    let epsilon = KForm::one_form(base_sys, &eps_entries)?;

    let mut constraints = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            if i == j {
                continue;
            }
            let entry = w.omega.entry(i, j);
            for c in &base {
                let coeff = entry.coefficient_for(c);
                if !coeff.is_zero() {
                    constraints.push(coeff);
                }
            }
        }
    }
    Ok(TorsionSolution {
        epsilon,
        constraints,
    })
}

/// Substitute the prolongation `b_i = d_i a` of the multiplication group
/// into the torsion constraints and return their sum: the vacuum residual.
pub fn specialize_prolongation(
    constraints: &[Expr],
    ctx: &Construction,
) -> Result<Expr, CartanError> {
    let mut bindings = HashMap::new();
    for (bi, xi) in ctx.b.iter().zip(&ctx.coords.x) {
        bindings.insert(bi.clone(), Expr::deriv(&ctx.a, xi, 1));
    }
    let mut acc = Expr::zero();
    for c in constraints {
        acc = acc.add(substitute(c, &bindings)?);
    }
    Ok(simplify(&acc)?)
}

/// Constraints defining the gauge subgroup at proportionality `lambda`,
/// derived symbolically: the column entries solve to `f_i` in terms of the
/// scale, and eliminating them leaves one scalar constraint. The two
/// printed forms of that constraint circulating in the source derivations
/// (which disagree with each other) are returned alongside for comparison.
#[derive(Debug, Clone)]
pub struct GaugeConstraints {
    pub lambda: Expr,
    /// Solved column entries: `f_i = ...`.
    pub f_solved: Vec<Expr>,
    /// Raw column constraints before solving (must vanish).
    pub f_constraints: Vec<Expr>,
    /// Scalar constraint after eliminating the `f_i` (must vanish).
    pub scalar_constraint: Expr,
    /// Printed 1+1-style variant of the scalar constraint.
    pub printed_one_plus_one: Expr,
    /// Printed 1+n-style variant of the scalar constraint.
    pub printed_one_plus_n: Expr,
}

pub fn gauge_subgroup_constraints(
    pde: &JetPDE,
    lambda: &Expr,
    ctx: &Construction,
) -> Result<GaugeConstraints, CartanError> {
    let coords = &pde.coords;
    let h = ctx.gauge_candidate();
    let leading_pde = JetPDE {
        coords: pde.coords.clone(),
        residual: pde.leading_part(),
        time: pde.time,
        signs: pde.signs.clone(),
    };
    let transformed = apply_group(&leading_pde, &h)?;

    let mc = h.maurer_cartan(&coords.base_system())?;
    let divergence = covariant_divergence(
        &mc,
        &coords.jet_vector(),
        &pde.weights(),
        &coords.base_coords(),
        &coords.contact_map(),
    )?;
    let m_parts = extract_jet_linear(&divergence, &coords.jet_symbols())?;

    let mut f_constraints = Vec::with_capacity(coords.n());
    let mut f_solved = Vec::with_capacity(coords.n());
    for (i, f_sym) in ctx.f.iter().enumerate() {
        let constraint = simplify(
            &transformed.coeff_vi[i]
                .clone()
                .sub(lambda.clone().mul(m_parts.coeffs[i + 1].clone())),
        )?;
        f_solved.push(solve_linear(&constraint, f_sym)?);
        f_constraints.push(constraint);
    }

    let scalar_raw = simplify(
        &transformed
            .coeff_v
            .clone()
            .sub(lambda.clone().mul(m_parts.coeffs[0].clone())),
    )?;
    let mut bindings = HashMap::new();
    for (f_sym, solved) in ctx.f.iter().zip(&f_solved) {
        bindings.insert(f_sym.clone(), solved.clone());
    }
    let scalar_constraint = substitute(&scalar_raw, &bindings)?;

    // The two printed forms of the eliminated constraint, for the report.
    let c_t = pde.time.expr();
    let ln_e = Expr::sym(&ctx.e).ln();
    let d_t_ln = differentiate(&ln_e, &coords.t)?;
    let mut sum_sq = Expr::zero();
    let mut sum_dd = Expr::zero();
    for xi in &coords.x {
        let d_i_ln = differentiate(&ln_e, xi)?;
        sum_sq = sum_sq.add(d_i_ln.clone().pow(2));
        sum_dd = sum_dd.add(differentiate(&d_i_ln, xi)?);
    }
    let lm1 = lambda.clone().sub(Expr::one());
    let printed_one_plus_one = simplify(
        &c_t.clone()
            .sub(lambda.clone())
            .mul(d_t_ln.clone())
            .sub(lm1.clone().mul(sum_sq.clone()))
            .sub(sum_dd.clone()),
    )?;
    let printed_one_plus_n = simplify(
        &c_t.sub(lambda.clone())
            .mul(d_t_ln)
            .sub(sum_sq)
            .sub(lm1.mul(sum_dd)),
    )?;

    Ok(GaugeConstraints {
        lambda: lambda.clone(),
        f_solved,
        f_constraints,
        scalar_constraint,
        printed_one_plus_one,
        printed_one_plus_n,
    })
}

/// One named verification with its outcome.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

/// Per-block report of the gauge-transformation consistency checks.
#[derive(Debug, Clone)]
pub struct GaugeReport {
    pub checks: Vec<Check>,
}

impl GaugeReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Verify that gauging the assembled connection by a candidate element
/// behaves like a connection transform: the scale block picks up `d ln e`,
/// the inner block is inert under the (commutative) adjoint, the base-change
/// pattern holds, and the Maurer–Cartan curvature vanishes.
pub fn check_gauge_consistency(
    w: &WeylConnection,
    h: &GroupElement,
    opts: &EquivOptions,
) -> Result<GaugeReport, CartanError> {
    if h.flavor != GroupFlavor::GaugeCandidate {
        return Err(CartanError::NotGaugeCandidate);
    }
    let coords = &w.coords;
    let ext = coords.extended_system();
    let base_sys = coords.base_system();
    let mut checks = Vec::new();

    let full = w.assemble()?;
    let ad = ad_conjugate(h, &full)?;
    let mc_emb = h.embedded_maurer_cartan(&ext)?;
    let transformed = ad.add(&mc_emb)?;

    // (1,1) block gauges as eps + d ln e.
    let dln = KForm::scalar(base_sys.clone(), h.a.clone().ln())?.exterior_derivative()?;
    let expected_scale = w
        .epsilon
        .as_ref()
        .ok_or_else(|| CartanError::UnsolvableEpsilon("scale one-form not fixed".into()))?
        .add(&dln)?;
    checks.push(Check {
        name: "scale-block-gauges-by-d-ln".into(),
        pass: kform_equiv(transformed.entry(0, 0), &expected_scale.extend_to(&ext)?, opts)?,
    });

    // Inner block: the commutative adjoint leaves omega unchanged.
    let a_mat = h.matrix(&base_sys)?;
    let a_inv = h.inverse()?.matrix(&base_sys)?;
    let conj = a_inv.wedge(&w.omega)?.wedge(&a_mat)?;
    checks.push(Check {
        name: "abelian-adjoint-trivial".into(),
        pass: matrix_equiv(&conj, &w.omega, opts)?,
    });

    // Base-change pattern: (Ad(A^-1) omega) A (1/s) equals (1/s) omega A.
    let scale_inv = simplify(&Expr::one().div(h.a.clone()))?;
    let lhs = conj.wedge(&a_mat)?.scale(&scale_inv)?;
    let rhs = w.omega.wedge(&a_mat)?.scale(&scale_inv)?;
    checks.push(Check {
        name: "base-change-scaled-pattern".into(),
        pass: matrix_equiv(&lhs, &rhs, opts)?,
    });

    // Solder block of the adjoint part scales as s (A^-1 theta).
    let a_inv_ext = h.inverse()?.matrix(&ext)?;
    let expected_theta = a_inv_ext.wedge(&w.theta)?.scale(&h.a)?;
    let mut ad_theta = MatrixForm::zero(coords.n() + 1, 1, 1, ext.clone());
    for i in 0..=coords.n() {
        ad_theta.set_entry(i, 0, ad.entry(i + 1, 0).clone())?;
    }
    checks.push(Check {
        name: "solder-block-scales".into(),
        pass: matrix_equiv(&ad_theta, &expected_theta, opts)?,
    });

    // Structure equation of the embedded Maurer-Cartan form.
    let mc_curv = curvature(&mc_emb)?;
    let mut structure_ok = true;
    'outer: for i in 0..mc_curv.rows() {
        for j in 0..mc_curv.cols() {
            if !kform_equiv(mc_curv.entry(i, j), &KForm::zero(ext.clone(), 2), opts)? {
                structure_ok = false;
                break 'outer;
            }
        }
    }
    checks.push(Check {
        name: "maurer-cartan-structure-equation".into(),
        pass: structure_ok,
    });

    Ok(GaugeReport { checks })
}

/// Everything one pipeline run produces, with the internal named checks.
#[derive(Debug, Clone)]
pub struct ConstructionOutcome {
    pub ctx: Construction,
    pub potential_used: Expr,
    pub pde: JetPDE,
    pub transformed: TransformedPDE,
    pub connection: ConnectionSolution,
    pub weyl: WeylConnection,
    pub torsion: TorsionSolution,
    pub gauge_constraints: GaugeConstraints,
    pub vacuum_residual: Expr,
    pub checks: Vec<Check>,
    /// Whether the derived scalar gauge constraint matches each printed
    /// variant under equiv (informational, not part of the pass gate).
    pub printed_variant_verdicts: (bool, bool),
}

impl ConstructionOutcome {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Run the full pipeline for the symbolic potential: flatten, transform by
/// the generic scaling element, match, embed, derive gauge constraints, fix
/// the torsion, specialise the prolongation, and run the internal checks.
pub fn run_construction(
    n: usize,
    time: TimeCoefficient,
    policy: &GaugePolicy,
    lambda: Option<Expr>,
    opts: &EquivOptions,
) -> Result<ConstructionOutcome, CartanError> {
    let ctx = Construction::new(n)?;
    run_construction_with(ctx, None, time, policy, lambda, opts)
}

/// As [`run_construction`] but on a prepared context, with an optional
/// closed-form potential replacing the symbolic one.
pub fn run_construction_with(
    ctx: Construction,
    potential: Option<Expr>,
    time: TimeCoefficient,
    policy: &GaugePolicy,
    lambda: Option<Expr>,
    opts: &EquivOptions,
) -> Result<ConstructionOutcome, CartanError> {
    let n = ctx.n();
    let potential_used = potential.unwrap_or_else(|| Expr::sym(&ctx.potential));
    let spec = PDESpec::schrodinger_like(ctx.coords.clone(), time, potential_used.clone());
    let pde = flatten(&spec, opts)?;
    let g = ctx.scale_group();
    let transformed = apply_group(&pde, &g)?;
    let connection = match_connection(&transformed, policy)?;
    let mut weyl = embed_weyl(&connection, &ctx.coords)?;
    let torsion = torsion_constraints(&weyl)?;
    weyl.epsilon = Some(torsion.epsilon.clone());
    let lambda = lambda.unwrap_or_else(|| Expr::sym(&ctx.lambda));
    let gauge_constraints = gauge_subgroup_constraints(&pde, &lambda, &ctx)?;
    let vacuum_residual = specialize_prolongation(&torsion.constraints, &ctx)?;

    let mut checks = Vec::new();

    // Round-trip: the covariant divergence of the matched connection
    // reproduces the transformed equation.
    let div = covariant_divergence(
        &connection.omega,
        &ctx.coords.jet_vector(),
        &pde.weights(),
        &ctx.coords.base_coords(),
        &ctx.coords.contact_map(),
    )?;
    checks.push(Check {
        name: "round-trip-matching".into(),
        pass: equiv(&div, &transformed.reconstruction()?, opts)?,
    });

    // Matching residuals vanish.
    let mut residuals_ok = true;
    for r in &connection.residual_constraints {
        residuals_ok &= equiv(r, &Expr::zero(), opts)?;
    }
    checks.push(Check {
        name: "matching-residuals-vanish".into(),
        pass: residuals_ok,
    });

    // Solder forms are holonomic.
    let mut holonomic = true;
    for i in 0..=n {
        holonomic &= weyl.theta.entry(i, 0).exterior_derivative()?.is_zero();
    }
    checks.push(Check {
        name: "theta-holonomic".into(),
        pass: holonomic,
    });

    // The abelian pattern kills omega ^ omega.
    let ww = connection.omega.wedge(&connection.omega)?;
    let mut ww_zero = true;
    'ww: for i in 0..ww.rows() {
        for j in 0..ww.cols() {
            if !kform_equiv(
                ww.entry(i, j),
                &KForm::zero(ctx.coords.base_system(), 2),
                opts,
            )? {
                ww_zero = false;
                break 'ww;
            }
        }
    }
    checks.push(Check {
        name: "omega-wedge-omega-vanishes".into(),
        pass: ww_zero,
    });

    // Torsion block vanishes once the constraints are imposed (beta rows
    // zeroed, epsilon as derived).
    let mut omega_fixed = connection.omega.clone();
    for i in 1..=n {
        omega_fixed.set_entry(
            i,
            0,
            KForm::zero(ctx.coords.base_system(), 1),
        )?;
    }
    let fixed = WeylConnection {
        epsilon: Some(torsion.epsilon.clone()),
        theta: weyl.theta.clone(),
        omega: omega_fixed,
        coords: ctx.coords.clone(),
    };
    let block = fixed.torsion_block(&torsion.epsilon)?;
    let mut torsion_zero = true;
    'tb: for i in 0..block.rows() {
        for j in 0..block.cols() {
            if !kform_equiv(
                block.entry(i, j),
                &KForm::zero(ctx.coords.extended_system(), 2),
                opts,
            )? {
                torsion_zero = false;
                break 'tb;
            }
        }
    }
    checks.push(Check {
        name: "torsion-vanishes-after-fixing".into(),
        pass: torsion_zero,
    });

    // Gauge consistency for the generic candidate element.
    let report = check_gauge_consistency(&weyl, &ctx.gauge_candidate(), opts)?;
    for c in report.checks {
        checks.push(Check {
            name: format!("gauge-{}", c.name),
            pass: c.pass,
        });
    }

    // At lambda = 1 the column constraints force f = 0.
    let one = gauge_subgroup_constraints(&pde, &Expr::one(), &ctx)?;
    let mut f_vanish = true;
    for f in &one.f_solved {
        f_vanish &= equiv(f, &Expr::zero(), opts)?;
    }
    checks.push(Check {
        name: "lambda-one-column-constraints-vanish".into(),
        pass: f_vanish,
    });

    let verdicts = (
        equiv(
            &gauge_constraints.scalar_constraint,
            &gauge_constraints.printed_one_plus_one,
            opts,
        )?,
        equiv(
            &gauge_constraints.scalar_constraint,
            &gauge_constraints.printed_one_plus_n,
            opts,
        )?,
    );

    Ok(ConstructionOutcome {
        ctx,
        potential_used,
        pde,
        transformed,
        connection,
        weyl,
        torsion,
        gauge_constraints,
        vacuum_residual,
        checks,
        printed_variant_verdicts: verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pipeline_1d() -> (Construction, JetPDE, TransformedPDE, ConnectionSolution) {
        let ctx = Construction::new(1).unwrap();
        let spec = ctx.pde_spec(TimeCoefficient::Schrodinger);
        let pde = flatten(&spec, &EquivOptions::default()).unwrap();
        let tp = apply_group(&pde, &ctx.scale_group()).unwrap();
        let cs = match_connection(&tp, &GaugePolicy::PaperCanonical).unwrap();
        (ctx, pde, tp, cs)
    }

    #[test]
    fn transformed_coefficients_match_printed_1d_pattern() {
        let (ctx, _, tp, _) = pipeline_1d();
        let opts = EquivOptions::default();
        let coeff_v = ctx.parse("(I*D[a,t,1] + D[b,x,1] - V*a)/a").unwrap();
        let coeff_v1 = ctx.parse("(b + D[a,x,1])/a").unwrap();
        assert!(equiv(&tp.coeff_v, &coeff_v, &opts).unwrap());
        assert!(equiv(&tp.coeff_vi[0], &coeff_v1, &opts).unwrap());
    }

    #[test]
    fn identity_transform_leaves_potential_coefficient() {
        let ctx = Construction::new(1).unwrap();
        let spec = ctx.pde_spec(TimeCoefficient::Schrodinger);
        let pde = flatten(&spec, &EquivOptions::default()).unwrap();
        let tp = apply_group(&pde, &GroupElement::identity(1)).unwrap();
        let opts = EquivOptions::default();
        assert!(equiv(&tp.coeff_v, &ctx.parse("-V").unwrap(), &opts).unwrap());
        assert!(equiv(&tp.coeff_vi[0], &Expr::zero(), &opts).unwrap());
    }

    #[test]
    fn matched_connection_reproduces_printed_1d_forms() {
        let (ctx, _, _, cs) = pipeline_1d();
        let opts = EquivOptions::default();
        let x = ctx.coords.x[0].clone();
        let t = ctx.coords.t.clone();
        let alpha = cs.omega.entry(0, 0);
        assert!(equiv(
            &alpha.coefficient_for(&x),
            &ctx.parse("(b + D[a,x,1])/a").unwrap(),
            &opts
        )
        .unwrap());
        assert!(equiv(
            &alpha.coefficient_for(&t),
            &ctx.parse("I*D[a,t,1]/a").unwrap(),
            &opts
        )
        .unwrap());
        let beta = cs.omega.entry(1, 0);
        assert!(equiv(
            &beta.coefficient_for(&x),
            &ctx.parse("(D[b,x,1] - V*a)/a").unwrap(),
            &opts
        )
        .unwrap());
        assert!(beta.coefficient_for(&t).is_zero());
        for r in &cs.residual_constraints {
            assert!(r.is_zero(), "matching residual {:?}", r);
        }
    }

    #[test]
    fn round_trip_covariant_divergence_equals_reconstruction() {
        let (_, pde, tp, cs) = pipeline_1d();
        let coords = &pde.coords;
        let div = covariant_divergence(
            &cs.omega,
            &coords.jet_vector(),
            &pde.weights(),
            &coords.base_coords(),
            &coords.contact_map(),
        )
        .unwrap();
        let recon = tp.reconstruction().unwrap();
        assert!(equiv(&div, &recon, &EquivOptions::default()).unwrap());
    }

    #[test]
    fn trivial_data_give_zero_connection() {
        let ctx = Construction::new(1).unwrap();
        let mut spec = ctx.pde_spec(TimeCoefficient::Schrodinger);
        spec.potential = Expr::zero();
        spec.lower_order = Expr::zero();
        let pde = flatten(&spec, &EquivOptions::default()).unwrap();
        let g = GroupElement::identity(1);
        let tp = apply_group(&pde, &g).unwrap();
        let cs = match_connection(&tp, &GaugePolicy::PaperCanonical).unwrap();
        assert!(cs.omega.is_zero());
    }

    #[test]
    fn n2_connection_shares_potential_evenly() {
        // beta_ii carry -(1/2) V a / a each; oracle: substitute back through
        // the covariant divergence and compare with the transformed equation
        let ctx = Construction::new(2).unwrap();
        let spec = ctx.pde_spec(TimeCoefficient::Schrodinger);
        let pde = flatten(&spec, &EquivOptions::default()).unwrap();
        let tp = apply_group(&pde, &ctx.scale_group()).unwrap();
        let cs = match_connection(&tp, &GaugePolicy::PaperCanonical).unwrap();
        let opts = EquivOptions::default();

        for (i, bi) in ctx.b.iter().enumerate() {
            let beta = cs.omega.entry(i + 1, 0);
            let expected = simplify(
                &Expr::deriv(bi, &ctx.coords.x[i], 1)
                    .sub(Expr::ratio(1, 2).mul(Expr::sym(&ctx.potential)).mul(Expr::sym(&ctx.a)))
                    .div(Expr::sym(&ctx.a)),
            )
            .unwrap();
            assert!(equiv(
                &beta.coefficient_for(&ctx.coords.x[i]),
                &expected,
                &opts
            )
            .unwrap());
        }

        let div = covariant_divergence(
            &cs.omega,
            &ctx.coords.jet_vector(),
            &pde.weights(),
            &ctx.coords.base_coords(),
            &ctx.coords.contact_map(),
        )
        .unwrap();
        assert!(equiv(&div, &tp.reconstruction().unwrap(), &opts).unwrap());
    }

    #[test]
    fn zero_alpha_t_policy_still_matches() {
        let ctx = Construction::new(1).unwrap();
        let spec = ctx.pde_spec(TimeCoefficient::Schrodinger);
        let pde = flatten(&spec, &EquivOptions::default()).unwrap();
        let tp = apply_group(&pde, &ctx.scale_group()).unwrap();
        let cs = match_connection(&tp, &GaugePolicy::ZeroAlphaT).unwrap();
        assert!(cs.gauge.alpha_t.is_zero());
        let div = covariant_divergence(
            &cs.omega,
            &ctx.coords.jet_vector(),
            &pde.weights(),
            &ctx.coords.base_coords(),
            &ctx.coords.contact_map(),
        )
        .unwrap();
        assert!(equiv(
            &div,
            &tp.reconstruction().unwrap(),
            &EquivOptions::default()
        )
        .unwrap());
    }

    #[test]
    fn custom_policy_symmetry_family_matches() {
        let ctx = Construction::new(1).unwrap();
        let spec = ctx.pde_spec(TimeCoefficient::Schrodinger);
        let pde = flatten(&spec, &EquivOptions::default()).unwrap();
        let tp = apply_group(&pde, &ctx.scale_group()).unwrap();
        let f_shift = ctx.parse("V*x + t").unwrap();
        let g_shift = ctx.parse("a*b").unwrap();
        let cs = match_connection(&tp, &GaugePolicy::Custom { f_shift, g_shift }).unwrap();
        let div = covariant_divergence(
            &cs.omega,
            &ctx.coords.jet_vector(),
            &pde.weights(),
            &ctx.coords.base_coords(),
            &ctx.coords.contact_map(),
        )
        .unwrap();
        assert!(equiv(
            &div,
            &tp.reconstruction().unwrap(),
            &EquivOptions::default()
        )
        .unwrap());
    }

    #[test]
    fn torsion_fixes_epsilon_to_minus_alpha() {
        let (ctx, _, _, cs) = pipeline_1d();
        let weyl = embed_weyl(&cs, &ctx.coords).unwrap();
        let sol = torsion_constraints(&weyl).unwrap();
        let opts = EquivOptions::default();
        let x = &ctx.coords.x[0];
        let t = &ctx.coords.t;
        assert!(equiv(
            &sol.epsilon.coefficient_for(x),
            &ctx.parse("-(b + D[a,x,1])/a").unwrap(),
            &opts
        )
        .unwrap());
        assert!(equiv(
            &sol.epsilon.coefficient_for(t),
            &ctx.parse("-I*D[a,t,1]/a").unwrap(),
            &opts
        )
        .unwrap());
        assert_eq!(sol.constraints.len(), 1);
        assert!(equiv(
            &sol.constraints[0],
            &ctx.parse("(D[b,x,1] - V*a)/a").unwrap(),
            &opts
        )
        .unwrap());
    }

    #[test]
    fn torsion_block_vanishes_for_flat_trivial_case() {
        // omega = 0, V = 0: epsilon = 0 and no constraints
        let ctx = Construction::new(1).unwrap();
        let mut spec = ctx.pde_spec(TimeCoefficient::Schrodinger);
        spec.potential = Expr::zero();
        spec.lower_order = Expr::zero();
        let pde = flatten(&spec, &EquivOptions::default()).unwrap();
        let tp = apply_group(&pde, &GroupElement::identity(1)).unwrap();
        let cs = match_connection(&tp, &GaugePolicy::PaperCanonical).unwrap();
        let weyl = embed_weyl(&cs, &ctx.coords).unwrap();
        let sol = torsion_constraints(&weyl).unwrap();
        assert!(sol.epsilon.is_zero());
        assert!(sol.constraints.is_empty());
        let block = weyl.torsion_block(&sol.epsilon).unwrap();
        assert!(block.is_zero());
    }

    #[test]
    fn prolongation_specialisation_gives_vacuum_residual() {
        let (ctx, _, _, cs) = pipeline_1d();
        let weyl = embed_weyl(&cs, &ctx.coords).unwrap();
        let sol = torsion_constraints(&weyl).unwrap();
        let vac = specialize_prolongation(&sol.constraints, &ctx).unwrap();
        let expected = ctx.parse("D[a,x,2]/a - V").unwrap();
        assert!(equiv(&vac, &expected, &EquivOptions::default()).unwrap());
    }

    #[test]
    fn exponential_scale_closes_constraint_with_constant_potential() {
        // n = 2, a = exp(x1 + x2): Laplacian(a)/a = 2, so V = 2 closes it
        let ctx = Construction::new(2).unwrap();
        let spec = ctx.pde_spec(TimeCoefficient::Schrodinger);
        let pde = flatten(&spec, &EquivOptions::default()).unwrap();
        let tp = apply_group(&pde, &ctx.scale_group()).unwrap();
        let cs = match_connection(&tp, &GaugePolicy::PaperCanonical).unwrap();
        let weyl = embed_weyl(&cs, &ctx.coords).unwrap();
        let sol = torsion_constraints(&weyl).unwrap();
        let vac = specialize_prolongation(&sol.constraints, &ctx).unwrap();
        let mut bind = HashMap::new();
        bind.insert(ctx.a.clone(), ctx.parse("exp(x1 + x2)").unwrap());
        bind.insert(ctx.potential.clone(), Expr::int(2));
        let closed = substitute(&vac, &bind).unwrap();
        assert!(equiv(&closed, &Expr::zero(), &EquivOptions::default()).unwrap());
    }

    #[test]
    fn gauge_constraints_solve_column_entries() {
        let ctx = Construction::new(1).unwrap();
        let spec = ctx.pde_spec(TimeCoefficient::Schrodinger);
        let pde = flatten(&spec, &EquivOptions::default()).unwrap();
        let opts = EquivOptions::default();

        // general lambda: f = (lambda - 1) d_x e
        let gc =
            gauge_subgroup_constraints(&pde, &Expr::sym(&ctx.lambda), &ctx).unwrap();
        let expected = ctx.parse("(lambda - 1)*D[e,x,1]").unwrap();
        assert!(equiv(&gc.f_solved[0], &expected, &opts).unwrap());

        // lambda = 1: f = 0
        let gc1 = gauge_subgroup_constraints(&pde, &Expr::one(), &ctx).unwrap();
        assert!(equiv(&gc1.f_solved[0], &Expr::zero(), &opts).unwrap());
    }

    #[test]
    fn derived_scalar_constraint_matches_hand_elimination() {
        // Independent derivation: substituting f = (lambda-1) d_x e into the
        // proportionality system leaves
        //   (i - lambda) T - (lambda-1)^2 L2 + (lambda-1) L1^2 = 0
        // with T = d_t ln e, L2 = d_x^2 ln e, L1^2 = (d_x ln e)^2.
        let ctx = Construction::new(1).unwrap();
        let spec = ctx.pde_spec(TimeCoefficient::Schrodinger);
        let pde = flatten(&spec, &EquivOptions::default()).unwrap();
        let opts = EquivOptions::default();
        let gc =
            gauge_subgroup_constraints(&pde, &Expr::sym(&ctx.lambda), &ctx).unwrap();

        let ln_e = Expr::sym(&ctx.e).ln();
        let t = differentiate(&ln_e, &ctx.coords.t).unwrap();
        let l1 = differentiate(&ln_e, &ctx.coords.x[0]).unwrap();
        let l2 = differentiate(&l1, &ctx.coords.x[0]).unwrap();
        let lam = Expr::sym(&ctx.lambda);
        let lm1 = lam.clone().sub(Expr::one());
        let hand = simplify(
            &Expr::i()
                .sub(lam)
                .mul(t)
                .sub(lm1.clone().pow(2).mul(l2))
                .add(lm1.mul(l1.pow(2))),
        )
        .unwrap();
        assert!(equiv(&gc.scalar_constraint, &hand, &opts).unwrap());

        // at lambda = 1 the constraint collapses to (i - 1) d_t ln e
        let gc1 = gauge_subgroup_constraints(&pde, &Expr::one(), &ctx).unwrap();
        let expected =
            simplify(&Expr::i().sub(Expr::one()).mul(
                differentiate(&Expr::sym(&ctx.e).ln(), &ctx.coords.t).unwrap(),
            ))
            .unwrap();
        assert!(equiv(&gc1.scalar_constraint, &expected, &opts).unwrap());
    }

    #[test]
    fn constant_scale_satisfies_all_gauge_constraints() {
        // e constant: every constraint evaluates to 0 = 0 at any lambda
        let ctx = Construction::new(1).unwrap();
        let spec = ctx.pde_spec(TimeCoefficient::Schrodinger);
        let pde = flatten(&spec, &EquivOptions::default()).unwrap();
        let gc = gauge_subgroup_constraints(&pde, &ctx.parse("3").unwrap(), &ctx).unwrap();
        let mut bind = HashMap::new();
        bind.insert(ctx.e.clone(), Expr::int(5));
        let opts = EquivOptions::default();
        for c in gc.f_constraints.iter().chain([&gc.scalar_constraint]) {
            // f stays free in the raw constraints; bind it to its solved
            // value (0 for constant e) as well
            let mut full_bind = bind.clone();
            full_bind.insert(ctx.f[0].clone(), substitute(&gc.f_solved[0], &bind).unwrap());
            let at_const = substitute(c, &full_bind).unwrap();
            assert!(equiv(&at_const, &Expr::zero(), &opts).unwrap());
        }
    }

    #[test]
    fn full_pipeline_checks_pass_1d() {
        let out = run_construction(
            1,
            TimeCoefficient::Schrodinger,
            &GaugePolicy::PaperCanonical,
            None,
            &EquivOptions::default(),
        )
        .unwrap();
        for c in &out.checks {
            assert!(c.pass, "check failed: {}", c.name);
        }
        // the two printed variants disagree with the derivation in general
        assert!(!out.printed_variant_verdicts.0 || !out.printed_variant_verdicts.1);
    }

    #[test]
    fn gauge_consistency_identity_element() {
        let out = run_construction(
            1,
            TimeCoefficient::Schrodinger,
            &GaugePolicy::PaperCanonical,
            None,
            &EquivOptions::default(),
        )
        .unwrap();
        let mut id = GroupElement::identity(1);
        id.flavor = GroupFlavor::GaugeCandidate;
        let report = check_gauge_consistency(&out.weyl, &id, &EquivOptions::default()).unwrap();
        assert!(report.all_pass());
        // identity gauging adds nothing: transformed equals original
        let full = out.weyl.assemble().unwrap();
        let ad = ad_conjugate(&id, &full).unwrap();
        let mc = id
            .embedded_maurer_cartan(&out.ctx.coords.extended_system())
            .unwrap();
        assert_eq!(ad.add(&mc).unwrap(), full);
    }

    #[test]
    fn diffusion_variant_swaps_the_time_coefficient() {
        let out = run_construction(
            1,
            TimeCoefficient::Diffusion,
            &GaugePolicy::PaperCanonical,
            None,
            &EquivOptions::default(),
        )
        .unwrap();
        let opts = EquivOptions::default();
        let alpha_t = out
            .connection
            .omega
            .entry(0, 0)
            .coefficient_for(&out.ctx.coords.t);
        assert!(equiv(&alpha_t, &out.ctx.parse("D[a,t,1]/a").unwrap(), &opts).unwrap());
        for c in &out.checks {
            assert!(c.pass, "check failed: {}", c.name);
        }
    }
}
