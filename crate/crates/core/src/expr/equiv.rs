//! Probabilistic expression equivalence by seeded random evaluation.
//!
//! Coordinates and jet variables (including their formal derivatives) sample
//! as independent complex points; named functions sample as random degree-3
//! polynomials in their declared coordinates, with coefficients uniform in
//! the complex unit square, so derivatives evaluate analytically. Sample
//! points that land near a singularity (small denominator or logarithm
//! argument) are redrawn, with a bounded retry budget.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DerivOrders, Expr, ExprError, Symbol, SymbolKind};

/// Magnitude below which a sampled denominator or logarithm argument counts
/// as singular and forces a resample.
const SINGULAR_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EquivOptions {
    pub trials: u32,
    pub tol: f64,
    pub seed: u64,
    pub max_resamples: u32,
}

impl Default for EquivOptions {
    fn default() -> Self {
        EquivOptions {
            trials: 20,
            tol: 1e-9,
            seed: 0,
            max_resamples: 400,
        }
    }
}

impl EquivOptions {
    pub fn seeded(seed: u64) -> Self {
        EquivOptions {
            seed,
            ..Default::default()
        }
    }
}

/// Random multivariate polynomial standing in for a named function.
#[derive(Debug, Clone)]
struct SampledPoly {
    args: Vec<Arc<Symbol>>,
    terms: Vec<(Vec<u32>, Complex64)>,
}

const SAMPLE_DEGREE: u32 = 3;

fn exponent_tuples(nvars: usize, max_total: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; nvars];
    fn rec(idx: usize, budget: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if idx == current.len() {
            out.push(current.clone());
            return;
        }
        for k in 0..=budget {
            current[idx] = k;
            rec(idx + 1, budget - k, current, out);
        }
        current[idx] = 0;
    }
    rec(0, max_total, &mut current, &mut out);
    out
}

impl SampledPoly {
    fn sample(rng: &mut ChaCha8Rng, args: &[Arc<Symbol>]) -> Self {
        let terms = exponent_tuples(args.len(), SAMPLE_DEGREE)
            .into_iter()
            .map(|exps| {
                let c = Complex64::new(rng.gen::<f64>(), rng.gen::<f64>());
                (exps, c)
            })
            .collect();
        SampledPoly {
            args: args.to_vec(),
            terms,
        }
    }

    fn derivative(&self, orders: &DerivOrders) -> SampledPoly {
        let mut poly = self.clone();
        for (coord, k) in orders.pairs() {
            let var = poly.args.iter().position(|a| a == coord);
            for _ in 0..*k {
                match var {
                    None => {
                        poly.terms.clear();
                    }
                    Some(vi) => {
                        poly.terms = poly
                            .terms
                            .iter()
                            .filter(|(exps, _)| exps[vi] > 0)
                            .map(|(exps, c)| {
                                let mut e = exps.clone();
                                let k = e[vi];
                                e[vi] -= 1;
                                (e, c * k as f64)
                            })
                            .collect();
                    }
                }
            }
        }
        poly
    }

    fn eval(&self, coords: &HashMap<Arc<Symbol>, Complex64>) -> Result<Complex64, EvalProblem> {
        let mut total = Complex64::new(0.0, 0.0);
        for (exps, c) in &self.terms {
            let mut term = *c;
            for (vi, e) in exps.iter().enumerate() {
                if *e > 0 {
                    let v = coords
                        .get(&self.args[vi])
                        .copied()
                        .ok_or_else(|| EvalProblem::Unbound(self.args[vi].name.clone()))?;
                    term *= v.powi(*e as i32);
                }
            }
            total += term;
        }
        Ok(total)
    }
}

#[derive(Debug)]
enum EvalProblem {
    Singular,
    Unbound(String),
}

struct Env {
    coords: HashMap<Arc<Symbol>, Complex64>,
    jets: HashMap<(Arc<Symbol>, DerivOrders), Complex64>,
    funcs: HashMap<Arc<Symbol>, SampledPoly>,
    floor: f64,
}

fn eval_env(e: &Expr, env: &Env) -> Result<Complex64, EvalProblem> {
    match e {
        Expr::Const(c) => Ok(c.to_complex()),
        Expr::Sym(s) => match s.kind {
            SymbolKind::Coordinate => env
                .coords
                .get(s)
                .copied()
                .ok_or_else(|| EvalProblem::Unbound(s.name.clone())),
            SymbolKind::JetVariable => env
                .jets
                .get(&(s.clone(), DerivOrders::new(Vec::new())))
                .copied()
                .ok_or_else(|| EvalProblem::Unbound(s.name.clone())),
            SymbolKind::Function => match env.funcs.get(s) {
                Some(p) => p.eval(&env.coords),
                None => Err(EvalProblem::Unbound(s.name.clone())),
            },
        },
        Expr::Deriv(s, ords) => match s.kind {
            SymbolKind::Function => match env.funcs.get(s) {
                Some(p) => p.derivative(ords).eval(&env.coords),
                None => Err(EvalProblem::Unbound(s.name.clone())),
            },
            SymbolKind::JetVariable => env
                .jets
                .get(&(s.clone(), ords.clone()))
                .copied()
                .ok_or_else(|| EvalProblem::Unbound(s.name.clone())),
            SymbolKind::Coordinate => Err(EvalProblem::Unbound(s.name.clone())),
        },
        Expr::Sum(es) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in es {
                acc += eval_env(x, env)?;
            }
            Ok(acc)
        }
        Expr::Product(es) => {
            let mut acc = Complex64::new(1.0, 0.0);
            for x in es {
                acc *= eval_env(x, env)?;
            }
            Ok(acc)
        }
        Expr::Pow(b, n) => {
            let v = eval_env(b, env)?;
            if *n < 0 && v.norm() < env.floor {
                return Err(EvalProblem::Singular);
            }
            Ok(v.powi(*n))
        }
        Expr::Quot(a, b) => {
            let num = eval_env(a, env)?;
            let den = eval_env(b, env)?;
            if den.norm() < env.floor {
                return Err(EvalProblem::Singular);
            }
            Ok(num / den)
        }
        Expr::Ln(u) => {
            let v = eval_env(u, env)?;
            if v.norm() < env.floor {
                return Err(EvalProblem::Singular);
            }
            Ok(v.ln())
        }
        Expr::Exp(u) => Ok(eval_env(u, env)?.exp()),
    }
}

#[derive(Default)]
struct Requirements {
    coords: BTreeSet<Arc<Symbol>>,
    jets: BTreeSet<(Arc<Symbol>, DerivOrders)>,
    funcs: BTreeSet<Arc<Symbol>>,
}

fn collect(e: &Expr, req: &mut Requirements) {
    e.walk(&mut |node| match node {
        Expr::Sym(s) => match s.kind {
            SymbolKind::Coordinate => {
                req.coords.insert(s.clone());
            }
            SymbolKind::JetVariable => {
                req.jets.insert((s.clone(), DerivOrders::new(Vec::new())));
            }
            SymbolKind::Function => {
                req.funcs.insert(s.clone());
                for a in &s.args {
                    req.coords.insert(a.clone());
                }
            }
        },
        Expr::Deriv(s, ords) => match s.kind {
            SymbolKind::Function => {
                req.funcs.insert(s.clone());
                for a in &s.args {
                    req.coords.insert(a.clone());
                }
            }
            SymbolKind::JetVariable => {
                req.jets.insert((s.clone(), ords.clone()));
            }
            SymbolKind::Coordinate => {}
        },
        _ => {}
    });
}

fn sample_env(rng: &mut ChaCha8Rng, req: &Requirements) -> Env {
    let mut coords = HashMap::new();
    for c in &req.coords {
        coords.insert(c.clone(), Complex64::new(rng.gen::<f64>(), rng.gen::<f64>()));
    }
    let mut jets = HashMap::new();
    for j in &req.jets {
        jets.insert(j.clone(), Complex64::new(rng.gen::<f64>(), rng.gen::<f64>()));
    }
    let mut funcs = HashMap::new();
    for f in &req.funcs {
        funcs.insert(f.clone(), SampledPoly::sample(rng, &f.args));
    }
    Env {
        coords,
        jets,
        funcs,
        floor: SINGULAR_FLOOR,
    }
}

/// Decide whether two expressions agree as functions, by evaluating both at
/// `trials` seeded random sample points. Returns `false` on the first
/// disagreement; singular samples are redrawn up to `max_resamples` times.
pub fn equiv(lhs: &Expr, rhs: &Expr, opts: &EquivOptions) -> Result<bool, ExprError> {
    let mut req = Requirements::default();
    collect(lhs, &mut req);
    collect(rhs, &mut req);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut successes = 0u32;
    let mut resamples = 0u32;
    while successes < opts.trials {
        let env = sample_env(&mut rng, &req);
        match (eval_env(lhs, &env), eval_env(rhs, &env)) {
            (Ok(a), Ok(b)) => {
                let scale = 1.0_f64.max(a.norm()).max(b.norm());
                if (a - b).norm() > opts.tol * scale {
                    return Ok(false);
                }
                successes += 1;
            }
            (Err(EvalProblem::Unbound(name)), _) | (_, Err(EvalProblem::Unbound(name))) => {
                return Err(ExprError::UnboundSymbol { name });
            }
            _ => {
                resamples += 1;
                if resamples > opts.max_resamples {
                    return Err(ExprError::SingularSampling);
                }
            }
        }
    }
    Ok(true)
}

/// Numeric evaluation with explicit bindings for coordinates and jet
/// variables; named functions and formal jet derivatives are not allowed.
/// Used to evaluate potentials and initial conditions on grids.
pub fn eval_at(
    e: &Expr,
    bindings: &BTreeMap<Arc<Symbol>, Complex64>,
) -> Result<Complex64, ExprError> {
    let mut coords = HashMap::new();
    let mut jets = HashMap::new();
    for (s, v) in bindings {
        match s.kind {
            SymbolKind::JetVariable => {
                jets.insert((s.clone(), DerivOrders::new(Vec::new())), *v);
            }
            _ => {
                coords.insert(s.clone(), *v);
            }
        }
    }
    let env = Env {
        coords,
        jets,
        funcs: HashMap::new(),
        floor: 0.0,
    };
    match eval_env(e, &env) {
        Ok(v) => {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(ExprError::DivisionByZero)
            }
        }
        Err(EvalProblem::Unbound(name)) => Err(ExprError::UnboundSymbol { name }),
        Err(EvalProblem::Singular) => Err(ExprError::DivisionByZero),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{differentiate, parse, simplify, Workspace};

    fn ws() -> Workspace {
        let mut ws = Workspace::new();
        let t = ws.declare_coordinate("t").unwrap();
        let x = ws.declare_coordinate("x").unwrap();
        ws.declare_function("a", &[t.clone(), x.clone()]).unwrap();
        ws.declare_function("e", &[t.clone(), x.clone()]).unwrap();
        ws.declare_jet_variable("v").unwrap();
        ws
    }

    #[test]
    fn reflexive_on_log_derivative() {
        let ws = ws();
        let lhs = parse(&ws, "D[e,x,1]/e").unwrap();
        assert!(equiv(&lhs, &lhs, &EquivOptions::default()).unwrap());
    }

    #[test]
    fn distinguishes_powers() {
        let ws = ws();
        let x2 = parse(&ws, "x^2").unwrap();
        let x3 = parse(&ws, "x^3").unwrap();
        assert!(!equiv(&x2, &x3, &EquivOptions::default()).unwrap());
    }

    #[test]
    fn chain_rule_identity_for_ln() {
        let ws = ws();
        let e = ws.lookup("e").unwrap();
        let x = ws.lookup("x").unwrap();
        let dln = differentiate(&crate::expr::Expr::sym(&e).ln(), &x).unwrap();
        let expected = parse(&ws, "D[e,x,1]/e").unwrap();
        assert!(equiv(&dln, &expected, &EquivOptions::default()).unwrap());
    }

    #[test]
    fn cross_checks_unsimplified_against_canonical() {
        // (1/a)(b + dxa) - b/a  ==  dxa / a  checked without canonical forms
        let mut ws = Workspace::new();
        let t = ws.declare_coordinate("t").unwrap();
        let x = ws.declare_coordinate("x").unwrap();
        ws.declare_function("a", &[t.clone(), x.clone()]).unwrap();
        ws.declare_function("b", &[t, x]).unwrap();
        let raw = parse(&ws, "(1/a)*(b + D[a,x,1]) - b/a").unwrap();
        let target = parse(&ws, "D[a,x,1]/a").unwrap();
        assert_eq!(simplify(&raw).unwrap(), target);
        assert!(equiv(&raw, &target, &EquivOptions::default()).unwrap());
    }

    #[test]
    fn jet_derivatives_sample_independently() {
        let ws = ws();
        let dv = parse(&ws, "D[v,t,1]").unwrap();
        let v = parse(&ws, "v").unwrap();
        assert!(!equiv(&dv, &v, &EquivOptions::default()).unwrap());
        assert!(equiv(&dv, &dv, &EquivOptions::default()).unwrap());
    }

    #[test]
    fn deterministic_given_seed() {
        let ws = ws();
        let lhs = parse(&ws, "a*a/a").unwrap();
        let rhs = parse(&ws, "a").unwrap();
        let o = EquivOptions::seeded(7);
        assert_eq!(
            equiv(&lhs, &rhs, &o).unwrap(),
            equiv(&lhs, &rhs, &o).unwrap()
        );
    }

    #[test]
    fn eval_at_computes_numbers() {
        let ws = ws();
        let x = ws.lookup("x").unwrap();
        let e = parse(&ws, "x^2 - 1").unwrap();
        let mut b = BTreeMap::new();
        b.insert(x, Complex64::new(3.0, 0.0));
        assert_eq!(eval_at(&e, &b).unwrap(), Complex64::new(8.0, 0.0));
    }
}
