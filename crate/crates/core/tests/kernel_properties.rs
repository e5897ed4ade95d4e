//! Randomised properties of the symbolic kernel and the exterior calculus,
//! with seeded generation so failures reproduce.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jetcartan::expr::{
    differentiate, equiv, simplify, substitute, EquivOptions, Expr, Symbol, Workspace,
};
use jetcartan::forms::{curvature, kform_equiv, CoordSystem, GroupElement, GroupFlavor, KForm};

fn setup() -> (Workspace, Arc<Symbol>, Arc<Symbol>, Vec<Arc<Symbol>>) {
    let mut ws = Workspace::new();
    let t = ws.declare_coordinate("t").unwrap();
    let x = ws.declare_coordinate("x").unwrap();
    let mut funcs = Vec::new();
    for name in ["p", "q", "r", "s"] {
        funcs.push(ws.declare_function(name, &[t.clone(), x.clone()]).unwrap());
    }
    (ws, t, x, funcs)
}

/// Random polynomial in the given symbols with small rational coefficients
/// and a constant offset keeping it away from zero.
fn random_poly(rng: &mut ChaCha8Rng, syms: &[Arc<Symbol>]) -> Expr {
    let mut acc = Expr::ratio(rng.gen_range(2..6), 2);
    for (i, s) in syms.iter().enumerate() {
        for deg in 1..=2 {
            if rng.gen_bool(0.6) {
                let c = Expr::ratio(rng.gen_range(-6..7).max(1), 3);
                let mut term = c.mul(Expr::sym(s).pow(deg));
                // occasionally mix in a second symbol
                if i + 1 < syms.len() && rng.gen_bool(0.3) {
                    term = term.mul(Expr::sym(&syms[i + 1]));
                }
                acc = acc.add(term);
            }
        }
    }
    simplify(&acc).unwrap()
}

/// Random expression mixing the named functions, both coordinates and a few
/// node kinds, for differentiation/substitution properties.
fn random_expr(rng: &mut ChaCha8Rng, coords: &[Arc<Symbol>], funcs: &[Arc<Symbol>]) -> Expr {
    let mut pool: Vec<Expr> = Vec::new();
    pool.push(random_poly(rng, coords));
    for f in funcs.iter().take(2) {
        pool.push(Expr::sym(f));
    }
    pool.push(Expr::sym(&funcs[2]).mul(Expr::sym(&coords[1])));
    let mut acc = pool[rng.gen_range(0..pool.len())].clone();
    for _ in 0..3 {
        let next = pool[rng.gen_range(0..pool.len())].clone();
        match rng.gen_range(0..4) {
            0 => acc = acc.add(next),
            1 => acc = acc.mul(next),
            2 => acc = acc.sub(next),
            _ => acc = acc.add(next.mul(Expr::sym(&funcs[3]))),
        }
    }
    simplify(&acc).unwrap()
}

#[test]
fn differentiation_is_linear() {
    let (_, t, x, funcs) = setup();
    let coords = [t.clone(), x.clone()];
    let opts = EquivOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..8 {
        let f = random_expr(&mut rng, &coords, &funcs);
        let g = random_expr(&mut rng, &coords, &funcs);
        let alpha = Expr::ratio(rng.gen_range(-5..6).max(1), 2);
        let beta = Expr::ratio(rng.gen_range(-5..6).max(1), 3);
        let combo = alpha.clone().mul(f.clone()).add(beta.clone().mul(g.clone()));
        let lhs = differentiate(&combo, &x).unwrap();
        let rhs = alpha
            .mul(differentiate(&f, &x).unwrap())
            .add(beta.mul(differentiate(&g, &x).unwrap()));
        assert!(
            equiv(&lhs, &rhs, &opts).unwrap(),
            "linearity failed on trial {}",
            trial
        );
    }
}

#[test]
fn partial_derivatives_commute() {
    let (_, t, x, funcs) = setup();
    let coords = [t.clone(), x.clone()];
    let opts = EquivOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..8 {
        let f = random_expr(&mut rng, &coords, &funcs);
        let xt = differentiate(&differentiate(&f, &x).unwrap(), &t).unwrap();
        let tx = differentiate(&differentiate(&f, &t).unwrap(), &x).unwrap();
        assert!(equiv(&xt, &tx, &opts).unwrap());
    }
}

#[test]
fn substitution_respects_sums_and_products() {
    let (_, t, x, funcs) = setup();
    let coords = [t.clone(), x.clone()];
    let opts = EquivOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..6 {
        let f = random_expr(&mut rng, &coords, &funcs);
        let g = random_expr(&mut rng, &coords, &funcs);
        let replacement = random_poly(&mut rng, &coords);
        let mut bind = HashMap::new();
        bind.insert(funcs[0].clone(), replacement);

        let sum_then = substitute(&f.clone().add(g.clone()), &bind).unwrap();
        let then_sum = substitute(&f, &bind)
            .unwrap()
            .add(substitute(&g, &bind).unwrap());
        assert!(equiv(&sum_then, &then_sum, &opts).unwrap());

        let prod_then = substitute(&f.clone().mul(g.clone()), &bind).unwrap();
        let then_prod = substitute(&f, &bind)
            .unwrap()
            .mul(substitute(&g, &bind).unwrap());
        assert!(equiv(&prod_then, &then_prod, &opts).unwrap());
    }
}

#[test]
fn equiv_is_an_equivalence_relation_on_samples() {
    let (_, t, x, funcs) = setup();
    let coords = [t.clone(), x.clone()];
    let opts = EquivOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..4 {
        let f = random_expr(&mut rng, &coords, &funcs);
        // reflexive
        assert!(equiv(&f, &f, &opts).unwrap());
        // symmetric against an equivalent rewrite
        let g = simplify(&f.clone().mul(Expr::int(2)).div(Expr::int(2))).unwrap();
        assert!(equiv(&f, &g, &opts).unwrap());
        assert!(equiv(&g, &f, &opts).unwrap());
        // transitive on a chain of rewrites
        let h = simplify(&g.clone().add(Expr::sym(&funcs[0])).sub(Expr::sym(&funcs[0]))).unwrap();
        assert!(equiv(&g, &h, &opts).unwrap());
        assert!(equiv(&f, &h, &opts).unwrap());
    }
}

#[test]
fn wedge_antisymmetry_on_random_one_forms() {
    let (ws, t, x, funcs) = setup();
    let coords = [t.clone(), x.clone()];
    let cs = CoordSystem::new(vec![t.clone(), x.clone()]);
    let opts = EquivOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let _ = ws;
    for _ in 0..5 {
        let p = KForm::one_form(
            cs.clone(),
            &[
                (&t, random_expr(&mut rng, &coords, &funcs)),
                (&x, random_expr(&mut rng, &coords, &funcs)),
            ],
        )
        .unwrap();
        let q = KForm::one_form(
            cs.clone(),
            &[
                (&t, random_expr(&mut rng, &coords, &funcs)),
                (&x, random_expr(&mut rng, &coords, &funcs)),
            ],
        )
        .unwrap();
        // p ^ q = (-1)^{1*1} q ^ p
        let pq = p.wedge(&q).unwrap();
        let qp_neg = q.wedge(&p).unwrap().neg().unwrap();
        assert!(kform_equiv(&pq, &qp_neg, &opts).unwrap());
    }
}

#[test]
fn d_squared_vanishes_on_random_forms() {
    let (_, t, x, funcs) = setup();
    let coords = [t.clone(), x.clone()];
    let cs = CoordSystem::new(vec![t.clone(), x.clone()]);
    let opts = EquivOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..5 {
        let zero_form =
            KForm::scalar(cs.clone(), random_expr(&mut rng, &coords, &funcs)).unwrap();
        let dd = zero_form
            .exterior_derivative()
            .unwrap()
            .exterior_derivative()
            .unwrap();
        assert!(kform_equiv(&dd, &KForm::zero(cs.clone(), 2), &opts).unwrap());

        let one_form = KForm::one_form(
            cs.clone(),
            &[
                (&t, random_expr(&mut rng, &coords, &funcs)),
                (&x, random_expr(&mut rng, &coords, &funcs)),
            ],
        )
        .unwrap();
        let dd1 = one_form
            .exterior_derivative()
            .unwrap()
            .exterior_derivative()
            .unwrap();
        assert!(dd1.is_zero() || kform_equiv(&dd1, &KForm::zero(cs.clone(), 3), &opts).unwrap());
    }
}

#[test]
fn leibniz_rule_on_random_forms() {
    let (_, t, x, funcs) = setup();
    let coords = [t.clone(), x.clone()];
    let cs = CoordSystem::new(vec![t.clone(), x.clone()]);
    let opts = EquivOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..5 {
        let f = KForm::scalar(cs.clone(), random_expr(&mut rng, &coords, &funcs)).unwrap();
        let p = KForm::one_form(
            cs.clone(),
            &[
                (&t, random_expr(&mut rng, &coords, &funcs)),
                (&x, random_expr(&mut rng, &coords, &funcs)),
            ],
        )
        .unwrap();
        // d(f ^ p) = df ^ p + f d p  (deg f = 0)
        let lhs = f.wedge(&p).unwrap().exterior_derivative().unwrap();
        let rhs = f
            .exterior_derivative()
            .unwrap()
            .wedge(&p)
            .unwrap()
            .add(&f.wedge(&p.exterior_derivative().unwrap()).unwrap())
            .unwrap();
        assert!(kform_equiv(&lhs, &rhs, &opts).unwrap());
    }
}

#[test]
fn maurer_cartan_structure_equation_on_random_elements() {
    let (_, t, x, _) = setup();
    let coords = [t.clone(), x.clone()];
    let cs = CoordSystem::new(vec![t.clone(), x.clone()]);
    let opts = EquivOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..6 {
        let h = GroupElement::new(
            random_poly(&mut rng, &coords),
            vec![random_poly(&mut rng, &coords)],
            GroupFlavor::GaugeCandidate,
        )
        .unwrap();
        let mc = h.maurer_cartan(&cs).unwrap();
        let omega = curvature(&mc).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(kform_equiv(
                    omega.entry(i, j),
                    &KForm::zero(cs.clone(), 2),
                    &opts
                )
                .unwrap());
            }
        }
    }
}

#[test]
fn abelian_adjoint_leaves_triangular_matrices_fixed() {
    let (_, t, x, funcs) = setup();
    let coords = [t.clone(), x.clone()];
    let cs = CoordSystem::new(vec![t.clone(), x.clone()]);
    let opts = EquivOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..4 {
        // omega in the scaling-group algebra pattern [[alpha,0],[beta,alpha]]
        let alpha = KForm::one_form(
            cs.clone(),
            &[
                (&t, random_expr(&mut rng, &coords, &funcs)),
                (&x, random_expr(&mut rng, &coords, &funcs)),
            ],
        )
        .unwrap();
        let beta = KForm::one_form(
            cs.clone(),
            &[(&x, random_expr(&mut rng, &coords, &funcs))],
        )
        .unwrap();
        let mut omega = jetcartan::forms::MatrixForm::zero(2, 2, 1, cs.clone());
        omega.set_entry(0, 0, alpha.clone()).unwrap();
        omega.set_entry(1, 1, alpha).unwrap();
        omega.set_entry(1, 0, beta).unwrap();

        let h = GroupElement::new(
            random_poly(&mut rng, &coords),
            vec![random_poly(&mut rng, &coords)],
            GroupFlavor::General,
        )
        .unwrap();
        let hmat = h.matrix(&cs).unwrap();
        let hinv = h.inverse().unwrap().matrix(&cs).unwrap();
        let conj = hinv.wedge(&omega).unwrap().wedge(&hmat).unwrap();
        assert!(jetcartan::forms::matrix_equiv(&conj, &omega, &opts).unwrap());
    }
}
