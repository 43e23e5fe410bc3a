mod common;

use common::*;
use dirac_core::{
    make_context, poisson_bracket, sample_on_shell, trace_identity, Bracket, DiracContext,
    RationalExpr,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn contexts() -> Vec<(TestSystem, DiracContext)> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    [
        pair_elimination(3, 1),
        symplectic_mix(&mut rng, 3, 1),
        sphere(3, 1.0),
        nonlinear_graph(3),
    ]
    .into_iter()
    .map(|s| {
        let ctx = make_context(s.ps.clone(), s.constraints.clone()).unwrap();
        (s, ctx)
    })
    .collect()
}

#[test]
fn skew_symmetry_both_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (sys, ctx) in contexts() {
        let slots = var_slots(&sys.ps);
        for bracket in [Bracket::Poisson(&sys.ps), Bracket::Dirac(&ctx)] {
            for _ in 0..50 {
                let f = random_poly(&mut rng, &slots, 3, 4);
                let g = random_poly(&mut rng, &slots, 3, 4);
                assert!(
                    bracket.apply(&f, &g).add(&bracket.apply(&g, &f)).is_zero(),
                    "{}",
                    sys.label
                );
            }
        }
    }
}

#[test]
fn leibniz_both_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (sys, ctx) in contexts() {
        let slots = var_slots(&sys.ps);
        for bracket in [Bracket::Poisson(&sys.ps), Bracket::Dirac(&ctx)] {
            for _ in 0..25 {
                let f = random_poly(&mut rng, &slots, 3, 3);
                let g = random_poly(&mut rng, &slots, 2, 3);
                let h = random_poly(&mut rng, &slots, 2, 3);
                let lhs = bracket.apply(&f, &g.mul(&h));
                let rhs = bracket
                    .apply(&f, &g)
                    .mul(&h)
                    .add(&g.mul(&bracket.apply(&f, &h)));
                assert_eq!(lhs, rhs, "{}", sys.label);
            }
        }
    }
}

#[test]
fn poisson_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sys = pair_elimination(3, 0);
    let slots = var_slots(&sys.ps);
    for _ in 0..100 {
        let [f, g, h] = [0; 3].map(|_| random_poly(&mut rng, &slots, 3, 4));
        let pb = |a: &RationalExpr, b: &RationalExpr| poisson_bracket(a, b, &sys.ps);
        let sum = pb(&f, &pb(&g, &h))
            .add(&pb(&g, &pb(&h, &f)))
            .add(&pb(&h, &pb(&f, &g)));
        assert!(sum.is_zero());
    }
}

#[test]
fn dirac_jacobi_on_shell() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (sys, ctx) in contexts() {
        let slots = var_slots(&sys.ps);
        let points = sample_on_shell(&ctx, &sys.cfg).unwrap();
        for _ in 0..10 {
            let [f, g, h] = [0; 3].map(|_| random_poly(&mut rng, &slots, 3, 3));
            let db = |a: &RationalExpr, b: &RationalExpr| ctx.dirac_bracket(a, b);
            let sum = db(&f, &db(&g, &h))
                .add(&db(&g, &db(&h, &f)))
                .add(&db(&h, &db(&f, &g)));
            for p in &points {
                let v = sum.eval(p).unwrap();
                assert!(v.abs() <= 1e-8, "{}: jacobi residual {v}", sys.label);
            }
        }
    }
}

#[test]
fn constraints_are_casimirs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (sys, ctx) in contexts() {
        let slots = var_slots(&sys.ps);
        for _ in 0..30 {
            let f = random_poly(&mut rng, &slots, 3, 5);
            for chi in ctx.constraints() {
                assert!(ctx.dirac_bracket(&f, chi).is_zero(), "{}", sys.label);
            }
        }
    }
}

#[test]
fn delta_inverse_and_skew() {
    for (sys, ctx) in contexts() {
        assert!(ctx.delta().is_skew_symmetric(), "{}", sys.label);
        assert!(
            ctx.delta().mul(ctx.delta_inv()).unwrap().is_identity(),
            "{}",
            sys.label
        );
    }
}

#[test]
fn symplectic_mixes_have_canonical_delta() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 2..=5 {
        let sys = symplectic_mix(&mut rng, n, n);
        let ctx = make_context(sys.ps.clone(), sys.constraints.clone()).unwrap();
        for a in 0..2 * n {
            for b in 0..2 * n {
                let expected = match (a % 2, b % 2) {
                    (0, 1) if a / 2 == b / 2 => 1,
                    (1, 0) if a / 2 == b / 2 => -1,
                    _ => 0,
                };
                assert_eq!(ctx.delta()[(a, b)], RationalExpr::from(expected));
            }
        }
    }
}

#[test]
fn trace_identity_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut systems = Vec::new();
    for n in 2..=6 {
        for m in 1..=n {
            systems.push(pair_elimination(n, m));
            systems.push(symplectic_mix(&mut rng, n, m));
        }
        systems.push(sphere(n, 1.0));
    }
    systems.push(nonlinear_graph(4));
    for sys in systems {
        let ctx = make_context(sys.ps.clone(), sys.constraints.clone()).unwrap();
        let t = trace_identity(&ctx);
        assert!(t.holds, "{}: {:?}", sys.label, t.value);
        assert_eq!(t.expected, (sys.ps.n() - sys.constraints.len() / 2) as i64);
    }
}

#[test]
fn dirac_reduces_to_poisson_without_coupling() {
    // Functions that commute with every constraint see no correction.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sys = pair_elimination(4, 2);
    let ctx = make_context(sys.ps.clone(), sys.constraints.clone()).unwrap();
    let free: Vec<usize> = vec![2, 3, 6, 7];
    for _ in 0..50 {
        let f = random_poly(&mut rng, &free, 3, 4);
        let g = random_poly(&mut rng, &var_slots(&sys.ps), 3, 4);
        assert_eq!(ctx.dirac_bracket(&f, &g), poisson_bracket(&f, &g, &sys.ps));
    }
}
