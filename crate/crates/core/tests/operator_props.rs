use blocknorm_core::multilinear::{compose, finite_type, functional_norm, sup_norm, MultiOperator};
use blocknorm_core::rng::stream;
use blocknorm_core::sampling::{random_linear_map, random_operator, random_unit_vector, random_vector};
use blocknorm_core::spaces::{linear_map_norm, vec_norm, Exponent, FiniteLpSpace, Vector};
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        Just(Exponent::ONE),
        Just(Exponent::TWO),
        Just(Exponent::Infinity),
        (1.0f64..6.0).prop_map(Exponent::Finite),
    ]
}

fn polytope_exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![Just(Exponent::ONE), Just(Exponent::Infinity)]
}

fn space(exp: impl Strategy<Value = Exponent>) -> impl Strategy<Value = FiniteLpSpace> {
    (1usize..5, exp).prop_map(|(d, p)| FiniteLpSpace::new(d, p).unwrap())
}

/// Entry-by-entry evaluation of `Σ coeff[i₁..iₙ, c] x₁[i₁]⋯xₙ[iₙ]`.
fn direct_apply(t: &MultiOperator, xs: &[Vec<f64>]) -> Vec<f64> {
    let shape = t.shape();
    let mut out = vec![0.0; t.codomain.dim];
    for (flat, coeff) in t.coeffs.iter().enumerate() {
        let mut rest = flat;
        let mut idx = vec![0; shape.len()];
        for s in (0..shape.len()).rev() {
            idx[s] = rest % shape[s];
            rest /= shape[s];
        }
        let mut term = *coeff;
        for (k, x) in xs.iter().enumerate() {
            term *= x[idx[k]];
        }
        out[idx[shape.len() - 1]] += term;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vec_norm_is_a_norm(sp in space(exponent()), seed in any::<u64>(), lambda in -5.0f64..5.0) {
        let mut g = stream(seed, 0);
        let x = random_vector(&mut g, sp);
        let y = random_vector(&mut g, sp);
        let sum = Vector::new(sp, x.coords.iter().zip(&y.coords).map(|(a, b)| a + b).collect()).unwrap();
        prop_assert!(vec_norm(&sum) <= vec_norm(&x) + vec_norm(&y) + 1e-12);
        prop_assert!((vec_norm(&x.scaled(lambda)) - lambda.abs() * vec_norm(&x)).abs() <= 1e-12 * (1.0 + vec_norm(&x)));
        prop_assert_eq!(vec_norm(&sp.zero()), 0.0);
    }

    #[test]
    fn apply_matches_entrywise_contraction(
        domains in prop::collection::vec(space(exponent()), 1..4),
        codomain in space(exponent()),
        seed in any::<u64>(),
    ) {
        let mut g = stream(seed, 1);
        let t = random_operator(&mut g, &domains, codomain);
        let xs: Vec<Vector> = domains.iter().map(|d| random_vector(&mut g, *d)).collect();
        let raw: Vec<Vec<f64>> = xs.iter().map(|x| x.coords.clone()).collect();
        let got = t.apply(&xs).unwrap().coords;
        for (a, b) in got.iter().zip(direct_apply(&t, &raw)) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn finite_type_matches_product_formula(
        domains in prop::collection::vec(space(exponent()), 1..4),
        codomain in space(exponent()),
        seed in any::<u64>(),
    ) {
        let mut g = stream(seed, 2);
        let phis: Vec<Vector> = domains.iter().map(|d| random_vector(&mut g, *d)).collect();
        let b = random_vector(&mut g, codomain);
        let t = finite_type(&phis, &b).unwrap();
        for _ in 0..10 {
            let xs: Vec<Vector> = domains.iter().map(|d| random_vector(&mut g, *d)).collect();
            let scale: f64 = phis.iter().zip(&xs).map(|(p, x)| p.coords.iter().zip(&x.coords).map(|(a, c)| a * c).sum::<f64>()).product();
            for (a, bc) in t.apply(&xs).unwrap().coords.iter().zip(&b.coords) {
                prop_assert!((a - scale * bc).abs() <= 1e-12 * (1.0 + (scale * bc).abs()));
            }
        }
    }

    #[test]
    fn compose_agrees_pointwise(
        domains in prop::collection::vec(space(exponent()), 1..4),
        codomain in space(exponent()),
        inner in prop::collection::vec(space(exponent()), 3),
        outer in space(exponent()),
        seed in any::<u64>(),
    ) {
        let mut g = stream(seed, 3);
        let t = random_operator(&mut g, &domains, codomain);
        let us: Vec<_> = domains.iter().zip(&inner).map(|(d, e)| random_linear_map(&mut g, *e, *d)).collect();
        let v = random_linear_map(&mut g, codomain, outer);
        let c = compose(&v, &t, &us).unwrap();
        for _ in 0..10 {
            let xs: Vec<Vector> = us.iter().map(|u| random_vector(&mut g, u.domain)).collect();
            let mapped: Vec<Vector> = us.iter().zip(&xs).map(|(u, x)| u.apply(x).unwrap()).collect();
            let expected = v.apply(&t.apply(&mapped).unwrap()).unwrap();
            for (a, b) in c.apply(&xs).unwrap().coords.iter().zip(&expected.coords) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
        // associativity on the outer side
        let w = random_linear_map(&mut g, outer, codomain);
        let left = compose(&w, &c, &us.iter().map(|u| blocknorm_core::LinearMap::identity(u.domain)).collect::<Vec<_>>()).unwrap();
        let right = compose(&w.after(&v).unwrap(), &t, &us).unwrap();
        for (a, b) in left.coeffs.iter().zip(&right.coeffs) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn exact_sup_norm_dominates_sampled_points(
        domains in prop::collection::vec(space(polytope_exponent()), 1..4),
        codomain in space(exponent()),
        seed in any::<u64>(),
    ) {
        let mut g = stream(seed, 4);
        let t = random_operator(&mut g, &domains, codomain);
        let est = sup_norm(&t, 0, seed);
        prop_assert!(est.exact);
        for _ in 0..20 {
            let xs: Vec<Vector> = domains.iter().map(|d| random_unit_vector(&mut g, *d)).collect();
            prop_assert!(t.apply(&xs).unwrap().norm() <= est.value + 1e-12);
        }
        let w: Vec<&[f64]> = est.witness.iter().map(|x| x.as_slice()).collect();
        prop_assert!((t.codomain.norm(&t.apply_slices(&w)) - est.value).abs() <= 1e-12);
    }

    #[test]
    fn sup_norm_of_composition_is_submultiplicative(
        domains in prop::collection::vec(space(polytope_exponent()), 1..3),
        codomain in space(polytope_exponent()),
        inner in prop::collection::vec(space(polytope_exponent()), 2),
        outer in space(exponent()),
        seed in any::<u64>(),
    ) {
        let mut g = stream(seed, 5);
        let t = random_operator(&mut g, &domains, codomain);
        let us: Vec<_> = domains.iter().zip(&inner).map(|(d, e)| random_linear_map(&mut g, *e, *d)).collect();
        let v = random_linear_map(&mut g, codomain, outer);
        let lhs = sup_norm(&compose(&v, &t, &us).unwrap(), 0, 0);
        let tn = sup_norm(&t, 0, 0);
        let vn = linear_map_norm(&v, 0, 0);
        let un: Vec<_> = us.iter().map(|u| linear_map_norm(u, 0, 0)).collect();
        prop_assert!(lhs.exact && tn.exact && vn.exact && un.iter().all(|u| u.exact));
        let rhs = vn.value * tn.value * un.iter().map(|u| u.value).product::<f64>();
        prop_assert!(lhs.value <= rhs + 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn sup_norm_of_rank_one_is_product_of_dual_norms(
        domains in prop::collection::vec(space(exponent()), 1..4),
        codomain in space(exponent()),
        seed in any::<u64>(),
    ) {
        let mut g = stream(seed, 6);
        let phis: Vec<Vector> = domains.iter().map(|d| random_vector(&mut g, *d)).collect();
        let b = random_vector(&mut g, codomain);
        let expected = b.norm() * phis.iter().map(functional_norm).product::<f64>();
        let est = sup_norm(&finite_type(&phis, &b).unwrap(), 4, seed);
        prop_assert!((est.value - expected).abs() <= 1e-9 * (1.0 + expected));
    }
}
