use blocknorm_core::blocks::Block;
use blocknorm_core::multilinear::{sup_norm, MultiOperator};
use blocknorm_core::rng::stream;
use blocknorm_core::sampling::{random_operator, random_vector};
use blocknorm_core::seqnorms::{class_norm, ClassSpec, ClassStack, VecSequence};
use blocknorm_core::spaces::{Exponent, FiniteLpSpace};
use blocknorm_core::summing::{block_value, summing_norm, summing_norm_with, SearchConfig};
use proptest::prelude::*;

fn space(dim: std::ops::Range<usize>) -> impl Strategy<Value = FiniteLpSpace> {
    (
        dim,
        prop_oneof![Just(Exponent::ONE), Just(Exponent::TWO), Just(Exponent::Infinity), (1.0f64..5.0).prop_map(Exponent::Finite)],
    )
        .prop_map(|(d, p)| FiniteLpSpace::new(d, p).unwrap())
}

fn strong_or_sup() -> impl Strategy<Value = ClassSpec> {
    prop_oneof![(1.0f64..4.0).prop_map(ClassSpec::Strong), Just(ClassSpec::Strong(1.0)), Just(ClassSpec::Sup)]
}

fn block(n: usize, bound: usize, which: u8) -> Block {
    match which % 3 {
        0 => Block::diagonal(&vec![bound; n]).unwrap(),
        1 => Block::full(&vec![bound; n]).unwrap(),
        _ => Block::equality(0, n - 1, &vec![bound; n]).unwrap(),
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Vertices of the unit ball of length-2 sequences over ℓ₁² or ℓ_∞² in
/// `ℓ₁(·)` or `ℓ_∞(·)`, written out by hand.
fn oracle_vertices(spec: ClassSpec, space: FiniteLpSpace) -> Vec<Vec<Vec<f64>>> {
    let ext: Vec<Vec<f64>> = if space.exp == Exponent::ONE {
        vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]
    } else {
        vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]
    };
    let zero = vec![0.0, 0.0];
    match spec {
        ClassSpec::Sup => ext.iter().flat_map(|a| ext.iter().map(move |b| vec![a.clone(), b.clone()])).collect(),
        _ => ext.iter().flat_map(|a| [vec![a.clone(), zero.clone()], vec![zero.clone(), a.clone()]]).collect(),
    }
}

/// Block value for n = 2 with a strong stack, coded from the definition.
fn oracle_value(t: &MultiOperator, diagonal: bool, q: (f64, f64), x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let val = |i: usize, j: usize| t.codomain.norm(&t.apply_slices(&[&x[i], &y[j]]));
    if diagonal {
        (0..2).map(|j| val(j, j).powf(q.0)).sum::<f64>().powf(1.0 / q.0)
    } else {
        (0..2)
            .map(|i| (0..2).map(|j| val(i, j).powf(q.1)).sum::<f64>().powf(q.0 / q.1))
            .sum::<f64>()
            .powf(1.0 / q.0)
    }
}

fn tiny_instance() -> impl Strategy<Value = (MultiOperator, ClassSpec, ClassSpec, bool, (f64, f64), u64)> {
    let sp = prop_oneof![Just(Exponent::ONE), Just(Exponent::Infinity)].prop_map(|p| FiniteLpSpace::new(2, p).unwrap());
    let x = prop_oneof![Just(ClassSpec::Strong(1.0)), Just(ClassSpec::Sup)];
    (sp.clone(), sp, space(1..3), x.clone(), x, any::<bool>(), 1.0f64..3.0, 1.0f64..3.0, any::<u64>()).prop_map(
        |(e1, e2, f, x1, x2, diag, q1, q2, seed)| {
            let t = random_operator(&mut stream(seed, 99), &[e1, e2], f);
            (t, x1, x2, diag, (q1, q2), seed)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_point_sequences_realize_the_operator_value(
        n in 2usize..4,
        dims in prop::collection::vec(space(1..5), 4),
        which in any::<u8>(),
        specs in prop::collection::vec(strong_or_sup(), 3),
        seed in any::<u64>(),
    ) {
        let mut g = stream(seed, 0);
        let t = random_operator(&mut g, &dims[..n], dims[3]);
        let b = block(n, 3, which);
        let stack = ClassStack::new(specs[..n].to_vec()).unwrap();
        let xs: Vec<_> = dims[..n].iter().map(|d| random_vector(&mut g, *d)).collect();
        let target = t.apply(&xs).unwrap().norm();
        for member in b.members() {
            let seqs: Vec<_> = xs.iter().zip(member).map(|(x, j)| VecSequence::single(x, *j)).collect();
            let v = block_value(&t, &b, &stack, &seqs, 0, 0).unwrap().value;
            prop_assert!(close(v, target, 1e-12));
        }
    }

    #[test]
    fn estimate_dominates_operator_norm_and_is_attained(
        n in 2usize..4,
        dims in prop::collection::vec(space(1..4), 4),
        which in any::<u8>(),
        specs in prop::collection::vec(strong_or_sup(), 3),
        xspecs in prop::collection::vec(prop_oneof![Just(ClassSpec::Strong(1.0)), Just(ClassSpec::Strong(2.0)), Just(ClassSpec::Weak(1.0)), Just(ClassSpec::Sup)], 3),
        seed in any::<u64>(),
    ) {
        let t = random_operator(&mut stream(seed, 1), &dims[..n], dims[3]);
        let b = block(n, 2, which);
        let stack = ClassStack::new(specs[..n].to_vec()).unwrap();
        let est = summing_norm(&t, &b, &xspecs[..n], &stack, 2, 2, seed).unwrap();
        let norm = sup_norm(&t, 2, seed);
        prop_assert!(norm.value <= est.value + 1e-9);
        let again = block_value(&t, &b, &stack, &est.witness, est.leaf_budget, est.seed).unwrap();
        prop_assert!((again.value - est.value).abs() <= 1e-12);
        if est.exact {
            for (spec, s) in xspecs.iter().zip(&est.witness) {
                prop_assert!(class_norm(*spec, s, 0, 0).value <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn nondecreasing_in_budget_and_truncation(
        dims in prop::collection::vec(space(1..4), 3),
        which in any::<u8>(),
        specs in prop::collection::vec(strong_or_sup(), 2),
        seed in any::<u64>(),
    ) {
        let t = random_operator(&mut stream(seed, 2), &dims[..2], dims[2]);
        let b = block(2, 3, which);
        let stack = ClassStack::new(specs).unwrap();
        let xs = [ClassSpec::Strong(2.0), ClassSpec::Strong(1.5)];
        let mut last = 0.0;
        for budget in 0..5 {
            let v = summing_norm(&t, &b, &xs, &stack, 2, budget, seed).unwrap().value;
            prop_assert!(v >= last);
            last = v;
        }
        let mut last = 0.0;
        for k in 1..4 {
            let v = summing_norm(&t, &b, &xs, &stack, k, 2, seed).unwrap().value;
            prop_assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn homogeneous_at_fixed_seed(
        dims in prop::collection::vec(space(1..4), 3),
        which in any::<u8>(),
        specs in prop::collection::vec(strong_or_sup(), 2),
        seed in any::<u64>(),
    ) {
        let t = random_operator(&mut stream(seed, 3), &dims[..2], dims[2]);
        let b = block(2, 2, which);
        let stack = ClassStack::new(specs).unwrap();
        let xs = [ClassSpec::Strong(1.0), ClassSpec::Strong(3.0)];
        let base = summing_norm(&t, &b, &xs, &stack, 2, 2, seed).unwrap().value;
        for lambda in [2.0, -1.0] {
            let v = summing_norm(&t.scaled(lambda), &b, &xs, &stack, 2, 2, seed).unwrap().value;
            prop_assert!(close(v, lambda.abs() * base, 1e-9));
        }
    }

    #[test]
    fn search_never_exceeds_vertex_oracle((t, x1, x2, diag, q, seed) in tiny_instance()) {
        let b = if diag { Block::diagonal(&[2, 2]).unwrap() } else { Block::full(&[2, 2]).unwrap() };
        let stack = ClassStack::new(vec![ClassSpec::Strong(q.0), ClassSpec::Strong(q.1)]).unwrap();
        let mut oracle: f64 = 0.0;
        for x in oracle_vertices(x1, t.domains[0]) {
            for y in oracle_vertices(x2, t.domains[1]) {
                oracle = oracle.max(oracle_value(&t, diag, q, &x, &y));
            }
        }
        let random_only = SearchConfig { enumerate_vertices: false, ..SearchConfig::default() };
        let est = summing_norm_with(&t, &b, &[x1, x2], &stack, 2, 4, seed, &random_only).unwrap();
        prop_assert!(est.value <= oracle + 1e-9);
        let full = summing_norm(&t, &b, &[x1, x2], &stack, 2, 4, seed).unwrap();
        prop_assert!(full.attains_sup);
        prop_assert!(close(full.value, oracle, 1e-12));
    }
}
