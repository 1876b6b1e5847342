use std::sync::Arc;

use proptest::prelude::*;

use equitopo_core::arrangement::linalg::RatMatrix;
use equitopo_core::arrangement::{betti_report, k_equal_arrangement, v1_arrangement, FinitePoset};
use equitopo_core::config_spaces::{
    act_on_pattern, coincidence_pattern, hat_map, in_kwise_diagonal, in_max_diagonal, in_top_set, majority_block,
    top_block_classify,
};
use equitopo_core::group::{act_on_tuple, permute_coordinates, project_to_ig, GroupSubset, GroupTable, OrbitTuple};
use equitopo_core::scalar::{rat, Rational};
use equitopo_core::solver::action::apply_generic;
use equitopo_core::solver::residual::{coincidence_residual, max_coincidence_residual};
use equitopo_core::solver::{run_starts, ActionRep, MapSpec, Scenario, Target};
use equitopo_core::Error;

const EPS: f64 = 1e-9;

fn group() -> impl Strategy<Value = Arc<GroupTable>> {
    prop_oneof![
        (1usize..=8).prop_map(|q| GroupTable::cyclic(q).unwrap()),
        Just(GroupTable::p_torus(2, 2).unwrap()),
        Just(GroupTable::p_torus(2, 3).unwrap()),
        Just(GroupTable::p_torus(3, 2).unwrap()),
    ]
    .prop_map(Arc::new)
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| rat(n, d))
}

/// Values drawn from a tiny pool so that ties are common.
fn tied_rational() -> impl Strategy<Value = Rational> {
    prop_oneof![(0i64..3).prop_map(|n| rat(n, 1)), small_rational()]
}

fn scalar_tuple(min_q: usize) -> impl Strategy<Value = (Arc<GroupTable>, Vec<Rational>)> {
    group()
        .prop_filter("order large enough", move |g| g.order() >= min_q)
        .prop_flat_map(|g| {
            let q = g.order();
            (Just(g), proptest::collection::vec(tied_rational(), q))
        })
}


proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn action_axioms(
        (g, values) in group().prop_flat_map(|g| {
            let q = g.order();
            (Just(g), proptest::collection::vec(proptest::collection::vec(small_rational(), 2), q))
        }),
        a in 0usize..64,
        b in 0usize..64,
    ) {
        let q = g.order();
        let (a, b) = (a % q, b % q);
        let phi = OrbitTuple::new(g.clone(), values).unwrap();
        prop_assert_eq!(act_on_tuple(0, &phi).unwrap(), phi.clone());
        let twice = act_on_tuple(a, &act_on_tuple(b, &phi).unwrap()).unwrap();
        prop_assert_eq!(twice, act_on_tuple(g.mul(a, b), &phi).unwrap());
        let back = act_on_tuple(g.inv(a), &act_on_tuple(a, &phi).unwrap()).unwrap();
        prop_assert_eq!(back, phi);
    }

    #[test]
    fn projection_commutes_with_permutation((g, v) in scalar_tuple(1), a in 0usize..64) {
        let a = a % g.order();
        let projected = project_to_ig(&v);
        let sum: Rational = projected.coefficients().iter().cloned().sum();
        prop_assert_eq!(sum, rat(0, 1));
        let again = project_to_ig(projected.coefficients());
        prop_assert_eq!(again.coefficients(), projected.coefficients());
        let lhs = project_to_ig(&permute_coordinates(&g, a, &v));
        let rhs = permute_coordinates(&g, a, projected.coefficients());
        prop_assert_eq!(lhs.coefficients(), &rhs[..]);
    }

    #[test]
    fn cover_complete_and_disjoint((g, v) in scalar_tuple(2), kk in 0usize..64) {
        let q = g.order();
        let k = 2 + kk % (q - 1);
        let phi = OrbitTuple::scalar(g.clone(), v).unwrap();
        let on_diagonal = in_max_diagonal(&phi, k, EPS).unwrap();
        match top_block_classify(&phi, k) {
            Ok(t) => {
                prop_assert!(!on_diagonal);
                prop_assert!(t.m >= 1 && t.m < k);
                prop_assert!(in_top_set(&phi, &t.block));
                for mask in 1u64..(1 << q) - 1 {
                    let other = GroupSubset::new(q, (0..q).filter(|i| mask >> i & 1 == 1)).unwrap();
                    if other.len() == t.m && other != t.block {
                        prop_assert!(!in_top_set(&phi, &other));
                    }
                }
            }
            Err(Error::NotInW { multiplicity, .. }) => {
                prop_assert!(on_diagonal);
                prop_assert!(multiplicity >= k);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn classifiers_are_equivariant((g, v) in scalar_tuple(2), kk in 0usize..64, a in 0usize..64) {
        let q = g.order();
        let k = 2 + kk % (q - 1);
        let a = a % q;
        let phi = OrbitTuple::scalar(g.clone(), v).unwrap();
        let moved = act_on_tuple(a, &phi).unwrap();
        if let Ok(t) = top_block_classify(&phi, k) {
            prop_assert_eq!(top_block_classify(&moved, k).unwrap().block, t.block.act(&g, a).unwrap());
        }
        let pattern = coincidence_pattern(&phi, EPS).unwrap();
        prop_assert_eq!(coincidence_pattern(&moved, EPS).unwrap(), act_on_pattern(&g, a, &pattern));
        if let Ok(block) = majority_block(&phi, k, EPS) {
            prop_assert_eq!(majority_block(&moved, k, EPS).unwrap(), block.act(&g, a).unwrap());
        }
    }

    #[test]
    fn classification_is_locally_constant(
        (g, v) in scalar_tuple(2),
        kk in 0usize..64,
        noise in proptest::collection::vec(-99i64..=99, 8),
    ) {
        let q = g.order();
        let k = 2 + kk % (q - 1);
        let phi = OrbitTuple::scalar(g.clone(), v.clone()).unwrap();
        let mut distinct = v.clone();
        distinct.sort();
        distinct.dedup();
        let gap = distinct.windows(2).map(|w| &w[1] - &w[0]).min().unwrap_or_else(|| rat(1, 1));
        // every perturbation is strictly below gap / 2
        let unit = gap / rat(200, 1);
        let pattern = coincidence_pattern(&phi, EPS).unwrap();
        let labels = pattern.labels();
        let shift = |i: usize, by_block: bool| {
            let n = if by_block { noise[labels[i] % 8] } else { noise[i % 8] };
            &v[i] + &unit * rat(n, 1)
        };
        let free = OrbitTuple::scalar(g.clone(), (0..q).map(|i| shift(i, false)).collect()).unwrap();
        let blockwise = OrbitTuple::scalar(g.clone(), (0..q).map(|i| shift(i, true)).collect()).unwrap();
        if let Ok(t) = top_block_classify(&phi, k) {
            prop_assert!(in_top_set(&free, &t.block));
            prop_assert_eq!(top_block_classify(&blockwise, k).unwrap(), t);
        }
        if let Ok(block) = majority_block(&phi, k, EPS) {
            prop_assert_eq!(majority_block(&blockwise, k, EPS).unwrap(), block);
        }
    }

    #[test]
    fn full_diagonals_agree((g, v) in scalar_tuple(2)) {
        let q = g.order();
        let phi = OrbitTuple::scalar(g, v).unwrap();
        prop_assert_eq!(in_kwise_diagonal(&phi, q, EPS).unwrap(), in_max_diagonal(&phi, q, EPS).unwrap());
    }

    #[test]
    fn max_diagonal_inside_diagonal((g, v) in scalar_tuple(2), kk in 0usize..64) {
        let q = g.order();
        let k = 2 + kk % (q - 1);
        let phi = OrbitTuple::scalar(g, v).unwrap();
        if in_max_diagonal(&phi, k, EPS).unwrap() {
            prop_assert!(in_kwise_diagonal(&phi, k, EPS).unwrap());
        }
    }
}

fn random_poset(n: usize, bits: &[bool]) -> FinitePoset {
    // x < y when a path of chosen forward edges leads from x to y
    let mut reach = vec![vec![false; n]; n];
    let mut idx = 0;
    for i in 0..n {
        for j in i + 1..n {
            reach[i][j] = bits[idx % bits.len()];
            idx += 1;
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][m] && reach[m][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    FinitePoset::from_relation(n, |x, y| reach[x][y])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_squares_to_zero(n in 1usize..9, bits in proptest::collection::vec(any::<bool>(), 36)) {
        let poset = random_poset(n, &bits);
        for p in [2, 3, 5] {
            let complex = poset.chain_complex(p).unwrap();
            prop_assert!(complex.boundary_squares_to_zero());
        }
    }

    #[test]
    fn betti_independent_of_order_and_basis(
        qk in prop_oneof![Just((3usize, 2usize)), Just((4, 2)), Just((4, 3)), Just((5, 3)), Just((5, 4))],
        perm_seed in any::<u64>(),
        coeffs in proptest::collection::vec((1i64..=3, -2i64..=2), 64),
        p in prop_oneof![Just(2u32), Just(3), Just(5)],
    ) {
        let (q, k) = qk;
        let arrangement = k_equal_arrangement(q, k).unwrap();
        let reference = betti_report(&arrangement, p).unwrap().betti;
        let mut subspaces: Vec<RatMatrix> = arrangement.subspaces().to_vec();
        let n = subspaces.len();
        for i in (1..n).rev() {
            let j = (perm_seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) >> 17) as usize % (i + 1);
            subspaces.swap(i, j);
        }
        let mut c = coeffs.iter().cycle();
        for basis in &mut subspaces {
            // rows -> L rows with L lower triangular, nonzero diagonal
            let old = basis.clone();
            for r in 0..old.len() {
                let (diag, _) = *c.next().unwrap();
                let mut row: Vec<Rational> = old[r].iter().map(|x| x * rat(diag, 1)).collect();
                for prev in old.iter().take(r) {
                    let (_, off) = *c.next().unwrap();
                    for (x, y) in row.iter_mut().zip(prev) {
                        *x += y * rat(off, 2);
                    }
                }
                basis[r] = row;
            }
        }
        let changed = arrangement.with_subspaces(subspaces).unwrap();
        prop_assert_eq!(betti_report(&changed, p).unwrap().betti, reference);
    }
}

/// Partitions of `0..n` enumerated as label vectors where each new label
/// is at most one more than every earlier label.
fn brute_force_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for label in 0..=next {
            prefix.push(label);
            go(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

#[test]
fn lattice_matches_partitions() {
    use equitopo_core::arrangement::intersection_lattice;
    for q in 2..=6 {
        for k in 2..=q {
            let lattice = intersection_lattice(&k_equal_arrangement(q, k).unwrap()).unwrap();
            let mut by_dim = vec![0usize; q + 1];
            for labels in brute_force_partitions(q) {
                let blocks = labels.iter().max().unwrap() + 1;
                let sizes: Vec<usize> = (0..blocks).map(|b| labels.iter().filter(|&&l| l == b).count()).collect();
                if sizes.iter().all(|&s| s == 1 || s >= k) {
                    by_dim[blocks] += 1;
                }
            }
            let mut lattice_dims = vec![0usize; q + 1];
            for e in &lattice.elements {
                lattice_dims[q - e.codim] += 1;
            }
            assert_eq!(lattice_dims, by_dim, "q={q} k={k}");
        }
    }
}

#[test]
fn lattice_interval_complexes_are_chain_complexes() {
    use equitopo_core::arrangement::intersection_lattice;
    use equitopo_core::arrangement::order_complex::open_interval;
    for (q, k) in [(4, 2), (5, 2), (5, 3), (6, 3)] {
        let lattice = intersection_lattice(&k_equal_arrangement(q, k).unwrap()).unwrap();
        for x in 0..lattice.len() {
            if x == lattice.bottom() {
                continue;
            }
            for p in [2, 3, 5] {
                assert!(open_interval(&lattice, x).chain_complex(p).unwrap().boundary_squares_to_zero());
            }
        }
    }
}

#[test]
fn euler_characteristics_agree() {
    for q in 2..=6 {
        for k in 2..=q {
            assert!(betti_report(&k_equal_arrangement(q, k).unwrap(), 3).unwrap().euler_consistent);
        }
    }
    for (m, q, k) in [(2, 2, 2), (2, 3, 2), (3, 2, 2), (2, 4, 4)] {
        assert!(betti_report(&v1_arrangement(m, q, k).unwrap(), 2).unwrap().euler_consistent);
    }
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-3).then(|| v.iter().map(|x| x / n).collect())
}

fn sphere_scenarios() -> Vec<Scenario> {
    [
        r#"{"domain":{"kind":"sphere","d":3},"group":{"kind":"cyclic","q":2},"action":"antipodal","map":{"expr":"x1 + x2^2"},"target":"A","k":2}"#,
        r#"{"domain":{"kind":"sphere","d":4},"group":{"kind":"cyclic","q":3},"action":"complex_roots","map":{"expr":"x1*x4 - x2"},"target":"A_prime","k":2}"#,
        r#"{"domain":{"kind":"sphere","d":4},"group":{"kind":"cyclic","q":4},"action":"permutation","map":{"expr":["x1 - x2*x3","x4^2"]},"target":"A","k":3}"#,
        r#"{"domain":{"kind":"sphere","d":6},"group":{"kind":"cyclic","q":3},"action":"complex_roots","map":{"expr":["x1 + x3*x5","x2^2 - x6"]},"target":"A_prime_and_h","k":2}"#,
    ]
    .iter()
    .map(|s| Scenario::from_json(s).unwrap())
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn residuals_are_invariant(raw in proptest::collection::vec(-1.0f64..1.0, 6), which in 0usize..4, a in 0usize..8) {
        let s = &sphere_scenarios()[which];
        let d = s.action.dim();
        let Some(x) = unit(&raw[..d]) else { return Ok(()) };
        let a = a % s.q();
        let mut gx = vec![0.0; d];
        s.action.apply_into(a, &x, &mut gx);
        let r = s.evaluate(&x).unwrap().residual;
        let rg = s.evaluate(&gx).unwrap().residual;
        prop_assert!((r - rg).abs() <= 1e-12 * (1.0 + r.abs()), "{r} vs {rg}");
        let ra = s.residual_a(&x).unwrap().0;
        let rag = s.residual_a(&gx).unwrap().0;
        prop_assert!((ra - rag).abs() <= 1e-12 * (1.0 + ra.abs()));
    }

    #[test]
    fn exact_residual_zero_iff_diagonal(
        q in 3usize..=5,
        x in proptest::collection::vec(prop_oneof![Just(rat(0, 1)), Just(rat(1, 1)), Just(rat(-1, 2))], 5),
        kk in 0usize..8,
        which in 0usize..2,
    ) {
        let g = Arc::new(GroupTable::cyclic(q).unwrap());
        let action = ActionRep::permutation(g.clone()).unwrap();
        let f = MapSpec::parse(&[["x1^2 - x2*x3", "x1 + 2*x2"][which]]).unwrap();
        let k = 2 + kk % (q - 1);
        let x = &x[..q];
        let hat = hat_map(|y: &[Rational]| f.eval(y), &action, x).unwrap();
        let (r, subset) = coincidence_residual(hat.values(), k);
        prop_assert_eq!(r == rat(0, 1), in_kwise_diagonal(&hat, k, EPS).unwrap());
        prop_assert_eq!(subset.len(), k);
        let scalars = hat.scalars();
        let (rp, _) = max_coincidence_residual(&scalars, k);
        prop_assert_eq!(rp == rat(0, 1), in_max_diagonal(&hat, k, EPS).unwrap());
        // A'(f, k) is contained in A(f, k)
        if rp == rat(0, 1) {
            prop_assert_eq!(r, rat(0, 1));
        }
        for h in 0..q {
            let hx = apply_generic(&action, h, x).unwrap();
            let lhs = act_on_tuple(h, &hat).unwrap();
            let rhs = hat_map(|y: &[Rational]| f.eval(y), &action, &hx).unwrap();
            prop_assert_eq!(lhs.values(), rhs.values());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solver_is_deterministic_and_reverifies(seed in any::<u64>(), which in 0usize..4) {
        let mut s = sphere_scenarios().swap_remove(which);
        s.options.seed = seed;
        s.options.starts = 4;
        let a = run_starts(&s).unwrap();
        let b = run_starts(&s).unwrap();
        prop_assert_eq!(&a.best, &b.best);
        prop_assert_eq!(&a.start_residuals, &b.start_residuals);
        let fresh = a.best.reverify(&s).unwrap();
        prop_assert!((fresh - a.best.residual).abs() <= 1e-12);
        prop_assert_eq!(a.best.subset.len(), s.k);
        let mut sorted = a.best.subset.clone();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), s.k);
    }

    #[test]
    fn max_coincidence_witnesses_are_coincidence_witnesses(seed in any::<u64>()) {
        let src = r#"{"domain":{"kind":"sphere","d":4},"group":{"kind":"cyclic","q":3},"action":"complex_roots","map":{"expr":"x1*x4 - x2"},"target":"A_prime","k":2,"starts":6}"#;
        let mut s = Scenario::from_json(src).unwrap();
        s.options.seed = seed;
        let r = run_starts(&s).unwrap().best;
        if r.success {
            let mut as_a = s.clone();
            as_a.target = Target::A;
            prop_assert!(as_a.evaluate(&r.witness.flat()).unwrap().residual <= s.options.eps_solve);
        }
    }
}
