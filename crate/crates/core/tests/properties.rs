use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;

use nodal_core::cohomology::{kunneth_diagonal, split_node, ClassExpr, CohRing, InsertionList};
use nodal_core::gw_oracle::{kontsevich_sequence, pencil_reducible_count, SummationOrder};
use nodal_core::loop_matrix::{build_loop_matrix, Flavor, PairingVector, SpectralDecomposition};
use nodal_core::node_trade::NodeTrader;
use nodal_core::pairings::{
    act_permutation, enumerate_pairings, loop_number, loop_type, ActionFlavor, Pairing, Permutation,
};
use nodal_core::partitions::{double_factorial_odd, even_row_partitions, partitions_of, Partition};
use nodal_core::rational::{frac, int, Rational};
use nodal_core::stable_graphs::{GraphBuilder, LegKind};
use nodal_core::tensor_oracle::BilinearSpace;

fn pairing_strategy(max_n: usize) -> impl Strategy<Value = Pairing> {
    (1..=max_n).prop_flat_map(|n| {
        let all = enumerate_pairings(n).unwrap();
        (0..all.len()).prop_map(move |i| all[i].clone())
    })
}

fn permutation_strategy(m: usize) -> impl Strategy<Value = Permutation> {
    Just((1..=m).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::new(v).unwrap())
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(p, q)| frac(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn loop_number_is_symmetric_and_bounded(n in 1usize..=4, i in 0usize..105, j in 0usize..105) {
        let all = enumerate_pairings(n).unwrap();
        let (p, q) = (&all[i % all.len()], &all[j % all.len()]);
        let l = loop_number(p, q).unwrap();
        prop_assert_eq!(l, loop_number(q, p).unwrap());
        prop_assert!(1 <= l && l <= n);
        let product = p.as_permutation().compose(&q.as_permutation()).unwrap();
        prop_assert_eq!(product.cycle_count(), 2 * l);
        let lt = loop_type(p, q).unwrap();
        prop_assert_eq!(lt.weight(), n);
        prop_assert_eq!(lt.length(), l);
    }

    #[test]
    fn action_is_a_homomorphism(
        (g, h, p) in (1usize..=3).prop_flat_map(|n| (
            permutation_strategy(2 * n),
            permutation_strategy(2 * n),
            { let all = enumerate_pairings(n).unwrap(); (0..all.len()).prop_map(move |i| all[i].clone()) },
        ))
    ) {
        for flavor in [ActionFlavor::Plain, ActionFlavor::Signed] {
            let gh = g.compose(&h).unwrap();
            let (lhs, s_gh) = act_permutation(&gh, &p, flavor).unwrap();
            let (hp, s_h) = act_permutation(&h, &p, flavor).unwrap();
            let (rhs, s_g) = act_permutation(&g, &hp, flavor).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(s_gh, s_g * s_h);
        }
    }

    #[test]
    fn action_preserves_loop_numbers(
        (g, i, j) in (1usize..=3).prop_flat_map(|n| (permutation_strategy(2 * n), 0usize..15, 0usize..15))
    ) {
        let n = g.degree() / 2;
        let all = enumerate_pairings(n).unwrap();
        let (p, q) = (&all[i % all.len()], &all[j % all.len()]);
        let (gp, _) = act_permutation(&g, p, ActionFlavor::Plain).unwrap();
        let (gq, _) = act_permutation(&g, q, ActionFlavor::Plain).unwrap();
        prop_assert_eq!(loop_number(&gp, &gq).unwrap(), loop_number(p, q).unwrap());
    }

    #[test]
    fn adjacent_transposition_changes_crossings_by_one(p in pairing_strategy(5), i0 in 0usize..9) {
        let m = 2 * p.n();
        let i = 1 + i0 % (m - 1);
        let partner = p.partner_table();
        prop_assume!(partner[i] != i + 1);
        let tau = Permutation::transposition(m, i, i + 1).unwrap();
        let (tp, _) = act_permutation(&tau, &p, ActionFlavor::Plain).unwrap();
        let diff = tp.crossing_number() as i64 - p.crossing_number() as i64;
        prop_assert_eq!(diff.abs(), 1);
    }

    #[test]
    fn signed_action_sign_tracks_crossing_parity(p in pairing_strategy(4), i0 in 0usize..7) {
        let m = 2 * p.n();
        let i = 1 + i0 % (m - 1);
        let tau = Permutation::transposition(m, i, i + 1).unwrap();
        let (tp, sign) = act_permutation(&tau, &p, ActionFlavor::Signed).unwrap();
        prop_assert_eq!(tp.n(), p.n());
        prop_assert!(sign == 1 || sign == -1);
    }

    #[test]
    fn transpose_is_an_involution(m in 0usize..=12, idx in 0usize..100) {
        let all = partitions_of(m);
        let lambda = &all[idx % all.len()];
        prop_assert_eq!(&lambda.transpose().transpose(), lambda);
        prop_assert_eq!(lambda.transpose().weight(), m);
    }

    #[test]
    fn half_and_doubled_are_inverse(m in 1usize..=6, idx in 0usize..20) {
        let evens = even_row_partitions(2 * m).unwrap();
        let lambda = &evens[idx % evens.len()];
        prop_assert_eq!(&lambda.half().unwrap().doubled(), lambda);
        let all = partitions_of(m);
        let mu = &all[idx % all.len()];
        prop_assert_eq!(&mu.doubled().half().unwrap(), mu);
    }

    #[test]
    fn content_product_is_monic(m in 1usize..=5, idx in 0usize..10) {
        let evens = even_row_partitions(2 * m).unwrap();
        let lambda = &evens[idx % evens.len()];
        // leading coefficient 1 and degree m: finite differences of order m equal m!
        let mut values: Vec<Rational> = (0..=m as i64).map(|x| lambda.content_product(&int(x)).unwrap()).collect();
        for _ in 0..m {
            values = values.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        let fact: i64 = (1..=m as i64).product();
        prop_assert_eq!(&values[0], &int(fact));
    }

    #[test]
    fn pencil_count_has_unit_slopes(chi in 0i64..20, b in 0i64..20) {
        let base = pencil_reducible_count(chi + 4, b);
        prop_assert_eq!(pencil_reducible_count(chi + 5, b).unwrap(), base.clone().unwrap() + 1);
        prop_assert_eq!(pencil_reducible_count(chi + 4, b + 1).unwrap(), base.unwrap() + 1);
    }

    #[test]
    fn restricted_inverse_roundtrip(
        n in 1usize..=3,
        k in 1usize..=3,
        symplectic in any::<bool>(),
        weights in proptest::collection::vec(small_rational(), 15),
    ) {
        let flavor = if symplectic { Flavor::symplectic(k).unwrap() } else { Flavor::orthogonal(k).unwrap() };
        let dec = SpectralDecomposition::auto(n).unwrap();
        let basis = dec.invariant_subspace(flavor);
        let len = basis.first().map_or(0, |b| b.len());
        let mut coords = vec![Rational::zero(); len];
        for (b, w) in basis.iter().zip(&weights) {
            for (c, x) in coords.iter_mut().zip(&b.coords) {
                *c += w * x;
            }
        }
        let v = PairingVector::new(n, coords).unwrap();
        let m = build_loop_matrix(n, &flavor.specialization()).unwrap();
        let mv = m.apply(&v).unwrap();
        prop_assert_eq!(dec.restricted_inverse_apply(flavor, &mv).unwrap(), v);
    }

    #[test]
    fn node_trade_roundtrip(
        n in 1usize..=2,
        k in 1usize..=2,
        symplectic in any::<bool>(),
        coords in proptest::collection::vec(small_rational(), 3),
    ) {
        let space = if symplectic { BilinearSpace::symplectic(k).unwrap() } else { BilinearSpace::orthogonal(k).unwrap() };
        let trader = NodeTrader::new(n, space).unwrap();
        let c = PairingVector::new(n, coords[..trader.decomposition().blocks().iter().map(|b| b.basis.len()).sum::<usize>()].to_vec()).unwrap();
        let omega = trader.expand(&c).unwrap();
        let data = trader.contract_with_all_diagonals(&omega.tensor).unwrap();
        let back = trader.recover(&data).unwrap();
        prop_assert_eq!(back.tensor, omega.tensor);
    }

    #[test]
    fn contraction_is_idempotent_and_keeps_legs(genera in proptest::collection::vec(0u32..3, 1..5), loops in 0usize..3) {
        let mut b = GraphBuilder::new();
        let vs: Vec<usize> = genera.iter().map(|&g| b.vertex(g, nodal_core::cohomology::CurveClass(vec![1]))).collect();
        for w in vs.windows(2) {
            b.edge(w[0], w[1]);
        }
        for _ in 0..loops {
            b.edge(vs[0], vs[0]);
        }
        b.leg(vs[vs.len() - 1], 1, LegKind::Interior);
        let g = b.build().unwrap();
        let c = g.contract_edges().unwrap();
        prop_assert_eq!(c.vertices().len(), 1);
        prop_assert_eq!(c.vertices()[0].genus, genera.iter().sum::<u32>() + loops as u32);
        prop_assert_eq!(c.interior_markings(), vec![1]);
        prop_assert_eq!(c.contract_edges().unwrap(), c);
    }
}

#[test]
fn dimension_identity_up_to_twelve() {
    for m in (2..=12).step_by(2) {
        let total: BigUint = even_row_partitions(m).unwrap().iter().map(Partition::hook_dimension).sum();
        assert_eq!(total, double_factorial_odd(m / 2), "m = {m}");
    }
}

#[test]
fn eigenvectors_at_integer_points() {
    for n in 1..=4 {
        let dec = SpectralDecomposition::auto(n).unwrap();
        let total: usize = dec.blocks().iter().map(|b| b.basis.len()).sum();
        assert_eq!(BigUint::from(total), double_factorial_odd(n));
        for x in -8..=8 {
            let m = build_loop_matrix(n, &int(x)).unwrap();
            for block in dec.blocks() {
                let ev = block.partition.content_product(&int(x)).unwrap();
                for v in &block.basis {
                    let mv = m.apply(v).unwrap();
                    let scaled: Vec<Rational> = v.coords.iter().map(|c| c * &ev).collect();
                    assert_eq!(mv.coords, scaled, "n = {n}, x = {x}, block {}", block.partition);
                }
            }
        }
    }
}

#[test]
fn kontsevich_summation_orders_agree() {
    let f = kontsevich_sequence(8, SummationOrder::Forward).unwrap();
    let r = kontsevich_sequence(8, SummationOrder::Reverse).unwrap();
    assert_eq!(f, r);
    for w in f[1..].windows(2) {
        assert!(w[1] > w[0]);
    }
}

#[test]
fn duality_and_diagonal_symmetry() {
    for name in CohRing::bundled_names() {
        let ring = CohRing::bundled(name).unwrap();
        let duals = ring.dual_basis();
        for i in 0..ring.dim() {
            for (j, d) in duals.iter().enumerate() {
                let expected = if i == j { Rational::one() } else { Rational::zero() };
                assert_eq!(ring.pair(&ClassExpr::basis(ring.dim(), i), d).unwrap(), expected);
            }
        }
        let node = InsertionList::new(0, nodal_core::cohomology::CurveClass::zero(ring.curve_generators().len()), vec![], 1);
        let children = split_node(&node, &ring).unwrap();
        assert_eq!(children.len(), ring.dim());
        for (_, child) in &children {
            for (_, mono) in child.monomials() {
                let deg: u32 = mono.iter().map(|&(i, _)| ring.degree(i)).sum();
                assert_eq!(deg, ring.top_degree());
            }
        }
        // the diagonal is (−1)^{deg·deg}-symmetric under swapping factors
        let diag = kunneth_diagonal(&ring);
        for t in &diag {
            for (k, c) in t.dual.terms() {
                let back = diag
                    .iter()
                    .find(|s| s.class == k)
                    .and_then(|s| s.dual.terms().find(|(i, _)| *i == t.class).map(|(_, v)| v.clone()))
                    .unwrap_or_default();
                let sign = if ring.degree(t.class) % 2 == 1 && ring.degree(k) % 2 == 1 { -1 } else { 1 };
                assert_eq!(back, c * int(sign), "ring {name}");
            }
        }
    }
    let f1 = CohRing::bundled("f1").unwrap();
    let beta = f1.curve_class("D0+3F").unwrap();
    assert_eq!(f1.intersect(&f1.class("D0").unwrap(), &beta).unwrap(), int(2));
    assert_eq!(f1.intersect(&f1.class("F").unwrap(), &beta).unwrap(), int(1));
    assert_eq!(f1.intersect(&f1.class("D0").unwrap(), &f1.curve_class("D0").unwrap()).unwrap(), int(-1));
}
