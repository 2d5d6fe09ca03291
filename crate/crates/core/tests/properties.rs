use hubbard_ness::amplitudes::AmplitudeTable;
use hubbard_ness::exact::{rat, GaussianRational, PolyEU, Scalar};
use hubbard_ness::graph::{build_graph, Coloring, Node};
use hubbard_ness::ness::{build_s, Construction, ModelParams};
use hubbard_ness::par::Exec;
use hubbard_ness::pauli::{PauliString, SiteLabel, SparseOp};
use hubbard_ness::proof::ProofContext;
use proptest::prelude::*;

fn gauss() -> impl Strategy<Value = GaussianRational> {
    (-6i64..=6, 1i64..=5, -6i64..=6, 1i64..=5)
        .prop_map(|(a, b, c, d)| GaussianRational::new(rat(a, b), rat(c, d)))
}

fn poly() -> impl Strategy<Value = PolyEU> {
    prop::collection::vec((gauss(), 0u32..3, 0u32..3), 0..4).prop_map(|terms| {
        terms.into_iter().fold(PolyEU::zero(), |acc, (c, de, du)| acc + PolyEU::monomial(c, de, du))
    })
}

fn label() -> impl Strategy<Value = SiteLabel> {
    (0u64..16).prop_map(SiteLabel::from_code)
}

fn operator(n: usize) -> impl Strategy<Value = SparseOp<GaussianRational>> {
    prop::collection::vec((prop::collection::vec(label(), n), -3i64..=3, -3i64..=3), 0..5).prop_map(
        move |terms| {
            SparseOp::from_terms(
                n,
                terms
                    .into_iter()
                    .map(|(labels, re, im)| (PauliString::from_labels(&labels), GaussianRational::from_ints(re, im))),
            )
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomial_ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
        prop_assert_eq!(a.mul_ref(&b), b.mul_ref(&a));
        prop_assert_eq!(a.mul_ref(&b).mul_ref(&c), a.mul_ref(&b.mul_ref(&c)));
        prop_assert_eq!(a.mul_ref(&(b.clone() + c.clone())), a.mul_ref(&b) + a.mul_ref(&c));
        prop_assert_eq!(a.clone() - a.clone(), PolyEU::zero());
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(a in poly(), b in poly(), e in gauss(), u in gauss()) {
        let (ea, eb) = (a.evaluate(&e, &u), b.evaluate(&e, &u));
        prop_assert_eq!(a.mul_ref(&b).evaluate(&e, &u), &ea * &eb);
        prop_assert_eq!((a + b).evaluate(&e, &u), &ea + &eb);
    }

    #[test]
    fn conjugation_is_multiplicative(a in poly(), b in poly()) {
        prop_assert_eq!(a.mul_ref(&b).conjugate(), a.conjugate().mul_ref(&b.conjugate()));
        prop_assert_eq!(a.conjugate().conjugate(), a);
    }

    #[test]
    fn sparse_product_matches_dense(a in operator(3), b in operator(3)) {
        let sparse = a.mul(&b).unwrap().to_dense().unwrap();
        let dense = a.to_dense().unwrap().matmul(&b.to_dense().unwrap());
        prop_assert_eq!(sparse, dense);
    }

    #[test]
    fn adjoint_reverses_products(a in operator(2), b in operator(2)) {
        prop_assert_eq!(a.mul(&b).unwrap().adjoint(), b.adjoint().mul(&a.adjoint()).unwrap());
        prop_assert_eq!(a.adjoint().to_dense().unwrap(), a.to_dense().unwrap().adjoint());
    }

    #[test]
    fn projections_reconstruct_the_operator(a in operator(3)) {
        let mut first = SparseOp::zero(3);
        let mut last = SparseOp::zero(3);
        for l in SiteLabel::all() {
            let single = SparseOp::<GaussianRational>::site_op(1, 0, l);
            first = first.add(&single.kron(&a.hs_project(0, l).unwrap())).unwrap();
            last = last.add(&a.hs_project(2, l).unwrap().kron(&single)).unwrap();
        }
        prop_assert_eq!(&first, &a);
        prop_assert_eq!(&last, &a);
    }

    #[test]
    fn gram_trace_is_nonnegative(a in operator(3)) {
        let t = a.mul(&a.adjoint()).unwrap().trace();
        prop_assert!(t.is_real());
        prop_assert!(t.re >= rat(0, 1));
        prop_assert_eq!(t.re == rat(0, 1), a.is_zero());
    }

    #[test]
    fn walk_counts_match_enumeration(n in 1usize..6, level in 0u32..3) {
        let graph = build_graph(6, Coloring::alternating()).unwrap();
        let targets: Vec<Node> = graph.nodes().iter().copied().filter(|v| v.level() == level).collect();
        for to in targets {
            let walks = graph.enumerate_walks(n, Node::Origin, to).unwrap();
            prop_assert_eq!(walks.len() as u128, graph.count_walks(n, Node::Origin, to).unwrap());
        }
    }

    #[test]
    fn grid_evaluation_matches_symbolic(n in 2usize..4, e in gauss(), u in gauss()) {
        let c = Construction::default();
        let symbolic = build_s(&ModelParams::symbolic(n), &c).unwrap();
        let direct = build_s(&ModelParams::new(n, e.clone(), u.clone()), &c).unwrap();
        let evaluated = SparseOp::from_terms(n, symbolic.iter().map(|(s, p)| (*s, p.evaluate(&e, &u))));
        prop_assert_eq!(evaluated, direct);
    }
}

#[test]
fn certificates_are_deterministic() {
    let ctx = ProofContext::new(4, Coloring::alternating(), AmplitudeTable::verbatim()).unwrap();
    let a = ctx.run(Exec::Sequential);
    let b = ctx.run(Exec::Parallel);
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
