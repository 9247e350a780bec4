use abelian_core::abelian::{size_gen_bound, SizeGenBound};
use abelian_core::algebra::{classify, is_associative, CanonicalForm, Classification};
use abelian_core::harness::{
    decode_checkpoint, encode_checkpoint, stream_rng, Checkpoint, ModelHyper, ModelKind, SetModel, INIT_STREAM,
};
use abelian_core::{AbelianOp, CouplingFlow, MonotonicNet, Vector};
use proptest::prelude::*;

fn vectors(dim: usize, max: usize) -> impl Strategy<Value = Vec<Vector>> {
    proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, dim), 1..max)
        .prop_map(|rows| rows.into_iter().map(|r| Vector::new(r).unwrap()).collect())
}

fn close(a: &Vector, b: &Vector, tol: f64) -> bool {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_fold_ignores_order(seed in 0u64..1000, set in vectors(4, 10)) {
        let flow = CouplingFlow::random(4, 3, 8, 0.5, &mut stream_rng(seed, INIT_STREAM)).unwrap();
        let op = AbelianOp::group(flow);
        let mut rev = set.clone();
        rev.reverse();
        let a = op.fold_multiset(&set).unwrap();
        let b = op.fold_multiset(&rev).unwrap();
        prop_assert!(close(&a, &b, 1e-8), "{a:?} vs {b:?}");
    }

    #[test]
    fn semigroup_fold_ignores_order(seed in 0u64..1000, set in vectors(1, 8)) {
        let net = MonotonicNet::new(3, 3, &mut stream_rng(seed, INIT_STREAM));
        let op = AbelianOp::semigroup(net);
        let mut rev = set.clone();
        rev.reverse();
        let a = op.fold_multiset(&set).unwrap();
        let b = op.fold_multiset(&rev).unwrap();
        prop_assert!(close(&a, &b, 1e-6), "{a:?} vs {b:?}");
    }

    #[test]
    fn identity_is_neutral(seed in 0u64..1000, x in proptest::collection::vec(-2.0f64..2.0, 4)) {
        let flow = CouplingFlow::random(4, 2, 8, 0.5, &mut stream_rng(seed, INIT_STREAM)).unwrap();
        let op = AbelianOp::group(flow);
        let x = Vector::new(x).unwrap();
        let e = op.identity_element().unwrap();
        prop_assert!(close(&op.binop(&x, &e).unwrap(), &x, 1e-9));
        let inv = op.inverse_element(&x).unwrap();
        prop_assert!(close(&op.binop(&x, &inv).unwrap(), &e, 1e-9));
    }

    #[test]
    fn coupling_round_trip(seed in 0u64..1000, x in proptest::collection::vec(-3.0f64..3.0, 6)) {
        let flow = CouplingFlow::random(6, 4, 8, 0.5, &mut stream_rng(seed, INIT_STREAM)).unwrap();
        let x = Vector::new(x).unwrap();
        let back = flow.inverse(&flow.forward(&x).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&x).unwrap() < 1e-10);
    }

    #[test]
    fn checkpoint_preserves_predictions(seed in 0u64..1000, kind in 0usize..3, set in vectors(1, 6)) {
        let kind = [ModelKind::Agn, ModelKind::Asn, ModelKind::DeepSets][kind];
        let model = SetModel::build(kind, ModelHyper::default_for(kind), &mut stream_rng(seed, INIT_STREAM)).unwrap();
        let bytes = encode_checkpoint(&Checkpoint::from(model.clone()));
        let back = decode_checkpoint(&bytes).unwrap().into_set_model(kind).unwrap();
        prop_assert_eq!(model.predict(&set).unwrap(), back.predict(&set).unwrap());
    }

    #[test]
    fn bilinear_forms_classify_back(beta in -3.0f64..3.0, gamma in 0.1f64..3.0, neg in any::<bool>()) {
        let gamma = if neg { -gamma } else { gamma };
        let form = CanonicalForm::bilinear(beta, gamma).unwrap();
        let p = form.to_poly();
        prop_assert!(is_associative(&p).unwrap().associative);
        match classify(&p).unwrap() {
            Classification::Canonical(f) => {
                prop_assert!((f.beta - beta).abs() < 1e-12 && (f.gamma - gamma).abs() < 1e-12);
            }
            other => prop_assert!(false, "{other}"),
        }
    }

    #[test]
    fn bound_grows_with_size(eps in 1e-6f64..1.0, k1 in 0.6f64..2.0, k2 in 0.6f64..2.0, b in 4u64..100) {
        let at = |b| size_gen_bound(&SizeGenBound { epsilon: eps, a: 4, b, k1, k2 }).unwrap();
        prop_assert!(at(b) <= at(b * 4));
        prop_assert!(at(b) >= eps);
    }
}
