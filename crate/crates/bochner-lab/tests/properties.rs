//! Property tests for the structural invariants: jet arithmetic against
//! field algebra, symmetry preservation, cascade laws, and the scene
//! document round trip.

use proptest::prelude::*;

use bochner_lab::field::{Monomial, ScalarFieldSpec, TrigMode};
use bochner_lab::jet::Jet3;
use bochner_lab::metric::MetricKind;
use bochner_lab::slicing::{Normalization, SceneGeometry, SlicingScene};

fn arb_poly(dim: usize) -> impl Strategy<Value = ScalarFieldSpec> {
    proptest::collection::vec(
        (-1.0f64..1.0, proptest::collection::vec(0u32..3, dim)),
        1..5,
    )
    .prop_filter_map("degree <= 4", move |monomials| {
        let monomials: Vec<Monomial> = monomials
            .into_iter()
            .filter(|(_, exps)| exps.iter().sum::<u32>() <= 4)
            .map(|(coeff, exponents)| Monomial { coeff, exponents })
            .collect();
        if monomials.is_empty() {
            None
        } else {
            Some(ScalarFieldSpec::Polynomial {
                center: vec![],
                monomials,
            })
        }
    })
}

fn arb_trig(dim: usize) -> impl Strategy<Value = ScalarFieldSpec> {
    proptest::collection::vec(
        (
            proptest::collection::vec(-2i32..=2, dim),
            -1.0f64..1.0,
            -1.0f64..1.0,
        ),
        1..4,
    )
    .prop_map(|modes| ScalarFieldSpec::TrigPolynomial {
        modes: modes
            .into_iter()
            .map(|(freq, cos_amp, sin_amp)| TrigMode {
                freq,
                cos_amp,
                sin_amp,
            })
            .collect(),
    })
}

fn arb_field(dim: usize) -> impl Strategy<Value = ScalarFieldSpec> {
    prop_oneof![arb_poly(dim), arb_trig(dim)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// jet(f * g) agrees entrywise with jet(f) * jet(g).
    #[test]
    fn product_rule_matches_field_product(
        f in arb_field(3),
        g in arb_field(3),
        p in proptest::collection::vec(-2.0f64..2.0, 3),
    ) {
        let product = ScalarFieldSpec::Product(vec![f.clone(), g.clone()]);
        let direct = product.jet_at(&p).unwrap();
        let composed = f.jet_at(&p).unwrap().mul(&g.jet_at(&p).unwrap());
        prop_assert!(direct.rel_distance(&composed) <= 1e-12);
    }

    /// Hessian and cubic symmetry survive arithmetic and composition exactly.
    #[test]
    fn symmetry_preserved_by_operations(
        f in arb_field(3),
        g in arb_field(3),
        p in proptest::collection::vec(-2.0f64..2.0, 3),
    ) {
        let a = f.jet_at(&p).unwrap();
        let b = g.jet_at(&p).unwrap();
        prop_assert!(a.is_symmetric());
        prop_assert!(a.mul(&b).is_symmetric());
        prop_assert!(a.add(&b).is_symmetric());
        prop_assert!(a.exp().is_symmetric());
        let shifted = a.add_scalar(4.0 + a.value.abs());
        prop_assert!(shifted.sqrt().unwrap().is_symmetric());
        prop_assert!(shifted.ln().unwrap().is_symmetric());
        prop_assert!(shifted.recip().unwrap().is_symmetric());
        prop_assert!(a.partial(0).is_symmetric());
    }

    /// Finite jets stay finite through arithmetic away from singular values.
    #[test]
    fn finiteness_preserved(
        f in arb_field(4),
        p in proptest::collection::vec(-2.0f64..2.0, 4),
    ) {
        let a = f.jet_at(&p).unwrap();
        prop_assert!(a.is_finite());
        let shifted = a.add_scalar(2.0 + a.value.abs());
        prop_assert!(shifted.recip().unwrap().is_finite());
        prop_assert!(shifted.sqrt().unwrap().is_finite());
    }

    /// Scene documents round trip bit-exactly through JSON.
    #[test]
    fn scene_json_roundtrip(
        seed in 0u64..5000,
        n in 3usize..=5,
        kind_ix in 0usize..3,
        top in proptest::bool::ANY,
    ) {
        let s = 1 + (seed as usize % (n - 1));
        let norm = if top { Normalization::UnitTop } else { Normalization::UnitBottom };
        let scene = SlicingScene::random(
            seed, n, s, MetricKind::ALL_CURVED[kind_ix], norm,
        ).unwrap();
        let text = scene.to_json().unwrap();
        let back = SlicingScene::from_json(&text).unwrap();
        prop_assert_eq!(&scene, &back);
        prop_assert_eq!(text, back.to_json().unwrap());
    }

    /// Cascade law |Z_m| = |Z_{m+1}| |grad_Sigma u_m| under both
    /// normalizations, and the unit end pinned by each.
    #[test]
    fn cascade_law_and_normalization(
        seed in 0u64..2000,
        kind_ix in 0usize..3,
        top in proptest::bool::ANY,
    ) {
        let norm = if top { Normalization::UnitTop } else { Normalization::UnitBottom };
        let scene = SlicingScene::random(seed, 4, 3, MetricKind::ALL_CURVED[kind_ix], norm).unwrap();
        let geom = SceneGeometry::new(&scene).unwrap();
        for m in 0..geom.s {
            let lhs = geom.znorm[m].value;
            let rhs = geom.znorm[m + 1].value * geom.lambda[m].value;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
        match norm {
            Normalization::UnitTop => prop_assert_eq!(geom.znorm[3].value, 1.0),
            Normalization::UnitBottom => prop_assert_eq!(geom.znorm[0].value, 1.0),
        }
    }
}

#[test]
fn constant_jet_algebra_exact() {
    // spot check that constants behave as the identity elements
    let one = Jet3::constant(3, 1.0);
    let x = Jet3::coordinate(3, 1, 0.7);
    assert_eq!(x.mul(&one), x);
    assert_eq!(x.add(&Jet3::zero(3)), x);
}
