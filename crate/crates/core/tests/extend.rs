mod common;

use biclosed::calculus::{initial_presheaf, terminal_presheaf, yoneda_embed, Presheaf};
use biclosed::enrichment::QuantaleKind;
use biclosed::extend::{
    compare_with_oracle, ext_compose, ext_hk, ext_identity, ext_iso_check, ext_q, ext_residual, extend_structure,
    ExtensionSetup, OracleMode, Which,
};
use biclosed::fincat::{find_natural_iso, Backend, Category, DEFAULT_SEARCH_CAP};
use biclosed::localise::DEFAULT_MAX_ITER;
use biclosed::probicat::{conv_residual, Probicategory, Scope, Side};
use biclosed::Error;
use common::*;
use proptest::prelude::*;

fn chain3() -> Backend {
    Backend::Quantale(quantale(QuantaleKind::Chain(3)))
}

fn iso(cat: &Category, f: &Presheaf, g: &Presheaf) -> bool {
    find_natural_iso(cat, f, g, DEFAULT_SEARCH_CAP).unwrap().is_some()
}

/// `N X = y_0` for both objects of the discrete hom of delooped Z/2.
fn constant_family(p: &Probicategory) -> Presheaf {
    let cat = p.hom(0, 0);
    let dom = cat.op().product(cat).unwrap();
    match p.backend() {
        Backend::FinSet => {
            let sizes = [1, 0, 1, 0];
            let actions = sizes.iter().map(|&s| (0..s).collect()).collect();
            set(&dom, &sizes, actions)
        }
        Backend::Quantale(_) => qv(&[1, 0, 1, 0]),
    }
}

fn localised(p: &Probicategory) -> ExtensionSetup<'_> {
    ExtensionSetup::localised(p, arrow_sigma(p), DEFAULT_MAX_ITER, Scope::default()).unwrap()
}

#[test]
fn q_along_yoneda_is_the_structure_functor() {
    for p in [cyclic(boolean(), 2), cyclic(chain3(), 2), cyclic(Backend::FinSet, 2), min_arrow(&Backend::FinSet)] {
        let s = ExtensionSetup::yoneda(&p, Scope::default()).unwrap();
        let cat = p.hom(0, 0);
        let n = cat.object_count();
        for a in 0..n {
            for a2 in 0..n {
                // P(a, a2, −) read straight off the table
                let slice = biclosed::calculus::slice_first(p.k(0, 0, 0), cat, p.p(0, 0, 0), a * n + a2);
                let q = ext_q(&s, 0, 0, 0, a, a2).unwrap();
                assert!(iso(cat, &q, &slice));
                if let Presheaf::Quantale(_) = q {
                    assert_eq!(q, slice);
                }
            }
        }
    }
}

#[test]
fn z2_boolean_values() {
    let p = cyclic(boolean(), 2);
    let s = ExtensionSetup::yoneda(&p, Scope::default()).unwrap();
    // ⋁_X P(1, 1, X) ⊗ y_X = y_0
    assert_eq!(ext_q(&s, 0, 0, 0, 1, 1).unwrap(), qv(&[1, 0]));
    assert_eq!(ext_identity(&s, 0).unwrap(), qv(&[1, 0]));
    assert_eq!(ext_identity(&s, 0).unwrap(), p.j(0).clone());
    assert!(matches!(ext_q(&s, 0, 0, 0, 2, 0), Err(Error::IndexMismatch(_))));
    assert!(matches!(ext_identity(&s, 1), Err(Error::IndexMismatch(_))));
}

#[test]
fn bottom_structure_gives_initial_values() {
    let p = cyclic(boolean(), 2);
    let bottom = initial_presheaf(&p.p_domain(0, 0, 0).unwrap());
    let p = p.with_p(0, 0, 0, bottom).unwrap();
    let s = ExtensionSetup::yoneda(&p, Scope::default()).unwrap();
    let cat = p.hom(0, 0);
    let empty = initial_presheaf(cat);
    for a in 0..2 {
        for a2 in 0..2 {
            assert_eq!(ext_q(&s, 0, 0, 0, a, a2).unwrap(), empty);
        }
        // hom(Q, C) is top, so H and K are the top-weighted colimits of y
        assert_eq!(ext_hk(&s, Which::H, 0, 0, 0, a, &qv(&[0, 0])).unwrap(), qv(&[1, 1]));
        assert_eq!(ext_hk(&s, Which::K, 0, 0, 0, a, &qv(&[0, 0])).unwrap(), qv(&[1, 1]));
    }
    for c in s.objects(0, 0) {
        assert_eq!(ext_compose(&s, 0, 0, 0, c, &qv(&[1, 1])).unwrap(), empty);
    }
}

#[test]
fn composite_with_initial_is_initial() {
    let p = cyclic(Backend::FinSet, 2);
    let s = ExtensionSetup::yoneda(&p, Scope::default()).unwrap();
    let cat = p.hom(0, 0);
    let empty = initial_presheaf(cat);
    for c in s.objects(0, 0) {
        assert_eq!(ext_compose(&s, 0, 0, 0, c, &empty).unwrap(), empty);
        assert_eq!(ext_compose(&s, 0, 0, 0, &empty, c).unwrap(), empty);
        // residuals out of the initial object are terminal
        let top = ext_residual(&s, Side::Right, 0, 0, 0, c, &empty).unwrap();
        assert!(iso(cat, &top, &terminal_presheaf(cat)));
        let top = ext_residual(&s, Side::Left, 0, 0, 0, c, &empty).unwrap();
        assert!(iso(cat, &top, &terminal_presheaf(cat)));
    }
}

#[test]
fn h_on_representables_is_the_convolution_residual() {
    for p in [cyclic(boolean(), 2), cyclic(Backend::FinSet, 2), min_arrow(&Backend::FinSet)] {
        let s = ExtensionSetup::yoneda(&p, Scope::default()).unwrap();
        let cat = p.hom(0, 0);
        let reps = yoneda_embed(cat);
        for c in s.objects(0, 0) {
            for (a, ya) in reps.iter().enumerate() {
                let h = ext_hk(&s, Which::H, 0, 0, 0, a, c).unwrap();
                assert!(iso(cat, &h, &conv_residual(&p, Side::Right, 0, 0, 0, c, ya).unwrap()));
                let k = ext_hk(&s, Which::K, 0, 0, 0, a, c).unwrap();
                assert!(iso(cat, &k, &conv_residual(&p, Side::Left, 0, 0, 0, c, ya).unwrap()));
            }
        }
    }
}

#[test]
fn top_numerator_gives_top_h() {
    let p = cyclic(boolean(), 2);
    let s = ExtensionSetup::yoneda(&p, Scope::default()).unwrap();
    for a in 0..2 {
        assert_eq!(ext_hk(&s, Which::H, 0, 0, 0, a, &qv(&[1, 1])).unwrap(), qv(&[1, 1]));
    }
}

#[test]
fn unit_residual() {
    let p = cyclic(Backend::FinSet, 2);
    let s = ExtensionSetup::yoneda(&p, Scope::default()).unwrap();
    let cat = p.hom(0, 0);
    let i = ext_identity(&s, 0).unwrap();
    for c in s.objects(0, 0) {
        assert!(iso(cat, &ext_residual(&s, Side::Right, 0, 0, 0, c, &i).unwrap(), c));
        assert!(iso(cat, &ext_residual(&s, Side::Left, 0, 0, 0, c, &i).unwrap(), c));
    }
}

#[test]
fn yoneda_matches_convolution() {
    for p in [cyclic(boolean(), 2), cyclic(chain3(), 2), cyclic(Backend::FinSet, 2), min_arrow(&Backend::FinSet)] {
        let s = ExtensionSetup::yoneda(&p, Scope::default()).unwrap();
        let report = compare_with_oracle(&s, OracleMode::Yoneda).unwrap();
        assert!(report.passed(), "{}", report.to_value());
        let compose = report.check("compose").unwrap();
        let n = s.objects(0, 0).len();
        assert_eq!(compose.instances, n * n);
        for c in &report.checks {
            assert!(c.instances > 0, "{}", c.name);
        }
    }
    let p = cyclic(boolean(), 2);
    let s = ExtensionSetup::yoneda(&p, Scope::default()).unwrap();
    let report = compare_with_oracle(&s, OracleMode::Yoneda).unwrap();
    assert_eq!(report.check("compose").unwrap().instances, 16);
}

#[test]
fn wrong_oracle_is_rejected() {
    let p = cyclic(boolean(), 2);
    let s = ExtensionSetup::yoneda(&p, Scope::default()).unwrap();
    assert!(matches!(compare_with_oracle(&s, OracleMode::Localisation), Err(Error::Parameter(_))));
}

#[test]
fn hypotheses_hold_for_both_special_cases() {
    let p = cyclic(Backend::FinSet, 2);
    let s = ExtensionSetup::yoneda(&p, Scope::default()).unwrap();
    let report = ext_iso_check(&s).unwrap();
    assert!(report.passed(), "{}", report.to_value());
    // 2 × 2 one-cells, every scope object
    assert_eq!(report.checks[0].instances, 4 * s.objects(0, 0).len());

    let p = min_arrow(&Backend::FinSet);
    let s = localised(&p);
    assert_eq!(s.objects(0, 0).len(), 4);
    let report = ext_iso_check(&s).unwrap();
    assert!(report.passed(), "{}", report.to_value());
    assert_eq!(report.checks[1].instances, 16);
}

#[test]
fn extension_along_yoneda_is_a_biclosed_structure() {
    for p in [cyclic(boolean(), 2), cyclic(Backend::FinSet, 2), min_arrow(&Backend::FinSet)] {
        let s = ExtensionSetup::yoneda(&p, Scope::default()).unwrap();
        let ext = extend_structure(&s).unwrap();
        assert!(ext.report.passed(), "{}", ext.report.to_value());
        assert!(ext.structure.is_some());
        for name in ["density", "hypothesis_h", "hypothesis_k", "adjunction", "associativity", "extends"] {
            assert!(ext.report.check(name).unwrap().instances > 0, "{name}");
        }
    }
}

#[test]
fn extension_along_localised_yoneda_matches_localisation() {
    let p = min_arrow(&Backend::FinSet);
    let s = localised(&p);
    let ext = extend_structure(&s).unwrap();
    assert!(ext.report.passed(), "{}", ext.report.to_value());
    let report = compare_with_oracle(&s, OracleMode::Localisation).unwrap();
    assert!(report.passed(), "{}", report.to_value());
    assert_eq!(report.check("compose").unwrap().instances, 16);
}

#[test]
fn trivial_probicategory_extends_trivially() {
    let p = cyclic(Backend::FinSet, 1);
    let s = ExtensionSetup::yoneda(&p, Scope::with_max_elements(1)).unwrap();
    assert_eq!(s.objects(0, 0).len(), 2);
    let ext = extend_structure(&s).unwrap();
    assert!(ext.report.passed());
}

#[test]
fn non_dense_family() {
    for p in [cyclic(Backend::FinSet, 2), cyclic(boolean(), 2)] {
        let family = constant_family(&p);
        let err = ExtensionSetup::new(&p, vec![family.clone()], None, Scope::default(), true).err().unwrap();
        assert!(matches!(err, Error::NotDense(_)), "{err}");

        let s = ExtensionSetup::new(&p, vec![family], None, Scope::default(), false).unwrap();
        let failure = s.density(0, 0).first_failure().unwrap();
        // nothing maps from y_0 into y_1
        assert_eq!(failure.object, yoneda_embed(p.hom(0, 0))[1]);
        let ext = extend_structure(&s).unwrap();
        assert!(ext.structure.is_none());
        assert!(!ext.report.check("density").unwrap().passed());
    }
}

#[test]
fn non_dense_family_breaks_the_hypotheses() {
    let p = cyclic(Backend::FinSet, 2);
    let s = ExtensionSetup::new(&p, vec![constant_family(&p)], None, Scope::default(), false).unwrap();
    let report = ext_iso_check(&s).unwrap();
    let h = report.check("hypothesis_h").unwrap();
    assert!(!h.passed());
    // hom(Q, y_0) has one element, hom(N, H(−, y_0)) two
    let bad = &h.failures[0];
    assert_eq!(bad["object"], serde_json::to_value(&yoneda_embed(p.hom(0, 0))[0]).unwrap());
    assert!(!report.check("hypothesis_k").unwrap().passed());
}

#[test]
fn objects_outside_the_target_are_rejected() {
    let p = min_arrow(&Backend::FinSet);
    let s = localised(&p);
    let y1 = yoneda_embed(p.hom(0, 0)).swap_remove(1);
    let local = s.objects(0, 0)[0].clone();
    assert!(matches!(ext_compose(&s, 0, 0, 0, &y1, &local), Err(Error::NotInSubcategory(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn yoneda_extension_is_convolution_on_cyclic_groups(k in 1usize..4, backend in 0usize..3) {
        let backend = match backend {
            0 => boolean(),
            1 => chain3(),
            _ => Backend::FinSet,
        };
        let p = cyclic(backend, k);
        let scope = Scope::with_max_elements(1);
        let s = ExtensionSetup::yoneda(&p, scope).unwrap();
        prop_assert!(ext_iso_check(&s).unwrap().passed());
        prop_assert!(compare_with_oracle(&s, OracleMode::Yoneda).unwrap().passed());
    }
}
