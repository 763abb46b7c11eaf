use cloth_grasp::stats::enumerate_grasps;
use cloth_grasp::{
    classify_transition, explain_transition, parse_grasp, ClassifyError, GraspState, PrimitiveType, TransitionFlags,
};
use proptest::prelude::*;
use proptest::sample::select;

fn g(s: &str) -> GraspState {
    parse_grasp(s).unwrap()
}

fn classify(pre: &str, post: &str) -> PrimitiveType {
    classify_transition(&g(pre), &g(post), TransitionFlags::default()).unwrap().primitive
}

#[test]
fn literature_transitions() {
    assert_eq!(classify("Pie", "2PP+Pie"), PrimitiveType::G);
    assert_eq!(classify("PP", "PP+Pie"), PrimitiveType::Ex);
    assert_eq!(classify("PP", "2PP"), PrimitiveType::RG);
    assert_eq!(classify("2PP+Pie", "Pie"), PrimitiveType::R);
    assert_eq!(classify("2PP+Pe", "Pe"), PrimitiveType::R);
    assert_eq!(classify("sh 2PPie", "PP+Pie"), PrimitiveType::RG);
    assert_eq!(classify("PP", "PP+L"), PrimitiveType::RG);
}

#[test]
fn explanations() {
    let e = explain_transition(&g("PP+Pie"), &g("PP"), TransitionFlags::default()).unwrap();
    assert!(e.contains("removed extrinsic Pie"), "{e}");
    assert!(e.contains("rule 5"), "{e}");
    let e = explain_transition(&g("Pie"), &g("PPie"), TransitionFlags::default()).unwrap();
    assert!(e.contains("rule 3"), "{e}");
    let flags = TransitionFlags { cloth_changed: true, ..Default::default() };
    let e = explain_transition(&g("2PP"), &g("2PP"), flags).unwrap();
    assert!(e.contains("rule 2"), "{e}");
}

#[test]
fn sliding_requires_same_grasp() {
    let flags = TransitionFlags { sliding: true, ..Default::default() };
    assert!(matches!(classify_transition(&g("PP"), &g("2PP"), flags), Err(ClassifyError::InvalidTransition(_))));
    assert!(explain_transition(&g("PP"), &g("2PP"), flags).is_err());
}

#[test]
fn grasp_point_change_is_a_regrasp() {
    let flags = TransitionFlags { grasp_point_changed: true, ..Default::default() };
    let r = classify_transition(&g("2PP+Pie"), &g("2PP+Pie"), flags).unwrap();
    assert_eq!(r.primitive, PrimitiveType::RG);
    assert!(r.regrasp);
}

fn pool() -> Vec<GraspState> {
    enumerate_grasps(2, 2, 2).unwrap()
}

proptest! {
    #[test]
    fn same_state_is_s_or_gm(s in select(pool()), sliding: bool, cloth: bool) {
        let flags = TransitionFlags { sliding, cloth_changed: cloth, grasp_point_changed: false };
        let r = classify_transition(&s, &s, flags).unwrap();
        prop_assert_eq!(r.primitive, if sliding { PrimitiveType::S } else { PrimitiveType::GM });
        prop_assert!(!r.regrasp);
        prop_assert_eq!(r.warnings.is_empty(), sliding || cloth);
    }

    #[test]
    fn different_states_are_regrasps(a in select(pool()), b in select(pool()), cloth: bool, point: bool) {
        prop_assume!(a != b);
        let flags = TransitionFlags { sliding: false, cloth_changed: cloth, grasp_point_changed: point };
        let r = classify_transition(&a, &b, flags).unwrap();
        prop_assert!(r.regrasp);
        prop_assert_eq!(r.primitive, r.rule_fired.primitive());
    }

    #[test]
    fn grasp_and_release_are_dual(a in select(vec![g("Pe"), g("Le"), g("Pie")]), b in select(pool())) {
        prop_assume!(!b.is_single_extrinsic());
        prop_assert_eq!(classify_transition(&a, &b, TransitionFlags::default()).unwrap().primitive, PrimitiveType::G);
        prop_assert_eq!(classify_transition(&b, &a, TransitionFlags::default()).unwrap().primitive, PrimitiveType::R);
    }

    #[test]
    fn classification_is_deterministic(a in select(pool()), b in select(pool())) {
        let x = classify_transition(&a, &b, TransitionFlags::default()).unwrap();
        let y = classify_transition(&a, &b, TransitionFlags::default()).unwrap();
        prop_assert_eq!(x, y);
    }
}
