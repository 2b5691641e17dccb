use std::collections::BTreeMap;

use super::*;
use crate::logic::parse_state_formula;
use crate::models::CtmcModel;

/// Leaves `start` at rate 10 for `h` with probability `p`, else for `t`;
/// both targets are absorbing.
fn coin(p: f64) -> CtmcModel {
    CtmcModel::new(
        vec!["start".into(), "h".into(), "t".into()],
        vec![vec![-10.0, 10.0 * p, 10.0 * (1.0 - p)], vec![0.0; 3], vec![0.0; 3]],
        "start",
        &BTreeMap::new(),
    )
    .unwrap()
}

fn cfg(alpha: f64, seed: u64) -> SmcConfig {
    SmcConfig::new(alpha, 10.0, seed)
}

fn check(model: &dyn PusModel, src: &str, c: &SmcConfig) -> Verdict {
    verify(model, &parse_state_formula(src).unwrap(), &BTreeMap::new(), c).unwrap()
}

#[test]
fn config_validation() {
    let c = SmcConfig { alpha: 0.0, ..cfg(0.05, 1) };
    let err = c.validate().unwrap_err().to_string();
    assert!(err.contains("significance must be in (0,1)"), "{err}");
    assert!(SmcConfig { batch: 0, ..cfg(0.05, 1) }.validate().is_err());
    assert!(SmcConfig { max_samples: 5, ..cfg(0.05, 1) }.validate().is_err());
    assert!(SmcConfig { horizon: -1.0, ..cfg(0.05, 1) }.validate().is_err());
}

#[test]
fn simple_both_directions() {
    let m = coin(0.3);
    let v = check(&m, "P{x}(F[0,5] h@x) < 0.5", &cfg(0.01, 3));
    assert_eq!(v.assertion, Assertion::True);
    assert!(v.achieved_significance <= 0.01);
    assert_eq!(v.algorithm, crate::logic::Shape::Simple);
    let v = check(&m, "P{x}(F[0,5] h@x) > 0.5", &cfg(0.01, 3));
    assert_eq!(v.assertion, Assertion::False);
    let v = check(&m, "0.5 > P{x}(F[0,5] h@x)", &cfg(0.01, 3));
    assert_eq!(v.assertion, Assertion::True);
    assert_eq!(v.samples_used[0].tuples % 10, 0);
}

#[test]
fn seeds_determine_the_verdict() {
    let m = coin(0.45);
    let mut a = check(&m, "P{x}(F[0,5] h@x) < 0.5", &cfg(0.05, 9));
    let mut b = check(&m, "P{x}(F[0,5] h@x) < 0.5", &cfg(0.05, 9));
    a.wall_time = 0.0;
    b.wall_time = 0.0;
    assert_eq!(a, b);
}

#[test]
fn boundary_probability_hits_the_cap() {
    // h is reached with probability exactly 1/2 and ties are never asserted
    // near the boundary at this cap
    let m = coin(0.5);
    let c = SmcConfig { max_samples: 200, ..cfg(1e-6, 2) };
    let v = check(&m, "P{x}(F[0,5] h@x) < 0.5", &c);
    assert_eq!(v.assertion, Assertion::Undecided);
    assert_eq!(v.samples_used[0].tuples, 200);
}

#[test]
fn truncation_policies() {
    let m = coin(0.3);
    // the window [0, 20] reaches past the horizon of 10 when h is not hit
    let src = "P{x}(F[0,20] h@x) < 0.5";
    let v = check(&m, src, &cfg(0.01, 4));
    assert!(v.truncated_evaluations > 0);
    assert_eq!(v.assertion, Assertion::True);
    let c = SmcConfig { truncation: TruncationPolicy::CountError, ..cfg(0.01, 4) };
    let err = verify(&m, &parse_state_formula(src).unwrap(), &BTreeMap::new(), &c).unwrap_err();
    assert!(matches!(err, SmcError::Truncated { .. }));
}

#[test]
fn iteration_log_on_a_certain_event() {
    let m = coin(0.3);
    let c = SmcConfig { record_iterations: true, ..cfg(1e-4, 5) };
    let v = check(&m, "P{x}(F[0,5] (h@x | t@x)) > 0.5", &c);
    assert_eq!(v.assertion, Assertion::True);
    assert!(!v.iterations.is_empty());
    assert!(v.iterations.windows(2).all(|w| w[1].alpha <= w[0].alpha));
    assert_eq!(v.iterations.last().unwrap().alpha, v.achieved_significance);
}

#[test]
fn joint_difference() {
    let m = coin(0.3);
    let v = check(&m, "P{x}(F[0,5] t@x) - P{y}(F[0,5] h@y) > 0.2", &cfg(0.01, 6));
    assert_eq!(v.assertion, Assertion::True);
    assert_eq!(v.algorithm, crate::logic::Shape::Joint);
    assert_eq!(v.samples_used.len(), 2);
    let v = check(&m, "P{x}(F[0,5] t@x) - P{y}(F[0,5] h@y) > 0.6", &cfg(0.01, 6));
    assert_eq!(v.assertion, Assertion::False);
}

#[test]
fn joint_matches_simple_on_a_half_line() {
    let m = coin(0.35);
    let mut regions = BTreeMap::new();
    regions.insert("low".to_string(), crate::stats::Region::LowerHalfLine(0.5));
    let simple = parse_state_formula("P{x}(F[0,5] h@x) < 0.5").unwrap();
    let joint = parse_state_formula("(P{x}(F[0,5] h@x)) in low").unwrap();
    for seed in 0..5 {
        let a = verify(&m, &simple, &regions, &cfg(0.05, seed)).unwrap();
        let b = verify_joint(&m, &joint, &regions, &cfg(0.05, seed)).unwrap();
        assert_eq!(a.assertion, b.assertion);
        assert_eq!(a.samples_used[0].tuples, b.samples_used[0].tuples);
    }
}

#[test]
fn nested_state_labels_and_split() {
    // from s0 the chain moves to s1 and on to the absorbing s2
    let m = CtmcModel::new(
        vec!["s0".into(), "s1".into(), "s2".into()],
        vec![vec![-5.0, 5.0, 0.0], vec![0.0, -5.0, 5.0], vec![0.0; 3]],
        "s0",
        &BTreeMap::new(),
    )
    .unwrap();
    // rho holds in every state: s2 is reached within one time unit with
    // probability about 0.96 from s0 and 0.99 from s1
    let src = "P{x}(F[0,5] (P{y}(F[0,1] s2@y) > 0.5)@x) > 0.5";
    let v = check(&m, src, &cfg(0.04, 8));
    assert_eq!(v.algorithm, crate::logic::Shape::NestedState);
    assert_eq!(v.assertion, Assertion::True);
    assert!(v.achieved_significance <= 0.04);
    assert_eq!(v.samples_used.len(), 4);
}

#[test]
fn nested_state_needs_finite_states() {
    let q = crate::models::QueueModel::new(
        vec![2],
        vec![1],
        vec![crate::models::ArrivalProcess::Exponential { rate: 1.0 }],
        vec![1.0],
        vec![1.0],
    )
    .unwrap();
    let f = parse_state_formula("P{x}(F[0,5] (P{y}(F[0,1] q1@y) > 0.5)@x) > 0.5").unwrap();
    let err = verify(&q, &f, &BTreeMap::new(), &cfg(0.05, 1)).unwrap_err();
    assert!(matches!(err, SmcError::Model(crate::models::ModelError::InfiniteStateSpace(_))));
}

#[test]
fn nested_path_instantiation_independent() {
    // inner probability is 0.2 whatever the outer path is
    let m = coin(0.2);
    let src = "P{x}(P{y}(F[0,5] h@y & F[0,5] (h@x | t@x)) < 0.5) > 0.9";
    let c = SmcConfig { record_iterations: true, ..cfg(0.05, 10) };
    let v = check(&m, src, &c);
    assert_eq!(v.algorithm, crate::logic::Shape::NestedPath);
    assert_eq!(v.assertion, Assertion::True);
    assert!(v.achieved_significance <= 0.05);
    let v = check(&m, "P{x}(P{y}(F[0,5] h@y & F[0,5] (h@x | t@x)) < 0.5) < 0.9", &cfg(0.05, 10));
    assert_eq!(v.assertion, Assertion::False);
}
