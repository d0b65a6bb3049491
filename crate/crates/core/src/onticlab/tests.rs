use super::document::{extension_from_json, extension_to_json};
use super::*;
use crate::opmodel::{born_predict, build_price_experiment};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = BigRational;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn toy() -> OnticExtension<Q> {
    build_toy_model_extension()
}

// Price matched-basis behavior written out by hand: perfectly correlated in
// the same basis, uniform across bases.
fn price_by_hand() -> BehaviorTable<Q> {
    BehaviorTable::from_fn(Scenario::binary(), 0.0, |x, a, y, b| {
        if x == y {
            if a == b {
                q(1, 2)
            } else {
                Q::zero()
            }
        } else {
            q(1, 4)
        }
    })
    .unwrap()
}

// p(a, b, lambda | x, y) = 1/4 with lambda = x, a and b uniform.
fn lambda_copies_x() -> OnticExtension<Q> {
    OnticExtension::from_fn(Scenario::binary(), Alphabet::binary(), 0.0, |x, _, _, _, l| {
        if l == x {
            q(1, 4)
        } else {
            Q::zero()
        }
    })
    .unwrap()
}

fn lambda_copies_y() -> OnticExtension<Q> {
    OnticExtension::from_fn(Scenario::binary(), Alphabet::binary(), 0.0, |_, _, y, _, l| {
        if l == y {
            q(1, 4)
        } else {
            Q::zero()
        }
    })
    .unwrap()
}

#[test]
fn toy_marginalizes_to_price_behavior() {
    let m = toy().marginalize(0.0).unwrap();
    assert_eq!(m, price_by_hand());
    let born = born_predict(&build_price_experiment::<f64>(true)).unwrap();
    assert!(born.max_deviation(&m.to_f64()).unwrap() < 1e-15);
    for x in 0..2 {
        for a in 0..2 {
            assert_eq!(m.marginal_a(x, a, 0), q(1, 2));
        }
    }
}

#[test]
fn singleton_lambda_marginal_is_the_table() {
    let ext = OnticExtension::from_fn(Scenario::binary(), Alphabet::range(1), 0.0, |_, a, _, b, _| {
        q(1 + a as i64 + 2 * b as i64, 10)
    })
    .unwrap();
    let m = ext.marginalize(0.0).unwrap();
    assert_eq!(*m.get(1, 1, 0, 1), q(4, 10));
}

#[test]
fn toy_satisfies_every_condition_exactly() {
    let t = toy();
    assert!(check_no_retrocausality(&t, 0.0).holds);
    let med = check_lambda_mediation(&t, 0.0);
    assert!(med.strong.holds && med.weak.holds);
    let lc = check_local_causality(&t, 0.0);
    assert!(lc.holds);
    assert_eq!(lc.exact_violation.as_deref(), Some("0"));
    assert!(check_independences(&t, 0.0).all_hold());
}

#[test]
fn toy_is_swap_symmetric() {
    let t = toy();
    assert_eq!(t.swapped(), t);
    let f = find_ontological_time_reverse(&t, &t, 0.0).unwrap().unwrap();
    assert!(f.is_identity());
}

#[test]
fn permuted_toy_reverse_finds_the_permutation() {
    let t = toy();
    let labels = Alphabet::new(["p", "q", "r", "s"]).unwrap();
    let perm = [2, 0, 3, 1];
    let relabeled = t.relabel(labels, &perm).unwrap();
    let f = find_ontological_time_reverse(&t, &relabeled, 0.0).unwrap().unwrap();
    assert_eq!(f.map, perm);
    assert_eq!(f.pairs[0], ("00".to_string(), "r".to_string()));
}

#[test]
fn lambda_copying_x_has_no_ontological_reverse() {
    let e = lambda_copies_x();
    assert!(find_ontological_time_reverse(&e, &e, 0.0).unwrap().is_none());
    assert!(!check_independences(&e, 0.0).measurement.holds);
}

#[test]
fn bijection_search_guards() {
    let big = Alphabet::range(9);
    let ext = OnticExtension::from_fn(Scenario::binary(), big, 1e-12, |_, _, _, _, _| 1.0 / 36.0).unwrap();
    assert!(matches!(
        find_ontological_time_reverse(&ext, &ext, 1e-12),
        Err(crate::Error::GuardExceeded(_, _))
    ));
    let other = OnticExtension::from_fn(
        Scenario::new(
            Alphabet::range(3),
            Alphabet::binary(),
            Alphabet::binary(),
            Alphabet::binary(),
        ),
        Alphabet::range(1),
        0.0,
        |_, a, _, b, _| if a == b { q(1, 2) } else { Q::zero() },
    )
    .unwrap();
    assert!(find_ontological_time_reverse(&toy(), &other, 0.0).is_err());
}

#[test]
fn retrocausal_extension_fails_with_witness() {
    let r = check_no_retrocausality(&lambda_copies_y(), 0.0);
    assert!(!r.holds);
    let w = r.witness.unwrap();
    assert!(w.lambda.is_some() && w.y.is_some());
    // p(lambda|a,x,y) is a point mass, the y-average is 1/2
    assert_eq!(r.exact_violation.as_deref(), Some("1/2"));
}

#[test]
fn directly_wired_outcome_breaks_mediation() {
    let e = OnticExtension::from_fn(Scenario::binary(), Alphabet::range(1), 0.0, |_, a, _, b, _| {
        if a == b {
            q(1, 2)
        } else {
            Q::zero()
        }
    })
    .unwrap();
    let med = check_lambda_mediation(&e, 0.0);
    assert!(!med.strong.holds);
    assert!(!med.weak.holds);
    assert!(!check_local_causality(&e, 0.0).holds);
}

#[test]
fn product_behavior_is_locally_causal() {
    let e = OnticExtension::from_fn(Scenario::binary(), Alphabet::range(1), 0.0, |x, a, y, b, _| {
        let pa = if a == 0 { q(1 + x as i64, 3) } else { q(2 - x as i64, 3) };
        let pb = if b == 0 {
            q(1, 4 + y as i64)
        } else {
            q(3 + y as i64, 4 + y as i64)
        };
        pa * pb
    })
    .unwrap();
    assert!(check_local_causality(&e, 0.0).holds);
    assert!(check_independences(&e, 0.0).all_hold());
}

#[test]
fn zero_probability_cells_are_skipped() {
    // a is always 0: conditioning on a = 1 is never possible
    let e = OnticExtension::from_fn(Scenario::binary(), Alphabet::binary(), 0.0, |_, a, _, b, l| {
        if a == 0 && b == l {
            q(1, 2)
        } else {
            Q::zero()
        }
    })
    .unwrap();
    let r = check_no_retrocausality(&e, 0.0);
    assert!(r.holds);
    assert_eq!(r.skipped, 4);
}

#[test]
fn toy_is_psi_epistemic_with_shared_state() {
    let t = toy();
    let labels = distinct_state_labels(t.scenario());
    match check_psi_ontic(&t, &labels, 0.0) {
        PsiClassification::Epistemic { witness, .. } => {
            assert_eq!(witness.first, ("0".into(), "0".into()));
            assert_eq!(witness.second, ("1".into(), "0".into()));
            assert_eq!(witness.lambda, "00");
            assert_eq!(witness.p_first, 0.5);
            assert_eq!(witness.p_second, 0.5);
        }
        other => panic!("expected psi-epistemic, got {other:?}"),
    }
    let same = vec![vec!["psi".to_string(); 2]; 2];
    assert!(check_psi_ontic(&t, &same, 0.0).is_ontic());
}

#[test]
fn delta_epistemic_states_are_psi_ontic() {
    let e = build_price_psi_ontic_extension::<Q>();
    assert!(check_psi_ontic(&e, &distinct_state_labels(e.scenario()), 0.0).is_ontic());
}

#[test]
fn price_demo_default_shows_contradiction() {
    let r = price_contradiction_demo::<Q>(None, 0.0).unwrap();
    assert!(r.applicable);
    assert!(r.disjoint_supports);
    assert_eq!(r.supports[0].1, vec!["x0a0".to_string(), "x0a1".to_string()]);
    assert_eq!(r.supports[1].1, vec!["x1a0".to_string(), "x1a1".to_string()]);
    let mi = r.reverse_measurement_independence.unwrap();
    assert!(!mi.holds && mi.witness.is_some());
    assert!(!r.reverse_no_retrocausality.unwrap().holds);
    assert!(r.contradiction);
    // the forward table itself satisfies no retrocausality
    assert!(check_no_retrocausality(&build_price_psi_ontic_extension::<Q>(), 0.0).holds);
}

#[test]
fn price_demo_inapplicable_cases() {
    let t = toy();
    let labels = distinct_state_labels(t.scenario());
    let r = price_contradiction_demo(Some((&t, &labels)), 0.0).unwrap();
    assert!(!r.applicable && !r.contradiction);

    let scenario = Scenario::new(
        Alphabet::binary(),
        Alphabet::binary(),
        Alphabet::range(1),
        Alphabet::range(1),
    );
    let single = OnticExtension::from_fn(scenario, Alphabet::range(1), 0.0, |_, _, _, _, _| q(1, 2)).unwrap();
    let labels = distinct_state_labels(single.scenario());
    let r = price_contradiction_demo(Some((&single, &labels)), 0.0).unwrap();
    assert!(!r.applicable);
}

#[test]
fn document_round_trip_is_exact() {
    let t = toy();
    let json = extension_to_json(&t, None);
    let (back, labels) = extension_from_json(&json, 0.0).unwrap();
    assert_eq!(back, t);
    assert!(labels.is_none());
    assert!(json.contains("\"1/4\""));
}

#[test]
fn document_rejects_bad_input() {
    let json = extension_to_json(&toy(), None);
    let unnormalized = json.replacen("\"1/4\"", "\"1/3\"", 1);
    assert!(extension_from_json(&unnormalized, 1e-9).is_err());
    let bad_label = json.replacen("\"lambda\": \"00\"", "\"lambda\": \"zz\"", 1);
    assert!(extension_from_json(&bad_label, 1e-9).is_err());
    let bad_number = json.replacen("\"1/4\"", "\"quarter\"", 1);
    assert!(extension_from_json(&bad_number, 1e-9).is_err());
    let decimals = json.replace("\"1/4\"", "\"0.25\"");
    assert_eq!(extension_from_json(&decimals, 0.0).unwrap().0, toy());
}

fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<Q> {
    let w: Vec<i64> = (0..n).map(|_| rng.random_range(0..4)).collect();
    let total: i64 = w.iter().sum();
    if total == 0 {
        let mut v = vec![Q::zero(); n];
        v[rng.random_range(0..n)] = Q::one();
        return v;
    }
    w.into_iter().map(|v| q(v, total)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_ontological_models_pass(seed in any::<u64>(), nx in 1usize..4, na in 1usize..4, ny in 1usize..4, nb in 1usize..4, nl in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scenario = Scenario::new(Alphabet::range(nx), Alphabet::range(na), Alphabet::range(ny), Alphabet::range(nb));
        let outcome: Vec<Vec<Q>> = (0..nx).map(|_| random_simplex(&mut rng, na)).collect();
        let epistemic: Vec<Vec<Vec<Q>>> = (0..nx).map(|_| (0..na).map(|_| random_simplex(&mut rng, nl)).collect()).collect();
        let response: Vec<Vec<Vec<Q>>> = (0..ny).map(|_| (0..nl).map(|_| random_simplex(&mut rng, nb)).collect()).collect();
        let ext = ontological_model_extension(scenario, Alphabet::range(nl), &outcome, &epistemic, &response, 0.0).unwrap();
        prop_assert!(check_no_retrocausality(&ext, 0.0).holds);
        let med = check_lambda_mediation(&ext, 0.0);
        prop_assert!(med.strong.holds);
        prop_assert!(med.weak.holds);
        // normalization survives marginalization
        prop_assert!(ext.marginalize(0.0).is_ok());
    }

    #[test]
    fn local_causality_implies_independences(seed in any::<u64>(), nl in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prior = random_simplex(&mut rng, nl);
        let left: Vec<Vec<Vec<Q>>> = (0..2).map(|_| (0..nl).map(|_| random_simplex(&mut rng, 2)).collect()).collect();
        let right: Vec<Vec<Vec<Q>>> = (0..3).map(|_| (0..nl).map(|_| random_simplex(&mut rng, 2)).collect()).collect();
        let scenario = Scenario::new(Alphabet::binary(), Alphabet::binary(), Alphabet::range(3), Alphabet::binary());
        let ext = locally_causal_extension(scenario, Alphabet::range(nl), &prior, &left, &right, 0.0).unwrap();
        prop_assert!(check_local_causality(&ext, 0.0).holds);
        prop_assert!(check_independences(&ext, 0.0).all_hold());
        prop_assert!(check_no_retrocausality(&ext, 0.0).holds);
    }

    #[test]
    fn swapping_twice_is_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scenario = Scenario::new(Alphabet::range(2), Alphabet::range(3), Alphabet::range(1), Alphabet::range(2));
        let cells = scenario.cells() * 2;
        let mut joint = Vec::with_capacity(cells);
        for _ in 0..2 {
            joint.extend(random_simplex(&mut rng, 3 * 2 * 2));
        }
        // joint is laid out (x, a, y, b, lambda) so each x block is one simplex
        let ext = OnticExtension::new(scenario, Alphabet::binary(), joint, 0.0).unwrap();
        prop_assert_eq!(ext.swapped().swapped(), ext.clone());
        prop_assert_eq!(ext.swapped().marginalize(0.0).unwrap(), ext.marginalize(0.0).unwrap().swapped());
    }
}
